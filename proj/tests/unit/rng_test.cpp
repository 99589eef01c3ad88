#include "churnlab/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

using namespace churnlab;

TEST_CASE("splitmix64 reproduces the reference stream") {
    // First outputs of the public-domain splitmix64 for state 0.
    Rng r(0);
    CHECK(r.next_u64() == 16294208416658607535ULL);
    CHECK(r.next_u64() == 7960286522194355700ULL);
    CHECK(r.next_u64() == 487617019471545679ULL);

    Rng r2(0xDEADBEEFULL);
    CHECK(r2.next_u64() == 5395234354446855067ULL);
}

TEST_CASE("derive_seed is a pure function with distinct streams") {
    CHECK(derive_seed(42, 7) == 15346810243613786311ULL);
    CHECK(derive_seed(42, 8) == 11219885575013859254ULL);
    CHECK(derive_seed(42, 7) == derive_seed(42, 7));
    CHECK(derive_seed(42, 7) != derive_seed(43, 7));

    // No collisions across a band of streams for a fixed master seed.
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(123, s));
    CHECK(seen.size() == 1000);
}

TEST_CASE("uniform stays in [0,1) and uniform_pos in (0,1]") {
    Rng r(1);
    for (int i = 0; i < 10000; ++i) {
        double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        double v = r.uniform_pos();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("below is unbiased over a small modulus") {
    Rng r(99);
    std::vector<int> counts(5, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) counts[r.below(5)]++;
    for (int c : counts) {
        CHECK(c > n / 5 - 1000);
        CHECK(c < n / 5 + 1000);
    }
}

TEST_CASE("gaussian moments match the standard normal") {
    Rng r(7);
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double g = r.gaussian();
        sum += g;
        sum_sq += g * g;
    }
    double mean = sum / n;
    double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("identical seeds give identical streams, different seeds diverge") {
    Rng a(555), b(555), c(556);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        std::uint64_t va = a.next_u64();
        all_equal = all_equal && (va == b.next_u64());
        any_diff = any_diff || (va != c.next_u64());
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("shuffle is a seed-deterministic permutation") {
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[i] = i;
    std::vector<int> w = v, u = v;
    Rng a(3), b(3), c(4);
    a.shuffle(v.begin(), v.end());
    b.shuffle(w.begin(), w.end());
    c.shuffle(u.begin(), u.end());
    CHECK(v == w);
    CHECK(v != u);
    std::set<int> elems(v.begin(), v.end());
    CHECK(elems.size() == 50);
}
