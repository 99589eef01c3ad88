#include "churnlab/featsel.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace churnlab::featsel {

Vector saliency(const Vector& weights, const Vector& hessian_diag) {
    if (weights.size() != hessian_diag.size())
        throw std::invalid_argument("weights and hessian diagonal differ in length");
    return 0.5 * hessian_diag.array() * weights.array().square();
}

Vector squared_weight_saliency(const Vector& weights) {
    return weights.array().square();
}

LinearFit least_squares_trainer(const Matrix& x, const std::vector<int>& labels) {
    if (static_cast<std::size_t>(x.rows()) != labels.size())
        throw std::invalid_argument("row and label counts differ");
    if (x.rows() == 0) throw std::invalid_argument("empty training set");
    const Eigen::Index d = x.cols();
    Matrix a(x.rows(), d + 1);
    a.leftCols(d) = x;
    a.col(d).setOnes();
    Vector y(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        y[i] = static_cast<double>(labels[static_cast<std::size_t>(i)]);
    Matrix gram = a.transpose() * a;
    gram.diagonal().array() += 1e-8;
    const Vector sol = gram.ldlt().solve(a.transpose() * y);
    LinearFit fit;
    fit.weights = sol.head(d);
    fit.bias = sol[d];
    fit.hessian_diag = (2.0 / static_cast<double>(x.rows())) *
                       x.array().square().colwise().sum().transpose().matrix();
    return fit;
}

RfeResult rfe(const LabeledDataset& ds, std::size_t n_keep, std::size_t step,
              const LinearTrainer& trainer) {
    ds.validate();
    const auto d = static_cast<std::size_t>(ds.cols());
    if (n_keep < 1 || n_keep > d)
        throw std::invalid_argument("n_keep must lie in [1, feature count]");
    if (step < 1) throw std::invalid_argument("step must be positive");

    std::vector<std::size_t> surviving(d); // original column indices, ascending
    std::iota(surviving.begin(), surviving.end(), std::size_t{0});

    RfeResult result;
    while (surviving.size() > n_keep) {
        Matrix x(ds.rows(), static_cast<Eigen::Index>(surviving.size()));
        for (std::size_t j = 0; j < surviving.size(); ++j)
            x.col(static_cast<Eigen::Index>(j)) =
                ds.features.col(static_cast<Eigen::Index>(surviving[j]));
        const LinearFit fit = trainer(x, ds.labels);
        if (static_cast<std::size_t>(fit.weights.size()) != surviving.size())
            throw std::invalid_argument("trainer returned wrong weight count");
        const Vector scores = saliency(fit.weights, fit.hessian_diag);

        RfeIteration iter;
        for (std::size_t j = 0; j < surviving.size(); ++j)
            iter.scores[ds.specs[surviving[j]].name] = scores[static_cast<Eigen::Index>(j)];

        const std::size_t n_remove = std::min(step, surviving.size() - n_keep);
        // Sort current positions by score ascending; ties drop the rightmost
        // column first.
        std::vector<std::size_t> order(surviving.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double sa = scores[static_cast<Eigen::Index>(a)];
            const double sb = scores[static_cast<Eigen::Index>(b)];
            if (sa != sb) return sa < sb;
            return a > b;
        });
        std::vector<std::size_t> to_remove(order.begin(),
                                           order.begin() + static_cast<std::ptrdiff_t>(n_remove));
        for (std::size_t pos : to_remove)
            iter.removed.push_back(ds.specs[surviving[pos]].name);
        std::sort(to_remove.begin(), to_remove.end(), std::greater<>());
        for (std::size_t pos : to_remove)
            surviving.erase(surviving.begin() + static_cast<std::ptrdiff_t>(pos));
        result.elimination_order.insert(result.elimination_order.end(),
                                        iter.removed.begin(), iter.removed.end());
        result.iterations.push_back(std::move(iter));
    }

    for (std::size_t idx : surviving) result.kept.push_back(ds.specs[idx].name);
    result.reduced = select_columns(ds, result.kept);
    return result;
}

nlohmann::ordered_json RfeResult::to_json() const {
    nlohmann::ordered_json j;
    j["kept"] = kept;
    j["elimination_order"] = elimination_order;
    j["iterations"] = nlohmann::ordered_json::array();
    for (const auto& it : iterations) {
        nlohmann::ordered_json ij;
        ij["scores"] = nlohmann::ordered_json::object();
        for (const auto& [name, score] : it.scores) ij["scores"][name] = score;
        ij["removed"] = it.removed;
        j["iterations"].push_back(ij);
    }
    return j;
}

LabeledDataset select_columns(const LabeledDataset& ds,
                              const std::vector<std::string>& names) {
    LabeledDataset out;
    out.labels = ds.labels;
    out.member_ids = ds.member_ids;
    out.features.resize(ds.rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        const int src = ds.column_index(names[j]);
        if (src < 0) throw std::invalid_argument("no such feature: " + names[j]);
        out.features.col(static_cast<Eigen::Index>(j)) = ds.features.col(src);
        out.specs.push_back(ds.specs[static_cast<std::size_t>(src)]);
    }
    out.validate();
    return out;
}

} // namespace churnlab::featsel
