#include "churnlab/preprocess.hpp"

#include "churnlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace churnlab::preprocess {

ScalerParams standardize_fit(const Matrix& x, const std::vector<FeatureSpec>& specs) {
    if (x.rows() == 0) throw std::invalid_argument("cannot fit a scaler on zero rows");
    if (static_cast<Eigen::Index>(specs.size()) != x.cols())
        throw std::invalid_argument("spec count does not match column count");
    ScalerParams p;
    p.names.reserve(specs.size());
    for (const auto& s : specs) p.names.push_back(s.name);
    p.mean = x.colwise().mean();
    p.stddev.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double var =
            (x.col(j).array() - p.mean[j]).square().sum() / static_cast<double>(x.rows());
        p.stddev[j] = std::sqrt(var);
    }
    return p;
}

namespace {

void check_scaler_shape(const Matrix& x, const ScalerParams& p) {
    if (x.cols() != p.mean.size())
        throw std::invalid_argument("scaler was fit on a different column count");
}

} // namespace

Matrix standardize_apply(const Matrix& x, const ScalerParams& p) {
    check_scaler_shape(x, p);
    Matrix z = x;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        z.col(j).array() -= p.mean[j];
        if (p.stddev[j] != 0.0) z.col(j) /= p.stddev[j];
    }
    return z;
}

Matrix standardize_invert(const Matrix& z, const ScalerParams& p) {
    check_scaler_shape(z, p);
    Matrix x = z;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (p.stddev[j] != 0.0) x.col(j) *= p.stddev[j];
        x.col(j).array() += p.mean[j];
    }
    return x;
}

nlohmann::ordered_json scaler_to_json(const ScalerParams& p) {
    nlohmann::ordered_json j;
    j["columns"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < p.names.size(); ++i) {
        nlohmann::ordered_json c;
        c["name"] = p.names[i];
        c["mean"] = p.mean[static_cast<Eigen::Index>(i)];
        c["stddev"] = p.stddev[static_cast<Eigen::Index>(i)];
        j["columns"].push_back(c);
    }
    return j;
}

ScalerParams scaler_from_json(const nlohmann::ordered_json& j) {
    ScalerParams p;
    const auto& cols = j.at("columns");
    p.mean.resize(static_cast<Eigen::Index>(cols.size()));
    p.stddev.resize(static_cast<Eigen::Index>(cols.size()));
    Eigen::Index i = 0;
    for (const auto& c : cols) {
        p.names.push_back(c.at("name").get<std::string>());
        p.mean[i] = c.at("mean").get<double>();
        p.stddev[i] = c.at("stddev").get<double>();
        ++i;
    }
    return p;
}

ScalerParams standardize_numeric_fit(const LabeledDataset& ds) {
    // Nominal columns get mean 0 / stddev 0 entries: apply leaves them be.
    ScalerParams p;
    p.mean = Vector::Zero(ds.cols());
    p.stddev = Vector::Zero(ds.cols());
    if (ds.rows() == 0) throw std::invalid_argument("cannot fit a scaler on zero rows");
    for (const auto& s : ds.specs) p.names.push_back(s.name);
    for (Eigen::Index j = 0; j < ds.cols(); ++j) {
        if (ds.specs[static_cast<std::size_t>(j)].kind != FeatureKind::numeric) continue;
        const double mean = ds.features.col(j).mean();
        const double var = (ds.features.col(j).array() - mean).square().sum() /
                           static_cast<double>(ds.rows());
        p.mean[j] = mean;
        p.stddev[j] = std::sqrt(var);
    }
    return p;
}

LabeledDataset standardize_numeric_apply(const LabeledDataset& ds, const ScalerParams& p) {
    if (static_cast<std::size_t>(ds.cols()) != p.names.size())
        throw std::invalid_argument("scaler was fit on a different column count");
    LabeledDataset out = ds;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        if (out.specs[static_cast<std::size_t>(j)].name !=
            p.names[static_cast<std::size_t>(j)])
            throw std::invalid_argument("scaler column names do not match the dataset");
        if (out.specs[static_cast<std::size_t>(j)].kind != FeatureKind::numeric) continue;
        out.features.col(j).array() -= p.mean[j];
        if (p.stddev[j] != 0.0) out.features.col(j) /= p.stddev[j];
    }
    return out;
}

OneHotEncoder one_hot_fit(const LabeledDataset& ds) {
    OneHotEncoder enc;
    for (const auto& s : ds.specs) {
        if (s.kind != FeatureKind::nominal) continue;
        if (s.categories.empty())
            throw std::invalid_argument("nominal feature " + s.name +
                                        " has an empty category dictionary");
        enc.columns.push_back({s.name, s.categories});
    }
    return enc;
}

LabeledDataset one_hot_apply(const LabeledDataset& ds, const OneHotEncoder& enc) {
    ds.validate();
    std::size_t next_encoded = 0;
    Eigen::Index out_cols = 0;
    for (const auto& s : ds.specs) {
        if (s.kind == FeatureKind::nominal) {
            if (next_encoded >= enc.columns.size() ||
                enc.columns[next_encoded].name != s.name)
                throw std::invalid_argument("encoder does not cover nominal feature " +
                                            s.name);
            out_cols += static_cast<Eigen::Index>(enc.columns[next_encoded].categories.size());
            ++next_encoded;
        } else {
            ++out_cols;
        }
    }
    if (next_encoded != enc.columns.size())
        throw std::invalid_argument("encoder lists columns the dataset lacks");

    LabeledDataset out;
    out.labels = ds.labels;
    out.member_ids = ds.member_ids;
    out.features.setZero(ds.rows(), out_cols);
    next_encoded = 0;
    Eigen::Index oj = 0;
    for (Eigen::Index j = 0; j < ds.cols(); ++j) {
        const auto& s = ds.specs[static_cast<std::size_t>(j)];
        if (s.kind != FeatureKind::nominal) {
            out.specs.push_back(s);
            out.features.col(oj) = ds.features.col(j);
            ++oj;
            continue;
        }
        const auto& col = enc.columns[next_encoded++];
        for (const auto& cat : col.categories)
            out.specs.push_back({s.name + "=" + cat, FeatureKind::numeric, {}});
        for (Eigen::Index i = 0; i < ds.rows(); ++i) {
            const auto code = static_cast<std::size_t>(ds.features(i, j));
            const std::string& label = s.categories[code];
            const auto it = std::find(col.categories.begin(), col.categories.end(), label);
            if (it == col.categories.end())
                throw std::invalid_argument("unknown category " + s.name + "=" + label);
            out.features(i, oj + std::distance(col.categories.begin(), it)) = 1.0;
        }
        oj += static_cast<Eigen::Index>(col.categories.size());
    }
    out.validate();
    return out;
}

nlohmann::ordered_json encoder_to_json(const OneHotEncoder& enc) {
    nlohmann::ordered_json j;
    j["columns"] = nlohmann::ordered_json::array();
    for (const auto& c : enc.columns) {
        nlohmann::ordered_json col;
        col["name"] = c.name;
        col["categories"] = c.categories;
        j["columns"].push_back(col);
    }
    return j;
}

OneHotEncoder encoder_from_json(const nlohmann::ordered_json& j) {
    OneHotEncoder enc;
    for (const auto& c : j.at("columns"))
        enc.columns.push_back({c.at("name").get<std::string>(),
                               c.at("categories").get<std::vector<std::string>>()});
    return enc;
}

LabeledDataset smote(const LabeledDataset& ds, const SmoteConfig& cfg) {
    ds.validate();
    if (cfg.k_neighbors < 1) throw std::invalid_argument("k_neighbors must be positive");
    const auto counts = ds.class_counts();
    if (counts[0] == 0 || counts[1] == 0)
        throw std::invalid_argument("smote needs both classes present");

    // Minority class; tie breaks towards class 1.
    const int minority = counts[1] <= counts[0] ? 1 : 0;
    const std::size_t minority_count = counts[static_cast<std::size_t>(minority)];
    const std::size_t majority_count = counts[static_cast<std::size_t>(1 - minority)];

    std::vector<Eigen::Index> min_rows;
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
        if (ds.labels[static_cast<std::size_t>(i)] == minority) min_rows.push_back(i);
    }
    if (min_rows.size() <= static_cast<std::size_t>(cfg.k_neighbors))
        throw std::invalid_argument("too few minority samples for k_neighbors");

    const std::size_t target = cfg.target_minority_count.value_or(majority_count);
    if (target < minority_count)
        throw std::invalid_argument("target minority count below the current count");
    const std::size_t n_new = target - minority_count;

    // Brute-force k nearest minority neighbours per minority row, Euclidean,
    // self excluded, distance ties broken by row order.
    const auto k = static_cast<std::size_t>(cfg.k_neighbors);
    std::vector<std::vector<Eigen::Index>> neighbors(min_rows.size());
    for (std::size_t a = 0; a < min_rows.size(); ++a) {
        std::vector<std::pair<double, Eigen::Index>> dist;
        dist.reserve(min_rows.size() - 1);
        for (std::size_t b = 0; b < min_rows.size(); ++b) {
            if (b == a) continue;
            const double d =
                (ds.features.row(min_rows[a]) - ds.features.row(min_rows[b])).squaredNorm();
            dist.emplace_back(d, min_rows[b]);
        }
        std::sort(dist.begin(), dist.end());
        neighbors[a].reserve(k);
        for (std::size_t t = 0; t < k; ++t) neighbors[a].push_back(dist[t].second);
    }

    LabeledDataset out;
    out.specs = ds.specs;
    out.features.resize(ds.rows() + static_cast<Eigen::Index>(n_new), ds.cols());
    out.features.topRows(ds.rows()) = ds.features;
    out.labels = ds.labels;
    out.member_ids = ds.member_ids;
    if (out.member_ids.empty() && n_new > 0) {
        for (Eigen::Index i = 0; i < ds.rows(); ++i)
            out.member_ids.push_back("row_" + std::to_string(i));
    }

    for (std::size_t s = 0; s < n_new; ++s) {
        const std::size_t base = s % min_rows.size();
        Rng rng(derive_seed(cfg.seed, s));
        const auto pick = static_cast<std::size_t>(rng.below(k));
        const double u = rng.uniform();
        const Eigen::Index row_x = min_rows[base];
        const Eigen::Index row_n = neighbors[base][pick];
        out.features.row(ds.rows() + static_cast<Eigen::Index>(s)) =
            ds.features.row(row_x) + u * (ds.features.row(row_n) - ds.features.row(row_x));
        out.labels.push_back(minority);
        out.member_ids.push_back("smote_" + std::to_string(s));
    }
    out.validate();
    return out;
}

double pearson(const Vector& x, const Vector& y) {
    if (x.size() != y.size()) throw std::invalid_argument("length mismatch");
    if (x.size() < 2) throw std::invalid_argument("need at least two observations");
    const double mx = x.mean();
    const double my = y.mean();
    const Eigen::ArrayXd dx = x.array() - mx;
    const Eigen::ArrayXd dy = y.array() - my;
    const double sxx = (dx * dx).sum();
    const double syy = (dy * dy).sum();
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("pearson is undefined for a constant vector");
    return (dx * dy).sum() / std::sqrt(sxx * syy);
}

CorrelationReport correlation_pairs(const Matrix& x,
                                    const std::vector<FeatureSpec>& specs,
                                    double threshold) {
    if (static_cast<Eigen::Index>(specs.size()) != x.cols())
        throw std::invalid_argument("spec count does not match column count");
    CorrelationReport report;
    std::vector<bool> constant(static_cast<std::size_t>(x.cols()), false);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (x.rows() < 2 || (x.col(j).array() - x(0, j)).abs().maxCoeff() == 0.0) {
            constant[static_cast<std::size_t>(j)] = true;
            report.constant_features.push_back(specs[static_cast<std::size_t>(j)].name);
        }
    }
    struct Entry {
        double abs_r;
        Eigen::Index i, j;
        double r;
    };
    std::vector<Entry> entries;
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        if (constant[static_cast<std::size_t>(i)]) continue;
        for (Eigen::Index j = i + 1; j < x.cols(); ++j) {
            if (constant[static_cast<std::size_t>(j)]) continue;
            const double r = pearson(x.col(i), x.col(j));
            if (std::abs(r) >= threshold) entries.push_back({std::abs(r), i, j, r});
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.abs_r != b.abs_r) return a.abs_r > b.abs_r;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    for (const auto& e : entries)
        report.pairs.push_back({specs[static_cast<std::size_t>(e.i)].name,
                                specs[static_cast<std::size_t>(e.j)].name, e.r});
    return report;
}

} // namespace churnlab::preprocess
