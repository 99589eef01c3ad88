#include "churnlab/types.hpp"

#include <cmath>
#include <stdexcept>

namespace churnlab {

int LabeledDataset::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < specs.size(); ++j) {
        if (specs[j].name == name) return static_cast<int>(j);
    }
    return -1;
}

Vector LabeledDataset::column(const std::string& name) const {
    const int j = column_index(name);
    if (j < 0) throw std::invalid_argument("no such feature: " + name);
    return features.col(j);
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
    std::vector<std::size_t> counts(2, 0);
    for (int y : labels) ++counts[static_cast<std::size_t>(y)];
    return counts;
}

void LabeledDataset::validate() const {
    if (static_cast<Eigen::Index>(specs.size()) != features.cols())
        throw std::invalid_argument("feature spec count does not match column count");
    if (static_cast<Eigen::Index>(labels.size()) != features.rows())
        throw std::invalid_argument("label count does not match row count");
    if (!member_ids.empty() &&
        static_cast<Eigen::Index>(member_ids.size()) != features.rows())
        throw std::invalid_argument("member id count does not match row count");
    for (int y : labels) {
        if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0 or 1");
    }
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        for (Eigen::Index j = 0; j < features.cols(); ++j) {
            const double v = features(i, j);
            if (!std::isfinite(v))
                throw std::invalid_argument("non-finite value in feature matrix at row " +
                                            std::to_string(i) + ", column " +
                                            std::to_string(j));
            const auto& spec = specs[static_cast<std::size_t>(j)];
            if (spec.kind == FeatureKind::nominal) {
                if (v != std::floor(v) || v < 0.0 ||
                    v >= static_cast<double>(spec.categories.size()))
                    throw std::invalid_argument("invalid category index for feature " +
                                                spec.name);
            }
        }
    }
}

} // namespace churnlab
