#pragma once

#include "churnlab/types.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace churnlab {

// Binary probabilistic classifier. predict_proba returns the class-1
// probability per row; predict applies a threshold (strictly greater).
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual Vector predict_proba(const Matrix& x) const = 0;

    virtual std::vector<int> predict(const Matrix& x, double threshold = 0.5) const {
        const Vector p = predict_proba(x);
        std::vector<int> out(static_cast<std::size_t>(p.size()));
        for (Eigen::Index i = 0; i < p.size(); ++i)
            out[static_cast<std::size_t>(i)] = p[i] > threshold ? 1 : 0;
        return out;
    }

    virtual std::string kind() const = 0;
    virtual nlohmann::ordered_json to_json() const = 0;
};

using ClassifierPtr = std::shared_ptr<Classifier>;

} // namespace churnlab
