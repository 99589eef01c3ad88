#pragma once

#include "churnlab/types.hpp"

#include <json.hpp>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace churnlab::featsel {

/*
 * Recursive feature elimination driven by a weight-magnitude saliency.
 *
 * For a linear scorer the cost change from zeroing weight i is, to second
 * order, 0.5 * H_ii * w_i^2 (first-order terms vanish at an optimum). With
 * standardized inputs the hessian diagonal of the least-squares cost is
 * constant across features, so the ranking reduces to squared weights; both
 * forms are exposed and the general one is used.
 */

Vector saliency(const Vector& weights, const Vector& hessian_diag);
Vector squared_weight_saliency(const Vector& weights);

// What rfe needs back from a linear trainer: weights and the diagonal of
// the cost hessian in feature space.
struct LinearFit {
    Vector weights;
    double bias = 0.0;
    Vector hessian_diag;
};

using LinearTrainer = std::function<LinearFit(const Matrix&, const std::vector<int>&)>;

// Ridge-stabilised least squares of the labels on the features; the hessian
// diagonal of the mean squared error is (2/n) * sum_j x_ji^2.
LinearFit least_squares_trainer(const Matrix& x, const std::vector<int>& labels);

struct RfeIteration {
    std::map<std::string, double> scores;  // every surviving feature that round
    std::vector<std::string> removed;      // lowest scores; ties drop the
                                           // rightmost column first
};

struct RfeResult {
    std::vector<std::string> elimination_order; // in removal order
    std::vector<std::string> kept;              // original column order
    std::vector<RfeIteration> iterations;
    LabeledDataset reduced;

    nlohmann::ordered_json to_json() const; // ranking + trace, without the data
};

// Repeatedly refits the trainer on the surviving columns and removes the
// min(step, remaining - n_keep) lowest-saliency features until n_keep
// remain. n_keep must be at least 1 and at most the column count.
RfeResult rfe(const LabeledDataset& ds, std::size_t n_keep, std::size_t step = 1,
              const LinearTrainer& trainer = least_squares_trainer);

// Projects a dataset onto the named columns, in the given order.
LabeledDataset select_columns(const LabeledDataset& ds,
                              const std::vector<std::string>& names);

} // namespace churnlab::featsel
