#pragma once

#include "churnlab/types.hpp"

#include <json.hpp>

#include <vector>

namespace churnlab::metrics {

struct ConfusionMatrix {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long tn = 0;
    long long total() const { return tp + fp + fn + tn; }
};

ConfusionMatrix confusion(const std::vector<int>& labels,
                          const std::vector<int>& predictions);

double accuracy(const ConfusionMatrix& cm);
double precision(const ConfusionMatrix& cm);
double recall(const ConfusionMatrix& cm);

// Chance-corrected agreement. A degenerate table (expected agreement 1, so
// the correction divides by zero) yields 0 and sets *degenerate.
double cohen_kappa(const ConfusionMatrix& cm, bool* degenerate = nullptr);

// Matthews correlation. A zero denominator (any empty margin) yields 0 and
// sets *degenerate.
double mcc(const ConfusionMatrix& cm, bool* degenerate = nullptr);

// Probability that a random positive scores above a random negative, with
// ties credited 0.5. Literal pairwise O(pos*neg) loop; kept quadratic on
// purpose as the reference form. Throws when either class is absent.
double auc(const Vector& scores, const std::vector<int>& labels);

struct RocPoint {
    double threshold; // predict positive when score >= threshold
    double fpr;
    double tpr;
};

// Threshold sweep over the distinct scores, descending, starting above the
// maximum so the curve runs from (0,0) to (1,1).
std::vector<RocPoint> roc_points(const Vector& scores, const std::vector<int>& labels);

// Trapezoidal area under a ROC curve; equals the pairwise auc.
double auc_from_roc(const std::vector<RocPoint>& points);

struct MetricsBundle {
    double test_acc = 0.0;
    double auc = 0.0;
    double cohen_kappa = 0.0;
    double mcc = 0.0;
    bool kappa_degenerate = false;
    bool mcc_degenerate = false;

    nlohmann::ordered_json to_json() const;
};

// Scores are class-1 probabilities; predictions use score > threshold.
MetricsBundle evaluate(const Vector& scores, const std::vector<int>& labels,
                       double threshold = 0.5);

} // namespace churnlab::metrics
