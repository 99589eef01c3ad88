#include "churnlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace churnlab::metrics {

namespace {

void check_labels(const std::vector<int>& labels) {
    for (int y : labels) {
        if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0 or 1");
    }
}

} // namespace

ConfusionMatrix confusion(const std::vector<int>& labels,
                          const std::vector<int>& predictions) {
    if (labels.size() != predictions.size())
        throw std::invalid_argument("labels and predictions differ in length");
    check_labels(labels);
    check_labels(predictions);
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            if (predictions[i] == 1) ++cm.tp;
            else ++cm.fn;
        } else {
            if (predictions[i] == 1) ++cm.fp;
            else ++cm.tn;
        }
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    const long long n = cm.total();
    if (n == 0) throw std::invalid_argument("empty confusion matrix");
    return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(n);
}

double precision(const ConfusionMatrix& cm) {
    const long long d = cm.tp + cm.fp;
    return d == 0 ? 0.0 : static_cast<double>(cm.tp) / static_cast<double>(d);
}

double recall(const ConfusionMatrix& cm) {
    const long long d = cm.tp + cm.fn;
    return d == 0 ? 0.0 : static_cast<double>(cm.tp) / static_cast<double>(d);
}

double cohen_kappa(const ConfusionMatrix& cm, bool* degenerate) {
    if (degenerate) *degenerate = false;
    const double n = static_cast<double>(cm.total());
    if (n == 0) throw std::invalid_argument("empty confusion matrix");
    const double po = static_cast<double>(cm.tp + cm.tn) / n;
    const double p1_true = static_cast<double>(cm.tp + cm.fn) / n;
    const double p1_pred = static_cast<double>(cm.tp + cm.fp) / n;
    const double pe = p1_true * p1_pred + (1.0 - p1_true) * (1.0 - p1_pred);
    if (pe == 1.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return (po - pe) / (1.0 - pe);
}

double mcc(const ConfusionMatrix& cm, bool* degenerate) {
    if (degenerate) *degenerate = false;
    if (cm.total() == 0) throw std::invalid_argument("empty confusion matrix");
    const double tp = static_cast<double>(cm.tp);
    const double fp = static_cast<double>(cm.fp);
    const double fn = static_cast<double>(cm.fn);
    const double tn = static_cast<double>(cm.tn);
    const double denom_sq = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom_sq == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return (tp * tn - fp * fn) / std::sqrt(denom_sq);
}

double auc(const Vector& scores, const std::vector<int>& labels) {
    if (static_cast<std::size_t>(scores.size()) != labels.size())
        throw std::invalid_argument("scores and labels differ in length");
    check_labels(labels);
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) pos.push_back(scores[static_cast<Eigen::Index>(i)]);
        else neg.push_back(scores[static_cast<Eigen::Index>(i)]);
    }
    if (pos.empty() || neg.empty())
        throw std::invalid_argument("auc requires at least one example of each class");
    double credit = 0.0;
    for (double p : pos) {
        for (double q : neg) {
            if (p > q) credit += 1.0;
            else if (p == q) credit += 0.5;
        }
    }
    return credit / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

std::vector<RocPoint> roc_points(const Vector& scores, const std::vector<int>& labels) {
    if (static_cast<std::size_t>(scores.size()) != labels.size())
        throw std::invalid_argument("scores and labels differ in length");
    check_labels(labels);
    const std::size_t n = labels.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(b)];
    });
    long long total_pos = 0, total_neg = 0;
    for (int y : labels) (y == 1 ? total_pos : total_neg) += 1;
    if (total_pos == 0 || total_neg == 0)
        throw std::invalid_argument("roc requires at least one example of each class");

    std::vector<RocPoint> points;
    points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    long long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < n) {
        const double s = scores[static_cast<Eigen::Index>(order[i])];
        while (i < n && scores[static_cast<Eigen::Index>(order[i])] == s) {
            if (labels[order[i]] == 1) ++tp;
            else ++fp;
            ++i;
        }
        points.push_back({s, static_cast<double>(fp) / static_cast<double>(total_neg),
                          static_cast<double>(tp) / static_cast<double>(total_pos)});
    }
    return points;
}

double auc_from_roc(const std::vector<RocPoint>& points) {
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        area += (points[i].fpr - points[i - 1].fpr) *
                (points[i].tpr + points[i - 1].tpr) * 0.5;
    }
    return area;
}

nlohmann::ordered_json MetricsBundle::to_json() const {
    nlohmann::ordered_json j;
    j["test_acc"] = test_acc;
    j["auc"] = auc;
    j["cohen_kappa"] = cohen_kappa;
    j["mcc"] = mcc;
    if (kappa_degenerate) j["kappa_degenerate"] = true;
    if (mcc_degenerate) j["mcc_degenerate"] = true;
    return j;
}

MetricsBundle evaluate(const Vector& scores, const std::vector<int>& labels,
                       double threshold) {
    std::vector<int> preds(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        preds[i] = scores[static_cast<Eigen::Index>(i)] > threshold ? 1 : 0;
    const ConfusionMatrix cm = confusion(labels, preds);
    MetricsBundle b;
    b.test_acc = accuracy(cm);
    b.auc = auc(scores, labels);
    b.cohen_kappa = cohen_kappa(cm, &b.kappa_degenerate);
    b.mcc = mcc(cm, &b.mcc_degenerate);
    return b;
}

} // namespace churnlab::metrics
