#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace churnlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class FeatureKind { numeric, nominal };

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::numeric;
    // Category dictionary for nominal features. The matrix cell stores an
    // index into this list. Empty for numeric features.
    std::vector<std::string> categories;
};

// Rectangular supervised snapshot: one row per member, one column per
// feature, binary labels. member_ids keep row provenance for in-memory
// checks; they are not part of the CSV interchange format.
struct LabeledDataset {
    Matrix features;
    std::vector<int> labels;
    std::vector<FeatureSpec> specs;
    std::vector<std::string> member_ids;

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index cols() const { return features.cols(); }

    // -1 when no spec has that name.
    int column_index(const std::string& name) const;
    Vector column(const std::string& name) const;

    std::vector<std::size_t> class_counts() const; // {count0, count1}

    // Enforces the structural invariants: spec count matches columns,
    // label count matches rows, labels in {0,1}, ids (when present) match
    // rows, all cells finite, nominal cells are valid category indices.
    void validate() const;
};

// Raw longitudinal record for one fund member. Monthly attributes are
// sparse: a month key is present only when the attribute was observed.
struct MemberRecord {
    std::string member_id;
    int account_open_month = 0;
    std::optional<int> account_close_month;
    // month -> attribute name -> value
    std::map<int, std::map<std::string, double>> monthly_attributes;
    std::map<std::string, std::string> static_attributes;

    int tenure_at(int month) const { return month - account_open_month; }
    bool open_at(int month) const {
        return account_open_month <= month &&
               (!account_close_month || *account_close_month > month);
    }
};

// Snapshot windows around an anchor month. The observation window is the
// closed interval [anchor - observation_len + 1, anchor]; the outcome
// window is (anchor, anchor + outcome_len].
struct WindowSpec {
    int anchor_month = 0;
    int observation_len = 12;
    int outcome_len = 6;

    int first_observed_month() const { return anchor_month - observation_len + 1; }
    int last_outcome_month() const { return anchor_month + outcome_len; }
};

} // namespace churnlab
