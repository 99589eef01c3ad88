#pragma once

#include "churnlab/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace churnlab::dataset {

/*
 * Snapshot construction from longitudinal member records.
 *
 * A member churns for the snapshot anchored at month a when the account
 * closes inside (a, a + outcome_len]. Features summarise the observation
 * window [a - observation_len + 1, a].
 */

enum class Aggregation { last, mean, sum, change_amount, change_ratio, recency };

Aggregation aggregation_from_string(const std::string& s);
std::string aggregation_name(Aggregation a);

// Monthly attribute name -> aggregations to derive from it. Derived columns
// are named "<attribute>_<aggregation>".
using Recipe = std::map<std::string, std::vector<Aggregation>>;

// change_ratio divides by max(|first|, epsilon) so a zero first value does
// not blow up.
inline constexpr double kChangeRatioEpsilon = 1e-9;

struct FilterSpec {
    int min_tenure_months = 6;      // keep tenure strictly greater than this
    double min_balance = 1500.0;    // keep balance at anchor >= this
    std::string balance_attribute = "balance";
};

// Keeps records that are open at the anchor (no close, or close after it),
// have tenure at the anchor strictly above min_tenure_months, and whose
// balance at the anchor is at least min_balance. The balance at the anchor
// is the attribute value at the anchor month, falling back to the latest
// observation at or before it; members with no balance observation drop.
std::vector<MemberRecord> apply_inclusion_filters(const std::vector<MemberRecord>& records,
                                                  const WindowSpec& window,
                                                  const FilterSpec& filter);

// 1 when account_close_month lies in (anchor, anchor + outcome_len], else 0.
// Records already closed at the anchor are a caller error (the inclusion
// filter removes them) and throw.
std::vector<int> label_outcomes(const std::vector<MemberRecord>& records,
                                const WindowSpec& window);

// Builds the labeled snapshot for one window. Columns, in order: the derived
// monthly aggregations (attributes sorted by name, aggregations in recipe
// order), acc_tenure (months open at the anchor), then the static nominal
// attributes sorted by name with lexicographically sorted category lists.
// A member with no monthly observations inside the window, or a missing
// static attribute, is an error. An attribute in the recipe that a member
// never reports inside the window aggregates to 0 (recency: observation_len).
LabeledDataset build_snapshot(const std::vector<MemberRecord>& records,
                              const WindowSpec& window, const Recipe& recipe);

// Snapshots at anchors base, base+step, ... (count of them), each filtered
// and labeled independently. Rows for one member may appear in several
// snapshots; the member_ids keep the provenance.
std::vector<LabeledDataset> slide_windows(const std::vector<MemberRecord>& records,
                                          int base_anchor, int step, int count,
                                          const WindowSpec& window_shape,
                                          const FilterSpec& filter,
                                          const Recipe& recipe);

// Seeded row split. Row order is a Fisher-Yates shuffle of the input; the
// first floor(train_fraction * n) shuffled rows form the train set. The two
// parts partition the input exactly.
std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& ds,
                                                           double train_fraction,
                                                           std::uint64_t seed);

LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<std::size_t>& rows);

} // namespace churnlab::dataset
