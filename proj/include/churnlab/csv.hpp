#pragma once

#include "churnlab/types.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace churnlab::csv {

/*
 * CSV and JSON interchange.
 *
 * Doubles are written with std::to_chars (shortest round-trip form) so that
 * re-reading a file reproduces the exact bit pattern and re-running a
 * pipeline stage reproduces the exact bytes. Fields containing a comma,
 * quote or newline are quoted; quotes are doubled.
 */

std::string format_double(double v);
double parse_double(const std::string& field, const std::string& context);

std::string escape_field(const std::string& field);
std::vector<std::string> split_line(const std::string& line, const std::string& context);

// Labeled snapshot: header row of feature names plus a final "label"
// column. Nominal columns are written as their category string, not the
// code, so the file is meaningful without the category dictionary.
void write_labeled_csv(const LabeledDataset& ds, const std::string& path);

// Reads a labeled snapshot. Columns whose cells all parse as numbers become
// numeric features; anything else becomes a nominal feature with the sorted
// distinct strings as categories. member_ids are synthesized row_<i>.
LabeledDataset read_labeled_csv(const std::string& path);

// Longitudinal corpus interchange, long form.
//   monthly csv: member_id,month,attribute,value
//   static csv:  member_id,attribute,value
// account_open_month and account_close_month are reserved static attribute
// names holding the lifecycle fields; everything else is a nominal static.
void write_member_csvs(const std::vector<MemberRecord>& records,
                       const std::string& monthly_path,
                       const std::string& static_path);
std::vector<MemberRecord> read_member_csvs(const std::string& monthly_path,
                                           const std::string& static_path);

nlohmann::ordered_json read_json_file(const std::string& path);
void write_json_file(const nlohmann::ordered_json& j, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& text, const std::string& path);

} // namespace churnlab::csv
