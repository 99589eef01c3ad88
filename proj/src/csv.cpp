#include "churnlab/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace churnlab::csv {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open for reading: " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open for writing: " + path);
    return out;
}

bool parse_int(const std::string& s, int& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) fail("double formatting failed");
    return std::string(buf, ptr);
}

double parse_double(const std::string& field, const std::string& context) {
    if (field.empty()) fail("empty numeric field in " + context);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size() || errno == ERANGE)
        fail("malformed numeric field '" + field + "' in " + context);
    return v;
}

std::string escape_field(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_line(const std::string& line, const std::string& context) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) fail("unterminated quote in " + context);
    fields.push_back(cur);
    return fields;
}

namespace {

// Reads all logical lines, tolerating a trailing newline and CRLF endings.
std::vector<std::string> read_lines(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

} // namespace

void write_labeled_csv(const LabeledDataset& ds, const std::string& path) {
    ds.validate();
    auto out = open_out(path);
    for (std::size_t j = 0; j < ds.specs.size(); ++j) {
        out << escape_field(ds.specs[j].name) << ',';
    }
    out << "label\n";
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.cols(); ++j) {
            const auto& spec = ds.specs[static_cast<std::size_t>(j)];
            if (spec.kind == FeatureKind::nominal) {
                const auto code = static_cast<std::size_t>(ds.features(i, j));
                out << escape_field(spec.categories[code]);
            } else {
                out << format_double(ds.features(i, j));
            }
            out << ',';
        }
        out << ds.labels[static_cast<std::size_t>(i)] << '\n';
    }
    if (!out) fail("write failed: " + path);
}

LabeledDataset read_labeled_csv(const std::string& path) {
    auto in = open_in(path);
    const auto lines = read_lines(in);
    if (lines.empty()) fail("empty csv: " + path);
    const auto header = split_line(lines[0], path + " header");
    if (header.empty() || header.back() != "label")
        fail("last column must be 'label' in " + path);
    const std::size_t n_features = header.size() - 1;
    const std::size_t n_rows = lines.size() - 1;

    std::vector<std::vector<std::string>> cells(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        cells[i] = split_line(lines[i + 1], path + " row " + std::to_string(i + 1));
        if (cells[i].size() != header.size())
            fail("row " + std::to_string(i + 1) + " has " +
                 std::to_string(cells[i].size()) + " fields, expected " +
                 std::to_string(header.size()) + " in " + path);
    }

    LabeledDataset ds;
    ds.features.resize(static_cast<Eigen::Index>(n_rows),
                       static_cast<Eigen::Index>(n_features));
    ds.labels.resize(n_rows);
    ds.specs.resize(n_features);
    ds.member_ids.resize(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) ds.member_ids[i] = "row_" + std::to_string(i);

    for (std::size_t j = 0; j < n_features; ++j) {
        ds.specs[j].name = header[j];
        bool numeric = true;
        for (std::size_t i = 0; i < n_rows && numeric; ++i) {
            const std::string& f = cells[i][j];
            errno = 0;
            char* end = nullptr;
            std::strtod(f.c_str(), &end);
            numeric = !f.empty() && end == f.c_str() + f.size() && errno != ERANGE;
        }
        if (numeric || n_rows == 0) {
            ds.specs[j].kind = FeatureKind::numeric;
            for (std::size_t i = 0; i < n_rows; ++i)
                ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    parse_double(cells[i][j], path);
        } else {
            ds.specs[j].kind = FeatureKind::nominal;
            std::set<std::string> distinct;
            for (std::size_t i = 0; i < n_rows; ++i) distinct.insert(cells[i][j]);
            ds.specs[j].categories.assign(distinct.begin(), distinct.end());
            for (std::size_t i = 0; i < n_rows; ++i) {
                const auto it = distinct.find(cells[i][j]);
                ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    static_cast<double>(std::distance(distinct.begin(), it));
            }
        }
    }
    for (std::size_t i = 0; i < n_rows; ++i) {
        const std::string& f = cells[i][n_features];
        if (f == "0") ds.labels[i] = 0;
        else if (f == "1") ds.labels[i] = 1;
        else fail("label must be 0 or 1, got '" + f + "' in " + path);
    }
    ds.validate();
    return ds;
}

void write_member_csvs(const std::vector<MemberRecord>& records,
                       const std::string& monthly_path,
                       const std::string& static_path) {
    {
        auto out = open_out(monthly_path);
        out << "member_id,month,attribute,value\n";
        for (const auto& r : records) {
            for (const auto& [month, attrs] : r.monthly_attributes) {
                for (const auto& [name, value] : attrs) {
                    out << escape_field(r.member_id) << ',' << month << ','
                        << escape_field(name) << ',' << format_double(value) << '\n';
                }
            }
        }
        if (!out) fail("write failed: " + monthly_path);
    }
    {
        auto out = open_out(static_path);
        out << "member_id,attribute,value\n";
        for (const auto& r : records) {
            out << escape_field(r.member_id) << ",account_open_month,"
                << r.account_open_month << '\n';
            if (r.account_close_month)
                out << escape_field(r.member_id) << ",account_close_month,"
                    << *r.account_close_month << '\n';
            for (const auto& [name, value] : r.static_attributes) {
                out << escape_field(r.member_id) << ',' << escape_field(name) << ','
                    << escape_field(value) << '\n';
            }
        }
        if (!out) fail("write failed: " + static_path);
    }
}

std::vector<MemberRecord> read_member_csvs(const std::string& monthly_path,
                                           const std::string& static_path) {
    std::vector<MemberRecord> records;
    std::map<std::string, std::size_t> index; // member_id -> records slot
    auto slot = [&](const std::string& id) -> MemberRecord& {
        auto it = index.find(id);
        if (it == index.end()) {
            it = index.emplace(id, records.size()).first;
            records.emplace_back();
            records.back().member_id = id;
        }
        return records[it->second];
    };

    std::set<std::string> has_open;
    {
        auto in = open_in(static_path);
        const auto lines = read_lines(in);
        if (lines.empty() || split_line(lines[0], static_path) !=
                                 std::vector<std::string>{"member_id", "attribute", "value"})
            fail("expected header member_id,attribute,value in " + static_path);
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const std::string ctx = static_path + " row " + std::to_string(i);
            const auto f = split_line(lines[i], ctx);
            if (f.size() != 3) fail("expected 3 fields in " + ctx);
            auto& r = slot(f[0]);
            if (f[1] == "account_open_month") {
                if (!parse_int(f[2], r.account_open_month))
                    fail("malformed account_open_month in " + ctx);
                has_open.insert(f[0]);
            } else if (f[1] == "account_close_month") {
                int close = 0;
                if (!parse_int(f[2], close))
                    fail("malformed account_close_month in " + ctx);
                r.account_close_month = close;
            } else {
                r.static_attributes[f[1]] = f[2];
            }
        }
    }
    {
        auto in = open_in(monthly_path);
        const auto lines = read_lines(in);
        if (lines.empty() ||
            split_line(lines[0], monthly_path) !=
                std::vector<std::string>{"member_id", "month", "attribute", "value"})
            fail("expected header member_id,month,attribute,value in " + monthly_path);
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const std::string ctx = monthly_path + " row " + std::to_string(i);
            const auto f = split_line(lines[i], ctx);
            if (f.size() != 4) fail("expected 4 fields in " + ctx);
            int month = 0;
            if (!parse_int(f[1], month)) fail("malformed month in " + ctx);
            slot(f[0]).monthly_attributes[month][f[2]] = parse_double(f[3], ctx);
        }
    }
    for (const auto& r : records) {
        if (!has_open.count(r.member_id))
            fail("member " + r.member_id + " has no account_open_month in " + static_path);
    }
    return records;
}

nlohmann::ordered_json read_json_file(const std::string& path) {
    auto in = open_in(path);
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(in);
    } catch (const std::exception& e) {
        fail("malformed json in " + path + ": " + e.what());
    }
    return j;
}

void write_json_file(const nlohmann::ordered_json& j, const std::string& path) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    if (!out) fail("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    auto in = open_in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& text, const std::string& path) {
    auto out = open_out(path);
    out << text;
    if (!out) fail("write failed: " + path);
}

} // namespace churnlab::csv
