#include "sfr/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "sfr/errors.hpp"

namespace sfr {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

RawTable parse_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open '" + path + "'");
  RawTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
    auto fields = split_line(line);
    if (lineno == 1) {
      table.header = std::move(fields);
    } else {
      if (fields.size() != table.header.size()) {
        std::ostringstream msg;
        msg << path << ": row " << lineno << " has " << fields.size()
            << " fields, expected " << table.header.size();
        fail(errc::io_error, msg.str());
      }
      table.rows.push_back(std::move(fields));
    }
  }
  if (table.header.empty()) fail(errc::io_error, path + ": empty file");
  return table;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col,
                  const std::string& col_name) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    std::ostringstream msg;
    msg << "row " << row + 2 << ", column '" << col_name << "' (index " << col
        << "): cannot parse '" << cell << "'";
    fail(errc::non_numeric_cell, msg.str());
  }
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "row " << row + 2 << ", column '" << col_name << "': non-finite '"
        << cell << "'";
    fail(errc::non_finite_value, msg.str());
  }
  return value;
}

std::size_t find_column(const RawTable& table, const std::string& name) {
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] == name) return c;
  }
  fail(errc::missing_column, "column '" + name + "' not in header");
}

struct ColumnPlan {
  std::optional<std::size_t> id_col;
  std::optional<std::size_t> target_col;
  std::optional<std::size_t> baseline_col;
  std::vector<std::size_t> feature_cols;
};

ColumnPlan plan_columns(const RawTable& table,
                        const std::optional<std::string>& target,
                        const std::optional<std::string>& baseline,
                        const std::optional<std::string>& id) {
  ColumnPlan plan;
  if (target) plan.target_col = find_column(table, *target);
  if (baseline) plan.baseline_col = find_column(table, *baseline);
  if (id) plan.id_col = find_column(table, *id);
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (plan.target_col == c || plan.baseline_col == c || plan.id_col == c) {
      continue;
    }
    plan.feature_cols.push_back(c);
  }
  return plan;
}

std::vector<std::string> collect_ids(const RawTable& table,
                                     const ColumnPlan& plan) {
  std::vector<std::string> ids;
  ids.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (plan.id_col) {
      ids.push_back(table.rows[r][*plan.id_col]);
    } else {
      ids.push_back(std::to_string(r + 1));
    }
  }
  return ids;
}

Matrix collect_features(const RawTable& table, const ColumnPlan& plan) {
  Matrix m(table.rows.size(), plan.feature_cols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t j = 0; j < plan.feature_cols.size(); ++j) {
      const std::size_t c = plan.feature_cols[j];
      m.at(r, j) = parse_cell(table.rows[r][c], r, c, table.header[c]);
    }
  }
  return m;
}

std::vector<double> collect_column(const RawTable& table, std::size_t c) {
  std::vector<double> v;
  v.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    v.push_back(parse_cell(table.rows[r][c], r, c, table.header[c]));
  }
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvLoadOptions& opts) {
  const RawTable table = parse_table(path);
  const ColumnPlan plan =
      plan_columns(table, opts.target_column, opts.baseline_column,
                   opts.id_column);
  if (table.rows.size() < 2) {
    fail(errc::too_few_samples,
         path + ": " + std::to_string(table.rows.size()) + " data rows");
  }
  if (plan.feature_cols.empty()) {
    fail(errc::no_features, path + ": no feature columns remain");
  }
  Dataset d;
  d.sample_ids = collect_ids(table, plan);
  for (std::size_t c : plan.feature_cols) d.feature_ids.push_back(table.header[c]);
  d.features = collect_features(table, plan);
  d.target = collect_column(table, *plan.target_col);
  if (plan.baseline_col) d.baseline = collect_column(table, *plan.baseline_col);
  d.validate();
  return d;
}

FeatureTable load_feature_csv(const std::string& path,
                              const FeatureCsvOptions& opts) {
  const RawTable table = parse_table(path);
  std::optional<std::string> drop;
  if (opts.drop_target_column) {
    // Only excluded when actually present; prediction inputs need no target.
    for (const auto& h : table.header) {
      if (h == *opts.drop_target_column) {
        drop = opts.drop_target_column;
        break;
      }
    }
  }
  const ColumnPlan plan =
      plan_columns(table, drop, opts.baseline_column, opts.id_column);
  if (table.rows.empty()) fail(errc::too_few_samples, path + ": no data rows");
  if (plan.feature_cols.empty()) {
    fail(errc::no_features, path + ": no feature columns remain");
  }
  FeatureTable t;
  t.sample_ids = collect_ids(table, plan);
  for (std::size_t c : plan.feature_cols) t.feature_ids.push_back(table.header[c]);
  t.features = collect_features(table, plan);
  if (plan.baseline_col) t.baseline = collect_column(table, *plan.baseline_col);
  return t;
}

void write_csv(const Dataset& d, const std::string& path,
               const CsvColumnNames& names) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_error, "cannot write '" + path + "'");
  const bool with_id = !names.id.empty();
  if (with_id) out << names.id << ',';
  for (const auto& f : d.feature_ids) out << f << ',';
  out << names.target;
  if (d.baseline) out << ',' << names.baseline;
  out << '\n';
  for (std::size_t i = 0; i < d.n(); ++i) {
    if (with_id) out << d.sample_ids[i] << ',';
    const auto row = d.features.row(i);
    for (std::size_t j = 0; j < d.p(); ++j) out << format_double(row[j]) << ',';
    out << format_double(d.target[i]);
    if (d.baseline) out << ',' << format_double((*d.baseline)[i]);
    out << '\n';
  }
  if (!out) fail(errc::io_error, "write failed for '" + path + "'");
}

}  // namespace sfr
