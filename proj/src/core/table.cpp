#include "table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace soniclog {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_cell(const std::string& raw, double* out) {
  std::string s = trim(raw);
  if (s.empty()) return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + s.size()) return false;
  *out = v;
  return true;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

LogTable::LogTable(std::vector<ColumnSpec> specs,
                   std::vector<std::vector<double>> columns,
                   std::vector<std::int64_t> depth_index)
    : specs_(std::move(specs)),
      columns_(std::move(columns)),
      depth_(std::move(depth_index)) {
  if (specs_.size() != columns_.size())
    throw Error(ErrorCode::Internal, "column spec/value count mismatch");
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].size() != depth_.size())
      throw Error(ErrorCode::Internal,
                  "column '" + specs_[i].name + "' length mismatch");
  }
  for (std::size_t r = 1; r < depth_.size(); ++r) {
    if (depth_[r] <= depth_[r - 1])
      throw Error(ErrorCode::InvalidInput,
                  "depth index not strictly increasing at row " +
                      std::to_string(r + 1));
  }
  for (std::size_t i = 0; i < specs_.size(); ++i)
    for (std::size_t j = i + 1; j < specs_.size(); ++j)
      if (specs_[i].name == specs_[j].name)
        throw Error(ErrorCode::Schema,
                    "duplicate column name '" + specs_[i].name + "'");
}

std::span<const double> LogTable::column(const std::string& name) const {
  return columns_[require_column(name)];
}

std::optional<std::size_t> LogTable::find_column(const std::string& name) const {
  for (std::size_t i = 0; i < specs_.size(); ++i)
    if (specs_[i].name == name) return i;
  return std::nullopt;
}

std::size_t LogTable::require_column(const std::string& name) const {
  auto idx = find_column(name);
  if (!idx) throw Error(ErrorCode::Schema, "column '" + name + "' not found");
  return *idx;
}

LogTable LogTable::select_rows(const std::vector<std::size_t>& rows) const {
  std::vector<std::vector<double>> cols(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    cols[c].reserve(rows.size());
    for (std::size_t r : rows) cols[c].push_back(columns_[c][r]);
  }
  std::vector<std::int64_t> depth;
  depth.reserve(rows.size());
  for (std::size_t r : rows) depth.push_back(depth_[r]);
  return LogTable(specs_, std::move(cols), std::move(depth));
}

nlohmann::json CleaningReport::to_json() const {
  return nlohmann::json{
      {"rows_in", rows_in},
      {"rows_out", rows_out},
      {"dropped_by_reason",
       {{"sentinel", dropped_sentinel},
        {"non-finite", dropped_nonfinite},
        {"nonpositive-resistivity", dropped_nonpositive}}},
      {"empty_result", empty_result}};
}

const ColumnStats& SummaryStats::at(const std::string& name) const {
  for (const auto& c : columns)
    if (c.name == name) return c;
  throw Error(ErrorCode::Schema, "no summary for column '" + name + "'");
}

nlohmann::json SummaryStats::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : columns) {
    cols.push_back({{"name", c.name},
                    {"count", c.count},
                    {"mean", c.mean},
                    {"std", c.std_dev},
                    {"min", c.min},
                    {"q25", c.q25},
                    {"q50", c.q50},
                    {"q75", c.q75},
                    {"max", c.max}});
  }
  return nlohmann::json{{"columns", cols}};
}

LogTable load_table(const std::string& path,
                    const std::vector<ColumnSpec>& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::Parse, "'" + path + "': missing header row");
  auto header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  int depth_slot = -1;
  std::vector<ColumnSpec> value_specs;
  std::vector<int> value_slots;
  for (const auto& spec : schema) {
    auto it = std::find(header.begin(), header.end(), spec.name);
    if (it == header.end())
      throw Error(ErrorCode::Schema,
                  "'" + path + "': column '" + spec.name + "' not in header");
    int slot = static_cast<int>(it - header.begin());
    if (spec.kind == ColumnKind::DepthIndex) {
      if (depth_slot >= 0)
        throw Error(ErrorCode::Schema, "more than one depth-index column");
      depth_slot = slot;
    } else {
      value_specs.push_back(spec);
      value_slots.push_back(slot);
    }
  }

  std::vector<std::vector<double>> columns(value_specs.size());
  std::vector<std::int64_t> depth;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    auto cells = split_csv_line(line);
    if (cells.size() < header.size())
      throw Error(ErrorCode::Parse, "'" + path + "': row " +
                      std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    for (std::size_t c = 0; c < value_specs.size(); ++c) {
      double v = 0;
      const std::string& cell = cells[static_cast<std::size_t>(value_slots[c])];
      if (!parse_cell(cell, &v))
        throw Error(ErrorCode::Parse,
                    "'" + path + "': unparseable cell at row " +
                        std::to_string(row) + ", column '" +
                        value_specs[c].name + "' (value '" + trim(cell) + "')");
      columns[c].push_back(v);
    }
    if (depth_slot >= 0) {
      double v = 0;
      const std::string& cell = cells[static_cast<std::size_t>(depth_slot)];
      if (!parse_cell(cell, &v))
        throw Error(ErrorCode::Parse, "'" + path +
                        "': unparseable depth index at row " +
                        std::to_string(row));
      depth.push_back(static_cast<std::int64_t>(std::llround(v)));
    } else {
      depth.push_back(static_cast<std::int64_t>(row - 1));
    }
  }
  return LogTable(std::move(value_specs), std::move(columns), std::move(depth));
}

std::pair<LogTable, CleaningReport> clean(
    const LogTable& table, std::span<const double> sentinels,
    const std::vector<std::string>& nonpositive_invalid) {
  for (double s : sentinels)
    if (!std::isfinite(s))
      throw Error(ErrorCode::InvalidArgument, "sentinel values must be finite");

  std::vector<bool> nonpositive_col(table.n_cols(), false);
  for (const auto& name : nonpositive_invalid)
    nonpositive_col[table.require_column(name)] = true;

  CleaningReport report;
  report.rows_in = table.n_rows();
  std::vector<std::size_t> keep;
  keep.reserve(table.n_rows());
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    bool has_sentinel = false, has_nonfinite = false, has_nonpositive = false;
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
      double v = table.column(c)[r];
      if (!std::isfinite(v)) {
        has_nonfinite = true;
        continue;
      }
      for (double s : sentinels)
        if (v == s) has_sentinel = true;
      if (nonpositive_col[c] && v <= 0) has_nonpositive = true;
    }
    if (has_sentinel)
      ++report.dropped_sentinel;
    else if (has_nonfinite)
      ++report.dropped_nonfinite;
    else if (has_nonpositive)
      ++report.dropped_nonpositive;
    else
      keep.push_back(r);
  }
  report.rows_out = keep.size();
  report.empty_result = keep.empty() && report.rows_in > 0;
  return {table.select_rows(keep), report};
}

LogTable transform_resistivity(const LogTable& table,
                               const std::vector<std::string>& columns,
                               double epsilon) {
  if (!(epsilon > 0))
    throw Error(ErrorCode::InvalidArgument, "epsilon must be > 0");
  std::vector<std::size_t> targets;
  for (const auto& name : columns) targets.push_back(table.require_column(name));

  std::vector<ColumnSpec> specs(table.specs());
  std::vector<std::vector<double>> cols(table.n_cols());
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    auto src = table.column(c);
    cols[c].assign(src.begin(), src.end());
  }
  for (std::size_t c : targets) {
    for (double& v : cols[c]) v = std::log(std::max(v, epsilon));
    specs[c].name = "log" + specs[c].name;
  }
  std::vector<std::int64_t> depth(table.depth_index().begin(),
                                  table.depth_index().end());
  return LogTable(std::move(specs), std::move(cols), std::move(depth));
}

double quantile(std::span<const double> values, double p) {
  if (values.empty())
    throw Error(ErrorCode::EmptyInput, "quantile of empty vector");
  if (!(p >= 0.0 && p <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "quantile probability outside [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double h = static_cast<double>(v.size() - 1) * p;
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  double frac = h - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

SummaryStats summarize(const LogTable& table) {
  if (table.n_rows() == 0)
    throw Error(ErrorCode::EmptyInput, "empty table");
  SummaryStats stats;
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    auto col = table.column(c);
    ColumnStats s;
    s.name = table.spec(c).name;
    s.count = col.size();
    double sum = 0;
    for (double v : col) sum += v;
    s.mean = sum / static_cast<double>(col.size());
    double ss = 0;
    for (double v : col) ss += (v - s.mean) * (v - s.mean);
    s.std_dev = col.size() > 1
                    ? std::sqrt(ss / static_cast<double>(col.size() - 1))
                    : 0.0;
    s.min = *std::min_element(col.begin(), col.end());
    s.max = *std::max_element(col.begin(), col.end());
    s.q25 = quantile(col, 0.25);
    s.q50 = quantile(col, 0.50);
    s.q75 = quantile(col, 0.75);
    stats.columns.push_back(std::move(s));
  }
  return stats;
}

std::pair<LogTable, LogTable> split_holdout(const LogTable& table,
                                            double fraction,
                                            std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "fraction must be in (0, 1)");
  std::size_t n = table.n_rows();
  if (n < 2)
    throw Error(ErrorCode::InvalidArgument, "need at least 2 rows to split");
  auto k = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(n)));
  if (k == 0 || k >= n)
    throw Error(ErrorCode::InvalidArgument,
                "fraction " + format_double(fraction) + " of " +
                    std::to_string(n) + " rows yields an empty split");

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);

  std::vector<bool> in_holdout(n, false);
  for (std::size_t i = 0; i < k; ++i) in_holdout[idx[i]] = true;
  std::vector<std::size_t> train_rows, valid_rows;
  for (std::size_t i = 0; i < n; ++i)
    (in_holdout[i] ? valid_rows : train_rows).push_back(i);
  return {table.select_rows(train_rows), table.select_rows(valid_rows)};
}

void write_csv(const LogTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << "depth_index";
  for (const auto& spec : table.specs()) out << ',' << spec.name;
  out << '\n';
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    out << table.depth_index()[r];
    for (std::size_t c = 0; c < table.n_cols(); ++c)
      out << ',' << format_double(table.column(c)[r]);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

}  // namespace soniclog
