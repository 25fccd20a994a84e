#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace soniclog {

enum class ColumnKind { Feature, Target, DepthIndex };

struct ColumnSpec {
  std::string name;
  std::string unit;
  ColumnKind kind = ColumnKind::Feature;
};

// Named-column numeric table with a strictly increasing depth index per row.
// Immutable after construction; every transformation returns a new table.
class LogTable {
 public:
  LogTable() = default;
  LogTable(std::vector<ColumnSpec> specs,
           std::vector<std::vector<double>> columns,
           std::vector<std::int64_t> depth_index);

  std::size_t n_rows() const { return depth_.size(); }
  std::size_t n_cols() const { return specs_.size(); }

  const std::vector<ColumnSpec>& specs() const { return specs_; }
  const ColumnSpec& spec(std::size_t i) const { return specs_[i]; }
  std::span<const double> column(std::size_t i) const { return columns_[i]; }
  std::span<const double> column(const std::string& name) const;
  std::span<const std::int64_t> depth_index() const { return depth_; }

  std::optional<std::size_t> find_column(const std::string& name) const;
  // Same as find_column but throws a schema error naming the column.
  std::size_t require_column(const std::string& name) const;

  LogTable select_rows(const std::vector<std::size_t>& rows) const;

 private:
  std::vector<ColumnSpec> specs_;
  std::vector<std::vector<double>> columns_;  // column-major, specs_ order
  std::vector<std::int64_t> depth_;
};

struct CleaningReport {
  std::size_t rows_in = 0;
  std::size_t rows_out = 0;
  std::size_t dropped_sentinel = 0;
  std::size_t dropped_nonfinite = 0;
  std::size_t dropped_nonpositive = 0;
  bool empty_result = false;  // warning flag, not an error

  std::size_t dropped_total() const {
    return dropped_sentinel + dropped_nonfinite + dropped_nonpositive;
  }
  nlohmann::json to_json() const;
};

struct ColumnStats {
  std::string name;
  std::size_t count = 0;
  double mean = 0, std_dev = 0, min = 0, q25 = 0, q50 = 0, q75 = 0, max = 0;
};

struct SummaryStats {
  std::vector<ColumnStats> columns;
  const ColumnStats& at(const std::string& name) const;
  nlohmann::json to_json() const;
};

// Reads a comma-separated file with a header row. Columns are matched by the
// schema's names; extra file columns are ignored. A schema entry of kind
// DepthIndex binds the depth index to that column (validated strictly
// increasing); without one the row number 0..n-1 is used.
LogTable load_table(const std::string& path, const std::vector<ColumnSpec>& schema);

// Drops rows holding a sentinel or non-finite value in any declared column.
// Columns listed in nonpositive_invalid additionally treat values <= 0 as
// invalid. Reason precedence per row: sentinel, non-finite, nonpositive.
std::pair<LogTable, CleaningReport> clean(
    const LogTable& table, std::span<const double> sentinels,
    const std::vector<std::string>& nonpositive_invalid = {});

// Replaces v with ln(max(v, epsilon)) in the named columns and renames them
// with a "log" prefix.
LogTable transform_resistivity(const LogTable& table,
                               const std::vector<std::string>& columns,
                               double epsilon);

// Per-column count/mean/sample-std/min/quartiles/max. Quartiles use linear
// interpolation between order statistics.
SummaryStats summarize(const LogTable& table);

// Seeded uniform shuffle; round(fraction*n) rows become the second (holdout)
// table. Both outputs keep the input's row order.
std::pair<LogTable, LogTable> split_holdout(const LogTable& table,
                                            double fraction,
                                            std::uint64_t seed);

void write_csv(const LogTable& table, const std::string& path);

// Interpolated order statistic (type 7) over unsorted values.
double quantile(std::span<const double> values, double p);

// Shortest round-trip decimal form, used everywhere a double is printed so
// that identical runs emit identical bytes.
std::string format_double(double v);

}  // namespace soniclog
