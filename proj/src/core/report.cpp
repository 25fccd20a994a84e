#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "metrics.hpp"
#include "table.hpp"

namespace soniclog {

namespace {

void validate_input(const ReportInput& input) {
  const PredictionTable& p = input.predictions;
  if (p.mu.empty()) throw Error(ErrorCode::EmptyInput, "no predictions to report");
  if (!input.labels.empty() && input.labels.size() != p.mu.size())
    throw Error(ErrorCode::InvalidInput, "label/prediction length mismatch");
  for (const WindowSpec& w : input.windows)
    if (w.lo > w.hi)
      throw Error(ErrorCode::InvalidArgument,
                  "window " + std::to_string(w.lo) + ".." +
                      std::to_string(w.hi) + " has lo > hi");
}

std::vector<std::size_t> rows_in_window(const PredictionTable& p,
                                        const WindowSpec& w) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < p.depth_index.size(); ++r)
    if (p.depth_index[r] >= w.lo && p.depth_index[r] <= w.hi) rows.push_back(r);
  return rows;
}

double mean_at(const std::vector<double>& v, const std::vector<std::size_t>& rows) {
  double sum = 0;
  for (std::size_t r : rows) sum += v[r];
  return sum / static_cast<double>(rows.size());
}

// Compress sorted depth indices into "a..b" runs of consecutive values.
std::string format_runs(const std::vector<std::int64_t>& depths) {
  std::ostringstream out;
  std::size_t i = 0;
  bool first = true;
  while (i < depths.size()) {
    std::size_t j = i;
    while (j + 1 < depths.size() && depths[j + 1] == depths[j] + 1) ++j;
    if (!first) out << ", ";
    first = false;
    if (j == i)
      out << depths[i];
    else
      out << depths[i] << ".." << depths[j];
    i = j + 1;
  }
  return out.str();
}

std::string fraction_line(std::size_t covered, std::size_t total) {
  std::ostringstream out;
  out << covered << '/' << total << " = "
      << format_double(static_cast<double>(covered) /
                       static_cast<double>(total));
  return out.str();
}

}  // namespace

std::string render_report(const ReportInput& input) {
  validate_input(input);
  const PredictionTable& p = input.predictions;
  const bool labeled = !input.labels.empty();
  const std::size_t n = p.mu.size();

  std::ostringstream out;
  out << "well-log reconstruction report\n";
  out << "==============================\n";
  out << "rows: " << n << '\n';
  out << "depth range: " << p.depth_index.front() << ".."
      << p.depth_index.back() << '\n';

  if (p.probabilistic) {
    out << "\n[intervals]\n";
    out << "level: " << format_double(p.level) << '\n';
    double mean_sigma = 0, mean_width = 0;
    for (std::size_t r = 0; r < n; ++r) {
      mean_sigma += p.sigma[r];
      mean_width += p.hi[r] - p.lo[r];
    }
    out << "mean sigma: " << format_double(mean_sigma / static_cast<double>(n))
        << '\n';
    out << "mean band width: "
        << format_double(mean_width / static_cast<double>(n)) << '\n';
  }

  if (labeled && p.probabilistic) {
    CoverageReport overall =
        interval_coverage(input.labels, p.lo, p.hi, p.level);
    out << "\n[coverage]\n";
    out << "overall: " << fraction_line(overall.covered, overall.total) << '\n';
  }

  QualityFlags flags;
  if (p.probabilistic) {
    flags = variance_flags(p.sigma, p.depth_index, input.flag_k);
    out << "\n[flags]\n";
    out << "rule: " << flags.rule << '\n';
    out << "threshold: " << format_double(flags.threshold) << '\n';
    out << "flagged rows: " << flags.flagged.size() << " of " << n << '\n';
    if (!flags.flagged.empty())
      out << "flagged depths: " << format_runs(flags.flagged) << '\n';
  }

  if (!input.windows.empty()) {
    out << "\n[windows]\n";
    for (const WindowSpec& w : input.windows) {
      out << w.lo << ".." << w.hi << ": ";
      std::vector<std::size_t> rows = rows_in_window(p, w);
      if (rows.empty()) {
        out << "no rows\n";
        continue;
      }
      out << "rows " << rows.size();
      out << ", mean mu " << format_double(mean_at(p.mu, rows));
      if (p.probabilistic)
        out << ", mean sigma " << format_double(mean_at(p.sigma, rows));
      if (labeled && p.probabilistic) {
        std::size_t covered = 0;
        for (std::size_t r : rows)
          if (input.labels[r] >= p.lo[r] && input.labels[r] <= p.hi[r])
            ++covered;
        out << ", coverage " << fraction_line(covered, rows.size());
      }
      if (p.probabilistic) {
        std::size_t flagged = 0;
        for (std::size_t r : rows)
          if (p.sigma[r] > flags.threshold) ++flagged;
        out << ", flags " << flagged;
      }
      out << '\n';
    }
  }
  return out.str();
}

void write_report_text(const std::string& path, const ReportInput& input) {
  std::string text = render_report(input);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

struct PlotScale {
  double x0, x1, y0, y1;  // data ranges
  double px(double depth) const {
    if (x1 == x0) return 480.0;
    return 60.0 + (depth - x0) / (x1 - x0) * 860.0;
  }
  double py(double v) const {
    if (y1 == y0) return 180.0;
    return 20.0 + (y1 - v) / (y1 - y0) * 300.0;
  }
};

void polyline(std::ostringstream& out, const PlotScale& s,
              const std::vector<std::int64_t>& depth,
              const std::vector<double>& v, const char* stroke) {
  out << "<polyline fill=\"none\" stroke=\"" << stroke
      << "\" stroke-width=\"1\" points=\"";
  for (std::size_t r = 0; r < v.size(); ++r)
    out << format_double(round2(s.px(static_cast<double>(depth[r])))) << ','
        << format_double(round2(s.py(v[r]))) << ' ';
  out << "\"/>\n";
}

}  // namespace

void write_report_svg(const std::string& path, const ReportInput& input) {
  validate_input(input);
  const PredictionTable& p = input.predictions;
  const bool labeled = !input.labels.empty();

  PlotScale s{};
  s.x0 = static_cast<double>(p.depth_index.front());
  s.x1 = static_cast<double>(p.depth_index.back());
  double lo = p.mu.front(), hi = p.mu.front();
  auto widen = [&](const std::vector<double>& v) {
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  };
  widen(p.mu);
  if (p.probabilistic) {
    widen(p.lo);
    widen(p.hi);
  }
  if (labeled) widen(input.labels);
  s.y0 = lo;
  s.y1 = hi;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" "
         "height=\"360\" viewBox=\"0 0 960 360\">\n";
  out << "<rect width=\"960\" height=\"360\" fill=\"white\"/>\n";

  for (const WindowSpec& w : input.windows) {
    double a = round2(s.px(static_cast<double>(w.lo)));
    double b = round2(s.px(static_cast<double>(w.hi)));
    out << "<rect x=\"" << format_double(a) << "\" y=\"20\" width=\""
        << format_double(round2(std::max(b - a, 1.0)))
        << "\" height=\"300\" fill=\"#dddddd\" fill-opacity=\"0.5\"/>\n";
  }

  if (p.probabilistic) {
    out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.6\" stroke=\"none\" "
           "points=\"";
    for (std::size_t r = 0; r < p.mu.size(); ++r)
      out << format_double(round2(s.px(static_cast<double>(p.depth_index[r]))))
          << ',' << format_double(round2(s.py(p.lo[r]))) << ' ';
    for (std::size_t r = p.mu.size(); r-- > 0;)
      out << format_double(round2(s.px(static_cast<double>(p.depth_index[r]))))
          << ',' << format_double(round2(s.py(p.hi[r]))) << ' ';
    out << "\"/>\n";
  }

  if (labeled) polyline(out, s, p.depth_index, input.labels, "#444444");
  polyline(out, s, p.depth_index, p.mu, "#1f77b4");

  if (p.probabilistic) {
    QualityFlags flags = variance_flags(p.sigma, p.depth_index, input.flag_k);
    for (std::size_t r = 0; r < p.sigma.size(); ++r) {
      if (p.sigma[r] <= flags.threshold) continue;
      double x = round2(s.px(static_cast<double>(p.depth_index[r])));
      out << "<rect x=\"" << format_double(x)
          << "\" y=\"325\" width=\"1\" height=\"8\" fill=\"#d62728\"/>\n";
    }
  }

  out << "<line x1=\"60\" y1=\"320\" x2=\"920\" y2=\"320\" stroke=\"#000000\" "
         "stroke-width=\"1\"/>\n";
  out << "<line x1=\"60\" y1=\"20\" x2=\"60\" y2=\"320\" stroke=\"#000000\" "
         "stroke-width=\"1\"/>\n";
  out << "<text x=\"60\" y=\"345\" font-size=\"11\">" << p.depth_index.front()
      << "</text>\n";
  out << "<text x=\"880\" y=\"345\" font-size=\"11\">" << p.depth_index.back()
      << "</text>\n";
  out << "<text x=\"5\" y=\"324\" font-size=\"11\">" << format_double(round2(s.y0))
      << "</text>\n";
  out << "<text x=\"5\" y=\"30\" font-size=\"11\">" << format_double(round2(s.y1))
      << "</text>\n";
  out << "</svg>\n";

  std::ofstream file(path);
  if (!file) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  file << out.str();
  if (!file) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

}  // namespace soniclog
