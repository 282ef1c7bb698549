#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "ibandit/csv.hpp"
#include "ibandit/experiment.hpp"

namespace ib {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 200.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double map(double v, double a, double b) const {
    const double x = log ? std::log10(v) : v;
    return a + (b - a) * (x - lo) / (hi - lo);
  }
};

Axis fit_axis(const std::vector<double>& values, bool log) {
  Axis axis;
  axis.log = log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v) || (log && v <= 0.0)) continue;
    const double x = log ? std::log10(v) : v;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  axis.lo = log ? lo : lo - pad;
  axis.hi = hi + pad;
  return axis;
}

/// Canvas with a plotting frame, tick labels and axis titles.
class Svg {
 public:
  Svg(const std::string& title, const std::string& xlabel, const std::string& ylabel, Axis x, Axis y)
      : x_(x), y_(y) {
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os_ << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape(title)
        << "</text>\n";
    os_ << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
        << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fx = x_.lo + (x_.hi - x_.lo) * i / 4.0;
      const double px = kLeft + (kWidth - kLeft - kRight) * i / 4.0;
      os_ << "<text x=\"" << px << "\" y=\"" << kHeight - kBottom + 18 << "\" text-anchor=\"middle\">"
          << num(x_.log ? std::pow(10.0, fx) : fx) << "</text>\n";
      const double fy = y_.lo + (y_.hi - y_.lo) * i / 4.0;
      const double py = kHeight - kBottom - (kHeight - kTop - kBottom) * i / 4.0;
      os_ << "<text x=\"" << kLeft - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">"
          << num(y_.log ? std::pow(10.0, fy) : fy) << "</text>\n";
    }
    os_ << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 16
        << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
    os_ << "<text x=\"18\" y=\"" << (kTop + kHeight - kBottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << (kTop + kHeight - kBottom) / 2 << ")\">" << escape(ylabel) << "</text>\n";
  }

  double px(double v) const { return x_.map(v, kLeft, kWidth - kRight); }
  double py(double v) const { return y_.map(v, kHeight - kBottom, kTop); }
  bool drawable(double xv, double yv) const {
    return std::isfinite(xv) && std::isfinite(yv) && (!x_.log || xv > 0.0) && (!y_.log || yv > 0.0);
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const char* color) {
    os_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [xv, yv] : pts) {
      if (drawable(xv, yv)) os_ << num(px(xv)) << ',' << num(py(yv)) << ' ';
    }
    os_ << "\"/>\n";
  }

  void marker(double xv, double yv, const char* color, bool filled) {
    if (!drawable(xv, yv)) return;
    os_ << "<circle cx=\"" << num(px(xv)) << "\" cy=\"" << num(py(yv)) << "\" r=\"5\" stroke=\"" << color
        << "\" fill=\"" << (filled ? color : "white") << "\"/>\n";
  }

  void legend(int row, const std::string& label, const char* color) {
    const double y = kTop + 10 + 18 * row;
    const double x = kWidth - kRight + 12;
    os_ << "<rect x=\"" << x << "\" y=\"" << y - 9 << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
    os_ << "<text x=\"" << x + 18 << "\" y=\"" << y + 1 << "\" font-size=\"11\">" << escape(label) << "</text>\n";
  }

  void save(const std::filesystem::path& path) {
    os_ << "</svg>\n";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << os_.str();
  }

 private:
  Axis x_;
  Axis y_;
  std::ostringstream os_;
};

void check_schema(const csv::Table& table, const std::vector<std::string>& expected, const std::filesystem::path& path) {
  if (table.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw DataError(path.string() + ": schema mismatch, expected header " + want);
  }
}

struct ConfigRuns {
  std::string label;
  std::vector<double> regret;
  std::vector<double> rmse;
  std::map<int, std::pair<double, int>> curve;  // t -> (sum cum_regret, count)
};

}  // namespace

void write_report(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out_dir,
                  const ReportOptions& options) {
  if (inputs.empty()) throw ConfigError("report: no input directories");
  std::vector<std::string> order;
  std::map<std::string, ConfigRuns> configs;
  std::set<std::pair<std::string, long long>> seen;

  for (const auto& dir : inputs) {
    const auto runs_path = dir / "runs.csv";
    const auto series_path = dir / "series.csv";
    if (!std::filesystem::exists(runs_path)) throw DataError(runs_path.string() + ": missing");
    if (!std::filesystem::exists(series_path)) throw DataError(series_path.string() + ": missing");
    const auto runs = csv::read(runs_path);
    check_schema(runs, kRunsHeader, runs_path);
    const auto series = csv::read(series_path);
    check_schema(series, kSeriesHeader, series_path);

    const auto c_hash = runs.column("config_hash");
    const auto c_rep = runs.column("rep");
    std::set<std::pair<std::string, long long>> local;
    for (std::size_t i = 0; i < runs.rows.size(); ++i) {
      const auto& row = runs.rows[i];
      const std::string where = runs_path.string() + ":" + std::to_string(runs.line_numbers[i]);
      const long long rep = csv::parse_int(row[c_rep], where);
      if (!seen.emplace(row[c_hash], rep).second) {
        throw DataError(where + ": run " + row[c_hash] + "/" + row[c_rep] + " appears in more than one input");
      }
      local.emplace(row[c_hash], rep);
      auto [it, inserted] = configs.try_emplace(row[c_hash]);
      if (inserted) {
        order.push_back(row[c_hash]);
        it->second.label = row[runs.column("policy")] + " b=" + row[runs.column("beta")] + " C=" +
                           row[runs.column("C_or_objective")] + " k=" + row[runs.column("k")];
      }
      it->second.regret.push_back(csv::parse_double(row[runs.column("final_regret")], where));
      it->second.rmse.push_back(csv::parse_double(row[runs.column("final_rmse")], where));
    }

    const auto s_hash = series.column("config_hash");
    const auto s_rep = series.column("rep");
    const auto s_t = series.column("t");
    const auto s_reg = series.column("cum_regret");
    for (std::size_t i = 0; i < series.rows.size(); ++i) {
      const auto& row = series.rows[i];
      const std::string where = series_path.string() + ":" + std::to_string(series.line_numbers[i]);
      const long long rep = csv::parse_int(row[s_rep], where);
      if (!local.count({row[s_hash], rep})) {
        throw DataError(where + ": series row for run " + row[s_hash] + "/" + row[s_rep] + " not listed in runs.csv");
      }
      auto& point = configs[row[s_hash]].curve[static_cast<int>(csv::parse_int(row[s_t], where))];
      point.first += csv::parse_double(row[s_reg], where);
      point.second += 1;
    }
  }

  std::filesystem::create_directories(out_dir);

  // Pareto scatter of per-config means.
  std::vector<RunSummary> summaries;
  for (const auto& key : order) {
    const auto& c = configs.at(key);
    for (std::size_t i = 0; i < c.regret.size(); ++i) summaries.push_back({key, c.regret[i], c.rmse[i]});
  }
  const auto rows = pareto_summary(summaries);
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    xs.push_back(r.regret_mean);
    ys.push_back(r.rmse_mean);
  }
  Svg pareto("Final regret vs. held-out RMSE (filled: non-dominated)", "mean cumulative regret", "mean RMSE",
             fit_axis(xs, options.log_log), fit_axis(ys, options.log_log));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    pareto.marker(rows[i].regret_mean, rows[i].rmse_mean, color, !rows[i].dominated);
    if (i < 28) pareto.legend(static_cast<int>(i), configs.at(rows[i].config).label, color);
  }
  pareto.save(out_dir / "pareto.svg");

  // Mean cumulative regret curves.
  std::vector<double> ts, regs;
  for (const auto& key : order) {
    for (const auto& [t, acc] : configs.at(key).curve) {
      ts.push_back(t);
      regs.push_back(acc.first / acc.second);
    }
  }
  Svg curves("Mean cumulative regret", "round t", "cumulative regret", fit_axis(ts, options.log_log),
             fit_axis(regs, options.log_log));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    std::vector<std::pair<double, double>> pts;
    for (const auto& [t, acc] : configs.at(order[i]).curve) pts.emplace_back(t, acc.first / acc.second);
    curves.polyline(pts, color);
    if (i < 28) curves.legend(static_cast<int>(i), configs.at(order[i]).label, color);
  }
  curves.save(out_dir / "curves.svg");
}

}  // namespace ib
