#pragma once

/// \file bench.hpp
///
/// Experiment drivers behind the psglob_bench CLI: single solves, thread
/// scaling sweeps, PS-vs-BT comparisons and trial-point traces, plus the CSV
/// and SVG writers they share.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "psglob/error.hpp"
#include "psglob/problems.hpp"
#include "psglob/solver.hpp"
#include "psglob/vector.hpp"

namespace psglob::bench {

struct RunSpec {
  std::string problem = "rosenbrock";
  std::size_t n = 2;
  double condition = 100.0;
  SolverConfig config;
  std::uint64_t seed = 0;  // nonzero: perturb the initial point
  std::size_t repeat = 1;
  std::optional<Vector> x0;

  void validate() const {
    config.validate();
    require(repeat >= 1, ErrorCode::invalid_argument, "repeat must be at least 1");
    if (x0)
      require(x0->size() == n, ErrorCode::invalid_argument, "--x0 length must equal --n");
  }
};

/// Initial point for a spec: explicit x0, else the problem default, optionally
/// perturbed by seeded noise of relative size 0.1.
inline Vector starting_point(const RunSpec &spec, const Objective &obj) {
  if (spec.x0)
    return *spec.x0;
  Vector x = obj.initial_point();
  if (spec.seed != 0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 0.1);
    for (double &v : x)
      v += noise(rng) * std::max(1.0, std::abs(v));
  }
  return x;
}

// ------------------------------------------------------------------ CSV ---

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

struct ReportRow {
  std::string problem;
  std::size_t n = 0;
  std::string strategy;
  int p = 1;
  std::string status;
  std::size_t outer_iters = 0;
  std::size_t total_fevals = 0;
  double f_star = 0.0;
  double gnorm_scaled = 0.0;
  double wall_seconds = 0.0;

  static constexpr std::string_view header =
      "problem,n,strategy,p,status,outer_iters,total_fevals,f_star,gnorm_scaled,wall_seconds";

  std::string to_csv() const {
    std::ostringstream os;
    os << problem << ',' << n << ',' << strategy << ',' << p << ',' << status << ','
       << outer_iters << ',' << total_fevals << ',' << format_double(f_star) << ','
       << format_double(gnorm_scaled) << ',' << format_double(wall_seconds);
    return os.str();
  }

  static ReportRow from_csv(std::string_view line) {
    const auto f = split_csv_line(line);
    if (f.size() != 10)
      throw Error(ErrorCode::invalid_argument, "report row needs 10 fields");
    ReportRow r;
    r.problem = f[0];
    r.n = std::stoull(f[1]);
    r.strategy = f[2];
    r.p = std::stoi(f[3]);
    r.status = f[4];
    r.outer_iters = std::stoull(f[5]);
    r.total_fevals = std::stoull(f[6]);
    r.f_star = std::stod(f[7]);
    r.gnorm_scaled = std::stod(f[8]);
    r.wall_seconds = std::stod(f[9]);
    return r;
  }

  friend bool operator==(const ReportRow &, const ReportRow &) = default;
};

inline std::vector<ReportRow> parse_report(std::istream &in) {
  std::vector<ReportRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("problem,", 0) == 0)
        continue;
    }
    rows.push_back(ReportRow::from_csv(line));
  }
  return rows;
}

inline double median(std::vector<double> v) {
  require(!v.empty(), ErrorCode::invalid_argument, "median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// ---------------------------------------------------------------- solve ---

struct SolveOutcome {
  ReportRow row;
  SolveResult result;  // from the last repeat
};

inline SolveOutcome run_solve(const RunSpec &spec) {
  spec.validate();
  const Objective obj = make_problem(spec.problem, spec.n, spec.condition);
  const Vector x0 = starting_point(spec, obj);
  std::vector<double> times;
  SolveOutcome out;
  for (std::size_t r = 0; r < spec.repeat; ++r) {
    out.result = solve(obj, x0, spec.config);
    times.push_back(out.result.wall_seconds());
  }
  const SolveResult &res = out.result;
  out.row = {spec.problem,
             spec.n,
             std::string(to_string(spec.config.strategy)),
             spec.config.plan.threads,
             std::string(to_string(res.status)),
             res.outer_iterations(),
             res.total_fevals(),
             res.f_star,
             res.gnorm_scaled(),
             median(times)};
  return out;
}

// -------------------------------------------------------------- scaling ---

struct ScalingRow {
  ReportRow row;
  double speedup = std::numeric_limits<double>::quiet_NaN();
  std::string error;

  static constexpr std::string_view header =
      "problem,n,strategy,p,status,outer_iters,total_fevals,f_star,gnorm_scaled,wall_seconds,speedup";

  std::string to_csv() const { return row.to_csv() + ',' + format_double(speedup); }
};

/// Cartesian sweep over problems x sizes x thread counts. Per cell the wall
/// time is the median over `base.repeat` runs; speedup is time(p=1)/time(p)
/// when the sweep includes p = 1. Failing cells are recorded, not thrown.
inline std::vector<ScalingRow> run_scaling(const std::vector<std::string> &problems,
                                           const std::vector<std::size_t> &sizes,
                                           const std::vector<int> &thread_counts,
                                           const RunSpec &base) {
  std::vector<ScalingRow> rows;
  for (const auto &problem : problems) {
    for (std::size_t n : sizes) {
      std::optional<double> serial;
      const std::size_t first = rows.size();
      for (int p : thread_counts) {
        RunSpec spec = base;
        spec.problem = problem;
        spec.n = n;
        spec.x0.reset();
        spec.config.plan.threads = p;
        ScalingRow row;
        try {
          row.row = run_solve(spec).row;
        } catch (const Error &e) {
          row.row.problem = problem;
          row.row.n = n;
          row.row.strategy = std::string(to_string(spec.config.strategy));
          row.row.p = p;
          row.row.status = "Error";
          row.error = e.what();
        }
        if (p == 1 && row.error.empty())
          serial = row.row.wall_seconds;
        rows.push_back(std::move(row));
      }
      if (serial)
        for (std::size_t i = first; i < rows.size(); ++i)
          if (rows[i].error.empty() && rows[i].row.wall_seconds > 0.0)
            rows[i].speedup = *serial / rows[i].row.wall_seconds;
          else if (rows[i].error.empty() && rows[i].row.p == 1)
            rows[i].speedup = 1.0;
    }
  }
  return rows;
}

// -------------------------------------------------------------- compare ---

struct SuiteEntry {
  std::string problem;
  std::size_t n;
  double condition = 100.0;
};

/// Built-in comparison suite.
inline std::vector<SuiteEntry> default_suite() {
  return {{"quadratic", 100, 10.0},  {"quadratic", 100, 100.0}, {"quadratic", 100, 1000.0},
          {"rosenbrock", 2},         {"rosenbrock", 10},        {"rosenbrock", 100},
          {"cosine", 1000},          {"noncvxun", 1000}};
}

struct CompareRow {
  std::string problem;
  std::size_t n = 0;
  double condition = 0.0;
  std::string init;
  std::string ps_status;
  std::string bt_status;
  std::size_t ps_fevals = 0;
  std::size_t bt_fevals = 0;
  double ps_f = 0.0;
  double bt_f = 0.0;
  bool same_solution = false;
  std::string verdict;  // ps_fewer, equal, bt_fewer, excluded

  static constexpr std::string_view header =
      "problem,n,condition,init,ps_status,bt_status,ps_fevals,bt_fevals,ps_f,bt_f,same_solution,verdict";

  std::string to_csv() const {
    std::ostringstream os;
    os << problem << ',' << n << ',' << format_double(condition) << ',' << init << ','
       << ps_status << ',' << bt_status << ',' << ps_fevals << ',' << bt_fevals << ','
       << format_double(ps_f) << ',' << format_double(bt_f) << ',' << (same_solution ? 1 : 0)
       << ',' << verdict;
    return os.str();
  }
};

struct CompareSummary {
  std::size_t compared = 0;
  std::size_t excluded = 0;
  double ps_fewer_pct = 0.0;
  double equal_pct = 0.0;
  double bt_fewer_pct = 0.0;
};

/// Two runs reached the same stationary point: objective values agree to
/// 1e-6 relative (floored at 1) and the first two solution components agree
/// to 1e-4 absolute.
inline bool same_solution(const SolveResult &a, const SolveResult &b) {
  const double fscale = std::max({1.0, std::abs(a.f_star), std::abs(b.f_star)});
  if (std::abs(a.f_star - b.f_star) > 1e-6 * fscale)
    return false;
  const std::size_t k = std::min<std::size_t>(2, a.x_star.size());
  for (std::size_t i = 0; i < k; ++i)
    if (std::abs(a.x_star[i] - b.x_star[i]) > 1e-4)
      return false;
  return true;
}

/// Runs PS and BT from the same start for every suite entry. Only pairs where
/// both converged to the same solution count toward the percentages.
inline std::vector<CompareRow> run_compare(const std::vector<SuiteEntry> &suite,
                                           const SolverConfig &base) {
  std::vector<CompareRow> rows;
  for (const auto &entry : suite) {
    const Objective obj = make_problem(entry.problem, entry.n, entry.condition);
    const Vector x0 = obj.initial_point();
    SolverConfig ps_cfg = base;
    ps_cfg.strategy = Strategy::ps;
    SolverConfig bt_cfg = base;
    bt_cfg.strategy = Strategy::bt;
    const SolveResult ps = solve(obj, x0, ps_cfg);
    const SolveResult bt = solve(obj, x0, bt_cfg);

    CompareRow row;
    row.problem = entry.problem;
    row.n = entry.n;
    row.condition = entry.problem == "quadratic" ? entry.condition : 0.0;
    row.init = base.init == InitStep::lbfgs ? "lbfgs" + std::to_string(base.memory) : "grad";
    row.ps_status = std::string(to_string(ps.status));
    row.bt_status = std::string(to_string(bt.status));
    row.ps_fevals = ps.total_fevals();
    row.bt_fevals = bt.total_fevals();
    row.ps_f = ps.f_star;
    row.bt_f = bt.f_star;
    const bool both_converged = ps.status == Status::converged && bt.status == Status::converged;
    row.same_solution = both_converged && same_solution(ps, bt);
    if (!row.same_solution)
      row.verdict = "excluded";
    else if (row.ps_fevals < row.bt_fevals)
      row.verdict = "ps_fewer";
    else if (row.ps_fevals == row.bt_fevals)
      row.verdict = "equal";
    else
      row.verdict = "bt_fewer";
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CompareSummary summarize(const std::vector<CompareRow> &rows) {
  CompareSummary s;
  std::size_t fewer = 0, equal = 0, more = 0;
  for (const auto &r : rows) {
    if (r.verdict == "excluded") {
      ++s.excluded;
      continue;
    }
    ++s.compared;
    if (r.verdict == "ps_fewer")
      ++fewer;
    else if (r.verdict == "equal")
      ++equal;
    else
      ++more;
  }
  if (s.compared > 0) {
    const double total = static_cast<double>(s.compared);
    s.ps_fewer_pct = 100.0 * static_cast<double>(fewer) / total;
    s.equal_pct = 100.0 * static_cast<double>(equal) / total;
    s.bt_fewer_pct = 100.0 * static_cast<double>(more) / total;
  }
  return s;
}

/// Single-strategy run of the suite: no comparison columns.
inline std::vector<ReportRow> run_suite_single(const std::vector<SuiteEntry> &suite,
                                               const SolverConfig &cfg) {
  std::vector<ReportRow> rows;
  for (const auto &entry : suite) {
    const Objective obj = make_problem(entry.problem, entry.n, entry.condition);
    const SolveResult r = solve(obj, obj.initial_point(), cfg);
    rows.push_back({entry.problem, entry.n, std::string(to_string(cfg.strategy)), cfg.plan.threads,
                    std::string(to_string(r.status)), r.outer_iterations(), r.total_fevals(),
                    r.f_star, r.gnorm_scaled(), r.wall_seconds()});
  }
  return rows;
}

// ---------------------------------------------------------------- trace ---

struct StrategyTrace {
  Strategy strategy;
  std::vector<TracePoint> points;
};

inline constexpr std::string_view trace_header = "strategy,k,t,x1,x2,f";

inline void write_trace_csv(std::ostream &os, const std::vector<StrategyTrace> &traces) {
  os << trace_header << '\n';
  for (const auto &tr : traces)
    for (const auto &p : tr.points) {
      require(p.x.size() >= 2, ErrorCode::invalid_argument, "trace needs n >= 2");
      os << to_string(tr.strategy) << ',' << p.k << ',' << p.t << ',' << format_double(p.x[0])
         << ',' << format_double(p.x[1]) << ',' << format_double(p.f) << '\n';
    }
}

struct Segment {
  double x0, y0, x1, y1;
};

/// Marching squares for one level on a regular grid; values[j][i] at
/// (xs[i], ys[j]).
inline std::vector<Segment> contour_segments(const std::vector<double> &xs,
                                             const std::vector<double> &ys,
                                             const std::vector<std::vector<double>> &values,
                                             double level) {
  std::vector<Segment> segs;
  auto lerp = [&](double a, double b, double fa, double fb) {
    const double t = (level - fa) / (fb - fa);
    return a + t * (b - a);
  };
  for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double f00 = values[j][i], f10 = values[j][i + 1];
      const double f01 = values[j + 1][i], f11 = values[j + 1][i + 1];
      std::vector<std::pair<double, double>> cuts;
      if ((f00 < level) != (f10 < level))
        cuts.emplace_back(lerp(xs[i], xs[i + 1], f00, f10), ys[j]);
      if ((f10 < level) != (f11 < level))
        cuts.emplace_back(xs[i + 1], lerp(ys[j], ys[j + 1], f10, f11));
      if ((f01 < level) != (f11 < level))
        cuts.emplace_back(lerp(xs[i], xs[i + 1], f01, f11), ys[j + 1]);
      if ((f00 < level) != (f01 < level))
        cuts.emplace_back(xs[i], lerp(ys[j], ys[j + 1], f00, f01));
      for (std::size_t c = 0; c + 1 < cuts.size(); c += 2)
        segs.push_back({cuts[c].first, cuts[c].second, cuts[c + 1].first, cuts[c + 1].second});
    }
  }
  return segs;
}

/// Contour plot of a 2-D objective with log-spaced levels and the trial
/// points of each strategy, labelled by inner iteration index.
inline void write_trace_svg(std::ostream &os, const Objective &obj,
                            const std::vector<StrategyTrace> &traces, std::size_t grid = 160,
                            std::size_t levels = 16) {
  require(obj.dimension() == 2, ErrorCode::invalid_argument, "SVG trace needs a 2-D problem");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto &tr : traces)
    for (const auto &p : tr.points) {
      xmin = std::min(xmin, p.x[0]);
      xmax = std::max(xmax, p.x[0]);
      ymin = std::min(ymin, p.x[1]);
      ymax = std::max(ymax, p.x[1]);
    }
  require(std::isfinite(xmin), ErrorCode::invalid_argument, "empty trace");
  const double padx = std::max(0.2 * (xmax - xmin), 0.1);
  const double pady = std::max(0.2 * (ymax - ymin), 0.1);
  xmin -= padx;
  xmax += padx;
  ymin -= pady;
  ymax += pady;

  std::vector<double> xs(grid), ys(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    xs[i] = xmin + (xmax - xmin) * static_cast<double>(i) / static_cast<double>(grid - 1);
    ys[i] = ymin + (ymax - ymin) * static_cast<double>(i) / static_cast<double>(grid - 1);
  }
  std::vector<std::vector<double>> values(grid, std::vector<double>(grid));
  double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin;
  for (std::size_t j = 0; j < grid; ++j)
    for (std::size_t i = 0; i < grid; ++i) {
      const double f = obj.value(Vector{xs[i], ys[j]});
      values[j][i] = f;
      fmin = std::min(fmin, f);
      fmax = std::max(fmax, f);
    }
  // Levels are log-spaced in f - fmin + offset so that non-positive objectives work.
  const double offset = std::max(1e-3 * (fmax - fmin), 1e-12);
  std::vector<double> level_values;
  for (std::size_t l = 0; l < levels; ++l) {
    const double frac = (static_cast<double>(l) + 0.5) / static_cast<double>(levels);
    level_values.push_back(fmin - offset + std::exp(std::log(offset) +
                                                    frac * (std::log(fmax - fmin + offset) -
                                                            std::log(offset))));
  }

  const double width = 640.0, height = 640.0;
  auto px = [&](double x) { return (x - xmin) / (xmax - xmin) * width; };
  auto py = [&](double y) { return height - (y - ymin) / (ymax - ymin) * height; };

  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<g stroke=\"#9aa4b1\" stroke-width=\"0.8\" fill=\"none\">\n";
  for (double level : level_values)
    for (const auto &s : contour_segments(xs, ys, values, level))
      os << "<line x1=\"" << px(s.x0) << "\" y1=\"" << py(s.y0) << "\" x2=\"" << px(s.x1)
         << "\" y2=\"" << py(s.y1) << "\"/>\n";
  os << "</g>\n";

  static const char *colors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd"};
  std::size_t idx = 0;
  for (const auto &tr : traces) {
    const char *color = colors[idx++ % 4];
    os << "<g class=\"" << to_string(tr.strategy) << "\" fill=\"" << color << "\" stroke=\""
       << color << "\">\n";
    os << "<polyline fill=\"none\" stroke-width=\"1.2\" points=\"";
    for (const auto &p : tr.points)
      os << px(p.x[0]) << ',' << py(p.x[1]) << ' ';
    os << "\"/>\n";
    for (const auto &p : tr.points) {
      os << "<circle cx=\"" << px(p.x[0]) << "\" cy=\"" << py(p.x[1]) << "\" r=\"3\"/>\n";
      os << "<text x=\"" << px(p.x[0]) + 4 << "\" y=\"" << py(p.x[1]) - 4
         << "\" font-size=\"10\" stroke=\"none\">" << p.t << "</text>\n";
    }
    os << "<text x=\"8\" y=\"" << 16 * idx << "\" font-size=\"12\" stroke=\"none\">"
       << to_string(tr.strategy) << "</text>\n";
    os << "</g>\n";
  }
  os << "</svg>\n";
}

}  // namespace psglob::bench
