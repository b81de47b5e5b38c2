// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "psglob/bench.hpp"
#include "psglob/ext_model.hpp"
#include "psglob/oracle.hpp"
#include "psglob/problems.hpp"
#include "psglob/ps_step.hpp"
#include "psglob/solver.hpp"
#include "random_instances.hpp"

using namespace psglob;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char *title, const Outcome &o) {
  std::printf("%s  %2d  %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass)
    ++failures;
}

template <class... Args>
std::string fmt(const char *f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

TrialState bundle(const Vector &s, const Vector &y) {
  TrialState t;
  t.s_t = s;
  t.y_t = y;
  return t;
}

double rel_gap(const Vector &a, const Vector &b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    ref += b[i] * b[i];
  }
  return std::sqrt(diff / ref);
}

// Closed-form step against the dense solve and spectrum, then contraction and
// descent on the same instances.
void step_sweep() {
  fixtures::Rng rng(101);
  const auto t0 = Clock::now();
  double worst_step = 0.0, worst_eig = 0.0;
  std::size_t contraction = 0, descent = 0, fallbacks = 0;
  const int count = 10000;
  for (int i = 0; i < count; ++i) {
    const auto in = fixtures::random_step_instance(rng, rng.index(2, 50));
    const GeneralStep r = general_step(in.g, bundle(in.s, in.y), 0.5);
    fallbacks += r.fallback ? 1 : 0;
    worst_step = std::max(worst_step, rel_gap(r.s_next, oracle::dense_bbar_solve(
                                                            in.s, in.y, in.g, r.coeffs.sigma)));
    const InnerProducts v = fused_products(in.s, in.y, in.g);
    const BbarSpectrum b = bbar_eigenvalues(v, r.coeffs.sigma);
    const auto ev = oracle::dense_eigs(oracle::bbar_matrix(in.s, in.y, r.coeffs.sigma));
    const double scale = std::max(1.0, ev.back());
    worst_eig = std::max({worst_eig, std::abs(ev.front() - b.lambda_min) / scale,
                          std::abs(ev.back() - b.lambda_max) / scale});
    for (std::size_t k = 1; k + 1 < ev.size(); ++k)
      worst_eig = std::max(worst_eig, std::abs(ev[k] - b.lambda_bulk) / scale);

    if (norm(r.s_next) > 0.5 * std::sqrt(v.v2) * (1 + 1e-12))
      ++contraction;
    const double gs = dot(in.g, r.s_next);
    if (!(gs < 0.0) || -gs < v.v2 * v.v5 / b.lambda_max * (1 - 1e-9))
      ++descent;
  }
  const double elapsed = seconds_since(t0);
  report(1, "closed-form step and spectrum match dense oracles",
         {worst_step <= 1e-9 && worst_eig <= 1e-10 && elapsed < 30.0,
          fmt("%d instances, max step rel err %.2e (<=1e-9), max eig rel err %.2e (<=1e-10), "
              "%.1f s (<30 s), %zu fallbacks",
              count, worst_step, worst_eig, elapsed, fallbacks)});
  report(2, "trial steps contract and descend",
         {contraction == 0 && descent == 0,
          fmt("%zu contraction violations, %zu descent-bound violations over %d instances",
              contraction, descent, count)});
}

void weights_sweep() {
  fixtures::Rng rng(202);
  std::size_t violations = 0;
  double worst_sum = 0.0;
  const int count = 10000;
  for (int i = 0; i < count; ++i) {
    const std::size_t n = rng.index(1, 50);
    const Vector st = rng.vector(n, std::pow(10.0, rng.uniform(-3.0, 3.0)));
    const Vector dir = rng.vector(n);
    const double r = 0.5 * norm(st) * std::pow(rng.uniform(0.0, 1.0), 1.0 / static_cast<double>(n)) /
                     norm(dir) * (1 - 1e-12);
    const Vector s = axpy(r, dir, scale(0.5, st));
    if (!constraint_holds(s, st, 1e-12 * dot(st, st))) {
      ++violations;
      continue;
    }
    const Weights w = weights(s, st);
    const double tol = 1e-12;
    worst_sum = std::max(worst_sum, std::abs(w.alpha0 + w.alphat - 1.0));
    if (w.alpha0 < -tol || w.alpha0 > 1 + tol || w.alphat < -tol || w.alphat > 1 + tol ||
        std::abs(w.alpha0 + w.alphat - 1.0) > tol)
      ++violations;
  }
  report(3, "weights of feasible steps form a convex combination",
         {violations == 0, fmt("%zu violations over %d pairs, max |sum - 1| %.1e", violations,
                               count, worst_sum)});
}

void alpha_star_sweep() {
  fixtures::Rng rng(303);
  std::size_t mismatches = 0, not_shortened = 0;
  double worst = 0.0;
  const int count = 1000;
  for (int i = 0; i < count; ++i) {
    const auto q = fixtures::random_quadratic_trial(rng, rng.index(1, 30));
    const double a = convex_alpha_star(q.f_k, q.g_k, q.trial);
    // m(alpha s_t) - f_k from the weighted linearizations, in extended precision
    long double gk_st = 0.0L, gt_st = 0.0L;
    for (std::size_t j = 0; j < q.g_k.size(); ++j) {
      gk_st += static_cast<long double>(q.g_k[j]) * q.trial.s_t[j];
      gt_st += static_cast<long double>(q.trial.g_t[j]) * q.trial.s_t[j];
    }
    const long double rise = static_cast<long double>(q.trial.f_t) - q.f_k;
    const double ref = oracle::golden_section_min(
        [&](double alpha) {
          const long double a = alpha;
          return (1.0L - a) * (a * gk_st) + a * (rise + (a - 1.0L) * gt_st);
        },
        0.0, 1.0);
    worst = std::max(worst, std::abs(a - ref));
    if (std::abs(a - ref) > 1e-8)
      ++mismatches;
    if (q.trial.f_t > q.f_k && !(a < 1.0))
      ++not_shortened;
  }
  report(4, "convex line minimizer matches 1-D search",
         {mismatches == 0 && not_shortened == 0,
          fmt("%zu mismatches (max |diff| %.2e, tol 1e-8), %zu rising trials with alpha* = 1, "
              "%d instances",
              mismatches, worst, not_shortened, count)});
}

void convex_kkt_sweep() {
  fixtures::Rng rng(404);
  std::size_t infeasible = 0, slack = 0, above_grid = 0, errors = 0;
  double worst_gap = -1e300;
  const int count = 200;
  for (int i = 0; i < count; ++i) {
    const auto q = fixtures::random_quadratic_trial(rng, rng.index(2, 12));
    const double tt = dot(q.trial.s_t, q.trial.s_t);
    ConvexKkt kkt;
    try {
      kkt = convex_subproblem(q.f_k, q.g_k, q.trial);
    } catch (const Error &) {
      ++errors;
      continue;
    }
    if (!constraint_holds(kkt.step, q.trial.s_t, 1e-10 * tt))
      ++infeasible;
    if (std::abs(kkt.complementarity) > 1e-8 * tt)
      ++slack;
    auto model = [&](const Vector &s) { return model_eval(s, q.f_k, q.g_k, q.trial).value; };
    const auto grid = oracle::subspace_grid_min(
        model, {q.trial.s_t, q.trial.y_t, q.g_k},
        [&](const Vector &s) { return constraint_holds(s, q.trial.s_t, 0.0); },
        scale(0.5, q.trial.s_t), 0.5 * std::sqrt(tt), 41, 2);
    const double gap = model(kkt.step) - grid.value;
    worst_gap = std::max(worst_gap, gap);
    if (gap > 1e-6)
      ++above_grid;
  }
  report(5, "convex subproblem satisfies KKT and beats the grid oracle",
         {infeasible + slack + above_grid + errors == 0,
          fmt("%d instances: %zu infeasible, %zu complementarity > 1e-8 ||s||^2, %zu above grid "
              "+ 1e-6 (max m - grid %.2e), %zu solver errors",
              count, infeasible, slack, above_grid, worst_gap, errors)});
}

void dfp_sweep() {
  fixtures::Rng rng(505);
  double worst = 0.0;
  int checked = 0;
  while (checked < 100) {
    const std::size_t n = rng.index(2, 10);
    const Vector s = rng.vector(n), y = rng.vector(n), g = rng.vector(n);
    if (std::abs(dot(y, s)) < 0.1 * norm(y) * norm(s))
      continue;
    worst = std::max(worst, dfp_identity_check(g, bundle(s, y), 0.5));
    ++checked;
  }
  report(6, "model Hessian equals shifted DFP update",
         {worst <= 1e-12, fmt("max entrywise deviation %.2e over %d instances (<=1e-12)", worst,
                              checked)});
}

void convergence_runs() {
  struct Case {
    const char *label;
    Objective obj;
    Vector x0;
  };
  std::vector<Case> cases;
  cases.push_back({"quadratic(100, 1e3)", quadratic(100, 1e3), quadratic(100, 1e3).initial_point()});
  cases.push_back({"rosenbrock(2)", rosenbrock(2), Vector{-1.2, 1}});
  cases.push_back({"cosine(1e3)", cosine(1000), cosine(1000).initial_point()});
  cases.push_back({"noncvxun(1e3)", noncvxun(1000), noncvxun(1000).initial_point()});

  SolverConfig cfg;
  cfg.max_outer = 1000;
  const auto t0 = Clock::now();
  bool all = true;
  std::string detail;
  for (const auto &c : cases) {
    const SolveResult r = solve(c.obj, c.x0, cfg);
    std::size_t max_inner = 0;
    for (const auto &h : r.history)
      max_inner = std::max(max_inner, h.inner_count);
    const bool ok = r.status == Status::converged && r.gnorm_scaled() < 1e-5 && max_inner < 100;
    all = all && ok;
    detail += fmt("%s %s k=%zu gs=%.1e max_inner=%zu; ", c.label, to_string(r.status).data(),
                  r.outer_iterations(), r.gnorm_scaled(), max_inner);
  }
  const double elapsed = seconds_since(t0);
  report(7, "PS with gradient steps converges within 1000 iterations",
         {all && elapsed < 60.0, detail + fmt("%.1f s (<60 s)", elapsed)});
}

void determinism_runs() {
  const Objective f = cosine(1000000);
  SolverConfig cfg;
  std::vector<SolveResult> runs;
  for (int p : {1, 2, 8}) {
    cfg.plan.threads = p;
    runs.push_back(solve(f, f.initial_point(), cfg));
  }
  bool same = true;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    same = same && runs[r].history.size() == runs[0].history.size() &&
           runs[r].x_star == runs[0].x_star && runs[r].f_star == runs[0].f_star &&
           runs[r].status == runs[0].status;
    for (std::size_t i = 0; same && i < runs[0].history.size(); ++i)
      same = runs[r].history[i].same_numbers(runs[0].history[i]);
  }
  report(8, "solve histories are bitwise identical across thread counts",
         {same, fmt("cosine(1e6), p in {1,2,8}: %zu outer iterations, status %s, %s",
                    runs[0].outer_iterations(), to_string(runs[0].status).data(),
                    same ? "identical" : "differ")});
}

void scaling_runs() {
  const unsigned cores = std::thread::hardware_concurrency();
  bench::RunSpec base;
  base.problem = "cosine";
  base.repeat = 1;
  const auto rows = bench::run_scaling({"cosine"}, {10000000}, {1, 4, 8}, base);
  double s4 = 0.0, s8 = 0.0;
  for (const auto &r : rows) {
    if (r.row.p == 4)
      s4 = r.speedup;
    if (r.row.p == 8)
      s8 = r.speedup;
  }
  const bool measured_ok = s4 >= 2.0 && s8 >= 3.0;
  std::string detail = fmt("cosine(1e7) speedup p=4 %.2f (>=2.0), p=8 %.2f (>=3.0)", s4, s8);
  if (cores < 8)
    detail += fmt("; not verifiable here: %u hardware thread(s), criterion needs >= 8 cores", cores);
  report(9, "thread scaling", {cores >= 8 && measured_ok, detail});
}

void compare_golden() {
  SolverConfig cfg;
  cfg.max_outer = 1000;
  const auto rows = bench::run_compare(bench::default_suite(), cfg);
  std::ostringstream os;
  os << bench::CompareRow::header << '\n';
  for (const auto &r : rows)
    os << r.to_csv() << '\n';
  const auto s = bench::summarize(rows);

  const std::string path = std::string(PSGLOB_GOLDEN_DIR) + "/compare_gradient.csv";
  std::ifstream in(path);
  std::stringstream golden;
  golden << in.rdbuf();
  const bool match = in.good() || in.eof() ? golden.str() == os.str() : false;
  report(10, "comparison on the built-in suite matches the golden CSV",
         {match && rows.size() == bench::default_suite().size(),
          fmt("%zu rows, %zu compared, %zu excluded; PS fewer %.0f%%, equal %.0f%%, BT fewer "
              "%.0f%%; golden %s",
              rows.size(), s.compared, s.excluded, s.ps_fewer_pct, s.equal_pct, s.bt_fewer_pct,
              match ? "matches" : "differs or missing")});
}

// The coefficient block takes only the six scalars; time it on products
// taken from very different vector lengths.
void coefficient_block() {
  constexpr bool scalar_only =
      std::is_invocable_r_v<StepCoefficients, decltype(&coefficients), const InnerProducts &, double> &&
      !std::is_invocable_v<decltype(&coefficients), const Vector &, double>;

  fixtures::Rng rng(606);
  std::vector<double> per_call;
  volatile double sink = 0.0;
  for (std::size_t n : {10u, 100000u, 1000000u}) {
    const auto in = fixtures::random_step_instance(rng, n);
    const InnerProducts v = fused_products(in.s, in.y, in.g);
    const int calls = 2000000;
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = Clock::now();
      for (int i = 0; i < calls; ++i) {
        InnerProducts w = v;
        w.v5 += 1e-300 * i;
        sink = sink + coefficients(w, 0.5).c_s;
      }
      best = std::min(best, seconds_since(t0) / calls);
    }
    per_call.push_back(best);
  }
  const double lo = *std::min_element(per_call.begin(), per_call.end());
  const double hi = *std::max_element(per_call.begin(), per_call.end());
  report(11, "coefficient block is independent of n",
         {scalar_only && hi <= 2.0 * lo,
          fmt("signature takes InnerProducts only: %s; ns/call at n=1e1,1e5,1e6: %.1f %.1f %.1f "
              "(max/min %.2f <= 2)",
              scalar_only ? "yes" : "no", per_call[0] * 1e9, per_call[1] * 1e9, per_call[2] * 1e9,
              hi / lo)});
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  step_sweep();
  weights_sweep();
  alpha_star_sweep();
  convex_kkt_sweep();
  dfp_sweep();
  convergence_runs();
  determinism_runs();
  scaling_runs();
  compare_golden();
  coefficient_block();
  std::printf("%d of 11 criteria failed, %.1f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
