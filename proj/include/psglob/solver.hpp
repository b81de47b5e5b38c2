#pragma once

/// \file solver.hpp
///
/// Outer/inner iteration driver. Each outer iteration starts from an initial
/// trial step (scaled negative gradient or an L-BFGS direction) and refines it
/// until the Armijo test f_k - f_t >= -rho * g_k's_t passes. The refinement
/// is either the closed-form multi-point step of ps_step.hpp or plain
/// halving (the backtracking baseline).
///
/// Exactly one objective evaluation happens per trial point, and g_k's_t is
/// carried forward from scalars rather than recomputed.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "psglob/error.hpp"
#include "psglob/problems.hpp"
#include "psglob/ps_step.hpp"
#include "psglob/vector.hpp"

namespace psglob {

enum class Strategy { ps, bt };
enum class InitStep { gradient, lbfgs };
enum class Status { converged, max_outer, max_inner, numerical_error };

constexpr std::string_view to_string(Strategy s) noexcept { return s == Strategy::ps ? "ps" : "bt"; }

constexpr std::string_view to_string(Status s) noexcept {
  switch (s) {
    case Status::converged: return "Converged";
    case Status::max_outer: return "MaxOuter";
    case Status::max_inner: return "MaxInner";
    case Status::numerical_error: return "NumericalError";
  }
  return "Unknown";
}

struct SolverConfig {
  double rho = 0.1;
  double eta = 0.5;
  double epsilon = 1.0;
  double tol = 1e-5;
  std::size_t max_outer = 100;
  std::size_t max_inner = 100;
  Strategy strategy = Strategy::ps;
  InitStep init = InitStep::gradient;
  std::size_t memory = 5;
  double bt_factor = 0.5;
  ParallelPlan plan;
  bool record_trace = false;

  void validate() const {
    require(rho > 0.0 && rho < 1.0, ErrorCode::invalid_argument, "rho must lie in (0, 1)");
    require(eta > 0.0 && eta < 1.0, ErrorCode::invalid_argument, "eta must lie in (0, 1)");
    require(epsilon > 0.0 && epsilon <= 1.0, ErrorCode::invalid_argument,
            "epsilon must lie in (0, 1]");
    require(tol > 0.0, ErrorCode::invalid_argument, "tol must be positive");
    require(bt_factor > 0.0 && bt_factor < 1.0, ErrorCode::invalid_argument,
            "backtracking factor must lie in (0, 1)");
    plan.validate();
  }
};

struct IterationRecord {
  std::size_t k = 0;
  std::size_t inner_count = 0;
  double f = 0.0;
  double gnorm_scaled = 0.0;
  std::size_t fevals_cum = 0;
  double step_norm = 0.0;
  double wall_time = 0.0;  // seconds since the solve started

  /// Equality of everything except the wall clock.
  bool same_numbers(const IterationRecord &o) const noexcept {
    return k == o.k && inner_count == o.inner_count && f == o.f &&
           gnorm_scaled == o.gnorm_scaled && fevals_cum == o.fevals_cum &&
           step_norm == o.step_norm;
  }
};

struct TracePoint {
  std::size_t k = 0;
  std::size_t t = 0;
  Vector x;
  double f = 0.0;
};

struct SolveResult {
  Vector x_star;
  double f_star = 0.0;
  Status status = Status::numerical_error;
  std::vector<IterationRecord> history;  // history[0] describes x0
  std::vector<TracePoint> trace;
  std::string message;

  std::size_t outer_iterations() const noexcept { return history.empty() ? 0 : history.size() - 1; }
  std::size_t total_fevals() const noexcept { return history.empty() ? 0 : history.back().fevals_cum; }
  double gnorm_scaled() const noexcept { return history.empty() ? 0.0 : history.back().gnorm_scaled; }
  double wall_seconds() const noexcept { return history.empty() ? 0.0 : history.back().wall_time; }
};

inline Vector initial_step_gradient(const Vector &g_k, double epsilon,
                                    const ParallelPlan &plan = {}) {
  require(epsilon > 0.0 && epsilon <= 1.0, ErrorCode::invalid_argument,
          "epsilon must lie in (0, 1]");
  Vector s(g_k.size());
  scale_into(s, -epsilon, g_k, plan);
  return s;
}

/// Limited-memory BFGS curvature pairs with the two-loop recursion.
class LbfgsHistory {
 public:
  explicit LbfgsHistory(std::size_t memory) : memory_(memory) {}

  std::size_t memory() const noexcept { return memory_; }
  std::size_t size() const noexcept { return pairs_.size(); }

  /// Stores (s, y) if s'y > 0; returns whether the pair was kept.
  bool push(const Vector &s, const Vector &y, const ParallelPlan &plan = {}) {
    if (memory_ == 0)
      return false;
    const double sy = dot(s, y, plan);
    if (!(sy > 0.0))
      return false;
    if (pairs_.size() == memory_)
      pairs_.pop_front();
    pairs_.push_back({s, y, 1.0 / sy});
    return true;
  }

  /// d = -H g with H0 = (s'y / y'y) I from the newest pair. Falls back to -g
  /// when the result is not a descent direction.
  void direction_into(Vector &d, const Vector &g, const ParallelPlan &plan = {}) const {
    if (pairs_.empty()) {
      scale_into(d, -1.0, g, plan);
      return;
    }
    Vector q = g;
    std::vector<double> alpha(pairs_.size());
    for (std::size_t i = pairs_.size(); i-- > 0;) {
      const Pair &p = pairs_[i];
      alpha[i] = p.rho * dot(p.s, q, plan);
      axpy_into(q, -alpha[i], p.y, q, plan);
    }
    const Pair &last = pairs_.back();
    const double gamma = dot(last.s, last.y, plan) / dot(last.y, last.y, plan);
    scale_into(q, gamma, q, plan);
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      const Pair &p = pairs_[i];
      const double beta = p.rho * dot(p.y, q, plan);
      axpy_into(q, alpha[i] - beta, p.s, q, plan);
    }
    scale_into(d, -1.0, q, plan);
    if (!(dot(g, d, plan) < 0.0))
      scale_into(d, -1.0, g, plan);
  }

 private:
  struct Pair {
    Vector s;
    Vector y;
    double rho;
  };
  std::size_t memory_;
  std::deque<Pair> pairs_;
};

inline Vector initial_step_lbfgs(const LbfgsHistory &history, const Vector &g_k,
                                 const ParallelPlan &plan = {}) {
  Vector d(g_k.size());
  history.direction_into(d, g_k, plan);
  return d;
}

namespace detail {

inline double scaled_gradient_norm(const Vector &x, const Vector &g, const ParallelPlan &plan) {
  return norm(g, plan) / std::max(norm(x, plan), 1.0);
}

}  // namespace detail

inline SolveResult solve(const Objective &obj, const Vector &x0, const SolverConfig &cfg) {
  cfg.validate();
  detail::check_lengths(x0.size(), obj.dimension());
  const ParallelPlan &plan = cfg.plan;
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  SolveResult result;
  Vector x = x0;
  Vector g(x.size());
  std::size_t fevals = 0;

  auto finish = [&](Status status, std::string message = {}) {
    result.status = status;
    result.message = std::move(message);
    result.x_star = x;
    return std::move(result);
  };

  double f = obj.evaluate_into(x, g, plan);
  ++fevals;
  result.f_star = f;
  if (!std::isfinite(f) || !g.all_finite())
    return finish(Status::numerical_error, "non-finite value at the starting point");

  double gscaled = detail::scaled_gradient_norm(x, g, plan);
  result.history.push_back({0, 0, f, gscaled, fevals, 0.0, elapsed()});
  if (gscaled < cfg.tol)
    return finish(Status::converged);

  LbfgsHistory lbfgs(cfg.init == InitStep::lbfgs ? cfg.memory : 0);
  Vector s(x.size()), x_t(x.size()), g_t(x.size()), y(x.size());

  try {
    for (std::size_t k = 0; k < cfg.max_outer; ++k) {
      if (cfg.init == InitStep::lbfgs)
        lbfgs.direction_into(s, g, plan);
      else
        scale_into(s, -cfg.epsilon, g, plan);
      double delta = dot(g, s, plan);

      double f_t = 0.0;
      std::size_t t = 0;
      for (;; ++t) {
        axpy_into(x_t, 1.0, s, x, plan);
        f_t = obj.evaluate_into(x_t, g_t, plan);
        ++fevals;
        if (cfg.record_trace)
          result.trace.push_back({k, t, x_t, f_t});
        if (!std::isfinite(f_t))
          return finish(Status::numerical_error, "non-finite objective at a trial point");
        if (f - f_t >= -cfg.rho * delta)
          break;
        if (t == cfg.max_inner)
          return finish(Status::max_inner, "inner iteration cap reached at outer iteration " +
                                               std::to_string(k));
        if (cfg.strategy == Strategy::ps) {
          axpy_into(y, -1.0, g, g_t, plan);
          delta = general_step_into(s, s, y, g, cfg.eta, plan).dirdot;
        } else {
          scale_into(s, cfg.bt_factor, s, plan);
          delta *= cfg.bt_factor;
        }
      }

      if (cfg.init == InitStep::lbfgs) {
        axpy_into(y, -1.0, g, g_t, plan);
        lbfgs.push(s, y, plan);
      }
      const double step_norm = norm(s, plan);
      std::swap(x, x_t);
      std::swap(g, g_t);
      f = f_t;
      result.f_star = f;
      gscaled = detail::scaled_gradient_norm(x, g, plan);
      result.history.push_back({k + 1, t, f, gscaled, fevals, step_norm, elapsed()});
      if (gscaled < cfg.tol)
        return finish(Status::converged);
    }
  } catch (const Error &e) {
    if (e.code() != ErrorCode::non_finite)
      throw;
    return finish(Status::numerical_error, e.what());
  }
  return finish(Status::max_outer, "outer iteration cap reached");
}

inline SolveResult backtracking_solve(const Objective &obj, const Vector &x0, SolverConfig cfg) {
  cfg.strategy = Strategy::bt;
  return solve(obj, x0, cfg);
}

/// Every trial point of the first k_max outer iterations.
inline std::vector<TracePoint> trace_trials(const Objective &obj, const Vector &x0,
                                            SolverConfig cfg, std::size_t k_max) {
  cfg.record_trace = true;
  cfg.max_outer = k_max;
  return solve(obj, x0, cfg).trace;
}

}  // namespace psglob
