#pragma once

/// \file ext_model.hpp
///
/// The extended two-point model built from linearizations of f at the current
/// iterate x_k and at a trial point x_k + s_t:
///
///   m(s) = a0(s) * (f_k + g_k's) + at(s) * (f_t + g_t'(s - s_t)),
///   a0(s) = (s - s_t)'(-s_t) / ||s_t||^2,   at(s) = s's_t / ||s_t||^2,
///
/// restricted to the region ||s||^2 + ||s - s_t||^2 <= ||s_t||^2, together
/// with the solver for the subproblem when f is convex.
///
/// The convex solver is a verified reference path. The production trial step
/// lives in ps_step.hpp.

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include "psglob/error.hpp"
#include "psglob/vector.hpp"

namespace psglob {

/// One inner iteration's data: s_t, x_t = x_k + s_t, f_t, g_t, y_t = g_t - g_k.
struct TrialState {
  Vector s_t;
  Vector x_t;
  double f_t = 0.0;
  Vector g_t;
  Vector y_t;

  /// Builds the bundle from x_k and a step, evaluating nothing: f_t and g_t
  /// are supplied by the caller.
  static TrialState from(const Vector &x_k, const Vector &g_k, Vector s_t, double f_t,
                         Vector g_t, const ParallelPlan &plan = {}) {
    TrialState t;
    t.x_t = axpy(1.0, s_t, x_k, plan);
    t.y_t = axpy(-1.0, g_k, g_t, plan);
    t.s_t = std::move(s_t);
    t.f_t = f_t;
    t.g_t = std::move(g_t);
    return t;
  }

  /// Largest |y_t - (g_t - g_k)| entry.
  double y_consistency(const Vector &g_k) const {
    detail::check_lengths(g_k.size(), y_t.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < y_t.size(); ++i)
      worst = std::max(worst, std::abs(y_t[i] - (g_t[i] - g_k[i])));
    return worst;
  }
};

struct Weights {
  double alpha0 = 0.0;
  double alphat = 0.0;
};

struct ModelEval {
  double value = 0.0;
  Vector gradient;
  double alpha0 = 0.0;
  double alphat = 0.0;
};

inline Weights weights(const Vector &s, const Vector &s_t, const ParallelPlan &plan = {}) {
  const double tt = dot(s_t, s_t, plan);
  require(tt > 0.0, ErrorCode::zero_trial_step, "weights need a nonzero trial step");
  const double st = dot(s, s_t, plan);
  // (s - s_t)'(-s_t) = tt - s's_t
  return {(tt - st) / tt, st / tt};
}

/// ||s||^2 + ||s - s_t||^2 <= ||s_t||^2, with `slack` absolute tolerance.
inline bool constraint_holds(const Vector &s, const Vector &s_t, double slack = 1e-12) {
  detail::check_lengths(s.size(), s_t.size());
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = s[i] - s_t[i];
    lhs += s[i] * s[i] + d * d;
    rhs += s_t[i] * s_t[i];
  }
  return lhs <= rhs + slack;
}

/// Model value from the weighted linearizations and the gradient
///   g_k + d0/||s_t||^2 s_t + (s_t y_t' + y_t s_t') s / ||s_t||^2,
/// where d0 = f_t - g_t's_t - f_k.
inline ModelEval model_eval(const Vector &s, double f_k, const Vector &g_k,
                            const TrialState &trial, const ParallelPlan &plan = {}) {
  const Vector &st = trial.s_t;
  const double tt = dot(st, st, plan);
  require(tt > 0.0, ErrorCode::zero_trial_step, "model needs a nonzero trial step");
  const double s_st = dot(s, st, plan);
  const double gk_s = dot(g_k, s, plan);
  const double gt_s = dot(trial.g_t, s, plan);
  const double gt_st = dot(trial.g_t, st, plan);
  const double y_s = dot(trial.y_t, s, plan);

  ModelEval out;
  out.alphat = s_st / tt;
  out.alpha0 = (tt - s_st) / tt;
  const double l0 = f_k + gk_s;
  const double lt = trial.f_t + gt_s - gt_st;
  out.value = out.alpha0 * l0 + out.alphat * lt;

  const double d0 = trial.f_t - gt_st - f_k;
  const double cs = (d0 + y_s) / tt;
  const double cy = s_st / tt;
  out.gradient = combine3(1.0, g_k, cy, trial.y_t, cs, st, plan);
  return out;
}

/// The same model in the expanded quadratic form
///   f_k + gbar's + (s's_t)(y_t's) / ||s_t||^2,  gbar = g_k + d0/||s_t||^2 s_t.
inline double model_value_quadratic(const Vector &s, double f_k, const Vector &g_k,
                                    const TrialState &trial, const ParallelPlan &plan = {}) {
  const Vector &st = trial.s_t;
  const double tt = dot(st, st, plan);
  require(tt > 0.0, ErrorCode::zero_trial_step, "model needs a nonzero trial step");
  const double d0 = trial.f_t - dot(trial.g_t, st, plan) - f_k;
  const double s_st = dot(s, st, plan);
  return f_k + dot(g_k, s, plan) + d0 / tt * s_st + s_st * dot(trial.y_t, s, plan) / tt;
}

/// Minimizer of m(alpha s_t) over alpha in [0, 1] for convex f:
///   min{(y't s_t - f_t + f_k) / (2 y_t's_t), 1}.
inline double convex_alpha_star(double f_k, const Vector &g_k, const TrialState &trial,
                                const ParallelPlan &plan = {}) {
  const double v1 = dot(trial.s_t, trial.y_t, plan);
  require(dot(g_k, trial.s_t, plan) <= 0.0, ErrorCode::invalid_argument,
          "trial step must not be an ascent direction");
  if (!(v1 > 0.0))
    throw Error(ErrorCode::nonconvex_data, "curvature y_t's_t must be positive");
  const double alpha = (v1 - trial.f_t + f_k) / (2.0 * v1);
  return std::clamp(alpha, 0.0, 1.0);
}

/// KKT point of the convex subproblem.
struct ConvexKkt {
  double beta = 0.0;          // multiplier of s'(s - s_t) <= 0, in the ||s_t||^2-scaled problem
  double delta = 0.0;         // f_t - f_k - g_t's_t - beta
  double theta_beta = 0.0;    // (y's + 2 beta)^2 - ||s||^2 ||y||^2
  Vector step;
  bool interior = false;
  bool ascent = false;        // g_k' step > 0 can happen here; the general step never does
  double complementarity = 0.0;
  double kkt_residual = 0.0;  // ||grad m(step) + beta/||s_t||^2 (2 step - s_t)||
};

namespace detail {

/// Step coefficients (c_g, c_s, c_y) of the convex subproblem for a given
/// multiplier beta > 0, from the scaled stationarity condition
///   (d0 - beta) s_t + ||s_t||^2 g + (s_t y' + y s_t') s + 2 beta s = 0.
struct BetaStep {
  double cg = 0.0, cs = 0.0, cy = 0.0;
  double delta = 0.0, theta = 0.0;
};

inline BetaStep beta_step(const InnerProducts &v, double d0, double beta) {
  BetaStep out;
  out.delta = d0 - beta;
  const double w = v.v1 + 2.0 * beta;
  out.theta = w * w - v.v2 * v.v3;
  const double a = -v.v2 / (2.0 * beta);
  const double ratio = out.delta / v.v2;
  out.cg = a;
  out.cs = a * (ratio - w / out.theta * (v.v4 + ratio * v.v1) + v.v3 / out.theta * (v.v6 + out.delta));
  out.cy = a * (-w / out.theta * (v.v6 + out.delta) + v.v2 / out.theta * (v.v4 + ratio * v.v1));
  return out;
}

/// s'(s - s_t) for s = cg g + cs s_t + cy y, from the inner products only.
inline double boundary_residual(const InnerProducts &v, const BetaStep &c) {
  const double ss = c.cg * c.cg * v.v5 + c.cs * c.cs * v.v2 + c.cy * c.cy * v.v3 +
                    2.0 * (c.cg * c.cs * v.v6 + c.cg * c.cy * v.v4 + c.cs * c.cy * v.v1);
  const double s_st = c.cg * v.v6 + c.cs * v.v2 + c.cy * v.v1;
  return ss - s_st;
}

}  // namespace detail

/// Solves min m(s) s.t. s'(s - s_t) <= 0 for convex data (y_t's_t >= 0) and a
/// non-ascent trial step (g_k's_t <= 0).
///
/// The beta = 0 candidate alpha* s_t is returned when it is feasible and
/// stationary. Otherwise the multiplier is the root of the boundary residual
/// r(beta) = s(beta)'(s(beta) - s_t) on the interval where
/// 2 beta I + s_t y' + y s_t' is positive definite; r is decreasing there.
inline ConvexKkt convex_subproblem(double f_k, const Vector &g_k, const TrialState &trial,
                                   const ParallelPlan &plan = {}) {
  const Vector &st = trial.s_t;
  const InnerProducts v = fused_products(st, trial.y_t, g_k, plan);
  require(v.v2 > 0.0, ErrorCode::zero_trial_step, "convex subproblem needs a nonzero trial step");
  require(v.v6 <= 1e-14 * std::sqrt(v.v2 * v.v5), ErrorCode::invalid_argument,
          "trial step must not be an ascent direction");
  if (v.v1 < -1e-12)
    throw Error(ErrorCode::nonconvex_data, "curvature y_t's_t is negative");

  // g_t's_t = (y_t + g_k)'s_t
  const double d0 = trial.f_t - (v.v1 + v.v6) - f_k;
  const double gnorm = std::sqrt(v.v5);
  const double stationarity_tol = 1e-8 * (1.0 + gnorm);

  ConvexKkt out;
  auto finish = [&](ConvexKkt &kkt) {
    const double s_st = dot(kkt.step, st, plan);
    const double ss = dot(kkt.step, kkt.step, plan);
    kkt.complementarity = kkt.beta * (ss - s_st);
    const double y_s = dot(trial.y_t, kkt.step, plan);
    const double mult = kkt.beta / v.v2;
    // grad m + mult (2 s - s_t) = g + ((d0 + y's)/tt - mult) s_t + (s's_t/tt) y + 2 mult s
    Vector r = combine3(1.0, g_k, s_st / v.v2, trial.y_t, (d0 + y_s) / v.v2 - mult, st, plan);
    r = axpy(2.0 * mult, kkt.step, r, plan);
    kkt.kkt_residual = norm(r, plan);
    kkt.ascent = dot(g_k, kkt.step, plan) > 0.0;
    return kkt;
  };

  if (v.v1 > 0.0) {
    const double alpha = (v.v1 - trial.f_t + f_k) / (2.0 * v.v1);
    if (alpha >= 0.0 && alpha <= 1.0) {
      // grad m(alpha s_t) = g + ((d0 + alpha v1)/v2) s_t + alpha y
      const double a = (d0 + alpha * v.v1) / v.v2;
      const double grad2 = v.v5 + a * a * v.v2 + alpha * alpha * v.v3 +
                           2.0 * (a * v.v6 + alpha * v.v4 + a * alpha * v.v1);
      if (std::sqrt(std::max(grad2, 0.0)) <= stationarity_tol) {
        scale_into(out.step, alpha, st, plan);
        out.beta = 0.0;
        out.delta = d0;
        out.theta_beta = v.v1 * v.v1 - v.v2 * v.v3;
        out.interior = true;
        return finish(out);
      }
    }
  }

  const double beta_floor = std::max(0.0, 0.5 * (std::sqrt(v.v2 * v.v3) - v.v1));
  const double scale = std::sqrt(v.v2) * (std::sqrt(v.v3) + gnorm) + std::abs(d0);
  require(scale > 0.0 && std::isfinite(scale), ErrorCode::invalid_argument,
          "degenerate convex subproblem data");

  auto eval = [&](double beta) {
    detail::BetaStep c = detail::beta_step(v, d0, beta);
    if (std::abs(c.theta) < 1e-14 * v.v2 * v.v3) {
      beta += 1e-10 * scale;
      c = detail::beta_step(v, d0, beta);
      if (std::abs(c.theta) < 1e-14 * v.v2 * v.v3)
        throw Error(ErrorCode::no_sign_change, "theta(beta) is singular");
    }
    return std::pair{beta, c};
  };
  auto residual = [&](double beta) { return detail::boundary_residual(v, eval(beta).second); };

  double lo = 0.0, hi = 0.0;
  bool bracketed = false;
  double prev = beta_floor + 1e-12 * scale;
  double r_prev = residual(prev);
  if (r_prev > 0.0) {
    for (int e = -11; e <= 12; ++e) {
      const double cur = beta_floor + std::pow(10.0, e) * scale;
      const double r_cur = residual(cur);
      if (r_cur <= 0.0) {
        lo = prev;
        hi = cur;
        bracketed = true;
        break;
      }
      prev = cur;
      r_prev = r_cur;
    }
  }
  if (!bracketed)
    throw Error(ErrorCode::no_sign_change, "boundary residual keeps one sign on the bracket");

  std::uintmax_t max_iter = 200;
  const auto root = boost::math::tools::toms748_solve(
      residual, lo, hi, boost::math::tools::eps_tolerance<double>(52), max_iter);
  const double beta0 = 0.5 * (root.first + root.second);
  const auto [beta, c] = eval(beta0);

  out.beta = beta;
  out.delta = c.delta;
  out.theta_beta = c.theta;
  out.step = combine3(c.cg, g_k, c.cy, trial.y_t, c.cs, st, plan);
  out.interior = false;
  return finish(out);
}

}  // namespace psglob
