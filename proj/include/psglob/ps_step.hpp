#pragma once

/// \file ps_step.hpp
///
/// Closed-form trial step for general (possibly non-convex) objectives. The
/// next trial step minimizes the regularized model
///
///   g_k's + s' [sigma I + s_t y_t'] s / ||s_t||^2,
///
/// whose minimizer is s_next = -||s_t||^2 Bbar^{-1} g_k with
/// Bbar = 2 sigma I + s_t y_t' + y_t s_t'. Choosing
///
///   sigma = (||s_t|| (||y_t|| + ||g_k|| / eta) - y_t's_t) / 2
///
/// makes Bbar positive definite and forces ||s_next|| <= eta ||s_t||. The step
/// is a combination of g_k, y_t and s_t whose coefficients depend only on six
/// inner products, so no matrix is ever formed.

#include <cmath>

#include "psglob/error.hpp"
#include "psglob/ext_model.hpp"
#include "psglob/oracle.hpp"
#include "psglob/vector.hpp"

namespace psglob {

struct StepCoefficients {
  double sigma = 0.0;
  double theta = 0.0;
  double c_g = 0.0;
  double c_s = 0.0;
  double c_y = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Scalar-only coefficient block: reads the six inner products and eta, never
/// touches vector data.
inline StepCoefficients coefficients(const InnerProducts &v, double eta) {
  if (!(v.v2 > 0.0))
    throw Error(ErrorCode::zero_trial_step, "||s_t||^2 must be positive");
  if (!(v.v5 > 0.0))
    throw Error(ErrorCode::stationary_point, "||g_k||^2 must be positive");
  if (!(eta > 0.0 && eta < 1.0))
    throw Error(ErrorCode::invalid_argument, "eta must lie in (0, 1)");

  StepCoefficients c;
  const double root23 = std::sqrt(v.v2 * v.v3);
  c.sigma = 0.5 * (std::sqrt(v.v2) * (std::sqrt(v.v3) + std::sqrt(v.v5) / eta) - v.v1);
  const double w = v.v1 + 2.0 * c.sigma;
  c.theta = w * w - v.v2 * v.v3;
  c.c_g = -v.v2 / (2.0 * c.sigma);
  c.c_y = c.c_g * (-(w / c.theta) * v.v6 + (v.v2 / c.theta) * v.v4);
  c.c_s = c.c_g * (-(w / c.theta) * v.v4 + (v.v3 / c.theta) * v.v6);
  c.lambda_min = 2.0 * c.sigma - root23 + v.v1;
  c.lambda_max = 2.0 * c.sigma + root23 + v.v1;
  return c;
}

struct BbarSpectrum {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double lambda_bulk = 0.0;  // multiplicity n - 2
};

inline BbarSpectrum bbar_eigenvalues(const InnerProducts &v, double sigma) {
  const double root23 = std::sqrt(v.v2 * v.v3);
  return {2.0 * sigma - root23 + v.v1, 2.0 * sigma + root23 + v.v1, 2.0 * sigma};
}

struct StepResult {
  StepCoefficients coeffs;
  InnerProducts products;
  double dirdot = 0.0;    // g_k' s_next from scalars
  bool fallback = false;  // damped gradient step used instead of the closed form
};

/// Writes the next trial step into `out` (which may alias s_t).
inline StepResult general_step_into(Vector &out, const Vector &s_t, const Vector &y_t,
                                    const Vector &g_k, double eta, const ParallelPlan &plan = {}) {
  StepResult r;
  r.products = fused_products(s_t, y_t, g_k, plan);
  const InnerProducts &v = r.products;
  r.coeffs = coefficients(v, eta);
  const StepCoefficients &c = r.coeffs;

  const double next2 = c.c_g * c.c_g * v.v5 + c.c_y * c.c_y * v.v3 + c.c_s * c.c_s * v.v2 +
                       2.0 * (c.c_g * c.c_y * v.v4 + c.c_g * c.c_s * v.v6 + c.c_y * c.c_s * v.v1);
  const double bound = eta * std::sqrt(v.v2) * (1.0 + 1e-8);
  if (!std::isfinite(next2) || next2 > bound * bound) {
    const double scale = -eta * std::sqrt(v.v2) / std::sqrt(v.v5);
    scale_into(out, scale, g_k, plan);
    r.dirdot = scale * v.v5;
    r.fallback = true;
    return r;
  }
  r.dirdot = c.c_g * v.v5 + c.c_y * v.v4 + c.c_s * v.v6;
  combine3_into(out, c.c_g, g_k, c.c_y, y_t, c.c_s, s_t, plan);
  return r;
}

struct GeneralStep {
  Vector s_next;
  StepCoefficients coeffs;
  double dirdot = 0.0;
  bool fallback = false;
};

inline GeneralStep general_step(const Vector &g_k, const TrialState &trial, double eta,
                                const ParallelPlan &plan = {}) {
  GeneralStep out;
  const StepResult r = general_step_into(out.s_next, trial.s_t, trial.y_t, g_k, eta, plan);
  out.coeffs = r.coeffs;
  out.dirdot = r.dirdot;
  out.fallback = r.fallback;
  return out;
}

/// Dense check that the regularized model Hessian equals a DFP update of
/// D_k = -(y's / ||s||^2) I plus ((||y|| + ||g|| / eta) / ||s||) I. Returns the
/// largest entrywise deviation.
inline double dfp_identity_check(const Vector &g_k, const TrialState &trial, double eta) {
  const Vector &s = trial.s_t;
  const Vector &y = trial.y_t;
  const std::size_t n = s.size();
  require(n <= 50, ErrorCode::invalid_argument, "dense check limited to n <= 50");
  const double ss = dot(s, s);
  require(ss > 0.0, ErrorCode::zero_trial_step, "DFP check needs a nonzero trial step");
  const double ys = dot(y, s);
  if (ys == 0.0)
    throw Error(ErrorCode::division_by_zero, "DFP update needs y's != 0");
  const double ynorm = norm(y);
  const double gnorm = norm(g_k);
  const double sigma = 0.5 * (std::sqrt(ss) * (ynorm + gnorm / eta) - ys);

  using oracle::DenseMatrix;
  const DenseMatrix d_k = DenseMatrix::identity(n, -ys / ss);
  DenseMatrix left = DenseMatrix::identity(n);
  left.add_outer(-1.0 / ys, y, s);
  DenseMatrix right = DenseMatrix::identity(n);
  right.add_outer(-1.0 / ys, s, y);
  DenseMatrix d_next = left * d_k * right;
  d_next.add_outer(1.0 / ys, y, y);

  const DenseMatrix h = (1.0 / ss) * oracle::bbar_matrix(s, y, sigma);
  const DenseMatrix shift = DenseMatrix::identity(n, (ynorm + gnorm / eta) / std::sqrt(ss));
  return (h - d_next - shift).max_abs();
}

}  // namespace psglob
