#pragma once

/// \file oracle.hpp
///
/// Brute-force reference computations for tests: dense matrices with a
/// Cholesky solver and a cyclic Jacobi eigensolver, finite differences,
/// compensated summation, golden-section search and an exhaustive grid over
/// a three dimensional subspace.
///
/// Nothing here calls into the model or step code it is used to check. All
/// routines are sequential and sized for small problems.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "psglob/error.hpp"
#include "psglob/vector.hpp"

namespace psglob::oracle {

class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n, double value = 0.0) : n_(n), a_(n * n, value) {}

  static DenseMatrix identity(std::size_t n, double diag = 1.0) {
    DenseMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
      m(i, i) = diag;
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  double &operator()(std::size_t i, std::size_t j) noexcept { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }

  double max_asymmetry() const noexcept {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
    return worst;
  }

  double max_abs() const noexcept {
    double worst = 0.0;
    for (double v : a_)
      worst = std::max(worst, std::abs(v));
    return worst;
  }

  /// Adds alpha * u v' in place.
  void add_outer(double alpha, const Vector &u, const Vector &v) {
    detail::check_lengths(u.size(), n_);
    detail::check_lengths(v.size(), n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        (*this)(i, j) += alpha * u[i] * v[j];
  }

  Vector apply(const Vector &x) const {
    detail::check_lengths(x.size(), n_);
    Vector out(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n_; ++j)
        acc += (*this)(i, j) * x[j];
      out[i] = acc;
    }
    return out;
  }

  friend DenseMatrix operator*(const DenseMatrix &a, const DenseMatrix &b) {
    detail::check_lengths(a.n_, b.n_);
    DenseMatrix c(a.n_);
    for (std::size_t i = 0; i < a.n_; ++i)
      for (std::size_t k = 0; k < a.n_; ++k) {
        const double aik = a(i, k);
        for (std::size_t j = 0; j < a.n_; ++j)
          c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix &b) {
    detail::check_lengths(a.n_, b.n_);
    for (std::size_t i = 0; i < a.a_.size(); ++i)
      a.a_[i] += b.a_[i];
    return a;
  }

  friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix &b) {
    detail::check_lengths(a.n_, b.n_);
    for (std::size_t i = 0; i < a.a_.size(); ++i)
      a.a_[i] -= b.a_[i];
    return a;
  }

  friend DenseMatrix operator*(double alpha, DenseMatrix a) {
    for (double &v : a.a_)
      v *= alpha;
    return a;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// 2 sigma I + s y' + y s'.
inline DenseMatrix bbar_matrix(const Vector &s, const Vector &y, double sigma) {
  detail::check_lengths(s.size(), y.size());
  DenseMatrix b = DenseMatrix::identity(s.size(), 2.0 * sigma);
  b.add_outer(1.0, s, y);
  b.add_outer(1.0, y, s);
  return b;
}

/// Solves A x = b by Cholesky factorization; throws if A is not positive
/// definite.
inline Vector cholesky_solve(const DenseMatrix &a, const Vector &b) {
  const std::size_t n = a.size();
  detail::check_lengths(b.size(), n);
  DenseMatrix l(n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k)
      d -= l(j, k) * l(j, k);
    if (!(d > 0.0))
      throw Error(ErrorCode::not_positive_definite, "Cholesky pivot is not positive");
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (std::size_t k = 0; k < j; ++k)
        v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  Vector z(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k)
      v -= l(i, k) * z[k];
    z[i] = v / l(i, i);
  }
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double v = z[ii];
    for (std::size_t k = ii + 1; k < n; ++k)
      v -= l(k, ii) * x[k];
    x[ii] = v / l(ii, ii);
  }
  return x;
}

/// Reference trial step: solves (2 sigma I + s y' + y s') x = -||s||^2 g.
inline Vector dense_bbar_solve(const Vector &s_t, const Vector &y_t, const Vector &g,
                               double sigma) {
  require(s_t.size() <= 200, ErrorCode::invalid_argument, "dense oracle limited to n <= 200");
  const DenseMatrix b = bbar_matrix(s_t, y_t, sigma);
  double ss = 0.0;
  for (double v : s_t)
    ss += v * v;
  Vector rhs(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    rhs[i] = -ss * g[i];
  return cholesky_solve(b, rhs);
}

struct EigenSystem {
  std::vector<double> values;           // ascending
  std::vector<Vector> vectors;          // vectors[k] pairs with values[k]
};

/// Cyclic Jacobi rotations on a symmetric matrix.
inline EigenSystem jacobi_eigensystem(const DenseMatrix &input, double symmetry_tol = 1e-14) {
  const std::size_t n = input.size();
  require(n <= 200, ErrorCode::invalid_argument, "dense oracle limited to n <= 200");
  if (input.max_asymmetry() > symmetry_tol * std::max(1.0, input.max_abs()))
    throw Error(ErrorCode::not_symmetric, "Jacobi eigensolver needs a symmetric matrix");

  DenseMatrix a = input;
  DenseMatrix v = DenseMatrix::identity(n);
  const double scale = std::max(input.max_abs(), std::numeric_limits<double>::min());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q)
        off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-17 * scale * static_cast<double>(n))
      break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300)
          continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i)
    order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  EigenSystem out;
  for (std::size_t k : order) {
    out.values.push_back(a(k, k));
    Vector col(n);
    for (std::size_t i = 0; i < n; ++i)
      col[i] = v(i, k);
    out.vectors.push_back(std::move(col));
  }
  return out;
}

inline std::vector<double> dense_eigs(const DenseMatrix &m) {
  return jacobi_eigensystem(m).values;
}

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h. When `relative` is
/// set the step for entry i is h * max(1, |x_i|).
inline Vector finite_diff_grad(const std::function<double(const Vector &)> &f, const Vector &x,
                               double h, bool relative = false) {
  require(h > 0.0, ErrorCode::invalid_argument, "finite difference step must be positive");
  Vector grad(x.size());
  Vector probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double hi = relative ? h * std::max(1.0, std::abs(x[i])) : h;
    probe[i] = x[i] + hi;
    const double fp = f(probe);
    probe[i] = x[i] - hi;
    const double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw Error(ErrorCode::non_finite, "finite difference evaluation");
    grad[i] = (fp - fm) / (2.0 * hi);
  }
  return grad;
}

/// Compensated left-to-right dot product (Neumaier's variant of Kahan
/// summation, which also survives terms larger than the running sum).
inline double kahan_dot(const Vector &a, const Vector &b) {
  detail::check_lengths(a.size(), b.size());
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double term = a[i] * b[i];
    const double next = sum + term;
    if (std::abs(sum) >= std::abs(term))
      comp += (sum - next) + term;
    else
      comp += (term - next) + sum;
    sum = next;
  }
  return sum + comp;
}

inline double sequential_dot(const Vector &a, const Vector &b) {
  detail::check_lengths(a.size(), b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sum += a[i] * b[i];
  return sum;
}

/// Golden-section minimization of a unimodal function on [lo, hi]. The
/// endpoints are compared against the interior result, so boundary minima
/// are found exactly. `f` may return any floating type; returning long double
/// sharpens the result on flat minima.
template <class F>
double golden_section_min(F &&f, double lo, double hi, double tol = 1e-12) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  auto fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  double best = 0.5 * (a + b);
  auto fbest = f(best);
  for (double edge : {lo, hi}) {
    const auto fe = f(edge);
    if (fe < fbest) {
      fbest = fe;
      best = edge;
    }
  }
  return best;
}

struct GridResult {
  Vector point;
  double value = std::numeric_limits<double>::infinity();
  std::size_t feasible_points = 0;
};

/// Exhaustive search for min model(s) over s in span{basis} subject to
/// feasible(s). The basis is orthonormalized first; the grid covers the box
/// center +- radius in those coordinates, where `center` must lie in the span.
/// A second pass refines a box of two cells around the incumbent.
inline GridResult subspace_grid_min(const std::function<double(const Vector &)> &model,
                                    const std::vector<Vector> &basis,
                                    const std::function<bool(const Vector &)> &feasible,
                                    const Vector &center, double radius,
                                    std::size_t resolution = 101, int refinements = 1) {
  require(resolution >= 2 && resolution <= 201, ErrorCode::invalid_argument,
          "grid resolution must be in [2, 201]");
  require(!basis.empty(), ErrorCode::invalid_argument, "empty basis");
  const std::size_t n = center.size();

  std::vector<Vector> q;
  for (const Vector &b : basis) {
    detail::check_lengths(b.size(), n);
    Vector w = b;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector &e : q) {
        const double c = sequential_dot(e, w);
        for (std::size_t i = 0; i < n; ++i)
          w[i] -= c * e[i];
      }
    const double len = std::sqrt(sequential_dot(w, w));
    const double ref = std::sqrt(sequential_dot(b, b));
    if (len > 1e-10 * std::max(ref, 1e-300)) {
      for (double &v : w)
        v /= len;
      q.push_back(std::move(w));
    }
  }
  require(!q.empty(), ErrorCode::invalid_argument, "degenerate basis");
  const std::size_t dim = q.size();

  std::vector<double> origin(dim);
  for (std::size_t k = 0; k < dim; ++k)
    origin[k] = sequential_dot(q[k], center);

  GridResult best;
  best.point = Vector(n);
  std::vector<double> lo(dim), step(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    lo[k] = origin[k] - radius;
    step[k] = 2.0 * radius / static_cast<double>(resolution - 1);
  }

  std::vector<double> incumbent_coords(dim);
  bool have_incumbent = false;
  Vector s(n);
  std::vector<double> coords(dim);
  for (int pass = 0; pass <= refinements; ++pass) {
    std::size_t total = 1;
    for (std::size_t k = 0; k < dim; ++k)
      total *= resolution;
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rem = flat;
      for (std::size_t k = 0; k < dim; ++k) {
        coords[k] = lo[k] + step[k] * static_cast<double>(rem % resolution);
        rem /= resolution;
      }
      for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        for (std::size_t k = 0; k < dim; ++k)
          v += coords[k] * q[k][i];
        s[i] = v;
      }
      if (!feasible(s))
        continue;
      ++best.feasible_points;
      const double value = model(s);
      if (value < best.value) {
        best.value = value;
        best.point = s;
        incumbent_coords = coords;
        have_incumbent = true;
      }
    }
    if (!have_incumbent)
      break;
    for (std::size_t k = 0; k < dim; ++k) {
      const double half = 2.0 * step[k];
      lo[k] = incumbent_coords[k] - half;
      step[k] = 2.0 * half / static_cast<double>(resolution - 1);
    }
  }
  if (!have_incumbent)
    throw Error(ErrorCode::empty_grid, "no feasible grid point");
  return best;
}

}  // namespace psglob::oracle
