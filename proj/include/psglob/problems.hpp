#pragma once

/// \file problems.hpp
///
/// Built-in test objectives. Every objective returns f and its gradient from
/// one parallel sweep; the function value is accumulated with the same
/// chunked reduction the vector kernels use, so evaluation is independent of
/// the thread count.

#include <cmath>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "psglob/error.hpp"
#include "psglob/vector.hpp"

namespace psglob {

struct Evaluation {
  double f = 0.0;
  Vector g;
};

class Objective {
 public:
  /// Writes the gradient into g (already sized n) and returns f.
  using Evaluator = std::function<double(const Vector &x, Vector &g, const ParallelPlan &plan)>;
  using Initializer = std::function<Vector(std::size_t n)>;

  Objective(std::string name, std::size_t dimension, Evaluator eval, Initializer init)
      : name_(std::move(name)), dimension_(dimension), eval_(std::move(eval)),
        init_(std::move(init)) {}

  const std::string &name() const noexcept { return name_; }
  std::size_t dimension() const noexcept { return dimension_; }

  double evaluate_into(const Vector &x, Vector &g, const ParallelPlan &plan = {}) const {
    detail::check_lengths(x.size(), dimension_);
    if (g.size() != dimension_)
      g = Vector(dimension_);
    return eval_(x, g, plan);
  }

  Evaluation evaluate(const Vector &x, const ParallelPlan &plan = {}) const {
    Evaluation out{0.0, Vector(dimension_)};
    out.f = evaluate_into(x, out.g, plan);
    return out;
  }

  double value(const Vector &x, const ParallelPlan &plan = {}) const {
    Vector g(dimension_);
    return evaluate_into(x, g, plan);
  }

  Vector initial_point() const { return init_(dimension_); }

 private:
  std::string name_;
  std::size_t dimension_;
  Evaluator eval_;
  Initializer init_;
};

/// COSINE: sum_{i<n-1} cos(x_i^2 - 0.5 x_{i+1}), started from all ones.
inline Objective cosine(std::size_t n) {
  require(n >= 2, ErrorCode::invalid_argument, "cosine needs n >= 2");
  auto eval = [n](const Vector &x, Vector &g, const ParallelPlan &plan) {
    const double *px = x.data();
    double *pg = g.data();
    const auto f = chunked_reduce<1>(n, plan, [=](std::size_t begin, std::size_t end) {
      double acc = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        double gi = 0.0;
        if (i + 1 < n) {
          const double arg = px[i] * px[i] - 0.5 * px[i + 1];
          acc += std::cos(arg);
          gi -= 2.0 * px[i] * std::sin(arg);
        }
        if (i > 0) {
          const double prev = px[i - 1] * px[i - 1] - 0.5 * px[i];
          gi += 0.5 * std::sin(prev);
        }
        pg[i] = gi;
      }
      return std::array<double, 1>{acc};
    });
    return f[0];
  };
  return Objective("cosine", n, eval, [](std::size_t m) { return Vector(m, 1.0); });
}

/// NONCVXUN: sum_i x_i^2 + 4 cos(x_i), started from x_i = log(1 + i) (1-based i).
inline Objective noncvxun(std::size_t n) {
  require(n >= 1, ErrorCode::invalid_argument, "noncvxun needs n >= 1");
  auto eval = [n](const Vector &x, Vector &g, const ParallelPlan &plan) {
    const double *px = x.data();
    double *pg = g.data();
    const auto f = chunked_reduce<1>(n, plan, [=](std::size_t begin, std::size_t end) {
      double acc = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        const double xi = px[i];
        acc += xi * xi + 4.0 * std::cos(xi);
        pg[i] = 2.0 * xi - 4.0 * std::sin(xi);
      }
      return std::array<double, 1>{acc};
    });
    return f[0];
  };
  auto init = [](std::size_t m) {
    Vector x(m);
    for (std::size_t i = 0; i < m; ++i)
      x[i] = std::log(1.0 + static_cast<double>(i + 1));
    return x;
  };
  return Objective("noncvxun", n, eval, init);
}

/// Chained Rosenbrock: sum_{i<n-1} 100(x_{i+1} - x_i^2)^2 + (1 - x_i)^2,
/// started from all 1.2. Each gradient entry collects both neighbouring terms.
inline Objective rosenbrock(std::size_t n) {
  require(n >= 2, ErrorCode::invalid_argument, "rosenbrock needs n >= 2");
  auto eval = [n](const Vector &x, Vector &g, const ParallelPlan &plan) {
    const double *px = x.data();
    double *pg = g.data();
    const auto f = chunked_reduce<1>(n, plan, [=](std::size_t begin, std::size_t end) {
      double acc = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        double gi = 0.0;
        if (i + 1 < n) {
          const double r = px[i + 1] - px[i] * px[i];
          const double d = 1.0 - px[i];
          acc += 100.0 * r * r + d * d;
          gi += -400.0 * px[i] * r - 2.0 * d;
        }
        if (i > 0)
          gi += 200.0 * (px[i] - px[i - 1] * px[i - 1]);
        pg[i] = gi;
      }
      return std::array<double, 1>{acc};
    });
    return f[0];
  };
  return Objective("rosenbrock", n, eval, [](std::size_t m) { return Vector(m, 1.2); });
}

/// 0.5 x'Dx with diag(D) log-spaced over [1, condition]; started from all ones.
inline Objective quadratic(std::size_t n, double condition) {
  require(n >= 1, ErrorCode::invalid_argument, "quadratic needs n >= 1");
  require(condition >= 1.0 && std::isfinite(condition), ErrorCode::invalid_argument,
          "quadratic condition must be >= 1");
  std::vector<double> diag(n, 1.0);
  for (std::size_t i = 1; i < n; ++i)
    diag[i] = std::pow(condition, static_cast<double>(i) / static_cast<double>(n - 1));
  auto eval = [d = std::move(diag)](const Vector &x, Vector &g, const ParallelPlan &plan) {
    const double *px = x.data();
    const double *pd = d.data();
    double *pg = g.data();
    const auto f = chunked_reduce<1>(x.size(), plan, [=](std::size_t begin, std::size_t end) {
      double acc = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        pg[i] = pd[i] * px[i];
        acc += 0.5 * pd[i] * px[i] * px[i];
      }
      return std::array<double, 1>{acc};
    });
    return f[0];
  };
  return Objective("quadratic", n, std::move(eval), [](std::size_t m) { return Vector(m, 1.0); });
}

inline const std::vector<std::string_view> &problem_names() {
  static const std::vector<std::string_view> names{"cosine", "noncvxun", "rosenbrock", "quadratic"};
  return names;
}

/// Registry lookup used by the CLI. `condition` only applies to "quadratic".
inline Objective make_problem(std::string_view name, std::size_t n, double condition = 100.0) {
  if (name == "cosine")
    return cosine(n);
  if (name == "noncvxun")
    return noncvxun(n);
  if (name == "rosenbrock")
    return rosenbrock(n);
  if (name == "quadratic")
    return quadratic(n, condition);
  throw Error(ErrorCode::unknown_problem, std::string(name));
}

}  // namespace psglob
