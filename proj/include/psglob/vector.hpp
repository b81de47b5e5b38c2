#pragma once

/// \file vector.hpp
///
/// Dense vector type and the deterministic data-parallel kernels every other
/// component is built on.
///
/// Reductions split the index range into fixed-size chunks. Each chunk is
/// summed left to right, and the chunk partials are then added in ascending
/// chunk order on the calling thread. The partition depends only on the
/// vector length and the chunk size, so results are bitwise identical for
/// any thread count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include <omp.h>

#include "psglob/error.hpp"

namespace psglob {

/// Thread count and reduction block size for the vector kernels.
struct ParallelPlan {
  int threads = 1;
  std::size_t chunk_size = 4096;

  static constexpr std::size_t default_chunk_size = 4096;

  void validate() const {
    require(threads >= 1, ErrorCode::invalid_argument, "thread count must be positive");
    require(chunk_size >= 1, ErrorCode::invalid_argument, "chunk size must be positive");
  }

  std::size_t chunk_count(std::size_t n) const noexcept {
    return n == 0 ? 0 : (n + chunk_size - 1) / chunk_size;
  }
};

/// Dense point or direction in R^n. The length is fixed at construction.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double value = 0.0) : data_(n, value) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double &operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  double *data() noexcept { return data_.data(); }
  const double *data() const noexcept { return data_.data(); }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  const std::vector<double> &values() const noexcept { return data_; }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Vector &, const Vector &) = default;

 private:
  std::vector<double> data_;
};

/// The six scalars a trial-step update needs:
/// v1 = s'y, v2 = s's, v3 = y'y, v4 = y'g, v5 = g'g, v6 = s'g.
struct InnerProducts {
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;
  double v4 = 0.0;
  double v5 = 0.0;
  double v6 = 0.0;

  friend bool operator==(const InnerProducts &, const InnerProducts &) = default;
};

namespace detail {

inline void check_lengths(std::size_t a, std::size_t b) {
  if (a != b)
    throw Error(ErrorCode::length_mismatch,
                "vector lengths " + std::to_string(a) + " and " + std::to_string(b));
}

inline void check_finite_result(double value, std::initializer_list<const Vector *> inputs) {
  if (std::isfinite(value))
    return;
  for (const Vector *v : inputs)
    if (!v->all_finite())
      throw Error(ErrorCode::non_finite, "NaN or Inf in kernel input");
  throw Error(ErrorCode::non_finite, "reduction overflowed");
}

}  // namespace detail

/// Runs body(begin, end) over every chunk of [0, n) in parallel. Chunks are
/// disjoint, so the body may write to per-index outputs without locking.
template <class Body>
void for_each_chunk(std::size_t n, const ParallelPlan &plan, Body &&body) {
  const std::size_t chunks = plan.chunk_count(n);
  const auto count = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for num_threads(plan.threads) schedule(static) if (plan.threads > 1 && chunks > 1)
  for (std::ptrdiff_t c = 0; c < count; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * plan.chunk_size;
    body(begin, std::min(n, begin + plan.chunk_size));
  }
}

/// Deterministic reduction of K partial sums. partial(begin, end) returns the
/// chunk's K-tuple; tuples are combined in ascending chunk order.
template <std::size_t K, class Partial>
std::array<double, K> chunked_reduce(std::size_t n, const ParallelPlan &plan, Partial &&partial) {
  const std::size_t chunks = plan.chunk_count(n);
  std::array<double, K> total{};
  if (chunks == 1) {
    total = partial(std::size_t{0}, n);
    return total;
  }
  std::vector<std::array<double, K>> partials(chunks);
  for_each_chunk(n, plan, [&](std::size_t begin, std::size_t end) {
    partials[begin / plan.chunk_size] = partial(begin, end);
  });
  for (const auto &p : partials)
    for (std::size_t k = 0; k < K; ++k)
      total[k] += p[k];
  return total;
}

inline double dot(const Vector &a, const Vector &b, const ParallelPlan &plan = {}) {
  detail::check_lengths(a.size(), b.size());
  const double *pa = a.data();
  const double *pb = b.data();
  const auto sum = chunked_reduce<1>(a.size(), plan, [=](std::size_t begin, std::size_t end) {
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i)
      acc += pa[i] * pb[i];
    return std::array<double, 1>{acc};
  });
  detail::check_finite_result(sum[0], {&a, &b});
  return sum[0];
}

inline double norm(const Vector &a, const ParallelPlan &plan = {}) {
  return std::sqrt(dot(a, a, plan));
}

/// All six products of InnerProducts in one sweep. Each product is
/// accumulated in the same order dot() uses, so the results are identical to
/// six separate dot() calls.
inline InnerProducts fused_products(const Vector &s, const Vector &y, const Vector &g,
                                    const ParallelPlan &plan = {}) {
  detail::check_lengths(s.size(), y.size());
  detail::check_lengths(s.size(), g.size());
  const double *ps = s.data();
  const double *py = y.data();
  const double *pg = g.data();
  const auto r = chunked_reduce<6>(s.size(), plan, [=](std::size_t begin, std::size_t end) {
    std::array<double, 6> acc{};
    for (std::size_t i = begin; i < end; ++i) {
      const double si = ps[i], yi = py[i], gi = pg[i];
      acc[0] += si * yi;
      acc[1] += si * si;
      acc[2] += yi * yi;
      acc[3] += yi * gi;
      acc[4] += gi * gi;
      acc[5] += si * gi;
    }
    return acc;
  });
  for (double v : r)
    detail::check_finite_result(v, {&s, &y, &g});
  return {r[0], r[1], r[2], r[3], r[4], r[5]};
}

/// out = cg*g + cy*y + cs*s. `out` may alias any of the inputs.
inline void combine3_into(Vector &out, double cg, const Vector &g, double cy, const Vector &y,
                          double cs, const Vector &s, const ParallelPlan &plan = {}) {
  detail::check_lengths(g.size(), y.size());
  detail::check_lengths(g.size(), s.size());
  if (out.size() != g.size())
    out = Vector(g.size());
  double *po = out.data();
  const double *pg = g.data();
  const double *py = y.data();
  const double *ps = s.data();
  for_each_chunk(g.size(), plan, [=](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      po[i] = cg * pg[i] + cy * py[i] + cs * ps[i];
  });
}

inline Vector combine3(double cg, const Vector &g, double cy, const Vector &y, double cs,
                       const Vector &s, const ParallelPlan &plan = {}) {
  Vector out(g.size());
  combine3_into(out, cg, g, cy, y, cs, s, plan);
  return out;
}

/// out = alpha*x + y, elementwise.
inline void axpy_into(Vector &out, double alpha, const Vector &x, const Vector &y,
                      const ParallelPlan &plan = {}) {
  detail::check_lengths(x.size(), y.size());
  if (out.size() != x.size())
    out = Vector(x.size());
  double *po = out.data();
  const double *px = x.data();
  const double *py = y.data();
  for_each_chunk(x.size(), plan, [=](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      po[i] = alpha * px[i] + py[i];
  });
}

inline Vector axpy(double alpha, const Vector &x, const Vector &y, const ParallelPlan &plan = {}) {
  Vector out(x.size());
  axpy_into(out, alpha, x, y, plan);
  return out;
}

inline void scale_into(Vector &out, double alpha, const Vector &x, const ParallelPlan &plan = {}) {
  if (out.size() != x.size())
    out = Vector(x.size());
  double *po = out.data();
  const double *px = x.data();
  for_each_chunk(x.size(), plan, [=](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      po[i] = alpha * px[i];
  });
}

inline Vector scale(double alpha, const Vector &x, const ParallelPlan &plan = {}) {
  Vector out(x.size());
  scale_into(out, alpha, x, plan);
  return out;
}

}  // namespace psglob
