#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "psglob/oracle.hpp"
#include "psglob/problems.hpp"

using namespace psglob;

namespace {

double max_rel_gap(const Vector &a, const Vector &b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  return worst;
}

void expect_fd_gradient(const Objective &obj, const Vector &x, double tol) {
  const Evaluation e = obj.evaluate(x);
  const Vector fd = oracle::finite_diff_grad([&](const Vector &z) { return obj.value(z); }, x, 1e-6);
  EXPECT_LE(max_rel_gap(e.g, fd), tol) << obj.name();
}

}  // namespace

TEST(Cosine, Values) {
  const Objective f = cosine(2);
  EXPECT_NEAR(f.value(Vector{1, 1}), std::cos(0.5), 1e-15);
  const Evaluation e = f.evaluate(Vector{0, 0});
  EXPECT_EQ(e.f, 1.0);
  EXPECT_EQ(e.g, Vector(2));
}

TEST(Cosine, GradientAtInitialPoint) {
  const Objective f = cosine(100);
  expect_fd_gradient(f, f.initial_point(), 1e-5);
}

TEST(Cosine, NeedsTwoVariables) { EXPECT_THROW((void)cosine(1), Error); }

TEST(Noncvxun, Values) {
  const Evaluation e1 = noncvxun(1).evaluate(Vector{0});
  EXPECT_EQ(e1.f, 4.0);
  EXPECT_EQ(e1.g, Vector(1));

  const double pi = std::numbers::pi;
  const Evaluation e2 = noncvxun(2).evaluate(Vector{pi, pi});
  EXPECT_NEAR(e2.f, 2 * pi * pi - 8, 1e-12);
  EXPECT_NEAR(e2.g[0], 2 * pi, 1e-12);
  EXPECT_NEAR(e2.g[1], 2 * pi, 1e-12);
}

TEST(Noncvxun, InitialPoint) {
  const Vector x0 = noncvxun(10).initial_point();
  EXPECT_NEAR(x0[0], std::log(2.0), 1e-15);
  EXPECT_NEAR(x0[9], std::log(11.0), 1e-15);
  expect_fd_gradient(noncvxun(10), x0, 1e-5);
}

TEST(Rosenbrock, Values) {
  const Objective f = rosenbrock(2);
  const Evaluation at_min = f.evaluate(Vector{1, 1});
  EXPECT_EQ(at_min.f, 0.0);
  EXPECT_EQ(at_min.g, Vector(2));

  const Evaluation e = f.evaluate(Vector{1.2, 1.2});
  EXPECT_NEAR(e.f, 5.8, 1e-12);
  EXPECT_NEAR(e.g[0], 115.6, 1e-10);
  EXPECT_NEAR(e.g[1], -48.0, 1e-10);
  expect_fd_gradient(f, Vector{1.2, 1.2}, 1e-5);

  EXPECT_NEAR(f.value(Vector{-1.2, 1}), 24.2, 1e-12);
}

TEST(Rosenbrock, ChainedGradient) {
  const Objective f = rosenbrock(10);
  expect_fd_gradient(f, f.initial_point(), 1e-5);
  expect_fd_gradient(f, Vector{-1.2, 1, 0.3, -0.5, 2, 1, 0, 0.1, -1, 0.7}, 1e-5);
}

TEST(Quadratic, Values) {
  const Evaluation e = quadratic(3, 1.0).evaluate(Vector{1, 1, 1});
  EXPECT_EQ(e.f, 1.5);
  EXPECT_EQ(e.g, (Vector{1, 1, 1}));
  EXPECT_EQ(quadratic(2, 100.0).value(Vector{1, 0}), 0.5);
  const Evaluation z = quadratic(7, 1000.0).evaluate(Vector(7));
  EXPECT_EQ(z.f, 0.0);
  EXPECT_EQ(z.g, Vector(7));
}

TEST(Quadratic, DiagonalSpansCondition) {
  const Objective f = quadratic(5, 1e4);
  Vector e(5);
  e[4] = 1.0;
  EXPECT_NEAR(f.value(e), 0.5e4, 1e-9);
}

TEST(Problems, Registry) {
  for (auto name : problem_names()) {
    const Objective f = make_problem(name, 6);
    EXPECT_EQ(f.dimension(), 6u);
    EXPECT_EQ(f.initial_point().size(), 6u);
    expect_fd_gradient(f, f.initial_point(), 1e-5);
  }
  try {
    (void)make_problem("nosuch", 3);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_problem);
  }
}

TEST(Problems, ThreadInvariantEvaluation) {
  const Objective f = cosine(50000);
  const Vector x = f.initial_point();
  ParallelPlan p4;
  p4.threads = 4;
  const Evaluation a = f.evaluate(x);
  const Evaluation b = f.evaluate(x, p4);
  EXPECT_EQ(a.f, b.f);
  EXPECT_EQ(a.g, b.g);
}

TEST(Problems, LengthMismatch) {
  EXPECT_THROW((void)rosenbrock(3).value(Vector{1, 1}), Error);
}
