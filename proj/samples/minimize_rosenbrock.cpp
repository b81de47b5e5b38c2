// Minimizes the 2-D Rosenbrock function from (-1.2, 1) with the multi-point
// strategy and with plain backtracking, and prints both iteration histories.

#include <cstdio>

#include "psglob/problems.hpp"
#include "psglob/solver.hpp"

int main() {
  const psglob::Objective f = psglob::rosenbrock(2);
  const psglob::Vector x0{-1.2, 1.0};

  psglob::SolverConfig cfg;
  cfg.max_outer = 10000;

  for (auto strategy : {psglob::Strategy::ps, psglob::Strategy::bt}) {
    cfg.strategy = strategy;
    const psglob::SolveResult r = psglob::solve(f, x0, cfg);
    std::printf("%s: %s, %zu outer iterations, %zu evaluations, f = %.3e, x = (%.6f, %.6f)\n",
                psglob::to_string(strategy).data(), psglob::to_string(r.status).data(),
                r.outer_iterations(), r.total_fevals(), r.f_star, r.x_star[0], r.x_star[1]);
  }
  return 0;
}
