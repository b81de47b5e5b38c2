#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace psglob {

enum class ErrorCode {
  length_mismatch,
  non_finite,
  invalid_argument,
  zero_trial_step,
  stationary_point,
  nonconvex_data,
  no_sign_change,
  not_positive_definite,
  not_symmetric,
  empty_grid,
  division_by_zero,
  unknown_problem,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::length_mismatch: return "length mismatch";
    case ErrorCode::non_finite: return "non-finite value";
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::zero_trial_step: return "zero trial step";
    case ErrorCode::stationary_point: return "stationary point";
    case ErrorCode::nonconvex_data: return "non-convex data";
    case ErrorCode::no_sign_change: return "no sign change in bracket";
    case ErrorCode::not_positive_definite: return "matrix not positive definite";
    case ErrorCode::not_symmetric: return "matrix not symmetric";
    case ErrorCode::empty_grid: return "empty feasible grid";
    case ErrorCode::division_by_zero: return "division by zero";
    case ErrorCode::unknown_problem: return "unknown problem";
  }
  return "unknown error";
}

/// Exception thrown by every kernel and solver component. The code is stable
/// and meant for programmatic dispatch; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const char *what) {
  if (!condition)
    throw Error(code, what);
}

}  // namespace psglob
