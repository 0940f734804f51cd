#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sliodf {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double half_pi = 0.5 * pi;
inline constexpr double deg = pi / 180.0;

// Contract violations (bad arguments, shape mismatches).
class contract_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent files.
class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Degenerate numerical situations (zero variance, empty signals, ...).
class numeric_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw contract_error(what);
}

inline double wrap_two_pi(double a) {
  double r = std::fmod(a, two_pi);
  return r < 0 ? r + two_pi : r;
}

// Smallest absolute difference between two angles, result in [0, pi].
inline double ang_diff(double a, double b) {
  double d = std::fabs(wrap_two_pi(a) - wrap_two_pi(b));
  return d > pi ? two_pi - d : d;
}

// Same for axial quantities identified modulo pi; result in [0, pi/2].
inline double axial_diff(double a, double b) {
  double d = std::fmod(std::fabs(a - b), pi);
  return d > half_pi ? pi - d : d;
}

}  // namespace sliodf
