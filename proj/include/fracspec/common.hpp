#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace fracspec {

// Thrown when inputs violate a documented precondition (bad orders,
// malformed geometry, inconsistent grids).  The CLI maps this to exit 2.
class validation_error : public std::invalid_argument {
public:
  explicit validation_error(const std::string& what)
      : std::invalid_argument(what) {}
};

// Thrown on internal numerical failure (factorization breakdown,
// non-Hermitian input to a Hermitian solver, ...).  CLI exit 1.
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& what)
      : std::runtime_error(what) {}
};

using complexd = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace fracspec
