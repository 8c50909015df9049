#pragma once

#include <Eigen/Core>
#include <cmath>

#include "fracspec/common.hpp"

namespace fracspec {

enum class Grading { uniform, toward_base, both_ends };

// Radial quadrature grid on one ray: 0 = r_0 < r_1 < ... < r_N = d.
// Uniform by default.  Graded variants cluster nodes at the base (where the
// r^{-alpha} factor lives) or at both endpoints (base and far singular
// factors together, as needed by the two-sided identity checks).
struct RadialGrid {
  Eigen::VectorXd nodes;

  int cells() const { return static_cast<int>(nodes.size()) - 1; }
  double length() const { return nodes[nodes.size() - 1]; }
  double spacing(int cell) const { return nodes[cell + 1] - nodes[cell]; }

  double min_spacing() const {
    double m = length();
    for (int j = 0; j < cells(); ++j) m = std::min(m, spacing(j));
    return m;
  }
  double max_spacing() const {
    double m = 0.0;
    for (int j = 0; j < cells(); ++j) m = std::max(m, spacing(j));
    return m;
  }

  // Trapezoid weights; exact for piecewise linear integrands.
  Eigen::VectorXd trapezoid_weights() const {
    const int N = cells();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(N + 1);
    for (int j = 0; j < N; ++j) {
      const double h = spacing(j);
      w[j] += 0.5 * h;
      w[j + 1] += 0.5 * h;
    }
    return w;
  }

  static RadialGrid make(int N, double d, Grading g = Grading::uniform,
                         double power = 2.0) {
    if (N < 2) throw validation_error("radial grid needs at least 2 cells");
    if (!(d > 0.0)) throw validation_error("radial grid length must be positive");
    if (!(power >= 1.0)) throw validation_error("grading power must be >= 1");
    RadialGrid grid;
    grid.nodes.resize(N + 1);
    for (int j = 0; j <= N; ++j) {
      const double s = static_cast<double>(j) / N;
      double t = s;
      switch (g) {
        case Grading::uniform: break;
        case Grading::toward_base: t = std::pow(s, power); break;
        case Grading::both_ends: {
          const double a = std::pow(s, power);
          const double b = std::pow(1.0 - s, power);
          t = a / (a + b);
          break;
        }
      }
      grid.nodes[j] = d * t;
    }
    grid.nodes[0] = 0.0;
    grid.nodes[N] = d;
    for (int j = 0; j < N; ++j)
      if (!(grid.nodes[j] < grid.nodes[j + 1]))
        throw numeric_error("radial grid nodes not strictly increasing");
    return grid;
  }
};

}  // namespace fracspec
