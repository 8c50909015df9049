#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "fracspec/common.hpp"
#include "fracspec/grid.hpp"

namespace fracspec {

// Gamma function on the positive half line.  Arguments <= 0 are rejected:
// every constant in this library lives strictly right of the poles.
inline double gamma_fn(double x) {
  if (!(x > 0.0))
    throw validation_error("gamma_fn requires a positive argument");
  return std::tgamma(x);
}

enum class Side { left, right };

// ---------------------------------------------------------------------------
// Gauss-Legendre rule on [-1, 1], nodes by Newton iteration.
// ---------------------------------------------------------------------------

struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

inline GaussLegendre make_gauss_legendre(int n) {
  if (n < 1) throw validation_error("gauss rule order must be >= 1");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

template <typename F>
double integrate_gl(const GaussLegendre& rule, double a, double b, F&& f) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i)
    acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return acc * half;
}

// ---------------------------------------------------------------------------
// Exact power-kernel moments.
//
//   left kernel  (r - t)^{s-1} on a cell [a, b], b <= r
//   right kernel (t - r)^{s-1} on a cell [a, b], a >= r
//
// moment0 integrates the kernel, moment1 integrates (t - a) * kernel.
// Both are closed forms, so a piecewise linear density is integrated
// exactly.  They stay valid for any s with s != 0 and s != -1 as long as
// the cell keeps away from the singular endpoint; the fractional
// derivative path uses s = -alpha on truncated ranges.
// ---------------------------------------------------------------------------

inline double left_moment0(double r, double a, double b, double s) {
  return (std::pow(r - a, s) - std::pow(r - b, s)) / s;
}

inline double left_moment1(double r, double a, double b, double s) {
  const double m0 = left_moment0(r, a, b, s);
  const double m0n = (std::pow(r - a, s + 1.0) - std::pow(r - b, s + 1.0)) / (s + 1.0);
  return (r - a) * m0 - m0n;
}

inline double right_moment0(double r, double a, double b, double s) {
  return (std::pow(b - r, s) - std::pow(a - r, s)) / s;
}

inline double right_moment1(double r, double a, double b, double s) {
  const double m0 = right_moment0(r, a, b, s);
  const double m1n = (std::pow(b - r, s + 1.0) - std::pow(a - r, s + 1.0)) / (s + 1.0);
  return m1n - (a - r) * m0;
}

// ---------------------------------------------------------------------------
// Product-integration rule for weakly singular kernels.
//
// For a target node r_i the rule returns weights w_j with
//
//   sum_j w_j g(t_j)  =  integral of  g_lin(t) * |r_i - t|^{s-1} dt
//
// taken over [0, r_i] (left) or [r_i, d] (right), where g_lin is the
// piecewise linear interpolant of g on the radial grid.  Exact moments per
// cell make the rule exact whenever g itself is piecewise linear.  s = 1
// recovers the trapezoid rule.
// ---------------------------------------------------------------------------

class SingularRule {
public:
  SingularRule(RadialGrid grid, double s, Side endpoint)
      : grid_(std::move(grid)), s_(s), side_(endpoint) {
    if (!(s > 0.0) || s > 1.0)
      throw validation_error(
          "singular rule exponent must lie in (0, 1]; hypersingular kernels "
          "are handled only through the truncated derivative path");
  }

  const RadialGrid& grid() const { return grid_; }
  double exponent() const { return s_; }
  Side side() const { return side_; }

  // Weights for one evaluation point, dense over all nodes.
  Eigen::VectorXd row(int i) const {
    const int N = grid_.cells();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(N + 1);
    const double r = grid_.nodes[i];
    if (side_ == Side::left) {
      for (int j = 0; j < i; ++j) {
        const double a = grid_.nodes[j], b = grid_.nodes[j + 1];
        const double h = b - a;
        const double m0 = left_moment0(r, a, b, s_);
        const double m1 = left_moment1(r, a, b, s_);
        w[j] += m0 - m1 / h;
        w[j + 1] += m1 / h;
      }
    } else {
      for (int j = i; j < N; ++j) {
        const double a = grid_.nodes[j], b = grid_.nodes[j + 1];
        const double h = b - a;
        const double m0 = right_moment0(r, a, b, s_);
        const double m1 = right_moment1(r, a, b, s_);
        w[j] += m0 - m1 / h;
        w[j + 1] += m1 / h;
      }
    }
    return w;
  }

  // Full table, row i = weights for target node i.  Eager and O(N^2);
  // intended for moderate grids and for tests.
  Eigen::MatrixXd table() const {
    const int n = grid_.cells() + 1;
    Eigen::MatrixXd W(n, n);
    for (int i = 0; i < n; ++i) W.row(i) = row(i).transpose();
    return W;
  }

  double apply(const Eigen::VectorXd& g, int i) const {
    return row(i).dot(g);
  }

private:
  RadialGrid grid_;
  double s_;
  Side side_;
};

inline Eigen::VectorXd product_weights(const RadialGrid& grid, double s,
                                       Side endpoint, int target) {
  return SingularRule(grid, s, endpoint).row(target);
}

}  // namespace fracspec
