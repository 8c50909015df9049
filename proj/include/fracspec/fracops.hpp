#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "fracspec/common.hpp"
#include "fracspec/geometry.hpp"
#include "fracspec/quadrature.hpp"

namespace fracspec {

// Fractional order, strictly inside (0, 1).
struct FractionalOrder {
  double value;
  explicit FractionalOrder(double a) : value(a) {
    if (!(a > 0.0) || !(a < 1.0))
      throw validation_error("fractional order must lie in (0, 1)");
  }
};

struct TruncationParam {
  double eps;
  explicit TruncationParam(double e) : eps(e) {
    if (!(e > 0.0)) throw validation_error("truncation radius must be positive");
  }
};

// C_n^(alpha) = (n-1)! / Gamma(n - alpha)
inline double cn_alpha(int n, double alpha) {
  FractionalOrder check(alpha);
  if (n < 1) throw validation_error("dimension must be >= 1");
  double fact = 1.0;
  for (int i = 2; i < n; ++i) fact *= i;
  return fact / gamma_fn(n - alpha);
}

// The same constant assembled from the telescoping sum produced by
// restricting the derivative to functions of the distance from the base
// point.  For n >= 2,
//
//   C_n = 1/Gamma(2-alpha) + alpha * sum_{i=1}^{n-2} i! / Gamma(2-alpha+i),
//
// where the leading term merges the innermost geometric contribution with
// the boundary term.  At n = 1 the geometric sum is empty and only the
// boundary term survives, so the value is 1/Gamma(1-alpha).
inline double cn_alpha_telescoped(int n, double alpha) {
  FractionalOrder check(alpha);
  if (n < 1) throw validation_error("dimension must be >= 1");
  if (n == 1) return 1.0 / gamma_fn(1.0 - alpha);
  double acc = 1.0 / gamma_fn(2.0 - alpha);
  double fact = 1.0;
  for (int i = 1; i <= n - 2; ++i) {
    fact *= i;
    acc += alpha * fact / gamma_fn(2.0 - alpha + i);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Averaging kernel
//
//   K(t) = (sin(alpha pi) / pi) * (t_+^alpha - (t-1)_+^alpha) / t
//
// Positive on t > 0, zero for t <= 0, unit mass over (0, infinity).
// ---------------------------------------------------------------------------

inline double kernel_value(double t, double alpha) {
  FractionalOrder check(alpha);
  if (t <= 0.0) return 0.0;
  const double c = std::sin(alpha * pi) / pi;
  const double tp = std::pow(t, alpha);
  const double tm = (t > 1.0) ? std::pow(t - 1.0, alpha) : 0.0;
  return c * (tp - tm) / t;
}

// Mass of the kernel: exact piece on (0, 1), panel quadrature on (1, T)
// with dyadic refinement toward the kink at t = 1, binomial series for the
// tail beyond T.
inline double kernel_mass(double alpha, double T = 16.0) {
  FractionalOrder check(alpha);
  if (!(T > 2.0)) throw validation_error("tail cutoff must exceed 2");
  const double c = std::sin(alpha * pi) / pi;
  double acc = 1.0 / alpha;  // integral of t^{alpha-1} over (0, 1)

  static const GaussLegendre rule = make_gauss_legendre(24);
  const auto core = [alpha](double t) {
    return (std::pow(t, alpha) - std::pow(t - 1.0, alpha)) / t;
  };
  double lo = 1.0;
  for (int m = 40; m >= 1; --m) {
    const double hi = 1.0 + std::ldexp(1.0, -m);
    acc += integrate_gl(rule, lo, hi, core);
    lo = hi;
  }
  double step = 0.5;
  while (lo < T) {
    const double hi = std::min(lo + step, T);
    acc += integrate_gl(rule, lo, hi, core);
    lo = hi;
    step *= 1.5;
  }

  // tail: t^alpha - (t-1)^alpha = sum_{k>=1} (-1)^{k+1} C(alpha,k) t^{alpha-k}
  double binom = 1.0;
  for (int k = 1; k <= 80; ++k) {
    binom *= (alpha - (k - 1)) / k;
    const double term = ((k % 2 == 1) ? 1.0 : -1.0) * binom *
                        std::pow(T, alpha - k) / (k - alpha);
    acc += term;
    if (std::abs(term) < 1e-18) break;
  }
  return c * acc;
}

// ---------------------------------------------------------------------------
// Row functionals.
//
// Every pointwise fractional operation along a ray reduces to a linear
// functional of the nodal values.  The rows are reused verbatim when the
// operators are assembled into matrices, so the pointwise and assembled
// paths cannot drift apart.
// ---------------------------------------------------------------------------

struct RowFunctional {
  // value = self * f_i + sum_k weights[k] * f(nodes[k])
  double self = 0.0;
  std::vector<int> nodes;
  std::vector<double> weights;

  template <typename Vec>
  auto apply(const Vec& f, int i) const {
    auto acc = f[i] * self;
    for (std::size_t k = 0; k < nodes.size(); ++k)
      acc += f[nodes[k]] * weights[k];
    return acc;
  }
};

enum class DerivKind {
  left_limit,   // density f(Q) - f(T) (t/r)^{n-1}, factor 1/Gamma(1-alpha)
  kipriyanov,   // density (f(Q) - f(T)) (t/r)^{n-1}, factor C_n^(alpha)
  right_limit,  // density f(Q) - f(T), distances from the far endpoint
};

namespace detail {

// (t/r)^{n-1} with the n = 1 convention (t/r)^0 = 1 even at t = 0.
inline double geometric_factor(double t, double r, int n) {
  if (n == 1) return 1.0;
  double acc = 1.0;
  const double q = t / r;
  for (int k = 1; k < n; ++k) acc *= q;
  return acc;
}

inline double binom_coeff(int m, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (m - i + 1) / i;
  return c;
}

// Row of the directional fractional integral:
//   left:  (1/Gamma(alpha)) integral_0^{r_i} g(t) (r_i-t)^{alpha-1} (t/r_i)^{n-1} dt
//   right: (1/Gamma(alpha)) integral_{r_i}^{d} g(t) (t-r_i)^{alpha-1} dt
// with g replaced by its piecewise linear interpolant; the geometric factor
// is folded into the nodal samples.
inline RowFunctional integral_row(const Eigen::VectorXd& t, int i,
                                  double alpha, int n, Side side) {
  RowFunctional row;
  const int N = static_cast<int>(t.size()) - 1;
  const double r = t[i];
  const double inv_gamma = 1.0 / gamma_fn(alpha);
  if (side == Side::left) {
    if (i == 0) return row;  // empty range, value 0 at the base
    row.weights.assign(i + 1, 0.0);
    for (int j = 0; j < i; ++j) {
      const double a = t[j], b = t[j + 1];
      const double h = b - a;
      const double m0 = left_moment0(r, a, b, alpha);
      const double m1 = left_moment1(r, a, b, alpha);
      row.weights[j] += m0 - m1 / h;
      row.weights[j + 1] += m1 / h;
    }
    row.nodes.reserve(i + 1);
    for (int j = 0; j <= i; ++j) {
      row.weights[j] *= inv_gamma * geometric_factor(t[j], r, n);
      row.nodes.push_back(j);
    }
  } else {
    if (i == N) return row;
    row.weights.assign(N - i + 1, 0.0);
    for (int j = i; j < N; ++j) {
      const double a = t[j], b = t[j + 1];
      const double h = b - a;
      const double m0 = right_moment0(r, a, b, alpha);
      const double m1 = right_moment1(r, a, b, alpha);
      row.weights[j - i] += m0 - m1 / h;
      row.weights[j - i + 1] += m1 / h;
    }
    row.nodes.reserve(N - i + 1);
    for (int j = i; j <= N; ++j) {
      row.weights[j - i] *= inv_gamma;  // no geometric factor on the right
      row.nodes.push_back(j);
    }
  }
  return row;
}

// Closed-form contribution of the cell adjacent to the target node, with f
// replaced by its linear interpolant and the geometric factor expanded
// binomially in u = |r - t|.  Returns coefficients on (f_i, f_neighbor).
struct SliverCoeffs {
  double on_self = 0.0;
  double on_neighbor = 0.0;
};

inline SliverCoeffs adjacent_cell_moments(double r, double h, double alpha,
                                          int n, DerivKind kind) {
  const int m = (kind == DerivKind::right_limit) ? 0 : n - 1;
  SliverCoeffs out;
  // -(u/h)(f_nb - f_i)(1 - u/r)^m against u^{-alpha-1}, u in (0, h)
  for (int k = 0; k <= m; ++k) {
    const double c = binom_coeff(m, k) * ((k % 2 == 0) ? 1.0 : -1.0) /
                     std::pow(r, k);
    const double w = -c * std::pow(h, k - alpha) / (k + 1.0 - alpha);
    out.on_neighbor += w;
    out.on_self -= w;
  }
  if (kind == DerivKind::left_limit) {
    // f_i [1 - (1 - u/r)^m] against u^{-alpha-1}
    for (int k = 1; k <= m; ++k) {
      const double c = binom_coeff(m, k) * ((k % 2 == 1) ? 1.0 : -1.0) /
                       std::pow(r, k);
      out.on_self += c * std::pow(h, k - alpha) / (k - alpha);
    }
  }
  return out;
}

// Derivative row at the grid-resolution limit: the hypersingular kernel is
// integrated with exact cell moments against the piecewise linear density
// over every cell except the one touching the target, which is restored by
// the closed-form moments above.  At the singular end of the ray the
// factor r^{-alpha} (resp. (d-r)^{-alpha}) is evaluated at the first
// positive spacing; reports exclude that node from error norms.
inline RowFunctional derivative_row(const Eigen::VectorXd& t, int i,
                                    double alpha, int n, DerivKind kind) {
  RowFunctional row;
  const int N = static_cast<int>(t.size()) - 1;
  const double inv_g1 = 1.0 / gamma_fn(1.0 - alpha);
  const double front = alpha * inv_g1;
  const double s = -alpha;  // moment exponent for the (..)^{-alpha-1} kernel

  if (kind != DerivKind::right_limit) {
    const double singular_coeff =
        (kind == DerivKind::kipriyanov) ? cn_alpha(n, alpha) : inv_g1;
    if (i == 0) {
      row.self = singular_coeff * std::pow(t[1], -alpha);
      return row;
    }
    const double r = t[i];
    row.self = singular_coeff * std::pow(r, -alpha);
    row.weights.assign(i, 0.0);
    row.nodes.reserve(i);
    for (int j = 0; j < i; ++j) row.nodes.push_back(j);
    for (int j = 0; j + 1 < i; ++j) {
      const double a = t[j], b = t[j + 1];
      const double h = b - a;
      const double m0 = left_moment0(r, a, b, s);
      const double m1 = left_moment1(r, a, b, s);
      const double w0 = m0 - m1 / h;
      const double w1 = m1 / h;
      const double g0 = geometric_factor(a, r, n);
      const double g1 = geometric_factor(b, r, n);
      if (kind == DerivKind::left_limit) {
        row.self += front * (w0 + w1);
        row.weights[j] -= front * w0 * g0;
        row.weights[j + 1] -= front * w1 * g1;
      } else {
        row.self += front * (w0 * g0 + w1 * g1);
        row.weights[j] -= front * w0 * g0;
        row.weights[j + 1] -= front * w1 * g1;
      }
    }
    const double h = t[i] - t[i - 1];
    const SliverCoeffs sc = adjacent_cell_moments(r, h, alpha, n, kind);
    row.self += front * sc.on_self;
    row.weights[i - 1] += front * sc.on_neighbor;
    return row;
  }

  // right side
  const double d = t[N];
  if (i == N) {
    row.self = inv_g1 * std::pow(d - t[N - 1], -alpha);
    return row;
  }
  const double r = t[i];
  row.self = inv_g1 * std::pow(d - r, -alpha);
  row.weights.assign(N - i, 0.0);
  row.nodes.reserve(N - i);
  for (int j = i + 1; j <= N; ++j) row.nodes.push_back(j);
  for (int j = i + 1; j < N; ++j) {
    const double a = t[j], b = t[j + 1];
    const double h = b - a;
    const double m0 = right_moment0(r, a, b, s);
    const double m1 = right_moment1(r, a, b, s);
    const double w0 = m0 - m1 / h;
    const double w1 = m1 / h;
    row.self += front * (w0 + w1);
    row.weights[j - i - 1] -= front * w0;
    row.weights[j - i] -= front * w1;
  }
  const double h = t[i + 1] - t[i];
  const SliverCoeffs sc =
      adjacent_cell_moments(r, h, alpha, 1, DerivKind::right_limit);
  row.self += front * sc.on_self;
  row.weights[0] += front * sc.on_neighbor;
  return row;
}

template <typename RowBuilder>
GridFunction apply_rows(const GridFunction& f, RowBuilder&& build) {
  const FanGrid& grid = *f.grid;
  GridFunction out = GridFunction::zero(f.grid);
  for (int k = 0; k < grid.ray_count(); ++k) {
    const Eigen::VectorXd& t = grid.radial[k].nodes;
    const int base = grid.dof(k, 0);
    const auto seg = f.v.segment(base, grid.nodes_per_ray);
    for (int i = 0; i < grid.nodes_per_ray; ++i) {
      const RowFunctional row = build(t, i);
      complexd acc = seg[i] * row.self;
      for (std::size_t m = 0; m < row.nodes.size(); ++m)
        acc += seg[row.nodes[m]] * row.weights[m];
      out.v[base + i] = acc;
    }
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pointwise operations on grid functions (applied ray by ray)
// ---------------------------------------------------------------------------

// Directional fractional integral of order alpha.  The left version
// carries the geometric factor (t/r)^{n-1}; the right version does not.
inline GridFunction frac_integral(const GridFunction& g, double alpha,
                                  Side side) {
  FractionalOrder check(alpha);
  const int n = g.grid->dim();
  return detail::apply_rows(g, [&](const Eigen::VectorXd& t, int i) {
    return detail::integral_row(t, i, alpha, n, side);
  });
}

// Grid-resolution limit of the truncated fractional derivative.  This is
// the workhorse used by the identity checks and by matrix assembly.
inline GridFunction frac_derivative(const GridFunction& f, double alpha,
                                    Side side) {
  FractionalOrder check(alpha);
  const int n = f.grid->dim();
  const DerivKind kind =
      (side == Side::left) ? DerivKind::left_limit : DerivKind::right_limit;
  return detail::apply_rows(f, [&](const Eigen::VectorXd& t, int i) {
    return detail::derivative_row(t, i, alpha, n, kind);
  });
}

// Difference integral with density (f(Q) - f(T)) (t/r)^{n-1} plus
// C_n^(alpha) f(Q) r^{-alpha}.
inline GridFunction kipriyanov_derivative(const GridFunction& f,
                                          double alpha) {
  FractionalOrder check(alpha);
  const int n = f.grid->dim();
  return detail::apply_rows(f, [&](const Eigen::VectorXd& t, int i) {
    return detail::derivative_row(t, i, alpha, n, DerivKind::kipriyanov);
  });
}

// ---------------------------------------------------------------------------
// Explicitly truncated derivative.
//
// Left side, for r >= eps:
//   (alpha/Gamma(1-alpha)) integral_0^{r-eps}
//       (f(Q) - f(T)(t/r)^{n-1}) (r-t)^{-alpha-1} dt
//     + f(Q) r^{-alpha} / Gamma(1-alpha);
// for r < eps the two branches combine to f(Q) eps^{-alpha}/Gamma(1-alpha).
// The right side mirrors with distances measured from the far endpoint and
// no geometric factor.
// ---------------------------------------------------------------------------

struct TruncatedDerivative {
  GridFunction values;
  bool eps_below_grid = false;  // eps under the smallest radial spacing
};

inline TruncatedDerivative truncated_frac_derivative(const GridFunction& f,
                                                     double alpha, double eps,
                                                     Side side) {
  FractionalOrder check_a(alpha);
  TruncationParam check_e(eps);
  const FanGrid& grid = *f.grid;
  TruncatedDerivative result;
  result.values = GridFunction::zero(f.grid);
  result.eps_below_grid = eps < grid.min_spacing();
  const int n = grid.dim();
  const double inv_g1 = 1.0 / gamma_fn(1.0 - alpha);
  const double front = alpha * inv_g1;
  const double s = -alpha;

  for (int k = 0; k < grid.ray_count(); ++k) {
    const Eigen::VectorXd& t = grid.radial[k].nodes;
    const int N = grid.radial[k].cells();
    const double d = t[N];
    const int base = grid.dof(k, 0);
    const auto seg = f.v.segment(base, grid.nodes_per_ray);

    for (int i = 0; i <= N; ++i) {
      const double r = t[i];
      const double dist = (side == Side::left) ? r : d - r;
      if (dist < eps) {
        result.values.v[base + i] = seg[i] * (std::pow(eps, -alpha) * inv_g1);
        continue;
      }
      complexd integral = 0.0;
      if (side == Side::left) {
        const double cut = r - eps;
        for (int j = 0; j < i && t[j] < cut; ++j) {
          const double a = t[j];
          const double b = std::min(t[j + 1], cut);
          const double h = b - a;
          if (!(h > 0.0)) continue;
          const double m0 = left_moment0(r, a, b, s);
          const double m1 = left_moment1(r, a, b, s);
          const complexd Da =
              seg[i] - seg[j] * detail::geometric_factor(a, r, n);
          complexd Db;
          if (b == t[j + 1]) {
            Db = seg[i] - seg[j + 1] * detail::geometric_factor(b, r, n);
          } else {
            const double w = (b - t[j]) / (t[j + 1] - t[j]);
            const complexd fb = seg[j] * (1.0 - w) + seg[j + 1] * w;
            Db = seg[i] - fb * detail::geometric_factor(b, r, n);
          }
          integral += Da * (m0 - m1 / h) + Db * (m1 / h);
        }
      } else {
        const double cut = r + eps;
        for (int j = i; j < N; ++j) {
          const double b = t[j + 1];
          if (b <= cut) continue;
          const double a = std::max(t[j], cut);
          const double h = b - a;
          if (!(h > 0.0)) continue;
          const double m0 = right_moment0(r, a, b, s);
          const double m1 = right_moment1(r, a, b, s);
          complexd Da;
          if (a == t[j]) {
            Da = seg[i] - seg[j];
          } else {
            const double w = (a - t[j]) / (t[j + 1] - t[j]);
            Da = seg[i] - (seg[j] * (1.0 - w) + seg[j + 1] * w);
          }
          const complexd Db = seg[i] - seg[j + 1];
          integral += Da * (m0 - m1 / h) + Db * (m1 / h);
        }
      }
      result.values.v[base + i] =
          seg[i] * (std::pow(dist, -alpha) * inv_g1) + front * integral;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Vanishing-truncation diagnostic: evaluates the truncated derivative on a
// halving schedule eps_k = diam 2^{-k} down to a couple of grid spacings
// and records the successive L2 differences.  A shrinking tail certifies
// the input as representable at this resolution; growth like eps^{-alpha}
// flags a non-representable one.
// ---------------------------------------------------------------------------

struct DerivativeLimit {
  GridFunction values;                 // last iterate
  std::vector<double> epsilons;
  std::vector<double> l2_differences;  // between consecutive iterates
  bool cauchy = false;
  bool schedule_truncated = false;     // schedule stopped at grid resolution
};

inline DerivativeLimit frac_derivative_limit(const GridFunction& f,
                                             double alpha, Side side,
                                             int max_steps = 12) {
  FractionalOrder check(alpha);
  const FanGrid& grid = *f.grid;
  const double diam = grid.fan.domain.diameter();
  const double floor_eps = 2.0 * grid.max_spacing();
  DerivativeLimit out;
  GridFunction prev;
  for (int k = 1; k <= max_steps; ++k) {
    const double eps = diam * std::ldexp(1.0, -k);
    if (eps < floor_eps) {
      out.schedule_truncated = true;
      break;
    }
    auto cur = truncated_frac_derivative(f, alpha, eps, side);
    if (!out.epsilons.empty()) {
      GridFunction diff = cur.values;
      diff.v -= prev.v;
      out.l2_differences.push_back(weighted_norm(diff));
    }
    prev = cur.values;
    out.epsilons.push_back(eps);
  }
  if (out.epsilons.empty()) {
    // grid too coarse for even the first step; evaluate once at the floor
    auto cur = truncated_frac_derivative(f, alpha, floor_eps, side);
    prev = cur.values;
    out.epsilons.push_back(floor_eps);
    out.schedule_truncated = true;
  }
  out.values = prev;
  const std::size_t m = out.l2_differences.size();
  if (m >= 2) {
    bool shrinking = true;
    const std::size_t tail = std::min<std::size_t>(m - 1, 2);
    for (std::size_t j = m - tail; j < m; ++j)
      if (out.l2_differences[j] > out.l2_differences[j - 1] * 1.05)
        shrinking = false;
    out.cauchy = shrinking;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hoelder weight
// ---------------------------------------------------------------------------

struct HolderWeight {
  GridFunction rho;
  double lambda = 1.0;
  double M = 0.0;        // Hoelder constant (analytic when supplied)
  double inf_rho = 0.0;
  bool monotone = false; // non-increasing along every ray
};

inline HolderWeight make_holder_weight(const GridFunction& rho, double lambda,
                                       double alpha,
                                       std::optional<double> analytic_M = {}) {
  const HolderEstimate est = holder_estimate(rho, lambda, alpha);
  HolderWeight w;
  w.rho = rho;
  w.lambda = lambda;
  w.M = analytic_M.value_or(est.M);
  if (analytic_M && *analytic_M < est.M)
    throw validation_error(
        "declared Hoelder constant is below the sampled lower bound");
  w.inf_rho = est.inf_rho;
  w.monotone = est.monotone;
  return w;
}

// ---------------------------------------------------------------------------
// Identity residuals
// ---------------------------------------------------------------------------

struct AdjointResidual {
  double residual = 0.0;
  double f_norm = 0.0;
  double g_norm = 0.0;
  double phi_norm = 0.0;
  double psi_norm = 0.0;
};

// Builds f and g from square integrable densities through the left and
// right integrals, then measures the pairing mismatch
// |(D f, g) - (f, D' g)| in the weighted inner product.
inline AdjointResidual adjoint_residual(const GridFunction& phi,
                                        const GridFunction& psi,
                                        double alpha) {
  require_same_grid(phi, psi);
  const GridFunction f = frac_integral(phi, alpha, Side::left);
  const GridFunction g = frac_integral(psi, alpha, Side::right);
  const GridFunction df = frac_derivative(f, alpha, Side::left);
  const GridFunction dg = frac_derivative(g, alpha, Side::right);
  AdjointResidual out;
  out.residual = std::abs(weighted_inner_product(df, g) -
                          weighted_inner_product(f, dg));
  out.f_norm = weighted_norm(f);
  out.g_norm = weighted_norm(g);
  out.phi_norm = weighted_norm(phi);
  out.psi_norm = weighted_norm(psi);
  return out;
}

struct Representability {
  GridFunction density;
  double residual = 0.0;  // || I(density) - rho f || / || rho f ||
};

// Recovers the density of rho * f as a left integral: density = D(rho f);
// the residual checks I(density) against rho f.
inline Representability representability_solve(const HolderWeight& w,
                                               const GridFunction& f,
                                               double alpha) {
  require_same_grid(w.rho, f);
  GridFunction rf = f;
  for (Eigen::Index i = 0; i < rf.v.size(); ++i) rf.v[i] *= w.rho.v[i];
  Representability out;
  out.density = frac_derivative(rf, alpha, Side::left);
  GridFunction back = frac_integral(out.density, alpha, Side::left);
  back.v -= rf.v;
  const double denom = weighted_norm(rf);
  out.residual = (denom > 0.0) ? weighted_norm(back) / denom : 0.0;
  return out;
}

}  // namespace fracspec
