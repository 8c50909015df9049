#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SVD>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "fracspec/assembly.hpp"
#include "fracspec/parallel.hpp"
#include "fracspec/rng.hpp"

namespace fracspec {

// ---------------------------------------------------------------------------
// Accretivity constants
//
//   mu  = (1/2) d^{-a} (1/Gamma(1-a) + C_n^(a))
//         - a M d^{l-a} / (2 Gamma(1-a) (l-a) inf rho)
//   mu1 = a0 + mu inf rho
//
// The penalty term is dropped when rho is monotonically non-increasing along
// every ray.
// ---------------------------------------------------------------------------

struct AccretivityReport {
  double mu = 0.0;
  double mu1 = 0.0;
  double inf_rho = 0.0;
  bool gamma_feasible = false;  // necessary condition mu * inf rho > 0
  double empirical_min = std::numeric_limits<double>::quiet_NaN();
  long trials = 0;
};

inline AccretivityReport accretivity_constants(double alpha, int n,
                                               double diameter,
                                               const HolderWeight& weight,
                                               double a0 = 1.0) {
  FractionalOrder check(alpha);
  if (n < 1) throw validation_error("dimension must be >= 1");
  if (!(diameter > 0.0)) throw validation_error("diameter must be positive");
  if (!(a0 > 0.0)) throw validation_error("ellipticity bound a0 must be positive");
  if (!(weight.lambda > alpha))
    throw validation_error(
        "weight smoothness exponent must exceed the fractional order");
  if (!(weight.inf_rho > 0.0))
    throw validation_error("weight must be bounded away from zero");

  AccretivityReport out;
  const double lead = 0.5 * std::pow(diameter, -alpha) *
                      (1.0 / gamma_fn(1.0 - alpha) + cn_alpha(n, alpha));
  double penalty = 0.0;
  if (!weight.monotone) {
    penalty = alpha * weight.M * std::pow(diameter, weight.lambda - alpha) /
              (2.0 * gamma_fn(1.0 - alpha) * (weight.lambda - alpha) *
               weight.inf_rho);
  }
  out.mu = lead - penalty;
  out.inf_rho = weight.inf_rho;
  out.mu1 = a0 + out.mu * weight.inf_rho;
  out.gamma_feasible = out.mu * weight.inf_rho > 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Trial fields for Rayleigh scans and form validation: low-frequency sine
// modes first, then alternating smooth bumps and random band-limited
// combinations, all vanishing on the boundary.
// ---------------------------------------------------------------------------

namespace detail {

inline Eigen::VectorXcd trial_field(const InteriorSpace& s, long which,
                                    Rng& rng) {
  const int n = s.dof_count();
  const double lx = s.xs[s.nx] - s.xs[0];
  const double ly = s.dim() == 2 ? s.ys[s.ny] - s.ys[0] : 1.0;
  Eigen::VectorXcd f(n);
  auto fill = [&](auto&& fn) {
    for (int i = 0; i < n; ++i) f[i] = fn(s.nodes[i]);
  };

  if (which < 6) {
    static const int kx[6] = {1, 1, 2, 2, 3, 1};
    static const int ky[6] = {1, 2, 1, 2, 1, 3};
    if (s.dim() == 1) {
      const double k = static_cast<double>(which + 1);
      fill([&](Point p) {
        return complexd(std::sin(k * pi * p.x / lx), 0.0);
      });
    } else {
      const int a = kx[which], b = ky[which];
      fill([&](Point p) {
        return complexd(
            std::sin(a * pi * p.x / lx) * std::sin(b * pi * p.y / ly), 0.0);
      });
    }
    return f;
  }

  if (which % 3 == 0) {
    auto bump1 = [](double x, double c, double w) {
      const double u = (x - c) / w;
      return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
    };
    const double cx = lx * rng.uniform(0.2, 0.8);
    const double wx = rng.uniform(0.5, 0.95) * std::min(cx, lx - cx);
    if (s.dim() == 1) {
      fill([&](Point p) { return complexd(bump1(p.x, cx, wx), 0.0); });
    } else {
      const double cy = ly * rng.uniform(0.2, 0.8);
      const double wy = rng.uniform(0.5, 0.95) * std::min(cy, ly - cy);
      fill([&](Point p) {
        return complexd(bump1(p.x, cx, wx) * bump1(p.y, cy, wy), 0.0);
      });
    }
    return f;
  }

  f.setZero();
  if (s.dim() == 1) {
    for (int k = 1; k <= 8; ++k) {
      const complexd c(rng.normal(), rng.normal());
      for (int i = 0; i < n; ++i)
        f[i] += c / static_cast<double>(k) *
                std::sin(k * pi * s.nodes[i].x / lx);
    }
  } else {
    for (int k = 1; k <= 4; ++k) {
      for (int l = 1; l <= 4; ++l) {
        const complexd c(rng.normal(), rng.normal());
        for (int i = 0; i < n; ++i)
          f[i] += c / static_cast<double>(k + l) *
                  std::sin(k * pi * s.nodes[i].x / lx) *
                  std::sin(l * pi * s.nodes[i].y / ly);
      }
    }
  }
  return f;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Empirical Rayleigh minimum of Re(Af, f)_rho / (f, f)_rho over the trial
// ensemble.  The scan also verifies the real/imaginary split
//   Re(Af, f) = (A Re f, Re f) + (A Im f, Im f)
// which holds exactly for real operator matrices.
// ---------------------------------------------------------------------------

struct RayleighScan {
  double min_quotient = std::numeric_limits<double>::infinity();
  long trials = 0;   // evaluated trials
  long skipped = 0;  // zero-norm trials
  double split_gap = 0.0;
};

inline RayleighScan empirical_rayleigh(const Eigen::MatrixXd& op,
                                       const InteriorSpace& space,
                                       const Eigen::VectorXd& rho, long trials,
                                       std::uint64_t seed = 0x1d5eedULL) {
  if (op.rows() != op.cols() || op.rows() != space.dof_count() ||
      rho.size() != op.rows())
    throw validation_error("operator, space, and weight sizes must agree");
  if (trials < 1) throw validation_error("at least one trial is required");
  const Eigen::VectorXd w = space.mass.array() * rho.array();
  if (!(w.maxCoeff() > 0.0))
    throw validation_error("weight vanishes identically");

  const Rng base(seed);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> quotient(trials, nan), gap(trials, 0.0);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    Rng stream = base.child(static_cast<std::uint64_t>(t));
    const Eigen::VectorXcd f =
        detail::trial_field(space, static_cast<long>(t), stream);
    const double nrm2 = (w.array() * f.array().abs2()).sum();
    if (!(nrm2 > 0.0)) return;
    const Eigen::VectorXcd df = op * f;
    const complexd pair =
        (df.array() * f.array().conjugate() * w.array().cast<complexd>())
            .sum();
    const Eigen::VectorXd u = f.real(), v = f.imag();
    const double split = (w.array() * (op * u).array() * u.array()).sum() +
                         (w.array() * (op * v).array() * v.array()).sum();
    quotient[t] = pair.real() / nrm2;
    gap[t] = std::abs(pair.real() - split) / (std::abs(pair.real()) + 1.0);
  });

  RayleighScan out;
  for (long t = 0; t < trials; ++t) {
    if (std::isnan(quotient[t])) {
      ++out.skipped;
      continue;
    }
    out.min_quotient = std::min(out.min_quotient, quotient[t]);
    out.split_gap = std::max(out.split_gap, gap[t]);
    ++out.trials;
  }
  if (out.trials == 0)
    throw validation_error("every trial had zero weighted norm");
  return out;
}

// ---------------------------------------------------------------------------
// Numerical-range sampling in the mass inner product.
// ---------------------------------------------------------------------------

enum class RangeStrategy { random, coordinate, extreme, mixed };

namespace detail {

inline complexd range_point(const Eigen::MatrixXd& a, const Eigen::VectorXd& w,
                            const Eigen::VectorXcd& u) {
  const complexd num =
      ((a * u).array() * u.array().conjugate() * w.array().cast<complexd>())
          .sum();
  const double den = (w.array() * u.array().abs2()).sum();
  return num / den;
}

inline Eigen::VectorXcd random_direction(int n, Rng& rng) {
  Eigen::VectorXcd u(n);
  for (int i = 0; i < n; ++i) u[i] = complexd(rng.normal(), rng.normal());
  return u;
}

}  // namespace detail

inline std::vector<complexd> numerical_range_sample(
    const Eigen::MatrixXd& A, const Eigen::VectorXd& mass,
    RangeStrategy strategy, int count, std::uint64_t seed = 0x2d5eedULL) {
  const int n = static_cast<int>(A.rows());
  if (A.rows() != A.cols() || mass.size() != n)
    throw validation_error("operator and mass sizes must agree");
  if (count < 1) throw validation_error("sample count must be >= 1");

  std::vector<complexd> out(count);
  const Rng base(seed);

  // extreme eigenvectors of the Hermitian and skew parts, in the similarity
  // metric where the mass product becomes the plain one
  std::vector<Eigen::VectorXcd> extremes;
  if (strategy == RangeStrategy::extreme || strategy == RangeStrategy::mixed) {
    const Eigen::VectorXd sq = mass.array().sqrt();
    Eigen::MatrixXd ahat(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) ahat(i, j) = A(i, j) * sq[i] / sq[j];
    const Eigen::MatrixXd herm = 0.5 * (ahat + ahat.transpose());
    const Eigen::MatrixXd skew = 0.5 * (ahat - ahat.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eh(herm);
    const Eigen::MatrixXcd bmat =
        complexd(0.0, 1.0) * skew.cast<complexd>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eb(bmat);
    auto back = [&](const Eigen::VectorXcd& uhat) -> Eigen::VectorXcd {
      return (uhat.array() / sq.array().cast<complexd>()).matrix();
    };
    extremes.push_back(back(eh.eigenvectors().col(0).cast<complexd>()));
    extremes.push_back(back(eh.eigenvectors().col(n - 1).cast<complexd>()));
    extremes.push_back(back(eb.eigenvectors().col(0)));
    extremes.push_back(back(eb.eigenvectors().col(n - 1)));
  }

  auto fill_random = [&](int lo, int hi) {
    parallel_for(static_cast<std::size_t>(hi - lo), [&](std::size_t j) {
      Rng stream = base.child(static_cast<std::uint64_t>(lo + j));
      const Eigen::VectorXcd u = detail::random_direction(n, stream);
      out[lo + j] = detail::range_point(A, mass, u);
    });
  };

  switch (strategy) {
    case RangeStrategy::random:
      fill_random(0, count);
      break;
    case RangeStrategy::coordinate:
      for (int j = 0; j < count; ++j) out[j] = complexd(A(j % n, j % n), 0.0);
      break;
    case RangeStrategy::extreme: {
      const int m = std::min<int>(count, 4);
      for (int j = 0; j < m; ++j)
        out[j] = detail::range_point(A, mass, extremes[j]);
      // pad with random mixtures of the extreme directions
      parallel_for(static_cast<std::size_t>(count - m), [&](std::size_t j) {
        Rng stream = base.child(static_cast<std::uint64_t>(m + j));
        Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);
        for (const auto& e : extremes)
          u += complexd(stream.normal(), stream.normal()) * e;
        out[m + j] = detail::range_point(A, mass, u);
      });
      break;
    }
    case RangeStrategy::mixed: {
      int j = 0;
      for (; j < count && j < 4; ++j)
        out[j] = detail::range_point(A, mass, extremes[j]);
      const int coords = std::min(count - j, std::min(n, (count - j) / 2));
      for (int c = 0; c < coords; ++c, ++j) {
        const int i = static_cast<int>(
            static_cast<long>(c) * n / std::max(coords, 1));
        out[j] = complexd(A(i, i), 0.0);
      }
      fill_random(j, count);
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sector fitting: vertex on the real axis, points confined to
// |arg(z - gamma)| <= theta.  The free fit takes the maximal vertex
// gamma = min Re z and the minimal semi-angle; a fixed vertex can be
// supplied instead.  A point at or left of the vertex with nonzero
// imaginary part degenerates the fit to theta = pi/2.
// ---------------------------------------------------------------------------

struct SectorEstimate {
  double gamma = 0.0;
  double theta = 0.0;  // semi-angle
  double k = std::numeric_limits<double>::infinity();  // cot(theta)
  bool degenerate = false;
};

inline SectorEstimate sector_fit(const std::vector<complexd>& points,
                                 std::optional<double> fixed_gamma = {}) {
  if (points.empty())
    throw validation_error("sector fit needs at least one point");
  double min_re = std::numeric_limits<double>::infinity();
  for (const complexd& z : points) min_re = std::min(min_re, z.real());

  SectorEstimate out;
  out.gamma = fixed_gamma.value_or(min_re);
  if (min_re < out.gamma) {
    out.gamma = min_re;
    out.degenerate = true;
  }
  double slope = 0.0;
  for (const complexd& z : points) {
    const double dx = z.real() - out.gamma;
    const double ay = std::abs(z.imag());
    if (dx <= 0.0) {
      if (ay > 1e-12) out.degenerate = true;
    } else {
      slope = std::max(slope, ay / dx);
    }
  }
  if (out.degenerate) {
    out.theta = 0.5 * pi;
    out.k = 0.0;
  } else {
    out.theta = std::atan(slope);
    out.k = slope > 0.0 ? 1.0 / slope
                        : std::numeric_limits<double>::infinity();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exponent bookkeeping for the analytic sector bound:
//   nu = (n/l)(1/p - 1/q) + (alpha + beta)/l
// under lp <= n, q > p, 0 < alpha < l - n/p + n/q, beta > 0.
// ---------------------------------------------------------------------------

struct NuParams {
  int n = 1;
  int l = 1;
  double p = 2.0;
  double q = 4.0;
  double alpha = 0.5;
  double beta = 0.01;
  double nu = 0.0;

  NuParams(int n_, int l_, double p_, double q_, double alpha_, double beta_)
      : n(n_), l(l_), p(p_), q(q_), alpha(alpha_), beta(beta_) {
    if (n < 1 || l < 1)
      throw validation_error("dimension and smoothness order must be >= 1");
    if (!(p >= 1.0) || !(q > p))
      throw validation_error("exponents must satisfy 1 <= p < q");
    if (l * p > n * (1.0 + 1e-12))
      throw validation_error("smoothness-exponent product lp must not exceed n");
    const double upper = l - n / p + n / q;
    if (!(alpha > 0.0) || !(alpha < upper)) {
      std::ostringstream msg;
      msg << "fractional order " << alpha << " must lie in (0, " << upper
          << ")";
      throw validation_error(msg.str());
    }
    if (!(beta > 0.0) || !(beta <= 1.0))
      throw validation_error("beta must be a small positive number");
    nu = (static_cast<double>(n) / l) * (1.0 / p - 1.0 / q) +
         (alpha + beta) / l;
  }
};

// ---------------------------------------------------------------------------
// Analytic sector parameters:
//   k     = a0 / (eps delta^{2-2nu} C3 + a1)
//   gamma = mu inf rho - k (eps delta^{-2nu} C2 + 1/eps)
//   theta = arctan(1/k)
// with user-supplied embedding constants C2, C3.
// ---------------------------------------------------------------------------

struct AnalyticSector {
  double k = 0.0;
  double gamma = 0.0;
  double theta = 0.0;
  bool gamma_positive = false;
};

inline AnalyticSector sector_params_analytic(double a0, double a1, double c2,
                                             double c3, double eps,
                                             double delta, const NuParams& nu,
                                             double mu, double inf_rho) {
  if (!(a0 > 0.0) || !(a1 > 0.0))
    throw validation_error("form bounds a0, a1 must be positive");
  if (!(eps > 0.0) || !(delta > 0.0))
    throw validation_error("eps and delta must be positive");
  if (c2 < 0.0 || c3 < 0.0)
    throw validation_error("embedding constants must be non-negative");
  AnalyticSector out;
  out.k = a0 / (eps * std::pow(delta, 2.0 - 2.0 * nu.nu) * c3 + a1);
  out.gamma =
      mu * inf_rho - out.k * (eps * std::pow(delta, -2.0 * nu.nu) * c2 +
                              1.0 / eps);
  out.theta = std::atan(1.0 / out.k);
  out.gamma_positive = out.gamma > 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Eigenvalues of operators self-adjoint in the mass inner product.  Dense
// solve below the crossover size, shift-inverted Lanczos with full
// reorthogonalization above it.  Every returned pair carries a residual
// certificate against the symmetrized matrix.
// ---------------------------------------------------------------------------

namespace detail {

inline void lanczos_smallest(const Eigen::MatrixXd& s, int m,
                             Eigen::VectorXd& vals, Eigen::MatrixXd& vecs) {
  const int n = static_cast<int>(s.rows());
  double lb = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    lb = std::min(lb, 2.0 * s(i, i) - s.row(i).cwiseAbs().sum());
  const double sigma = lb - 1.0;
  Eigen::MatrixXd shifted = s;
  shifted.diagonal().array() -= sigma;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success)
    throw numeric_error("shifted factorization failed");

  const double scale = s.norm();
  int steps = std::min(n, std::max(2 * m + 60, 120));
  for (int attempt = 0; attempt < 3; ++attempt) {
    Eigen::MatrixXd v(n, steps);
    Eigen::VectorXd diag(steps), off(steps);
    Rng rng(0x1a2cULL);
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w[i] = rng.normal();
    w.normalize();
    v.col(0) = w;
    int k = 0;
    for (; k < steps; ++k) {
      w = llt.solve(v.col(k));
      diag[k] = v.col(k).dot(w);
      w -= v.leftCols(k + 1) * (v.leftCols(k + 1).transpose() * w);
      w -= v.leftCols(k + 1) * (v.leftCols(k + 1).transpose() * w);
      off[k] = w.norm();
      if (k + 1 == steps || off[k] < 1e-14) {
        ++k;
        break;
      }
      v.col(k + 1) = w / off[k];
    }
    if (k < m) throw numeric_error("Krylov space exhausted before m pairs");

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      tri(i, i) = diag[i];
      if (i + 1 < k) {
        tri(i, i + 1) = off[i];
        tri(i + 1, i) = off[i];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> et(tri);
    // largest eigenvalues of the inverted operator are the smallest of s
    vals.resize(m);
    vecs.resize(n, m);
    for (int j = 0; j < m; ++j) {
      const int idx = k - 1 - j;
      vals[j] = sigma + 1.0 / et.eigenvalues()[idx];
      vecs.col(j) = v.leftCols(k) * et.eigenvectors().col(idx);
      vecs.col(j).normalize();
    }
    double worst = 0.0;
    for (int j = 0; j < m; ++j)
      worst = std::max(
          worst, (s * vecs.col(j) - vals[j] * vecs.col(j)).norm());
    if (worst <= 1e-9 * std::max(scale, 1e-300)) return;
    steps = std::min(n, steps * 2);
  }
  throw numeric_error("Lanczos iteration did not certify the requested pairs");
}

}  // namespace detail

inline Eigen::VectorXd eigen_solve(const Eigen::MatrixXd& A,
                                   const Eigen::VectorXd& mass, int m,
                                   double hermitian_tol = 1e-10) {
  const int n = static_cast<int>(A.rows());
  if (A.rows() != A.cols() || mass.size() != n)
    throw validation_error("operator and mass sizes must agree");
  if (m < 1 || m > n)
    throw validation_error("requested eigenvalue count is out of range");
  if (!(mass.minCoeff() > 0.0))
    throw validation_error("mass weights must be positive");

  const Eigen::VectorXd sq = mass.array().sqrt();
  Eigen::MatrixXd s(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) s(i, j) = A(i, j) * sq[i] / sq[j];
  const double scale = s.norm();
  const double asym = (s - s.transpose()).norm();
  if (asym > hermitian_tol * std::max(scale, 1e-300))
    throw validation_error(
        "operator is not self-adjoint in the weighted inner product");
  s = 0.5 * (s + s.transpose()).eval();

  Eigen::VectorXd vals;
  Eigen::MatrixXd vecs;
  if (n <= 1600) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.info() != Eigen::Success)
      throw numeric_error("dense eigensolver failed");
    vals = es.eigenvalues().head(m);
    vecs = es.eigenvectors().leftCols(m);
  } else {
    detail::lanczos_smallest(s, m, vals, vecs);
  }
  for (int j = 0; j < m; ++j) {
    const double res = (s * vecs.col(j) - vals[j] * vecs.col(j)).norm();
    if (!(res <= 1e-8 * std::max(scale, 1e-300)))
      throw numeric_error("eigenpair residual exceeds the certificate");
  }
  return vals;
}

// ---------------------------------------------------------------------------
// Constant-coefficient comparators L_k = a_k (-Laplacian) + rho_k and the
// two-sided eigenvalue sandwich.  The lower pair comes from the proved
// constants, the upper from maximizing the form pencil with a 10 percent
// safety factor.
// ---------------------------------------------------------------------------

struct ComparisonOperators {
  double a0 = 0.0, rho0 = 0.0;
  double a1 = 0.0, rho1 = 0.0;
  long validated_trials = 0;
};

inline Eigen::MatrixXd comparator_matrix(const InteriorSpace& space, double a,
                                         double rho_const) {
  Eigen::MatrixXd b(laplacian_form(space));
  b *= a;
  b.array().colwise() /= space.mass.array();
  b.diagonal().array() += rho_const;
  return b;
}

inline ComparisonOperators comparison_operators(
    const OperatorSet& set, double mu, int validation_trials = 50,
    std::uint64_t seed = 0x3d5eedULL, double inflation = 0.1) {
  if (!(inflation >= 0.0))
    throw validation_error("comparator inflation must be nonnegative");
  ComparisonOperators out;
  out.a0 = set.check.a0;
  out.rho0 = mu * set.check.min_rho;
  out.a1 = set.check.a1_bound;

  const Eigen::MatrixXd ssym = symmetric_form(set);
  const Eigen::MatrixXd ku(laplacian_form(set.space));
  const int n = set.space.dof_count();

  // rho1: largest eigenvalue of the pencil (ssym - a1 ku, mass)
  Eigen::MatrixXd b = ssym - out.a1 * ku;
  const Eigen::VectorXd isq = set.space.mass.array().sqrt().inverse();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) b(i, j) *= isq[i] * isq[j];
  b = 0.5 * (b + b.transpose()).eval();
  double top;
  if (n <= 1600) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
    if (es.info() != Eigen::Success)
      throw numeric_error("pencil eigensolver failed");
    top = es.eigenvalues().maxCoeff();
  } else {
    Eigen::MatrixXd neg = -b;
    Eigen::VectorXd vals;
    Eigen::MatrixXd vecs;
    detail::lanczos_smallest(neg, 1, vals, vecs);
    top = -vals[0];
  }
  out.rho1 = top > 0.0 ? (1.0 + inflation) * top : 0.0;

  // ordering validation on random boundary-vanishing fields
  const Rng base(seed);
  for (int t = 0; t < validation_trials; ++t) {
    Rng stream = base.child(static_cast<std::uint64_t>(t));
    const Eigen::VectorXcd fc = detail::trial_field(set.space, t, stream);
    Eigen::VectorXd f = fc.real();
    if (!(f.norm() > 0.0)) f = fc.imag();
    const double grad = f.dot(ku * f);
    const double l2 = f.dot(set.space.mass.asDiagonal() * f);
    const double mid = f.dot(ssym * f);
    const double low = out.a0 * grad + out.rho0 * l2;
    const double high = out.a1 * grad + out.rho1 * l2;
    const double slack = 1e-9 * (std::abs(mid) + std::abs(high) + 1.0);
    if (low > mid + slack || mid > high + slack) {
      std::ostringstream msg;
      msg << "comparator ordering failed on trial " << t << ": lower form "
          << low << ", form " << mid << ", upper form " << high;
      throw numeric_error(msg.str());
    }
  }
  out.validated_trials = validation_trials;
  return out;
}

struct SandwichReport {
  Eigen::VectorXd lambda0, lambdaH, lambda1;
  std::vector<int> pass;
  bool all_pass = true;
  int first_fail = -1;
  double tolerance = 0.0;
  ComparisonOperators comparators;
};

inline SandwichReport sandwich_check(const Eigen::VectorXd& l0,
                                     const Eigen::VectorXd& lh,
                                     const Eigen::VectorXd& l1,
                                     double tolerance,
                                     const ComparisonOperators& comps = {}) {
  if (l0.size() != lh.size() || lh.size() != l1.size())
    throw validation_error("eigenvalue lists must have equal length");
  if (l0.size() == 0) throw validation_error("eigenvalue lists are empty");
  if (!(tolerance >= 0.0))
    throw validation_error("tolerance must be non-negative");
  auto ascending = [](const Eigen::VectorXd& v) {
    for (int i = 1; i < v.size(); ++i)
      if (v[i] < v[i - 1] - 1e-12 * std::max(1.0, std::abs(v[i - 1])))
        return false;
    return true;
  };
  if (!ascending(l0) || !ascending(lh) || !ascending(l1))
    throw validation_error("eigenvalue lists must be ascending");

  SandwichReport out;
  out.lambda0 = l0;
  out.lambdaH = lh;
  out.lambda1 = l1;
  out.tolerance = tolerance;
  out.comparators = comps;
  out.pass.resize(l0.size());
  for (int i = 0; i < l0.size(); ++i) {
    const double slack = tolerance * std::max(1.0, std::abs(lh[i]));
    const bool ok = l0[i] <= lh[i] + slack && lh[i] <= l1[i] + slack;
    out.pass[i] = ok ? 1 : 0;
    if (!ok && out.first_fail < 0) out.first_fail = i;
    out.all_pass = out.all_pass && ok;
  }
  return out;
}

// Closed-form spectrum of the discrete Dirichlet Laplacian on a uniform
// tensor grid, ascending.
inline std::vector<double> dirichlet_laplacian_spectrum(
    const InteriorSpace& space, int m) {
  auto uniform = [](const Eigen::VectorXd& x) {
    const double h = x[1] - x[0];
    for (int i = 1; i + 1 < x.size(); ++i)
      if (std::abs(x[i + 1] - x[i] - h) > 1e-12 * h) return false;
    return true;
  };
  if (!uniform(space.xs) || (space.dim() == 2 && !uniform(space.ys)))
    throw validation_error("closed-form spectrum needs a uniform grid");
  std::vector<double> all;
  if (space.dim() == 1) {
    const double h = space.hx();
    for (int k = 1; k < space.nx; ++k)
      all.push_back(2.0 / (h * h) * (1.0 - std::cos(k * pi / space.nx)));
  } else {
    const double hx = space.hx(), hy = space.hy();
    for (int k = 1; k < space.nx; ++k)
      for (int l = 1; l < space.ny; ++l)
        all.push_back(2.0 / (hx * hx) * (1.0 - std::cos(k * pi / space.nx)) +
                      2.0 / (hy * hy) * (1.0 - std::cos(l * pi / space.ny)));
  }
  std::sort(all.begin(), all.end());
  if (m < 1 || static_cast<std::size_t>(m) > all.size())
    throw validation_error("requested eigenvalue count is out of range");
  all.resize(m);
  return all;
}

// ---------------------------------------------------------------------------
// Informational resolvent samples: the matrix analog of
// ||(L + zeta)^{-1}|| <= 1 / Re zeta at chosen points with Re zeta > 0.
// ---------------------------------------------------------------------------

struct ResolventSample {
  complexd zeta;
  double bound = 0.0;
  double norm = 0.0;
  bool within = false;
};

inline std::vector<ResolventSample> resolvent_samples(
    const Eigen::MatrixXd& L, const Eigen::VectorXd& mass,
    const std::vector<complexd>& zetas) {
  const int n = static_cast<int>(L.rows());
  if (L.rows() != L.cols() || mass.size() != n)
    throw validation_error("operator and mass sizes must agree");
  const Eigen::VectorXd sq = mass.array().sqrt();
  Eigen::MatrixXcd ahat(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) ahat(i, j) = L(i, j) * sq[i] / sq[j];

  std::vector<ResolventSample> out;
  out.reserve(zetas.size());
  for (const complexd& zeta : zetas) {
    if (!(zeta.real() > 0.0))
      throw validation_error("resolvent samples need Re zeta > 0");
    Eigen::MatrixXcd z = ahat;
    z.diagonal().array() += zeta;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(z);
    const double smin = svd.singularValues().minCoeff();
    ResolventSample s;
    s.zeta = zeta;
    s.bound = 1.0 / zeta.real();
    s.norm = smin > 0.0 ? 1.0 / smin
                        : std::numeric_limits<double>::infinity();
    s.within = s.norm <= s.bound * (1.0 + 1e-10);
    out.push_back(s);
  }
  return out;
}

}  // namespace fracspec
