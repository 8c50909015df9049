#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "fracspec/fracops.hpp"
#include "fracspec/geometry.hpp"

namespace fracspec {

// ---------------------------------------------------------------------------
// Coefficients of the composite operator
//   L u = -D_j(a^{jk} D_k u) + rho * (fractional derivative of u)
// with Dirichlet boundary conditions.
// ---------------------------------------------------------------------------

struct EllipticCoefficients {
  std::function<double(Point)> a11 = [](Point) { return 1.0; };
  std::function<double(Point)> a12 = [](Point) { return 0.0; };
  std::function<double(Point)> a22 = [](Point) { return 1.0; };
  std::function<double(Point)> rho = [](Point) { return 0.0; };
  double a0 = 1.0;                 // uniform ellipticity lower bound
  double lambda = 1.0;             // Hoelder exponent of rho
  std::optional<double> holder_M;  // analytic Hoelder constant, if known
};

// Interior Dirichlet degrees of freedom on a structured grid: the nodes
// 1..N-1 of a line for the interval, the full tensor interior for the box.
struct InteriorSpace {
  ConvexDomain domain;
  int nx = 0, ny = 0;         // cells per side (ny = 0 for the interval)
  Eigen::VectorXd xs, ys;     // node coordinate lines including boundary
  std::vector<Point> nodes;   // interior nodes in dof order
  Eigen::VectorXd mass;       // lumped node masses

  int dof_count() const { return static_cast<int>(nodes.size()); }
  int dim() const { return domain.dim; }
  double hx() const { return xs[1] - xs[0]; }
  double hy() const { return ys.size() > 1 ? ys[1] - ys[0] : 0.0; }
  // interior (i, j) in full-node numbering -> dof index
  int index(int i, int j) const { return (j - 1) * (nx - 1) + (i - 1); }
};

inline InteriorSpace make_interior_interval(const RadialGrid& grid) {
  InteriorSpace s;
  s.domain = make_interval(grid.length());
  s.nx = grid.cells();
  if (s.nx < 2)
    throw validation_error("interval space needs at least 2 cells");
  s.xs = grid.nodes;
  s.ys.resize(1);
  s.ys[0] = 0.0;
  s.nodes.reserve(s.nx - 1);
  s.mass.resize(s.nx - 1);
  for (int i = 1; i < s.nx; ++i) {
    s.nodes.push_back({grid.nodes[i], 0.0});
    s.mass[i - 1] = 0.5 * (grid.nodes[i + 1] - grid.nodes[i - 1]);
  }
  return s;
}

inline InteriorSpace make_interior_interval(double length, int cells) {
  return make_interior_interval(
      RadialGrid::make(cells, length, Grading::uniform));
}

inline InteriorSpace make_interior_box(double width, double height, int cx,
                                       int cy) {
  if (cx < 2 || cy < 2)
    throw validation_error("box space needs at least 2 cells per side");
  InteriorSpace s;
  s.domain = make_box(width, height);
  s.nx = cx;
  s.ny = cy;
  s.xs.resize(cx + 1);
  s.ys.resize(cy + 1);
  for (int i = 0; i <= cx; ++i) s.xs[i] = width * i / cx;
  for (int j = 0; j <= cy; ++j) s.ys[j] = height * j / cy;
  const double cell = s.hx() * s.hy();
  s.nodes.reserve((cx - 1) * (cy - 1));
  for (int j = 1; j < cy; ++j)
    for (int i = 1; i < cx; ++i) s.nodes.push_back({s.xs[i], s.ys[j]});
  s.mass = Eigen::VectorXd::Constant((cx - 1) * (cy - 1), cell);
  return s;
}

// ---------------------------------------------------------------------------
// Coefficient validation
// ---------------------------------------------------------------------------

struct CoefficientCheck {
  double a0 = 0.0;               // declared ellipticity bound
  double min_ellipticity = 0.0;  // smallest sampled eigenvalue of a^{jk}
  double a1_bound = 0.0;         // largest sampled Frobenius norm
  double min_rho = 0.0;
  double max_rho = 0.0;
  bool rho_zero = false;         // degenerate run without fractional term
};

inline CoefficientCheck validate_coefficients(const InteriorSpace& space,
                                              const EllipticCoefficients& co) {
  if (!(co.a0 > 0.0))
    throw validation_error("ellipticity bound a0 must be positive");
  CoefficientCheck out;
  out.a0 = co.a0;
  out.min_ellipticity = std::numeric_limits<double>::infinity();
  out.min_rho = std::numeric_limits<double>::infinity();
  out.max_rho = -std::numeric_limits<double>::infinity();
  for (const Point& p : space.nodes) {
    double lo, fro;
    if (space.dim() == 1) {
      lo = co.a11(p);
      fro = std::abs(co.a11(p));
    } else {
      const double a = co.a11(p), b = co.a12(p), c = co.a22(p);
      const double tr = a + c;
      const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
      lo = 0.5 * tr - disc;
      fro = std::sqrt(a * a + 2.0 * b * b + c * c);
    }
    if (lo < co.a0 - 1e-12 * std::abs(co.a0)) {
      std::ostringstream msg;
      msg << "coefficient matrix is not uniformly elliptic at (" << p.x << ", "
          << p.y << "): smallest eigenvalue " << lo << " is below a0 = "
          << co.a0;
      throw validation_error(msg.str());
    }
    const double r = co.rho(p);
    if (r < 0.0) {
      std::ostringstream msg;
      msg << "weight rho is negative at (" << p.x << ", " << p.y << ")";
      throw validation_error(msg.str());
    }
    out.min_ellipticity = std::min(out.min_ellipticity, lo);
    out.a1_bound = std::max(out.a1_bound, fro);
    out.min_rho = std::min(out.min_rho, r);
    out.max_rho = std::max(out.max_rho, r);
  }
  out.rho_zero = out.max_rho == 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Elliptic stiffness in integrated (form) variables:
//   v^T K u  ~  integral a^{jk} D_k u D_j v.
// Face-averaged differences for the diagonal part, centered differences for
// the mixed part, zero extension across the Dirichlet boundary.
// ---------------------------------------------------------------------------

inline Eigen::SparseMatrix<double> stiffness_form(
    const InteriorSpace& space, const EllipticCoefficients& co) {
  using T = Eigen::Triplet<double>;
  std::vector<T> trip;
  const int n = space.dof_count();

  if (space.dim() == 1) {
    const auto& x = space.xs;
    const int N = space.nx;
    auto dof = [&](int i) { return i - 1; };
    for (int c = 0; c < N; ++c) {
      const double h = x[c + 1] - x[c];
      const double af = co.a11({0.5 * (x[c] + x[c + 1]), 0.0});
      const double w = af / h;
      const bool li = c >= 1, ri = c + 1 <= N - 1;
      if (li) trip.emplace_back(dof(c), dof(c), w);
      if (ri) trip.emplace_back(dof(c + 1), dof(c + 1), w);
      if (li && ri) {
        trip.emplace_back(dof(c), dof(c + 1), -w);
        trip.emplace_back(dof(c + 1), dof(c), -w);
      }
    }
    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
  }

  const int cx = space.nx, cy = space.ny;
  const double hx = space.hx(), hy = space.hy();
  auto interior = [&](int i, int j) { return i >= 1 && i <= cx - 1 && j >= 1 && j <= cy - 1; };
  auto dof = [&](int i, int j) { return space.index(i, j); };

  // x-oriented faces
  for (int j = 1; j < cy; ++j) {
    for (int c = 0; c < cx; ++c) {
      const double w =
          co.a11({0.5 * (space.xs[c] + space.xs[c + 1]), space.ys[j]}) * hy / hx;
      const bool li = interior(c, j), ri = interior(c + 1, j);
      if (li) trip.emplace_back(dof(c, j), dof(c, j), w);
      if (ri) trip.emplace_back(dof(c + 1, j), dof(c + 1, j), w);
      if (li && ri) {
        trip.emplace_back(dof(c, j), dof(c + 1, j), -w);
        trip.emplace_back(dof(c + 1, j), dof(c, j), -w);
      }
    }
  }
  // y-oriented faces
  for (int i = 1; i < cx; ++i) {
    for (int c = 0; c < cy; ++c) {
      const double w =
          co.a22({space.xs[i], 0.5 * (space.ys[c] + space.ys[c + 1])}) * hx / hy;
      const bool li = interior(i, c), ri = interior(i, c + 1);
      if (li) trip.emplace_back(dof(i, c), dof(i, c), w);
      if (ri) trip.emplace_back(dof(i, c + 1), dof(i, c + 1), w);
      if (li && ri) {
        trip.emplace_back(dof(i, c), dof(i, c + 1), -w);
        trip.emplace_back(dof(i, c + 1), dof(i, c), -w);
      }
    }
  }
  // mixed part: sum_nodes a12 (Dx u Dy v + Dy u Dx v) hx hy with centered
  // differences; assembled as pair contributions to keep exact symmetry
  for (int j = 1; j < cy; ++j) {
    for (int i = 1; i < cx; ++i) {
      const double b = co.a12({space.xs[i], space.ys[j]});
      if (b == 0.0) continue;
      // b hx hy (Dx u)(Dy v) with centered differences carries 1/(4 hx hy)
      const double scale = b / 4.0;
      const int xs_[2] = {i + 1, i - 1};
      const int ys_[2] = {j + 1, j - 1};
      const double sx[2] = {1.0, -1.0};
      const double sy[2] = {1.0, -1.0};
      for (int p = 0; p < 2; ++p) {
        for (int q = 0; q < 2; ++q) {
          // zero extension: stencil arms that leave the interior drop out
          if (!interior(xs_[p], j) || !interior(i, ys_[q])) continue;
          const double w = scale * sx[p] * sy[q];
          trip.emplace_back(dof(i, ys_[q]), dof(xs_[p], j), w);
          trip.emplace_back(dof(xs_[p], j), dof(i, ys_[q]), w);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

inline Eigen::SparseMatrix<double> laplacian_form(const InteriorSpace& space) {
  EllipticCoefficients unit;
  return stiffness_form(space, unit);
}

// ---------------------------------------------------------------------------
// Fractional operator matrices on the interior space.
//
// Interval: the operator rows act on the full node line and Dirichlet
// boundary columns are dropped (zero extension).
//
// Box: each interior node Q gets its own ray from the base point through Q
// out to the boundary, with a uniform radial grid on either side of Q at
// roughly the tensor spacing.  Off-grid radial samples are read through
// bilinear interpolation with zero extension, so every radial node
// scatters onto at most four tensor columns; the node at Q itself lands
// exactly.
// ---------------------------------------------------------------------------

enum class OperatorKind {
  integral_left,
  integral_right,
  derivative_left,
  derivative_right,
  kipriyanov,
};

struct RayStats {
  long samples = 0;
  double mean_offset = 0.0;  // distance to nearest tensor node, in units of h
  double max_offset = 0.0;
};

namespace detail {

inline bool is_integral(OperatorKind k) {
  return k == OperatorKind::integral_left || k == OperatorKind::integral_right;
}

inline Side kind_side(OperatorKind k) {
  return (k == OperatorKind::integral_right ||
          k == OperatorKind::derivative_right)
             ? Side::right
             : Side::left;
}

inline RowFunctional build_row(const Eigen::VectorXd& t, int i, double alpha,
                               int n, OperatorKind kind) {
  switch (kind) {
    case OperatorKind::integral_left:
      return integral_row(t, i, alpha, n, Side::left);
    case OperatorKind::integral_right:
      return integral_row(t, i, alpha, n, Side::right);
    case OperatorKind::derivative_left:
      return derivative_row(t, i, alpha, n, DerivKind::left_limit);
    case OperatorKind::derivative_right:
      return derivative_row(t, i, alpha, n, DerivKind::right_limit);
    case OperatorKind::kipriyanov:
      return derivative_row(t, i, alpha, n, DerivKind::kipriyanov);
  }
  throw validation_error("unknown operator kind");
}

// bilinear stencil of p on interior dofs; boundary and exterior weights
// drop (zero extension)
inline void scatter_bilinear(
    const InteriorSpace& s, const Point& p, double w,
    Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
  const double hx = s.hx(), hy = s.hy();
  int ci = static_cast<int>(std::floor(p.x / hx));
  int cj = static_cast<int>(std::floor(p.y / hy));
  ci = std::clamp(ci, 0, s.nx - 1);
  cj = std::clamp(cj, 0, s.ny - 1);
  const double u = std::clamp((p.x - s.xs[ci]) / hx, 0.0, 1.0);
  const double v = std::clamp((p.y - s.ys[cj]) / hy, 0.0, 1.0);
  const int is[2] = {ci, ci + 1};
  const int js[2] = {cj, cj + 1};
  const double wu[2] = {1.0 - u, u};
  const double wv[2] = {1.0 - v, v};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      if (is[a] < 1 || is[a] > s.nx - 1 || js[b] < 1 || js[b] > s.ny - 1)
        continue;
      const double ww = w * wu[a] * wv[b];
      if (ww != 0.0) row[s.index(is[a], js[b])] += ww;
    }
}

struct NodeRay {
  Eigen::VectorXd t;  // radial nodes over [0, chord], t[iq] = |Q - base|
  int iq = 0;
  double ex = 0.0, ey = 0.0;
};

inline NodeRay node_ray(const InteriorSpace& s, const Point& base,
                        const Point& q) {
  NodeRay out;
  const double rx = q.x - base.x, ry = q.y - base.y;
  const double rq = std::hypot(rx, ry);
  if (!(rq > 0.0))
    throw validation_error("ray base coincides with a grid node");
  out.ex = rx / rq;
  out.ey = ry / rq;
  const double chord =
      std::max(chord_length(s.domain, base, out.ex, out.ey),
               rq * (1.0 + 1e-12));
  const double ht = std::min(s.hx(), s.hy());
  const int m1 = std::max<int>(1, static_cast<int>(std::llround(rq / ht)));
  const int m2 =
      std::max<int>(1, static_cast<int>(std::llround((chord - rq) / ht)));
  out.t.resize(m1 + m2 + 1);
  for (int j = 0; j <= m1; ++j) out.t[j] = rq * j / m1;
  for (int j = 1; j <= m2; ++j) out.t[m1 + j] = rq + (chord - rq) * j / m2;
  out.iq = m1;
  return out;
}

}  // namespace detail

inline Eigen::MatrixXd fractional_matrix(const InteriorSpace& space,
                                         double alpha, OperatorKind kind,
                                         Point base = {0.0, 0.0},
                                         RayStats* stats = nullptr) {
  FractionalOrder check(alpha);
  const int n = space.dof_count();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);

  if (space.dim() == 1) {
    if (base.x != 0.0 || base.y != 0.0)
      throw validation_error(
          "interval operators are anchored at the left endpoint");
    const auto& t = space.xs;
    for (int i = 1; i < space.nx; ++i) {
      const auto row = detail::build_row(t, i, alpha, 1, kind);
      auto out = A.row(i - 1);
      out[i - 1] += row.self;
      for (std::size_t m = 0; m < row.nodes.size(); ++m) {
        const int col = row.nodes[m];
        if (col >= 1 && col <= space.nx - 1)
          out[col - 1] += row.weights[m];
      }
    }
    return A;
  }

  const double tol = 1e-9 * space.domain.diameter();
  if (!detail::on_boundary(space.domain, base, tol))
    throw validation_error("ray base must lie on the domain boundary");
  const double hmin = std::min(space.hx(), space.hy());
  double off_sum = 0.0, off_max = 0.0;
  long samples = 0;
  for (int d = 0; d < n; ++d) {
    const Point q = space.nodes[d];
    const auto ray = detail::node_ray(space, base, q);
    const auto row = detail::build_row(ray.t, ray.iq, alpha, 2, kind);
    auto out = A.row(d);
    out[d] += row.self;
    for (std::size_t m = 0; m < row.nodes.size(); ++m) {
      const double t = ray.t[row.nodes[m]];
      const Point p{base.x + t * ray.ex, base.y + t * ray.ey};
      if (row.nodes[m] == ray.iq) {
        out[d] += row.weights[m];
      } else {
        detail::scatter_bilinear(space, p, row.weights[m], out);
      }
      if (stats) {
        const double ox = std::remainder(p.x, space.hx());
        const double oy = std::remainder(p.y, space.hy());
        const double off = std::hypot(ox, oy) / hmin;
        off_sum += off;
        off_max = std::max(off_max, off);
        ++samples;
      }
    }
  }
  if (stats) {
    stats->samples = samples;
    stats->mean_offset = samples ? off_sum / samples : 0.0;
    stats->max_offset = off_max;
  }
  return A;
}

// ---------------------------------------------------------------------------
// Composite operator
// ---------------------------------------------------------------------------

struct OperatorSet {
  InteriorSpace space;
  CoefficientCheck check;
  double alpha = 0.5;
  Point base;
  Eigen::VectorXd rho;             // nodal weight samples
  Eigen::SparseMatrix<double> K;   // elliptic form matrix
  Eigen::MatrixXd L;               // strong composite operator
  Eigen::MatrixXd H;               // symmetric part w.r.t. the mass product
  Eigen::MatrixXd D_kip, D_right;  // kept when detail is set
  RayStats ray_stats;
  bool detail = false;
};

inline OperatorSet assemble_operators(const InteriorSpace& space,
                                      const EllipticCoefficients& co,
                                      double alpha, Point base = {0.0, 0.0},
                                      std::optional<bool> keep_detail = {}) {
  OperatorSet set;
  set.space = space;
  set.check = validate_coefficients(space, co);
  set.alpha = alpha;
  set.base = base;
  const int n = space.dof_count();
  set.detail = keep_detail.value_or(n <= 1500);

  set.rho.resize(n);
  for (int i = 0; i < n; ++i) set.rho[i] = co.rho(space.nodes[i]);

  set.K = stiffness_form(space, co);

  Eigen::MatrixXd dk = fractional_matrix(space, alpha, OperatorKind::kipriyanov,
                                         base, &set.ray_stats);
  set.L = Eigen::MatrixXd(set.K);
  set.L.array().colwise() /= space.mass.array();
  set.L.noalias() += set.rho.asDiagonal() * dk;

  set.H.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      set.H(i, j) = 0.5 * (set.L(i, j) +
                           set.L(j, i) * (space.mass[j] / space.mass[i]));

  if (set.detail) {
    set.D_kip = std::move(dk);
    set.D_right =
        fractional_matrix(space, alpha, OperatorKind::derivative_right, base);
  }
  return set;
}

// Formal adjoint built from the integration-by-parts partner: transposed
// elliptic part plus the right derivative of (rho u).  Requires detail.
inline Eigen::MatrixXd adjoint_operator(const OperatorSet& set) {
  if (!set.detail)
    throw validation_error("adjoint requires an operator set with detail");
  Eigen::MatrixXd lp = Eigen::MatrixXd(set.K);
  lp.array().colwise() /= set.space.mass.array();
  lp.noalias() += set.D_right * set.rho.asDiagonal();
  return lp;
}

// Integrated (form) version of the composite operator: v^T T u = (L u, v)_M.
inline Eigen::MatrixXd form_matrix(const OperatorSet& set) {
  return set.space.mass.asDiagonal() * set.L;
}

inline Eigen::MatrixXd symmetric_form(const OperatorSet& set) {
  const Eigen::MatrixXd t = form_matrix(set);
  return 0.5 * (t + t.transpose());
}

// ---------------------------------------------------------------------------
// Pairing check: the integrated stiffness against an independent gradient
// quadrature with centered differences (zero extension outside).
// ---------------------------------------------------------------------------

struct GreenResidual {
  double pairing = 0.0;
  double quadrature = 0.0;
  double residual = 0.0;
};

inline GreenResidual green_residual(const InteriorSpace& space,
                                    const EllipticCoefficients& co,
                                    const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& v) {
  if (u.size() != space.dof_count() || v.size() != space.dof_count())
    throw validation_error("green residual inputs must match the space");
  const auto K = stiffness_form(space, co);
  GreenResidual out;
  out.pairing = v.dot(K * u);

  double quad = 0.0;
  if (space.dim() == 1) {
    auto at = [&](const Eigen::VectorXd& w, int i) {
      return (i >= 1 && i <= space.nx - 1) ? w[i - 1] : 0.0;
    };
    for (int i = 1; i < space.nx; ++i) {
      const double hl = space.xs[i] - space.xs[i - 1];
      const double hr = space.xs[i + 1] - space.xs[i];
      const double du = (at(u, i + 1) - at(u, i - 1)) / (hl + hr);
      const double dv = (at(v, i + 1) - at(v, i - 1)) / (hl + hr);
      quad += space.mass[i - 1] * co.a11(space.nodes[i - 1]) * du * dv;
    }
  } else {
    auto at = [&](const Eigen::VectorXd& w, int i, int j) {
      return (i >= 1 && i <= space.nx - 1 && j >= 1 && j <= space.ny - 1)
                 ? w[space.index(i, j)]
                 : 0.0;
    };
    const double hx = space.hx(), hy = space.hy();
    for (int j = 1; j < space.ny; ++j) {
      for (int i = 1; i < space.nx; ++i) {
        const Point p = space.nodes[space.index(i, j)];
        const double ux = (at(u, i + 1, j) - at(u, i - 1, j)) / (2.0 * hx);
        const double uy = (at(u, i, j + 1) - at(u, i, j - 1)) / (2.0 * hy);
        const double vx = (at(v, i + 1, j) - at(v, i - 1, j)) / (2.0 * hx);
        const double vy = (at(v, i, j + 1) - at(v, i, j - 1)) / (2.0 * hy);
        quad += space.mass[space.index(i, j)] *
                (co.a11(p) * ux * vx + co.a12(p) * (ux * vy + uy * vx) +
                 co.a22(p) * uy * vy);
      }
    }
  }
  out.quadrature = quad;
  out.residual = std::abs(out.pairing - out.quadrature);
  return out;
}

}  // namespace fracspec
