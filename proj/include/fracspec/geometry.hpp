#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "fracspec/common.hpp"
#include "fracspec/grid.hpp"

namespace fracspec {

// ---------------------------------------------------------------------------
// Convex domains.  Supported shapes: an interval (0, d) in dimension 1 and
// the disk / axis-aligned box in dimension 2.  Every integral over the
// domain is decomposed into rays from a fixed boundary point P,
//
//   integral over domain  =  integral over directions  of
//                            integral_0^{d(e)} (...) r^{n-1} dr,
//
// where d(e) is the chord length cut out by the domain along direction e.
// ---------------------------------------------------------------------------

enum class DomainKind { interval, disk, box };

struct ConvexDomain {
  DomainKind kind = DomainKind::interval;
  int dim = 1;
  // interval
  double length = 1.0;
  // disk, centered at the origin
  double radius = 0.0;
  // box [0, width] x [0, height]
  double width = 0.0;
  double height = 0.0;

  double diameter() const {
    switch (kind) {
      case DomainKind::interval: return length;
      case DomainKind::disk: return 2.0 * radius;
      case DomainKind::box: return std::hypot(width, height);
    }
    return 0.0;
  }

  bool contains(const Point& q, double tol = 0.0) const {
    switch (kind) {
      case DomainKind::interval:
        return q.x >= -tol && q.x <= length + tol;
      case DomainKind::disk:
        return std::hypot(q.x, q.y) <= radius + tol;
      case DomainKind::box:
        return q.x >= -tol && q.x <= width + tol && q.y >= -tol &&
               q.y <= height + tol;
    }
    return false;
  }
};

inline ConvexDomain make_interval(double length) {
  if (!(length > 0.0)) throw validation_error("interval length must be positive");
  ConvexDomain d;
  d.kind = DomainKind::interval;
  d.dim = 1;
  d.length = length;
  return d;
}

inline ConvexDomain make_disk(double radius) {
  if (!(radius > 0.0)) throw validation_error("disk radius must be positive");
  ConvexDomain d;
  d.kind = DomainKind::disk;
  d.dim = 2;
  d.radius = radius;
  return d;
}

inline ConvexDomain make_box(double width, double height) {
  if (!(width > 0.0) || !(height > 0.0))
    throw validation_error("box sides must be positive");
  ConvexDomain d;
  d.kind = DomainKind::box;
  d.dim = 2;
  d.width = width;
  d.height = height;
  return d;
}

// Chord length cut by the domain along the ray q + t e, t >= 0.
// q must lie in the closed domain.
inline double chord_length(const ConvexDomain& dom, const Point& q, double ex,
                           double ey) {
  switch (dom.kind) {
    case DomainKind::interval: {
      if (ex > 0.0) return dom.length - q.x;
      if (ex < 0.0) return q.x;
      return 0.0;
    }
    case DomainKind::disk: {
      // |q + t e|^2 = R^2, |e| = 1
      const double b = q.x * ex + q.y * ey;
      const double c = q.x * q.x + q.y * q.y - dom.radius * dom.radius;
      const double disc = b * b - c;
      if (disc <= 0.0) return 0.0;
      const double t = -b + std::sqrt(disc);
      return std::max(t, 0.0);
    }
    case DomainKind::box: {
      double t = std::numeric_limits<double>::infinity();
      if (ex > 0.0) t = std::min(t, (dom.width - q.x) / ex);
      if (ex < 0.0) t = std::min(t, -q.x / ex);
      if (ey > 0.0) t = std::min(t, (dom.height - q.y) / ey);
      if (ey < 0.0) t = std::min(t, -q.y / ey);
      if (!std::isfinite(t)) return 0.0;
      return std::max(t, 0.0);
    }
  }
  return 0.0;
}

struct Ray {
  Point base;
  double ex = 1.0;
  double ey = 0.0;
  double length = 0.0;  // chord d(e)

  Point at(double r) const { return {base.x + r * ex, base.y + r * ey}; }
};

// Fan of rays from a boundary point P with midpoint angular weights.
// The weights reproduce the analytic angular measure exactly and the
// midpoint placement never hits tangential directions; rays with a
// vanishing chord are skipped and counted.
struct RayFan {
  ConvexDomain domain;
  Point base;
  std::vector<Ray> rays;
  Eigen::VectorXd weights;
  int skipped_tangential = 0;

  double angular_measure() const { return weights.sum(); }
};

namespace detail {

inline bool on_boundary(const ConvexDomain& dom, const Point& p, double tol) {
  switch (dom.kind) {
    case DomainKind::interval:
      return std::abs(p.x) <= tol || std::abs(p.x - dom.length) <= tol;
    case DomainKind::disk:
      return std::abs(std::hypot(p.x, p.y) - dom.radius) <= tol;
    case DomainKind::box: {
      const bool inside = p.x >= -tol && p.x <= dom.width + tol &&
                          p.y >= -tol && p.y <= dom.height + tol;
      const bool edge = std::abs(p.x) <= tol || std::abs(p.x - dom.width) <= tol ||
                        std::abs(p.y) <= tol || std::abs(p.y - dom.height) <= tol;
      return inside && edge;
    }
  }
  return false;
}

// Admissible angular interval [lo, lo + span] of inward directions from a
// boundary point of a 2d domain.  Half plane from a smooth boundary point
// or an edge interior, quarter plane from a box corner.
inline std::pair<double, double> direction_range(const ConvexDomain& dom,
                                                 const Point& p, double tol) {
  if (dom.kind == DomainKind::disk) {
    const double nx = -p.x, ny = -p.y;  // inward normal direction (to center)
    const double theta = std::atan2(ny, nx);
    return {theta - 0.5 * pi, pi};
  }
  // box
  const bool left = std::abs(p.x) <= tol;
  const bool right = std::abs(p.x - dom.width) <= tol;
  const bool bottom = std::abs(p.y) <= tol;
  const bool top = std::abs(p.y - dom.height) <= tol;
  const int sides = int(left) + int(right) + int(bottom) + int(top);
  if (sides == 2) {  // corner
    if (left && bottom) return {0.0, 0.5 * pi};
    if (right && bottom) return {0.5 * pi, 0.5 * pi};
    if (right && top) return {pi, 0.5 * pi};
    return {-0.5 * pi, 0.5 * pi};  // left && top
  }
  if (left) return {-0.5 * pi, pi};
  if (right) return {0.5 * pi, pi};
  if (bottom) return {0.0, pi};
  return {pi, pi};  // top
}

}  // namespace detail

inline RayFan build_ray_fan(const ConvexDomain& dom, const Point& base,
                            int directions) {
  const double tol = 1e-12 * std::max(dom.diameter(), 1.0);
  if (!detail::on_boundary(dom, base, tol))
    throw validation_error("ray fan base point must lie on the boundary");
  RayFan fan;
  fan.domain = dom;
  fan.base = base;

  if (dom.kind == DomainKind::interval) {
    Ray ray;
    ray.base = base;
    ray.ex = (base.x <= tol) ? 1.0 : -1.0;
    ray.ey = 0.0;
    ray.length = dom.length;
    fan.rays.push_back(ray);
    fan.weights = Eigen::VectorXd::Ones(1);
    return fan;
  }

  if (directions < 1)
    throw validation_error("ray fan needs at least one direction");
  const auto [lo, span] = detail::direction_range(dom, base, tol);
  const double dphi = span / directions;
  std::vector<double> w;
  for (int i = 0; i < directions; ++i) {
    const double phi = lo + (i + 0.5) * dphi;
    Ray ray;
    ray.base = base;
    ray.ex = std::cos(phi);
    ray.ey = std::sin(phi);
    ray.length = chord_length(dom, base, ray.ex, ray.ey);
    if (ray.length <= tol) {
      ++fan.skipped_tangential;
      continue;
    }
    fan.rays.push_back(ray);
    w.push_back(dphi);
  }
  fan.weights = Eigen::Map<Eigen::VectorXd>(w.data(), w.size());
  if (fan.rays.empty())
    throw validation_error("ray fan is empty: all directions tangential");
  return fan;
}

// ---------------------------------------------------------------------------
// FanGrid: the fan plus one radial grid per ray and the diagonal mass of
// the weighted inner product
//
//   (f, g) = sum over rays and nodes of  w_ang * w_rad * r^{n-1} * f conj(g).
//
// For n = 2 the base node carries zero mass (the factor r^{n-1} vanishes),
// so values there do not influence inner products; a grid function is zero
// in the L2 sense when it vanishes on all positive-mass nodes.
// ---------------------------------------------------------------------------

struct FanGrid {
  RayFan fan;
  std::vector<RadialGrid> radial;  // one per ray
  int nodes_per_ray = 0;           // N + 1
  Eigen::VectorXd mass;

  int ray_count() const { return static_cast<int>(fan.rays.size()); }
  int size() const { return ray_count() * nodes_per_ray; }
  int dof(int ray, int node) const { return ray * nodes_per_ray + node; }
  int dim() const { return fan.domain.dim; }

  Point position(int ray, int node) const {
    return fan.rays[ray].at(radial[ray].nodes[node]);
  }

  double min_spacing() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& g : radial) m = std::min(m, g.min_spacing());
    return m;
  }
  double max_spacing() const {
    double m = 0.0;
    for (const auto& g : radial) m = std::max(m, g.max_spacing());
    return m;
  }
};

inline std::shared_ptr<const FanGrid> make_fan_grid(
    RayFan fan, int cells, Grading grading = Grading::uniform,
    double power = 2.0) {
  auto grid = std::make_shared<FanGrid>();
  grid->fan = std::move(fan);
  grid->nodes_per_ray = cells + 1;
  const int K = grid->ray_count();
  const int n = grid->fan.domain.dim;
  grid->radial.reserve(K);
  grid->mass.resize(K * (cells + 1));
  for (int k = 0; k < K; ++k) {
    grid->radial.push_back(
        RadialGrid::make(cells, grid->fan.rays[k].length, grading, power));
    const Eigen::VectorXd tw = grid->radial[k].trapezoid_weights();
    const double wang = grid->fan.weights[k];
    for (int j = 0; j <= cells; ++j) {
      const double r = grid->radial[k].nodes[j];
      const double geo = (n == 1) ? 1.0 : std::pow(r, n - 1);
      grid->mass[grid->dof(k, j)] = wang * tw[j] * geo;
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Grid functions
// ---------------------------------------------------------------------------

struct GridFunction {
  std::shared_ptr<const FanGrid> grid;
  Eigen::VectorXcd v;

  static GridFunction zero(std::shared_ptr<const FanGrid> g) {
    GridFunction f;
    f.v = Eigen::VectorXcd::Zero(g->size());
    f.grid = std::move(g);
    return f;
  }

  template <typename F>
  static GridFunction sample(std::shared_ptr<const FanGrid> g, F&& fn) {
    GridFunction f = zero(std::move(g));
    for (int k = 0; k < f.grid->ray_count(); ++k)
      for (int j = 0; j < f.grid->nodes_per_ray; ++j)
        f.v[f.grid->dof(k, j)] = complexd(fn(f.grid->position(k, j)));
    return f;
  }

  complexd& at(int ray, int node) { return v[grid->dof(ray, node)]; }
  complexd at(int ray, int node) const { return v[grid->dof(ray, node)]; }
};

inline void require_same_grid(const GridFunction& f, const GridFunction& g) {
  if (f.grid.get() != g.grid.get())
    throw validation_error("grid functions live on different fan grids");
}

// Weighted inner product, linear in the first argument.
inline complexd weighted_inner_product(const GridFunction& f,
                                       const GridFunction& g) {
  require_same_grid(f, g);
  complexd acc = 0.0;
  for (int i = 0; i < f.v.size(); ++i)
    acc += f.grid->mass[i] * f.v[i] * std::conj(g.v[i]);
  return acc;
}

inline double weighted_norm(const GridFunction& f) {
  return std::sqrt(std::max(0.0, weighted_inner_product(f, f).real()));
}

// ---------------------------------------------------------------------------
// Hoelder estimate for a weight function sampled on the fan.
//
// Returns an empirical lower bound for the smallest M with
// |rho(Q) - rho(P)| <= M |Q - P|^lambda over sampled pairs (all pairs on
// each ray), the infimum of rho over nodes, and whether rho is
// non-increasing along every ray.
// ---------------------------------------------------------------------------

struct HolderEstimate {
  double M = 0.0;
  double inf_rho = 0.0;
  bool monotone = false;
};

inline HolderEstimate holder_estimate(const GridFunction& rho, double lambda,
                                      double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw validation_error("fractional order must lie in (0, 1)");
  if (!(lambda > alpha) || lambda > 1.0)
    throw validation_error(
        "Hoelder exponent lambda must lie in (alpha, 1]");
  const FanGrid& grid = *rho.grid;
  HolderEstimate est;
  est.inf_rho = std::numeric_limits<double>::infinity();
  est.monotone = true;
  const double mono_tol = 1e-12;
  for (int k = 0; k < grid.ray_count(); ++k) {
    const auto& t = grid.radial[k].nodes;
    const int n = grid.nodes_per_ray;
    for (int i = 0; i < n; ++i) {
      const complexd z = rho.at(k, i);
      if (std::abs(z.imag()) > 1e-14 * (1.0 + std::abs(z.real())))
        throw validation_error("weight function must be real valued");
      const double ri = z.real();
      if (!(ri > 0.0))
        throw validation_error("weight function must be strictly positive");
      est.inf_rho = std::min(est.inf_rho, ri);
      if (i + 1 < n && rho.at(k, i + 1).real() > ri + mono_tol)
        est.monotone = false;
      for (int j = i + 1; j < n; ++j) {
        const double dr = t[j] - t[i];
        const double diff = std::abs(rho.at(k, j).real() - ri);
        est.M = std::max(est.M, diff / std::pow(dr, lambda));
      }
    }
  }
  return est;
}

}  // namespace fracspec
