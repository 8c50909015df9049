#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fracspec/assembly.hpp"
#include "fracspec/config.hpp"
#include "fracspec/spectral.hpp"

namespace fracspec {

struct CheckResult {
  std::string id;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

namespace detail {

inline void write_text(const std::filesystem::path& path,
                       const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot write " + path.string());
  out << body;
}

inline std::string csv_cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline ordered_json checks_json(const std::vector<CheckResult>& checks) {
  ordered_json arr = ordered_json::array();
  for (const auto& c : checks) {
    ordered_json j;
    j["id"] = c.id;
    j["value"] = c.value;
    j["threshold"] = c.threshold;
    j["pass"] = c.pass;
    arr.push_back(j);
  }
  return arr;
}

inline bool all_pass(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

inline int finish_command(const RunConfig& cfg, const std::string& command,
                          const std::vector<CheckResult>& checks, bool quiet) {
  bool ok = true;
  for (const auto& c : checks) {
    if (!quiet)
      std::cout << command << " " << (c.pass ? "[pass] " : "[FAIL] ") << c.id
                << " value " << c.value << " threshold " << c.threshold
                << "\n";
    if (!c.pass) {
      std::cerr << "check failed: " << c.id << " (value " << c.value
                << ", threshold " << c.threshold << ")\n";
      ok = false;
    }
  }
  (void)cfg;
  return ok ? 0 : 1;
}

inline ordered_json report_header(const RunConfig& c,
                                  const std::string& command) {
  ordered_json j;
  j["command"] = command;
  j["config_hash"] = c.config_hash;
  j["seed"] = c.seed;
  j["alpha"] = c.alpha;
  j["domain"] = c.domain.kind;
  return j;
}

// Deterministic random trial fields on a ray fan: low sine modes, a smooth
// bump, and band-limited noise, each with a mild angular modulation.
inline GridFunction fan_trial_field(std::shared_ptr<const FanGrid> g,
                                    long which, Rng& rng) {
  GridFunction f = GridFunction::zero(std::move(g));
  const int K = f.grid->ray_count();
  const int P = f.grid->nodes_per_ray;
  const int m = 1 + static_cast<int>(which % 3);
  const double phase = rng.uniform(0.0, 2.0 * pi);
  std::vector<double> amp(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    amp[static_cast<std::size_t>(k)] =
        1.0 + 0.3 * std::cos(m * (2.0 * pi * k / K) + phase);

  const long family = which % 3;
  std::vector<complexd> profile(static_cast<std::size_t>(P));
  if (family == 0) {
    const int mode = 1 + static_cast<int>((which / 3) % 5);
    for (int j = 0; j < P; ++j) {
      const double u = static_cast<double>(j) / (P - 1);
      profile[static_cast<std::size_t>(j)] = std::sin(mode * pi * u);
    }
  } else if (family == 1) {
    const double c = rng.uniform(0.25, 0.75);
    const double w = rng.uniform(0.5, 0.9) * std::min(c, 1.0 - c);
    for (int j = 0; j < P; ++j) {
      const double u = static_cast<double>(j) / (P - 1);
      const double v = (u - c) / w;
      profile[static_cast<std::size_t>(j)] =
          std::abs(v) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - v * v)) : 0.0;
    }
  } else {
    complexd coeff[8];
    for (int k = 0; k < 8; ++k)
      coeff[k] = complexd(rng.normal(), rng.normal()) / double(k + 1);
    for (int j = 0; j < P; ++j) {
      const double u = static_cast<double>(j) / (P - 1);
      complexd acc = 0.0;
      for (int k = 0; k < 8; ++k) acc += coeff[k] * std::sin((k + 1) * pi * u);
      profile[static_cast<std::size_t>(j)] = acc;
    }
  }
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < P; ++j)
      f.at(k, j) = amp[static_cast<std::size_t>(k)] *
                   profile[static_cast<std::size_t>(j)];
  return f;
}

inline std::shared_ptr<const FanGrid> fan_for(const RunConfig& c) {
  const ConvexDomain dom = domain_from(c.domain);
  const int rays = dom.dim == 1 ? 1 : c.domain.rays;
  const int cells = c.grid.fan_n > 0 ? c.grid.fan_n : c.grid.n;
  return make_fan_grid(build_ray_fan(dom, c.domain.base, rays), cells);
}

// Smooth boundary-vanishing field used by the inversion and restriction checks.
inline std::function<double(Point)> smooth_field(const DomainSpec& d) {
  if (d.kind == "interval") {
    const double L = d.length;
    return [L](Point p) { return std::sin(pi * p.x / L); };
  }
  if (d.kind == "box") {
    const double w = d.width, h = d.height;
    return [w, h](Point p) {
      return std::sin(pi * p.x / w) * std::sin(pi * p.y / h);
    };
  }
  const double R = d.radius;
  return [R](Point p) {
    return std::cos(pi * std::sqrt(p.x * p.x + p.y * p.y) / (2.0 * R));
  };
}

inline InteriorSpace space_for(const RunConfig& c) {
  if (c.domain.kind == "interval")
    return make_interior_interval(c.domain.length, c.grid.n);
  if (c.domain.kind == "box")
    return make_interior_box(c.domain.width, c.domain.height, c.grid.n,
                             c.grid.ny > 0 ? c.grid.ny : c.grid.n);
  throw validation_error(
      "matrix analyses need an interval or box domain; the disk carries only "
      "the pointwise ray checks");
}

inline EllipticCoefficients coefficients_for(const RunConfig& c) {
  EllipticCoefficients co;
  co.a11 = bind_field(c.coefficients.a11, c.domain.base);
  co.a12 = bind_field(c.coefficients.a12, c.domain.base);
  co.a22 = bind_field(c.coefficients.a22, c.domain.base);
  co.rho = bind_field(c.coefficients.rho, c.domain.base);
  co.a0 = c.coefficients.a0;
  co.lambda = c.coefficients.lambda;
  co.holder_M = c.coefficients.holder_m;
  return co;
}

inline HolderWeight weight_for(const RunConfig& c,
                               std::shared_ptr<const FanGrid> fan) {
  const auto rho_fn = bind_field(c.coefficients.rho, c.domain.base);
  const GridFunction rho = GridFunction::sample(std::move(fan), rho_fn);
  double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < rho.v.size(); ++i)
    inf = std::min(inf, rho.v[i].real());
  if (inf > 0.0)
    return make_holder_weight(rho, c.coefficients.lambda, c.alpha,
                              c.coefficients.holder_m);
  HolderWeight w;
  w.rho = rho;
  w.lambda = c.coefficients.lambda;
  w.inf_rho = inf;
  w.monotone = false;
  return w;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// identities: pointwise operator checks on the configured ray fan.
// ---------------------------------------------------------------------------

inline int run_identities(const RunConfig& c, bool quiet = false) {
  const ConvexDomain dom = domain_from(c.domain);
  auto fan = detail::fan_for(c);
  std::vector<CheckResult> checks;
  auto add = [&](const std::string& id, double value, double threshold,
                 bool pass) {
    checks.push_back({id, value, threshold, pass});
  };

  double tele = 0.0;
  for (int n = 1; n <= 6; ++n)
    tele = std::max(tele,
                    std::abs(cn_alpha(n, c.alpha) -
                             cn_alpha_telescoped(n, c.alpha)));
  add("constant_telescoping", tele, 1e-12, tele < 1e-12);

  const double mass_err = std::abs(kernel_mass(c.alpha) - 1.0);
  add("kernel_unit_mass", mass_err, 1e-8, mass_err < 1e-8);

  double kmin = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 10000; ++i)
    kmin = std::min(kmin, kernel_value(10.0 * i / 10000.0, c.alpha));
  add("kernel_positivity", kmin, 0.0, kmin > 0.0);

  // norm bound over random nodal fields
  {
    Rng rng(c.seed + 1);
    double worst = 0.0;
    for (int t = 0; t < c.analysis.field_count; ++t) {
      GridFunction g = GridFunction::zero(fan);
      for (Eigen::Index i = 0; i < g.v.size(); ++i)
        g.v[i] = complexd(rng.normal(), rng.normal());
      const double denom = weighted_norm(g);
      if (!(denom > 0.0)) continue;
      worst = std::max(
          worst, weighted_norm(frac_integral(g, c.alpha, Side::left)) / denom);
    }
    const double bound = std::pow(dom.diameter(), c.alpha) /
                         gamma_fn(c.alpha + 1.0) * (1.0 + 1e-6);
    add("integral_norm_bound", worst, bound, worst <= bound);
  }

  const GridFunction smooth =
      GridFunction::sample(fan, detail::smooth_field(c.domain));
  const double smooth_norm = weighted_norm(smooth);
  for (Side side : {Side::left, Side::right}) {
    GridFunction back =
        frac_derivative(frac_integral(smooth, c.alpha, side), c.alpha, side);
    back.v -= smooth.v;
    const double rel = weighted_norm(back) / smooth_norm;
    add(side == Side::left ? "inversion_left" : "inversion_right", rel,
        c.tolerances.inversion, rel <= c.tolerances.inversion);
  }

  {
    const double d = dom.diameter();
    const Point base = c.domain.base;
    auto phi = GridFunction::sample(fan, [d, base](Point p) {
      const double u = std::hypot(p.x - base.x, p.y - base.y) / d;
      return 1.0 + u + u * u;
    });
    auto psi = GridFunction::sample(fan, [d, base](Point p) {
      const double u = std::hypot(p.x - base.x, p.y - base.y) / d;
      return 1.0 - u + 0.5 * u * u * u;
    });
    const AdjointResidual res = adjoint_residual(phi, psi, c.alpha);
    const double scale = res.f_norm * res.g_norm;
    const double rel = scale > 0.0 ? res.residual / scale : 0.0;
    add("derivative_adjointness", rel, c.tolerances.adjointness,
        rel <= c.tolerances.adjointness);
  }

  // one-dimensional restriction: the ray derivative reduces to the classical
  // difference-quotient form, so both paths must agree on a 1D fan
  {
    auto line = make_fan_grid(
        build_ray_fan(make_interval(dom.diameter()), {0.0, 0.0}, 1),
        c.grid.n);
    auto f = GridFunction::sample(line, [&](Point p) {
      return std::sin(pi * p.x / dom.diameter());
    });
    const GridFunction a = kipriyanov_derivative(f, c.alpha);
    const GridFunction b = frac_derivative(f, c.alpha, Side::left);
    const double dev = (a.v - b.v).cwiseAbs().maxCoeff();
    add("kipriyanov_restriction", dev, 1e-13, dev <= 1e-13);
  }

  {
    const HolderWeight w = detail::weight_for(c, fan);
    const Representability rep = representability_solve(w, smooth, c.alpha);
    add("weighted_representability", rep.residual,
        c.tolerances.representability,
        rep.residual <= c.tolerances.representability);
  }

  ordered_json j = detail::report_header(c, "identities");
  j["dimension"] = dom.dim;
  j["diameter"] = dom.diameter();
  j["grid_n"] = fan->nodes_per_ray - 1;
  j["rays"] = fan->ray_count();
  j["checks"] = detail::checks_json(checks);
  j["all_pass"] = detail::all_pass(checks);
  std::filesystem::create_directories(c.out_dir);
  detail::write_text(std::filesystem::path(c.out_dir) / "identities.json",
                     j.dump(2) + "\n");
  return detail::finish_command(c, "identities", checks, quiet);
}

// ---------------------------------------------------------------------------
// accretivity: lower-bound constants plus a seeded Rayleigh-quotient scan.
// ---------------------------------------------------------------------------

inline int run_accretivity(const RunConfig& c, bool quiet = false) {
  const ConvexDomain dom = domain_from(c.domain);
  auto fan = detail::fan_for(c);
  const HolderWeight w = detail::weight_for(c, fan);
  const AccretivityReport rep = accretivity_constants(
      c.alpha, dom.dim, dom.diameter(), w, c.coefficients.a0);

  const long trials = c.analysis.trials;
  const Rng base(c.seed + 2);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> quotient(static_cast<std::size_t>(trials), nan);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    Rng stream = base.child(static_cast<std::uint64_t>(t));
    const GridFunction f =
        detail::fan_trial_field(fan, static_cast<long>(t), stream);
    GridFunction fr = f;
    for (Eigen::Index i = 0; i < fr.v.size(); ++i) fr.v[i] *= w.rho.v[i];
    const double den = weighted_inner_product(f, fr).real();
    if (!(den > 0.0)) return;
    const GridFunction df = kipriyanov_derivative(f, c.alpha);
    quotient[t] = weighted_inner_product(df, fr).real() / den;
  });
  double min_q = std::numeric_limits<double>::infinity();
  long used = 0, skipped = 0;
  for (double q : quotient) {
    if (std::isnan(q)) {
      ++skipped;
      continue;
    }
    min_q = std::min(min_q, q);
    ++used;
  }
  if (used == 0) throw numeric_error("every accretivity trial degenerated");

  std::vector<CheckResult> checks;
  const double gamma_lb = rep.mu * rep.inf_rho;
  checks.push_back(
      {"accretivity_feasible", gamma_lb, 0.0, rep.gamma_feasible});
  const double floor = rep.mu - c.tolerances.rayleigh_slack;
  checks.push_back({"rayleigh_minimum", min_q, floor, min_q >= floor});

  ordered_json j = detail::report_header(c, "accretivity");
  j["dimension"] = dom.dim;
  j["diameter"] = dom.diameter();
  j["weight"] = {{"inf_rho", rep.inf_rho},
                 {"lambda", w.lambda},
                 {"holder_constant", w.M},
                 {"monotone", w.monotone}};
  j["mu"] = rep.mu;
  j["mu1"] = rep.mu1;
  j["empirical"] = {{"min_quotient", min_q},
                    {"trials", used},
                    {"skipped", skipped}};
  j["checks"] = detail::checks_json(checks);
  j["all_pass"] = detail::all_pass(checks);
  std::filesystem::create_directories(c.out_dir);
  detail::write_text(std::filesystem::path(c.out_dir) / "accretivity.json",
                     j.dump(2) + "\n");
  return detail::finish_command(c, "accretivity", checks, quiet);
}

// ---------------------------------------------------------------------------
// range: numerical-range cloud of the discrete operator plus a sector fit.
// ---------------------------------------------------------------------------

inline int run_range(const RunConfig& c, bool quiet = false) {
  const InteriorSpace space = detail::space_for(c);
  const EllipticCoefficients co = detail::coefficients_for(c);
  const OperatorSet set =
      assemble_operators(space, co, c.alpha, c.domain.base);
  const std::vector<complexd> pts = numerical_range_sample(
      set.L, space.mass, RangeStrategy::mixed, c.analysis.range_samples,
      c.seed + 3);
  const SectorEstimate sec = sector_fit(pts);

  int violations = 0;
  for (const complexd& z : pts) {
    const double slack = 1e-10 * (1.0 + std::abs(z));
    if (z.real() < sec.gamma - slack) ++violations;
    else if (!sec.degenerate &&
             std::abs(z.imag()) >
                 (z.real() - sec.gamma) * std::tan(sec.theta) + slack)
      ++violations;
  }

  std::vector<CheckResult> checks;
  checks.push_back(
      {"sector_vertex_positive", sec.gamma, 0.0, sec.gamma > 0.0});
  checks.push_back({"sector_containment", static_cast<double>(violations),
                    0.0, violations == 0});

  std::string csv = "re,im\n";
  for (const complexd& z : pts)
    csv += detail::csv_cell(z.real()) + "," + detail::csv_cell(z.imag()) +
           "\n";

  ordered_json j = detail::report_header(c, "range");
  j["samples"] = static_cast<int>(pts.size());
  j["strategy"] = "mixed";
  j["sector"] = {{"gamma", sec.gamma},
                 {"theta", sec.theta},
                 {"k", sec.degenerate ? 0.0 : sec.k},
                 {"degenerate", sec.degenerate}};
  j["checks"] = detail::checks_json(checks);
  j["all_pass"] = detail::all_pass(checks);
  std::filesystem::create_directories(c.out_dir);
  detail::write_text(std::filesystem::path(c.out_dir) / "range.csv", csv);
  detail::write_text(std::filesystem::path(c.out_dir) / "sector.json",
                     j.dump(2) + "\n");
  return detail::finish_command(c, "range", checks, quiet);
}

// ---------------------------------------------------------------------------
// sandwich: two-sided eigenvalue bounds via the constant-coefficient
// comparison operators.
// ---------------------------------------------------------------------------

inline int run_sandwich(const RunConfig& c, bool quiet = false) {
  const InteriorSpace space = detail::space_for(c);
  const EllipticCoefficients co = detail::coefficients_for(c);
  const OperatorSet set =
      assemble_operators(space, co, c.alpha, c.domain.base);

  double mu = 0.0;
  if (set.check.min_rho > 0.0) {
    const HolderWeight w = detail::weight_for(c, detail::fan_for(c));
    mu = accretivity_constants(c.alpha, space.dim(), set.space.domain.diameter(),
                               w, c.coefficients.a0)
             .mu;
  }
  const ComparisonOperators comps =
      comparison_operators(set, mu, 50, c.seed + 4,
                           c.tolerances.comparator_inflation);

  const int m = std::min(c.analysis.modes, space.dof_count());
  const Eigen::MatrixXd l0m = comparator_matrix(space, comps.a0, comps.rho0);
  const Eigen::MatrixXd l1m = comparator_matrix(space, comps.a1, comps.rho1);
  const Eigen::VectorXd lh = eigen_solve(set.H, space.mass, m);
  const Eigen::VectorXd l0 = eigen_solve(l0m, space.mass, m);
  const Eigen::VectorXd l1 = eigen_solve(l1m, space.mass, m);
  const SandwichReport rep =
      sandwich_check(l0, lh, l1, c.tolerances.sandwich_slack, comps);

  std::string csv = "n,lambda_L0,lambda_H,lambda_L1,pass\n";
  for (int i = 0; i < m; ++i)
    csv += std::to_string(i + 1) + "," + detail::csv_cell(l0[i]) + "," +
           detail::csv_cell(lh[i]) + "," + detail::csv_cell(l1[i]) + "," +
           std::to_string(rep.pass[static_cast<std::size_t>(i)]) + "\n";

  std::vector<CheckResult> checks;
  checks.push_back({"sandwich_ordering",
                    static_cast<double>(rep.first_fail), 0.0, rep.all_pass});
  checks.push_back({"comparator_validated",
                    static_cast<double>(comps.validated_trials), 50.0,
                    comps.validated_trials >= 50});

  ordered_json j = detail::report_header(c, "sandwich");
  j["grid_n"] = c.grid.n;
  j["modes"] = m;
  j["mu"] = mu;
  j["comparators"] = {{"a0", comps.a0},
                      {"rho0", comps.rho0},
                      {"a1", comps.a1},
                      {"rho1", comps.rho1},
                      {"validated_trials", comps.validated_trials}};
  j["tolerance"] = rep.tolerance;
  j["first_fail"] = rep.first_fail;
  j["checks"] = detail::checks_json(checks);
  j["all_pass"] = detail::all_pass(checks);
  std::filesystem::create_directories(c.out_dir);
  detail::write_text(std::filesystem::path(c.out_dir) / "eigenvalues.csv",
                     csv);
  detail::write_text(std::filesystem::path(c.out_dir) / "sandwich.json",
                     j.dump(2) + "\n");
  return detail::finish_command(c, "sandwich", checks, quiet);
}

// ---------------------------------------------------------------------------
// report: every analysis in one pass, plus informational resolvent samples.
// ---------------------------------------------------------------------------

inline int run_report(const RunConfig& c, bool quiet = false) {
  const int r_ident = run_identities(c, quiet);
  const int r_accr = run_accretivity(c, quiet);
  int r_range = 0, r_sand = 0;
  const bool matrices =
      c.domain.kind == "interval" || c.domain.kind == "box";
  if (matrices) {
    r_range = run_range(c, quiet);
    r_sand = run_sandwich(c, quiet);
  }

  ordered_json j = detail::report_header(c, "report");
  j["commands"] = {{"identities", r_ident == 0},
                   {"accretivity", r_accr == 0},
                   {"range", matrices ? ordered_json(r_range == 0)
                                      : ordered_json(nullptr)},
                   {"sandwich", matrices ? ordered_json(r_sand == 0)
                                         : ordered_json(nullptr)}};
  if (!matrices)
    j["note"] =
        "matrix analyses skipped: they need an interval or box domain";

  if (matrices) {
    const InteriorSpace space = detail::space_for(c);
    const EllipticCoefficients co = detail::coefficients_for(c);
    const OperatorSet set =
        assemble_operators(space, co, c.alpha, c.domain.base);
    const std::vector<complexd> zetas = {{0.5, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
    ordered_json rj = ordered_json::array();
    for (const auto& s : resolvent_samples(set.L, space.mass, zetas)) {
      ordered_json e;
      e["re"] = s.zeta.real();
      e["im"] = s.zeta.imag();
      e["norm"] = s.norm;
      e["bound"] = s.bound;
      e["within"] = s.within;
      rj.push_back(e);
    }
    j["resolvent"] = rj;
  }

  const bool ok = r_ident == 0 && r_accr == 0 && r_range == 0 && r_sand == 0;
  j["all_pass"] = ok;
  std::filesystem::create_directories(c.out_dir);
  detail::write_text(std::filesystem::path(c.out_dir) / "report.json",
                     j.dump(2) + "\n");
  return ok ? 0 : 1;
}

inline int run_command(const std::string& command, const RunConfig& c,
                       bool quiet = false) {
  if (command == "identities") return run_identities(c, quiet);
  if (command == "accretivity") return run_accretivity(c, quiet);
  if (command == "range") return run_range(c, quiet);
  if (command == "sandwich") return run_sandwich(c, quiet);
  if (command == "report") return run_report(c, quiet);
  throw validation_error("unknown command: " + command);
}

}  // namespace fracspec
