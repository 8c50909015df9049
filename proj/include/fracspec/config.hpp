#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fracspec/common.hpp"
#include "fracspec/expr.hpp"
#include "fracspec/geometry.hpp"

namespace fracspec {

using ordered_json = nlohmann::ordered_json;

struct DomainSpec {
  std::string kind = "interval";  // interval | box | disk
  double length = 1.0;
  double width = 1.0;
  double height = 1.0;
  double radius = 1.0;
  Point base{0.0, 0.0};
  int rays = 32;  // fan directions for pointwise checks on 2D domains
};

struct GridSpec {
  int n = 256;
  int ny = 0;     // box only; 0 means "same as n"
  int fan_n = 0;  // radial cells for pointwise ray checks; 0 means "same as n"
};

struct CoefficientSpec {
  std::string a11 = "1";
  std::string a12 = "0";
  std::string a22 = "1";
  double a0 = 1.0;
  std::string rho = "1";
  double lambda = 1.0;
  std::optional<double> holder_m;
};

struct AnalysisSpec {
  long trials = 200;       // Rayleigh-quotient trials
  int range_samples = 500;
  int modes = 20;          // sandwich eigenvalue count
  int field_count = 100;   // random fields for norm-bound style checks
};

struct Tolerances {
  double inversion = 5e-2;
  double adjointness = 1e-3;
  double representability = 1e-2;
  double rayleigh_slack = 1e-2;
  double sandwich_slack = 1e-8;
  double comparator_inflation = 0.1;
};

struct RunConfig {
  DomainSpec domain;
  double alpha = 0.5;
  GridSpec grid;
  CoefficientSpec coefficients;
  std::uint64_t seed = 0;
  AnalysisSpec analysis;
  Tolerances tolerances;
  std::string out_dir = "out";
  std::string config_hash;  // FNV-1a of the config file bytes
};

namespace detail {

inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

inline void reject_unknown(const ordered_json& j, const std::string& where,
                           const std::vector<std::string>& allowed) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || key == a;
    if (!ok)
      throw validation_error("config error at " + where + ": unknown key '" +
                             key + "'");
  }
}

template <typename T>
T fetch(const ordered_json& j, const std::string& where,
        const std::string& key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw validation_error("config error at " + where + "/" + key +
                           ": wrong value type");
  }
}

template <typename T>
T require(const ordered_json& j, const std::string& where,
          const std::string& key) {
  if (!j.contains(key))
    throw validation_error("config error at " + where + ": missing required key '" +
                           key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw validation_error("config error at " + where + "/" + key +
                           ": wrong value type");
  }
}

// nlohmann reports the byte count consumed at failure, one past the
// offending character; anchor on the character itself.
inline std::string line_anchor(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  const std::size_t stop = byte > 0 ? byte - 1 : 0;
  for (std::size_t i = 0; i < stop && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw validation_error("config parse error at " +
                           detail::line_anchor(text, e.byte) + ": " + e.what());
  }
  if (!j.is_object()) throw validation_error("config must be a JSON object");

  detail::reject_unknown(j, "/",
                         {"domain", "alpha", "grid", "coefficients", "seed",
                          "analysis", "tolerances", "out"});
  for (const char* key : {"domain", "alpha", "grid", "coefficients", "seed"})
    if (!j.contains(key))
      throw validation_error(std::string("config error at /: missing required key '") +
                             key + "'");

  RunConfig c;
  c.config_hash = detail::fnv1a_hex(text);

  const auto& dj = j.at("domain");
  if (!dj.is_object())
    throw validation_error("config error at /domain: expected an object");
  detail::reject_unknown(
      dj, "/domain",
      {"kind", "length", "width", "height", "radius", "base", "rays"});
  c.domain.kind = detail::require<std::string>(dj, "/domain", "kind");
  if (c.domain.kind != "interval" && c.domain.kind != "box" &&
      c.domain.kind != "disk")
    throw validation_error(
        "config error at /domain/kind: expected interval, box, or disk");
  c.domain.length = detail::fetch(dj, "/domain", "length", 1.0);
  c.domain.width = detail::fetch(dj, "/domain", "width", 1.0);
  c.domain.height = detail::fetch(dj, "/domain", "height", 1.0);
  c.domain.radius = detail::fetch(dj, "/domain", "radius", 1.0);
  c.domain.rays = detail::fetch(dj, "/domain", "rays", 32);
  if (dj.contains("base")) {
    const auto& b = dj.at("base");
    if (!b.is_array() || b.size() != 2)
      throw validation_error(
          "config error at /domain/base: expected [x, y]");
    c.domain.base = {b[0].get<double>(), b[1].get<double>()};
  } else if (c.domain.kind == "disk") {
    c.domain.base = {-c.domain.radius, 0.0};
  }

  c.alpha = detail::require<double>(j, "/", "alpha");
  if (!(c.alpha > 0.0 && c.alpha < 1.0))
    throw validation_error("config error at /alpha: need 0 < alpha < 1");

  const auto& gj = j.at("grid");
  if (!gj.is_object())
    throw validation_error("config error at /grid: expected an object");
  detail::reject_unknown(gj, "/grid", {"n", "ny", "fan_n"});
  c.grid.n = detail::require<int>(gj, "/grid", "n");
  c.grid.ny = detail::fetch(gj, "/grid", "ny", 0);
  c.grid.fan_n = detail::fetch(gj, "/grid", "fan_n", 0);
  if (c.grid.n < 2)
    throw validation_error("config error at /grid/n: need at least 2 cells");
  if (c.grid.ny < 0 || c.grid.fan_n < 0)
    throw validation_error(
        "config error at /grid: ny and fan_n must be nonnegative");

  const auto& cj = j.at("coefficients");
  if (!cj.is_object())
    throw validation_error("config error at /coefficients: expected an object");
  detail::reject_unknown(
      cj, "/coefficients",
      {"a11", "a12", "a22", "a0", "rho", "lambda", "holder_m"});
  auto expr_or_default = [&](const char* key, const char* dflt) {
    if (!cj.contains(key)) return std::string(dflt);
    const auto& v = cj.at(key);
    if (v.is_number()) {
      std::ostringstream os;
      os.precision(17);
      os << v.get<double>();
      return os.str();
    }
    if (v.is_string()) return v.get<std::string>();
    throw validation_error(std::string("config error at /coefficients/") + key +
                           ": expected a number or expression string");
  };
  c.coefficients.a11 = expr_or_default("a11", "1");
  c.coefficients.a12 = expr_or_default("a12", "0");
  c.coefficients.a22 = expr_or_default("a22", "1");
  c.coefficients.rho = expr_or_default("rho", "1");
  c.coefficients.a0 = detail::fetch(cj, "/coefficients", "a0", 1.0);
  c.coefficients.lambda = detail::fetch(cj, "/coefficients", "lambda", 1.0);
  if (cj.contains("holder_m"))
    c.coefficients.holder_m =
        detail::require<double>(cj, "/coefficients", "holder_m");
  if (!(c.coefficients.a0 > 0.0))
    throw validation_error(
        "config error at /coefficients/a0: ellipticity bound must be positive");
  if (!(c.coefficients.lambda > c.alpha) || c.coefficients.lambda > 1.0)
    throw validation_error(
        "config error at /coefficients/lambda: the weight smoothness exponent "
        "must satisfy alpha < lambda <= 1");
  const std::pair<const char*, const std::string*> fields[] = {
      {"a11", &c.coefficients.a11},
      {"a12", &c.coefficients.a12},
      {"a22", &c.coefficients.a22},
      {"rho", &c.coefficients.rho}};
  for (const auto& [name, src] : fields) {
    try {
      Expr::parse(*src);
    } catch (const validation_error& e) {
      throw validation_error(std::string("config error at /coefficients/") +
                             name + ": " + e.what());
    }
  }

  c.seed = detail::require<std::uint64_t>(j, "/", "seed");

  if (j.contains("analysis")) {
    const auto& aj = j.at("analysis");
    if (!aj.is_object())
      throw validation_error("config error at /analysis: expected an object");
    detail::reject_unknown(aj, "/analysis",
                           {"trials", "range_samples", "modes", "field_count"});
    c.analysis.trials =
        detail::fetch<long>(aj, "/analysis", "trials", c.analysis.trials);
    c.analysis.range_samples = detail::fetch(aj, "/analysis", "range_samples",
                                             c.analysis.range_samples);
    c.analysis.modes = detail::fetch(aj, "/analysis", "modes", c.analysis.modes);
    c.analysis.field_count =
        detail::fetch(aj, "/analysis", "field_count", c.analysis.field_count);
    if (c.analysis.trials < 1 || c.analysis.range_samples < 1 ||
        c.analysis.modes < 1 || c.analysis.field_count < 1)
      throw validation_error("config error at /analysis: counts must be positive");
  }

  if (j.contains("tolerances")) {
    const auto& tj = j.at("tolerances");
    if (!tj.is_object())
      throw validation_error("config error at /tolerances: expected an object");
    detail::reject_unknown(tj, "/tolerances",
                           {"inversion", "adjointness", "representability",
                            "rayleigh_slack", "sandwich_slack",
                            "comparator_inflation"});
    Tolerances& t = c.tolerances;
    t.inversion = detail::fetch(tj, "/tolerances", "inversion", t.inversion);
    t.adjointness =
        detail::fetch(tj, "/tolerances", "adjointness", t.adjointness);
    t.representability = detail::fetch(tj, "/tolerances", "representability",
                                       t.representability);
    t.rayleigh_slack =
        detail::fetch(tj, "/tolerances", "rayleigh_slack", t.rayleigh_slack);
    t.sandwich_slack =
        detail::fetch(tj, "/tolerances", "sandwich_slack", t.sandwich_slack);
    t.comparator_inflation = detail::fetch(
        tj, "/tolerances", "comparator_inflation", t.comparator_inflation);
    for (double v : {t.inversion, t.adjointness, t.representability,
                     t.rayleigh_slack, t.sandwich_slack, t.comparator_inflation})
      if (!(v >= 0.0))
        throw validation_error(
            "config error at /tolerances: tolerances must be nonnegative");
  }

  c.out_dir = detail::fetch<std::string>(j, "/", "out", c.out_dir);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

inline ConvexDomain domain_from(const DomainSpec& d) {
  if (d.kind == "interval") return make_interval(d.length);
  if (d.kind == "box") return make_box(d.width, d.height);
  return make_disk(d.radius);
}

// Field evaluators bind r to the distance from the configured base point.
inline std::function<double(Point)> bind_field(const std::string& text,
                                               Point base) {
  const Expr e = Expr::parse(text);
  return [e, base](Point p) {
    const double dx = p.x - base.x, dy = p.y - base.y;
    return e.eval(p.x, p.y, std::sqrt(dx * dx + dy * dy));
  };
}

}  // namespace fracspec
