#pragma once

// Landscape config files (JSON). `F` is an expression string or
// "builtin:<name>"; for builtins the manifold and dimension may be
// omitted and default to the catalog entry.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "morseflow/geometry.hpp"

namespace morseflow {

inline Manifold manifold_from_json(const nlohmann::json& j, int dim_hint) {
  if (!j.contains("kind")) fail(Errc::config, "manifold.kind missing");
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "torus") {
    if (!j.contains("periods")) fail(Errc::config, "torus manifold needs periods");
    VecN periods(static_cast<int>(j.at("periods").size()));
    for (int i = 0; i < periods.n; ++i) periods[i] = j.at("periods").at(static_cast<size_t>(i)).get<double>();
    return Manifold::torus(periods);
  }
  if (kind == "circle") {
    double period;
    if (j.contains("period"))
      period = j.at("period").get<double>();
    else if (j.contains("periods") && j.at("periods").size() == 1)
      period = j.at("periods").at(0).get<double>();
    else
      fail(Errc::config, "circle manifold needs period");
    return Manifold::circle(period);
  }
  if (kind == "box") {
    const nlohmann::json* lo = nullptr;
    const nlohmann::json* hi = nullptr;
    if (j.contains("bounds")) {
      lo = &j.at("bounds").at("lower");
      hi = &j.at("bounds").at("upper");
    } else if (j.contains("lower") && j.contains("upper")) {
      lo = &j.at("lower");
      hi = &j.at("upper");
    } else {
      fail(Errc::config, "box manifold needs bounds {lower, upper}");
    }
    VecN lower(static_cast<int>(lo->size())), upper(static_cast<int>(hi->size()));
    for (int i = 0; i < lower.n; ++i) lower[i] = lo->at(static_cast<size_t>(i)).get<double>();
    for (int i = 0; i < upper.n; ++i) upper[i] = hi->at(static_cast<size_t>(i)).get<double>();
    return Manifold::box(lower, upper);
  }
  (void)dim_hint;
  fail(Errc::config, "unknown manifold kind '" + kind + "'");
}

inline ToleranceSet tolerances_from_json(const nlohmann::json& j) {
  ToleranceSet t;
  auto opt = [&](const char* key, double& slot) {
    if (j.contains(key)) slot = j.at(key).get<double>();
  };
  opt("grad_tol", t.grad_tol);
  opt("dedup_radius", t.dedup_radius);
  opt("gap_rel_tol", t.gap_rel_tol);
  opt("capture_radius", t.capture_radius);
  opt("ode_rel_tol", t.ode_rel_tol);
  opt("ode_abs_tol", t.ode_abs_tol);
  opt("t_max", t.t_max);
  t.validate();
  return t;
}

inline Landscape landscape_from_json(const nlohmann::json& j) {
  Landscape L;
  bool have_manifold = false;

  if (!j.contains("F")) fail(Errc::config, "config needs F");
  std::string fsrc = j.at("F").get<std::string>();
  if (fsrc.rfind("builtin:", 0) == 0) {
    const Builtin& b = builtin(fsrc.substr(8));
    L.f = b.f;
    L.manifold = b.manifold;
    have_manifold = true;
  }

  if (j.contains("manifold")) {
    L.manifold = manifold_from_json(j.at("manifold"), j.value("dimension", 0));
    have_manifold = true;
  }
  if (!have_manifold) fail(Errc::config, "config needs a manifold (or a builtin F)");

  int n = L.manifold.n;
  if (j.contains("dimension") && j.at("dimension").get<int>() != n)
    fail(Errc::config, "dimension does not match the manifold");

  if (fsrc.rfind("builtin:", 0) != 0) L.f = parse_expr(fsrc, n);
  if (L.f.dim != n) fail(Errc::config, "F dimension does not match the manifold");

  if (j.contains("metric") && !(j.at("metric").is_string() && j.at("metric") == "identity")) {
    if (!j.at("metric").is_array()) fail(Errc::config, "metric must be \"identity\" or a matrix");
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : j.at("metric")) {
      std::vector<std::string> row;
      for (const auto& cell : r) row.push_back(cell.get<std::string>());
      rows.push_back(row);
    }
    L.metric = MetricField::from_entries(n, rows);
  }

  if (j.contains("density") && !(j.at("density").is_string() && j.at("density") == "riemannian"))
    L.density = parse_expr(j.at("density").get<std::string>(), n);

  if (j.contains("tolerances")) L.tol = tolerances_from_json(j.at("tolerances"));
  return L;
}

inline Landscape load_landscape(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(Errc::io, "cannot open config file " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    fail(Errc::config, "invalid JSON in " + path + ": " + e.what());
  }
  return landscape_from_json(j);
}

}  // namespace morseflow
