#pragma once

// Machine-readable report serialization and atomic file output.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "morseflow/critical.hpp"
#include "morseflow/experiments.hpp"
#include "morseflow/linear_model.hpp"

namespace morseflow {

inline nlohmann::json to_json(const VecN& v) {
  nlohmann::json j = nlohmann::json::array();
  for (int i = 0; i < v.n; ++i) j.push_back(v[i]);
  return j;
}

inline nlohmann::json to_json(const CriticalPoint& p) {
  nlohmann::json j;
  j["id"] = p.id;
  j["location"] = to_json(p.location);
  j["value"] = p.value;
  j["index"] = p.morse_index;
  j["eigenvalues"] = to_json(p.eigenvalues);
  j["gap_rel"] = std::isinf(p.gap_rel) ? 1e308 : p.gap_rel;
  if (p.v1) j["v1"] = to_json(*p.v1);
  return j;
}

inline nlohmann::json to_json(const CriticalSet& cs) {
  nlohmann::json j;
  j["points"] = nlohmann::json::array();
  for (const CriticalPoint& p : cs.points) j["points"].push_back(to_json(p));
  j["minima"] = cs.minima;
  j["saddles"] = cs.saddles;
  j["maxima"] = cs.maxima;
  return j;
}

inline nlohmann::json to_json(const ConcentrationReport& r) {
  nlohmann::json j;
  j["maximum_id"] = r.maximum_id;
  j["m_plus"] = r.m_plus;
  j["m_minus"] = r.m_minus;
  j["seed"] = r.seed;
  j["rows"] = nlohmann::json::array();
  for (const DeltaStats& row : r.rows) {
    nlohmann::json jr;
    jr["delta"] = row.delta;
    jr["N"] = row.n;
    jr["unresolved"] = row.unresolved;
    jr["f"] = row.f;
    jr["wilson_lo"] = row.wilson.lo;
    jr["wilson_hi"] = row.wilson.hi;
    nlohmann::json counts = nlohmann::json::object();
    for (size_t id = 0; id < row.terminal_counts.size(); ++id)
      if (row.terminal_counts[id] > 0) counts[std::to_string(id)] = row.terminal_counts[id];
    jr["terminal_counts"] = counts;
    j["rows"].push_back(jr);
  }
  return j;
}

inline std::string concentration_csv(const ConcentrationReport& r) {
  std::ostringstream os;
  os << "delta,N,f,wilson_lo,wilson_hi,unresolved\n";
  for (const DeltaStats& row : r.rows)
    os << row.delta << ',' << row.n << ',' << row.f << ',' << row.wilson.lo << ','
       << row.wilson.hi << ',' << row.unresolved << '\n';
  return os.str();
}

inline nlohmann::json to_json(const ScalingComparison& c) {
  nlohmann::json j;
  j["lambda_ratio"] = c.lambda_ratio;
  j["expected_exponent"] = c.expected_exponent;
  j["fitted_exponent"] = c.fitted_exponent;
  j["deviation"] = c.deviation;
  j["fit_ok"] = c.fit_ok;
  j["slow_convergence"] = c.slow_convergence;
  j["rows"] = nlohmann::json::array();
  for (const ScalingRow& r : c.rows) {
    nlohmann::json jr;
    jr["delta"] = r.delta;
    jr["one_minus_f"] = r.one_minus_f;
    jr["predicted"] = r.predicted;
    j["rows"].push_back(jr);
  }
  j["concentration"] = to_json(c.base);
  return j;
}

inline std::string scaling_csv(const ScalingComparison& c) {
  std::ostringstream os;
  os << "delta,one_minus_f,predicted\n";
  for (const ScalingRow& r : c.rows)
    os << r.delta << ',' << r.one_minus_f << ',' << r.predicted << '\n';
  return os.str();
}

inline std::string linear_check_csv(const linear_model::ScalingEstimate& e) {
  std::ostringstream os;
  os << "delta,ratio\n";
  for (size_t i = 0; i < e.deltas.size(); ++i) os << e.deltas[i] << ',' << e.ratios[i] << '\n';
  return os.str();
}

// Write through a temp file + rename so readers never observe a partial
// report.
inline void atomic_write(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(Errc::io, "cannot open " + tmp + " for writing");
    os << content;
    if (!os) fail(Errc::io, "short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(Errc::io, "cannot rename " + tmp + " to " + path);
}

}  // namespace morseflow
