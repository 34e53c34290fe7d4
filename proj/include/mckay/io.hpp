#pragma once

#include "mckay/intertwiner.hpp"

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace mckay {

using json = nlohmann::ordered_json;

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw invalid_argument("complex values are written as [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const CVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

inline json to_json(const RVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json to_json(const IVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// Row-major list of rows.
inline json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

inline json to_json(const QuiverPoint& q) {
  return json{{"n", q.n}, {"alpha", to_json(q.alpha)}, {"beta", to_json(q.beta)}};
}

inline QuiverPoint point_from_json(const json& j) {
  if (!j.is_object() || !j.contains("alpha") || !j.contains("beta"))
    throw invalid_argument("point JSON needs \"alpha\" and \"beta\" arrays");
  const json& ja = j.at("alpha");
  const json& jb = j.at("beta");
  if (!ja.is_array() || !jb.is_array() || ja.size() != jb.size())
    throw invalid_argument("point JSON: alpha and beta must be arrays of equal length");
  const int n = static_cast<int>(ja.size());
  if (j.contains("n") && j.at("n").get<int>() != n) throw invalid_argument("point JSON: n does not match the edge count");
  if (n < 2) throw invalid_argument("point JSON: n must be at least 2");
  QuiverPoint q(n);
  for (int i = 0; i < n; ++i) {
    q.alpha(i) = complex_from_json(ja[i]);
    q.beta(i) = complex_from_json(jb[i]);
  }
  return q;
}

inline QuiverPoint point_from_string(const std::string& s) {
  json j;
  try {
    j = json::parse(s);
  } catch (const json::parse_error& e) {
    throw invalid_argument(std::string("point is not valid JSON: ") + e.what());
  }
  return point_from_json(j);
}

inline json to_json(const FixedPointRecord& r, int index) {
  json j;
  j["index"] = index;
  j["pattern"] = pattern_string(r.pattern);
  j["morse_index"] = r.morse_index;
  j["morse_value"] = morse_value(r.point);
  j["coordinates"] = to_json(r.point);
  j["weights"] = to_json(r.weights);
  if (r.is_family()) {
    j["kind"] = "family";
    j["family"] = json{{"param", *r.family_param},
                       {"param_range", json::array({0.0, pi / 2})},
                       {"offsets", to_json(r.family->offsets)},
                       {"tau_range", json::array({r.family->tau_lo, r.family->tau_hi})}};
  } else {
    j["kind"] = "isolated";
    if (r.cut_slot) j["cut_slot"] = *r.cut_slot;
    auto [w1, w2] = tangent_weights(r);
    j["tangent_weights"] = json::array({w1, w2});
  }
  return j;
}

inline json fixed_points_json(const ZetaLevel& zeta, const std::vector<FixedPointRecord>& recs) {
  json j;
  j["n"] = zeta.n();
  j["zeta"] = to_json(zeta.values);
  j["warnings"] = zeta.warnings;
  json list = json::array();
  for (std::size_t k = 0; k < recs.size(); ++k) list.push_back(to_json(recs[k], static_cast<int>(k)));
  j["records"] = list;
  return j;
}

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string trajectory_csv_header(int n) {
  std::string h = "t";
  for (const char* name : {"alpha", "beta"})
    for (int j = 1; j <= n; ++j) h += std::string(",") + name + std::to_string(j) + "_re," + name + std::to_string(j) + "_im";
  for (int j = 0; j < n; ++j) h += ",xi" + std::to_string(j);
  h += ",morse_value,residual_real,residual_complex";
  return h;
}

inline void write_trajectory_csv(std::ostream& os, const FlowTrajectory& traj) {
  if (traj.samples.empty()) return;
  const int n = traj.samples.front().point.n;
  os << trajectory_csv_header(n) << '\n';
  for (const FlowSample& s : traj.samples) {
    os << fmt_double(s.t);
    for (const CVector* v : {&s.point.alpha, &s.point.beta})
      for (int j = 0; j < n; ++j) os << ',' << fmt_double((*v)(j).real()) << ',' << fmt_double((*v)(j).imag());
    for (int j = 0; j < n; ++j) os << ',' << fmt_double(j < s.xi.size() ? s.xi(j) : 0.0);
    os << ',' << fmt_double(s.morse) << ',' << fmt_double(s.residual_real) << ',' << fmt_double(s.residual_complex) << '\n';
  }
}

inline json to_json(const BasePoint& b) { return json{{"v1", to_json(b.v1)}, {"v2", to_json(b.v2)}}; }

inline json to_json(const ComponentReport& c) {
  json j;
  j["component"] = c.component;
  j["kind"] = c.kind;
  j["source"] = json{{"pattern", pattern_string(c.source.pattern)},
                     {"morse_index", c.source.morse_index},
                     {"coordinates", to_json(c.source.point)}};
  j["termination"] = c.termination;
  j["final_time"] = c.final_time;
  j["final_morse"] = c.final_morse;
  j["extensions"] = c.extensions;
  j["converged"] = c.converged;
  j["differences"] = c.differences;
  j["matched_irrep"] = c.matched_irrep;
  j["correlation"] = c.correlation;
  j["sigma_ratio"] = c.sigma_ratio;
  j["entrywise_error"] = c.entrywise_error;
  j["residuals"] = json{{"moment_real", c.residual_real},
                        {"moment_complex", c.residual_complex},
                        {"intertwining", c.identity_residual}};
  j["status"] = c.status;
  return j;
}

inline json to_json(const ConjectureReport& r) {
  json j;
  j["n"] = r.n;
  j["zeta"] = to_json(r.zeta);
  j["base"] = to_json(r.base);
  json comps = json::array();
  for (const auto& c : r.components) comps.push_back(to_json(c));
  j["components"] = comps;
  j["all_matched"] = r.all_matched;
  j["injective"] = r.injective;
  j["surjectivity_required"] = r.surjectivity_required;
  j["surjective"] = r.surjective;
  j["violations"] = r.violations;
  j["conjecture_holds"] = r.conjecture_holds;
  return j;
}

} // namespace mckay
