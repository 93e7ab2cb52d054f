#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpg/em.hpp"
#include "mpg/flags.hpp"
#include "mpg/grasp.hpp"
#include "mpg/mixture.hpp"

namespace mpg {

using Json = nlohmann::json;

namespace detail {

inline const Json& require_field(const Json& j, const char* key, const char* context) {
  if (!j.is_object()) throw Error(std::string(context) + " must be a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw Error(std::string("missing field \"") + key + "\" in " + context);
  return *it;
}

template <int N>
Eigen::Matrix<double, N, 1> require_vector(const Json& j, const char* key, const char* context) {
  const Json& a = require_field(j, key, context);
  if (!a.is_array() || a.size() != N || !std::all_of(a.begin(), a.end(), [](const Json& v) { return v.is_number(); }))
    throw Error(std::string("field \"") + key + "\" in " + context + " must be an array of " +
                std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = a[static_cast<std::size_t>(i)].get<double>();
  return v;
}

inline double require_number(const Json& j, const char* key, const char* context) {
  const Json& v = require_field(j, key, context);
  if (!v.is_number()) throw Error(std::string("field \"") + key + "\" in " + context + " must be a number");
  return v.get<double>();
}

}  // namespace detail

// ---- RigidMotion: {"q": [a,b,c,d], "t": [x,y,z]}, q in canonical sign ----

inline Json to_json(const RigidMotion& m) {
  const Vec4 q = m.rotation().coeffs();
  return Json{{"q", {q[0], q[1], q[2], q[3]}},
              {"t", {m.translation()[0], m.translation()[1], m.translation()[2]}}};
}

inline RigidMotion motion_from_json(const Json& j) {
  const Vec4 q = detail::require_vector<4>(j, "q", "RigidMotion");
  const Vec3 t = detail::require_vector<3>(j, "t", "RigidMotion");
  return {UnitQuaternion(Quaternion::from_coeffs(q)), t};
}

// ---- ProjectedGaussian: {"q0", "mu", "sigma" (36 row-major), "C", "n_mc"} ----

inline Json to_json(const ProjectedGaussian& pg) {
  const Vec4 q0 = pg.chart().q0().coeffs();
  Json sigma = Json::array();
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) sigma.push_back(pg.sigma()(r, c));
  Json mu = Json::array();
  for (int i = 0; i < 6; ++i) mu.push_back(pg.mu()[i]);
  return Json{{"q0", {q0[0], q0[1], q0[2], q0[3]}},
              {"mu", mu},
              {"sigma", sigma},
              {"C", pg.norm_const()},
              {"n_mc", pg.normalization().samples}};
}

inline ProjectedGaussian pg_from_json(const Json& j) {
  const Vec4 q0 = detail::require_vector<4>(j, "q0", "ProjectedGaussian");
  const Vec6 mu = detail::require_vector<6>(j, "mu", "ProjectedGaussian");
  const Json& s = detail::require_field(j, "sigma", "ProjectedGaussian");
  if (!s.is_array() || s.size() != 36)
    throw Error("field \"sigma\" in ProjectedGaussian must be an array of 36 numbers (row-major)");
  Mat6 sigma;
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) {
      const Json& v = s[static_cast<std::size_t>(r * 6 + c)];
      if (!v.is_number()) throw Error("field \"sigma\" in ProjectedGaussian must contain numbers");
      sigma(r, c) = v.get<double>();
    }
  const double norm = detail::require_number(j, "C", "ProjectedGaussian");
  const auto n_mc = static_cast<std::size_t>(detail::require_number(j, "n_mc", "ProjectedGaussian"));
  return ProjectedGaussian::from_parts(chart_at(Quaternion::from_coeffs(q0)), mu, sigma,
                                       NormEstimate{norm, 0.0, n_mc});
}

// ---- MPG: {"components": [{"weight": w, "pg": {...}}]} ----

inline Json to_json(const Mpg& m) {
  Json comps = Json::array();
  for (const auto& c : m.components()) comps.push_back(Json{{"weight", c.weight}, {"pg", to_json(c.pg)}});
  return Json{{"components", comps}};
}

inline Mpg mpg_from_json(const Json& j) {
  const Json& comps = detail::require_field(j, "components", "MPG");
  if (!comps.is_array() || comps.empty())
    throw Error("field \"components\" in MPG must be a non-empty array");
  std::vector<Weighted> out;
  for (const Json& c : comps) {
    const double w = detail::require_number(c, "weight", "MPG component");
    out.push_back({w, pg_from_json(detail::require_field(c, "pg", "MPG component"))});
  }
  return Mpg(std::move(out));
}

// ---- ToleranceBox: {"center": RigidMotion, "half_widths": [6]} ----

inline Json to_json(const ToleranceBox& b) {
  Json hw = Json::array();
  for (int i = 0; i < 6; ++i) hw.push_back(b.half_widths[i]);
  return Json{{"center", to_json(b.center)}, {"half_widths", hw}};
}

inline ToleranceBox box_from_json(const Json& j) {
  return {motion_from_json(detail::require_field(j, "center", "ToleranceBox")),
          detail::require_vector<6>(j, "half_widths", "ToleranceBox")};
}

// ---- samples: JSON lines, one RigidMotion per line ----

inline std::string motions_to_jsonl(const std::vector<RigidMotion>& motions) {
  std::string out;
  for (const auto& m : motions) out += to_json(m).dump() + "\n";
  return out;
}

inline std::vector<RigidMotion> motions_from_jsonl(std::istream& in) {
  std::vector<RigidMotion> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error("line " + std::to_string(lineno) + " is not valid JSON: " + e.what());
    }
    out.push_back(motion_from_json(j));
  }
  return out;
}

// ---- EM trace: CSV of (iter, loglik), pre-reset sequence ----

inline std::string em_trace_csv(const EmTrace& trace) {
  std::string out = "iter,loglik\n";
  for (std::size_t i = 0; i < trace.loglik.size(); ++i)
    out += std::to_string(i) + "," + double_to_string(trace.loglik[i]) + "\n";
  return out;
}

// ---- FlagSet: {"color": ..., "flags": [{"foot", "pole_tip", "pennant_tip", "color"}]} ----

inline Json to_json(const FlagSet& set) {
  Json flags = Json::array();
  for (const auto& f : set.flags) {
    flags.push_back(Json{{"foot", {f.foot[0], f.foot[1], f.foot[2]}},
                         {"pole_tip", {f.pole_tip[0], f.pole_tip[1], f.pole_tip[2]}},
                         {"pennant_tip", {f.pennant_tip[0], f.pennant_tip[1], f.pennant_tip[2]}},
                         {"color", f.color}});
  }
  return Json{{"color", set.color}, {"flags", flags}};
}

// ---- file helpers ----

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open \"" + path + "\" for writing");
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open \"" + path + "\" for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json read_json_file(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw Error("\"" + path + "\" is not valid JSON: " + e.what());
  }
}

}  // namespace mpg
