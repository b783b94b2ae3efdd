#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"

#include "omnitopo/chassis.hpp"
#include "omnitopo/classify.hpp"
#include "omnitopo/ellipse_fit.hpp"
#include "omnitopo/optimizer.hpp"
#include "omnitopo/phase_topology.hpp"
#include "omnitopo/star_polygon.hpp"
#include "omnitopo/wrench.hpp"

namespace omnitopo {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form.
inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  double back = 0.0;
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, x);
    std::sscanf(buf, "%lf", &back);
    if (back == x) break;
  }
  return buf;
}

// ---- chassis ---------------------------------------------------------------

inline Json to_json(const Chassis& c) {
  Json j;
  j["id"] = c.id;
  j["family"] = std::string(to_string(c.family));
  Json verts = Json::array();
  for (const auto& p : c.vertices) verts.push_back({p.x(), p.y(), p.z()});
  j["vertices"] = std::move(verts);
  return j;
}

/// Loads and validates a chassis document. The circumradius is the largest
/// vertex norm; coordinates are kept as written.
inline Chassis chassis_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("vertices") || !j["vertices"].is_array()) {
    throw std::invalid_argument("chassis document needs a \"vertices\" array");
  }
  Chassis c;
  c.id = j.value("id", std::string("custom"));
  c.family = j.contains("family") ? chassis_family_from_string(j["family"].get<std::string>())
                                  : ChassisFamily::quasi_regular;
  for (const auto& v : j["vertices"]) {
    if (!v.is_array() || v.size() != 3) throw std::invalid_argument("each vertex must be [x, y, z]");
    c.vertices.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }
  c.circumradius = detail::max_vertex_norm(c.vertices);
  validate_chassis(c);
  return c;
}

/// Git blob object id (SHA-1 over "blob <size>\0" + content).
inline std::string git_blob_sha1(const std::string& content) {
  std::string framed = "blob " + std::to_string(content.size());
  framed.push_back('\0');
  framed += content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(framed.data(), framed.size(), md, &len, EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

/// Content hash of a chassis: blob id of its compact JSON document.
inline std::string chassis_hash(const Chassis& c) { return git_blob_sha1(to_json(c).dump()); }

// ---- wrench ----------------------------------------------------------------

inline Json to_json(const MetricReport& m) {
  Json j;
  j["singular_values"] = std::vector<double>(m.singular_values.data(), m.singular_values.data() + 6);
  j["log_volume"] = m.log_volume;
  if (std::isfinite(m.condition_number)) j["condition_number"] = m.condition_number;
  else j["condition_number"] = "inf";
  j["min_singular"] = m.min_singular;
  return j;
}

inline std::string sensitivity_csv(const std::vector<SensitivityPoint>& pts) {
  std::string out = "ratio,kappa,sigma_min\n";
  for (const auto& p : pts) out += fmt_double(p.ratio) + "," + fmt_double(p.kappa) + "," + fmt_double(p.sigma_min) + "\n";
  return out;
}

// ---- optimizer -------------------------------------------------------------

inline Json to_json(const SolverConfig& c) {
  Json j;
  j["max_iterations"] = c.max_iterations;
  j["gradient_tolerance"] = c.gradient_tolerance;
  j["step_tolerance"] = c.step_tolerance;
  j["epsilon"] = c.epsilon;
  j["objective"] = std::string(to_string(c.objective));
  j["memory"] = c.memory;
  j["length_ratio"] = c.length_ratio;
  return j;
}

inline SolverConfig solver_config_from_json(const Json& j) {
  SolverConfig c;
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.gradient_tolerance = j.value("gradient_tolerance", c.gradient_tolerance);
  c.step_tolerance = j.value("step_tolerance", c.step_tolerance);
  c.epsilon = j.value("epsilon", c.epsilon);
  if (j.contains("objective")) c.objective = objective_from_string(j["objective"].get<std::string>());
  c.memory = j.value("memory", c.memory);
  c.length_ratio = j.value("length_ratio", c.length_ratio);
  validate_config(c);
  return c;
}

inline Json to_json(const SolutionSet& s, const Chassis& chassis) {
  Json j;
  j["chassis_id"] = s.chassis_id;
  j["chassis_hash"] = chassis_hash(chassis);
  j["chassis"] = to_json(chassis);
  j["rng_seed"] = s.rng_seed;
  j["samples_requested"] = s.samples_requested;
  j["converged"] = s.converged_count;
  j["prune_tolerance"] = s.prune_tolerance;
  j["J_min"] = s.J_min;
  j["config"] = to_json(s.config);
  Json sols = Json::array();
  for (const auto& sol : s.solutions) {
    Json e;
    e["cost"] = sol.cost;
    Json dirs = Json::array();
    for (const auto& d : sol.dirs.dirs) dirs.push_back({d.x(), d.y(), d.z()});
    e["dirs"] = std::move(dirs);
    sols.push_back(std::move(e));
  }
  j["solutions"] = std::move(sols);
  return j;
}

struct LoadedSolutions {
  Chassis chassis;
  SolutionSet set;
};

/// Reads a solution document, re-validating the embedded chassis against its
/// hash and the stored directions against the unit-norm and prune invariants.
inline LoadedSolutions solutions_from_json(const Json& j) {
  LoadedSolutions out;
  out.chassis = chassis_from_json(j.at("chassis"));
  if (j.contains("chassis_hash") && j["chassis_hash"].get<std::string>() != chassis_hash(out.chassis)) {
    throw std::invalid_argument("chassis hash does not match the embedded chassis");
  }
  auto& s = out.set;
  s.chassis_id = j.value("chassis_id", out.chassis.id);
  s.rng_seed = j.value("rng_seed", std::uint64_t{0});
  s.samples_requested = j.value("samples_requested", 0);
  s.converged_count = j.value("converged", 0);
  s.prune_tolerance = j.value("prune_tolerance", kDefaultPruneTolerance);
  s.J_min = j.value("J_min", 0.0);
  if (j.contains("config")) s.config = solver_config_from_json(j["config"]);
  for (const auto& e : j.at("solutions")) {
    Solution sol;
    sol.cost = e.at("cost").get<double>();
    for (const auto& d : e.at("dirs")) sol.dirs.dirs.emplace_back(d[0].get<double>(), d[1].get<double>(), d[2].get<double>());
    require_same_size(out.chassis, sol.dirs.size());
    require_unit_directions(sol.dirs);
    if (sol.cost > s.J_min + s.prune_tolerance + 1e-12) throw std::invalid_argument("stored cost exceeds J_min + prune_tolerance");
    s.solutions.push_back(std::move(sol));
  }
  return out;
}

inline std::string solutions_csv(const SolutionSet& s) {
  std::string out = "solution_index,rotor,dx,dy,dz,cost\n";
  for (std::size_t m = 0; m < s.size(); ++m) {
    const auto& sol = s.solutions[m];
    for (std::size_t i = 0; i < sol.dirs.size(); ++i) {
      const auto& d = sol.dirs.dirs[i];
      out += std::to_string(m) + "," + std::to_string(i + 1) + "," + fmt_double(d.x()) + "," + fmt_double(d.y()) + "," +
             fmt_double(d.z()) + "," + fmt_double(sol.cost) + "\n";
    }
  }
  return out;
}

inline std::string disc_csv(const SolutionSet& s) {
  std::string out = "solution_index,rotor,x,y\n";
  for (std::size_t m = 0; m < s.size(); ++m) {
    const auto& sol = s.solutions[m];
    for (std::size_t i = 0; i < sol.dirs.size(); ++i) {
      const auto xy = disc_project(canonicalize(sol.dirs.dirs[i]));
      out += std::to_string(m) + "," + std::to_string(i + 1) + "," + fmt_double(xy[0]) + "," + fmt_double(xy[1]) + "\n";
    }
  }
  return out;
}

// ---- topology --------------------------------------------------------------

inline Json to_json(const EllipseFitReport& r, const std::vector<bool>* verified = nullptr) {
  Json rotors = Json::array();
  for (std::size_t i = 0; i < r.rotors.size(); ++i) {
    const auto& f = r.rotors[i];
    Json e;
    e["rotor"] = i + 1;
    e["psi_deg"] = rad_to_deg(f.psi);
    e["eta_deg"] = rad_to_deg(f.eta);
    e["b"] = f.b;
    e["rms_residual"] = f.rms_residual;
    e["mean_distance"] = f.mean_distance;
    if (verified) e["tangent_collapse"] = static_cast<bool>((*verified)[i]);
    rotors.push_back(std::move(e));
  }
  Json j;
  j["mean_distance"] = r.mean_distance();
  j["rotors"] = std::move(rotors);
  return j;
}

inline Json to_json(const BranchModel& m) {
  Json j;
  j["N"] = m.N;
  j["K"] = m.K();
  Json branches = Json::array();
  for (const auto& b : m.branches) {
    Json e;
    if (b.q_match) e["q_match"] = *b.q_match;
    else e["q_match"] = nullptr;
    e["chirality"] = b.chirality;
    std::vector<double> over_pi;
    for (double d : b.offsets) over_pi.push_back(d / kPi);
    e["offsets_over_pi"] = over_pi;
    Json fr = Json::array();
    for (const auto& [num, den] : b.rational_offsets) fr.push_back(std::to_string(num) + "/" + std::to_string(den));
    e["rational_offsets"] = std::move(fr);
    e["spread_deg"] = b.spread_deg;
    e["max_fit_error_deg"] = b.max_fit_error_deg;
    e["members"] = b.members;
    e["rejected"] = b.rejected;
    branches.push_back(std::move(e));
  }
  j["branches"] = std::move(branches);
  return j;
}

inline Json to_json(const Classification& c) {
  Json j;
  j["type"] = to_string(c.type);
  j["detail"] = c.detail;
  j["distinct_configurations"] = c.distinct_configurations;
  j["max_tangency"] = c.max_tangency;
  j["tangent_rotors"] = c.tangent_rotors;
  if (c.leading_variance_fraction) j["leading_variance_fraction"] = *c.leading_variance_fraction;
  if (c.max_spread_deg) j["max_spread_deg"] = *c.max_spread_deg;
  if (c.K) j["K"] = *c.K;
  return j;
}

/// One row per (solution, rotor i >= 2): rotor 1's phase against rotor i's.
inline std::string scatter_csv(const PhaseMatrix& phases, const std::vector<int>& labels) {
  std::string out = "solution_index,theta_1,theta_i,rotor_i,branch\n";
  for (Eigen::Index m = 0; m < phases.rows(); ++m) {
    const int lab = static_cast<std::size_t>(m) < labels.size() ? labels[static_cast<std::size_t>(m)] : kNoise;
    for (Eigen::Index i = 1; i < phases.cols(); ++i) {
      out += std::to_string(m) + "," + fmt_double(phases(m, 0)) + "," + fmt_double(phases(m, i)) + "," +
             std::to_string(i + 1) + "," + std::to_string(lab) + "\n";
    }
  }
  return out;
}

inline std::string prediction_csv(const StarPrediction& p) {
  std::string out = "N,q,vertex,offset_over_pi\n";
  for (const auto& b : p.branches) {
    for (std::size_t v = 0; v < b.offsets.size(); ++v) {
      out += std::to_string(p.N) + "," + std::to_string(b.q) + "," + std::to_string(v + 1) + "," +
             fmt_double(static_cast<double>(b.offset_numerators[v]) / p.N) + "\n";
    }
  }
  return out;
}

// ---- files -----------------------------------------------------------------

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path);
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

inline Json read_json(const std::string& path) { return Json::parse(read_text(path)); }

}  // namespace omnitopo
