#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "omnitopo/angles.hpp"

namespace omnitopo {

using Vec3 = Eigen::Vector3d;

enum class ChassisFamily {
  regular_polygon,
  platonic,
  prism,
  antiprism,
  bipyramid,
  cupola,
  archimedean,
  quasi_regular,
};

inline std::string_view to_string(ChassisFamily f) {
  switch (f) {
    case ChassisFamily::regular_polygon: return "regular_polygon";
    case ChassisFamily::platonic: return "platonic";
    case ChassisFamily::prism: return "prism";
    case ChassisFamily::antiprism: return "antiprism";
    case ChassisFamily::bipyramid: return "bipyramid";
    case ChassisFamily::cupola: return "cupola";
    case ChassisFamily::archimedean: return "archimedean";
    case ChassisFamily::quasi_regular: return "quasi_regular";
  }
  return "unknown";
}

inline ChassisFamily chassis_family_from_string(std::string_view s) {
  for (auto f : {ChassisFamily::regular_polygon, ChassisFamily::platonic, ChassisFamily::prism,
                 ChassisFamily::antiprism, ChassisFamily::bipyramid, ChassisFamily::cupola,
                 ChassisFamily::archimedean, ChassisFamily::quasi_regular}) {
    if (to_string(f) == s) return f;
  }
  throw std::invalid_argument("unknown chassis family: " + std::string(s));
}

/// Rotor positions of a fixed airframe. Vertex i carries rotor i; the order is
/// part of the contract because phase offsets are reported per vertex.
struct Chassis {
  std::string id;
  ChassisFamily family = ChassisFamily::regular_polygon;
  std::vector<Vec3> vertices;
  double circumradius = 1.0;

  std::size_t size() const { return vertices.size(); }
};

/// Checks the structural invariants. min_rotors defaults to the fully actuated
/// regime; generators for small polygons pass a lower bound explicitly.
inline void validate_chassis(const Chassis& c, std::size_t min_rotors = 6) {
  if (c.vertices.size() < min_rotors) {
    throw std::invalid_argument("chassis '" + c.id + "' has " + std::to_string(c.size()) +
                                " vertices, need at least " + std::to_string(min_rotors));
  }
  if (!(c.circumradius > 0.0) || !std::isfinite(c.circumradius)) {
    throw std::invalid_argument("chassis '" + c.id + "' has non-positive circumradius");
  }
  double max_norm = 0.0;
  for (const auto& p : c.vertices) {
    if (!p.allFinite()) throw std::invalid_argument("chassis '" + c.id + "' has a non-finite vertex");
    const double n = p.norm();
    if (n <= 0.0) throw std::invalid_argument("chassis '" + c.id + "' has a vertex at the origin");
    max_norm = std::max(max_norm, n);
  }
  if (std::abs(max_norm - c.circumradius) > 1e-9 * c.circumradius) {
    throw std::invalid_argument("chassis '" + c.id + "' circumradius does not match its vertices");
  }
  const double min_sep = 1e-9 * c.circumradius;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      if ((c.vertices[i] - c.vertices[j]).norm() <= min_sep) {
        throw std::invalid_argument("chassis '" + c.id + "' has coincident vertices " +
                                    std::to_string(i + 1) + " and " + std::to_string(j + 1));
      }
    }
  }
}

namespace detail {

inline double max_vertex_norm(const std::vector<Vec3>& v) {
  double m = 0.0;
  for (const auto& p : v) m = std::max(m, p.norm());
  return m;
}

inline Chassis finish(std::string id, ChassisFamily family, std::vector<Vec3> vertices,
                      std::size_t min_rotors = 6) {
  const double scale = max_vertex_norm(vertices);
  for (auto& p : vertices) p /= scale;
  Chassis c{std::move(id), family, std::move(vertices), 1.0};
  validate_chassis(c, min_rotors);
  return c;
}

inline std::vector<Vec3> ring(int n, double radius, double z, double phase = 0.0) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double a = phase + 2.0 * kPi * k / n;
    out.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
  }
  return out;
}

inline void append(std::vector<Vec3>& dst, const std::vector<Vec3>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

}  // namespace detail

/// Regular n-gon in the xy-plane, vertex 1 on +x, counter-clockwise.
inline Chassis make_regular_polygon(int n) {
  if (n < 3) throw std::invalid_argument("regular polygon needs n >= 3");
  return detail::finish("CRPol" + std::to_string(n), ChassisFamily::regular_polygon,
                        detail::ring(n, 1.0, 0.0), 3);
}

enum class PlatonicSolid { octahedron, cube, icosahedron, dodecahedron };

inline PlatonicSolid platonic_from_string(std::string_view s) {
  if (s == "octahedron") return PlatonicSolid::octahedron;
  if (s == "cube") return PlatonicSolid::cube;
  if (s == "icosahedron") return PlatonicSolid::icosahedron;
  if (s == "dodecahedron") return PlatonicSolid::dodecahedron;
  throw std::invalid_argument("unknown platonic solid: " + std::string(s));
}

/// Vertex orderings:
///   octahedron    +z, +x, +y, -x, -y, -z (top, equatorial ring, bottom)
///   cube          sign patterns of (x, y, z) in lexicographic order, x slowest
///   icosahedron   (0, ±1, ±phi) and its two cyclic shifts, signs lexicographic
///   dodecahedron  (±1, ±1, ±1), then (0, ±1/phi, ±phi) and its cyclic shifts
inline Chassis make_platonic(PlatonicSolid solid) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v;
  switch (solid) {
    case PlatonicSolid::octahedron:
      v = {Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, 0, 0), Vec3(0, -1, 0), Vec3(0, 0, -1)};
      return detail::finish("COct6", ChassisFamily::platonic, std::move(v));
    case PlatonicSolid::cube:
      for (double sx : {-1.0, 1.0})
        for (double sy : {-1.0, 1.0})
          for (double sz : {-1.0, 1.0}) v.emplace_back(sx, sy, sz);
      return detail::finish("CCub8", ChassisFamily::platonic, std::move(v));
    case PlatonicSolid::icosahedron:
      for (double a : {-1.0, 1.0})
        for (double b : {-phi, phi}) v.emplace_back(0.0, a, b);
      for (double a : {-1.0, 1.0})
        for (double b : {-phi, phi}) v.emplace_back(a, b, 0.0);
      for (double a : {-1.0, 1.0})
        for (double b : {-phi, phi}) v.emplace_back(b, 0.0, a);
      return detail::finish("CIco12", ChassisFamily::platonic, std::move(v));
    case PlatonicSolid::dodecahedron:
      for (double sx : {-1.0, 1.0})
        for (double sy : {-1.0, 1.0})
          for (double sz : {-1.0, 1.0}) v.emplace_back(sx, sy, sz);
      for (double a : {-1.0 / phi, 1.0 / phi})
        for (double b : {-phi, phi}) v.emplace_back(0.0, a, b);
      for (double a : {-1.0 / phi, 1.0 / phi})
        for (double b : {-phi, phi}) v.emplace_back(a, b, 0.0);
      for (double a : {-1.0 / phi, 1.0 / phi})
        for (double b : {-phi, phi}) v.emplace_back(b, 0.0, a);
      return detail::finish("CDod20", ChassisFamily::platonic, std::move(v));
  }
  throw std::invalid_argument("unknown platonic solid");
}

enum class AuxiliarySolid { tri_prism6, pent_bipyramid7, sq_antiprism8, tri_cupola9, cuboctahedron12, hex_prism12 };

inline AuxiliarySolid auxiliary_from_string(std::string_view s) {
  if (s == "tri_prism6") return AuxiliarySolid::tri_prism6;
  if (s == "pent_bipyramid7") return AuxiliarySolid::pent_bipyramid7;
  if (s == "sq_antiprism8") return AuxiliarySolid::sq_antiprism8;
  if (s == "tri_cupola9") return AuxiliarySolid::tri_cupola9;
  if (s == "cuboctahedron12") return AuxiliarySolid::cuboctahedron12;
  if (s == "hex_prism12") return AuxiliarySolid::hex_prism12;
  throw std::invalid_argument("unknown auxiliary solid: " + std::string(s));
}

/// Uniform (unit-edge) textbook solids, centred on their vertex centroid and
/// scaled to unit circumradius.
inline Chassis make_auxiliary(AuxiliarySolid kind) {
  std::vector<Vec3> v;
  switch (kind) {
    case AuxiliarySolid::tri_prism6: {
      const double r = 1.0 / std::sqrt(3.0);
      detail::append(v, detail::ring(3, r, 0.5));
      detail::append(v, detail::ring(3, r, -0.5));
      return detail::finish("CTriPr6", ChassisFamily::prism, std::move(v));
    }
    case AuxiliarySolid::pent_bipyramid7: {
      const double r = 1.0 / (2.0 * std::sin(kPi / 5.0));
      const double h = std::sqrt(1.0 - r * r);
      v.emplace_back(0.0, 0.0, h);
      detail::append(v, detail::ring(5, r, 0.0));
      v.emplace_back(0.0, 0.0, -h);
      return detail::finish("CPentBi7", ChassisFamily::bipyramid, std::move(v));
    }
    case AuxiliarySolid::sq_antiprism8: {
      const double r = 1.0 / std::sqrt(2.0);
      const double h = std::pow(2.0, -0.25);
      detail::append(v, detail::ring(4, r, 0.5 * h));
      detail::append(v, detail::ring(4, r, -0.5 * h, kPi / 4.0));
      return detail::finish("CSqAnti8", ChassisFamily::antiprism, std::move(v));
    }
    case AuxiliarySolid::tri_cupola9: {
      detail::append(v, detail::ring(3, 1.0 / std::sqrt(3.0), std::sqrt(2.0 / 3.0), kPi / 6.0));
      detail::append(v, detail::ring(6, 1.0, 0.0));
      Vec3 centroid = Vec3::Zero();
      for (const auto& p : v) centroid += p;
      centroid /= static_cast<double>(v.size());
      for (auto& p : v) p -= centroid;
      return detail::finish("CTriCup9", ChassisFamily::cupola, std::move(v));
    }
    case AuxiliarySolid::cuboctahedron12:
      for (double a : {-1.0, 1.0})
        for (double b : {-1.0, 1.0}) v.emplace_back(a, b, 0.0);
      for (double a : {-1.0, 1.0})
        for (double b : {-1.0, 1.0}) v.emplace_back(a, 0.0, b);
      for (double a : {-1.0, 1.0})
        for (double b : {-1.0, 1.0}) v.emplace_back(0.0, a, b);
      return detail::finish("CCubOct12", ChassisFamily::archimedean, std::move(v));
    case AuxiliarySolid::hex_prism12:
      detail::append(v, detail::ring(6, 1.0, 0.5));
      detail::append(v, detail::ring(6, 1.0, -0.5));
      return detail::finish("CHexPr12", ChassisFamily::prism, std::move(v));
  }
  throw std::invalid_argument("unknown auxiliary solid");
}

/// Displaces every vertex by a seeded vector drawn uniformly from the ball of
/// radius magnitude * circumradius, then rescales to unit circumradius.
/// magnitude == 0 returns the base geometry unchanged.
inline Chassis make_quasi_regular(const Chassis& base, double magnitude, std::uint64_t seed,
                                  std::optional<std::string> id = std::nullopt) {
  if (!(magnitude >= 0.0 && magnitude < 0.5)) {
    throw std::invalid_argument("quasi-regular magnitude must lie in [0, 0.5)");
  }
  std::vector<Vec3> v = base.vertices;
  if (magnitude > 0.0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double reach = magnitude * base.circumradius;
    for (auto& p : v) {
      Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
      dir.normalize();
      p += dir * (reach * std::cbrt(unif(rng)));
    }
  }
  std::string new_id = id ? *id : "Q" + base.id;
  return detail::finish(std::move(new_id), ChassisFamily::quasi_regular, std::move(v),
                        std::min<std::size_t>(base.size(), 6));
}

/// Default perturbation used for the library's quasi-regular entries.
inline constexpr double kQuasiPolygonMagnitude = 0.1;
inline constexpr double kQuasiCubeMagnitude = 0.05;
inline constexpr std::uint64_t kQuasiSeedBase = 20250;

/// Identifiers of the built-in chassis library (the regular polygons extend to
/// any CRPol<n>, n >= 3, and CQRPol<n>, n >= 6).
inline std::vector<std::string> library_ids() {
  std::vector<std::string> ids;
  for (int n = 6; n <= 20; ++n) ids.push_back("CRPol" + std::to_string(n));
  for (int n = 6; n <= 10; ++n) ids.push_back("CQRPol" + std::to_string(n));
  for (const char* s : {"COct6", "CCub8", "CIco12", "CDod20", "CTriPr6", "CPentBi7", "CQCub8",
                        "CSqAnti8", "CTriCup9", "CCubOct12", "CHexPr12"}) {
    ids.emplace_back(s);
  }
  return ids;
}

namespace detail {

inline std::optional<int> parse_suffix(std::string_view id, std::string_view prefix) {
  if (id.size() <= prefix.size() || id.substr(0, prefix.size()) != prefix) return std::nullopt;
  int n = 0;
  for (char ch : id.substr(prefix.size())) {
    if (ch < '0' || ch > '9') return std::nullopt;
    n = n * 10 + (ch - '0');
    if (n > 100000) return std::nullopt;
  }
  return n;
}

}  // namespace detail

/// Builds a chassis from its library identifier; throws std::invalid_argument
/// for unknown ids.
inline Chassis make_library_chassis(std::string_view id) {
  if (auto n = detail::parse_suffix(id, "CRPol")) return make_regular_polygon(*n);
  if (auto n = detail::parse_suffix(id, "CQRPol")) {
    if (*n < 6) throw std::invalid_argument("quasi-regular polygons start at 6 vertices");
    return make_quasi_regular(make_regular_polygon(*n), kQuasiPolygonMagnitude,
                              kQuasiSeedBase + static_cast<std::uint64_t>(*n), std::string(id));
  }
  if (id == "COct6") return make_platonic(PlatonicSolid::octahedron);
  if (id == "CCub8") return make_platonic(PlatonicSolid::cube);
  if (id == "CIco12") return make_platonic(PlatonicSolid::icosahedron);
  if (id == "CDod20") return make_platonic(PlatonicSolid::dodecahedron);
  if (id == "CQCub8") {
    return make_quasi_regular(make_platonic(PlatonicSolid::cube), kQuasiCubeMagnitude,
                              kQuasiSeedBase + 8, "CQCub8");
  }
  if (id == "CTriPr6") return make_auxiliary(AuxiliarySolid::tri_prism6);
  if (id == "CPentBi7") return make_auxiliary(AuxiliarySolid::pent_bipyramid7);
  if (id == "CSqAnti8") return make_auxiliary(AuxiliarySolid::sq_antiprism8);
  if (id == "CTriCup9") return make_auxiliary(AuxiliarySolid::tri_cupola9);
  if (id == "CCubOct12") return make_auxiliary(AuxiliarySolid::cuboctahedron12);
  if (id == "CHexPr12") return make_auxiliary(AuxiliarySolid::hex_prism12);
  throw std::invalid_argument("unknown chassis id: " + std::string(id));
}

}  // namespace omnitopo
