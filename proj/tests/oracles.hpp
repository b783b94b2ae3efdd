#pragma once

// Reference data and independent numerical oracles. Nothing here calls the
// library's SVD or gradient code, so tests built on these helpers check the
// library against separate arithmetic.

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "omnitopo/chassis.hpp"

namespace oracle {

using omnitopo::Vec3;

/// Published polygon branch rows: numerators of delta_i in units of pi/N,
/// ordered by delta_2.
struct PolygonRows {
  int N;
  std::vector<std::vector<int>> rows;
};

inline const std::vector<PolygonRows>& polygon_table() {
  static const std::vector<PolygonRows> t = {
      {6, {{0, 3, 0, 3, 0, 3}}},
      {7, {{0, 3, 6, 2, 5, 1, 4}, {0, 4, 1, 5, 2, 6, 3}}},
      {8, {{0, 3, 6, 1, 4, 7, 2, 5}, {0, 4, 0, 4, 0, 4, 0, 4}, {0, 5, 2, 7, 4, 1, 6, 3}}},
      {9,
       {{0, 3, 6, 0, 3, 6, 0, 3, 6},
        {0, 4, 8, 3, 7, 2, 6, 1, 5},
        {0, 5, 1, 6, 2, 7, 3, 8, 4},
        {0, 6, 3, 0, 6, 3, 0, 6, 3}}},
      {10,
       {{0, 3, 6, 9, 2, 5, 8, 1, 4, 7},
        {0, 4, 8, 2, 6, 0, 4, 8, 2, 6},
        {0, 5, 0, 5, 0, 5, 0, 5, 0, 5},
        {0, 6, 2, 8, 4, 0, 6, 2, 8, 4},
        {0, 7, 4, 1, 8, 5, 2, 9, 6, 3}}},
  };
  return t;
}

/// Published spreads (degrees) of the nonagon and decagon branches.
inline constexpr double kNonagonMaxSpreadDeg = 7.72;
inline constexpr double kDecagonMaxSpreadDeg = 25.80;
inline constexpr double kHendecagonMinSpreadDeg = 51.0;

inline std::vector<double> row_radians(const std::vector<int>& num, int den) {
  std::vector<double> out;
  for (int k : num) out.push_back(std::numbers::pi * k / den);
  return out;
}

/// Octahedron in a face-up frame: triangle (0, 120, 240 deg) at z = +1/sqrt3,
/// triangle (60, 180, 300 deg) at z = -1/sqrt3. No vertex sits on a pole, so
/// the tangent bases are unambiguous.
inline omnitopo::Chassis face_up_octahedron() {
  const double z = 1.0 / std::sqrt(3.0), r = std::sqrt(2.0 / 3.0);
  omnitopo::Chassis c;
  c.id = "COct6-face-up";
  c.family = omnitopo::ChassisFamily::platonic;
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 3.0;
    c.vertices.emplace_back(r * std::cos(a), r * std::sin(a), z);
  }
  for (int k = 0; k < 3; ++k) {
    const double a = std::numbers::pi / 3.0 + 2.0 * std::numbers::pi * k / 3.0;
    c.vertices.emplace_back(r * std::cos(a), r * std::sin(a), -z);
  }
  c.circumradius = 1.0;
  return c;
}

inline std::vector<std::vector<double>> octahedron_rows() { return {row_radians({0, 0, 0, 1, 1, 1}, 2)}; }

/// Cube with vertices (+-1, +-1, +-1)/sqrt3 in the order
/// ---, +--, --+, +-+, -+-, ++-, -++, +++.
inline omnitopo::Chassis reference_cube() {
  const int s[8][3] = {{-1, -1, -1}, {1, -1, -1}, {-1, -1, 1}, {1, -1, 1},
                       {-1, 1, -1},  {1, 1, -1},  {-1, 1, 1},  {1, 1, 1}};
  omnitopo::Chassis c;
  c.id = "CCub8-reference";
  c.family = omnitopo::ChassisFamily::platonic;
  for (const auto& v : s) c.vertices.push_back(Vec3(v[0], v[1], v[2]) / std::sqrt(3.0));
  c.circumradius = 1.0;
  return c;
}

/// The three published cube rows, in units of pi.
inline std::vector<std::vector<double>> cube_rows() {
  auto row = [](std::vector<double> f) {
    for (auto& x : f) x *= std::numbers::pi;
    return f;
  };
  return {row({0, 0, 0.5, 0.5, 0, 0, 0.5, 0.5}),
          row({0, 2.0 / 3, 2.0 / 3, 0, 1.0 / 6, 0.5, 0.5, 1.0 / 6}),
          row({0, 5.0 / 6, 1.0 / 3, 0.5, 1.0 / 3, 0.5, 0, 5.0 / 6})};
}

/// Grasp matrix written out entry by entry.
inline Eigen::MatrixXd grasp(const std::vector<Vec3>& p, const std::vector<Vec3>& d, double L) {
  Eigen::MatrixXd A(6, static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    A(0, c) = d[i].x();
    A(1, c) = d[i].y();
    A(2, c) = d[i].z();
    A(3, c) = (p[i].y() * d[i].z() - p[i].z() * d[i].y()) / L;
    A(4, c) = (p[i].z() * d[i].x() - p[i].x() * d[i].z()) / L;
    A(5, c) = (p[i].x() * d[i].y() - p[i].y() * d[i].x()) / L;
  }
  return A;
}

/// Singular values, descending, from the eigenvalues of A A^T.
inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& A) {
  const Eigen::MatrixXd G = A * A.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  Eigen::VectorXd ev = es.eigenvalues().reverse();
  for (Eigen::Index k = 0; k < ev.size(); ++k) ev[k] = std::sqrt(std::max(0.0, ev[k]));
  return ev;
}

inline double kappa(const Eigen::VectorXd& s) { return s[0] / s[s.size() - 1]; }

inline double log_volume(const std::vector<Vec3>& p, const std::vector<Vec3>& d, double L, double eps = 1e-9) {
  const auto s = singular_values(grasp(p, d, L));
  double j = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) j -= std::log(s[k] + eps);
  return j;
}

/// Central differences of log_volume in the raw coordinates of every d_i.
inline std::vector<Vec3> fd_gradient(const std::vector<Vec3>& p, std::vector<Vec3> d, double L, double h = 1e-6) {
  std::vector<Vec3> g(d.size(), Vec3::Zero());
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const double x = d[i][k];
      d[i][k] = x + h;
      const double fp = log_volume(p, d, L);
      d[i][k] = x - h;
      const double fm = log_volume(p, d, L);
      d[i][k] = x;
      g[i][k] = (fp - fm) / (2.0 * h);
    }
  }
  return g;
}

inline Eigen::Matrix3d rotation(double ax, double ay, double az) {
  return (Eigen::AngleAxisd(az, Vec3::UnitZ()) * Eigen::AngleAxisd(ay, Vec3::UnitY()) *
          Eigen::AngleAxisd(ax, Vec3::UnitX()))
      .toRotationMatrix();
}

}  // namespace oracle
