#pragma once

#include "mhd/common.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace mhd
{

/// Quadrature on the reference tetrahedron {x, y, z >= 0, x + y + z <= 1}.
struct QuadratureRule
{
  std::vector<Vec3> points;
  std::vector<double> weights;
  /// Highest total polynomial degree integrated exactly.
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Rule on a lower-dimensional reference simplex: the unit interval
/// (dim 1) or the triangle {s, r >= 0, s + r <= 1} (dim 2).
struct SimplexRule
{
  int dim = 0;
  /// Reference coordinates, `dim` per point.
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Grundmann-Moller rule exact to at least @p degree (1 <= degree <= 10).
/// Cached; the returned reference lives for the program lifetime.
const QuadratureRule& quadrature(int degree);

/// Grundmann-Moller rule on the interval or triangle (1 <= degree <= 15).
const SimplexRule& simplex_quadrature(int dim, int degree);

/// Assembly quadrature degrees.
inline constexpr int kMassDegree = 4;
inline constexpr int kTrilinearDegree = 6;
inline constexpr int kErrorDegree = 8;

enum class Family
{
  LagrangeP1,
  LagrangeP2,
  Nedelec2,
  BDM1,
};

std::string_view family_name(Family family);
int family_dimension(Family family);
bool is_vector_family(Family family);

/// Basis values on the reference tetrahedron.
///
/// Lagrange families fill `scalar` and `gradient`; the H(curl) and H(div)
/// families fill `vector`, `curl` and `divergence`. All arrays are indexed
/// [point * num_dofs + dof].
///
/// Dof layout:
///  - P1: vertex i.
///  - P2: vertices 0..3, then the midpoints of kTetEdges.
///  - Nedelec2: dof 2k + m is the moment int_0^1 (phi . t) q_m(s) ds on edge
///    k = (a, b), t = x_b - x_a, x = x_a + s t, q_0 = 1, q_1 = 2s - 1.
///  - BDM1: dof 3f + m is the moment int (phi . n) q_m dA on face f (opposite
///    vertex f) with sorted vertices (a, b, c), n = (x_b - x_a) x (x_c - x_a),
///    dA the parameter measure of the unit triangle, q_0 = 1,
///    q_1 = mu_b - mu_a, q_2 = mu_c - mu_a (face barycentrics mu).
struct ReferenceTable
{
  Family family = Family::LagrangeP1;
  int num_points = 0;
  int num_dofs = 0;
  std::vector<double> scalar;
  std::vector<Vec3> gradient;
  std::vector<Vec3> vector;
  std::vector<Vec3> curl;
  std::vector<double> divergence;

  int index(int point, int dof) const { return point * num_dofs + dof; }
};

ReferenceTable tabulate(Family family, std::span<const Vec3> points);

/// Barycentric coordinates of a reference point.
std::array<double, 4> barycentric(const Vec3& xhat);
/// Constant gradients of the reference barycentric coordinates.
const std::array<Vec3, 4>& barycentric_gradients();
/// Reference vertex coordinates.
const std::array<Vec3, 4>& reference_vertices();

/// Covariant (H(curl)) Piola map: phi = J^{-T} phihat and
/// curl phi = J curlhat / det J. det J may be negative; it is only
/// required to be nonzero.
struct HcurlValue
{
  Vec3 value;
  Vec3 curl;
};
HcurlValue piola_hcurl(const Mat3& jacobian, const Mat3& inverse_transpose,
                       double det, const Vec3& ref_value,
                       const Vec3& ref_curl);

/// Contravariant (H(div)) Piola map: phi = J phihat / det J and
/// div phi = divhat / det J.
struct HdivValue
{
  Vec3 value;
  double divergence;
};
HdivValue piola_hdiv(const Mat3& jacobian, double det, const Vec3& ref_value,
                     double ref_divergence);

} // namespace mhd
