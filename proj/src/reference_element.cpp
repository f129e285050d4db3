#include "mhd/reference_element.hpp"
#include "mhd/mesh.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace mhd
{

namespace
{

// Weak compositions of `total` into `parts` nonnegative integers.
void compositions(int total, int parts, std::vector<int>& current,
                  std::vector<std::vector<int>>& out)
{
  if (parts == 1)
  {
    current.push_back(total);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int i = 0; i <= total; ++i)
  {
    current.push_back(i);
    compositions(total - i, parts - 1, current, out);
    current.pop_back();
  }
}

long double factorial(int n)
{
  long double f = 1;
  for (int i = 2; i <= n; ++i)
    f *= i;
  return f;
}

// Grundmann-Moller rule of index s on the n-simplex, exact for degree 2s+1.
// Returns barycentric points (n+1 coordinates each) and weights summing to
// the simplex volume 1/n!.
void grundmann_moller(int n, int s, std::vector<std::vector<double>>& bary,
                      std::vector<double>& weights)
{
  const int d = 2 * s + 1;
  for (int i = 0; i <= s; ++i)
  {
    long double w = (i % 2 == 0 ? 1.0L : -1.0L)
                    * std::pow(2.0L, -2 * s)
                    * std::pow(static_cast<long double>(d + n - 2 * i), d)
                    / (factorial(i) * factorial(d + n - i));
    std::vector<std::vector<int>> betas;
    std::vector<int> current;
    compositions(s - i, n + 1, current, betas);
    for (const auto& beta : betas)
    {
      std::vector<double> lam(n + 1);
      for (int j = 0; j <= n; ++j)
        lam[j] = static_cast<double>((2.0L * beta[j] + 1) / (d + n - 2 * i));
      bary.push_back(std::move(lam));
      weights.push_back(static_cast<double>(w));
    }
  }
}

int gm_index(int degree) { return degree <= 1 ? 0 : (degree) / 2; }

std::vector<QuadratureRule> build_tet_rules()
{
  std::vector<QuadratureRule> rules(11);
  for (int degree = 1; degree <= 10; ++degree)
  {
    const int s = gm_index(degree);
    std::vector<std::vector<double>> bary;
    QuadratureRule& rule = rules[degree];
    grundmann_moller(3, s, bary, rule.weights);
    for (const auto& lam : bary)
      rule.points.emplace_back(lam[1], lam[2], lam[3]);
    rule.degree = 2 * s + 1;
  }
  return rules;
}

std::vector<SimplexRule> build_simplex_rules(int dim)
{
  std::vector<SimplexRule> rules(16);
  for (int degree = 1; degree <= 15; ++degree)
  {
    const int s = gm_index(degree);
    std::vector<std::vector<double>> bary;
    SimplexRule& rule = rules[degree];
    rule.dim = dim;
    grundmann_moller(dim, s, bary, rule.weights);
    for (const auto& lam : bary)
      for (int k = 1; k <= dim; ++k)
        rule.points.push_back(lam[k]);
    rule.degree = 2 * s + 1;
  }
  return rules;
}

} // namespace

const QuadratureRule& quadrature(int degree)
{
  static const std::vector<QuadratureRule> rules = build_tet_rules();
  if (degree < 1 || degree > 10)
    throw std::invalid_argument("quadrature: unsupported degree "
                                + std::to_string(degree));
  return rules[degree];
}

const SimplexRule& simplex_quadrature(int dim, int degree)
{
  static const std::vector<SimplexRule> edge_rules = build_simplex_rules(1);
  static const std::vector<SimplexRule> face_rules = build_simplex_rules(2);
  if (degree < 1 || degree > 15)
    throw std::invalid_argument("simplex_quadrature: unsupported degree");
  if (dim == 1)
    return edge_rules[degree];
  if (dim == 2)
    return face_rules[degree];
  throw std::invalid_argument("simplex_quadrature: dim must be 1 or 2");
}

std::string_view family_name(Family family)
{
  switch (family)
  {
  case Family::LagrangeP1:
    return "Lagrange-P1";
  case Family::LagrangeP2:
    return "Lagrange-P2";
  case Family::Nedelec2:
    return "Nedelec2-deg1";
  case Family::BDM1:
    return "BDM-deg1";
  }
  throw std::invalid_argument("unknown element family");
}

int family_dimension(Family family)
{
  switch (family)
  {
  case Family::LagrangeP1:
    return 4;
  case Family::LagrangeP2:
    return 10;
  case Family::Nedelec2:
  case Family::BDM1:
    return 12;
  }
  throw std::invalid_argument("unknown element family");
}

bool is_vector_family(Family family)
{
  return family == Family::Nedelec2 || family == Family::BDM1;
}

std::array<double, 4> barycentric(const Vec3& xhat)
{
  return {1.0 - xhat[0] - xhat[1] - xhat[2], xhat[0], xhat[1], xhat[2]};
}

const std::array<Vec3, 4>& barycentric_gradients()
{
  static const std::array<Vec3, 4> grads = {
      Vec3(-1, -1, -1), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  return grads;
}

const std::array<Vec3, 4>& reference_vertices()
{
  static const std::array<Vec3, 4> verts = {
      Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  return verts;
}

ReferenceTable tabulate(Family family, std::span<const Vec3> points)
{
  ReferenceTable t;
  t.family = family;
  t.num_points = static_cast<int>(points.size());
  t.num_dofs = family_dimension(family);
  const std::size_t n = static_cast<std::size_t>(t.num_points) * t.num_dofs;
  const auto& g = barycentric_gradients();

  if (!is_vector_family(family))
  {
    t.scalar.resize(n);
    t.gradient.resize(n);
  }
  else
  {
    t.vector.resize(n);
    t.curl.resize(n);
    t.divergence.resize(n);
  }

  for (int q = 0; q < t.num_points; ++q)
  {
    const auto lam = barycentric(points[q]);
    switch (family)
    {
    case Family::LagrangeP1:
      for (int i = 0; i < 4; ++i)
      {
        t.scalar[t.index(q, i)] = lam[i];
        t.gradient[t.index(q, i)] = g[i];
      }
      break;
    case Family::LagrangeP2:
      for (int i = 0; i < 4; ++i)
      {
        t.scalar[t.index(q, i)] = lam[i] * (2.0 * lam[i] - 1.0);
        t.gradient[t.index(q, i)] = (4.0 * lam[i] - 1.0) * g[i];
      }
      for (int k = 0; k < 6; ++k)
      {
        const int a = kTetEdges[k][0], b = kTetEdges[k][1];
        t.scalar[t.index(q, 4 + k)] = 4.0 * lam[a] * lam[b];
        t.gradient[t.index(q, 4 + k)] = 4.0 * (lam[a] * g[b] + lam[b] * g[a]);
      }
      break;
    case Family::Nedelec2:
      // Whitney form plus the gradient of the edge bubble.
      for (int k = 0; k < 6; ++k)
      {
        const int a = kTetEdges[k][0], b = kTetEdges[k][1];
        const int i0 = t.index(q, 2 * k), i1 = t.index(q, 2 * k + 1);
        t.vector[i0] = lam[a] * g[b] - lam[b] * g[a];
        t.curl[i0] = 2.0 * g[a].cross(g[b]);
        t.divergence[i0] = 0.0;
        t.vector[i1] = -3.0 * (lam[a] * g[b] + lam[b] * g[a]);
        t.curl[i1] = Vec3::Zero();
        t.divergence[i1] = -6.0 * g[a].dot(g[b]);
      }
      break;
    case Family::BDM1:
      // w_r = lambda_r (grad lambda_s x grad lambda_t) for the cyclic order
      // (a, b, c) of the face has unit normal moment density mu_r on its own
      // face and none on the others; the coefficients invert the 3x3
      // moment matrix.
      for (int f = 0; f < 4; ++f)
      {
        const auto& fv = kTetFaces[f];
        std::array<Vec3, 3> w, wcurl;
        std::array<double, 3> wdiv{};
        for (int r = 0; r < 3; ++r)
        {
          const int vr = fv[r], vs = fv[(r + 1) % 3], vt = fv[(r + 2) % 3];
          const Vec3 c = g[vs].cross(g[vt]);
          w[r] = lam[vr] * c;
          wcurl[r] = g[vr].cross(c);
          wdiv[r] = g[vr].dot(c);
        }
        static constexpr double coeff[3][3] = {
            {2.0, 2.0, 2.0}, {-8.0, 16.0, -8.0}, {-8.0, -8.0, 16.0}};
        for (int m = 0; m < 3; ++m)
        {
          const int i = t.index(q, 3 * f + m);
          t.vector[i] = Vec3::Zero();
          t.curl[i] = Vec3::Zero();
          t.divergence[i] = 0.0;
          for (int r = 0; r < 3; ++r)
          {
            t.vector[i] += coeff[m][r] * w[r];
            t.curl[i] += coeff[m][r] * wcurl[r];
            t.divergence[i] += coeff[m][r] * wdiv[r];
          }
        }
      }
      break;
    }
  }
  return t;
}

namespace
{
void check_det(double det)
{
  if (!(std::abs(det) > 1e-300) || !std::isfinite(det))
    throw std::invalid_argument("piola: degenerate Jacobian");
}
} // namespace

HcurlValue piola_hcurl(const Mat3& jacobian, const Mat3& inverse_transpose,
                       double det, const Vec3& ref_value, const Vec3& ref_curl)
{
  check_det(det);
  return {inverse_transpose * ref_value, jacobian * ref_curl / det};
}

HdivValue piola_hdiv(const Mat3& jacobian, double det, const Vec3& ref_value,
                     double ref_divergence)
{
  check_det(det);
  return {jacobian * ref_value / det, ref_divergence / det};
}

} // namespace mhd
