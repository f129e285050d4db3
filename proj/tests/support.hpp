#pragma once

#include "mhd/common.hpp"

#include <array>
#include <cmath>
#include <random>
#include <vector>

namespace testing
{

using mhd::Vec3;

inline double factorial(int n)
{
  double f = 1;
  for (int i = 2; i <= n; ++i)
    f *= i;
  return f;
}

/// Closed form of int lambda_0^a lambda_1^b lambda_2^c lambda_3^d over a
/// tetrahedron of volume V.
inline double simplex_monomial(int a, int b, int c, int d, double volume)
{
  return 6.0 * volume * factorial(a) * factorial(b) * factorial(c) * factorial(d)
         / factorial(a + b + c + d + 3);
}

/// Three-point Gauss-Legendre rule on [0, 1], exact to degree 5.
inline const std::array<std::pair<double, double>, 3>& gauss3()
{
  static const double r = std::sqrt(0.6);
  static const std::array<std::pair<double, double>, 3> rule = {
      {{0.5 * (1 - r), 5.0 / 18}, {0.5, 8.0 / 18}, {0.5 * (1 + r), 5.0 / 18}}};
  return rule;
}

/// Edge-midpoint rule on the unit triangle, exact to degree 2. Points as
/// face barycentrics (mu_a, mu_b, mu_c), weights sum to 1/2.
inline const std::array<std::array<double, 3>, 3>& triangle_midpoints()
{
  static const std::array<std::array<double, 3>, 3> pts = {
      {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}};
  return pts;
}

inline Vec3 random_point_in_tet(std::mt19937& rng)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<double, 4> w;
  double sum = 0;
  for (double& x : w)
  {
    x = -std::log(u(rng) + 1e-300);
    sum += x;
  }
  return Vec3(w[1] / sum, w[2] / sum, w[3] / sum);
}

/// Random polynomial vector field of total degree <= degree.
struct RandomPolyField
{
  int degree = 1;
  std::vector<std::array<int, 3>> exponents;
  std::vector<Vec3> coeffs;

  RandomPolyField(int deg, std::mt19937& rng) : degree(deg)
  {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i <= deg; ++i)
      for (int j = 0; i + j <= deg; ++j)
        for (int k = 0; i + j + k <= deg; ++k)
        {
          exponents.push_back({i, j, k});
          coeffs.emplace_back(u(rng), u(rng), u(rng));
        }
  }

  Vec3 operator()(const Vec3& x) const
  {
    Vec3 v = Vec3::Zero();
    for (std::size_t m = 0; m < exponents.size(); ++m)
      v += coeffs[m] * std::pow(x[0], exponents[m][0]) * std::pow(x[1], exponents[m][1])
           * std::pow(x[2], exponents[m][2]);
    return v;
  }

  /// Row i is the gradient of component i.
  mhd::Mat3 jacobian(const Vec3& x) const
  {
    mhd::Mat3 j = mhd::Mat3::Zero();
    for (std::size_t m = 0; m < exponents.size(); ++m)
      for (int d = 0; d < 3; ++d)
      {
        const int e = exponents[m][d];
        if (e == 0)
          continue;
        double term = e;
        for (int k = 0; k < 3; ++k)
          term *= std::pow(x[k], k == d ? e - 1 : exponents[m][k]);
        j.col(d) += coeffs[m] * term;
      }
    return j;
  }

  Vec3 curl(const Vec3& x) const
  {
    const mhd::Mat3 j = jacobian(x);
    return Vec3(j(2, 1) - j(1, 2), j(0, 2) - j(2, 0), j(1, 0) - j(0, 1));
  }

  double divergence(const Vec3& x) const { return jacobian(x).trace(); }

  mhd::VectorField field() const
  {
    return [f = *this](const Vec3& x, double) { return f(x); };
  }
};

} // namespace testing
