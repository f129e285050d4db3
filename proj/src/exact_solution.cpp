#include "mhd/exact_solution.hpp"

#include <cmath>
#include <numbers>

namespace mhd
{

VectorField ExactSolution::u() const
{
  return [this](const Vec3& x, double t) { return velocity(x, t); };
}
MatrixField ExactSolution::grad_u() const
{
  return [this](const Vec3& x, double t) { return velocity_gradient(x, t); };
}
ScalarField ExactSolution::p() const
{
  return [this](const Vec3& x, double t) { return pressure(x, t); };
}
VectorField ExactSolution::b() const
{
  return [this](const Vec3& x, double t) { return magnetic(x, t); };
}
VectorField ExactSolution::curl_b() const
{
  return [this](const Vec3& x, double t) { return magnetic_curl(x, t); };
}
VectorField ExactSolution::e() const
{
  return [this](const Vec3& x, double t) { return electric(x, t); };
}
VectorField ExactSolution::f() const
{
  return [this](const Vec3& x, double t) { return momentum_source(x, t); };
}
VectorField ExactSolution::g() const
{
  return [this](const Vec3& x, double t) { return faraday_source(x, t); };
}

namespace
{

constexpr double kPi = std::numbers::pi;

// phi(s) = s^2 (1 - s)^2 and its derivatives.
struct Phi
{
  double v, d1, d2, d3;
  explicit Phi(double s)
      : v(s * s * (1 - s) * (1 - s)), d1(2 * s * (1 - s) * (1 - 2 * s)),
        d2(2 - 12 * s + 12 * s * s), d3(24 * s - 12)
  {
  }
};

} // namespace

ManufacturedSolution::ManufacturedSolution(double re, double rm, double s)
    : re_(re), rm_(rm), s_(s)
{
}

Vec3 ManufacturedSolution::velocity(const Vec3& x, double t) const
{
  const Phi a(x[0]), b(x[1]), c(x[2]);
  return Vec3(a.v * b.d1 * c.v, -a.d1 * b.v * c.v, 0.0) * std::cos(t);
}

Mat3 ManufacturedSolution::velocity_gradient(const Vec3& x, double t) const
{
  const Phi a(x[0]), b(x[1]), c(x[2]);
  Mat3 g;
  g << a.d1 * b.d1 * c.v, a.v * b.d2 * c.v, a.v * b.d1 * c.d1,
      -a.d2 * b.v * c.v, -a.d1 * b.d1 * c.v, -a.d1 * b.v * c.d1,
      0, 0, 0;
  return g * std::cos(t);
}

Vec3 ManufacturedSolution::velocity_laplacian(const Vec3& x, double t) const
{
  const Phi a(x[0]), b(x[1]), c(x[2]);
  return Vec3(a.d2 * b.d1 * c.v + a.v * b.d3 * c.v + a.v * b.d1 * c.d2,
              -(a.d3 * b.v * c.v + a.d1 * b.d2 * c.v + a.d1 * b.v * c.d2), 0.0)
         * std::cos(t);
}

double ManufacturedSolution::pressure(const Vec3& x, double t) const
{
  return (x[0] - 0.5) * (x[1] - 0.5) * (x[2] - 0.5) * std::cos(t);
}

Vec3 ManufacturedSolution::magnetic(const Vec3& x, double t) const
{
  const double sx = std::sin(kPi * x[0]), cx = std::cos(kPi * x[0]);
  const double sy = std::sin(kPi * x[1]), cy = std::cos(kPi * x[1]);
  return Vec3(kPi * sx * cy, -kPi * cx * sy, 0.0) * std::cos(t);
}

Mat3 ManufacturedSolution::magnetic_gradient(const Vec3& x, double t) const
{
  const double sx = std::sin(kPi * x[0]), cx = std::cos(kPi * x[0]);
  const double sy = std::sin(kPi * x[1]), cy = std::cos(kPi * x[1]);
  const double p2 = kPi * kPi;
  Mat3 g;
  g << p2 * cx * cy, -p2 * sx * sy, 0,
      p2 * sx * sy, -p2 * cx * cy, 0,
      0, 0, 0;
  return g * std::cos(t);
}

Vec3 ManufacturedSolution::magnetic_curl(const Vec3& x, double t) const
{
  const double sx = std::sin(kPi * x[0]), sy = std::sin(kPi * x[1]);
  return Vec3(0.0, 0.0, 2 * kPi * kPi * sx * sy) * std::cos(t);
}

Vec3 ManufacturedSolution::electric(const Vec3& x, double t) const
{
  return magnetic_curl(x, t) / rm_ - velocity(x, t).cross(magnetic(x, t));
}

Vec3 ManufacturedSolution::momentum_source(const Vec3& x, double t) const
{
  const Vec3 u = velocity(x, t);
  const Vec3 u_t = -velocity(x, 0.0) * std::sin(t);
  const Vec3 grad_p = Vec3((x[1] - 0.5) * (x[2] - 0.5), (x[0] - 0.5) * (x[2] - 0.5),
                           (x[0] - 0.5) * (x[1] - 0.5))
                      * std::cos(t);
  const Vec3 lorentz = magnetic_curl(x, t).cross(magnetic(x, t)) / rm_;
  return u_t + velocity_gradient(x, t) * u - velocity_laplacian(x, t) / re_
         - s_ * lorentz + grad_p;
}

Vec3 ManufacturedSolution::faraday_source(const Vec3& x, double t) const
{
  const Vec3 b = magnetic(x, t);
  const Vec3 u = velocity(x, t);
  const Vec3 b_t = -magnetic(x, 0.0) * std::sin(t);
  // curl curl B = 2 pi^2 B for this field; curl(u x B) = (B.grad)u - (u.grad)B
  // because both fields are solenoidal.
  const Vec3 curl_curl_b = 2 * kPi * kPi * b;
  const Vec3 curl_u_cross_b = velocity_gradient(x, t) * b - magnetic_gradient(x, t) * u;
  return b_t + curl_curl_b / rm_ - curl_u_cross_b;
}

} // namespace mhd
