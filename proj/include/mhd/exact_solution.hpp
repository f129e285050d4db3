#pragma once

#include "mhd/common.hpp"

namespace mhd
{

/// Analytic solution of the continuous MHD system together with the
/// source terms that make it exact.
class ExactSolution
{
public:
  virtual ~ExactSolution() = default;

  virtual Vec3 velocity(const Vec3& x, double t) const = 0;
  /// Row i is the gradient of component i.
  virtual Mat3 velocity_gradient(const Vec3& x, double t) const = 0;
  virtual double pressure(const Vec3& x, double t) const = 0;
  virtual Vec3 magnetic(const Vec3& x, double t) const = 0;
  virtual Vec3 magnetic_curl(const Vec3& x, double t) const = 0;
  virtual Vec3 electric(const Vec3& x, double t) const = 0;
  /// Momentum forcing f.
  virtual Vec3 momentum_source(const Vec3& x, double t) const = 0;
  /// Faraday defect g = dB/dt + curl E.
  virtual Vec3 faraday_source(const Vec3& x, double t) const = 0;

  // Adapters; the returned functions refer to this object.
  VectorField u() const;
  MatrixField grad_u() const;
  ScalarField p() const;
  VectorField b() const;
  VectorField curl_b() const;
  VectorField e() const;
  VectorField f() const;
  VectorField g() const;
};

/// u = curl(0, 0, phi(x) phi(y) phi(z)) cos t with phi(s) = s^2 (1 - s)^2,
/// p = (x - 1/2)(y - 1/2)(z - 1/2) cos t,
/// B = (pi sin(pi x) cos(pi y), -pi cos(pi x) sin(pi y), 0) cos t,
/// E = Rm^{-1} curl B - u x B.
class ManufacturedSolution final : public ExactSolution
{
public:
  ManufacturedSolution(double re, double rm, double s);

  Vec3 velocity(const Vec3& x, double t) const override;
  Mat3 velocity_gradient(const Vec3& x, double t) const override;
  double pressure(const Vec3& x, double t) const override;
  Vec3 magnetic(const Vec3& x, double t) const override;
  Vec3 magnetic_curl(const Vec3& x, double t) const override;
  Vec3 electric(const Vec3& x, double t) const override;
  Vec3 momentum_source(const Vec3& x, double t) const override;
  Vec3 faraday_source(const Vec3& x, double t) const override;

  /// Gradient of B, row i is the gradient of component i.
  Mat3 magnetic_gradient(const Vec3& x, double t) const;
  /// Vector Laplacian of u.
  Vec3 velocity_laplacian(const Vec3& x, double t) const;

private:
  double re_, rm_, s_;
};

} // namespace mhd
