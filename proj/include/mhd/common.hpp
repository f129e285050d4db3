#pragma once

#include <Eigen/Dense>

#include <functional>

namespace mhd
{

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vector = Eigen::VectorXd;

/// Where an integrand is being evaluated: the cell, the reference
/// coordinates inside it and the physical point.
struct PointContext
{
  int cell = -1;
  Vec3 ref = Vec3::Zero();
  Vec3 x = Vec3::Zero();
};

// Integrands that may depend on the cell (e.g. a finite element field) or
// only on the physical point (analytic data).
using ScalarSource = std::function<double(const PointContext&)>;
using VectorSource = std::function<Vec3(const PointContext&)>;
using MatrixSource = std::function<Mat3(const PointContext&)>;

// Analytic, time-dependent fields on the physical domain.
using ScalarField = std::function<double(const Vec3&, double)>;
using VectorField = std::function<Vec3(const Vec3&, double)>;
using MatrixField = std::function<Mat3(const Vec3&, double)>;

inline VectorSource at_time(const VectorField& f, double t)
{
  return [f, t](const PointContext& pc) { return f(pc.x, t); };
}

inline ScalarSource at_time(const ScalarField& f, double t)
{
  return [f, t](const PointContext& pc) { return f(pc.x, t); };
}

inline MatrixSource at_time(const MatrixField& f, double t)
{
  return [f, t](const PointContext& pc) { return f(pc.x, t); };
}

} // namespace mhd
