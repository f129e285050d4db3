#include "mhd/norms.hpp"

#include "mhd/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mhd
{

namespace
{

// Sums body(ev values, q, x) * weight over all quadrature points.
template <class Body>
double integrate(const FEField& fh, int degree, Body&& body)
{
  const FunctionSpace& space = *fh.space;
  const QuadratureRule& rule = quadrature(degree);
  const ReferenceTable table = tabulate(space.family(), rule.points);
  ElementValues ev;
  FieldValues fv;
  double sum = 0.0;
  for (int c = 0; c < space.mesh().num_cells(); ++c)
  {
    space.evaluate_basis(c, table, rule.points, rule.weights, ev);
    contract(space, ev, fh.coeffs, c, fv);
    for (int q = 0; q < ev.num_points; ++q)
      sum += ev.weights[q] * body(fv, q, ev.x[q]);
  }
  return sum;
}

// Grundmann-Moller weights can be negative, so a vanishing integral of a
// square may come out slightly below zero.
double root(double squared)
{
  return std::sqrt(std::max(0.0, squared));
}

} // namespace

double l2_error(const FEField& fh, const VectorField& f, double t, int degree)
{
  if (fh.space->value_dim() != 3)
    throw std::invalid_argument("l2_error: vector field on a scalar space");
  return root(integrate(fh, degree, [&](const FieldValues& fv, int q, const Vec3& x) {
    const Vec3 e = f ? Vec3(fv.value[q] - f(x, t)) : fv.value[q];
    return e.squaredNorm();
  }));
}

double l2_error(const FEField& fh, const ScalarField& f, double t, int degree)
{
  if (fh.space->value_dim() != 1)
    throw std::invalid_argument("l2_error: scalar field on a vector space");
  return root(integrate(fh, degree, [&](const FieldValues& fv, int q, const Vec3& x) {
    const double e = f ? fv.scalar[q] - f(x, t) : fv.scalar[q];
    return e * e;
  }));
}

double h1_seminorm_error(const FEField& uh, const MatrixField& grad_u, double t,
                         int degree)
{
  if (uh.space->family() != Family::LagrangeP2)
    throw std::invalid_argument("h1_seminorm_error: needs a V_h field");
  return root(integrate(uh, degree, [&](const FieldValues& fv, int q, const Vec3& x) {
    const Mat3 e = grad_u ? Mat3(fv.jacobian[q] - grad_u(x, t)) : fv.jacobian[q];
    return e.squaredNorm();
  }));
}

double curl_error(const FEField& fh, const VectorField& curl, double t, int degree)
{
  const Family fam = fh.space->family();
  if (fam != Family::Nedelec2 && fam != Family::LagrangeP2)
    throw std::invalid_argument("curl_error: field has no curl");
  return root(integrate(fh, degree, [&](const FieldValues& fv, int q, const Vec3& x) {
    const Vec3 e = curl ? Vec3(fv.curl[q] - curl(x, t)) : fv.curl[q];
    return e.squaredNorm();
  }));
}

double l2_distance(const FEField& a, const FEField& b)
{
  if (a.space.get() != b.space.get())
    throw std::invalid_argument("l2_distance: fields live in different spaces");
  return l2_norm(FEField(a.space, a.coeffs - b.coeffs));
}

double l2_norm(const FEField& a)
{
  return a.space->value_dim() == 1 ? l2_error(a, ScalarField{}, 0.0, kMassDegree)
                                   : l2_error(a, VectorField{}, 0.0, kMassDegree);
}

double mass_norm(const SparseMatrix& mass, const Vector& x)
{
  return std::sqrt(std::max(0.0, x.dot(mass.multiply(x))));
}

} // namespace mhd
