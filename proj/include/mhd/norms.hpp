#pragma once

#include "mhd/function_space.hpp"
#include "mhd/reference_element.hpp"

namespace mhd
{

/// ||f_h - f|| over the domain by quadrature. An empty analytic field is
/// treated as zero.
double l2_error(const FEField& fh, const VectorField& f, double t,
                int degree = kErrorDegree);
double l2_error(const FEField& fh, const ScalarField& f, double t,
                int degree = kErrorDegree);
/// ||grad(u_h - u)|| for V_h fields.
double h1_seminorm_error(const FEField& uh, const MatrixField& grad_u, double t,
                         int degree = kErrorDegree);
/// ||curl(F_h) - c|| for C_h or V_h fields.
double curl_error(const FEField& fh, const VectorField& curl, double t,
                  int degree = kErrorDegree);
/// ||f_h - g_h|| for two fields of one space.
double l2_distance(const FEField& a, const FEField& b);
double l2_norm(const FEField& a);
/// sqrt(x^T M x) for a mass matrix.
double mass_norm(const class SparseMatrix& mass, const Vector& x);

} // namespace mhd
