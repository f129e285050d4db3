#pragma once

#include "mhd/forms.hpp"
#include "mhd/function_space.hpp"
#include "mhd/sparse.hpp"

#include <memory>
#include <optional>

namespace mhd
{

struct ProjectionReport
{
  FEField field;
  /// Pressure part of the Stokes projection; empty otherwise.
  std::optional<FEField> pressure;
  /// max over cells of |div| (D_h output only, else 0).
  double divergence_inf = 0.0;
  /// Relative residual of the solved system.
  double residual = 0.0;
  int system_size = 0;
};

/// Per-cell divergence of a D_h (or V_h at the cell barycenter) field. For
/// BDM1 the divergence is a constant on each cell.
std::vector<double> cell_divergence(const FEField& field);
double max_abs(const std::vector<double>& values);

/// Discrete curl on C_h with vanishing tangential trace:
/// (curl_h B, F) = (B, curl F) for all F. Also provides the L2 projection
/// onto the same space. The mass factorization is built once.
class CurlProjector
{
public:
  CurlProjector(std::shared_ptr<const FunctionSpace> c,
                std::shared_ptr<const FunctionSpace> d);

  /// B_h in D_h.
  FEField curl(const FEField& b) const;
  /// Analytic B, quadrature of the given degree.
  FEField curl(const VectorField& b, double t, int degree = kErrorDegree) const;
  /// L2 projection of an analytic field onto C_h.
  FEField project(const VectorField& field, double t,
                  int degree = kErrorDegree) const;
  /// Solves the C_h mass system for an arbitrary right side.
  FEField solve_mass(Vector rhs) const;

  const SparseMatrix& mass() const { return mass_; }
  /// (B, curl F): rows C_h, columns D_h.
  const SparseMatrix& coupling() const { return coupling_; }
  std::shared_ptr<const FunctionSpace> space() const { return c_; }

private:
  std::shared_ptr<const FunctionSpace> c_, d_;
  SparseMatrix mass_;
  SparseMatrix coupling_;
  std::shared_ptr<Factorization> lu_;
};

inline FEField discrete_curl(const FEField& b, std::shared_ptr<const FunctionSpace> c)
{
  return CurlProjector(std::move(c), b.space).curl(b);
}

/// Constrained L2 projection onto the divergence-free subspace of D_h with
/// vanishing normal trace. The divergence constraint is imposed cellwise by
/// a piecewise constant multiplier with the last cell's constant removed.
class DivFreeProjector
{
public:
  explicit DivFreeProjector(std::shared_ptr<const FunctionSpace> d);

  ProjectionReport project(const VectorField& b, double t,
                           int degree = kErrorDegree) const;
  ProjectionReport project(const FEField& b) const;
  /// Projection of an L2 right side (B, Z)_Z.
  ProjectionReport project_rhs(const Vector& rhs) const;

  std::shared_ptr<const FunctionSpace> space() const { return d_; }
  const SparseMatrix& mass() const { return mass_; }

private:
  std::shared_ptr<const FunctionSpace> d_;
  SparseMatrix mass_;
  SparseMatrix system_;
  std::shared_ptr<Factorization> lu_;
};

inline ProjectionReport div_free_project(const VectorField& b, double t,
                                         std::shared_ptr<const FunctionSpace> d)
{
  return DivFreeProjector(std::move(d)).project(b, t);
}

/// Stokes projection: Re^{-1} (grad(u - u_h), grad v) - (p - p_h, div v) = 0
/// and (div(u - u_h), q) = 0 for all discrete v, q, with (p_h, 1) = (p, 1).
/// u_h takes the interpolated boundary values of u.
struct StokesData
{
  VectorField u;
  MatrixField grad_u;
  /// May be empty; p = 0 is used then.
  ScalarField p;
};

ProjectionReport stokes_project(const StokesData& data, double t,
                                std::shared_ptr<const FunctionSpace> v,
                                std::shared_ptr<const FunctionSpace> q, double re,
                                int degree = kErrorDegree);
ProjectionReport stokes_project(const FEField& u, const FEField& p, double re);

} // namespace mhd
