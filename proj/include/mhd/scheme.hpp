#pragma once

#include "mhd/exact_solution.hpp"
#include "mhd/forms.hpp"
#include "mhd/projections.hpp"
#include "mhd/sparse.hpp"

#include <functional>
#include <memory>
#include <stdexcept>

namespace mhd
{

struct SchemeParams
{
  double re = 1.0;
  double rm = 1.0;
  double s = 1.0;
  double tau = 0.01;
  double t_final = 0.1;
  int n = 4;

  /// N = T / tau.
  int steps() const;
  /// Throws std::invalid_argument naming the offending parameter. S = 0 is
  /// accepted (decoupled fluid and field).
  void validate() const;
};

/// Raised when the linear solve of a time step fails.
class SolverError : public std::runtime_error
{
public:
  SolverError(int step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step)
  {
  }
  int step() const { return step_; }

private:
  int step_;
};

/// Spaces on one mesh plus the time-independent matrices of the scheme.
class Discretization
{
public:
  explicit Discretization(std::shared_ptr<const Mesh> mesh);

  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const FunctionSpace> v, q, c, d;

  SparseMatrix mass_v;      ///< (u, v)
  SparseMatrix stiffness_v; ///< (grad u, grad v)
  SparseMatrix div;         ///< (p, div v): rows V_h, columns Q_h
  SparseMatrix mass_c;      ///< (E, F)
  SparseMatrix curl;        ///< (B, curl F): rows C_h, columns D_h
  SparseMatrix mass_d;      ///< (B, Z)
  Vector ones_q;            ///< (1, q)

  const CurlProjector& curl_projector() const { return *curl_projector_; }
  const DivFreeProjector& div_free_projector() const { return *div_free_projector_; }

  // Block offsets of [u | p | E | B | H | lambda].
  int offset_p() const { return v->dim(); }
  int offset_e() const { return offset_p() + q->dim(); }
  int offset_b() const { return offset_e() + c->dim(); }
  int offset_h() const { return offset_b() + d->dim(); }
  int offset_lambda() const { return offset_h() + c->dim(); }
  int system_size() const { return offset_lambda() + 1; }

private:
  std::shared_ptr<CurlProjector> curl_projector_;
  std::shared_ptr<DivFreeProjector> div_free_projector_;
};

struct MHDState
{
  int step = 0;
  double time = 0.0;
  FEField u, p, e, b, h;
  double multiplier = 0.0;
};

/// Right sides and boundary data. Empty functions mean zero data.
struct Sources
{
  VectorField f;          ///< momentum forcing, used at t^n
  VectorField g;          ///< Faraday defect, projected onto div-free D_h, at t^n
  VectorField u_boundary; ///< velocity trace at t^n
  VectorField e_boundary; ///< tangential electric trace at t^{n-1/2}

  bool unforced_faraday() const { return !g; }
};

Sources manufactured_sources(const ExactSolution& exact);

/// Initial fields. grad_u enables the analytic Stokes projection; without
/// it u is interpolated first. An empty pressure means p = 0.
struct InitialData
{
  VectorField u;
  MatrixField grad_u;
  ScalarField p;
  VectorField b;
  VectorField e;
};

InitialData initial_data(const ExactSolution& exact);

/// One record per time level.
struct StepRecord
{
  int step = 0;
  double time = 0.0;
  double energy = 0.0;
  double div_inf = 0.0;
  /// NaN when the energy identity does not apply (Faraday source or
  /// inhomogeneous boundary data) and at step 0.
  double energy_residual = 0.0;
  double solver_residual = 0.0;
};

/// Linear solver policy of the time stepper. Systems up to direct_limit
/// unknowns are factored every step. Larger ones reuse the last LU factors
/// as a GMRES preconditioner and refactor only when GMRES stalls.
struct SolverOptions
{
  int direct_limit = 20000;
  int max_iterations = 40;
  /// Required relative residual of the reused-factor path.
  double tolerance = 1e-15;
};

/// How the last step was solved.
struct SolveStats
{
  bool factored = false;
  int iterations = 0;
  double residual = 0.0;
};

struct StepSystem
{
  SparseMatrix matrix;
  Vector rhs;
};

class MHDScheme
{
public:
  MHDScheme(std::shared_ptr<const Discretization> disc, SchemeParams params,
            Sources sources, SolverOptions solver = {});

  const Discretization& discretization() const { return *disc_; }
  const SchemeParams& params() const { return params_; }
  const Sources& sources() const { return sources_; }

  /// u^0 = Stokes projection, B^0 = divergence-free projection, E^0 the
  /// interpolant, H^0 the discrete curl of B^0.
  MHDState initialize(const InitialData& data) const;
  MHDState zero_state() const;

  StepSystem assemble_step_system(const MHDState& prev) const;
  /// Advances one step. Throws SolverError.
  MHDState step(const MHDState& prev);
  /// Relative residual of the last solve.
  double last_solver_residual() const { return stats_.residual; }
  const SolveStats& last_solve() const { return stats_; }

  /// Runs N steps from the given state, calling back after each level
  /// (including the initial one).
  using Callback = std::function<void(const MHDState&, const StepRecord&)>;
  MHDState run(const MHDState& initial, const Callback& callback = {});

  /// ||u||^2 + S Rm^{-1} ||B||^2.
  double energy(const MHDState& state) const;
  /// Momentum forcing load (f^n, v).
  Vector forcing_load(double t) const;

private:
  std::shared_ptr<const Discretization> disc_;
  SchemeParams params_;
  Sources sources_;
  SolverOptions solver_;
  std::unique_ptr<Factorization> lu_;
  SolveStats stats_;

  Vector solve(const StepSystem& sys);
  bool try_reused_factors(const StepSystem& sys, Vector& x);
};

/// Splits a monolithic solution vector into a state.
MHDState unpack_state(const Discretization& disc, const Vector& x, int step,
                      double time);

} // namespace mhd
