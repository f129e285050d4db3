#pragma once

#include "mhd/exact_solution.hpp"
#include "mhd/scheme.hpp"

#include <cmath>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mhd
{

/// max over cells of |div B_h|. Exact for D_h, where div is a per-cell constant.
double divergence_inf(const FEField& b);

/// Terms of the discrete energy balance of one step.
struct EnergyBalance
{
  double kinetic_rate = 0.0;  ///< (|u^n|^2 - |u^{n-1}|^2) / (2 tau)
  double viscous = 0.0;       ///< Re^{-1} |grad ubar|^2
  double ohmic = 0.0;         ///< S Rm^{-2} |H^n|^2
  double magnetic_rate = 0.0; ///< S Rm^{-1} (|B^n|^2 - |B^{n-1}|^2) / (2 tau)
  double work = 0.0;          ///< (f^n, ubar)
  double residual = 0.0;      ///< sum of the dissipative terms minus the work
  double scale = 0.0;         ///< largest |term|

  double relative() const { return scale > 0.0 ? std::abs(residual) / scale : 0.0; }
};

/// Energy balance between consecutive states of one run without a Faraday
/// source. An empty f means f = 0. Throws std::invalid_argument when the
/// states do not live on the discretization's spaces.
EnergyBalance energy_residual(const MHDState& current, const MHDState& previous,
                              const VectorField& f, const SchemeParams& params,
                              const Discretization& disc);

struct ErrorReport
{
  double u_l2 = 0.0;
  double u_h1 = 0.0;   ///< ||grad(u - u_h)||
  double b_l2 = 0.0;
  double b_curl = 0.0; ///< ||curl_h B - curl_h B_h||
  double e_l2 = 0.0;
  double p_l2 = 0.0;
  double t = 0.0;
  int n = 0;
  double tau = 0.0;
};

/// Errors of a state against an analytic solution at the state's time. E_h
/// is compared with E at t - tau/2, the level Ohm's law is collocated at.
ErrorReport error_norms(const MHDState& state, const ExactSolution& exact,
                        const Discretization& disc, double tau,
                        int degree = kErrorDegree);

/// Accumulates tau sum_n (|grad(ubar - ubar_h)|^2 + |curl_h(Bbar - Bbar_h)|^2)
/// over the steps of a run.
class TimeSummedError
{
public:
  TimeSummedError(const ExactSolution& exact, const Discretization& disc, double tau)
      : exact_(exact), disc_(disc), tau_(tau)
  {
  }
  void add(const MHDState& current, const MHDState& previous);
  double value() const { return std::sqrt(sum_); }

private:
  const ExactSolution& exact_;
  const Discretization& disc_;
  double tau_;
  double sum_ = 0.0;
};

/// Least-squares slope of log(y) against log(x). Needs >= 3 positive points.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

/// Errors of several norms over a sequence of mesh sizes or time steps.
class RateTable
{
public:
  RateTable(std::string parameter, std::vector<std::string> norms);

  void add_row(double step, std::vector<double> errors);
  const std::string& parameter() const { return parameter_; }
  const std::vector<std::string>& norms() const { return norms_; }
  const std::vector<double>& steps() const { return steps_; }
  int rows() const { return static_cast<int>(steps_.size()); }
  double error(int row, const std::string& norm) const;
  /// Throws std::invalid_argument with fewer than 3 rows or an unknown norm.
  double slope(const std::string& norm) const;

  /// Header, one row per grid point and a "# slope" footer. Extra leading
  /// columns (e.g. n, tau) are taken from `labels`.
  void write_csv(std::ostream& out,
                 const std::vector<std::pair<std::string, std::vector<double>>>& labels = {})
      const;

private:
  int column(const std::string& norm) const;
  std::string parameter_;
  std::vector<std::string> norms_;
  std::vector<double> steps_;
  std::vector<std::vector<double>> rows_;
};

enum class StudyKind
{
  Spatial,
  Temporal,
};

struct StudyConfig
{
  StudyKind kind = StudyKind::Spatial;
  double re = 1.0, rm = 1.0, s = 1.0;
  double t_final = 0.05;
  /// Spatial: the time step shared by all meshes.
  double tau = 1e-3;
  std::vector<int> meshes{2, 4, 8};
  /// Temporal: the mesh and the time steps.
  int n = 8;
  std::vector<double> taus;

  static StudyConfig spatial();
  static StudyConfig temporal();
};

struct StudyResult
{
  RateTable table;
  std::vector<ErrorReport> reports;
  std::vector<double> time_summed;
};

/// Norm names of the study tables.
inline const std::vector<std::string>& study_norms()
{
  static const std::vector<std::string> names{
      "u_l2", "b_l2", "u_b_l2", "u_h1", "b_curl", "energy", "energy_sum", "e_l2", "p_l2"};
  return names;
}

/// Runs the manufactured problem on each grid point from the projected initial
/// data and tabulates the final-time errors. Throws std::invalid_argument with
/// fewer than 3 grid points.
StudyResult convergence_study(const StudyConfig& config, const ExactSolution& exact);

/// Largest V_h dimension the dense inf-sup probe accepts (the n = 4 mesh).
inline constexpr int kInfsupMaxVelocityDofs = 3000;

/// sqrt of the smallest nonzero generalized eigenvalue of B A^{-1} B^T
/// against the pressure mass, A the H1 inner product on V_h with zero trace.
/// mean_free restricts pressures to (q, 1) = 0 instead of discarding the
/// constant null mode. Throws std::length_error above the size cap.
double estimate_infsup(std::shared_ptr<const FunctionSpace> v,
                       std::shared_ptr<const FunctionSpace> q, bool mean_free = false);

} // namespace mhd
