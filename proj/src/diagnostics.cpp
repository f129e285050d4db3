#include "mhd/diagnostics.hpp"

#include "mhd/norms.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace mhd
{

double divergence_inf(const FEField& b)
{
  return max_abs(cell_divergence(b));
}

namespace
{

void require_space(const FEField& f, const std::shared_ptr<const FunctionSpace>& space,
                   const char* name)
{
  if (f.space != space || f.coeffs.size() != space->dim())
    throw std::invalid_argument(std::string("energy_residual: ") + name
                                + " does not belong to the discretization");
}

double quad(const SparseMatrix& m, const Vector& x)
{
  return x.dot(m.multiply(x));
}

} // namespace

EnergyBalance energy_residual(const MHDState& current, const MHDState& previous,
                              const VectorField& f, const SchemeParams& params,
                              const Discretization& disc)
{
  for (const MHDState* s : {&current, &previous})
  {
    require_space(s->u, disc.v, "u");
    require_space(s->b, disc.d, "B");
  }
  require_space(current.h, disc.c, "H");
  const double tau = params.tau;
  const Vector ubar = 0.5 * (current.u.coeffs + previous.u.coeffs);

  EnergyBalance e;
  // (|a|^2 - |b|^2) as (a - b, a + b): no cancellation once the energy has decayed.
  auto rate = [tau](const SparseMatrix& m, const Vector& a, const Vector& b) {
    const Vector diff = a - b;
    return diff.dot(m.multiply(a + b)) / (2.0 * tau);
  };
  e.kinetic_rate = rate(disc.mass_v, current.u.coeffs, previous.u.coeffs);
  e.viscous = quad(disc.stiffness_v, ubar) / params.re;
  e.ohmic = params.s / (params.rm * params.rm) * quad(disc.mass_c, current.h.coeffs);
  e.magnetic_rate = params.s / params.rm * rate(disc.mass_d, current.b.coeffs, previous.b.coeffs);
  if (f)
    e.work = assemble_load(*disc.v, f, current.time, kErrorDegree).dot(ubar);
  e.residual = e.kinetic_rate + e.viscous + e.ohmic + e.magnetic_rate - e.work;
  e.scale = std::max({std::abs(e.kinetic_rate), std::abs(e.viscous), std::abs(e.ohmic),
                      std::abs(e.magnetic_rate), std::abs(e.work)});
  return e;
}

ErrorReport error_norms(const MHDState& state, const ExactSolution& exact,
                        const Discretization& disc, double tau, int degree)
{
  const double t = state.time;
  ErrorReport r;
  r.t = t;
  r.tau = tau;
  r.n = static_cast<int>(std::lround(std::cbrt(disc.mesh->num_cells() / 6.0)));
  r.u_l2 = l2_error(state.u, exact.u(), t, degree);
  r.u_h1 = h1_seminorm_error(state.u, exact.grad_u(), t, degree);
  r.b_l2 = l2_error(state.b, exact.b(), t, degree);
  const CurlProjector& cp = disc.curl_projector();
  const Vector dc = cp.curl(exact.b(), t, degree).coeffs - cp.curl(state.b).coeffs;
  r.b_curl = mass_norm(disc.mass_c, dc);
  r.e_l2 = l2_error(state.e, exact.e(), t - 0.5 * tau, degree);
  r.p_l2 = l2_error(state.p, exact.p(), t, degree);
  return r;
}

void TimeSummedError::add(const MHDState& current, const MHDState& previous)
{
  const double t1 = current.time, t0 = previous.time;
  const FEField ubar(disc_.v, 0.5 * (current.u.coeffs + previous.u.coeffs));
  const FEField bbar(disc_.d, 0.5 * (current.b.coeffs + previous.b.coeffs));
  const MatrixField gu = exact_.grad_u();
  const VectorField b = exact_.b();
  const MatrixField grad_avg = [gu, t0](const Vec3& x, double t) -> Mat3 {
    return 0.5 * (gu(x, t) + gu(x, t0));
  };
  const VectorField b_avg = [b, t0](const Vec3& x, double t) -> Vec3 {
    return 0.5 * (b(x, t) + b(x, t0));
  };
  const double eu = h1_seminorm_error(ubar, grad_avg, t1);
  const CurlProjector& cp = disc_.curl_projector();
  const double eb = mass_norm(disc_.mass_c, cp.curl(b_avg, t1).coeffs - cp.curl(bbar).coeffs);
  sum_ += tau_ * (eu * eu + eb * eb);
}

double least_squares_slope(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size())
    throw std::invalid_argument("least_squares_slope: size mismatch");
  if (x.size() < 3)
    throw std::invalid_argument("least_squares_slope: at least 3 points are required");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("least_squares_slope: values must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0)
    throw std::invalid_argument("least_squares_slope: abscissae must differ");
  return (n * sxy - sx * sy) / denom;
}

RateTable::RateTable(std::string parameter, std::vector<std::string> norms)
    : parameter_(std::move(parameter)), norms_(std::move(norms))
{
}

void RateTable::add_row(double step, std::vector<double> errors)
{
  if (errors.size() != norms_.size())
    throw std::invalid_argument("RateTable: row has the wrong number of norms");
  steps_.push_back(step);
  rows_.push_back(std::move(errors));
}

int RateTable::column(const std::string& norm) const
{
  const auto it = std::find(norms_.begin(), norms_.end(), norm);
  if (it == norms_.end())
    throw std::invalid_argument("RateTable: unknown norm '" + norm + "'");
  return static_cast<int>(it - norms_.begin());
}

double RateTable::error(int row, const std::string& norm) const
{
  return rows_.at(static_cast<std::size_t>(row))[column(norm)];
}

double RateTable::slope(const std::string& norm) const
{
  const int c = column(norm);
  std::vector<double> y;
  for (const auto& r : rows_)
    y.push_back(r[c]);
  return least_squares_slope(steps_, y);
}

namespace
{

std::string fmt(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

void RateTable::write_csv(
    std::ostream& out,
    const std::vector<std::pair<std::string, std::vector<double>>>& labels) const
{
  for (const auto& [name, values] : labels)
  {
    if (values.size() != steps_.size())
      throw std::invalid_argument("RateTable: label column length mismatch");
    out << name << ',';
  }
  out << parameter_;
  for (const auto& n : norms_)
    out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < steps_.size(); ++i)
  {
    for (const auto& l : labels)
      out << fmt(l.second[i]) << ',';
    out << fmt(steps_[i]);
    for (double e : rows_[i])
      out << ',' << fmt(e);
    out << '\n';
  }
  out << "# slope";
  for (std::size_t k = 0; k < labels.size(); ++k)
    out << ',';
  out << ',';
  for (std::size_t k = 0; k < norms_.size(); ++k)
  {
    if (k)
      out << ',';
    out << (rows() >= 3 ? fmt(slope(norms_[k])) : std::string("nan"));
  }
  out << '\n';
}

StudyConfig StudyConfig::spatial()
{
  return StudyConfig{};
}

StudyConfig StudyConfig::temporal()
{
  StudyConfig c;
  c.kind = StudyKind::Temporal;
  c.t_final = 0.5;
  c.n = 8;
  c.taus = {c.t_final / 4, c.t_final / 8, c.t_final / 16, c.t_final / 32};
  return c;
}

StudyResult convergence_study(const StudyConfig& config, const ExactSolution& exact)
{
  const bool spatial = config.kind == StudyKind::Spatial;
  const std::size_t points = spatial ? config.meshes.size() : config.taus.size();
  if (points < 3)
    throw std::invalid_argument("convergence_study: at least 3 grid points are required");

  StudyResult result{RateTable(spatial ? "h" : "tau", study_norms()), {}, {}};
  std::shared_ptr<const Discretization> shared;
  for (std::size_t i = 0; i < points; ++i)
  {
    SchemeParams params;
    params.re = config.re;
    params.rm = config.rm;
    params.s = config.s;
    params.t_final = config.t_final;
    params.n = spatial ? config.meshes[i] : config.n;
    params.tau = spatial ? config.tau : config.taus[i];
    params.validate();

    std::shared_ptr<const Discretization> disc = shared;
    if (!disc)
    {
      disc = std::make_shared<Discretization>(
          std::make_shared<Mesh>(build_structured_cube(params.n)));
      if (!spatial)
        shared = disc;
    }
    MHDScheme scheme(disc, params, manufactured_sources(exact));
    TimeSummedError summed(exact, *disc, params.tau);
    MHDState prev = scheme.initialize(initial_data(exact));
    const MHDState last = scheme.run(prev, [&](const MHDState& s, const StepRecord&) {
      if (s.step > 0)
        summed.add(s, prev);
      prev = s;
    });
    const ErrorReport r = error_norms(last, exact, *disc, params.tau);
    result.reports.push_back(r);
    result.time_summed.push_back(summed.value());
    result.table.add_row(spatial ? disc->mesh->mesh_size() : params.tau,
                         {r.u_l2, r.b_l2, r.u_l2 + r.b_l2, r.u_h1, r.b_curl,
                          r.u_h1 + r.b_curl, summed.value(), r.e_l2, r.p_l2});
  }
  return result;
}

double estimate_infsup(std::shared_ptr<const FunctionSpace> v,
                       std::shared_ptr<const FunctionSpace> q, bool mean_free)
{
  if (v->dim() > kInfsupMaxVelocityDofs)
    throw std::length_error("estimate_infsup: V_h has " + std::to_string(v->dim())
                            + " dofs, above the dense cap of "
                            + std::to_string(kInfsupMaxVelocityDofs));
  const Eigen::MatrixXd a_full = assemble_matrix({FormKind::Stiffness, v, v}).to_dense()
                                 + assemble_matrix({FormKind::Mass, v, v}).to_dense();
  const Eigen::MatrixXd b_full = assemble_matrix({FormKind::DivPressure, q, v}).to_dense();
  Eigen::MatrixXd mq = assemble_matrix({FormKind::Mass, q, q}).to_dense();

  std::vector<int> interior;
  for (int i = 0; i < v->dim(); ++i)
    if (!v->is_boundary_dof(i))
      interior.push_back(i);
  const int ni = static_cast<int>(interior.size());
  Eigen::MatrixXd a(ni, ni), bt(ni, q->dim());
  for (int i = 0; i < ni; ++i)
  {
    for (int j = 0; j < ni; ++j)
      a(i, j) = a_full(interior[i], interior[j]);
    bt.row(i) = b_full.row(interior[i]);
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("estimate_infsup: velocity Gram matrix is not SPD");
  Eigen::MatrixXd schur = bt.transpose() * llt.solve(bt);
  schur = 0.5 * (schur + schur.transpose());

  if (mean_free)
  {
    // Orthonormal complement of the constant direction in the Euclidean sense.
    const Vector ones = mq * Vector::Ones(q->dim());
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
    const Eigen::MatrixXd z =
        (qr.householderQ() * Eigen::MatrixXd::Identity(q->dim(), q->dim())).rightCols(q->dim() - 1);
    schur = z.transpose() * schur * z;
    mq = z.transpose() * mq * z;
  }
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(schur, mq);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("estimate_infsup: eigen solve failed");
  const Vector& lambda = eig.eigenvalues();
  const double cutoff = 1e-10 * std::max(1.0, lambda.maxCoeff());
  for (int i = 0; i < lambda.size(); ++i)
    if (mean_free || lambda[i] > cutoff)
      return std::sqrt(std::max(0.0, lambda[i]));
  throw std::runtime_error("estimate_infsup: no nonzero eigenvalue");
}

} // namespace mhd
