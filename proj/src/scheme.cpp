#include "mhd/scheme.hpp"

#include "mhd/diagnostics.hpp"

#include <unsupported/Eigen/IterativeSolvers>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mhd
{

int SchemeParams::steps() const
{
  return static_cast<int>(std::llround(t_final / tau));
}

void SchemeParams::validate() const
{
  auto positive = [](double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value))
      throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(re, "re");
  positive(rm, "rm");
  positive(tau, "tau");
  positive(t_final, "tfinal");
  if (!(s >= 0.0) || !std::isfinite(s))
    throw std::invalid_argument("s-coupling must be non-negative");
  if (n < 1)
    throw std::invalid_argument("n must be >= 1");
  if (std::abs(steps() * tau - t_final) > 1e-12 * std::max(1.0, t_final))
    throw std::invalid_argument("tfinal must be an integer multiple of tau");
}

Discretization::Discretization(std::shared_ptr<const Mesh> m) : mesh(std::move(m))
{
  v = build_space(mesh, Family::LagrangeP2);
  q = build_space(mesh, Family::LagrangeP1);
  c = build_space(mesh, Family::Nedelec2);
  d = build_space(mesh, Family::BDM1);
  mass_v = assemble_matrix({FormKind::Mass, v, v});
  stiffness_v = assemble_matrix({FormKind::Stiffness, v, v});
  div = assemble_matrix({FormKind::DivPressure, q, v});
  mass_c = assemble_matrix({FormKind::Mass, c, c});
  curl = assemble_matrix({FormKind::CurlCoupling, d, c});
  mass_d = assemble_matrix({FormKind::Mass, d, d});
  ones_q = assemble_load(*q, ScalarSource([](const PointContext&) { return 1.0; }),
                         kMassDegree);
  curl_projector_ = std::make_shared<CurlProjector>(c, d);
  div_free_projector_ = std::make_shared<DivFreeProjector>(d);
}

Sources manufactured_sources(const ExactSolution& exact)
{
  return Sources{exact.f(), exact.g(), exact.u(), exact.e()};
}

InitialData initial_data(const ExactSolution& exact)
{
  return InitialData{exact.u(), exact.grad_u(), exact.p(), exact.b(), exact.e()};
}

MHDScheme::MHDScheme(std::shared_ptr<const Discretization> disc, SchemeParams params,
                     Sources sources, SolverOptions solver)
    : disc_(std::move(disc)), params_(params), sources_(std::move(sources)), solver_(solver)
{
  params_.validate();
}

MHDState MHDScheme::zero_state() const
{
  MHDState s;
  s.u = FEField(disc_->v);
  s.p = FEField(disc_->q);
  s.e = FEField(disc_->c);
  s.b = FEField(disc_->d);
  s.h = FEField(disc_->c);
  return s;
}

MHDState MHDScheme::initialize(const InitialData& data) const
{
  MHDState s = zero_state();
  if (data.u)
  {
    ProjectionReport r;
    if (data.grad_u)
      r = stokes_project({data.u, data.grad_u, data.p}, 0.0, disc_->v, disc_->q, params_.re);
    else
      r = stokes_project(interpolate(disc_->v, data.u, 0.0),
                         data.p ? interpolate(disc_->q, data.p, 0.0) : FEField(disc_->q),
                         params_.re);
    s.u = r.field;
    s.p = *r.pressure;
  }
  if (data.b)
    s.b = disc_->div_free_projector().project(data.b, 0.0).field;
  if (data.e)
    s.e = interpolate(disc_->c, data.e, 0.0);
  s.h = disc_->curl_projector().curl(s.b);
  return s;
}

Vector MHDScheme::forcing_load(double t) const
{
  if (!sources_.f)
    return Vector::Zero(disc_->v->dim());
  return assemble_load(*disc_->v, sources_.f, t, kErrorDegree);
}

double MHDScheme::energy(const MHDState& state) const
{
  const double u2 = state.u.coeffs.dot(disc_->mass_v.multiply(state.u.coeffs));
  const double b2 = state.b.coeffs.dot(disc_->mass_d.multiply(state.b.coeffs));
  return u2 + params_.s / params_.rm * b2;
}

namespace
{

void append_matrix(TripletList& out, const SparseMatrix& m, int row_offset,
                   int col_offset, double scale = 1.0, bool transpose = false)
{
  const auto rp = m.row_ptr();
  const auto ci = m.col_index();
  const auto val = m.values();
  for (int r = 0; r < m.rows(); ++r)
    for (int k = rp[r]; k < rp[r + 1]; ++k)
    {
      if (transpose)
        out.add(ci[k] + row_offset, r + col_offset, scale * val[k]);
      else
        out.add(r + row_offset, ci[k] + col_offset, scale * val[k]);
    }
}

void add_constraints(std::vector<int>& dofs, std::vector<double>& values,
                     const Constraints& c, int offset)
{
  for (std::size_t k = 0; k < c.dofs.size(); ++k)
  {
    dofs.push_back(c.dofs[k] + offset);
    values.push_back(c.values[k]);
  }
}

} // namespace

StepSystem MHDScheme::assemble_step_system(const MHDState& prev) const
{
  const Discretization& D = *disc_;
  const double tau = params_.tau, re = params_.re, rm = params_.rm, s = params_.s;
  const double t = prev.time + tau;
  const int ou = 0, op = D.offset_p(), oe = D.offset_e(), ob = D.offset_b(),
            oh = D.offset_h(), ol = D.offset_lambda();
  const int n = D.system_size();

  const SparseMatrix conv = assemble_matrix({FormKind::ConvectionSkew, D.v, D.v, &prev.u});
  const SparseMatrix lorentz = assemble_finalize(cross_product_block(D.c, D.v, prev.b));
  const SparseMatrix ohm = assemble_finalize(cross_product_block(D.v, D.c, prev.b));

  TripletList a(n, n);
  a.reserve(static_cast<std::size_t>(D.mass_v.nnz() + D.stiffness_v.nnz() + conv.nnz()
                                     + 2 * D.div.nnz() + lorentz.nnz() + ohm.nnz()
                                     + 2 * D.mass_c.nnz() + 3 * D.curl.nnz()
                                     + D.mass_d.nnz() + 2 * D.q->dim()));
  // Momentum.
  append_matrix(a, D.mass_v, ou, ou, 1.0 / tau);
  append_matrix(a, D.stiffness_v, ou, ou, 0.5 / re);
  append_matrix(a, conv, ou, ou, 0.5);
  append_matrix(a, D.div, ou, op, -1.0);
  append_matrix(a, lorentz, ou, oh, -s / rm);
  // Incompressibility with the mean multiplier.
  append_matrix(a, D.div, op, ou, -1.0, true);
  for (int i = 0; i < D.q->dim(); ++i)
  {
    a.add(op + i, ol, D.ones_q[i]);
    a.add(ol, op + i, D.ones_q[i]);
  }
  // Ohm.
  append_matrix(a, ohm, oe, ou, 0.5);
  append_matrix(a, D.mass_c, oe, oe);
  append_matrix(a, D.curl, oe, ob, -0.5 / rm);
  // Faraday.
  append_matrix(a, D.curl, ob, oe, 1.0, true);
  append_matrix(a, D.mass_d, ob, ob, 1.0 / tau);
  // Auxiliary curl.
  append_matrix(a, D.curl, oh, ob, -0.5);
  append_matrix(a, D.mass_c, oh, oh);

  const Vector& u0 = prev.u.coeffs;
  const Vector& b0 = prev.b.coeffs;
  Vector rhs = Vector::Zero(n);
  rhs.segment(ou, D.v->dim()) = forcing_load(t) + D.mass_v.multiply(u0) / tau
                                - D.stiffness_v.multiply(u0) * (0.5 / re)
                                - conv.multiply(u0) * 0.5;
  rhs.segment(op, D.q->dim()) = D.div.multiply_transpose(u0);
  const Vector kb0 = D.curl.multiply(b0);
  rhs.segment(oe, D.c->dim()) = -0.5 * ohm.multiply(u0) + kb0 * (0.5 / rm);
  Vector faraday = D.mass_d.multiply(b0) / tau;
  if (sources_.g)
  {
    const FEField pg = D.div_free_projector().project(sources_.g, t).field;
    faraday += D.mass_d.multiply(pg.coeffs);
  }
  rhs.segment(ob, D.d->dim()) = faraday;
  rhs.segment(oh, D.c->dim()) = 0.5 * kb0;

  std::vector<int> dofs;
  std::vector<double> values;
  add_constraints(dofs, values,
                  sources_.u_boundary ? apply_essential_bc(*D.v, sources_.u_boundary, t)
                                      : apply_essential_bc(*D.v),
                  ou);
  add_constraints(dofs, values,
                  sources_.e_boundary
                      ? apply_essential_bc(*D.c, sources_.e_boundary, t - 0.5 * tau)
                      : apply_essential_bc(*D.c),
                  oe);
  add_constraints(dofs, values, apply_essential_bc(*D.d), ob);
  add_constraints(dofs, values, apply_essential_bc(*D.c), oh);
  apply_constraints(a, rhs, dofs, values);
  return StepSystem{assemble_finalize(a), std::move(rhs)};
}

MHDState unpack_state(const Discretization& disc, const Vector& x, int step, double time)
{
  MHDState s;
  s.step = step;
  s.time = time;
  s.u = FEField(disc.v, x.segment(0, disc.v->dim()));
  s.p = FEField(disc.q, x.segment(disc.offset_p(), disc.q->dim()));
  s.e = FEField(disc.c, x.segment(disc.offset_e(), disc.c->dim()));
  s.b = FEField(disc.d, x.segment(disc.offset_b(), disc.d->dim()));
  s.h = FEField(disc.c, x.segment(disc.offset_h(), disc.c->dim()));
  s.multiplier = x[disc.offset_lambda()];
  return s;
}

namespace
{

// Applies stale LU factors inside Eigen's GMRES.
struct ReusedFactors
{
  const Factorization* lu = nullptr;

  ReusedFactors() = default;
  template <class M>
  explicit ReusedFactors(const M&)
  {
  }
  template <class M>
  ReusedFactors& analyzePattern(const M&)
  {
    return *this;
  }
  template <class M>
  ReusedFactors& factorize(const M&)
  {
    return *this;
  }
  template <class M>
  ReusedFactors& compute(const M&)
  {
    return *this;
  }
  template <class R>
  Vector solve(const R& b) const
  {
    return lu->solve(Vector(b), false);
  }
  Eigen::ComputationInfo info() const { return Eigen::Success; }
};

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

RowMatrix to_eigen(const SparseMatrix& a)
{
  return Eigen::Map<const RowMatrix>(a.rows(), a.cols(), a.nnz(), a.row_ptr().data(),
                                     a.col_index().data(), a.values().data());
}

} // namespace

bool MHDScheme::try_reused_factors(const StepSystem& sys, Vector& x)
{
  const RowMatrix a = to_eigen(sys.matrix);
  Eigen::GMRES<RowMatrix, ReusedFactors> gmres;
  gmres.setMaxIterations(solver_.max_iterations);
  gmres.set_restart(solver_.max_iterations);
  gmres.setTolerance(solver_.tolerance);
  gmres.compute(a);
  gmres.preconditioner().lu = lu_.get();
  // GMRES measures the preconditioned residual; restart until the true one
  // is small enough.
  x = Vector::Zero(sys.rhs.size());
  stats_.iterations = 0;
  while (stats_.iterations < solver_.max_iterations)
  {
    x = gmres.solveWithGuess(sys.rhs, x);
    stats_.iterations += std::max<int>(1, static_cast<int>(gmres.iterations()));
    stats_.residual = relative_residual(sys.matrix, x, sys.rhs);
    if (!x.allFinite())
      return false;
    if (stats_.residual <= solver_.tolerance)
      return true;
  }
  return false;
}

Vector MHDScheme::solve(const StepSystem& sys)
{
  stats_ = SolveStats{};
  Vector x;
  if (lu_ && sys.matrix.rows() > solver_.direct_limit && lu_->size() == sys.matrix.rows()
      && try_reused_factors(sys, x))
    return x;

  lu_ = std::make_unique<Factorization>(lu_ ? lu_->refactor(sys.matrix)
                                            : Factorization(sys.matrix));
  stats_.factored = true;
  stats_.iterations = 0;
  x = lu_->solve(sys.rhs);
  stats_.residual = relative_residual(sys.matrix, x, sys.rhs);
  if (stats_.residual > 1e-13)
  {
    // One step of iterative refinement.
    x += lu_->solve(sys.rhs - sys.matrix.multiply(x));
    stats_.residual = relative_residual(sys.matrix, x, sys.rhs);
  }
  return x;
}

MHDState MHDScheme::step(const MHDState& prev)
{
  const int n = prev.step + 1;
  Vector x;
  try
  {
    x = solve(assemble_step_system(prev));
  }
  catch (const std::exception& e)
  {
    lu_.reset();
    throw SolverError(n, e.what());
  }
  if (!(stats_.residual <= 1e-10))
    throw SolverError(n, "linear solve residual " + std::to_string(stats_.residual)
                             + " exceeds 1e-10");
  return unpack_state(*disc_, x, n, n * params_.tau);
}

MHDState MHDScheme::run(const MHDState& initial, const Callback& callback)
{
  const bool identity_applies = !sources_.g && !sources_.u_boundary && !sources_.e_boundary;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto record = [&](const MHDState& s, const MHDState* prev, double residual) {
    StepRecord r;
    r.step = s.step;
    r.time = s.time;
    r.energy = energy(s);
    r.div_inf = divergence_inf(s.b);
    r.energy_residual = prev && identity_applies
                            ? energy_residual(s, *prev, sources_.f, params_, *disc_).residual
                            : nan;
    r.solver_residual = residual;
    return r;
  };
  MHDState current = initial;
  if (callback)
    callback(current, record(current, nullptr, 0.0));
  const int steps = params_.steps();
  for (int k = current.step; k < steps; ++k)
  {
    MHDState next = step(current);
    if (callback)
      callback(next, record(next, &current, stats_.residual));
    current = std::move(next);
  }
  return current;
}

} // namespace mhd
