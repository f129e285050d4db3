#include "mhd/projections.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mhd
{

std::vector<double> cell_divergence(const FEField& field)
{
  const FunctionSpace& space = *field.space;
  if (space.family() != Family::BDM1 && space.family() != Family::LagrangeP2)
    throw std::invalid_argument("cell_divergence: space has no divergence");
  const std::vector<Vec3> center = {Vec3(0.25, 0.25, 0.25)};
  const ReferenceTable table = tabulate(space.family(), center);
  std::vector<double> div(space.mesh().num_cells());
  ElementValues ev;
  FieldValues fv;
  for (int c = 0; c < space.mesh().num_cells(); ++c)
  {
    space.evaluate_basis(c, table, center, {}, ev);
    contract(space, ev, field.coeffs, c, fv);
    div[c] = fv.divergence[0];
  }
  return div;
}

double max_abs(const std::vector<double>& values)
{
  double m = 0.0;
  for (double v : values)
    m = std::max(m, std::abs(v));
  return m;
}

namespace
{

std::vector<double> zeros_for(const std::vector<int>& dofs)
{
  return std::vector<double>(dofs.size(), 0.0);
}

} // namespace

CurlProjector::CurlProjector(std::shared_ptr<const FunctionSpace> c,
                             std::shared_ptr<const FunctionSpace> d)
    : c_(std::move(c)), d_(std::move(d))
{
  if (c_->family() != Family::Nedelec2 || d_->family() != Family::BDM1)
    throw std::invalid_argument("CurlProjector: needs C_h and D_h");
  TripletList m = assemble_bilinear({FormKind::Mass, c_, c_});
  mass_ = assemble_finalize(m);
  coupling_ = assemble_matrix({FormKind::CurlCoupling, d_, c_});
  Vector dummy = Vector::Zero(c_->dim());
  apply_constraints(m, dummy, c_->boundary_dofs(), zeros_for(c_->boundary_dofs()));
  lu_ = std::make_shared<Factorization>(assemble_finalize(m));
}

FEField CurlProjector::solve_mass(Vector rhs) const
{
  for (int dof : c_->boundary_dofs())
    rhs[dof] = 0.0;
  return FEField(c_, lu_->solve(rhs));
}

FEField CurlProjector::curl(const FEField& b) const
{
  if (b.space->family() != Family::BDM1 || &b.space->mesh() != &c_->mesh())
    throw std::invalid_argument("CurlProjector::curl: field is not in D_h");
  return solve_mass(coupling_.multiply(b.coeffs));
}

FEField CurlProjector::curl(const VectorField& b, double t, int degree) const
{
  return solve_mass(assemble_curl_load(*c_, at_time(b, t), degree));
}

FEField CurlProjector::project(const VectorField& field, double t, int degree) const
{
  return solve_mass(assemble_load(*c_, at_time(field, t), degree));
}

DivFreeProjector::DivFreeProjector(std::shared_ptr<const FunctionSpace> d)
    : d_(std::move(d))
{
  if (d_->family() != Family::BDM1)
    throw std::invalid_argument("DivFreeProjector: needs D_h");
  const int nd = d_->dim();
  const int nc = d_->mesh().num_cells();
  // Unknowns [B | lambda_0 .. lambda_{nc-2}].
  const int n = nd + nc - 1;
  TripletList m = assemble_bilinear({FormKind::Mass, d_, d_});
  mass_ = assemble_finalize(m);
  TripletList sys(n, n);
  sys.append(m, 0, 0);

  // (div Z, mu) for cellwise constant mu: on each cell div is constant, so
  // the entry is |K| div phi_j.
  const std::vector<Vec3> center = {Vec3(0.25, 0.25, 0.25)};
  const ReferenceTable table = tabulate(Family::BDM1, center);
  ElementValues ev;
  for (int c = 0; c + 1 < nc; ++c)
  {
    d_->evaluate_basis(c, table, center, {}, ev);
    const double vol = d_->element_map(c).abs_det() / 6.0;
    const auto dofs = d_->cell_dofs(c);
    for (int j = 0; j < ev.num_dofs; ++j)
    {
      const double g = vol * ev.divergence[j];
      sys.add(nd + c, dofs[j], g);
      sys.add(dofs[j], nd + c, g);
    }
  }
  Vector dummy = Vector::Zero(n);
  apply_constraints(sys, dummy, d_->boundary_dofs(), zeros_for(d_->boundary_dofs()));
  system_ = assemble_finalize(sys);
  lu_ = std::make_shared<Factorization>(system_);
}

ProjectionReport DivFreeProjector::project_rhs(const Vector& rhs) const
{
  Vector full = Vector::Zero(system_.rows());
  full.head(d_->dim()) = rhs;
  for (int dof : d_->boundary_dofs())
    full[dof] = 0.0;
  const Vector x = lu_->solve(full);
  ProjectionReport r;
  r.field = FEField(d_, x.head(d_->dim()));
  r.divergence_inf = max_abs(cell_divergence(r.field));
  r.residual = relative_residual(system_, x, full);
  r.system_size = system_.rows();
  return r;
}

ProjectionReport DivFreeProjector::project(const VectorField& b, double t, int degree) const
{
  return project_rhs(assemble_load(*d_, at_time(b, t), degree));
}

ProjectionReport DivFreeProjector::project(const FEField& b) const
{
  if (b.space->family() != Family::BDM1 || &b.space->mesh() != &d_->mesh())
    throw std::invalid_argument("DivFreeProjector::project: field is not in D_h");
  return project_rhs(mass_.multiply(b.coeffs));
}

namespace
{

// Saddle system [Re^{-1} A, -G, 0; -G^T, 0, m; 0, m^T, 0] with G = (q, div v)
// and m = (1, q).
ProjectionReport solve_stokes(std::shared_ptr<const FunctionSpace> v,
                              std::shared_ptr<const FunctionSpace> q, double re,
                              Vector rhs_v, Vector rhs_q, double mean,
                              const Constraints& bc)
{
  const int nv = v->dim(), nq = q->dim();
  const int n = nv + nq + 1;
  TripletList sys(n, n);
  sys.append(assemble_bilinear({FormKind::Stiffness, v, v, nullptr, 1.0 / re}), 0, 0);
  const TripletList g = assemble_bilinear({FormKind::DivPressure, q, v});
  sys.append(g, 0, nv, -1.0);
  sys.append(g, nv, 0, -1.0, true);
  const Vector ones = assemble_load(*q, ScalarSource([](const PointContext&) { return 1.0; }),
                                    kMassDegree);
  for (int i = 0; i < nq; ++i)
  {
    sys.add(nv + i, nv + nq, ones[i]);
    sys.add(nv + nq, nv + i, ones[i]);
  }
  Vector rhs(n);
  rhs << rhs_v, -rhs_q, mean;
  apply_constraints(sys, rhs, bc.dofs, bc.values);
  const SparseMatrix a = assemble_finalize(sys);
  const Vector x = solve(lu_factor(a), rhs);
  ProjectionReport r;
  r.field = FEField(v, x.head(nv));
  r.pressure = FEField(q, x.segment(nv, nq));
  r.residual = relative_residual(a, x, rhs);
  r.system_size = n;
  return r;
}

} // namespace

ProjectionReport stokes_project(const StokesData& data, double t,
                                std::shared_ptr<const FunctionSpace> v,
                                std::shared_ptr<const FunctionSpace> q, double re,
                                int degree)
{
  if (v->family() != Family::LagrangeP2 || q->family() != Family::LagrangeP1)
    throw std::invalid_argument("stokes_project: needs V_h and Q_h");
  const MatrixField grad = data.grad_u;
  Vector rhs_v = assemble_gradient_load(
      *v, [grad, t, re](const PointContext& pc) { return Mat3(grad(pc.x, t) / re); },
      degree);
  double mean = 0.0;
  if (data.p)
  {
    rhs_v -= assemble_divergence_load(*v, at_time(data.p, t), degree);
    mean = assemble_load(*q, at_time(data.p, t), degree).sum();
  }
  const Vector rhs_q = assemble_load(
      *q, ScalarSource([grad, t](const PointContext& pc) { return grad(pc.x, t).trace(); }),
      degree);
  return solve_stokes(v, q, re, rhs_v, rhs_q, mean, apply_essential_bc(*v, data.u, t));
}

ProjectionReport stokes_project(const FEField& u, const FEField& p, double re)
{
  auto v = u.space;
  auto q = p.space;
  if (v->family() != Family::LagrangeP2 || q->family() != Family::LagrangeP1)
    throw std::invalid_argument("stokes_project: needs V_h and Q_h fields");
  const SparseMatrix a = assemble_matrix({FormKind::Stiffness, v, v, nullptr, 1.0 / re});
  const SparseMatrix g = assemble_matrix({FormKind::DivPressure, q, v});
  const Vector rhs_v = a.multiply(u.coeffs) - g.multiply(p.coeffs);
  const Vector rhs_q = g.multiply_transpose(u.coeffs);
  const Vector ones = assemble_load(*q, ScalarSource([](const PointContext&) { return 1.0; }),
                                    kMassDegree);
  Constraints bc = apply_essential_bc(*v);
  for (std::size_t k = 0; k < bc.dofs.size(); ++k)
    bc.values[k] = u.coeffs[bc.dofs[k]];
  return solve_stokes(v, q, re, rhs_v, rhs_q, ones.dot(p.coeffs), bc);
}

} // namespace mhd
