#include "mhd/function_space.hpp"

#include <algorithm>
#include <stdexcept>

namespace mhd
{

namespace
{

constexpr int kEdgeMomentDegree = 13;
constexpr int kFaceMomentDegree = 11;

ElementMap make_map(const Mesh& mesh, int cell)
{
  ElementMap m;
  m.vertices = mesh.cell(cell);
  std::sort(m.vertices.begin(), m.vertices.end());
  m.origin = mesh.vertex(m.vertices[0]);
  for (int d = 0; d < 3; ++d)
    m.jacobian.col(d) = mesh.vertex(m.vertices[d + 1]) - m.origin;
  m.det = m.jacobian.determinant();
  if (!(std::abs(m.det) > 0.0))
    throw std::runtime_error("function space: degenerate cell "
                             + std::to_string(cell));
  m.inverse = m.jacobian.inverse();
  m.inverse_transpose = m.inverse.transpose();
  return m;
}

double edge_moment(const Mesh& mesh, int edge, int moment,
                   const VectorField& f, double t)
{
  const auto& ev = mesh.edge(edge);
  const Vec3& a = mesh.vertex(ev[0]);
  const Vec3 tangent = mesh.vertex(ev[1]) - a;
  const SimplexRule& rule = simplex_quadrature(1, kEdgeMomentDegree);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q)
  {
    const double s = rule.points[q];
    const double weight = moment == 0 ? 1.0 : 2.0 * s - 1.0;
    sum += rule.weights[q] * weight * f(a + s * tangent, t).dot(tangent);
  }
  return sum;
}

double face_moment(const Mesh& mesh, int face, int moment,
                   const VectorField& f, double t)
{
  const auto& fv = mesh.face(face);
  const Vec3& a = mesh.vertex(fv[0]);
  const Vec3 eb = mesh.vertex(fv[1]) - a;
  const Vec3 ec = mesh.vertex(fv[2]) - a;
  const Vec3 normal = eb.cross(ec);
  const SimplexRule& rule = simplex_quadrature(2, kFaceMomentDegree);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q)
  {
    const double s = rule.points[2 * q];
    const double r = rule.points[2 * q + 1];
    const double mu_a = 1.0 - s - r;
    double weight = 1.0;
    if (moment == 1)
      weight = s - mu_a;
    else if (moment == 2)
      weight = r - mu_a;
    sum += rule.weights[q] * weight * f(a + s * eb + r * ec, t).dot(normal);
  }
  return sum;
}

Vec3 p2_node_point(const Mesh& mesh, int node)
{
  if (node < mesh.num_vertices())
    return mesh.vertex(node);
  const auto& ev = mesh.edge(node - mesh.num_vertices());
  return 0.5 * (mesh.vertex(ev[0]) + mesh.vertex(ev[1]));
}

double dof_value(const FunctionSpace& space, int dof, const VectorField& f,
                 double t)
{
  const Mesh& mesh = space.mesh();
  switch (space.family())
  {
  case Family::LagrangeP2:
    return f(p2_node_point(mesh, dof / 3), t)[dof % 3];
  case Family::Nedelec2:
    return edge_moment(mesh, dof / 2, dof % 2, f, t);
  case Family::BDM1:
    return face_moment(mesh, dof / 3, dof % 3, f, t);
  case Family::LagrangeP1:
    break;
  }
  throw std::invalid_argument("interpolate: vector field into a scalar space");
}

} // namespace

FunctionSpace::FunctionSpace(std::shared_ptr<const Mesh> mesh, Family family)
    : mesh_(std::move(mesh)), family_(family)
{
  const Mesh& m = *mesh_;
  const int nc = m.num_cells();
  switch (family_)
  {
  case Family::LagrangeP1:
    dim_ = m.num_vertices();
    local_dim_ = 4;
    break;
  case Family::LagrangeP2:
    dim_ = 3 * (m.num_vertices() + m.num_edges());
    local_dim_ = 30;
    break;
  case Family::Nedelec2:
    dim_ = 2 * m.num_edges();
    local_dim_ = 12;
    break;
  case Family::BDM1:
    dim_ = 3 * m.num_faces();
    local_dim_ = 12;
    break;
  }

  maps_.reserve(nc);
  cell_dofs_.resize(static_cast<std::size_t>(nc) * local_dim_);
  for (int c = 0; c < nc; ++c)
  {
    maps_.push_back(make_map(m, c));
    const auto& v = maps_.back().vertices;
    int* dofs = cell_dofs_.data() + static_cast<std::size_t>(c) * local_dim_;
    switch (family_)
    {
    case Family::LagrangeP1:
      for (int i = 0; i < 4; ++i)
        dofs[i] = v[i];
      break;
    case Family::LagrangeP2:
      for (int i = 0; i < 4; ++i)
        for (int comp = 0; comp < 3; ++comp)
          dofs[3 * i + comp] = 3 * v[i] + comp;
      for (int k = 0; k < 6; ++k)
      {
        const int node =
            m.num_vertices() + m.find_edge(v[kTetEdges[k][0]], v[kTetEdges[k][1]]);
        for (int comp = 0; comp < 3; ++comp)
          dofs[3 * (4 + k) + comp] = 3 * node + comp;
      }
      break;
    case Family::Nedelec2:
      for (int k = 0; k < 6; ++k)
      {
        const int e = m.find_edge(v[kTetEdges[k][0]], v[kTetEdges[k][1]]);
        dofs[2 * k] = 2 * e;
        dofs[2 * k + 1] = 2 * e + 1;
      }
      break;
    case Family::BDM1:
      for (int f = 0; f < 4; ++f)
      {
        const auto& lf = kTetFaces[f];
        const int g = m.find_face(v[lf[0]], v[lf[1]], v[lf[2]]);
        for (int k = 0; k < 3; ++k)
          dofs[3 * f + k] = 3 * g + k;
      }
      break;
    }
  }

  boundary_flag_.assign(dim_, 0);
  switch (family_)
  {
  case Family::LagrangeP1:
    break;
  case Family::LagrangeP2:
    for (int node = 0; node < m.num_vertices() + m.num_edges(); ++node)
    {
      const bool bnd = node < m.num_vertices()
                           ? m.is_boundary_vertex(node)
                           : m.is_boundary_edge(node - m.num_vertices());
      if (bnd)
        for (int comp = 0; comp < 3; ++comp)
          boundary_flag_[3 * node + comp] = 1;
    }
    break;
  case Family::Nedelec2:
    for (int e = 0; e < m.num_edges(); ++e)
      if (m.is_boundary_edge(e))
        boundary_flag_[2 * e] = boundary_flag_[2 * e + 1] = 1;
    break;
  case Family::BDM1:
    for (int f = 0; f < m.num_faces(); ++f)
      if (m.is_boundary_face(f))
        for (int k = 0; k < 3; ++k)
          boundary_flag_[3 * f + k] = 1;
    break;
  }
  for (int i = 0; i < dim_; ++i)
    if (boundary_flag_[i])
      boundary_dofs_.push_back(i);
}

void FunctionSpace::evaluate_basis(int cell, const ReferenceTable& table,
                                   std::span<const Vec3> ref_points,
                                   std::span<const double> ref_weights,
                                   ElementValues& out) const
{
  const ElementMap& em = maps_[cell];
  const int np = table.num_points;
  const int nd = local_dim_;
  out.num_points = np;
  out.num_dofs = nd;
  out.x.resize(np);
  out.weights.resize(ref_weights.size());
  for (int q = 0; q < np; ++q)
    out.x[q] = em.map(ref_points[q]);
  for (std::size_t q = 0; q < ref_weights.size(); ++q)
    out.weights[q] = ref_weights[q] * em.abs_det();
  const std::size_t n = static_cast<std::size_t>(np) * nd;

  switch (family_)
  {
  case Family::LagrangeP1:
    out.scalar.resize(n);
    out.gradient.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
      out.scalar[i] = table.scalar[i];
      out.gradient[i] = em.inverse_transpose * table.gradient[i];
    }
    break;
  case Family::LagrangeP2:
    out.value.resize(n);
    out.jacobian.resize(n);
    out.curl.resize(n);
    out.divergence.resize(n);
    for (int q = 0; q < np; ++q)
      for (int node = 0; node < 10; ++node)
      {
        const double phi = table.scalar[table.index(q, node)];
        const Vec3 grad = em.inverse_transpose * table.gradient[table.index(q, node)];
        for (int comp = 0; comp < 3; ++comp)
        {
          const int i = out.index(q, 3 * node + comp);
          out.value[i] = Vec3::Zero();
          out.value[i][comp] = phi;
          out.jacobian[i] = Mat3::Zero();
          out.jacobian[i].row(comp) = grad.transpose();
          out.divergence[i] = grad[comp];
          out.curl[i] = grad.cross(Vec3::Unit(comp));
        }
      }
    break;
  case Family::Nedelec2:
    out.value.resize(n);
    out.curl.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
      const HcurlValue v = piola_hcurl(em.jacobian, em.inverse_transpose, em.det,
                                       table.vector[i], table.curl[i]);
      out.value[i] = v.value;
      out.curl[i] = v.curl;
    }
    break;
  case Family::BDM1:
    out.value.resize(n);
    out.divergence.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
      const HdivValue v =
          piola_hdiv(em.jacobian, em.det, table.vector[i], table.divergence[i]);
      out.value[i] = v.value;
      out.divergence[i] = v.divergence;
    }
    break;
  }
}

std::shared_ptr<const FunctionSpace>
build_space(std::shared_ptr<const Mesh> mesh, Family family)
{
  return std::make_shared<const FunctionSpace>(std::move(mesh), family);
}

FEField::FEField(std::shared_ptr<const FunctionSpace> s, Vector c)
    : space(std::move(s)), coeffs(std::move(c))
{
  if (coeffs.size() != space->dim())
    throw std::invalid_argument("FEField: coefficient length does not match "
                                "the space dimension");
}

FEField interpolate(std::shared_ptr<const FunctionSpace> space,
                    const VectorField& field, double t)
{
  FEField out(space);
  for (int i = 0; i < space->dim(); ++i)
    out.coeffs[i] = dof_value(*space, i, field, t);
  return out;
}

FEField interpolate(std::shared_ptr<const FunctionSpace> space,
                    const ScalarField& field, double t)
{
  if (space->family() != Family::LagrangeP1)
    throw std::invalid_argument("interpolate: scalar field needs a P1 space");
  FEField out(space);
  for (int i = 0; i < space->dim(); ++i)
    out.coeffs[i] = field(space->mesh().vertex(i), t);
  return out;
}

void contract(const FunctionSpace& space, const ElementValues& basis,
              const Vector& coeffs, int cell, FieldValues& out)
{
  const auto dofs = space.cell_dofs(cell);
  const int np = basis.num_points;
  const int nd = basis.num_dofs;
  auto fill = [&](auto& dst, const auto& src, auto zero) {
    if (src.empty())
    {
      dst.clear();
      return;
    }
    dst.assign(np, zero);
    for (int q = 0; q < np; ++q)
      for (int i = 0; i < nd; ++i)
        dst[q] += coeffs[dofs[i]] * src[basis.index(q, i)];
  };
  fill(out.scalar, basis.scalar, 0.0);
  fill(out.gradient, basis.gradient, Vec3::Zero().eval());
  fill(out.value, basis.value, Vec3::Zero().eval());
  fill(out.jacobian, basis.jacobian, Mat3::Zero().eval());
  fill(out.curl, basis.curl, Vec3::Zero().eval());
  fill(out.divergence, basis.divergence, 0.0);
}

FieldValues evaluate(const FEField& field, int cell,
                     std::span<const Vec3> ref_points)
{
  const FunctionSpace& space = *field.space;
  const ReferenceTable table = tabulate(space.family(), ref_points);
  ElementValues basis;
  space.evaluate_basis(cell, table, ref_points, {}, basis);
  FieldValues out;
  contract(space, basis, field.coeffs, cell, out);
  return out;
}

VectorSource value_source(const FEField& field)
{
  auto shared = std::make_shared<const FEField>(field);
  return [shared](const PointContext& pc) {
    const Vec3 ref[1] = {pc.ref};
    return evaluate(*shared, pc.cell, ref).value[0];
  };
}

ScalarSource scalar_source(const FEField& field)
{
  auto shared = std::make_shared<const FEField>(field);
  return [shared](const PointContext& pc) {
    const Vec3 ref[1] = {pc.ref};
    return evaluate(*shared, pc.cell, ref).scalar[0];
  };
}

Constraints apply_essential_bc(const FunctionSpace& space)
{
  if (space.family() == Family::LagrangeP1)
    throw std::invalid_argument(
        "apply_essential_bc: the pressure space has no essential conditions");
  Constraints c;
  c.dofs = space.boundary_dofs();
  c.values.assign(c.dofs.size(), 0.0);
  return c;
}

Constraints apply_essential_bc(const FunctionSpace& space,
                               const VectorField& field, double t)
{
  Constraints c = apply_essential_bc(space);
  for (std::size_t i = 0; i < c.dofs.size(); ++i)
    c.values[i] = dof_value(space, c.dofs[i], field, t);
  return c;
}

} // namespace mhd
