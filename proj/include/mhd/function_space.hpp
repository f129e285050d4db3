#pragma once

#include "mhd/common.hpp"
#include "mhd/mesh.hpp"
#include "mhd/reference_element.hpp"

#include <memory>
#include <span>
#include <vector>

namespace mhd
{

/// Affine map of a cell in its canonical frame: the local vertices are the
/// cell's global vertices in increasing index order. Local edge and face
/// orientations then coincide with the global ones, so every dof of a
/// shared entity has the same meaning in all adjacent cells. The Jacobian
/// determinant is signed.
struct ElementMap
{
  std::array<int, 4> vertices{};
  Vec3 origin = Vec3::Zero();
  Mat3 jacobian = Mat3::Identity();
  Mat3 inverse = Mat3::Identity();
  Mat3 inverse_transpose = Mat3::Identity();
  double det = 1.0;

  Vec3 map(const Vec3& ref) const { return origin + jacobian * ref; }
  Vec3 pullback(const Vec3& x) const { return inverse * (x - origin); }
  double abs_det() const { return std::abs(det); }
};

/// Physical basis values of one cell at a set of points.
///
/// Scalar spaces fill `scalar` and `gradient`. All vector spaces fill
/// `value`; V_h adds `jacobian` (row i is the gradient of component i),
/// `curl` and `divergence`, C_h adds `curl`, D_h adds `divergence`.
/// Indexed [point * num_dofs + dof].
struct ElementValues
{
  int num_points = 0;
  int num_dofs = 0;
  std::vector<Vec3> x;
  /// Reference weight times |det J|.
  std::vector<double> weights;
  std::vector<double> scalar;
  std::vector<Vec3> gradient;
  std::vector<Vec3> value;
  std::vector<Mat3> jacobian;
  std::vector<Vec3> curl;
  std::vector<double> divergence;

  int index(int point, int dof) const { return point * num_dofs + dof; }
};

/// Global dof layout of one of the four discrete spaces.
///
///  - LagrangeP1 (Q_h): one dof per vertex.
///  - LagrangeP2 (V_h): vector valued; dof 3 * node + component with nodes
///    numbered vertices first, then num_vertices + edge.
///  - Nedelec2 (C_h): dof 2 * edge + moment.
///  - BDM1 (D_h): dof 3 * face + moment.
///
/// Boundary dofs are those attached to boundary entities (none for P1).
class FunctionSpace
{
public:
  FunctionSpace(std::shared_ptr<const Mesh> mesh, Family family);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  Family family() const { return family_; }
  int value_dim() const { return family_ == Family::LagrangeP1 ? 1 : 3; }
  int dim() const { return dim_; }
  int local_dim() const { return local_dim_; }

  std::span<const int> cell_dofs(int cell) const
  {
    return {cell_dofs_.data() + static_cast<std::size_t>(cell) * local_dim_,
            static_cast<std::size_t>(local_dim_)};
  }
  const ElementMap& element_map(int cell) const { return maps_[cell]; }

  const std::vector<int>& boundary_dofs() const { return boundary_dofs_; }
  bool is_boundary_dof(int dof) const { return boundary_flag_[dof] != 0; }

  /// Physical basis at the given reference points of a cell. Weights may be
  /// empty when only values are needed.
  void evaluate_basis(int cell, const ReferenceTable& table,
                      std::span<const Vec3> ref_points,
                      std::span<const double> ref_weights,
                      ElementValues& out) const;

private:
  std::shared_ptr<const Mesh> mesh_;
  Family family_;
  int dim_ = 0;
  int local_dim_ = 0;
  std::vector<int> cell_dofs_;
  std::vector<ElementMap> maps_;
  std::vector<int> boundary_dofs_;
  std::vector<char> boundary_flag_;
};

std::shared_ptr<const FunctionSpace>
build_space(std::shared_ptr<const Mesh> mesh, Family family);

/// Coefficient vector bound to a space.
struct FEField
{
  std::shared_ptr<const FunctionSpace> space;
  Vector coeffs;

  FEField() = default;
  explicit FEField(std::shared_ptr<const FunctionSpace> s)
      : space(std::move(s)), coeffs(Vector::Zero(space->dim()))
  {
  }
  FEField(std::shared_ptr<const FunctionSpace> s, Vector c);
};

/// Canonical interpolation through the dof functionals.
FEField interpolate(std::shared_ptr<const FunctionSpace> space,
                    const VectorField& field, double t);
FEField interpolate(std::shared_ptr<const FunctionSpace> space,
                    const ScalarField& field, double t);

/// Field values at reference points of one cell; arrays sized like the
/// corresponding ElementValues members with one entry per point.
struct FieldValues
{
  std::vector<double> scalar;
  std::vector<Vec3> gradient;
  std::vector<Vec3> value;
  std::vector<Mat3> jacobian;
  std::vector<Vec3> curl;
  std::vector<double> divergence;
};

FieldValues evaluate(const FEField& field, int cell,
                     std::span<const Vec3> ref_points);

/// Contracts precomputed basis values with cell coefficients.
void contract(const FunctionSpace& space, const ElementValues& basis,
              const Vector& coeffs, int cell, FieldValues& out);

/// Field value as an integrand source (cell-local evaluation).
VectorSource value_source(const FEField& field);
ScalarSource scalar_source(const FEField& field);

/// Essential boundary data: dofs and their prescribed values.
struct Constraints
{
  std::vector<int> dofs;
  std::vector<double> values;
};

/// Homogeneous data on all boundary dofs of V_h, C_h or D_h.
Constraints apply_essential_bc(const FunctionSpace& space);
/// Boundary lifting: boundary dofs take the interpolated dof values.
Constraints apply_essential_bc(const FunctionSpace& space,
                               const VectorField& field, double t);

} // namespace mhd
