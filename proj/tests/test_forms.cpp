#include <doctest.h>

#include "mhd/forms.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <cstdlib>
#include <random>

using namespace mhd;

namespace
{

std::shared_ptr<const Mesh> cube(int n)
{
  return std::make_shared<const Mesh>(build_structured_cube(n));
}

std::shared_ptr<const Mesh> random_cell(unsigned seed)
{
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  std::vector<Vec3> v = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  for (auto& x : v)
    x += Vec3(u(rng), u(rng), u(rng));
  return std::make_shared<const Mesh>(Mesh::from_cells(v, {{0, 1, 2, 3}}));
}

FEField random_field(std::shared_ptr<const FunctionSpace> s, unsigned seed)
{
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  FEField f(s);
  for (int i = 0; i < s->dim(); ++i)
    f.coeffs[i] = u(rng);
  return f;
}

} // namespace

TEST_CASE("P1 mass matrix on the reference cell")
{
  const auto mesh = std::make_shared<const Mesh>(Mesh::from_cells(
      {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, {{0, 1, 2, 3}}));
  auto q = build_space(mesh, Family::LagrangeP1);
  const Eigen::MatrixXd m = assemble_matrix({FormKind::Mass, q, q}).to_dense();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(std::abs(m(i, j) - (i == j ? 1.0 / 60 : 1.0 / 120)) < 1e-15);
}

TEST_CASE("P1 mass entries are V/10 and V/20 on any cell")
{
  const auto mesh = random_cell(3);
  auto q = build_space(mesh, Family::LagrangeP1);
  const double vol = cell_geometry(*mesh, 0).volume;
  const Eigen::MatrixXd m = assemble_matrix({FormKind::Mass, q, q}).to_dense();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(std::abs(m(i, j) - (i == j ? vol / 10 : vol / 20)) < 1e-15);
}

TEST_CASE("assembled blocks match the one-cell dense oracle")
{
  for (unsigned seed : {1u, 2u, 3u})
  {
    const auto mesh = random_cell(seed);
    auto v = build_space(mesh, Family::LagrangeP2);
    auto q = build_space(mesh, Family::LagrangeP1);
    auto c = build_space(mesh, Family::Nedelec2);
    auto d = build_space(mesh, Family::BDM1);
    const FEField w = random_field(v, seed + 10);
    const FEField b = random_field(d, seed + 20);

    std::vector<FormDescriptor> forms = {
        {FormKind::Mass, q, q},
        {FormKind::Mass, v, v},
        {FormKind::Mass, c, c},
        {FormKind::Mass, d, d},
        {FormKind::Stiffness, q, q},
        {FormKind::Stiffness, v, v},
        {FormKind::DivPressure, q, v},
        {FormKind::CurlCoupling, d, c},
        {FormKind::ConvectionSkew, v, v, &w},
        {FormKind::CrossLorentz, c, v, &b},
        {FormKind::CrossOhm, v, c, &b, -0.75},
    };
    for (const auto& f : forms)
    {
      const Eigen::MatrixXd a = assemble_matrix(f).to_dense();
      const Eigen::MatrixXd o = testing::dense_form_oracle(f);
      const double scale = std::max(1.0, o.cwiseAbs().maxCoeff());
      CHECK((a - o).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    }
  }
}

TEST_CASE("symmetry, skew-symmetry and null spaces")
{
  auto mesh = cube(2);
  auto v = build_space(mesh, Family::LagrangeP2);
  auto q = build_space(mesh, Family::LagrangeP1);
  auto c = build_space(mesh, Family::Nedelec2);
  auto d = build_space(mesh, Family::BDM1);

  for (const FormDescriptor& f : {FormDescriptor{FormKind::Mass, v, v},
                                  FormDescriptor{FormKind::Mass, c, c},
                                  FormDescriptor{FormKind::Mass, d, d},
                                  FormDescriptor{FormKind::Stiffness, v, v},
                                  FormDescriptor{FormKind::Stiffness, q, q}})
  {
    const Eigen::MatrixXd a = assemble_matrix(f).to_dense();
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * a.cwiseAbs().maxCoeff());
  }

  // Constants are in the kernel of the stiffness forms.
  const Eigen::MatrixXd kq = assemble_matrix({FormKind::Stiffness, q, q}).to_dense();
  CHECK(kq.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  const SparseMatrix kv = assemble_matrix({FormKind::Stiffness, v, v});
  Vector ones_x = Vector::Zero(v->dim());
  for (int i = 0; i < v->dim(); i += 3)
    ones_x[i] = 1;
  CHECK(kv.multiply(ones_x).cwiseAbs().maxCoeff() < 1e-12);

  const FEField w = random_field(v, 4);
  const SparseMatrix skew = assemble_matrix({FormKind::ConvectionSkew, v, v, &w});
  const Eigen::MatrixXd s = skew.to_dense();
  CHECK((s + s.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * s.cwiseAbs().maxCoeff());
  // form(u, u) = 0 with the frozen field equal to u.
  for (unsigned seed : {5u, 6u, 7u})
  {
    const FEField u = random_field(v, seed);
    const SparseMatrix cu = assemble_matrix({FormKind::ConvectionSkew, v, v, &u});
    CHECK(std::abs(u.coeffs.dot(cu.multiply(u.coeffs))) < 1e-12);
  }

  // The curl of a Nedelec field is in D_h, so the coupling matches the
  // D_h mass applied to the curl's interpolant.
  const SparseMatrix k = assemble_matrix({FormKind::CurlCoupling, d, c});
  CHECK(k.rows() == c->dim());
  CHECK(k.cols() == d->dim());
}

TEST_CASE("Lorentz and Ohm blocks are negative transposes")
{
  auto mesh = cube(2);
  auto v = build_space(mesh, Family::LagrangeP2);
  auto c = build_space(mesh, Family::Nedelec2);
  auto d = build_space(mesh, Family::BDM1);
  const FEField b = random_field(d, 8);
  const SparseMatrix lorentz = assemble_finalize(cross_product_block(c, v, b));
  const SparseMatrix ohm = assemble_finalize(cross_product_block(v, c, b));
  const Eigen::MatrixXd diff = lorentz.to_dense() + ohm.to_dense().transpose();
  CHECK(diff.cwiseAbs().maxCoeff() <= 1e-12 * lorentz.norm_inf());

  const FEField zero(d);
  CHECK(assemble_finalize(cross_product_block(c, v, zero)).nnz() == 0);
  CHECK(assemble_finalize(cross_product_block(v, c, zero)).nnz() == 0);
}

TEST_CASE("descriptor scale multiplies every entry")
{
  auto mesh = cube(1);
  auto v = build_space(mesh, Family::LagrangeP2);
  auto q = build_space(mesh, Family::LagrangeP1);
  const SparseMatrix a = assemble_matrix({FormKind::DivPressure, q, v});
  const SparseMatrix b = assemble_matrix({FormKind::DivPressure, q, v, nullptr, 0.125});
  REQUIRE(a.same_pattern(b));
  for (int k = 0; k < a.nnz(); ++k)
    CHECK(b.values()[k] == 0.125 * a.values()[k]);
}

TEST_CASE("space mismatches are rejected")
{
  auto mesh = cube(1);
  auto v = build_space(mesh, Family::LagrangeP2);
  auto q = build_space(mesh, Family::LagrangeP1);
  auto c = build_space(mesh, Family::Nedelec2);
  auto d = build_space(mesh, Family::BDM1);
  CHECK_THROWS_AS(assemble_bilinear({FormKind::CurlCoupling, c, d}), std::invalid_argument);
  CHECK_THROWS_AS(assemble_bilinear({FormKind::Mass, v, q}), std::invalid_argument);
  CHECK_THROWS_AS(assemble_bilinear({FormKind::Stiffness, c, c}), std::invalid_argument);
  CHECK_THROWS_AS(assemble_bilinear({FormKind::ConvectionSkew, v, v}), std::invalid_argument);
  const FEField b(d);
  CHECK_THROWS_AS(assemble_bilinear({FormKind::ConvectionSkew, v, v, &b}), std::invalid_argument);
  CHECK_THROWS_AS(cross_product_block(c, c, b), std::invalid_argument);
  auto other = build_space(cube(1), Family::LagrangeP1);
  CHECK_THROWS_AS(assemble_bilinear({FormKind::DivPressure, other, v}), std::invalid_argument);
}

TEST_CASE("load vectors")
{
  auto mesh = cube(2);
  auto v = build_space(mesh, Family::LagrangeP2);
  auto q = build_space(mesh, Family::LagrangeP1);
  const VectorField zero = [](const Vec3&, double) { return Vec3::Zero().eval(); };
  CHECK(assemble_load(*v, zero, 0.0, 4).norm() == 0);

  const Vec3 c(1.5, -2.0, 0.25);
  const Vector b = assemble_load(*v, [c](const Vec3&, double) { return c; }, 0.0, 4);
  for (int comp = 0; comp < 3; ++comp)
  {
    double sum = 0;
    for (int i = comp; i < v->dim(); i += 3)
      sum += b[i];
    CHECK(std::abs(sum - c[comp]) < 1e-13);
  }

  const Vector bq = assemble_load(*q, ScalarSource([](const PointContext&) { return 2.0; }), 4);
  CHECK(std::abs(bq.sum() - 2.0) < 1e-13);

  // Smooth data: degree 8 against a degree 10 oracle.
  const VectorField smooth = [](const Vec3& x, double t) {
    return Vec3(std::sin(3 * x[0]) * x[1], std::exp(x[2] - t), std::cos(x[0] * x[1]));
  };
  const Vector b8 = assemble_load(*v, smooth, 0.2, 8);
  const Vector b10 = assemble_load(*v, smooth, 0.2, 10);
  CHECK((b8 - b10).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("assembly is independent of the thread count")
{
  auto mesh = cube(3);
  auto v = build_space(mesh, Family::LagrangeP2);
  const FEField w = random_field(v, 9);
  setenv("MHD_THREADS", "1", 1);
  const SparseMatrix one = assemble_matrix({FormKind::ConvectionSkew, v, v, &w});
  setenv("MHD_THREADS", "3", 1);
  const SparseMatrix three = assemble_matrix({FormKind::ConvectionSkew, v, v, &w});
  unsetenv("MHD_THREADS");
  CHECK(assembly_threads() >= 1);
  const Eigen::MatrixXd diff = one.to_dense() - three.to_dense();
  CHECK(diff.cwiseAbs().maxCoeff() <= 1e-12 * one.norm_inf());
}
