#include <doctest.h>

#include "mhd/sparse.hpp"

#include <random>
#include <sstream>

using namespace mhd;

namespace
{

SparseMatrix from_dense(const Eigen::MatrixXd& d)
{
  TripletList t(d.rows(), d.cols());
  for (int i = 0; i < d.rows(); ++i)
    for (int j = 0; j < d.cols(); ++j)
      if (d(i, j) != 0)
        t.add(i, j, d(i, j));
  return assemble_finalize(t);
}

} // namespace

TEST_CASE("finalize sums duplicates and drops zeros")
{
  std::vector<Triplet> t = {{0, 0, 1.0}, {0, 0, 1.0}};
  const SparseMatrix a = assemble_finalize(t, 2, 2);
  CHECK(a.nnz() == 1);
  CHECK(a.coeff(0, 0) == 2.0);

  const SparseMatrix empty = assemble_finalize(std::vector<Triplet>{}, 3, 4);
  CHECK(empty.nnz() == 0);
  CHECK(empty.to_dense().isZero(0));

  std::vector<Triplet> cancel = {{1, 1, 1.0}, {1, 1, -1.0}, {1, 0, 1e-301}};
  CHECK(assemble_finalize(cancel, 2, 2).nnz() == 0);

  CHECK_THROWS_AS(assemble_finalize(std::vector<Triplet>{{2, 0, 1.0}}, 2, 2), std::out_of_range);
  CHECK_THROWS_AS(assemble_finalize(std::vector<Triplet>{{0, -1, 1.0}}, 2, 2), std::out_of_range);
}

TEST_CASE("random triplets match dense accumulation")
{
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> idx(0, 49);
  std::uniform_real_distribution<double> val(-1, 1);
  TripletList t(50, 50);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(50, 50);
  for (int k = 0; k < 2000; ++k)
  {
    const int i = idx(rng), j = idx(rng);
    const double v = val(rng);
    t.add(i, j, v);
    dense(i, j) += v;
  }
  const SparseMatrix a = assemble_finalize(t);
  CHECK((a.to_dense() - dense).cwiseAbs().maxCoeff() <= 1e-15);
  for (int r = 0; r < a.rows(); ++r)
    for (int k = a.row_ptr()[r] + 1; k < a.row_ptr()[r + 1]; ++k)
      CHECK(a.col_index()[k - 1] < a.col_index()[k]);

  const Eigen::VectorXd x = Eigen::VectorXd::Random(50);
  CHECK((a.multiply(x) - dense * x).norm() < 1e-13);
  CHECK((a.multiply_transpose(x) - dense.transpose() * x).norm() < 1e-13);
  CHECK((a.transpose().to_dense() - dense.transpose()).norm() == 0);
  CHECK((a.scaled(-2.0).to_dense() + 2 * dense).norm() < 1e-14);
}

TEST_CASE("append with offsets, scaling and transposition")
{
  TripletList block(2, 3);
  block.add(0, 2, 1.5);
  block.add(1, 0, -2.0);
  TripletList big(6, 6);
  big.append(block, 1, 2);
  big.append(block, 3, 0, 2.0, true);
  const Eigen::MatrixXd d = assemble_finalize(big).to_dense();
  CHECK(d(1, 4) == 1.5);
  CHECK(d(2, 2) == -2.0);
  CHECK(d(5, 0) == 3.0);
  CHECK(d(3, 1) == -4.0);
}

TEST_CASE("LU solves small systems")
{
  const SparseMatrix id = from_dense(Eigen::MatrixXd::Identity(5, 5));
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, 1, 5);
  CHECK((solve(lu_factor(id), b) - b).norm() == 0);

  Eigen::MatrixXd d(2, 2);
  d << 2, 0, 0, 4;
  const Eigen::VectorXd x = solve(lu_factor(from_dense(d)), Eigen::Vector2d(2, 8));
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(2.0));

  CHECK_THROWS_AS(lu_factor(assemble_finalize(std::vector<Triplet>{}, 2, 3)),
                  std::invalid_argument);
}

TEST_CASE("LU on a random SPD matrix")
{
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> val(-1, 1);
  Eigen::MatrixXd m(100, 100);
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j)
      m(i, j) = val(rng);
  const Eigen::MatrixXd spd = m.transpose() * m + Eigen::MatrixXd::Identity(100, 100);
  const SparseMatrix a = from_dense(spd);
  const Factorization lu = lu_factor(a);

  Eigen::VectorXd b1(100), b2(100);
  for (int i = 0; i < 100; ++i)
  {
    b1[i] = val(rng);
    b2[i] = val(rng);
  }
  const Eigen::VectorXd x1 = solve(lu, b1);
  const Eigen::VectorXd x2 = solve(lu, b2);
  CHECK(relative_residual(a, x1, b1) <= 1e-10);
  CHECK((a.multiply(x1) - b1).lpNorm<Eigen::Infinity>()
        <= 1e-10 * (a.norm_inf() * x1.lpNorm<Eigen::Infinity>() + b1.lpNorm<Eigen::Infinity>()));

  // Linearity in the right-hand side.
  const double alpha = 1.7, beta = -0.4;
  const Eigen::VectorXd combo = solve(lu, alpha * b1 + beta * b2);
  CHECK((combo - (alpha * x1 + beta * x2)).norm() <= 1e-10 * combo.norm());

  // Reuse is bit-identical.
  const Eigen::VectorXd again = solve(lu, b1);
  CHECK((again - x1).cwiseAbs().maxCoeff() == 0.0);

  // Refactoring the same pattern gives the same solution.
  const Factorization lu2 = lu.refactor(a.scaled(2.0));
  CHECK((solve(lu2, b1) - 0.5 * x1).norm() <= 1e-12 * x1.norm());
}

TEST_CASE("nonsymmetric system")
{
  Eigen::MatrixXd d(3, 3);
  d << 0, 2, 1, 1, 0, 0, 3, 1, 4;
  const SparseMatrix a = from_dense(d);
  const Eigen::Vector3d b(1, 2, 3);
  const Eigen::VectorXd x = solve(lu_factor(a), b);
  CHECK((d * x - b).norm() < 1e-14);
}

TEST_CASE("singular matrices are reported with a row")
{
  Eigen::MatrixXd d = Eigen::MatrixXd::Identity(4, 4);
  d(2, 2) = 0;
  try
  {
    lu_factor(from_dense(d));
    FAIL("expected SingularMatrixError");
  }
  catch (const SingularMatrixError& e)
  {
    CHECK(e.row() == 2);
  }

  Eigen::MatrixXd r(3, 3);
  r << 1, 2, 3, 2, 4, 6, 1, 0, 1;
  CHECK_THROWS_AS(lu_factor(from_dense(r)), SingularMatrixError);
}

TEST_CASE("MatrixMarket dump")
{
  TripletList t(2, 3);
  t.add(0, 1, 0.5);
  t.add(1, 2, -1.0);
  std::ostringstream out;
  assemble_finalize(t).write_matrix_market(out);
  CHECK(out.str() == "%%MatrixMarket matrix coordinate real general\n2 3 2\n1 2 0.5\n2 3 -1\n");
}

TEST_CASE("constraints keep symmetry and fix values")
{
  Eigen::MatrixXd d(3, 3);
  d << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  TripletList t(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (d(i, j) != 0)
        t.add(i, j, d(i, j));
  Vector rhs(3);
  rhs << 1, 2, 3;
  const std::vector<int> dofs = {1};
  const std::vector<double> values = {0.5};
  apply_constraints(t, rhs, dofs, values);
  const SparseMatrix a = assemble_finalize(t);
  const Eigen::MatrixXd m = a.to_dense();
  CHECK((m - m.transpose()).norm() == 0);
  const Vector x = solve(lu_factor(a), rhs);
  CHECK(x[1] == doctest::Approx(0.5));
  // Remaining equations hold with the fixed value substituted.
  CHECK((d.row(0).dot(x) - 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK((d.row(2).dot(x) - 3) == doctest::Approx(0.0).epsilon(1e-14));
}
