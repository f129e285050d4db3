#pragma once

#include "mhd/common.hpp"

#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace mhd
{

struct Triplet
{
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Unordered (row, col, value) entries; duplicates are summed on finalize.
class TripletList
{
public:
  TripletList() = default;
  TripletList(int rows, int cols) : rows_(rows), cols_(cols) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  void add(int row, int col, double value) { entries_.push_back({row, col, value}); }
  /// Appends another block at an offset, optionally scaled and transposed.
  void append(const TripletList& block, int row_offset, int col_offset,
              double scale = 1.0, bool transpose = false);
  void reserve(std::size_t n) { entries_.reserve(n); }

  const std::vector<Triplet>& entries() const { return entries_; }
  std::vector<Triplet>& entries() { return entries_; }

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Triplet> entries_;
};

/// Compressed sparse row matrix. Column indices are strictly increasing in
/// each row and entries with magnitude below 1e-300 are not stored.
class SparseMatrix
{
public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(values_.size()); }

  std::span<const int> row_ptr() const { return row_ptr_; }
  std::span<const int> col_index() const { return col_index_; }
  std::span<const double> values() const { return values_; }

  double coeff(int row, int col) const;
  Vector multiply(const Vector& x) const;
  /// A^T x
  Vector multiply_transpose(const Vector& x) const;
  SparseMatrix transpose() const;
  SparseMatrix scaled(double alpha) const;
  double norm_inf() const;
  bool same_pattern(const SparseMatrix& other) const;
  Eigen::MatrixXd to_dense() const;

  /// MatrixMarket coordinate real general format.
  void write_matrix_market(std::ostream& out) const;

  friend SparseMatrix assemble_finalize(std::span<const Triplet>, int, int);

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_index_;
  std::vector<double> values_;
};

/// Sums duplicates and compresses. Throws std::out_of_range on a bad index.
SparseMatrix assemble_finalize(std::span<const Triplet> triplets, int rows,
                               int cols);
inline SparseMatrix assemble_finalize(const TripletList& list)
{
  return assemble_finalize(list.entries(), list.rows(), list.cols());
}

/// Imposes x[dofs[k]] = values[k] on a square system: constrained rows
/// become identity rows and constrained columns are moved to the right side,
/// so a symmetric matrix stays symmetric.
void apply_constraints(TripletList& matrix, Vector& rhs, std::span<const int> dofs,
                       std::span<const double> values);

/// Raised when the LU factorization meets a zero (or negligible) pivot.
class SingularMatrixError : public std::runtime_error
{
public:
  SingularMatrixError(const std::string& what, int row)
      : std::runtime_error(what), row_(row)
  {
  }
  /// Row of the assembled matrix whose pivot vanished.
  int row() const { return row_; }

private:
  int row_;
};

/// Sparse LU factors (UMFPACK: threshold partial pivoting with an
/// approximate minimum degree column ordering). Immutable once built;
/// solves may run concurrently.
class Factorization
{
public:
  explicit Factorization(const SparseMatrix& matrix);
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;
  Factorization(const Factorization&) = delete;
  Factorization& operator=(const Factorization&) = delete;

  /// Factors a matrix with the same sparsity pattern, reusing the symbolic
  /// analysis of this factorization when possible.
  Factorization refactor(const SparseMatrix& matrix) const;

  /// refine = false skips UMFPACK's iterative refinement (e.g. when the
  /// factors only precondition a nearby matrix).
  Vector solve(const Vector& rhs, bool refine = true) const;
  int size() const { return n_; }

private:
  struct Symbolic;
  Factorization(const SparseMatrix& matrix, std::shared_ptr<Symbolic> symbolic);
  void factor_numeric();

  int n_ = 0;
  SparseMatrix matrix_;
  std::shared_ptr<Symbolic> symbolic_;
  void* numeric_ = nullptr;
};

inline Factorization lu_factor(const SparseMatrix& matrix)
{
  return Factorization(matrix);
}
inline Vector solve(const Factorization& lu, const Vector& rhs)
{
  return lu.solve(rhs);
}

/// ||A x - b||_inf / (||A||_inf ||x||_inf + ||b||_inf)
double relative_residual(const SparseMatrix& a, const Vector& x,
                         const Vector& b);

} // namespace mhd
