#include "mhd/sparse.hpp"

#include <umfpack.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <string>

namespace mhd
{

void TripletList::append(const TripletList& block, int row_offset,
                         int col_offset, double scale, bool transpose)
{
  entries_.reserve(entries_.size() + block.entries_.size());
  for (const Triplet& t : block.entries_)
  {
    if (transpose)
      entries_.push_back({t.col + row_offset, t.row + col_offset, scale * t.value});
    else
      entries_.push_back({t.row + row_offset, t.col + col_offset, scale * t.value});
  }
}

SparseMatrix::SparseMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0)
{
}

SparseMatrix assemble_finalize(std::span<const Triplet> triplets, int rows,
                               int cols)
{
  SparseMatrix m(rows, cols);
  std::vector<int> count(rows + 1, 0);
  for (const Triplet& t : triplets)
  {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw std::out_of_range("assemble_finalize: triplet (" + std::to_string(t.row)
                              + ", " + std::to_string(t.col) + ") out of range");
    ++count[t.row + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());

  // Bucket by row preserving input order, then sort each row by column so
  // duplicates are summed in a deterministic order.
  std::vector<int> order(triplets.size());
  std::vector<int> next(count.begin(), count.end() - 1);
  for (std::size_t i = 0; i < triplets.size(); ++i)
    order[next[triplets[i].row]++] = static_cast<int>(i);

  m.col_index_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  for (int r = 0; r < rows; ++r)
  {
    auto first = order.begin() + count[r];
    auto last = order.begin() + count[r + 1];
    std::stable_sort(first, last, [&](int a, int b) {
      return triplets[a].col < triplets[b].col;
    });
    for (auto it = first; it != last;)
    {
      const int col = triplets[*it].col;
      double sum = 0.0;
      for (; it != last && triplets[*it].col == col; ++it)
        sum += triplets[*it].value;
      if (std::abs(sum) >= 1e-300)
      {
        m.col_index_.push_back(col);
        m.values_.push_back(sum);
      }
    }
    m.row_ptr_[r + 1] = static_cast<int>(m.values_.size());
  }
  return m;
}

double SparseMatrix::coeff(int row, int col) const
{
  auto first = col_index_.begin() + row_ptr_[row];
  auto last = col_index_.begin() + row_ptr_[row + 1];
  auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col)
    return 0.0;
  return values_[it - col_index_.begin()];
}

Vector SparseMatrix::multiply(const Vector& x) const
{
  if (x.size() != cols_)
    throw std::invalid_argument("SparseMatrix::multiply: size mismatch");
  Vector y = Vector::Zero(rows_);
  for (int r = 0; r < rows_; ++r)
  {
    double sum = 0.0;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      sum += values_[k] * x[col_index_[k]];
    y[r] = sum;
  }
  return y;
}

Vector SparseMatrix::multiply_transpose(const Vector& x) const
{
  if (x.size() != rows_)
    throw std::invalid_argument("SparseMatrix::multiply_transpose: size mismatch");
  Vector y = Vector::Zero(cols_);
  for (int r = 0; r < rows_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      y[col_index_[k]] += values_[k] * x[r];
  return y;
}

SparseMatrix SparseMatrix::transpose() const
{
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (int r = 0; r < rows_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      t.push_back({col_index_[k], r, values_[k]});
  return assemble_finalize(t, cols_, rows_);
}

SparseMatrix SparseMatrix::scaled(double alpha) const
{
  SparseMatrix m = *this;
  for (double& v : m.values_)
    v *= alpha;
  return m;
}

double SparseMatrix::norm_inf() const
{
  double norm = 0.0;
  for (int r = 0; r < rows_; ++r)
  {
    double sum = 0.0;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      sum += std::abs(values_[k]);
    norm = std::max(norm, sum);
  }
  return norm;
}

bool SparseMatrix::same_pattern(const SparseMatrix& other) const
{
  return rows_ == other.rows_ && cols_ == other.cols_
         && row_ptr_ == other.row_ptr_ && col_index_ == other.col_index_;
}

Eigen::MatrixXd SparseMatrix::to_dense() const
{
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows_, cols_);
  for (int r = 0; r < rows_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      d(r, col_index_[k]) = values_[k];
  return d;
}

void SparseMatrix::write_matrix_market(std::ostream& out) const
{
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << rows_ << ' ' << cols_ << ' ' << nnz() << '\n';
  out << std::setprecision(17);
  for (int r = 0; r < rows_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      out << r + 1 << ' ' << col_index_[k] + 1 << ' ' << values_[k] << '\n';
}

void apply_constraints(TripletList& matrix, Vector& rhs, std::span<const int> dofs,
                       std::span<const double> values)
{
  if (dofs.size() != values.size())
    throw std::invalid_argument("apply_constraints: dofs and values differ in length");
  if (matrix.rows() != matrix.cols() || rhs.size() != matrix.rows())
    throw std::invalid_argument("apply_constraints: system is not square");
  std::vector<double> fixed(matrix.rows(), 0.0);
  std::vector<char> is_fixed(matrix.rows(), 0);
  for (std::size_t k = 0; k < dofs.size(); ++k)
  {
    is_fixed[dofs[k]] = 1;
    fixed[dofs[k]] = values[k];
  }
  auto& entries = matrix.entries();
  std::size_t kept = 0;
  for (const Triplet& t : entries)
  {
    if (is_fixed[t.row])
      continue;
    if (is_fixed[t.col])
    {
      rhs[t.row] -= t.value * fixed[t.col];
      continue;
    }
    entries[kept++] = t;
  }
  entries.resize(kept);
  for (std::size_t k = 0; k < dofs.size(); ++k)
  {
    matrix.add(dofs[k], dofs[k], 1.0);
    rhs[dofs[k]] = values[k];
  }
}

double relative_residual(const SparseMatrix& a, const Vector& x, const Vector& b)
{
  const double res = (a.multiply(x) - b).lpNorm<Eigen::Infinity>();
  const double scale = a.norm_inf() * x.lpNorm<Eigen::Infinity>()
                       + b.lpNorm<Eigen::Infinity>();
  return scale > 0 ? res / scale : res;
}

// The CSR arrays of A are the CSC arrays of A^T; UMFPACK factors A^T and
// solves with the UMFPACK_At option.
struct Factorization::Symbolic
{
  void* handle = nullptr;
  std::vector<int> row_ptr;
  std::vector<int> col_index;
  ~Symbolic()
  {
    if (handle)
      umfpack_di_free_symbolic(&handle);
  }
};

namespace
{
// Pivots below this fraction of the largest pivot are treated as zero.
constexpr double kSingularPivotRatio = 1e-14;
constexpr int kSymmetricStrategyLimit = 20000;
} // namespace

Factorization::Factorization(const SparseMatrix& matrix)
    : Factorization(matrix, nullptr)
{
}

Factorization::Factorization(const SparseMatrix& matrix,
                             std::shared_ptr<Symbolic> symbolic)
    : n_(matrix.rows()), matrix_(matrix), symbolic_(std::move(symbolic))
{
  if (matrix.rows() != matrix.cols())
    throw std::invalid_argument("lu_factor: matrix is not square");
  if (!symbolic_)
  {
    auto sym = std::make_shared<Symbolic>();
    sym->row_ptr.assign(matrix_.row_ptr().begin(), matrix_.row_ptr().end());
    sym->col_index.assign(matrix_.col_index().begin(), matrix_.col_index().end());
    double control[UMFPACK_CONTROL];
    umfpack_di_defaults(control);
    // AMD/COLAMD first, nested dissection when its fill is lower. On the
    // 3D coupled systems plain AMD needs several times the memory.
    control[UMFPACK_ORDERING] = UMFPACK_ORDERING_CHOLMOD;
    if (n_ > kSymmetricStrategyLimit)
      control[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_UNSYMMETRIC;
    const int status = umfpack_di_symbolic(
        n_, n_, matrix_.row_ptr().data(), matrix_.col_index().data(),
        matrix_.values().data(), &sym->handle, control, nullptr);
    if (status != UMFPACK_OK)
      throw std::runtime_error("lu_factor: symbolic analysis failed (status "
                               + std::to_string(status) + ")");
    symbolic_ = std::move(sym);
  }
  factor_numeric();
}

void Factorization::factor_numeric()
{
  if (n_ == 0)
    return;
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  const int status = umfpack_di_numeric(
      matrix_.row_ptr().data(), matrix_.col_index().data(),
      matrix_.values().data(), symbolic_->handle, &numeric_, control, info);
  if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix)
    throw std::runtime_error(
        "lu_factor: numeric factorization failed (status " + std::to_string(status)
        + ", n = " + std::to_string(n_) + ", peak memory estimate "
        + std::to_string(static_cast<long long>(info[UMFPACK_PEAK_MEMORY_ESTIMATE]
                                                * info[UMFPACK_SIZE_OF_UNIT] / 1e6))
        + " MB)");

  // Locate the smallest pivot relative to the largest one.
  std::vector<double> diag(n_);
  std::vector<int> col_perm(n_);
  int do_recip = 0;
  umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
                         nullptr, col_perm.data(), diag.data(), &do_recip,
                         nullptr, numeric_);
  double max_pivot = 0.0;
  for (double d : diag)
    max_pivot = std::max(max_pivot, std::abs(d));
  int worst = -1;
  double worst_value = kSingularPivotRatio * max_pivot;
  for (int k = 0; k < n_; ++k)
    if (std::abs(diag[k]) <= worst_value)
    {
      worst_value = std::abs(diag[k]);
      worst = k;
    }
  if (status == UMFPACK_WARNING_singular_matrix || worst >= 0 || max_pivot == 0)
  {
    const int row = worst >= 0 ? col_perm[worst] : 0;
    umfpack_di_free_numeric(&numeric_);
    numeric_ = nullptr;
    throw SingularMatrixError("lu_factor: numerically singular pivot at row "
                                  + std::to_string(row),
                              row);
  }
}

Factorization::~Factorization()
{
  if (numeric_)
    umfpack_di_free_numeric(&numeric_);
}

Factorization::Factorization(Factorization&& other) noexcept
    : n_(other.n_), matrix_(std::move(other.matrix_)),
      symbolic_(std::move(other.symbolic_)), numeric_(other.numeric_)
{
  other.numeric_ = nullptr;
}

Factorization& Factorization::operator=(Factorization&& other) noexcept
{
  if (this != &other)
  {
    if (numeric_)
      umfpack_di_free_numeric(&numeric_);
    n_ = other.n_;
    matrix_ = std::move(other.matrix_);
    symbolic_ = std::move(other.symbolic_);
    numeric_ = other.numeric_;
    other.numeric_ = nullptr;
  }
  return *this;
}

Factorization Factorization::refactor(const SparseMatrix& matrix) const
{
  const bool reuse = symbolic_ && matrix.rows() == n_ && matrix.cols() == n_
                     && std::equal(matrix.row_ptr().begin(), matrix.row_ptr().end(),
                                   symbolic_->row_ptr.begin(),
                                   symbolic_->row_ptr.end())
                     && std::equal(matrix.col_index().begin(),
                                   matrix.col_index().end(),
                                   symbolic_->col_index.begin(),
                                   symbolic_->col_index.end());
  return reuse ? Factorization(matrix, symbolic_) : Factorization(matrix);
}

Vector Factorization::solve(const Vector& rhs, bool refine) const
{
  if (rhs.size() != n_)
    throw std::invalid_argument("Factorization::solve: size mismatch");
  Vector x = Vector::Zero(n_);
  if (n_ == 0)
    return x;
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  if (!refine)
    control[UMFPACK_IRSTEP] = 0;
  const int status = umfpack_di_solve(
      UMFPACK_At, matrix_.row_ptr().data(), matrix_.col_index().data(),
      matrix_.values().data(), x.data(), rhs.data(), numeric_, control, info);
  if (status != UMFPACK_OK)
    throw std::runtime_error("Factorization::solve failed (status "
                             + std::to_string(status) + ")");
  return x;
}

} // namespace mhd
