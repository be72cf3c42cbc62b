#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace homog {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Compressed-row sparse matrix. Built from triplets; duplicate entries are
/// summed in insertion order so assembly stays deterministic.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  static SparseMatrix from_triplets(int rows, int cols,
                                    const std::vector<int>& ti,
                                    const std::vector<int>& tj,
                                    const std::vector<double>& tv);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }

  const std::vector<int>& row_offsets() const { return row_offsets_; }
  const std::vector<int>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  std::vector<double> multiply(const std::vector<double>& x) const;

  /// Entry lookup (0 when absent); linear in the row length.
  double at(int i, int j) const;

  std::vector<double> diagonal() const;

  /// y = a*this + b*other, matching sparsity union. Patterns need not agree.
  static SparseMatrix add(double a, const SparseMatrix& lhs, double b,
                          const SparseMatrix& rhs);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_offsets_{0};
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients for SPD systems. The returned
/// residual is ||b - Ax|| / ||b||. max_iter <= 0 selects 20 * n.
CgResult solve_cg(const SparseMatrix& a, const std::vector<double>& b,
                  double tol = 1e-10, int max_iter = 0);

/// As solve_cg but throws SolverError on non-convergence, reporting the
/// final residual.
std::vector<double> solve_cg_checked(const SparseMatrix& a, const std::vector<double>& b,
                                     double tol = 1e-10, int max_iter = 0,
                                     const std::string& context = "cg");

}  // namespace homog
