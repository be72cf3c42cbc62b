#include "homog/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace homog {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols,
                                         const std::vector<int>& ti,
                                         const std::vector<int>& tj,
                                         const std::vector<double>& tv) {
  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  const std::size_t nnz_in = tv.size();

  std::vector<int> count(static_cast<std::size_t>(rows), 0);
  for (std::size_t k = 0; k < nnz_in; ++k) ++count[static_cast<std::size_t>(ti[k])];
  std::vector<int> start(static_cast<std::size_t>(rows) + 1, 0);
  for (int r = 0; r < rows; ++r) start[static_cast<std::size_t>(r) + 1] = start[static_cast<std::size_t>(r)] + count[static_cast<std::size_t>(r)];

  // Bucket by row preserving input order, then combine duplicates per row in
  // ascending column order; the in-row accumulation order is the insertion
  // order, which keeps assembly bitwise reproducible.
  std::vector<int> cols_tmp(nnz_in);
  std::vector<double> vals_tmp(nnz_in);
  std::vector<int> cursor(start.begin(), start.end() - 1);
  for (std::size_t k = 0; k < nnz_in; ++k) {
    const int pos = cursor[static_cast<std::size_t>(ti[k])]++;
    cols_tmp[static_cast<std::size_t>(pos)] = tj[k];
    vals_tmp[static_cast<std::size_t>(pos)] = tv[k];
  }

  m.row_offsets_.assign(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<int> order;
  for (int r = 0; r < rows; ++r) {
    const int b = start[static_cast<std::size_t>(r)];
    const int e = start[static_cast<std::size_t>(r) + 1];
    order.resize(static_cast<std::size_t>(e - b));
    std::iota(order.begin(), order.end(), b);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
      return cols_tmp[static_cast<std::size_t>(x)] < cols_tmp[static_cast<std::size_t>(y)];
    });
    int last_col = -1;
    for (const int k : order) {
      const int c = cols_tmp[static_cast<std::size_t>(k)];
      if (c == last_col) {
        m.values_.back() += vals_tmp[static_cast<std::size_t>(k)];
      } else {
        m.col_indices_.push_back(c);
        m.values_.push_back(vals_tmp[static_cast<std::size_t>(k)]);
        last_col = c;
      }
    }
    m.row_offsets_[static_cast<std::size_t>(r) + 1] = static_cast<int>(m.values_.size());
  }
  return m;
}

void SparseMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(static_cast<std::size_t>(rows_), 0.0);
  for (int r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (int k = row_offsets_[static_cast<std::size_t>(r)]; k < row_offsets_[static_cast<std::size_t>(r) + 1]; ++k) {
      acc += values_[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col_indices_[static_cast<std::size_t>(k)])];
    }
    y[static_cast<std::size_t>(r)] = acc;
  }
}

std::vector<double> SparseMatrix::multiply(const std::vector<double>& x) const {
  std::vector<double> y;
  multiply(x, y);
  return y;
}

double SparseMatrix::at(int i, int j) const {
  for (int k = row_offsets_[static_cast<std::size_t>(i)]; k < row_offsets_[static_cast<std::size_t>(i) + 1]; ++k) {
    if (col_indices_[static_cast<std::size_t>(k)] == j) return values_[static_cast<std::size_t>(k)];
  }
  return 0.0;
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(static_cast<std::size_t>(rows_), 0.0);
  for (int r = 0; r < rows_; ++r) d[static_cast<std::size_t>(r)] = at(r, r);
  return d;
}

SparseMatrix SparseMatrix::add(double a, const SparseMatrix& lhs, double b,
                               const SparseMatrix& rhs) {
  std::vector<int> ti, tj;
  std::vector<double> tv;
  ti.reserve(lhs.nonzeros() + rhs.nonzeros());
  tj.reserve(lhs.nonzeros() + rhs.nonzeros());
  tv.reserve(lhs.nonzeros() + rhs.nonzeros());
  auto push_all = [&](double s, const SparseMatrix& m) {
    for (int r = 0; r < m.rows_; ++r) {
      for (int k = m.row_offsets_[static_cast<std::size_t>(r)]; k < m.row_offsets_[static_cast<std::size_t>(r) + 1]; ++k) {
        ti.push_back(r);
        tj.push_back(m.col_indices_[static_cast<std::size_t>(k)]);
        tv.push_back(s * m.values_[static_cast<std::size_t>(k)]);
      }
    }
  };
  push_all(a, lhs);
  push_all(b, rhs);
  return from_triplets(std::max(lhs.rows_, rhs.rows_), std::max(lhs.cols_, rhs.cols_), ti, tj, tv);
}

CgResult solve_cg(const SparseMatrix& a, const std::vector<double>& b, double tol,
                  int max_iter) {
  const int n = a.rows();
  if (max_iter <= 0) max_iter = 20 * n;
  CgResult res;
  res.x.assign(static_cast<std::size_t>(n), 0.0);

  auto dot2 = [](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
  };

  const double bnorm = std::sqrt(dot2(b, b));
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }

  std::vector<double> inv_diag = a.diagonal();
  for (auto& d : inv_diag) d = (d != 0.0) ? 1.0 / d : 1.0;

  std::vector<double> r = b;  // x0 = 0
  std::vector<double> z(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = inv_diag[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
  std::vector<double> p = z;
  std::vector<double> ap(static_cast<std::size_t>(n));
  double rz = dot2(r, z);

  for (int it = 0; it < max_iter; ++it) {
    const double rnorm = std::sqrt(dot2(r, r));
    res.relative_residual = rnorm / bnorm;
    if (res.relative_residual <= tol) {
      res.converged = true;
      res.iterations = it;
      return res;
    }
    a.multiply(p, ap);
    const double pap = dot2(p, ap);
    if (!(pap > 0.0)) break;  // not SPD (or exact nullspace hit)
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i) {
      res.x[static_cast<std::size_t>(i)] += alpha * p[static_cast<std::size_t>(i)];
      r[static_cast<std::size_t>(i)] -= alpha * ap[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = inv_diag[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
    const double rz_new = dot2(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] + beta * p[static_cast<std::size_t>(i)];
  }
  res.iterations = max_iter;
  {
    std::vector<double> ax = a.multiply(res.x);
    double s = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) {
      const double d = b[i] - ax[i];
      s += d * d;
    }
    res.relative_residual = std::sqrt(s) / bnorm;
  }
  res.converged = res.relative_residual <= tol;
  return res;
}

std::vector<double> solve_cg_checked(const SparseMatrix& a, const std::vector<double>& b,
                                     double tol, int max_iter, const std::string& context) {
  CgResult res = solve_cg(a, b, tol, max_iter);
  if (!res.converged) {
    throw SolverError(context + ": cg failed to converge, relative residual " +
                      std::to_string(res.relative_residual) + " after " +
                      std::to_string(res.iterations) + " iterations");
  }
  return std::move(res.x);
}

}  // namespace homog
