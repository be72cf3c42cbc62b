#pragma once

// Shared oracles for the test suites. These deliberately avoid the library's
// own code paths where they serve as independent checks.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "homog/sparse.hpp"

namespace homog::testutil {

/// Dense Gaussian elimination with partial pivoting; the linear-solver
/// oracle for small systems.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    }
    if (std::abs(a[piv][k]) < 1e-300) throw std::runtime_error("singular dense system");
    std::swap(a[piv], a[k]);
    std::swap(b[piv], b[k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

inline std::vector<std::vector<double>> to_dense(const SparseMatrix& m) {
  std::vector<std::vector<double>> dense(static_cast<std::size_t>(m.rows()),
                                         std::vector<double>(static_cast<std::size_t>(m.cols()), 0.0));
  const auto& offs = m.row_offsets();
  const auto& cols = m.col_indices();
  const auto& vals = m.values();
  for (int i = 0; i < m.rows(); ++i) {
    for (int k = offs[static_cast<std::size_t>(i)]; k < offs[static_cast<std::size_t>(i) + 1]; ++k) {
      dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(cols[static_cast<std::size_t>(k)])] =
          vals[static_cast<std::size_t>(k)];
    }
  }
  return dense;
}

/// Series oracle for -laplace u = 1 on the unit square with zero boundary:
/// u(x,y) = sum over odd m,n of 16/(pi^4 m n (m^2+n^2)) sin(m pi x) sin(n pi y).
inline double poisson_unit_square_series(double x, double y, int terms = 199) {
  const double pi = 3.14159265358979323846;
  double u = 0.0;
  for (int m = 1; m <= terms; m += 2) {
    for (int n = 1; n <= terms; n += 2) {
      u += 16.0 / (pi * pi * pi * pi * m * n * (m * m + n * n)) *
           std::sin(m * pi * x) * std::sin(n * pi * y);
    }
  }
  return u;
}

}  // namespace homog::testutil
