#pragma once

// Generators and independent oracles shared by the unit tests. The oracles
// avoid the code paths they check: elimination is hand-written, projections
// use modified Gram-Schmidt, singular values come from a Hermitian eigensolver.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "lagspec/linalg.hpp"
#include "lagspec/random.hpp"

namespace testing {

using lagspec::Complex;
using lagspec::ComplexMatrix;
using lagspec::ComplexVector;
using lagspec::RealVector;

inline Complex gaussian(lagspec::Rng& rng) {
  const auto [a, b] = rng.normal_pair();
  return {a / std::sqrt(2.0), b / std::sqrt(2.0)};
}

inline ComplexMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, lagspec::Rng& rng) {
  ComplexMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = gaussian(rng);
  }
  return m;
}

inline ComplexVector random_vector(Eigen::Index n, lagspec::Rng& rng) {
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = gaussian(rng);
  return v;
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// Gauss-Jordan elimination with partial pivoting.
inline ComplexMatrix oracle_inverse(const ComplexMatrix& m) {
  const Eigen::Index n = m.rows();
  std::vector<std::vector<Complex>> a(n, std::vector<Complex>(2 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a[i][j] = m(i, j);
    a[i][n + i] = 1.0;
  }
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index p = c;
    for (Eigen::Index r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    std::swap(a[c], a[p]);
    const Complex piv = a[c][c];
    for (auto& v : a[c]) v /= piv;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c) continue;
      const Complex f = a[r][c];
      if (f == Complex{}) continue;
      for (Eigen::Index j = 0; j < 2 * n; ++j) a[r][j] -= f * a[c][j];
    }
  }
  ComplexMatrix inv(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) inv(i, j) = a[i][n + j];
  }
  return inv;
}

// sqrt of the eigenvalues of the smaller Gram matrix, descending.
inline RealVector oracle_singular_values(const ComplexMatrix& m) {
  const ComplexMatrix gram = m.rows() <= m.cols() ? ComplexMatrix(m * m.adjoint())
                                                  : ComplexMatrix(m.adjoint() * m);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram, Eigen::EigenvaluesOnly);
  RealVector ev = es.eigenvalues();
  std::vector<double> v(ev.data(), ev.data() + ev.size());
  for (auto& x : v) x = std::sqrt(std::max(0.0, x));
  std::sort(v.begin(), v.end(), std::greater<>());
  return Eigen::Map<RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// ||(I - P) m[:, l]|| with P the projector onto the other columns, via
// modified Gram-Schmidt run twice.
inline double oracle_column_distance(const ComplexMatrix& m, Eigen::Index l) {
  std::vector<ComplexVector> basis;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (j == l) continue;
    ComplexVector v = m.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) v -= q.dot(v) * q;
    }
    const double norm = v.norm();
    if (norm > 1e-12) basis.push_back(v / norm);
  }
  ComplexVector r = m.col(l);
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : basis) r -= q.dot(r) * q;
  }
  return r.norm();
}

// Sorted copy of a real vector (ascending).
inline std::vector<double> sorted(const RealVector& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace testing
