#include "lagspec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lagspec/errors.hpp"

namespace lagspec {

void require_finite(const ComplexMatrix& m, const char* what) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw DomainError(std::string(what) + ": empty matrix");
  }
  if (!m.allFinite()) {
    throw DomainError(std::string(what) + ": non-finite entry");
  }
}

EigenSpectrum eigenvalues(const ComplexMatrix& m) {
  require_finite(m, "eigenvalues");
  if (m.rows() != m.cols()) {
    throw DomainError("eigenvalues: matrix is " + std::to_string(m.rows()) +
                      "x" + std::to_string(m.cols()) + ", not square");
  }
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigenvalues: complex Schur iteration did not converge");
  }
  return EigenSpectrum{solver.eigenvalues()};
}

SingularSpectrum singular_values(const ComplexMatrix& m) {
  require_finite(m, "singular_values");
  RealVector values;
  if (std::min(m.rows(), m.cols()) <= 16) {
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    if (svd.info() != Eigen::Success) {
      throw NumericError("singular_values: Jacobi SVD did not converge");
    }
    values = svd.singularValues();
  } else {
    Eigen::BDCSVD<ComplexMatrix> svd(m);
    if (svd.info() != Eigen::Success) {
      throw NumericError("singular_values: divide-and-conquer SVD did not converge");
    }
    values = svd.singularValues();
  }
  // Eigen already sorts descending; enforce it so callers can rely on it.
  std::sort(values.data(), values.data() + values.size(), std::greater<>());
  return SingularSpectrum{std::move(values), m.rows(), m.cols()};
}

double least_singular_value(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw DomainError("least_singular_value: matrix must be square");
  }
  return singular_values(m).smallest();
}

double operator_norm(const ComplexMatrix& m) { return singular_values(m).largest(); }

double hs_norm(const ComplexMatrix& m) { return m.norm(); }

Eigen::Index numeric_rank(const ComplexMatrix& m) {
  const auto sv = singular_values(m);
  const double cutoff = kRankTol * sv.largest();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv.values(i) > cutoff) ++rank;
  }
  return rank;
}

namespace {

void require_invertible(const ComplexMatrix& m, const char* block) {
  const auto sv = singular_values(m);
  if (!(sv.smallest() > kBlockInvTol * sv.largest())) {
    throw NumericError(std::string("block_inverse: ") + block +
                       " is numerically singular (s_min = " +
                       std::to_string(sv.smallest()) + ", s_max = " +
                       std::to_string(sv.largest()) + ")");
  }
}

}  // namespace

ComplexMatrix block_inverse(const ComplexMatrix& a, const ComplexMatrix& b,
                            const ComplexMatrix& c, const ComplexMatrix& d) {
  const Eigen::Index p = a.rows();
  const Eigen::Index q = d.rows();
  if (a.cols() != p || d.cols() != q || b.rows() != p || b.cols() != q ||
      c.rows() != q || c.cols() != p) {
    throw DomainError("block_inverse: inconsistent block shapes");
  }
  require_invertible(d, "D");
  const Eigen::PartialPivLU<ComplexMatrix> d_lu(d);
  const ComplexMatrix d_inv = d_lu.inverse();
  const ComplexMatrix schur = a - b * d_inv * c;
  require_invertible(schur, "Schur complement A - B D^-1 C");
  const ComplexMatrix schur_inv = Eigen::PartialPivLU<ComplexMatrix>(schur).inverse();

  ComplexMatrix out(p + q, p + q);
  out.topLeftCorner(p, p) = schur_inv;
  out.topRightCorner(p, q) = -schur_inv * b * d_inv;
  out.bottomLeftCorner(q, p) = -d_inv * c * schur_inv;
  out.bottomRightCorner(q, q) = d_inv + d_inv * c * schur_inv * b * d_inv;
  return out;
}

double column_distance(const ComplexMatrix& m, Eigen::Index l) {
  require_finite(m, "column_distance");
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw DomainError("column_distance: matrix must be square");
  if (l < 0 || l >= n) throw DomainError("column_distance: column index out of range");
  if (n == 1) return std::abs(m(0, 0));

  std::vector<Eigen::Index> rest;
  rest.reserve(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i != l) rest.push_back(i);
  }
  const ComplexMatrix minor = submatrix(m, rest, rest);
  const auto minor_sv = singular_values(minor);
  if (!(minor_sv.smallest() > kBlockInvTol * std::max(1.0, minor_sv.largest()))) {
    throw NumericError("column_distance: minor without index " + std::to_string(l) +
                       " is singular");
  }
  Eigen::RowVectorXcd row(n - 1);
  ComplexVector col(n - 1);
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    row(i) = m(l, rest[static_cast<std::size_t>(i)]);
    col(i) = m(rest[static_cast<std::size_t>(i)], l);
  }
  // w = row * minor^{-1}, computed as a solve against the adjoint.
  const Eigen::PartialPivLU<ComplexMatrix> lu(minor.adjoint());
  const Eigen::RowVectorXcd w = lu.solve(row.adjoint()).adjoint();
  const Complex numerator = m(l, l) - (w * col)(0);
  return std::abs(numerator) / std::sqrt(1.0 + w.squaredNorm());
}

ComplexMatrix submatrix(const ComplexMatrix& m, std::span<const Eigen::Index> rows,
                        std::span<const Eigen::Index> cols) {
  ComplexMatrix out(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= m.rows()) throw DomainError("submatrix: row index out of range");
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j] < 0 || cols[j] >= m.cols()) {
        throw DomainError("submatrix: column index out of range");
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
    }
  }
  return out;
}

namespace {

// s_j with the convention s_j = 0 past the end.
double sv_at(const SingularSpectrum& s, Eigen::Index j) {
  return j < s.size() ? s.values(j) : 0.0;
}

void push_margin(InterlacingReport& report, double margin, double tol) {
  report.margins.push_back(margin);
  report.min_margin = report.margins.size() == 1 ? margin : std::min(report.min_margin, margin);
  if (margin < -tol) report.pass = false;
}

}  // namespace

InterlacingReport perturbation_interlacing_check(const ComplexMatrix& m1,
                                                 const ComplexMatrix& m2,
                                                 Eigen::Index r) {
  if (m1.rows() != m2.rows() || m1.cols() != m2.cols()) {
    throw DomainError("perturbation_interlacing_check: shape mismatch");
  }
  if (r < 0) throw DomainError("perturbation_interlacing_check: negative rank bound");
  const auto s1 = singular_values(m1);
  const auto s2 = singular_values(m2);
  const ComplexMatrix diff = m1 - m2;
  if (diff.norm() > 0.0) {
    const auto sd = singular_values(diff);
    const double cutoff = kRankTol * std::max({s1.largest(), s2.largest(), sd.largest()});
    for (Eigen::Index j = r; j < sd.size(); ++j) {
      if (sd.values(j) > cutoff) {
        throw DomainError("perturbation_interlacing_check: rank(m1 - m2) exceeds " +
                          std::to_string(r));
      }
    }
  }
  const double tol = kInterlaceTol * std::max({1.0, s1.largest(), s2.largest()});
  InterlacingReport report;
  const Eigen::Index count = s1.size();
  for (Eigen::Index i = 0; i < count; ++i) push_margin(report, s1.values(i) - sv_at(s2, i + r), tol);
  for (Eigen::Index i = 0; i < count; ++i) push_margin(report, s2.values(i) - sv_at(s1, i + r), tol);
  return report;
}

InterlacingReport submatrix_interlacing_check(const ComplexMatrix& m,
                                              std::span<const Eigen::Index> rows,
                                              std::span<const Eigen::Index> cols) {
  if (rows.empty() || cols.empty()) {
    throw DomainError("submatrix_interlacing_check: empty index set");
  }
  const ComplexMatrix sub = submatrix(m, rows, cols);
  const auto full = singular_values(m);
  const auto part = singular_values(sub);
  const double tol = kInterlaceTol * std::max(1.0, full.largest());
  InterlacingReport report;
  for (Eigen::Index i = 0; i < part.size(); ++i) {
    push_margin(report, sv_at(full, i) - part.values(i), tol);
  }
  return report;
}

}  // namespace lagspec
