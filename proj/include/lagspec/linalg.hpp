#pragma once

// Dense complex-matrix primitives used throughout lagspec.
//
// All indices are zero-based. Singular values are always returned in
// descending order; eigenvalues come back as an unordered multiset.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lagspec {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Residual tolerance for eigenpairs, relative to the operator norm.
inline constexpr double kEigTol = 1e-9;
// Singular values below kRankTol * s_1 count as zero.
inline constexpr double kRankTol = 1e-8;
// D and the Schur complement must have s_min > kBlockInvTol * ||.||.
inline constexpr double kBlockInvTol = 1e-10;
// Slack for singular-value inequalities, relative to the largest s_1 involved.
inline constexpr double kInterlaceTol = 1e-10;

struct SingularSpectrum {
  RealVector values;  // descending, nonnegative
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index size() const { return values.size(); }
  double largest() const { return values.size() ? values(0) : 0.0; }
  double smallest() const {
    return values.size() ? values(values.size() - 1) : 0.0;
  }
};

struct EigenSpectrum {
  ComplexVector values;

  Eigen::Index dim() const { return values.size(); }
};

// Throws DomainError when any entry is NaN or infinite.
void require_finite(const ComplexMatrix& m, const char* what);

EigenSpectrum eigenvalues(const ComplexMatrix& m);
SingularSpectrum singular_values(const ComplexMatrix& m);
double least_singular_value(const ComplexMatrix& m);

double operator_norm(const ComplexMatrix& m);
double hs_norm(const ComplexMatrix& m);

// Number of singular values above kRankTol * s_1.
Eigen::Index numeric_rank(const ComplexMatrix& m);

// Inverse of [[a, b], [c, d]] assembled from the Schur complement of d.
// Throws NumericError naming the block ("D" or "Schur complement") that
// fails the invertibility threshold.
ComplexMatrix block_inverse(const ComplexMatrix& a, const ComplexMatrix& b,
                            const ComplexMatrix& c, const ComplexMatrix& d);

// Distance from column l to the span of the remaining columns, via the
// Schur complement of the minor with row and column l removed.
double column_distance(const ComplexMatrix& m, Eigen::Index l);

struct InterlacingReport {
  bool pass = true;
  // margins[i] = lhs - rhs of the i-th inequality; pass iff all >= -tol.
  std::vector<double> margins;
  double min_margin = 0.0;
};

// Checks s_i(m1) >= s_{i+r}(m2) and s_i(m2) >= s_{i+r}(m1) for every
// valid i, after verifying rank(m1 - m2) <= r. The margins list holds the
// first family followed by the second.
InterlacingReport perturbation_interlacing_check(const ComplexMatrix& m1,
                                                 const ComplexMatrix& m2,
                                                 Eigen::Index r);

// Checks s_i(m[rows, cols]) <= s_i(m) for every i.
InterlacingReport submatrix_interlacing_check(
    const ComplexMatrix& m, std::span<const Eigen::Index> rows,
    std::span<const Eigen::Index> cols);

ComplexMatrix submatrix(const ComplexMatrix& m,
                        std::span<const Eigen::Index> rows,
                        std::span<const Eigen::Index> cols);

}  // namespace lagspec
