#pragma once

// Entry laws and the matrices built from an N x n sample X:
//   A  the lag-k shift,            A[i][j] = 1 iff i = j + k
//   Y  the lag-k auto-covariance,  Y = X A X^*
//   Z  the circular variant,       Z = X J X^* = Y_1 + x_1 x_n^*
//   H', H  the (N+n-k) linearizations of Y - zI
//   the 2N Hermitian dilation of M - zI.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "lagspec/linalg.hpp"
#include "lagspec/random.hpp"

namespace lagspec {

enum class LawKind {
  ComplexGaussian,  // Re, Im independent N(0, 1/(2n))
  UniformPhase,     // modulus 1/sqrt(n), uniform phase
  TwoPointComplex,  // (e1 + i e2)/sqrt(2n), e1, e2 independent signs
  RealGaussian,     // N(0, 1/n) on the real line; violates the non-degeneracy condition
};

std::string_view to_string(LawKind kind);
LawKind law_kind_from_string(std::string_view name);

struct EntryLaw {
  LawKind kind = LawKind::ComplexGaussian;
  Eigen::Index n = 1;
  // Bound on n^2 E|X|^4.
  double declared_m4 = 2.0;
  // 1 - |n E[X^2]|; must be positive for a law that is not supported on a line.
  double declared_c0 = 1.0;

  static EntryLaw make(LawKind kind, Eigen::Index n);

  bool non_degenerate() const { return declared_c0 > 0.0; }
  Complex draw(Rng& rng) const;
};

struct EnsembleSpec {
  Eigen::Index n = 1;        // columns
  Eigen::Index big_n = 1;    // rows (N)
  Eigen::Index k = 1;        // lag
  EntryLaw law;
  std::uint64_t master_seed = 0;
  std::optional<double> declared_gamma0;

  static EnsembleSpec make(Eigen::Index n, Eigen::Index big_n, Eigen::Index k,
                           LawKind kind, std::uint64_t master_seed);

  double gamma0() const { return static_cast<double>(big_n) / static_cast<double>(n); }
  double gamma1() const { return static_cast<double>(k) / static_cast<double>(n); }

  // Throws DomainError on 1 <= k < n violations, a law scaled for another n,
  // a degenerate law, or N/n outside (gamma0/2, 3 gamma0/2).
  void validate() const;
};

struct SeededTrial {
  std::uint64_t trial_index = 0;
  std::uint64_t derived_seed = 0;

  static SeededTrial make(std::uint64_t master_seed, std::uint64_t trial_index) {
    return {trial_index, derive_seed(master_seed, trial_index)};
  }
};

// N x n matrix of i.i.d. draws, filled column by column.
ComplexMatrix sample_entry_matrix(const EnsembleSpec& spec, const SeededTrial& trial);

ComplexMatrix shift_matrix(Eigen::Index n, Eigen::Index k);
// J[i][j] = 1 iff i = j + 1 (mod n).
ComplexMatrix cyclic_permutation(Eigen::Index n);

// Y = (x_{k+1}, ..., x_n)(x_1, ..., x_{n-k})^*.
ComplexMatrix build_autocov(const ComplexMatrix& x, Eigen::Index k);
// Same matrix as the literal sum of rank-one terms x_{j+k} x_j^*.
ComplexMatrix build_autocov_lag_sum(const ComplexMatrix& x, Eigen::Index k);
// Same matrix as X A X^* with the explicit shift matrix.
ComplexMatrix build_autocov_via_shift(const ComplexMatrix& x, Eigen::Index k);

ComplexMatrix build_circular(const ComplexMatrix& x);

struct Linearization {
  ComplexMatrix h_prime;
  ComplexMatrix h;
  bool reordered = false;  // true when 2k + 1 <= n
};

// H' = [[zI_N, (x_{k+1}..x_n)], [(x_1..x_{n-k})^*, I_{n-k}]]. H is H' with
// the trailing n-k columns permuted so that the lower-right block becomes
// (e_{n-2k+1}, ..., e_{n-k}, e_1, ..., e_{n-2k}); H = H' when 2k + 1 > n.
Linearization build_linearization(const ComplexMatrix& x, Complex z, Eigen::Index k);

// [[0, M - zI], [(M - zI)^*, 0]]
ComplexMatrix hermitize(const ComplexMatrix& m, Complex z);

// Default norm-conditioning constant 1 + sqrt(N/n) + 0.5.
double default_norm_bound(Eigen::Index big_n, Eigen::Index n);

struct MomentReport {
  std::size_t samples = 0;
  Complex mean;
  double mean_se = 0.0;           // standard error of |mean| per component
  double n_var = 0.0;             // n E|X - mean|^2
  double n_var_se = 0.0;
  double abs_n_ex2 = 0.0;         // |n E[X^2]|
  double abs_n_ex2_se = 0.0;
  double n2_e_abs4 = 0.0;         // n^2 E|X|^4
  double n2_e_abs4_se = 0.0;
  double estimated_c0 = 0.0;      // 1 - |n E[X^2]|
  // |n E X^2| - 3 se > 1 - declared_c0: the declared margin is too optimistic.
  bool declared_c0_inconsistent = false;
  // 1 - |n E X^2| <= 3 se: indistinguishable from a law supported on a line.
  bool c2_violated = false;
  bool m4_exceeded = false;       // n^2 E|X|^4 - 3 se > declared_m4
};

MomentReport moment_diagnostics(const EntryLaw& law, std::size_t sample_count,
                                std::uint64_t seed);

}  // namespace lagspec
