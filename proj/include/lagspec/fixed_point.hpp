#pragma once

// Limiting resolvent system for lags k >= n/2.
//
// For the dilation resolvent G(z, it) the normalized block traces satisfy
// g11 = g22 = i s with s > 0, where s solves
//
//   (t + a q)(t s + a s q - gamma0) + s |z|^2 = 0,   q = s / (1 + s^2),
//
// with a = (n - k)/n, and g12 = -z s / (t + a q). The Stieltjes transform of
// the symmetrized singular law of Y - zI at it is then i s / gamma0.

#include <vector>

#include "lagspec/linalg.hpp"

namespace lagspec {

struct ResolventParams {
  Complex z{1.0, 0.0};
  double t = 0.5;
  double gamma0 = 1.0;
  double a = 0.5;

  // Throws DomainError unless z != 0, t > 0, gamma0 > 0, a in (0, 1/2].
  void validate() const;
};

struct FixedPointSolution {
  double s = 0.0;
  Complex g12;
  double residual = 0.0;
  // More than one positive root at the target t; the continuation branch was kept.
  bool multiple_roots = false;
  int continuation_steps = 0;

  Complex g11() const { return {0.0, s}; }
  Complex g21() const { return std::conj(g12); }
};

// Left-hand side of the scalar relation.
double master_relation(double s, const ResolventParams& params);

// Every s > 0 may satisfy s <= gamma0 (t + a/2) / (|z|^2 + t^2); the relation
// is negative at 0 and positive beyond this bound.
double master_root_upper_bound(const ResolventParams& params);

// All sign-change roots in (0, upper bound], ascending.
std::vector<double> positive_roots(const ResolventParams& params);

// Continuation from t_start = max(10, 10|z|) down to params.t, seeded by the
// large-t asymptote gamma0 t / (t^2 + |z|^2). Residual <= 1e-12.
FixedPointSolution solve_s(const ResolventParams& params);

Complex g12_of(double s, const ResolventParams& params);

// i s / gamma0.
Complex predicted_stieltjes(const FixedPointSolution& solution, const ResolventParams& params);

// -(i/N) Tr G in the limit, i.e. 2 s / gamma0.
double wegner_quantity(const FixedPointSolution& solution, const ResolventParams& params);

// C (1 + t^{-16} n^{-3/2}).
double wegner_bound(double c, double t, double n);

struct ResolventBlocks {
  ComplexMatrix g11, g12, g21, g22;

  ComplexMatrix assembled() const;
};

// Blocks of (Sigma(z) - eta I)^{-1} for the dilation Sigma(z) of M - zI.
ResolventBlocks resolvent_blocks(const ComplexMatrix& m, Complex z, Complex eta);

// (i t / N) sum_i 1 / (s_i^2 + t^2) over the singular values of M - zI.
Complex empirical_resolvent_trace(const ComplexMatrix& m, Complex z, double t);
Complex empirical_resolvent_trace(const SingularSpectrum& shifted, double t);

}  // namespace lagspec
