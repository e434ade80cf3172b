#include "lagspec/ensembles.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lagspec/errors.hpp"

namespace lagspec {

std::string_view to_string(LawKind kind) {
  switch (kind) {
    case LawKind::ComplexGaussian: return "complex-gaussian";
    case LawKind::UniformPhase: return "uniform-phase-modulus";
    case LawKind::TwoPointComplex: return "two-point-complex";
    case LawKind::RealGaussian: return "real-gaussian";
  }
  return "unknown";
}

LawKind law_kind_from_string(std::string_view name) {
  for (auto kind : {LawKind::ComplexGaussian, LawKind::UniformPhase,
                    LawKind::TwoPointComplex, LawKind::RealGaussian}) {
    if (name == to_string(kind)) return kind;
  }
  throw DomainError("unknown entry law '" + std::string(name) +
                    "' (expected complex-gaussian, uniform-phase-modulus, "
                    "two-point-complex or real-gaussian)");
}

EntryLaw EntryLaw::make(LawKind kind, Eigen::Index n) {
  if (n < 1) throw DomainError("EntryLaw: scaling dimension must be >= 1");
  switch (kind) {
    case LawKind::ComplexGaussian: return {kind, n, 2.0, 1.0};
    case LawKind::UniformPhase: return {kind, n, 1.0, 1.0};
    case LawKind::TwoPointComplex: return {kind, n, 1.0, 1.0};
    case LawKind::RealGaussian: return {kind, n, 3.0, 0.0};
  }
  throw DomainError("EntryLaw: unknown kind");
}

Complex EntryLaw::draw(Rng& rng) const {
  const double nn = static_cast<double>(n);
  switch (kind) {
    case LawKind::ComplexGaussian: {
      const double scale = std::sqrt(1.0 / (2.0 * nn));
      const auto [re, im] = rng.normal_pair();
      return {scale * re, scale * im};
    }
    case LawKind::UniformPhase: {
      const double angle = 2.0 * std::numbers::pi * rng.uniform();
      return std::polar(1.0 / std::sqrt(nn), angle);
    }
    case LawKind::TwoPointComplex: {
      const double scale = std::sqrt(1.0 / (2.0 * nn));
      const double re = rng.sign();
      const double im = rng.sign();
      return {scale * re, scale * im};
    }
    case LawKind::RealGaussian:
      return {rng.normal() / std::sqrt(nn), 0.0};
  }
  return {};
}

EnsembleSpec EnsembleSpec::make(Eigen::Index n, Eigen::Index big_n, Eigen::Index k,
                                LawKind kind, std::uint64_t master_seed) {
  EnsembleSpec spec;
  spec.n = n;
  spec.big_n = big_n;
  spec.k = k;
  spec.law = EntryLaw::make(kind, n);
  spec.master_seed = master_seed;
  spec.validate();
  return spec;
}

void EnsembleSpec::validate() const {
  if (n < 2 || big_n < 1) {
    throw DomainError("EnsembleSpec: need n >= 2 and N >= 1 (got n = " + std::to_string(n) +
                      ", N = " + std::to_string(big_n) + ")");
  }
  if (k < 1 || k >= n) {
    throw DomainError("EnsembleSpec: lag k = " + std::to_string(k) + " outside [1, n)");
  }
  if (law.n != n) {
    throw DomainError("EnsembleSpec: entry law scaled for n = " + std::to_string(law.n) +
                      " but n = " + std::to_string(n));
  }
  if (!law.non_degenerate()) {
    throw DomainError("EnsembleSpec: entry law '" + std::string(to_string(law.kind)) +
                      "' is supported on a line (c0 <= 0)");
  }
  if (declared_gamma0) {
    const double g = *declared_gamma0;
    if (!(g > 0.0) || !(gamma0() > g / 2.0 && gamma0() < 1.5 * g)) {
      throw DomainError("EnsembleSpec: N/n = " + std::to_string(gamma0()) +
                        " incompatible with declared gamma0 = " + std::to_string(g));
    }
  }
}

ComplexMatrix sample_entry_matrix(const EnsembleSpec& spec, const SeededTrial& trial) {
  spec.validate();
  Rng rng(trial.derived_seed);
  ComplexMatrix x(spec.big_n, spec.n);
  for (Eigen::Index j = 0; j < spec.n; ++j) {
    for (Eigen::Index i = 0; i < spec.big_n; ++i) x(i, j) = spec.law.draw(rng);
  }
  return x;
}

ComplexMatrix shift_matrix(Eigen::Index n, Eigen::Index k) {
  if (k < 1 || k >= n) {
    throw DomainError("shift_matrix: need 1 <= k < n (got n = " + std::to_string(n) +
                      ", k = " + std::to_string(k) + ")");
  }
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j + k < n; ++j) a(j + k, j) = 1.0;
  return a;
}

ComplexMatrix cyclic_permutation(Eigen::Index n) {
  if (n < 1) throw DomainError("cyclic_permutation: n must be >= 1");
  ComplexMatrix j = ComplexMatrix::Zero(n, n);
  for (Eigen::Index c = 0; c < n; ++c) j((c + 1) % n, c) = 1.0;
  return j;
}

namespace {

void require_lag(const ComplexMatrix& x, Eigen::Index k, const char* what) {
  require_finite(x, what);
  if (k < 1 || k >= x.cols()) {
    throw DomainError(std::string(what) + ": lag k = " + std::to_string(k) +
                      " outside [1, n) for n = " + std::to_string(x.cols()));
  }
}

}  // namespace

ComplexMatrix build_autocov(const ComplexMatrix& x, Eigen::Index k) {
  require_lag(x, k, "build_autocov");
  const Eigen::Index m = x.cols() - k;
  return x.rightCols(m) * x.leftCols(m).adjoint();
}

ComplexMatrix build_autocov_lag_sum(const ComplexMatrix& x, Eigen::Index k) {
  require_lag(x, k, "build_autocov_lag_sum");
  ComplexMatrix y = ComplexMatrix::Zero(x.rows(), x.rows());
  for (Eigen::Index j = 0; j + k < x.cols(); ++j) {
    y.noalias() += x.col(j + k) * x.col(j).adjoint();
  }
  return y;
}

ComplexMatrix build_autocov_via_shift(const ComplexMatrix& x, Eigen::Index k) {
  require_lag(x, k, "build_autocov_via_shift");
  return x * shift_matrix(x.cols(), k) * x.adjoint();
}

ComplexMatrix build_circular(const ComplexMatrix& x) {
  require_finite(x, "build_circular");
  if (x.cols() < 2) throw DomainError("build_circular: need n >= 2");
  ComplexMatrix z = build_autocov(x, 1);
  z.noalias() += x.col(0) * x.col(x.cols() - 1).adjoint();
  return z;
}

Linearization build_linearization(const ComplexMatrix& x, Complex z, Eigen::Index k) {
  require_lag(x, k, "build_linearization");
  if (z == Complex{0.0, 0.0}) {
    throw DomainError("build_linearization: z = 0 is excluded");
  }
  const Eigen::Index big_n = x.rows();
  const Eigen::Index n = x.cols();
  const Eigen::Index m = n - k;
  const Eigen::Index dim = big_n + m;

  Linearization out;
  out.h_prime = ComplexMatrix::Zero(dim, dim);
  out.h_prime.topLeftCorner(big_n, big_n).diagonal().setConstant(z);
  out.h_prime.topRightCorner(big_n, m) = x.rightCols(m);
  out.h_prime.bottomLeftCorner(m, big_n) = x.leftCols(m).adjoint();
  out.h_prime.bottomRightCorner(m, m).setIdentity();

  out.reordered = 2 * k + 1 <= n;
  if (!out.reordered) {
    out.h = out.h_prime;
    return out;
  }
  out.h = ComplexMatrix::Zero(dim, dim);
  out.h.topLeftCorner(big_n, big_n).diagonal().setConstant(z);
  // (x_{n-k+1}, ..., x_n, x_{k+1}, ..., x_{n-k})
  out.h.block(0, big_n, big_n, k) = x.rightCols(k);
  out.h.block(0, big_n + k, big_n, m - k) = x.middleCols(k, m - k);
  out.h.bottomLeftCorner(m, big_n) = x.leftCols(m).adjoint();
  // (e_{n-2k+1}, ..., e_{n-k}, e_1, ..., e_{n-2k})
  for (Eigen::Index c = 0; c < m; ++c) {
    const Eigen::Index row = c < k ? (n - 2 * k + c) : (c - k);
    out.h(big_n + row, big_n + c) = 1.0;
  }
  return out;
}

ComplexMatrix hermitize(const ComplexMatrix& m, Complex z) {
  require_finite(m, "hermitize");
  if (m.rows() != m.cols()) throw DomainError("hermitize: matrix must be square");
  const Eigen::Index n = m.rows();
  ComplexMatrix shifted = m;
  shifted.diagonal().array() -= z;
  ComplexMatrix out = ComplexMatrix::Zero(2 * n, 2 * n);
  out.topRightCorner(n, n) = shifted;
  out.bottomLeftCorner(n, n) = shifted.adjoint();
  return out;
}

double default_norm_bound(Eigen::Index big_n, Eigen::Index n) {
  return 1.0 + std::sqrt(static_cast<double>(big_n) / static_cast<double>(n)) + 0.5;
}

MomentReport moment_diagnostics(const EntryLaw& law, std::size_t sample_count,
                                std::uint64_t seed) {
  if (sample_count < 10000) {
    throw DomainError("moment_diagnostics: need at least 10^4 samples");
  }
  Rng rng(seed);
  const double nn = static_cast<double>(law.n);
  const double count = static_cast<double>(sample_count);

  // Running sums of the per-sample statistics and their squares.
  Complex sum_x{}, sum_x2{};
  double sum_re2 = 0, sum_im2 = 0;
  double sum_a2 = 0, sum_a2_sq = 0;
  double sum_x2_abs2 = 0;
  double sum_a4 = 0, sum_a4_sq = 0;
  for (std::size_t i = 0; i < sample_count; ++i) {
    const Complex x = law.draw(rng);
    const double a2 = std::norm(x) * nn;
    const Complex x2 = x * x * nn;
    sum_x += x;
    sum_re2 += x.real() * x.real();
    sum_im2 += x.imag() * x.imag();
    sum_a2 += a2;
    sum_a2_sq += a2 * a2;
    sum_x2 += x2;
    sum_x2_abs2 += std::norm(x2);
    sum_a4 += a2 * a2;
    sum_a4_sq += a2 * a2 * a2 * a2;
  }
  const auto se = [count](double sum, double sum_sq) {
    const double mean = sum / count;
    const double var = std::max(0.0, sum_sq / count - mean * mean);
    return std::sqrt(var / count);
  };

  MomentReport r;
  r.samples = sample_count;
  r.mean = sum_x / count;
  r.mean_se = std::sqrt(std::max(sum_re2, sum_im2) / count / count);
  r.n_var = sum_a2 / count - nn * std::norm(r.mean);
  // Subtracting the sample mean adds an O(1/count) fluctuation that the
  // spread of |x|^2 alone misses (it is zero for constant-modulus laws).
  r.n_var_se = std::hypot(se(sum_a2, sum_a2_sq), sum_a2 / count / count);
  const Complex ex2 = sum_x2 / count;
  r.abs_n_ex2 = std::abs(ex2);
  r.abs_n_ex2_se = std::sqrt(std::max(0.0, sum_x2_abs2 / count - std::norm(ex2)) / count);
  r.n2_e_abs4 = sum_a4 / count;
  r.n2_e_abs4_se = se(sum_a4, sum_a4_sq);
  r.estimated_c0 = 1.0 - r.abs_n_ex2;
  r.declared_c0_inconsistent = r.abs_n_ex2 - 3.0 * r.abs_n_ex2_se > 1.0 - law.declared_c0;
  r.c2_violated = r.estimated_c0 <= 3.0 * r.abs_n_ex2_se;
  // Relative slack for rounding when every sample attains the bound exactly.
  r.m4_exceeded = r.n2_e_abs4 - 3.0 * r.n2_e_abs4_se > law.declared_m4 * (1.0 + 1e-12);
  return r;
}

}  // namespace lagspec
