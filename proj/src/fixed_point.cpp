#include "lagspec/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lagspec/errors.hpp"

namespace lagspec {

void ResolventParams::validate() const {
  if (z == Complex{0.0, 0.0}) throw DomainError("ResolventParams: z must be nonzero");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("ResolventParams: t must be > 0");
  if (!(gamma0 > 0.0)) throw DomainError("ResolventParams: gamma0 must be > 0");
  if (!(a > 0.0 && a <= 0.5)) {
    throw DomainError("ResolventParams: a = (n-k)/n must lie in (0, 1/2]");
  }
}

double master_relation(double s, const ResolventParams& p) {
  const double q = s / (1.0 + s * s);
  return (p.t + p.a * q) * (p.t * s + p.a * s * q - p.gamma0) + s * std::norm(p.z);
}

double master_root_upper_bound(const ResolventParams& p) {
  return p.gamma0 * (p.t + 0.5 * p.a) / (std::norm(p.z) + p.t * p.t);
}

namespace {

double bisect(double lo, double hi, const ResolventParams& p) {
  double f_lo = master_relation(lo, p);
  for (int iter = 0; iter < 4000; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = master_relation(mid, p);
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(master_relation(lo, p)) <= std::abs(master_relation(hi, p)) ? lo : hi;
}

}  // namespace

std::vector<double> positive_roots(const ResolventParams& params) {
  params.validate();
  const double upper = master_root_upper_bound(params) * (1.0 + 1e-9);
  if (!(master_relation(upper, params) > 0.0)) {
    throw NumericError("solve_s: relation not positive at the upper bound " +
                       std::to_string(upper));
  }
  // Log-spaced scan from upper * 1e-14 up to the bound; the relation is -gamma0 t at 0.
  constexpr int kScan = 4000;
  std::vector<double> roots;
  double prev_x = 0.0;
  double prev_f = -params.gamma0 * params.t;
  for (int i = 0; i <= kScan; ++i) {
    const double x = upper * std::pow(10.0, -14.0 + 14.0 * i / kScan);
    const double f = master_relation(x, params);
    if (f == 0.0) {
      roots.push_back(x);
    } else if ((f > 0.0) != (prev_f > 0.0) && prev_f != 0.0) {
      roots.push_back(bisect(prev_x, x, params));
    }
    prev_x = x;
    prev_f = f;
  }
  if (roots.empty()) {
    throw NumericError("solve_s: no positive root in (0, " + std::to_string(upper) + "]");
  }
  return roots;
}

FixedPointSolution solve_s(const ResolventParams& params) {
  params.validate();
  const double z2 = std::norm(params.z);
  const double t_start = std::max({10.0, 10.0 * std::abs(params.z), params.t});
  constexpr int kSteps = 80;

  FixedPointSolution out;
  double s = params.gamma0 * t_start / (t_start * t_start + z2);
  std::vector<double> roots;
  for (int step = 0; step <= kSteps; ++step) {
    ResolventParams at = params;
    at.t = step == kSteps ? params.t
                          : t_start * std::pow(params.t / t_start, static_cast<double>(step) / kSteps);
    roots = positive_roots(at);
    s = *std::min_element(roots.begin(), roots.end(), [s](double a, double b) {
      return std::abs(a - s) < std::abs(b - s);
    });
    ++out.continuation_steps;
  }
  out.s = s;
  out.multiple_roots = roots.size() > 1;
  out.residual = std::abs(master_relation(s, params));
  if (!(s > 0.0) || out.residual > 1e-12) {
    throw NumericError("solve_s: root polishing failed (s = " + std::to_string(s) +
                       ", residual = " + std::to_string(out.residual) + ")");
  }
  out.g12 = g12_of(s, params);
  return out;
}

Complex g12_of(double s, const ResolventParams& params) {
  const double q = s / (1.0 + s * s);
  return -params.z * s / (params.t + params.a * q);
}

Complex predicted_stieltjes(const FixedPointSolution& solution, const ResolventParams& params) {
  return {0.0, solution.s / params.gamma0};
}

double wegner_quantity(const FixedPointSolution& solution, const ResolventParams& params) {
  return 2.0 * solution.s / params.gamma0;
}

double wegner_bound(double c, double t, double n) {
  return c * (1.0 + std::pow(t, -16.0) * std::pow(n, -1.5));
}

ComplexMatrix ResolventBlocks::assembled() const {
  const Eigen::Index n = g11.rows();
  ComplexMatrix g(2 * n, 2 * n);
  g.topLeftCorner(n, n) = g11;
  g.topRightCorner(n, n) = g12;
  g.bottomLeftCorner(n, n) = g21;
  g.bottomRightCorner(n, n) = g22;
  return g;
}

ResolventBlocks resolvent_blocks(const ComplexMatrix& m, Complex z, Complex eta) {
  require_finite(m, "resolvent_blocks");
  if (m.rows() != m.cols()) throw DomainError("resolvent_blocks: matrix must be square");
  if (!(eta.imag() > 0.0)) {
    throw DomainError("resolvent_blocks: eta must lie in the upper half-plane");
  }
  const Eigen::Index n = m.rows();
  ComplexMatrix b = m;
  b.diagonal().array() -= z;
  const ComplexMatrix eye = ComplexMatrix::Identity(n, n);
  const ComplexMatrix left = b * b.adjoint() - eta * eta * eye;
  const ComplexMatrix right = b.adjoint() * b - eta * eta * eye;
  const Eigen::PartialPivLU<ComplexMatrix> left_lu(left);
  const Eigen::PartialPivLU<ComplexMatrix> right_lu(right);
  const ComplexMatrix left_inv = left_lu.inverse();
  if (!left_inv.allFinite()) throw NumericError("resolvent_blocks: singular shifted matrix");

  ResolventBlocks out;
  out.g11 = eta * left_inv;
  out.g12 = left_inv * b;
  out.g21 = b.adjoint() * left_inv;
  out.g22 = eta * right_lu.inverse();
  if (!out.g22.allFinite()) throw NumericError("resolvent_blocks: singular shifted matrix");
  return out;
}

Complex empirical_resolvent_trace(const SingularSpectrum& shifted, double t) {
  if (!(t > 0.0)) throw DomainError("empirical_resolvent_trace: t must be > 0");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < shifted.size(); ++i) {
    const double s = shifted.values(i);
    sum += 1.0 / (s * s + t * t);
  }
  return {0.0, t * sum / static_cast<double>(shifted.rows)};
}

Complex empirical_resolvent_trace(const ComplexMatrix& m, Complex z, double t) {
  require_finite(m, "empirical_resolvent_trace");
  if (m.rows() != m.cols()) throw DomainError("empirical_resolvent_trace: matrix must be square");
  ComplexMatrix b = m;
  b.diagonal().array() -= z;
  return empirical_resolvent_trace(singular_values(b), t);
}

}  // namespace lagspec
