#pragma once

// The rotation-invariant limit law of the lag-1 (and slowly growing lag)
// auto-covariance spectrum at aspect ratio gamma0 = N/n.
//
// With g(x) = x (1 - gamma0 + 2x)^2 / (1 + x) on [max(0, gamma0 - 1), gamma0],
// the mass inside the disc of radius r is g^{-1}(r^2) / gamma0 up to the
// support radius sqrt(gamma0 (gamma0 + 1)). For gamma0 > 1 the law carries
// mass 1 - 1/gamma0 at the origin, so the CDF is flat at that value up to
// the branch radius (gamma0 - 1)^{3/2} / sqrt(gamma0).

#include <cstdint>
#include <vector>

#include "lagspec/linalg.hpp"

namespace lagspec {

class Gamma0Law {
 public:
  explicit Gamma0Law(double gamma0);

  double gamma0() const { return gamma0_; }

  double domain_lo() const;
  double domain_hi() const { return gamma0_; }
  double support_radius() const;
  // Zero when gamma0 <= 1.
  double branch_radius() const;
  double atom_mass() const;

  // Throws DomainError outside [domain_lo, domain_hi].
  double g(double x) const;
  // Bisection; |g(x) - y| <= 1e-12 max(1, y). Throws outside g's range.
  double g_inverse(double y) const;

  double radial_cdf(double r) const;
  // Left limit of the CDF; differs from radial_cdf only at the atom.
  double radial_cdf_left(double r) const;
  // Smallest r with radial_cdf(r) >= p; 0 for p inside the atom.
  double radial_quantile(double p) const;

 private:
  double gamma0_;
};

// Free-function spellings of the law's operations.
double g_eval(double x, double gamma0);
double g_inverse(double y, double gamma0);
double radial_cdf(double r, double gamma0);
double radial_quantile(double p, double gamma0);

// Inverse-CDF radius with a uniform angle; one Rng stream per seed.
std::vector<Complex> sample_limit_law(double gamma0, std::size_t count, std::uint64_t seed);

struct CdfRow {
  double r;
  double cdf;
};

// Rows at r_min + i*step for i < floor((r_max - r_min)/step), then r_max.
std::vector<CdfRow> cdf_table(const Gamma0Law& law, double r_min, double r_max, double step);

}  // namespace lagspec
