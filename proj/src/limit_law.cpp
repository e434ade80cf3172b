#include "lagspec/limit_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lagspec/errors.hpp"
#include "lagspec/random.hpp"

namespace lagspec {

Gamma0Law::Gamma0Law(double gamma0) : gamma0_(gamma0) {
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) {
    throw DomainError("Gamma0Law: gamma0 must be a positive finite number");
  }
}

double Gamma0Law::domain_lo() const { return std::max(0.0, gamma0_ - 1.0); }

double Gamma0Law::support_radius() const { return std::sqrt(gamma0_ * (gamma0_ + 1.0)); }

double Gamma0Law::branch_radius() const {
  if (gamma0_ <= 1.0) return 0.0;
  return std::pow(gamma0_ - 1.0, 1.5) / std::sqrt(gamma0_);
}

double Gamma0Law::atom_mass() const { return gamma0_ > 1.0 ? 1.0 - 1.0 / gamma0_ : 0.0; }

double Gamma0Law::g(double x) const {
  if (!(x >= domain_lo() && x <= domain_hi())) {
    throw DomainError("g: x = " + std::to_string(x) + " outside [" +
                      std::to_string(domain_lo()) + ", " + std::to_string(domain_hi()) + "]");
  }
  const double f = 1.0 - gamma0_ + 2.0 * x;
  return x * f * f / (1.0 + x);
}

double Gamma0Law::g_inverse(double y) const {
  double lo = domain_lo();
  double hi = domain_hi();
  const double y_lo = g(lo);
  const double y_hi = g(hi);
  const double slack = 1e-12 * std::max(1.0, std::abs(y));
  if (!(y >= y_lo - slack && y <= y_hi + slack)) {
    throw DomainError("g_inverse: y = " + std::to_string(y) + " outside [" +
                      std::to_string(y_lo) + ", " + std::to_string(y_hi) + "]");
  }
  if (y <= y_lo) return lo;
  if (y >= y_hi) return hi;
  // g is increasing; shrink [lo, hi] until the midpoint stops moving.
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(g(lo) - y) <= std::abs(g(hi) - y) ? lo : hi;
}

double Gamma0Law::radial_cdf(double r) const {
  if (!(r >= 0.0)) throw DomainError("radial_cdf: r must be >= 0");
  if (r >= support_radius()) return 1.0;
  if (gamma0_ > 1.0 && r <= branch_radius()) return atom_mass();
  const double y = std::min(r * r, g(domain_hi()));
  const double y_clamped = std::max(y, g(domain_lo()));
  return std::min(1.0, g_inverse(y_clamped) / gamma0_);
}

double Gamma0Law::radial_cdf_left(double r) const {
  if (r <= 0.0) return 0.0;
  return radial_cdf(r);
}

double Gamma0Law::radial_quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("radial_quantile: p must lie in [0, 1]");
  }
  if (p >= 1.0) return support_radius();
  if (p == 0.0 || (gamma0_ > 1.0 && p <= atom_mass())) return 0.0;
  const double x = std::clamp(gamma0_ * p, domain_lo(), domain_hi());
  double r = std::sqrt(g(x));
  // Absorb rounding in g / sqrt so that radial_cdf(r) >= p holds exactly.
  for (int i = 0; i < 64 && radial_cdf(r) < p; ++i) {
    r = std::nextafter(r, std::numeric_limits<double>::infinity());
  }
  return r;
}

double g_eval(double x, double gamma0) { return Gamma0Law(gamma0).g(x); }
double g_inverse(double y, double gamma0) { return Gamma0Law(gamma0).g_inverse(y); }
double radial_cdf(double r, double gamma0) { return Gamma0Law(gamma0).radial_cdf(r); }
double radial_quantile(double p, double gamma0) { return Gamma0Law(gamma0).radial_quantile(p); }

std::vector<Complex> sample_limit_law(double gamma0, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw DomainError("sample_limit_law: count must be >= 1");
  const Gamma0Law law(gamma0);
  Rng rng(seed);
  std::vector<Complex> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double radius = law.radial_quantile(rng.uniform());
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    out.push_back(radius == 0.0 ? Complex{0.0, 0.0} : std::polar(radius, angle));
  }
  return out;
}

std::vector<CdfRow> cdf_table(const Gamma0Law& law, double r_min, double r_max, double step) {
  if (!(step > 0.0) || !(r_min >= 0.0) || !(r_max >= r_min)) {
    throw DomainError("cdf_table: need 0 <= r_min <= r_max and step > 0");
  }
  const auto m = static_cast<long long>(std::floor((r_max - r_min) / step + 1e-9));
  std::vector<CdfRow> rows;
  rows.reserve(static_cast<std::size_t>(m) + 1);
  for (long long i = 0; i < m; ++i) {
    const double r = r_min + static_cast<double>(i) * step;
    rows.push_back({r, law.radial_cdf(r)});
  }
  rows.push_back({r_max, law.radial_cdf(r_max)});
  return rows;
}

}  // namespace lagspec
