#include "lagspec/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "lagspec/errors.hpp"

namespace lagspec {

double ks_one_sample(std::vector<double> samples, const Cdf& cdf, const Cdf& cdf_left) {
  if (samples.empty()) throw DomainError("ks_one_sample: no samples");
  std::sort(samples.begin(), samples.end());
  const Cdf& left = cdf_left ? cdf_left : cdf;
  const double m = static_cast<double>(samples.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    const double x = samples[i];
    const double below = static_cast<double>(i) / m;   // F_hat(x-)
    const double upto = static_cast<double>(j) / m;    // F_hat(x)
    d = std::max({d, std::abs(upto - cdf(x)), std::abs(below - left(x))});
    i = j;
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

ChiSquare chi_square_uniform(std::span<const std::size_t> counts) {
  if (counts.size() < 2) throw DomainError("chi_square_uniform: need at least 2 bins");
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total <= 0.0) throw DomainError("chi_square_uniform: no observations");
  const double expected = total / static_cast<double>(counts.size());
  ChiSquare out;
  for (auto c : counts) {
    const double diff = static_cast<double>(c) - expected;
    out.statistic += diff * diff / expected;
  }
  out.dof = counts.size() - 1;
  out.p_value = boost::math::gamma_q(0.5 * static_cast<double>(out.dof), 0.5 * out.statistic);
  return out;
}

MeanSe mean_and_se(std::span<const double> values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace lagspec
