#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace lagspec {

using Cdf = std::function<double(double)>;

// sup |F_hat - F| over the sample points, with a right-continuous empirical
// CDF. Ties are grouped; at each distinct value x both F_hat(x) - F(x) and
// F_hat(x-) - F(x-) are compared. `cdf_left` defaults to `cdf` (continuous F).
double ks_one_sample(std::vector<double> samples, const Cdf& cdf, const Cdf& cdf_left = {});

// sup |F_a - F_b| between two empirical CDFs.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct ChiSquare {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

// Pearson chi-square against equal expected counts per bin.
ChiSquare chi_square_uniform(std::span<const std::size_t> counts);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_and_se(std::span<const double> values);

}  // namespace lagspec
