#include "lagspec/random.hpp"

#include <cmath>
#include <numbers>

namespace lagspec {

std::pair<double, double> Rng::normal_pair() {
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const auto [a, b] = normal_pair();
  spare_ = b;
  has_spare_ = true;
  return a;
}

}  // namespace lagspec
