#include "lagspec/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "lagspec/errors.hpp"

namespace lagspec {

void CompressibilityParams::validate() const {
  if (!(theta > 0.0 && theta < 1.0) || !(rho > 0.0 && rho < 1.0)) {
    throw DomainError("CompressibilityParams: theta and rho must lie in (0, 1)");
  }
}

UnitVector::UnitVector(ComplexVector coords) : coords_(std::move(coords)) {
  if (coords_.size() < 1 || !coords_.allFinite()) {
    throw DomainError("UnitVector: need a non-empty finite vector");
  }
  if (std::abs(coords_.norm() - 1.0) > 1e-12) {
    throw DomainError("UnitVector: norm differs from 1 by more than 1e-12");
  }
}

UnitVector UnitVector::normalized(const ComplexVector& v) {
  const double norm = v.norm();
  if (!(norm > 0.0)) throw DomainError("UnitVector::normalized: zero vector");
  return UnitVector(v / norm);
}

UnitVector UnitVector::random(Eigen::Index dim, Rng& rng) {
  ComplexVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto [re, im] = rng.normal_pair();
    v(i) = Complex{re, im};
  }
  return normalized(v);
}

namespace {

Eigen::Index sparsity(double theta, Eigen::Index n) {
  return static_cast<Eigen::Index>(std::floor(theta * static_cast<double>(n) + 1e-9));
}

}  // namespace

double compressibility_distance(const UnitVector& u, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw DomainError("compressibility_distance: theta must lie in (0, 1)");
  }
  const Eigen::Index n = u.dim();
  const Eigen::Index m = sparsity(theta, n);
  if (m < 1) {
    throw DomainError("compressibility_distance: floor(theta n) = 0 for n = " +
                      std::to_string(n));
  }
  std::vector<double> mags(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) mags[static_cast<std::size_t>(i)] = std::norm(u.coords()(i));
  std::partial_sort(mags.begin(), mags.begin() + m, mags.end(), std::greater<>());
  double top = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) top += mags[static_cast<std::size_t>(i)];
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * std::sqrt(top)));
}

bool is_compressible(const UnitVector& u, const CompressibilityParams& params) {
  params.validate();
  return compressibility_distance(u, params.theta) <= params.rho;
}

SpreadSet spread_set(const UnitVector& u, const CompressibilityParams& params) {
  params.validate();
  const Eigen::Index n = u.dim();
  const double nn = static_cast<double>(n);
  const double lo = params.rho / std::sqrt(nn);
  const double hi = 2.0 / std::sqrt(params.theta * nn);
  SpreadSet out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = std::abs(u.coords()(i));
    if (a >= lo && a <= hi) out.indices.push_back(i);
  }
  out.incompressible = !is_compressible(u, params);
  out.lower_bound = 0.75 * params.theta * nn;
  out.bound_holds =
      !out.incompressible || static_cast<double>(out.indices.size()) >= out.lower_bound;
  return out;
}

SpreadSet joint_spread_set(const UnitVector& u, const UnitVector& u_tilde,
                           const CompressibilityParams& params) {
  if (u.dim() != u_tilde.dim()) throw DomainError("joint_spread_set: dimension mismatch");
  SpreadSet out = spread_set(u, params);
  const double hi = 2.0 / std::sqrt(params.theta * static_cast<double>(u.dim()));
  std::erase_if(out.indices, [&](Eigen::Index i) { return std::abs(u_tilde.coords()(i)) > hi; });
  out.lower_bound = 0.5 * params.theta * static_cast<double>(u.dim());
  out.bound_holds =
      !out.incompressible || static_cast<double>(out.indices.size()) >= out.lower_bound;
  return out;
}

UnitVector sample_incompressible(Eigen::Index dim, const CompressibilityParams& params,
                                 Rng& rng, int max_attempts) {
  params.validate();
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    UnitVector u = UnitVector::random(dim, rng);
    if (!is_compressible(u, params)) return u;
  }
  throw NumericError("sample_incompressible: no incompressible draw in " +
                     std::to_string(max_attempts) + " attempts");
}

SmallBallEstimate small_ball_estimate(std::span<const Complex> samples, double r) {
  if (samples.empty()) throw DomainError("small_ball_estimate: no samples");
  if (!(r >= 0.0)) throw DomainError("small_ball_estimate: r must be >= 0");
  const double count = static_cast<double>(samples.size());

  SmallBallEstimate out;
  if (r == 0.0) {
    // Closed balls of radius 0 are points: the sup is the largest atom.
    std::vector<Complex> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end(), [](Complex a, Complex b) {
      return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    std::size_t best = 0;
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      if (j - i > best) {
        best = j - i;
        out.best_center = sorted[i];
      }
      i = j;
    }
    out.probability = static_cast<double>(best) / count;
    out.centers_evaluated = sorted.size();
    return out;
  }

  double x_min = samples[0].real(), x_max = x_min;
  double y_min = samples[0].imag(), y_max = y_min;
  for (const auto& s : samples) {
    x_min = std::min(x_min, s.real());
    x_max = std::max(x_max, s.real());
    y_min = std::min(y_min, s.imag());
    y_max = std::max(y_max, s.imag());
  }
  const double pitch = r / 4.0;
  const auto grid_x = static_cast<long long>(std::ceil((x_max - x_min) / pitch)) + 1;
  const auto grid_y = static_cast<long long>(std::ceil((y_max - y_min) / pitch)) + 1;
  if (static_cast<double>(grid_x) * static_cast<double>(grid_y) > 5e7) {
    throw DomainError("small_ball_estimate: centre grid too large for r = " + std::to_string(r));
  }

  // Bucket the samples into r x r cells so each centre scans a 3x3 block.
  const auto cells_x = static_cast<long long>(std::floor((x_max - x_min) / r)) + 1;
  const auto cells_y = static_cast<long long>(std::floor((y_max - y_min) / r)) + 1;
  const auto cell_of = [&](double x, double y) {
    const auto cx = std::clamp(static_cast<long long>(std::floor((x - x_min) / r)), 0LL, cells_x - 1);
    const auto cy = std::clamp(static_cast<long long>(std::floor((y - y_min) / r)), 0LL, cells_y - 1);
    return std::pair{cx, cy};
  };
  std::vector<std::vector<Complex>> buckets(static_cast<std::size_t>(cells_x * cells_y));
  for (const auto& s : samples) {
    const auto [cx, cy] = cell_of(s.real(), s.imag());
    buckets[static_cast<std::size_t>(cy * cells_x + cx)].push_back(s);
  }

  const double r2 = r * r * (1.0 + 1e-12);
  std::size_t best = 0;
  for (long long iy = 0; iy < grid_y; ++iy) {
    const double cy_val = y_min + static_cast<double>(iy) * pitch;
    for (long long ix = 0; ix < grid_x; ++ix) {
      const double cx_val = x_min + static_cast<double>(ix) * pitch;
      const auto [cx, cy] = cell_of(cx_val, cy_val);
      std::size_t hits = 0;
      for (long long by = std::max(0LL, cy - 1); by <= std::min(cells_y - 1, cy + 1); ++by) {
        for (long long bx = std::max(0LL, cx - 1); bx <= std::min(cells_x - 1, cx + 1); ++bx) {
          for (const auto& s : buckets[static_cast<std::size_t>(by * cells_x + bx)]) {
            const double dx = s.real() - cx_val;
            const double dy = s.imag() - cy_val;
            if (dx * dx + dy * dy <= r2) ++hits;
          }
        }
      }
      if (hits > best) {
        best = hits;
        out.best_center = Complex{cx_val, cy_val};
      }
      ++out.centers_evaluated;
    }
  }
  out.probability = static_cast<double>(best) / count;
  out.pitch = pitch;
  return out;
}

double berry_esseen_bound(double r, double second_moment_sum, double third_moment_sum,
                          double c) {
  if (!(second_moment_sum > 0.0)) {
    throw DomainError("berry_esseen_bound: second-moment sum must be positive");
  }
  return c * r / std::sqrt(second_moment_sum) +
         c * third_moment_sum / std::pow(second_moment_sum, 1.5);
}

double log_potential(std::span<const Complex> points, Complex z) {
  if (points.empty()) throw DomainError("log_potential: no points");
  double sum = 0.0;
  for (const auto& p : points) {
    const double d = std::abs(z - p);
    if (d == 0.0) {
      throw DomainError("log_potential: z coincides with a point (singular evaluation)");
    }
    sum += std::log(d);
  }
  return -sum / static_cast<double>(points.size());
}

}  // namespace lagspec
