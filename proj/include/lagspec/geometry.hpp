#pragma once

// Compressible / incompressible unit vectors, spread sets, small-ball
// probabilities and logarithmic potentials.

#include <cstddef>
#include <span>
#include <vector>

#include "lagspec/linalg.hpp"
#include "lagspec/random.hpp"

namespace lagspec {

struct CompressibilityParams {
  double theta = 0.1;
  double rho = 0.1;

  // Throws DomainError unless both lie in (0, 1).
  void validate() const;
};

class UnitVector {
 public:
  // Throws DomainError unless |coords| = 1 within 1e-12.
  explicit UnitVector(ComplexVector coords);

  static UnitVector normalized(const ComplexVector& v);
  // Uniform on the complex unit sphere.
  static UnitVector random(Eigen::Index dim, Rng& rng);

  const ComplexVector& coords() const { return coords_; }
  Eigen::Index dim() const { return coords_.size(); }

 private:
  ComplexVector coords_;
};

// min ||u - v|| over unit v supported on at most floor(theta n) coordinates,
// i.e. sqrt(2 - 2 ||u restricted to its m largest-modulus coordinates||).
double compressibility_distance(const UnitVector& u, double theta);

bool is_compressible(const UnitVector& u, const CompressibilityParams& params);

struct SpreadSet {
  std::vector<Eigen::Index> indices;
  bool incompressible = false;
  // Lower bound on |indices| that holds for incompressible u.
  double lower_bound = 0.0;
  // Vacuously true for compressible u.
  bool bound_holds = true;
};

// J = {i : rho/sqrt(n) <= |u_i| <= 2/sqrt(theta n)}, bound 3 theta n / 4.
SpreadSet spread_set(const UnitVector& u, const CompressibilityParams& params);

// J' = J(u) restricted to |u~_i| <= 2/sqrt(theta n), bound theta n / 2.
SpreadSet joint_spread_set(const UnitVector& u, const UnitVector& u_tilde,
                           const CompressibilityParams& params);

// Rejection sampling of uniform unit vectors until one is incompressible.
UnitVector sample_incompressible(Eigen::Index dim, const CompressibilityParams& params,
                                 Rng& rng, int max_attempts = 10000);

struct SmallBallEstimate {
  double probability = 0.0;
  double pitch = 0.0;  // grid spacing of the candidate centres
  Complex best_center;
  std::size_t centers_evaluated = 0;
};

// Empirical sup_z P(S in B(z, r)) over an axis-aligned grid of centres with
// pitch r/4 that covers the sample bounding box (pitch 0 means r = 0, where
// the largest atom is returned).
SmallBallEstimate small_ball_estimate(std::span<const Complex> samples, double r);

// c r / sqrt(sum E|Z_j|^2) + c sum E|Z_j|^3 / (sum E|Z_j|^2)^{3/2}.
double berry_esseen_bound(double r, double second_moment_sum, double third_moment_sum,
                          double c);

// -(1/count) sum ln|z - p|. Throws DomainError when z hits a point.
double log_potential(std::span<const Complex> points, Complex z);

}  // namespace lagspec
