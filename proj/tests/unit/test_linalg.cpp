#include <numbers>

#include "doctest.h"
#include "support.hpp"

#include "lagspec/errors.hpp"
#include "lagspec/linalg.hpp"

using namespace lagspec;
using testing::max_abs;
using testing::random_matrix;

namespace {

bool contains(const EigenSpectrum& s, Complex v, double tol) {
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    if (std::abs(s.values(i) - v) <= tol) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("eigenvalues of small fixed matrices") {
  const auto id = eigenvalues(ComplexMatrix::Identity(3, 3));
  REQUIRE(id.dim() == 3);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(id.values(i) - 1.0) < 1e-14);

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = Complex{0, 2};
  d(1, 1) = -1.0;
  const auto dd = eigenvalues(d);
  CHECK(contains(dd, Complex{0, 2}, 1e-14));
  CHECK(contains(dd, -1.0, 1e-14));

  // x^2 - x - 1 against the quadratic formula.
  ComplexMatrix companion(2, 2);
  companion << 0, 1, 1, 1;
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const auto c = eigenvalues(companion);
  CHECK(contains(c, phi, 1e-10));
  CHECK(contains(c, 1.0 - phi, 1e-10));
}

TEST_CASE("eigenvalues reject bad input") {
  CHECK_THROWS_AS(eigenvalues(ComplexMatrix::Zero(2, 3)), DomainError);
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(eigenvalues(m), DomainError);
}

TEST_CASE("eigenvalue residual contract on random matrices") {
  Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix m = random_matrix(12, 12, rng);
    const auto eigs = eigenvalues(m);
    const double norm = operator_norm(m);
    for (Eigen::Index i = 0; i < eigs.dim(); ++i) {
      // s_min(M - lambda I) = min over unit v of ||Mv - lambda v||.
      ComplexMatrix shifted = m;
      shifted.diagonal().array() -= eigs.values(i);
      CHECK(least_singular_value(shifted) <= kEigTol * norm);
    }
  }
}

TEST_CASE("singular values: fixed cases") {
  const auto id = singular_values(ComplexMatrix::Identity(2, 2));
  CHECK(id.values(0) == doctest::Approx(1.0));
  CHECK(id.values(1) == doctest::Approx(1.0));

  ComplexVector u(3), v(4);
  u << 2, 0, 0;
  v << 0, 3, 0, 0;
  Rng rng(5);
  // Rotate so the rank-one matrix is not trivially sparse.
  u = u.norm() * testing::random_vector(3, rng).normalized();
  v = 3.0 * testing::random_vector(4, rng).normalized();
  const auto r1 = singular_values(u * v.adjoint());
  CHECK(r1.values(0) == doctest::Approx(6.0).epsilon(1e-12));
  for (Eigen::Index i = 1; i < r1.size(); ++i) CHECK(r1.values(i) < 1e-12);
  CHECK(r1.rows == 3);
  CHECK(r1.cols == 4);
  CHECK(r1.size() == 3);
}

TEST_CASE("singular values match the Hermitian eigen oracle") {
  Rng rng(7);
  for (auto [r, c] : {std::pair{5, 4}, std::pair{4, 5}, std::pair{20, 20}, std::pair{30, 17}}) {
    for (int trial = 0; trial < 5; ++trial) {
      const ComplexMatrix m = random_matrix(r, c, rng);
      const auto sv = singular_values(m);
      const RealVector oracle = testing::oracle_singular_values(m);
      REQUIRE(sv.size() == std::min(r, c));
      CHECK((sv.values - oracle).cwiseAbs().maxCoeff() < 1e-10);
      for (Eigen::Index i = 0; i + 1 < sv.size(); ++i) CHECK(sv.values(i) >= sv.values(i + 1));
      CHECK(sv.smallest() >= 0.0);
      // Adjoint invariance.
      CHECK((singular_values(m.adjoint()).values - sv.values).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("least singular value") {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 0.5;
  CHECK(least_singular_value(d) == doctest::Approx(0.5));

  Rng rng(9);
  ComplexMatrix rep = random_matrix(4, 4, rng);
  rep.col(2) = rep.col(0);
  CHECK(least_singular_value(rep) < 1e-12 * operator_norm(rep));

  CHECK_THROWS_AS(least_singular_value(ComplexMatrix::Zero(2, 3)), DomainError);

  // Property: s_min(M) ||M^{-1}|| = 1 against an elimination inverse.
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexMatrix m = random_matrix(6, 6, rng);
    const double prod = least_singular_value(m) * operator_norm(testing::oracle_inverse(m));
    CHECK(prod == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("operator and Hilbert-Schmidt norms") {
  for (int n : {1, 3, 7}) {
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    CHECK(operator_norm(id) == doctest::Approx(1.0));
    CHECK(hs_norm(id) == doctest::Approx(std::sqrt(n)));
  }
  Rng rng(11);
  const ComplexVector u = testing::random_vector(5, rng);
  const ComplexVector v = testing::random_vector(3, rng);
  const ComplexMatrix r1 = u * v.adjoint();
  CHECK(operator_norm(r1) == doctest::Approx(u.norm() * v.norm()).epsilon(1e-12));
  CHECK(hs_norm(r1) == doctest::Approx(u.norm() * v.norm()).epsilon(1e-12));
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexMatrix m = random_matrix(5, 5, rng);
    const double op = operator_norm(m), hs = hs_norm(m);
    CHECK(hs >= op * (1 - 1e-14));
    CHECK(hs <= std::sqrt(5.0) * op * (1 + 1e-14));
  }
}

TEST_CASE("numeric rank") {
  Rng rng(13);
  const ComplexMatrix a = random_matrix(6, 2, rng);
  const ComplexMatrix b = random_matrix(2, 6, rng);
  CHECK(numeric_rank(a * b) == 2);
  CHECK(numeric_rank(random_matrix(4, 4, rng)) == 4);
}

TEST_CASE("block inverse: fixed cases") {
  const ComplexMatrix i5 = block_inverse(ComplexMatrix::Identity(2, 2), ComplexMatrix::Zero(2, 3),
                                         ComplexMatrix::Zero(3, 2), ComplexMatrix::Identity(3, 3));
  CHECK(max_abs(i5 - ComplexMatrix::Identity(5, 5)) == 0.0);

  ComplexMatrix a(1, 1), d(1, 1);
  a << 2.0;
  d << 4.0;
  const ComplexMatrix inv =
      block_inverse(a, ComplexMatrix::Zero(1, 1), ComplexMatrix::Zero(1, 1), d);
  CHECK(inv(0, 0) == Complex{0.5, 0});
  CHECK(inv(1, 1) == Complex{0.25, 0});
  CHECK(inv(0, 1) == Complex{});
}

TEST_CASE("block inverse matches elimination and names failing blocks") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const ComplexMatrix m = random_matrix(4, 4, rng) + 3.0 * ComplexMatrix::Identity(4, 4);
    const ComplexMatrix inv = block_inverse(m.topLeftCorner(2, 2), m.topRightCorner(2, 2),
                                            m.bottomLeftCorner(2, 2), m.bottomRightCorner(2, 2));
    CHECK(max_abs(inv - testing::oracle_inverse(m)) <= 1e-10);
    CHECK(max_abs(inv * m - ComplexMatrix::Identity(4, 4)) <= 1e-9);
  }
  // Uneven split on a moderately conditioned matrix.
  const ComplexMatrix m = random_matrix(9, 9, rng);
  const ComplexMatrix inv = block_inverse(m.topLeftCorner(4, 4), m.topRightCorner(4, 5),
                                          m.bottomLeftCorner(5, 4), m.bottomRightCorner(5, 5));
  CHECK(max_abs(m * inv - ComplexMatrix::Identity(9, 9)) <= 1e-9);

  const ComplexMatrix z2 = ComplexMatrix::Zero(2, 2);
  const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
  try {
    block_inverse(i2, z2, z2, z2);
    FAIL("singular D accepted");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("D") != std::string::npos);
  }
  try {
    // A - B D^-1 C = I - I = 0.
    block_inverse(i2, i2, i2, i2);
    FAIL("singular Schur complement accepted");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("Schur") != std::string::npos);
  }
  CHECK_THROWS_AS(block_inverse(i2, ComplexMatrix::Zero(2, 3), z2, i2), DomainError);
}

TEST_CASE("column distance") {
  CHECK(column_distance(ComplexMatrix::Identity(2, 2), 0) == doctest::Approx(1.0));
  Rng rng(19);
  ComplexMatrix dup = random_matrix(4, 4, rng);
  dup.col(3) = dup.col(1);
  CHECK(column_distance(dup, 3) < 1e-10);
  CHECK_THROWS_AS(column_distance(dup, 4), DomainError);
  CHECK_THROWS_AS(column_distance(ComplexMatrix::Zero(2, 3), 0), DomainError);

  // Minor without index 0 is singular.
  ComplexMatrix sing = ComplexMatrix::Identity(3, 3);
  sing(2, 2) = 0.0;
  CHECK_THROWS_AS(column_distance(sing, 0), NumericError);

  for (int trial = 0; trial < 100; ++trial) {
    const ComplexMatrix m = random_matrix(5, 5, rng);
    for (Eigen::Index l = 0; l < 5; ++l) {
      CHECK(std::abs(column_distance(m, l) - testing::oracle_column_distance(m, l)) <= 1e-9);
    }
  }
}

TEST_CASE("perturbation interlacing") {
  Rng rng(23);
  const ComplexMatrix m = random_matrix(6, 6, rng);
  const auto same = perturbation_interlacing_check(m, m, 0);
  CHECK(same.pass);
  CHECK(same.margins.size() == 12);
  for (double x : same.margins) CHECK(x == 0.0);

  for (int trial = 0; trial < 100; ++trial) {
    const ComplexMatrix a = random_matrix(6, 6, rng);
    const ComplexMatrix b =
        a + testing::random_vector(6, rng) * testing::random_vector(6, rng).adjoint();
    const auto rep = perturbation_interlacing_check(a, b, 1);
    CHECK(rep.pass);
    CHECK(rep.min_margin >= -1e-10);
  }

  const ComplexMatrix a = random_matrix(5, 5, rng);
  CHECK_THROWS_AS(perturbation_interlacing_check(a, a + random_matrix(5, 5, rng), 1), DomainError);
  CHECK_THROWS_AS(perturbation_interlacing_check(a, ComplexMatrix::Zero(4, 5), 1), DomainError);
}

TEST_CASE("submatrix interlacing") {
  Rng rng(29);
  const ComplexMatrix m = random_matrix(6, 6, rng);
  const std::vector<Eigen::Index> all{0, 1, 2, 3, 4, 5};
  const auto full = submatrix_interlacing_check(m, all, all);
  CHECK(full.pass);
  CHECK(full.min_margin == doctest::Approx(0.0).epsilon(1e-12));

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  for (Eigen::Index i : {0, 1}) {
    for (Eigen::Index j : {0, 1}) {
      const std::vector<Eigen::Index> r{i}, c{j};
      CHECK(submatrix_interlacing_check(d, r, c).pass);
    }
  }

  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Eigen::Index> idx = all;
    for (std::size_t i = idx.size() - 1; i > 0; --i) {
      std::swap(idx[i], idx[rng.bits() % (i + 1)]);
    }
    const std::vector<Eigen::Index> rows(idx.begin(), idx.begin() + 3);
    const std::vector<Eigen::Index> cols(idx.begin() + 1, idx.begin() + 5);
    CHECK(submatrix_interlacing_check(random_matrix(6, 6, rng), rows, cols).pass);
  }
  const std::vector<Eigen::Index> bad{7};
  CHECK_THROWS_AS(submatrix_interlacing_check(m, bad, all), DomainError);
}
