#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "chaoslab/errors.hpp"
#include "chaoslab/sphere.hpp"

using namespace chaoslab;

TEST(Sphere, surface_area) {
  EXPECT_NEAR(surface_area(2), 2.0 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(surface_area(3), 4.0 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(surface_area(7), 33.073, 1e-3);
  for (int d = 2; d <= 20; ++d)
    if (d != 7) EXPECT_LT(surface_area(d), surface_area(7)) << d;
}

TEST(Sphere, sampling) {
  Rng a(5), b(5);
  const auto x = sample_sphere(6, a), y = sample_sphere(6, b);
  EXPECT_EQ(x.coords(), y.coords());
  EXPECT_NEAR(x.coords().norm(), 1.0, 1e-12);
  EXPECT_THROW(sample_sphere(1, a), DomainError);

  Rng rng(9);
  const auto pts = sample_sphere_points(5, 100000, rng);
  for (int i = 0; i < pts.rows(); i += 997) EXPECT_NEAR(pts.row(i).norm(), 1.0, 1e-12);
  EXPECT_NEAR(pts.col(0).mean(), 0.0, 0.01);
  EXPECT_NEAR(pts.col(0).squaredNorm() / pts.rows(), 0.2, 0.01);
}

TEST(PairMoment, exact_examples) {
  for (int d : {2, 3, 17, 500}) EXPECT_EQ(pair_moment_exact(d, 0), 1.0);
  EXPECT_NEAR(pair_moment_exact(3, 1), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(pair_moment_exact(2, 1), 0.5, 1e-14);
  EXPECT_NEAR(pair_moment_factorial(3, 2), 0.2, 1e-15);
  EXPECT_NEAR(pair_moment_factorial(10, 1), 0.1, 1e-15);
}

TEST(PairMoment, beta_equals_factorial_and_at_most_one) {
  for (int d : {2, 3, 5, 10, 50})
    for (int k = 0; k <= 20; ++k) {
      const double a = pair_moment_exact(d, k), b = pair_moment_factorial(d, k);
      EXPECT_LE(std::abs(a - b), 1e-10 * b) << d << "," << k;
      EXPECT_LE(a, 1.0);
    }
}

TEST(PairMoment, monotone_decay) {
  for (int d : {2, 3, 5, 10, 50})
    for (int k = 0; k < 20; ++k) EXPECT_LT(pair_moment_exact(d, k + 1), pair_moment_exact(d, k));
  for (int k = 1; k <= 20; ++k)
    for (int d = 2; d < 60; ++d) EXPECT_LT(pair_moment_exact(d + 1, k), pair_moment_exact(d, k));
}

TEST(PairMoment, large_dimension_stays_finite) {
  EXPECT_NEAR(pair_moment_exact(10000, 1), 1e-4, 1e-14);
  EXPECT_GT(pair_moment_exact(10000, 20), 0.0);
}

TEST(PairMoment, monte_carlo_examples) {
  Rng rng(2024);
  const auto e31 = pair_moment_mc(3, 1, 100000, rng);
  EXPECT_LE(std::abs(e31.z_score(1.0 / 3.0)), 3.0);
  const auto e103 = pair_moment_mc(10, 3, 100000, rng);
  EXPECT_LE(std::abs(e103.z_score(pair_moment_exact(10, 3))), 3.0);
  const auto e0 = pair_moment_mc(7, 0, 1000, rng);
  EXPECT_EQ(e0.value, 1.0);
  EXPECT_EQ(e0.error, 0.0);
}

// Where the exact relative sd of the sample mean is small, the sample stderr
// is a usable scale and the 4-stderr band holds. Larger (d, k) cells are
// covered by the acceptance run.
TEST(PairMoment, monte_carlo_agreement_where_resolved) {
  for (int d : {2, 3, 5, 10, 50}) {
    Rng rng(1000 + d);
    const auto mc = pair_moment_mc_all(d, 20, 100000, rng);
    for (int k = 0; k <= 20; ++k) {
      if (pair_moment_mc_relative_sd(d, k, 100000) > 0.1) continue;
      const auto& e = mc[k];
      if (e.error == 0.0) {
        EXPECT_EQ(e.value, pair_moment_exact(d, k));
        continue;
      }
      EXPECT_LE(std::abs(e.z_score(pair_moment_exact(d, k))), 4.0) << d << "," << k;
    }
  }
}

TEST(PairMoment, relative_sd_formula) {
  EXPECT_EQ(pair_moment_mc_relative_sd(4, 0, 100), 0.0);
  // d = 3, k = 1: u^2 with u uniform on [-1, 1] has mean 1/3 and E u^4 = 1/5.
  EXPECT_NEAR(pair_moment_mc_relative_sd(3, 1, 1), std::sqrt((0.2 - 1.0 / 9.0) * 9.0), 1e-12);
}
