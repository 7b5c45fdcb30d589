#include <gtest/gtest.h>

#include <cmath>

#include "chaoslab/combinatorics.hpp"
#include "chaoslab/errors.hpp"

using namespace chaoslab;

TEST(Upsilon, examples) {
  EXPECT_EQ(upsilon(0, 1), 2);
  EXPECT_EQ(upsilon(0, 2), 24);
  EXPECT_EQ(upsilon(1, 2), 32);
  EXPECT_EQ(upsilon(3, 3), 36);
  EXPECT_THROW(upsilon(3, 2), DomainError);
}

TEST(Upsilon, log_scale) {
  EXPECT_NEAR(upsilon_log(0, 1), std::log(2.0), 1e-14);
  EXPECT_NEAR(upsilon_log(1, 2), std::log(32.0), 1e-14);
  for (int q = 1; q <= 100; q += 9)
    for (int q1 = 0; q1 <= q; ++q1) {
      const double exact = std::log(upsilon(q1, q).convert_to<long double>());
      EXPECT_NEAR(upsilon_log(q1, q), exact, 1e-10 * std::abs(exact) + 1e-14) << q1 << "," << q;
    }
}

TEST(Upsilon, identity) {
  EXPECT_TRUE(upsilon_identity(1, 2));
  EXPECT_TRUE(upsilon_identity(0, 3));
  for (int q = 1; q <= 30; ++q)
    for (int q1 = 0; q1 <= q; ++q1) EXPECT_TRUE(upsilon_identity(q1, q)) << q1 << "," << q;
}

TEST(Matchings, enumeration_examples) {
  EXPECT_EQ(enumerate_matchings(1, 0), 2);
  EXPECT_EQ(enumerate_matchings(2, 0), 24);
  EXPECT_EQ(enumerate_matchings(3, 3), 36);
  EXPECT_THROW(enumerate_matchings(5, 1), FeasibilityError);
}

TEST(Matchings, oracle_equals_closed_form) {
  for (int q = 1; q <= 4; ++q)
    for (int q1 = 0; q1 <= q; ++q1) EXPECT_EQ(enumerate_matchings(q, q1), upsilon(q1, q));
}

TEST(Matchings, thread_count_does_not_change_counts) {
  EXPECT_EQ(matching_histogram(4, 1), matching_histogram(4, 3));
  const auto with_oracle = diagram_count(3, true, 2);
  ASSERT_TRUE(with_oracle.oracle_counts.has_value());
  EXPECT_EQ(*with_oracle.oracle_counts, with_oracle.counts);
  EXPECT_FALSE(diagram_count(10, false).oracle_counts.has_value());
}

TEST(UpsilonMax, examples_and_location) {
  EXPECT_EQ(upsilon_max_profile(30).argmax, 10);
  EXPECT_EQ(upsilon_max_profile(60).argmax, 20);
  for (int q = 30; q <= 200; ++q) {
    const auto p = upsilon_max_profile(q);
    EXPECT_LE(std::abs(double(p.argmax) / q - 1.0 / 3.0), 2.0 / q) << q;
  }
}

TEST(UpsilonMax, ratio_bounded) {
  double sup = -1e300;
  for (int q = 10; q <= 200; ++q) {
    const auto p = upsilon_max_profile(q);
    EXPECT_LE(p.ratio, 1.0) << q;
    sup = std::max(sup, p.log_gap);
  }
  EXPECT_LT(sup, 0.0);
}

TEST(OffDiagonal, examples) {
  EXPECT_EQ(offdiag_count(2, 1, 1), 8);
  EXPECT_EQ(offdiag_count(3, 2, 2), 288);
  EXPECT_THROW(offdiag_count(3, 2, 0), DomainError);
  EXPECT_THROW(offdiag_count(2, 3, 1), DomainError);
}

TEST(OffDiagonal, dominance) {
  for (int p = 2; p <= 8; ++p)
    for (int q = 1; q < p; ++q)
      for (int p1 = p - q; p1 <= p - 1; ++p1) {
        const int s = q - p + p1;
        const BigInt lhs = binomial(q, s) * binomial(q, s) * factorial(s) * factorial(s);
        const BigInt rhs = binomial(p, p1) * binomial(p, p1) * factorial(p1) * factorial(p1);
        EXPECT_LE(lhs, rhs) << p << "," << q << "," << p1;
      }
}
