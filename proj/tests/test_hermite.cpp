#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "chaoslab/errors.hpp"
#include "chaoslab/hermite.hpp"

using namespace chaoslab;

namespace {

// Explicit sum for the probabilists' polynomial: He_q(x) = q! sum_m (-1)^m x^{q-2m} / (m! (q-2m)! 2^m).
long double hermite_explicit(int q, long double x) {
  long double sum = 0.0L;
  for (int m = 0; 2 * m <= q; ++m) {
    const long double term = std::pow(x, static_cast<long double>(q - 2 * m)) /
                             (std::tgamma(static_cast<long double>(m + 1)) *
                              std::tgamma(static_cast<long double>(q - 2 * m + 1)) *
                              std::pow(2.0L, static_cast<long double>(m)));
    sum += (m % 2 ? -term : term);
  }
  return sum * std::tgamma(static_cast<long double>(q + 1));
}

// E[f(Z)] by composite Simpson on [-16, 16].
template <typename F>
double gaussian_simpson(F f, int steps = 40000) {
  const double L = 16.0, h = 2.0 * L / steps;
  double sum = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double x = -L + i * h;
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * f(x) * std::exp(-0.5 * x * x);
  }
  return sum * h / 3.0 / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

TEST(Hermite, recurrence_examples) {
  EXPECT_DOUBLE_EQ(hermite_normalized(1, 3.0), 3.0);
  EXPECT_NEAR(hermite_normalized(2, 0.0), -1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(hermite_normalized(4, 0.0), 3.0 / std::sqrt(24.0), 1e-15);
  EXPECT_DOUBLE_EQ(hermite_normalized(0, -7.5), 1.0);
}

TEST(Hermite, recurrence_matches_explicit_polynomial) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = u(rng);
    for (int q = 0; q <= 20; ++q) {
      const long double raw = hermite_explicit(q, x);
      const long double ours =
          hermite_normalized(q, static_cast<long double>(x)) * std::sqrt(std::tgamma(q + 1.0L));
      EXPECT_LE(std::abs(ours - raw), 1e-8L * std::abs(raw)) << "q=" << q << " x=" << x;
    }
  }
}

TEST(Hermite, all_orders_agree_with_single) {
  std::vector<double> out(31);
  hermite_normalized_all(1.7, out);
  for (int q = 0; q <= 30; ++q) EXPECT_NEAR(out[q], hermite_normalized(q, 1.7), 1e-12);
}

TEST(Hermite, unit_variance_and_orthogonality) {
  for (int q = 0; q <= 20; ++q) {
    const double v = gaussian_simpson([q](double x) {
      const double h = hermite_normalized(q, x);
      return h * h;
    });
    EXPECT_NEAR(v, 1.0, 1e-8) << q;
  }
  for (int p = 0; p <= 12; ++p)
    for (int q = p + 1; q <= 12; ++q) {
      const double c = gaussian_simpson(
          [p, q](double x) { return hermite_normalized(p, x) * hermite_normalized(q, x); });
      EXPECT_LE(std::abs(c), 1e-8) << p << "," << q;
    }
}

TEST(Hermite, relu_published_table_values) {
  EXPECT_NEAR(relu_coeff_paper(0), 0.3989423, 1e-7);
  EXPECT_DOUBLE_EQ(relu_coeff_paper(1), 0.5);
  EXPECT_DOUBLE_EQ(relu_coeff_paper(3), 0.0);
  EXPECT_DOUBLE_EQ(relu_coeff_paper(7), 0.0);
}

TEST(Hermite, relu_quadrature_matches_sqrt_two_pi_closed_form) {
  for (int q : {2, 4, 6, 8}) {
    double dfact = 1.0;
    for (int m = q - 3; m > 1; m -= 2) dfact *= m;
    const double closed = dfact / std::sqrt(2.0 * std::numbers::pi * std::tgamma(q + 1.0));
    const double quad = coeff_quadrature(Activation::relu(), q, 64);
    EXPECT_NEAR(std::abs(quad), closed, 1e-8) << q;
    EXPECT_NEAR(std::abs(relu_coeff_paper(q) / quad), std::numbers::sqrt2, 1e-6) << q;
    EXPECT_NEAR(relu_coeff_exact(q), quad, 1e-10) << q;
  }
}

TEST(Hermite, quadrature_examples) {
  EXPECT_NEAR(coeff_quadrature(Activation::relu(), 2, 64), 1.0 / (2.0 * std::sqrt(std::numbers::pi)),
              1e-7);
  EXPECT_NEAR(coeff_quadrature(Activation::erf(), 1, 64), 2.0 / std::sqrt(3.0 * std::numbers::pi),
              1e-7);
  EXPECT_NEAR(coeff_quadrature(Activation::erf(), 2, 64), 0.0, 1e-12);
}

TEST(Hermite, quadrature_converges_in_panels) {
  const double fine = coeff_quadrature(Activation::tanh(), 5, 256);
  EXPECT_NEAR(coeff_quadrature(Activation::tanh(), 5, 64), fine, 1e-10);
  EXPECT_NEAR(gaussian_norm_sq(Activation::tanh(), 32), gaussian_norm_sq(Activation::tanh(), 256),
              1e-10);
}

TEST(Hermite, expansion_examples) {
  const auto relu = expansion(Activation::relu(), 8);
  for (int q = 3; q <= 8; q += 2) EXPECT_EQ(relu.coeff(q), 0.0) << q;
  EXPECT_EQ(relu.source(2), CoeffSource::closed_form);

  const auto x2 = expansion(Activation::parse("poly:0,0,1"), 4);
  EXPECT_NEAR(x2.coeff(0), 1.0, 1e-14);
  EXPECT_NEAR(x2.coeff(2), std::sqrt(2.0), 1e-14);
  for (int q : {1, 3, 4}) EXPECT_NEAR(x2.coeff(q), 0.0, 1e-14);
  EXPECT_NEAR(parseval_gap(x2), 0.0, 1e-12);

  const auto table = expansion(Activation::parse("table:J1=1"), 4);
  EXPECT_EQ(table.coeff(1), 1.0);
  EXPECT_EQ(table.coeff(0), 0.0);
  EXPECT_EQ(table.coeff(4), 0.0);
}

TEST(Hermite, parseval_examples) {
  const auto relu = expansion(Activation::relu(), 50);
  EXPECT_NEAR(relu.sigma_norm_sq(), 0.5, 1e-12);
  const double gap = parseval_gap(relu);
  EXPECT_GE(gap, 0.0);
  EXPECT_LE(gap, 1e-3);

  const auto erf = expansion(Activation::erf(), 40);
  double bound = 0.0;
  for (int q = 41; q < 400; ++q) bound += std::pow(2.0 / 3.0, q);
  EXPECT_LE(parseval_gap(erf), bound + 1e-6);
}

TEST(Hermite, parseval_gap_nonnegative_and_decreasing_for_builtins) {
  for (const char* name : {"relu", "erf", "tanh", "logistic"}) {
    const auto act = Activation::parse(name);
    double previous = 1e300;
    for (int Q : {5, 10, 20, 40, 60}) {
      const double gap = parseval_gap(expansion(act, Q));
      EXPECT_GE(gap, -1e-12) << name << " Q=" << Q;
      EXPECT_LE(gap, previous + 1e-12) << name << " Q=" << Q;
      previous = gap;
    }
  }
}

TEST(Hermite, bessel_inequality) {
  for (const char* name : {"relu", "erf", "tanh", "logistic", "poly:1,2,0,-1"}) {
    const auto exp = expansion(Activation::parse(name), 60);
    double sum = 0.0;
    for (int q = 0; q <= exp.qmax(); ++q) sum += exp.coeff_sq(q);
    EXPECT_LE(sum, exp.sigma_norm_sq() + 1e-10) << name;
  }
}

TEST(Hermite, parity) {
  const auto erf = expansion(Activation::erf(), 30);
  const auto tanh = expansion(Activation::tanh(), 30);
  const auto relu = expansion(Activation::relu(), 30);
  for (int q = 0; q <= 30; q += 2) {
    EXPECT_LE(std::abs(erf.coeff(q)), 1e-10) << q;
    EXPECT_LE(std::abs(tanh.coeff(q)), 1e-10) << q;
  }
  for (int q = 3; q <= 30; q += 2) EXPECT_LE(std::abs(relu.coeff(q)), 1e-10) << q;
}

TEST(Hermite, relu_log_extension_matches_linear_coefficients) {
  const auto relu = expansion(Activation::relu(), 512);
  for (int q : {2, 10, 100, 400, 512})
    EXPECT_NEAR(relu.log_coeff_sq(q), std::log(relu.coeff_sq(q)), 1e-9) << q;
  EXPECT_TRUE(relu.has_extension());
  EXPECT_TRUE(std::isfinite(relu.log_coeff_sq(5000)));
}

TEST(Hermite, decay_fits) {
  const auto relu = expansion(Activation::relu(), 200);
  EXPECT_NEAR(decay_fit(relu, DecayModel::power).exponent, 1.25, 0.1);
  const auto tanh = expansion(Activation::tanh(), 200);
  EXPECT_GT(decay_fit(tanh, DecayModel::sqrt_exponential).exponent, 0.0);
}

TEST(Hermite, decay_fit_needs_six_coefficients) {
  const auto x2 = expansion(Activation::parse("poly:0,0,1"), 10);
  EXPECT_THROW(decay_fit(x2, DecayModel::power), InsufficientData);
}

TEST(Hermite, activation_errors) {
  EXPECT_THROW(Activation::parse("softplusx"), InvalidActivation);
  EXPECT_THROW(Activation::parse("power:0.4"), InvalidActivation);
  const auto wild = Activation::callable([](double z) { return std::exp(z * z); }, "exp(z^2)");
  EXPECT_THROW(expansion(wild, 4), InvalidActivation);
  EXPECT_THROW(expansion(Activation::relu(), 0), DomainError);
  EXPECT_THROW(coeff_quadrature(Activation::relu(), 2, 8), DomainError);
}

TEST(Hermite, paper_mode_is_relu_only) {
  const auto paper = expansion(Activation::relu(), 8, {64, CoeffMode::paper_verbatim});
  EXPECT_EQ(paper.source(4), CoeffSource::paper_verbatim);
  EXPECT_DOUBLE_EQ(paper.coeff(4), relu_coeff_paper(4));
  EXPECT_THROW(expansion(Activation::erf(), 8, {64, CoeffMode::paper_verbatim}), Unsupported);
}
