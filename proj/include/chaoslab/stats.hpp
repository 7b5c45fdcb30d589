#pragma once

#include <span>

namespace chaoslab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double error = 0.0;  // standard error

  double z_score(double truth) const;
};

/// Sample mean and standard error of the mean.
Estimate mean_estimate(std::span<const double> samples);

/// Delete-one jackknife for the mean of `samples`; identical to the
/// classical standard error for a plain mean, kept separate so estimators
/// that are nonlinear in the mean can reuse the leave-one-out values.
Estimate jackknife_mean(std::span<const double> samples);

/// OLS slope of y on x with the standard error propagated from independent
/// errors on y.
Estimate slope_with_error(std::span<const double> x, std::span<const double> y,
                          std::span<const double> y_error);

/// Inverse-variance weighted mean of independent estimates.
Estimate pooled_mean(std::span<const Estimate> estimates);

/// Natural log of n!! for n >= -1 (with (-1)!! = 0!! = 1).
double log_double_factorial(int n);

}  // namespace chaoslab
