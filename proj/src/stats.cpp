#include "chaoslab/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace chaoslab {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need at least two paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissa");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

double Estimate::z_score(double truth) const {
  const double diff = value - truth;
  if (error == 0.0)
    return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  return diff / error;
}

Estimate mean_estimate(std::span<const double> samples) {
  if (samples.size() < 2)
    throw std::invalid_argument("mean_estimate: need at least two samples");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= n;
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

Estimate jackknife_mean(std::span<const double> samples) {
  if (samples.size() < 2)
    throw std::invalid_argument("jackknife_mean: need at least two samples");
  const std::size_t n = samples.size();
  double total = 0.0;
  for (double s : samples) total += s;
  const double mean = total / static_cast<double>(n);
  double ss = 0.0;
  for (double s : samples) {
    const double loo = (total - s) / static_cast<double>(n - 1);
    ss += (loo - mean) * (loo - mean);
  }
  const double var = ss * static_cast<double>(n - 1) / static_cast<double>(n);
  return {mean, std::sqrt(var)};
}

Estimate slope_with_error(std::span<const double> x, std::span<const double> y,
                          std::span<const double> y_error) {
  if (y_error.size() != x.size())
    throw std::invalid_argument("slope_with_error: need one error per point");
  const auto fit = fit_line(x, y);
  double mx = 0.0;
  for (double v : x) mx += v;
  mx /= static_cast<double>(x.size());
  double sxx = 0.0;
  for (double v : x) sxx += (v - mx) * (v - mx);
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = (x[i] - mx) / sxx;
    var += w * w * y_error[i] * y_error[i];
  }
  return {fit.slope, std::sqrt(var)};
}

Estimate pooled_mean(std::span<const Estimate> estimates) {
  double wsum = 0.0, total = 0.0;
  for (const auto& e : estimates) {
    if (!(e.error > 0.0)) throw std::invalid_argument("pooled_mean: errors must be positive");
    const double w = 1.0 / (e.error * e.error);
    wsum += w;
    total += w * e.value;
  }
  if (wsum == 0.0) throw std::invalid_argument("pooled_mean: no estimates");
  return {total / wsum, 1.0 / std::sqrt(wsum)};
}

double log_double_factorial(int n) {
  if (n < -1) throw std::domain_error("log_double_factorial: n < -1");
  if (n <= 0) return 0.0;
  if (n % 2 == 0) {
    const int k = n / 2;
    return k * std::log(2.0) + std::lgamma(k + 1.0);
  }
  // n = 2k-1: (2k)! / (2^k k!)
  const int k = (n + 1) / 2;
  return std::lgamma(2.0 * k + 1.0) - k * std::log(2.0) - std::lgamma(k + 1.0);
}

}  // namespace chaoslab
