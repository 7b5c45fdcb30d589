#include "chaoslab/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chaoslab/errors.hpp"

namespace chaoslab {

namespace {

void check_dim(int d) {
  if (d < 2) throw DomainError("sphere dimension parameter d must be >= 2");
}

}  // namespace

SpherePoint SpherePoint::from_vector(const Eigen::VectorXd& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw DomainError("cannot project a zero or non-finite vector onto the sphere");
  return SpherePoint(v / norm);
}

double log_surface_area(int d) {
  if (d < 1) throw DomainError("surface_area needs d >= 1");
  return std::log(2.0) + 0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d);
}

double surface_area(int d) {
  check_dim(d);
  return std::exp(log_surface_area(d));
}

SpherePoint sample_sphere(int d, Rng& rng) {
  check_dim(d);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(d);
  do {
    for (int i = 0; i < d; ++i) v[i] = normal(rng);
  } while (v.squaredNorm() == 0.0);
  return SpherePoint::from_vector(v);
}

Eigen::MatrixXd sample_sphere_points(int d, int count, Rng& rng) {
  Eigen::MatrixXd points(count, d);
  for (int i = 0; i < count; ++i) points.row(i) = sample_sphere(d, rng).coords().transpose();
  return points;
}

double pair_moment_exact(int d, int k) {
  check_dim(d);
  if (k < 0) throw DomainError("pair moment order must be >= 0");
  if (k == 0) return 1.0;
  const double a = k + 0.5;
  const double b = 0.5 * (d - 1);
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return std::exp(log_surface_area(d - 1) - log_surface_area(d) + log_beta);
}

double pair_moment_factorial(int d, int k) {
  check_dim(d);
  if (k < 0) throw DomainError("pair moment order must be >= 0");
  double value = 1.0;
  for (int i = 0; i < k; ++i) value *= (2.0 * i + 1.0) / (d + 2.0 * i);
  return value;
}

double pair_moment_mc_relative_sd(int d, int k, int samples) {
  if (samples < 1) throw DomainError("sample count must be >= 1");
  const double m = pair_moment_exact(d, k);
  const double ratio = pair_moment_exact(d, 2 * k) / (m * m);
  return std::sqrt(std::max(ratio - 1.0, 0.0) / samples);
}

std::vector<Estimate> pair_moment_mc_all(int d, int kmax, int samples, Rng& rng) {
  check_dim(d);
  if (kmax < 0) throw DomainError("pair moment order must be >= 0");
  if (samples < 1000) throw DomainError("pair_moment_mc needs at least 1000 samples");
  std::vector<std::vector<double>> values(static_cast<std::size_t>(kmax) + 1,
                                          std::vector<double>(static_cast<std::size_t>(samples)));
  for (int s = 0; s < samples; ++s) {
    const auto x1 = sample_sphere(d, rng);
    const auto x2 = sample_sphere(d, rng);
    const double u2 = x1.dot(x2) * x1.dot(x2);
    double power = 1.0;
    for (int k = 0; k <= kmax; ++k) {
      values[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)] = power;
      power *= u2;
    }
  }
  std::vector<Estimate> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(mean_estimate(v));
  return out;
}

Estimate pair_moment_mc(int d, int k, int samples, Rng& rng) {
  return pair_moment_mc_all(d, k, samples, rng).back();
}

}  // namespace chaoslab
