#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "chaoslab/stats.hpp"

namespace chaoslab {

using Rng = std::mt19937_64;

/// A point on the unit sphere S^{d-1}.
class SpherePoint {
 public:
  /// Normalizes `v`; throws DomainError for the zero vector.
  static SpherePoint from_vector(const Eigen::VectorXd& v);

  const Eigen::VectorXd& coords() const { return coords_; }
  Eigen::Index dim() const { return coords_.size(); }
  double dot(const SpherePoint& other) const { return coords_.dot(other.coords_); }

 private:
  explicit SpherePoint(Eigen::VectorXd v) : coords_(std::move(v)) {}
  Eigen::VectorXd coords_;
};

/// Surface volume 2 pi^{d/2} / Gamma(d/2) of S^{d-1}; d = 1 gives the two
/// points of S^0.
double surface_area(int d);
double log_surface_area(int d);

/// Uniform point on S^{d-1}: a standard Gaussian vector, normalized.
SpherePoint sample_sphere(int d, Rng& rng);

/// M points stacked as the rows of an M x d matrix.
Eigen::MatrixXd sample_sphere_points(int d, int count, Rng& rng);

/// Mean of <x1,x2>^{2k} over the product of normalized sphere measures,
/// (s_{d-1}/s_d) B(k+1/2, (d-1)/2), evaluated through lgamma.
double pair_moment_exact(int d, int k);

/// The same integral as (2k-1)!! / prod_{i<k} (d + 2i).
double pair_moment_factorial(int d, int k);

/// Exact relative standard deviation of the `samples`-pair Monte Carlo mean
/// of <x1,x2>^{2k}: sqrt(m(d,2k)/m(d,k)^2 - 1) / sqrt(samples).
double pair_moment_mc_relative_sd(int d, int k, int samples);

/// Monte Carlo estimate from `samples` independent uniform pairs.
Estimate pair_moment_mc(int d, int k, int samples, Rng& rng);

/// All orders k = 0..kmax from one set of pairs.
std::vector<Estimate> pair_moment_mc_all(int d, int kmax, int samples, Rng& rng);

}  // namespace chaoslab
