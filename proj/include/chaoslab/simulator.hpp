#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "chaoslab/hermite.hpp"
#include "chaoslab/sphere.hpp"
#include "chaoslab/stats.hpp"

namespace chaoslab {

/// Worker threads used when a config does not say; read from the
/// CHAOSLAB_THREADS environment variable, default 1.
int default_threads();

/// Counter-based stream seed for replica `index`:
/// splitmix64(master ^ splitmix64(index + 1)).
std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t index);

/// Stream used for the shared evaluation points of a FieldSample.
inline constexpr std::uint64_t kPointStream = 0xffff'ffff'ffff'fff1ULL;

struct SimConfig {
  int d = 3;
  int n = 64;
  int M = 8;
  int R = 1000;
  std::uint64_t master_seed = 1;
  Activation activation = Activation::relu();
  std::vector<int> chaos_orders;
  int threads = 0;  // 0: default_threads()

  /// Throws DomainError unless d >= 2, n >= 1, M >= 2, R >= 2.
  void validate() const;
  int worker_count() const;
};

struct NetworkWeights {
  Eigen::VectorXd V;  // n
  Eigen::MatrixXd W;  // n x d
};

/// i.i.d. N(0,1) outer and inner weights.
NetworkWeights sample_network(int n, int d, Rng& rng);
/// Weights of replica `replica`, drawn from its own counter-based stream.
NetworkWeights sample_network(const SimConfig& cfg, std::uint64_t replica);

/// F(x_i) = n^{-1/2} sum_j V_j sigma(W_j x_i) for the rows x_i of `points`.
Eigen::VectorXd eval_field(const NetworkWeights& w, const Activation& activation,
                           const Eigen::MatrixXd& points);

/// F_q(x_i) = J_q n^{-1/2} sum_j V_j h_q(W_j x_i).
Eigen::VectorXd chaos_component(const NetworkWeights& w, int q, double J_q,
                                const Eigen::MatrixXd& points);

/// All components F_0..F_qmax as the rows of a (qmax+1) x M matrix.
Eigen::MatrixXd chaos_components(const NetworkWeights& w, const HermiteExpansion& exp,
                                 int qmax, const Eigen::MatrixXd& points);

/// Squared L2 norm under the normalized sphere measure, estimated by the
/// mean of squares over the evaluation points.
double norm_sq(const Eigen::VectorXd& values);

/// Mean of f_i^2 f_j^2 over ordered pairs i != j: unbiased for the product
/// of sphere integrals when the points are i.i.d. uniform.
double pair_fourth_statistic(const Eigen::VectorXd& values);

/// E||Z_q||^4 = J_q^4 (1 + 2 m(d, q)) with m the pair moment.
double z_fourth_moment_exact(double J_q, int q, int d);

/// Diagram-sum prediction of n * (E||F_q||^4 - E||Z_q||^4):
/// J_q^4/(q!)^2 sum_{q1<q} Upsilon_{q1,q} m(d, q - q1).
double gap_diagram_prediction(double J_q, int q, int d);

/// Exact value of the same quantity from the point-pair cumulant:
/// J^4 [2 - 2 m(d,q) + 3 sum_{r<q} Upsilon_{r,q} m(d, q-r) / (q!)^2].
/// The width enters only through the 1/n prefactor, so n * gap is constant.
double gap_cumulant_prediction(double J_q, int q, int d);

/// Exact n * Cov(||F_p||^2, ||F_q||^2) for p != q.
double offdiag_covariance_prediction(double J_p, int p, double J_q, int q, int d);

struct GapEstimate {
  int q = 0;
  int n = 0;
  /// Control-variate estimate of E||F_q||^4 - E||Z_q||^4.
  Estimate gap;
  /// Plain replica average of ||F_q||^4 minus the exact Gaussian value.
  Estimate raw_gap;
  double z_fourth_exact = 0.0;
};

/// Each replica draws fresh uniform points and a network, evaluates F_q and
/// an exactly Gaussian field Z_q coupled to it through the whitened
/// conditional noise, and records the pair statistic of both. The difference
/// minus its first-order term in K_W - K (a mean-zero control) has mean
/// E||F_q||^4 - E||Z_q||^4 and a standard deviation of order 1/n.
/// Errors are delete-one jackknife.
GapEstimate fourth_moment_gap_mc(const SimConfig& cfg, int q, double J_q);

struct GapLaw {
  std::vector<GapEstimate> points;
  /// Slope of log gap on log n with the MC error propagated.
  Estimate slope;
  /// Inverse-variance pooled n * gap.
  Estimate n_gap;
  double cumulant_prediction = 0.0;
  double diagram_prediction = 0.0;
};

/// fourth_moment_gap_mc at each width of `widths` (cfg.n is ignored). Each
/// width uses its own seed stream derived from cfg.master_seed.
GapLaw gap_law(const SimConfig& cfg, int q, double J_q, const std::vector<int>& widths);

/// Cov(||F_p||^2, ||F_q||^2) for p != q using the same coupling (the
/// Gaussian limit has independent chaos components).
Estimate offdiag_covariance_mc(const SimConfig& cfg, int p, double J_p, int q, double J_q);

/// Raw-Hermite cumulant Cum(V H_q(A), V H_q(A), V H_q(B), V H_q(B)) for
/// corr(A, B) = rho and an independent standard V.
///
/// Symbolic form for q = 1 only: 2 + 4 rho^2. Throws Unsupported otherwise.
double cumulant_pointpair_symbolic(int q, double rho);
/// Any q, through the product formula for H_q^2:
/// 3 sum_r Upsilon_{r,q} rho^{2(q-r)} - (q!)^2 (1 + 2 rho^{2q}).
double cumulant_pointpair_product_formula(int q, double rho);
Estimate cumulant_pointpair_mc(int q, double rho, int draws, Rng& rng);

/// Relu limit covariance normalized so that kernel(1) = ||relu||^2 = 1/2:
/// (u (pi - arccos u) + sqrt(1 - u^2)) / (2 pi).
double relu_limit_kernel(double u);
/// The same expression with the 1/pi prefactor, kernel(1) = 1.
double relu_limit_kernel_raw(double u);

/// Truncated series sum_{q<=Qmax} J_q^2 u^q.
double kernel_series(const HermiteExpansion& exp, double u, int qmax = -1);

/// Gamma(<x_i, x_j>) for the rows of `points`.
Eigen::MatrixXd limit_covariance(const Eigen::MatrixXd& points,
                                 const std::function<double(double)>& kernel);

/// Draws from N(0, K) through a Cholesky factor of K + jitter.
class GaussianLimitSampler {
 public:
  explicit GaussianLimitSampler(Eigen::MatrixXd covariance);
  Eigen::VectorXd draw(Rng& rng) const;
  const Eigen::MatrixXd& covariance() const { return covariance_; }

 private:
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd factor_;
};

/// One draw of the limit field (Z(x_1), ..., Z(x_M)) with the series kernel.
Eigen::VectorXd gaussian_limit_sample(const Eigen::MatrixXd& points,
                                      const HermiteExpansion& exp, Rng& rng);

enum class FieldKind { full, chaos, gaussian_limit };

struct FieldSample {
  Eigen::MatrixXd points;  // M x d
  Eigen::MatrixXd values;  // R x M
  FieldKind kind = FieldKind::full;
  int q = -1;
  std::uint64_t master_seed = 0;
};

/// R replicas over one shared set of M uniform points. Row r depends only
/// on (master_seed, r), so the result is identical for any thread count.
FieldSample simulate_field(const SimConfig& cfg, const HermiteExpansion& exp,
                           FieldKind kind, int q = -1);

struct CovariancePair {
  int i = 0, j = 0;
  double u = 0.0;
  Estimate empirical;
  double series = 0.0;
  double kernel = 0.0;  // relu closed form, NaN otherwise
  double z = 0.0;
};

struct CovarianceReport {
  std::vector<CovariancePair> pairs;
  double max_abs_deviation = 0.0;
  double max_abs_z = 0.0;
};

/// Empirical Cov(F(x_i), F(x_j)) across replicas against the Hermite
/// series (and the relu kernel where it applies).
CovarianceReport covariance_check(const FieldSample& field, const HermiteExpansion& exp,
                                  const std::vector<std::pair<int, int>>& pairs);

/// Mean over replicas of ||F - sum_{q<=Q} F_q||^2.
Estimate chaos_remainder_mc(const SimConfig& cfg, const HermiteExpansion& exp, int Q);

/// Mean over replicas of ||F_q||^2.
Estimate chaos_norm_mc(const SimConfig& cfg, const HermiteExpansion& exp, int q);

/// E||Z_q||^4 from the single-chaos limit field, fresh points per replica.
Estimate z_fourth_moment_mc(const SimConfig& cfg, int q, double J_q);

/// Bures-Wasserstein distance between two Gaussians on R^M.
double gaussian_w2(const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& cov_a,
                   const Eigen::VectorXd& mean_b, const Eigen::MatrixXd& cov_b);

/// Ridge added to both covariances, relative to their mean diagonal.
inline constexpr double kW2Ridge = 1e-12;

/// Diagnostic only: W2 between the moment-matched Gaussian of the sampled
/// field and the exact limit N(0, K), scaled by 1/sqrt(M) so it reads as an
/// L2 distance under the normalized sphere measure. Not a bound on d2 for
/// non-Gaussian fields.
double w2_gaussian_proxy(const FieldSample& field, const HermiteExpansion& exp);

}  // namespace chaoslab
