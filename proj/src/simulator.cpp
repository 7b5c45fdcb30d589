#include "chaoslab/simulator.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>

#include "chaoslab/combinatorics.hpp"
#include "chaoslab/errors.hpp"

namespace chaoslab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Runs fn(r) for r in [0, count) on `threads` workers, strided so that each
/// index is owned by exactly one worker. Results are written by index, so
/// the outcome does not depend on scheduling.
template <class Fn>
void for_each_replica(int count, int threads, Fn&& fn) {
  threads = std::clamp(threads, 1, std::max(1, count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  auto run = [&](int t) {
    try {
      for (int r = t; r < count; r += threads) fn(r);
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(run, t);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd out(rows, cols);
  // column-major fill order is part of the stream contract
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

/// h_0..h_qmax applied elementwise; out[q] has the shape of g.
std::vector<Eigen::ArrayXXd> hermite_arrays(const Eigen::ArrayXXd& g, int qmax) {
  std::vector<Eigen::ArrayXXd> out;
  out.reserve(static_cast<std::size_t>(qmax) + 1);
  out.push_back(Eigen::ArrayXXd::Ones(g.rows(), g.cols()));
  if (qmax >= 1) out.push_back(g);
  for (int k = 1; k < qmax; ++k) {
    const auto& cur = out[static_cast<std::size_t>(k)];
    const auto& prev = out[static_cast<std::size_t>(k) - 1];
    out.push_back((g * cur - std::sqrt(double(k)) * prev) / std::sqrt(double(k + 1)));
  }
  return out;
}

Eigen::ArrayXXd hermite_array(const Eigen::ArrayXXd& g, int q) {
  if (q == 0) return Eigen::ArrayXXd::Ones(g.rows(), g.cols());
  Eigen::ArrayXXd prev = Eigen::ArrayXXd::Ones(g.rows(), g.cols());
  Eigen::ArrayXXd cur = g;
  for (int k = 1; k < q; ++k) {
    Eigen::ArrayXXd next = (g * cur - std::sqrt(double(k)) * prev) / std::sqrt(double(k + 1));
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

/// Symmetric square root of a PSD matrix, negative eigenvalues clamped.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

double log_factorial(int n) { return std::lgamma(n + 1.0); }

void check_order(int q) {
  if (q < 0) throw DomainError("chaos order must be >= 0");
}

/// One replica of the coupled construction for a set of chaos orders.
/// `f` stacks F_{q_l}(x_i) order by order; `z` is an exact draw from the
/// Gaussian limit with block-diagonal covariance K = J_l^2 <x_i,x_j>^{q_l},
/// built from the same whitened noise as f, so that f = K_W^{1/2} K^{+1/2} z
/// with K_W the covariance of f given the weights.
///
/// `dz` is the first-order part of f - z in K_W - K. It is linear in
/// K_W - K with coefficients that depend on (z, points) only; since z is
/// independent of the weights and E[K_W | points] = K, any statistic's
/// gradient at z dotted with dz has mean zero.
struct CoupledDraw {
  Eigen::VectorXd f;
  Eigen::VectorXd z;
  Eigen::VectorXd dz;
};

CoupledDraw coupled_chaos(int n, int d, int M, const std::vector<int>& orders,
                          const std::vector<double>& Js, Rng& rng) {
  const Eigen::MatrixXd X = sample_sphere_points(d, M, rng);
  const NetworkWeights net = sample_network(n, d, rng);
  const Eigen::ArrayXXd g = (X * net.W.transpose()).array();  // M x n
  const Eigen::Index L = static_cast<Eigen::Index>(orders.size());
  const Eigen::Index D = L * M;

  Eigen::MatrixXd A(D, n);
  const Eigen::MatrixXd gram = X * X.transpose();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(D, D);
  const double scale = 1.0 / std::sqrt(double(n));
  for (Eigen::Index l = 0; l < L; ++l) {
    const int q = orders[static_cast<std::size_t>(l)];
    const double J = Js[static_cast<std::size_t>(l)];
    A.middleRows(l * M, M) = (J * scale) * hermite_array(g, q).matrix();
    K.block(l * M, l * M, M, M) = (J * J) * gram.array().pow(double(q)).matrix();
  }

  CoupledDraw out;
  out.f = A * net.V;
  const Eigen::MatrixXd KW = A * A.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ew(KW);
  if (ew.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::VectorXd lambda = ew.eigenvalues();
  const double tol = 1e-10 * std::max(lambda.maxCoeff(), std::numeric_limits<double>::min());
  const Eigen::MatrixXd eps = standard_normal(D, 1, rng);
  const Eigen::VectorXd fc = ew.eigenvectors().transpose() * out.f;
  const Eigen::VectorXd ec = ew.eigenvectors().transpose() * eps.col(0);
  Eigen::VectorXd wc(D);
  for (Eigen::Index k = 0; k < D; ++k)
    wc[k] = lambda[k] > tol ? fc[k] / std::sqrt(lambda[k]) : ec[k];
  const Eigen::VectorXd w = ew.eigenvectors() * wc;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ek(K);
  if (ek.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::VectorXd mu = ek.eigenvalues();
  const Eigen::MatrixXd& P = ek.eigenvectors();
  const Eigen::VectorXd root = mu.cwiseMax(0.0).cwiseSqrt();
  out.z = P * root.cwiseProduct(P.transpose() * w);

  // K_W^{1/2} = K^{1/2} + S + O(dK^2), S solving K^{1/2} S + S K^{1/2} = dK;
  // in the eigenbasis of K restricted to its range this is elementwise.
  const double ktol = 1e-10 * std::max(mu.maxCoeff(), std::numeric_limits<double>::min());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < D; ++k)
    if (mu[k] > ktol) keep.push_back(k);
  const auto r = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd Pk(D, r);
  Eigen::VectorXd rk(r);
  for (Eigen::Index a = 0; a < r; ++a) {
    Pk.col(a) = P.col(keep[static_cast<std::size_t>(a)]);
    rk[a] = root[keep[static_cast<std::size_t>(a)]];
  }
  Eigen::MatrixXd St = Pk.transpose() * (KW - K) * Pk;
  for (Eigen::Index a = 0; a < r; ++a)
    for (Eigen::Index b = 0; b < r; ++b) St(a, b) /= rk[a] + rk[b];
  out.dz = Pk * (St * (Pk.transpose() * out.z).cwiseQuotient(rk));
  return out;
}

/// Gradient of pair_fourth_statistic.
Eigen::VectorXd pair_fourth_gradient(const Eigen::VectorXd& v) {
  const double M = double(v.size());
  const double s2 = v.squaredNorm();
  const Eigen::ArrayXd a = v.array();
  return (4.0 * a * (s2 - a.square()) / (M * (M - 1.0))).matrix();
}

void check_sim(const SimConfig& cfg) { cfg.validate(); }

}  // namespace

int default_threads() {
  if (const char* env = std::getenv("CHAOSLAB_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return 1;
}

std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(master_seed ^ splitmix64(index + 1));
}

void SimConfig::validate() const {
  if (d < 2) throw DomainError("sphere dimension parameter d must be >= 2");
  if (n < 1) throw DomainError("network width n must be >= 1");
  if (M < 2) throw DomainError("need at least M = 2 evaluation points");
  if (R < 2) throw DomainError("need at least R = 2 replicas");
  if (threads < 0) throw DomainError("thread count must be >= 0");
}

int SimConfig::worker_count() const { return threads > 0 ? threads : default_threads(); }

NetworkWeights sample_network(int n, int d, Rng& rng) {
  if (n < 1) throw DomainError("network width n must be >= 1");
  if (d < 2) throw DomainError("sphere dimension parameter d must be >= 2");
  NetworkWeights w;
  w.V = standard_normal(n, 1, rng).col(0);
  w.W = standard_normal(n, d, rng);
  return w;
}

NetworkWeights sample_network(const SimConfig& cfg, std::uint64_t replica) {
  Rng rng(replica_seed(cfg.master_seed, replica));
  return sample_network(cfg.n, cfg.d, rng);
}

Eigen::VectorXd eval_field(const NetworkWeights& w, const Activation& activation,
                           const Eigen::MatrixXd& points) {
  if (!activation.evaluable())
    throw Unsupported("activation '" + activation.label() + "' has no pointwise form");
  if (points.cols() != w.W.cols()) throw DomainError("point dimension does not match weights");
  const Eigen::ArrayXXd g = (points * w.W.transpose()).array();
  const Eigen::ArrayXXd s = g.unaryExpr([&](double z) { return activation(z); });
  return s.matrix() * w.V / std::sqrt(double(w.V.size()));
}

Eigen::VectorXd chaos_component(const NetworkWeights& w, int q, double J_q,
                                const Eigen::MatrixXd& points) {
  check_order(q);
  if (points.cols() != w.W.cols()) throw DomainError("point dimension does not match weights");
  const Eigen::ArrayXXd g = (points * w.W.transpose()).array();
  return (J_q / std::sqrt(double(w.V.size()))) * (hermite_array(g, q).matrix() * w.V);
}

Eigen::MatrixXd chaos_components(const NetworkWeights& w, const HermiteExpansion& exp,
                                 int qmax, const Eigen::MatrixXd& points) {
  check_order(qmax);
  if (points.cols() != w.W.cols()) throw DomainError("point dimension does not match weights");
  const Eigen::ArrayXXd g = (points * w.W.transpose()).array();
  const auto h = hermite_arrays(g, qmax);
  const double scale = 1.0 / std::sqrt(double(w.V.size()));
  Eigen::MatrixXd out(qmax + 1, points.rows());
  for (int q = 0; q <= qmax; ++q)
    out.row(q) = (exp.coeff(q) * scale) * (h[static_cast<std::size_t>(q)].matrix() * w.V).transpose();
  return out;
}

double norm_sq(const Eigen::VectorXd& values) {
  if (values.size() == 0) throw DomainError("norm of an empty sample");
  return values.squaredNorm() / double(values.size());
}

double pair_fourth_statistic(const Eigen::VectorXd& values) {
  const Eigen::Index M = values.size();
  if (M < 2) throw DomainError("pair statistic needs at least two points");
  const Eigen::ArrayXd sq = values.array().square();
  const double total = sq.sum();
  const double off = total * total - sq.square().sum();
  return off / (double(M) * double(M - 1));
}

double z_fourth_moment_exact(double J_q, int q, int d) {
  check_order(q);
  const double j2 = J_q * J_q;
  return j2 * j2 * (1.0 + 2.0 * pair_moment_exact(d, q));
}

double gap_diagram_prediction(double J_q, int q, int d) {
  check_order(q);
  double sum = 0.0;
  for (int q1 = 0; q1 < q; ++q1)
    sum += std::exp(upsilon_log(q1, q) - 2.0 * log_factorial(q)) * pair_moment_exact(d, q - q1);
  const double j2 = J_q * J_q;
  return j2 * j2 * sum;
}

double gap_cumulant_prediction(double J_q, int q, int d) {
  check_order(q);
  double sum = 2.0 - 2.0 * pair_moment_exact(d, q);
  for (int r = 0; r < q; ++r)
    sum += 3.0 * std::exp(upsilon_log(r, q) - 2.0 * log_factorial(q)) * pair_moment_exact(d, q - r);
  const double j2 = J_q * J_q;
  return j2 * j2 * sum;
}

double offdiag_covariance_prediction(double J_p, int p, double J_q, int q, int d) {
  check_order(p);
  check_order(q);
  if (p == q) throw DomainError("off-diagonal covariance needs p != q");
  // E[H_p(A)^2 H_q(B)^2] = sum_k r! C(p,r)^2 s! C(q,s)^2 (2k)! rho^{2k},
  // r = p - k, s = q - k; divided here by p! q! throughout.
  auto log_term = [](int m, int k) {
    // log(r! C(m,r)^2 / m!) with r = m - k
    const int r = m - k;
    return log_factorial(m) - log_factorial(r) - 2.0 * log_factorial(k);
  };
  double moment = 0.0;
  for (int k = 0; k <= std::min(p, q); ++k)
    moment += std::exp(log_term(p, k) + log_term(q, k) + log_factorial(2 * k)) *
              pair_moment_exact(d, k);
  return J_p * J_p * J_q * J_q * (3.0 * moment - 1.0);
}

GapEstimate fourth_moment_gap_mc(const SimConfig& cfg, int q, double J_q) {
  check_sim(cfg);
  check_order(q);
  std::vector<double> coupled(static_cast<std::size_t>(cfg.R));
  std::vector<double> raw(static_cast<std::size_t>(cfg.R));
  for_each_replica(cfg.R, cfg.worker_count(), [&](int r) {
    Rng rng(replica_seed(cfg.master_seed, static_cast<std::uint64_t>(r)));
    const auto draw = coupled_chaos(cfg.n, cfg.d, cfg.M, {q}, {J_q}, rng);
    const double tf = pair_fourth_statistic(draw.f);
    const double first_order = pair_fourth_gradient(draw.z).dot(draw.dz);
    coupled[static_cast<std::size_t>(r)] = tf - pair_fourth_statistic(draw.z) - first_order;
    raw[static_cast<std::size_t>(r)] = tf;
  });
  GapEstimate out;
  out.q = q;
  out.n = cfg.n;
  out.z_fourth_exact = z_fourth_moment_exact(J_q, q, cfg.d);
  out.gap = jackknife_mean(coupled);
  out.raw_gap = jackknife_mean(raw);
  out.raw_gap.value -= out.z_fourth_exact;
  return out;
}

GapLaw gap_law(const SimConfig& cfg, int q, double J_q, const std::vector<int>& widths) {
  if (widths.size() < 2) throw DomainError("gap law needs at least two widths");
  GapLaw law;
  std::vector<double> x, y, err;
  std::vector<Estimate> scaled;
  for (int n : widths) {
    SimConfig c = cfg;
    c.n = n;
    c.master_seed = replica_seed(cfg.master_seed, 0x6a70'0000ULL + static_cast<std::uint64_t>(n));
    const auto g = fourth_moment_gap_mc(c, q, J_q);
    law.points.push_back(g);
    scaled.push_back({g.gap.value * n, g.gap.error * n});
    if (g.gap.value > 0.0) {
      x.push_back(std::log(double(n)));
      y.push_back(std::log(g.gap.value));
      err.push_back(g.gap.error / g.gap.value);
    }
  }
  law.slope = x.size() == widths.size() ? slope_with_error(x, y, err) : Estimate{kNaN, kNaN};
  const bool exact = std::any_of(scaled.begin(), scaled.end(),
                                 [](const Estimate& e) { return !(e.error > 0.0); });
  if (exact) {
    double mean = 0.0;
    for (const auto& e : scaled) mean += e.value;
    law.n_gap = {mean / double(scaled.size()), 0.0};
  } else {
    law.n_gap = pooled_mean(scaled);
  }
  law.cumulant_prediction = gap_cumulant_prediction(J_q, q, cfg.d);
  law.diagram_prediction = gap_diagram_prediction(J_q, q, cfg.d);
  return law;
}

Estimate offdiag_covariance_mc(const SimConfig& cfg, int p, double J_p, int q, double J_q) {
  check_sim(cfg);
  check_order(p);
  check_order(q);
  if (p == q) throw DomainError("off-diagonal covariance needs p != q");
  const Eigen::Index M = cfg.M;
  const double norm = double(M) * double(M - 1);
  auto cross = [M, norm](const Eigen::VectorXd& v) {
    const Eigen::ArrayXd a = v.head(M).array().square();
    const Eigen::ArrayXd b = v.tail(M).array().square();
    return (a.sum() * b.sum() - (a * b).sum()) / norm;
  };
  auto cross_gradient = [M, norm](const Eigen::VectorXd& v) {
    const Eigen::ArrayXd x = v.head(M).array(), y = v.tail(M).array();
    const Eigen::ArrayXd a = x.square(), b = y.square();
    Eigen::VectorXd grad(2 * M);
    grad.head(M) = (2.0 * x * (b.sum() - b) / norm).matrix();
    grad.tail(M) = (2.0 * y * (a.sum() - a) / norm).matrix();
    return grad;
  };
  std::vector<double> values(static_cast<std::size_t>(cfg.R));
  for_each_replica(cfg.R, cfg.worker_count(), [&](int r) {
    Rng rng(replica_seed(cfg.master_seed, static_cast<std::uint64_t>(r)));
    const auto draw = coupled_chaos(cfg.n, cfg.d, cfg.M, {p, q}, {J_p, J_q}, rng);
    values[static_cast<std::size_t>(r)] =
        cross(draw.f) - cross(draw.z) - cross_gradient(draw.z).dot(draw.dz);
  });
  return jackknife_mean(values);
}

double cumulant_pointpair_symbolic(int q, double rho) {
  if (q != 1) throw Unsupported("symbolic point-pair cumulant is only available for q = 1");
  if (!(std::abs(rho) <= 1.0)) throw DomainError("correlation must lie in [-1, 1]");
  return 2.0 + 4.0 * rho * rho;
}

double cumulant_pointpair_product_formula(int q, double rho) {
  check_order(q);
  if (!(std::abs(rho) <= 1.0)) throw DomainError("correlation must lie in [-1, 1]");
  const double r2 = rho * rho;
  double sum = 0.0;
  for (int r = 0; r <= q; ++r) sum += std::exp(upsilon_log(r, q)) * std::pow(r2, q - r);
  const double f2 = std::exp(2.0 * log_factorial(q));
  return 3.0 * sum - f2 * (1.0 + 2.0 * std::pow(r2, q));
}

Estimate cumulant_pointpair_mc(int q, double rho, int draws, Rng& rng) {
  check_order(q);
  if (!(std::abs(rho) <= 1.0)) throw DomainError("correlation must lie in [-1, 1]");
  constexpr int kBatches = 64;
  if (draws < 1000) throw DomainError("cumulant_pointpair_mc needs at least 1000 draws");
  const double lift = std::exp(0.5 * log_factorial(q));  // H_q = sqrt(q!) h_q
  const double c = std::sqrt(std::max(0.0, 1.0 - rho * rho));

  struct Sums {
    double xx = 0, yy = 0, xy = 0, xxyy = 0;
    double count = 0;
  };
  std::vector<Sums> batches(kBatches);
  std::normal_distribution<double> normal;
  for (int i = 0; i < draws; ++i) {
    const double v = normal(rng);
    const double a = normal(rng);
    const double b = rho * a + c * normal(rng);
    const double x = v * lift * hermite_normalized(q, a);
    const double y = v * lift * hermite_normalized(q, b);
    auto& s = batches[static_cast<std::size_t>(i % kBatches)];
    s.xx += x * x;
    s.yy += y * y;
    s.xy += x * y;
    s.xxyy += x * x * y * y;
    s.count += 1.0;
  }
  auto cumulant = [](const Sums& s) {
    const double m20 = s.xx / s.count, m02 = s.yy / s.count, m11 = s.xy / s.count;
    return s.xxyy / s.count - m20 * m02 - 2.0 * m11 * m11;
  };
  Sums total;
  for (const auto& s : batches) {
    total.xx += s.xx;
    total.yy += s.yy;
    total.xy += s.xy;
    total.xxyy += s.xxyy;
    total.count += s.count;
  }
  std::vector<double> loo(kBatches);
  for (int b = 0; b < kBatches; ++b) {
    const auto& s = batches[static_cast<std::size_t>(b)];
    loo[static_cast<std::size_t>(b)] = cumulant(
        {total.xx - s.xx, total.yy - s.yy, total.xy - s.xy, total.xxyy - s.xxyy,
         total.count - s.count});
  }
  double mean = 0.0;
  for (double v : loo) mean += v;
  mean /= kBatches;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return {cumulant(total), std::sqrt(ss * (kBatches - 1.0) / kBatches)};
}

double relu_limit_kernel_raw(double u) {
  if (!(std::abs(u) <= 1.0 + 1e-12)) throw DomainError("kernel argument must lie in [-1, 1]");
  u = std::clamp(u, -1.0, 1.0);
  return (u * (std::numbers::pi - std::acos(u)) + std::sqrt(1.0 - u * u)) / std::numbers::pi;
}

double relu_limit_kernel(double u) { return 0.5 * relu_limit_kernel_raw(u); }

double kernel_series(const HermiteExpansion& exp, double u, int qmax) {
  if (qmax < 0) qmax = exp.qmax();
  double sum = 0.0;
  double power = 1.0;
  for (int q = 0; q <= qmax; ++q) {
    sum += exp.coeff_sq(q) * power;
    power *= u;
  }
  return sum;
}

Eigen::MatrixXd limit_covariance(const Eigen::MatrixXd& points,
                                 const std::function<double(double)>& kernel) {
  const Eigen::Index M = points.rows();
  Eigen::MatrixXd K(M, M);
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double u = std::clamp(points.row(i).dot(points.row(j)), -1.0, 1.0);
      K(i, j) = K(j, i) = kernel(u);
    }
  }
  return K;
}

GaussianLimitSampler::GaussianLimitSampler(Eigen::MatrixXd covariance)
    : covariance_(std::move(covariance)) {
  if (covariance_.rows() != covariance_.cols() || covariance_.rows() == 0)
    throw DomainError("covariance must be a non-empty square matrix");
  const double jitter =
      1e-10 * std::max(covariance_.diagonal().mean(), std::numeric_limits<double>::min());
  Eigen::MatrixXd shifted = covariance_;
  shifted.diagonal().array() += jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success)
    throw NumericalError("limit covariance is not positive semidefinite after jitter");
  factor_ = llt.matrixL();
}

Eigen::VectorXd GaussianLimitSampler::draw(Rng& rng) const {
  return factor_ * standard_normal(factor_.rows(), 1, rng).col(0);
}

Eigen::VectorXd gaussian_limit_sample(const Eigen::MatrixXd& points,
                                      const HermiteExpansion& exp, Rng& rng) {
  const GaussianLimitSampler sampler(
      limit_covariance(points, [&](double u) { return kernel_series(exp, u); }));
  return sampler.draw(rng);
}

FieldSample simulate_field(const SimConfig& cfg, const HermiteExpansion& exp,
                           FieldKind kind, int q) {
  check_sim(cfg);
  if (kind == FieldKind::chaos) check_order(q);
  if (kind == FieldKind::full && !exp.activation().evaluable())
    throw Unsupported("activation '" + exp.activation().label() + "' has no pointwise form");

  FieldSample out;
  out.kind = kind;
  out.q = kind == FieldKind::chaos ? q : -1;
  out.master_seed = cfg.master_seed;
  {
    Rng rng(replica_seed(cfg.master_seed, kPointStream));
    out.points = sample_sphere_points(cfg.d, cfg.M, rng);
  }
  out.values.resize(cfg.R, cfg.M);

  std::optional<GaussianLimitSampler> sampler;
  if (kind == FieldKind::gaussian_limit)
    sampler.emplace(limit_covariance(out.points, [&](double u) { return kernel_series(exp, u); }));

  for_each_replica(cfg.R, cfg.worker_count(), [&](int r) {
    Rng rng(replica_seed(cfg.master_seed, static_cast<std::uint64_t>(r)));
    switch (kind) {
      case FieldKind::full:
        out.values.row(r) = eval_field(sample_network(cfg.n, cfg.d, rng), exp.activation(),
                                       out.points).transpose();
        break;
      case FieldKind::chaos:
        out.values.row(r) = chaos_component(sample_network(cfg.n, cfg.d, rng), q,
                                            exp.coeff(q), out.points).transpose();
        break;
      case FieldKind::gaussian_limit:
        out.values.row(r) = sampler->draw(rng).transpose();
        break;
    }
  });
  return out;
}

CovarianceReport covariance_check(const FieldSample& field, const HermiteExpansion& exp,
                                  const std::vector<std::pair<int, int>>& pairs) {
  const Eigen::Index M = field.points.rows();
  if (field.values.rows() < 2) throw InsufficientData("covariance needs at least two replicas");
  const bool relu = exp.activation().kind() == ActivationKind::relu;
  CovarianceReport report;
  for (const auto& [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= M || j >= M) throw DomainError("point index out of range");
    CovariancePair p;
    p.i = i;
    p.j = j;
    p.u = std::clamp(field.points.row(i).dot(field.points.row(j)), -1.0, 1.0);
    const Eigen::VectorXd prod = field.values.col(i).cwiseProduct(field.values.col(j));
    p.empirical = mean_estimate({prod.data(), static_cast<std::size_t>(prod.size())});
    p.series = kernel_series(exp, p.u);
    p.kernel = relu ? relu_limit_kernel(p.u) : kNaN;
    p.z = p.empirical.z_score(p.series);
    report.max_abs_deviation = std::max(report.max_abs_deviation,
                                        std::abs(p.empirical.value - p.series));
    report.max_abs_z = std::max(report.max_abs_z, std::abs(p.z));
    report.pairs.push_back(p);
  }
  return report;
}

Estimate chaos_remainder_mc(const SimConfig& cfg, const HermiteExpansion& exp, int Q) {
  check_sim(cfg);
  check_order(Q);
  if (Q > exp.qmax()) throw DomainError("truncation level exceeds the expansion's Qmax");
  std::vector<double> values(static_cast<std::size_t>(cfg.R));
  for_each_replica(cfg.R, cfg.worker_count(), [&](int r) {
    Rng rng(replica_seed(cfg.master_seed, static_cast<std::uint64_t>(r)));
    const Eigen::MatrixXd X = sample_sphere_points(cfg.d, cfg.M, rng);
    const NetworkWeights net = sample_network(cfg.n, cfg.d, rng);
    const Eigen::VectorXd full = eval_field(net, exp.activation(), X);
    const Eigen::VectorXd partial = chaos_components(net, exp, Q, X).colwise().sum().transpose();
    values[static_cast<std::size_t>(r)] = norm_sq(full - partial);
  });
  return mean_estimate(values);
}

Estimate chaos_norm_mc(const SimConfig& cfg, const HermiteExpansion& exp, int q) {
  check_sim(cfg);
  check_order(q);
  std::vector<double> values(static_cast<std::size_t>(cfg.R));
  for_each_replica(cfg.R, cfg.worker_count(), [&](int r) {
    Rng rng(replica_seed(cfg.master_seed, static_cast<std::uint64_t>(r)));
    const Eigen::MatrixXd X = sample_sphere_points(cfg.d, cfg.M, rng);
    const NetworkWeights net = sample_network(cfg.n, cfg.d, rng);
    values[static_cast<std::size_t>(r)] = norm_sq(chaos_component(net, q, exp.coeff(q), X));
  });
  return mean_estimate(values);
}

Estimate z_fourth_moment_mc(const SimConfig& cfg, int q, double J_q) {
  check_sim(cfg);
  check_order(q);
  const double j2 = J_q * J_q;
  std::vector<double> values(static_cast<std::size_t>(cfg.R));
  for_each_replica(cfg.R, cfg.worker_count(), [&](int r) {
    Rng rng(replica_seed(cfg.master_seed, static_cast<std::uint64_t>(r)));
    const Eigen::MatrixXd X = sample_sphere_points(cfg.d, cfg.M, rng);
    const GaussianLimitSampler sampler(
        limit_covariance(X, [&](double u) { return j2 * std::pow(u, q); }));
    values[static_cast<std::size_t>(r)] = pair_fourth_statistic(sampler.draw(rng));
  });
  return mean_estimate(values);
}

double gaussian_w2(const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& cov_a,
                   const Eigen::VectorXd& mean_b, const Eigen::MatrixXd& cov_b) {
  if (mean_a.size() != mean_b.size() || cov_a.rows() != cov_b.rows() ||
      cov_a.rows() != mean_a.size())
    throw DomainError("Gaussian dimensions do not match");
  const Eigen::MatrixXd root_b = psd_sqrt(cov_b);
  const Eigen::MatrixXd middle = psd_sqrt(root_b * cov_a * root_b);
  const double sq = (mean_a - mean_b).squaredNorm() + cov_a.trace() + cov_b.trace() -
                    2.0 * middle.trace();
  return std::sqrt(std::max(sq, 0.0));
}

double w2_gaussian_proxy(const FieldSample& field, const HermiteExpansion& exp) {
  const Eigen::Index R = field.values.rows();
  const Eigen::Index M = field.values.cols();
  if (R < 2) throw InsufficientData("W2 proxy needs at least two replicas");
  const Eigen::VectorXd mean = field.values.colwise().mean().transpose();
  const Eigen::MatrixXd centered = field.values.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / double(R - 1);

  const bool relu = exp.activation().kind() == ActivationKind::relu;
  Eigen::MatrixXd K = limit_covariance(field.points, [&](double u) {
    return relu ? relu_limit_kernel(u) : kernel_series(exp, u);
  });
  const double ridge = kW2Ridge * std::max(K.diagonal().mean(), std::numeric_limits<double>::min());
  cov.diagonal().array() += ridge;
  K.diagonal().array() += ridge;
  return gaussian_w2(mean, cov, Eigen::VectorXd::Zero(M), K) / std::sqrt(double(M));
}

}  // namespace chaoslab
