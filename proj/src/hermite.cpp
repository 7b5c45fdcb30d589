#include "chaoslab/hermite.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "chaoslab/errors.hpp"
#include "chaoslab/stats.hpp"

namespace chaoslab {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;
constexpr double kBaseHalfWidth = 10.0;

// Zero threshold for decay fits, relative to the activation norm.
constexpr double kNonzeroRelative = 1e-12;

void hermite_recurrence(double x, double h0, std::span<double> out) {
  if (out.empty()) return;
  out[0] = h0;
  if (out.size() == 1) return;
  out[1] = x * h0;
  for (std::size_t k = 1; k + 1 < out.size(); ++k) {
    const double kd = static_cast<double>(k);
    out[k + 1] = (x * out[k] - std::sqrt(kd) * out[k - 1]) / std::sqrt(kd + 1.0);
  }
}

/// Composite Gauss-Legendre nodes on [-L, L] split at activation kinks.
struct PanelRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // Legendre weights times the panel Jacobian
};

PanelRule make_rule(const std::vector<double>& kinks, double half_width,
                    int panels, int qmax) {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  std::vector<double> breaks{-half_width};
  for (double k : kinks)
    if (k > -half_width && k < half_width) breaks.push_back(k);
  breaks.push_back(half_width);

  // Panel width bounded by the user's count and by the local wavelength of
  // h_q, which shrinks like 1/sqrt(q).
  const double max_width = std::min(2.0 * half_width / panels,
                                    std::min(0.5, 6.0 / (1.0 + std::sqrt(double(qmax)))));

  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();
  PanelRule rule;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = breaks[s];
    const double b = breaks[s + 1];
    const int m = std::max(1, static_cast<int>(std::ceil((b - a) / max_width)));
    const double h = (b - a) / m;
    for (int p = 0; p < m; ++p) {
      const double lo = a + p * h;
      const double mid = lo + 0.5 * h;
      const double half = 0.5 * h;
      // boost stores the nonnegative half of the symmetric rule
      for (std::size_t i = 0; i < abscissa.size(); ++i) {
        const double x = abscissa[i];
        if (x == 0.0) {
          rule.nodes.push_back(mid);
          rule.weights.push_back(half * weights[i]);
        } else {
          rule.nodes.push_back(mid - half * x);
          rule.weights.push_back(half * weights[i]);
          rule.nodes.push_back(mid + half * x);
          rule.weights.push_back(half * weights[i]);
        }
      }
    }
  }
  return rule;
}

double half_width_for(int qmax) { return kBaseHalfWidth + 2.0 * std::sqrt(double(std::max(qmax, 0))); }

double norm_on(const Activation& activation, double half_width, int panels) {
  const auto rule = make_rule(activation.kinks(), half_width, panels, 0);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double z = rule.nodes[i];
    const double s = activation(z);
    const double term = s * s * std::exp(-0.5 * z * z);
    if (!std::isfinite(term))
      throw InvalidActivation("activation '" + activation.label() +
                              "' is not finite on the quadrature grid");
    acc += rule.weights[i] * term;
  }
  return acc * kInvSqrt2Pi;
}

// Sum of J_q^2 over an infinite generator: direct sum up to 2^20, plus a
// doubling-block geometric estimate of the remainder.
double sequence_norm_sq(const Activation& activation) {
  constexpr int kLimit = 1 << 20;
  double total = 0.0, block_prev = 0.0, block_last = 0.0;
  for (int q = 0; q <= kLimit; ++q) {
    const double j = activation.sequence_coeff(q);
    const double sq = j * j;
    total += sq;
    if (q > kLimit / 4 && q <= kLimit / 2) block_prev += sq;
    if (q > kLimit / 2) block_last += sq;
  }
  if (block_prev > 0.0 && block_last < block_prev) {
    const double ratio = block_last / block_prev;
    total += block_last * ratio / (1.0 - ratio);
  }
  return total;
}

// Monomial -> normalized Hermite: x^k = sum_m k!/(m!(k-2m)!2^m) He_{k-2m}(x),
// and He_j = sqrt(j!) h_j.
std::vector<double> polynomial_coeffs(const std::vector<double>& monomials) {
  const int degree = static_cast<int>(monomials.size()) - 1;
  std::vector<double> coeffs(static_cast<std::size_t>(degree) + 1, 0.0);
  for (int k = 0; k <= degree; ++k) {
    if (monomials[k] == 0.0) continue;
    for (int m = 0; 2 * m <= k; ++m) {
      const int j = k - 2 * m;
      const double log_c = std::lgamma(k + 1.0) - std::lgamma(m + 1.0) -
                           std::lgamma(j + 1.0) - m * std::log(2.0) +
                           0.5 * std::lgamma(j + 1.0);
      coeffs[j] += monomials[k] * std::exp(log_c);
    }
  }
  return coeffs;
}

}  // namespace

void hermite_normalized_all(double x, std::span<double> out) {
  hermite_recurrence(x, 1.0, out);
}

void hermite_function_all(double x, std::span<double> out) {
  hermite_recurrence(x, std::exp(-0.25 * x * x), out);
}

std::string_view to_string(CoeffSource source) {
  switch (source) {
    case CoeffSource::closed_form: return "closed-form";
    case CoeffSource::quadrature: return "quadrature";
    case CoeffSource::paper_verbatim: return "paper-verbatim";
  }
  return "unknown";
}

HermiteExpansion::HermiteExpansion(Activation activation,
                                   std::vector<double> coeffs,
                                   std::vector<CoeffSource> sources,
                                   double sigma_norm_sq,
                                   LogSqExtension extension)
    : activation_(std::move(activation)),
      coeffs_(std::move(coeffs)),
      sources_(std::move(sources)),
      sigma_norm_sq_(sigma_norm_sq),
      extension_(std::move(extension)) {
  if (coeffs_.empty()) throw std::invalid_argument("expansion needs J_0");
  if (sources_.size() != coeffs_.size())
    throw std::invalid_argument("one source tag per coefficient");
}

double HermiteExpansion::coeff(int q) const {
  if (q < 0) throw DomainError("negative Hermite order");
  return q <= qmax() ? coeffs_[static_cast<std::size_t>(q)] : 0.0;
}

double HermiteExpansion::coeff_sq(int q) const {
  if (q < 0) throw DomainError("negative Hermite order");
  if (q <= qmax()) {
    const double j = coeffs_[static_cast<std::size_t>(q)];
    return j * j;
  }
  return extension_ ? std::exp(extension_(q)) : 0.0;
}

double HermiteExpansion::log_coeff_sq(int q) const {
  if (q < 0) throw DomainError("negative Hermite order");
  if (q > qmax() && extension_) return extension_(q);
  const double sq = coeff_sq(q);
  return sq > 0.0 ? std::log(sq) : -std::numeric_limits<double>::infinity();
}

double relu_coeff_paper(int q) {
  if (q < 0) throw DomainError("negative Hermite order");
  if (q == 0) return kInvSqrt2Pi;
  if (q == 1) return 0.5;
  if (q % 2 == 1) return 0.0;
  const double sign = ((q / 2 + 1) % 2 == 0) ? 1.0 : -1.0;
  const double log_mag = log_double_factorial(q - 3) -
                         0.5 * std::log(std::numbers::pi) - 0.5 * std::lgamma(q + 1.0);
  return sign * std::exp(log_mag);
}

double relu_log_coeff_sq(int q) {
  if (q < 0) throw DomainError("negative Hermite order");
  if (q == 0) return -std::log(2.0 * std::numbers::pi);
  if (q == 1) return std::log(0.25);
  if (q % 2 == 1) return -std::numeric_limits<double>::infinity();
  return 2.0 * log_double_factorial(q - 3) - std::log(2.0 * std::numbers::pi) -
         std::lgamma(q + 1.0);
}

double relu_coeff_exact(int q) {
  if (q <= 1) return q == 0 ? kInvSqrt2Pi : 0.5;
  if (q % 2 == 1) return 0.0;
  const double sign = ((q / 2 + 1) % 2 == 0) ? 1.0 : -1.0;
  return sign * std::exp(0.5 * relu_log_coeff_sq(q));
}

std::vector<double> coeffs_quadrature(const Activation& activation, int qmax,
                                      int panels) {
  if (qmax < 0) throw DomainError("qmax must be >= 0");
  if (panels < 16) throw DomainError("quadrature needs at least 16 panels");
  if (!activation.evaluable())
    throw Unsupported("quadrature needs a pointwise-evaluable activation");

  const auto rule = make_rule(activation.kinks(), half_width_for(qmax), panels, qmax);
  std::vector<double> coeffs(static_cast<std::size_t>(qmax) + 1, 0.0);
  std::vector<double> psi(coeffs.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double z = rule.nodes[i];
    const double s = activation(z);
    if (!std::isfinite(s))
      throw InvalidActivation("activation '" + activation.label() +
                              "' is not finite on the quadrature grid");
    // sigma(z) h_q(z) phi(z) = sigma(z) [h_q(z) e^{-z^2/4}] e^{-z^2/4} / sqrt(2 pi)
    const double base = rule.weights[i] * s * std::exp(-0.25 * z * z) * kInvSqrt2Pi;
    if (base == 0.0) continue;
    hermite_function_all(z, psi);
    for (std::size_t q = 0; q < coeffs.size(); ++q) coeffs[q] += base * psi[q];
  }
  return coeffs;
}

double coeff_quadrature(const Activation& activation, int q, int panels) {
  if (q < 0) throw DomainError("negative Hermite order");
  gaussian_norm_sq(activation, panels);  // rejects non-integrable callables
  return coeffs_quadrature(activation, q, panels).back();
}

double gaussian_norm_sq(const Activation& activation, int panels) {
  if (panels < 16) throw DomainError("quadrature needs at least 16 panels");
  if (!activation.evaluable())
    throw Unsupported("quadrature needs a pointwise-evaluable activation");
  const double near = norm_on(activation, kBaseHalfWidth, panels);
  const double far = norm_on(activation, 2.0 * kBaseHalfWidth, 2 * panels);
  if (!std::isfinite(near) || !std::isfinite(far) ||
      std::abs(far - near) > 1e-8 * std::max(1.0, std::abs(far)))
    throw InvalidActivation("Gaussian L2 norm of '" + activation.label() +
                            "' does not converge; activation is not square integrable");
  return far;
}

HermiteExpansion expansion(const Activation& activation, int qmax,
                           const ExpansionOptions& options) {
  if (qmax < 1) throw DomainError("expansion needs Qmax >= 1");
  const auto n = static_cast<std::size_t>(qmax) + 1;

  if (options.mode == CoeffMode::paper_verbatim &&
      activation.kind() != ActivationKind::relu)
    throw Unsupported("paper-verbatim coefficients exist only for relu");

  if (activation.kind() == ActivationKind::coefficient_table) {
    std::vector<double> coeffs(n, 0.0);
    if (activation.is_sequence()) {
      for (std::size_t q = 0; q < n; ++q) coeffs[q] = activation.sequence_coeff(int(q));
      auto ext = [activation](int q) {
        const double j = activation.sequence_coeff(q);
        return j != 0.0 ? 2.0 * std::log(std::abs(j))
                        : -std::numeric_limits<double>::infinity();
      };
      return HermiteExpansion(activation, std::move(coeffs),
                              std::vector(n, CoeffSource::closed_form),
                              sequence_norm_sq(activation), ext);
    }
    double norm_sq = 0.0;
    for (const auto& [q, v] : activation.table()) {
      norm_sq += v * v;
      if (static_cast<std::size_t>(q) < n) coeffs[static_cast<std::size_t>(q)] = v;
    }
    return HermiteExpansion(activation, std::move(coeffs),
                            std::vector(n, CoeffSource::closed_form), norm_sq);
  }

  if (activation.kind() == ActivationKind::polynomial &&
      options.mode == CoeffMode::automatic) {
    const auto full = polynomial_coeffs(activation.monomials());
    std::vector<double> coeffs(n, 0.0);
    double norm_sq = 0.0;
    for (std::size_t q = 0; q < full.size(); ++q) {
      norm_sq += full[q] * full[q];
      if (q < n) coeffs[q] = full[q];
    }
    return HermiteExpansion(activation, std::move(coeffs),
                            std::vector(n, CoeffSource::closed_form), norm_sq);
  }

  const double norm_sq = gaussian_norm_sq(activation, options.panels);

  if (activation.kind() == ActivationKind::relu &&
      options.mode != CoeffMode::quadrature) {
    const bool paper = options.mode == CoeffMode::paper_verbatim;
    std::vector<double> coeffs(n);
    for (std::size_t q = 0; q < n; ++q)
      coeffs[q] = paper ? relu_coeff_paper(int(q)) : relu_coeff_exact(int(q));
    HermiteExpansion::LogSqExtension ext = relu_log_coeff_sq;
    if (paper)
      ext = [](int q) { return relu_log_coeff_sq(q) + std::log(2.0); };
    return HermiteExpansion(
        activation, std::move(coeffs),
        std::vector(n, paper ? CoeffSource::paper_verbatim : CoeffSource::closed_form),
        norm_sq, ext);
  }

  auto coeffs = coeffs_quadrature(activation, qmax, options.panels);
  HermiteExpansion::LogSqExtension ext;
  if (activation.kind() == ActivationKind::relu) ext = relu_log_coeff_sq;
  return HermiteExpansion(activation, std::move(coeffs),
                          std::vector(n, CoeffSource::quadrature), norm_sq, ext);
}

double parseval_gap(const HermiteExpansion& exp) {
  double partial = 0.0;
  for (double j : exp.coeffs()) partial += j * j;
  return exp.sigma_norm_sq() - partial;
}

DecayFit decay_fit(const HermiteExpansion& exp, DecayModel model, int q_min,
                   int q_max) {
  if (q_max < 0 || q_max > exp.qmax()) q_max = exp.qmax();
  const double floor = kNonzeroRelative * std::max(exp.sigma_norm(), 1e-300);
  std::vector<double> xs, ys;
  for (int q = std::max(q_min, 1); q <= q_max; ++q) {
    const double j = std::abs(exp.coeff(q));
    if (j <= floor) continue;
    switch (model) {
      case DecayModel::power: xs.push_back(std::log(double(q))); break;
      case DecayModel::exponential: xs.push_back(double(q)); break;
      case DecayModel::sqrt_exponential: xs.push_back(std::sqrt(double(q))); break;
    }
    ys.push_back(std::log(j));
  }
  if (xs.size() < 6)
    throw InsufficientData("decay fit needs at least 6 nonzero coefficients, found " +
                           std::to_string(xs.size()));
  const auto line = fit_line(xs, ys);
  return {-line.slope, line.intercept, line.r_squared, static_cast<int>(xs.size())};
}

}  // namespace chaoslab
