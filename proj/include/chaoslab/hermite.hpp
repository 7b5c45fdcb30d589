#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chaoslab {

/// Unit-variance Hermite polynomial h_q(x) = H_q(x) / sqrt(q!), where H_q are
/// the probabilists' Hermite polynomials. Uses the normalized three-term
/// recurrence, which stays finite long after H_q itself overflows.
template <typename Scalar>
Scalar hermite_normalized(int q, Scalar x) {
  if (q <= 0) return Scalar(1);
  Scalar prev(1);
  Scalar cur = x;
  for (int k = 1; k < q; ++k) {
    const Scalar next =
        (x * cur - std::sqrt(Scalar(k)) * prev) / std::sqrt(Scalar(k + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

/// out[q] = h_q(x) for q = 0 .. out.size()-1.
void hermite_normalized_all(double x, std::span<double> out);

/// out[q] = h_q(x) * exp(-x^2/4). Bounded by a small constant for every q and
/// x, so it is the form used inside quadrature loops.
void hermite_function_all(double x, std::span<double> out);

enum class ActivationKind {
  relu,
  erf,
  tanh,
  logistic,
  polynomial,
  coefficient_table,
  callable
};

std::string_view to_string(ActivationKind kind);

/// A scalar nonlinearity that is square-integrable under N(0,1).
///
/// Coefficient tables come in two flavours: a finite explicit map q -> J_q,
/// or an infinite sequence given by a generator (used for synthetic decay
/// profiles). Only finite tables can be evaluated pointwise.
class Activation {
 public:
  static Activation relu();
  static Activation erf();
  static Activation tanh();
  static Activation logistic();
  /// sum_k monomials[k] * x^k
  static Activation polynomial(std::vector<double> monomials);
  static Activation coefficient_table(std::map<int, double> coeffs);
  static Activation coefficient_sequence(std::function<double(int)> coeff,
                                         std::string label);
  static Activation callable(std::function<double(double)> fn,
                             std::string label,
                             std::vector<double> kinks = {});

  /// Parses "relu", "erf", "tanh", "logistic", "poly:c0,c1,...",
  /// "table:J0=a,J3=b", "power:ALPHA", "expdecay:BETA[:odd]".
  static Activation parse(std::string_view text);
  static std::vector<std::string> supported_kinds();

  ActivationKind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  const std::vector<double>& kinks() const { return kinks_; }
  const std::vector<double>& monomials() const { return monomials_; }
  const std::map<int, double>& table() const { return table_; }

  bool is_sequence() const { return static_cast<bool>(sequence_); }
  double sequence_coeff(int q) const;

  /// True when sigma(z) can be computed pointwise.
  bool evaluable() const { return !is_sequence(); }
  double operator()(double z) const;

  /// Parity known a priori: +1 even, -1 odd, 0 neither/unknown.
  int parity() const;

 private:
  ActivationKind kind_ = ActivationKind::callable;
  std::string label_;
  std::vector<double> kinks_;
  std::vector<double> monomials_;
  std::map<int, double> table_;
  std::function<double(int)> sequence_;
  std::function<double(double)> fn_;
};

enum class CoeffSource { closed_form, quadrature, paper_verbatim };
std::string_view to_string(CoeffSource source);

enum class CoeffMode {
  automatic,       // closed forms where available, quadrature otherwise
  quadrature,      // force quadrature for every evaluable activation
  paper_verbatim,  // relu only: the published table as printed
};

struct ExpansionOptions {
  int panels = 64;
  CoeffMode mode = CoeffMode::automatic;
};

/// Normalized Hermite coefficients J_0..J_Qmax of an activation together with
/// its Gaussian L2 norm. Immutable once built.
///
/// Relu expansions and generator tables carry a closed-form extension that
/// returns log(J_q^2) beyond Qmax; bound evaluations at astronomical widths
/// rely on it.
class HermiteExpansion {
 public:
  using LogSqExtension = std::function<double(int)>;

  HermiteExpansion(Activation activation, std::vector<double> coeffs,
                   std::vector<CoeffSource> sources, double sigma_norm_sq,
                   LogSqExtension extension = {});

  const Activation& activation() const { return activation_; }
  int qmax() const { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const double> coeffs() const { return coeffs_; }
  double coeff(int q) const;
  CoeffSource source(int q) const { return sources_.at(q); }
  double sigma_norm_sq() const { return sigma_norm_sq_; }
  double sigma_norm() const { return std::sqrt(sigma_norm_sq_); }

  bool has_extension() const { return static_cast<bool>(extension_); }
  /// J_q^2, falling back to the extension beyond Qmax (0 without one).
  double coeff_sq(int q) const;
  /// log(J_q^2); -inf for vanishing coefficients.
  double log_coeff_sq(int q) const;

 private:
  Activation activation_;
  std::vector<double> coeffs_;
  std::vector<CoeffSource> sources_;
  double sigma_norm_sq_;
  LogSqExtension extension_;
};

/// Relu coefficient as printed in the published table (denominator sqrt(pi)).
double relu_coeff_paper(int q);
/// Relu coefficient with the denominator sqrt(2 pi) that quadrature gives.
double relu_coeff_exact(int q);
/// log(J_q^2) of relu_coeff_exact, valid for arbitrarily large q.
double relu_log_coeff_sq(int q);

/// E[sigma(Z) h_q(Z)] by composite Gauss-Legendre panels on a kink-split,
/// truncated domain. `panels` is a lower bound; the panel width is also
/// capped so that the oscillations of h_q are resolved.
double coeff_quadrature(const Activation& activation, int q, int panels = 64);

/// All coefficients J_0..J_qmax in one pass over the quadrature nodes.
std::vector<double> coeffs_quadrature(const Activation& activation, int qmax,
                                      int panels = 64);

/// E[sigma(Z)^2]. Throws InvalidActivation when the estimate does not settle
/// as the truncation widens (non-integrable activation).
double gaussian_norm_sq(const Activation& activation, int panels = 64);

HermiteExpansion expansion(const Activation& activation, int qmax,
                           const ExpansionOptions& options = {});

/// sigma_norm_sq - sum_{q<=Qmax} J_q^2.
double parseval_gap(const HermiteExpansion& exp);

enum class DecayModel { power, exponential, sqrt_exponential };

struct DecayFit {
  /// alpha, beta or c in |J_q| ~ q^-alpha, e^{-beta q}, e^{-c sqrt q}
  double exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

/// Least-squares fit of log|J_q| over nonzero coefficients with
/// q_min <= q <= q_max (q_max < 0 means Qmax).
DecayFit decay_fit(const HermiteExpansion& exp, DecayModel model,
                   int q_min = 4, int q_max = -1);

}  // namespace chaoslab
