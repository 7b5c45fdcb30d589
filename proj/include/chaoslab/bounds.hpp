#pragma once

#include <string>
#include <vector>

#include "chaoslab/hermite.hpp"
#include "chaoslab/stats.hpp"

namespace chaoslab {

enum class Theorem { thm1, thm2 };
enum class QPolicy { fixed, optimize, corollary1 };

/// Width is carried as log n so that astronomically wide networks can be
/// evaluated; the bound formulas are pure arithmetic in n.
struct BoundParams {
  double log_n = 0.0;
  double C = 1.0;
  Theorem theorem = Theorem::thm1;
  QPolicy policy = QPolicy::optimize;
  int fixed_q = 0;
  /// Evaluate the first bound beyond Q <= log_3 sqrt(n).
  bool override_hypothesis = false;

  static BoundParams with_n(double n, Theorem theorem = Theorem::thm1);
  static BoundParams with_log_n(double log_n, Theorem theorem = Theorem::thm1);
  double n() const;
};

struct BoundEntry {
  int Q = 0;
  double main_term = 0.0;
  double tail_term = 0.0;
  double total = 0.0;
};

struct BoundReport {
  int Q_star = 0;
  double main_term = 0.0;
  double tail_term = 0.0;
  double total = 0.0;
  std::vector<BoundEntry> curve;
};

/// floor(log_3 sqrt(n)), the largest Q the first bound admits.
int hypothesis_cap(double log_n);

/// sum_{q>Q} J_q^2 as the Parseval remainder sigma_norm_sq - sum_{q<=Q} J_q^2,
/// floored at 0. When the remainder drops into cancellation noise the
/// directly summed tail of the stored coefficients is returned instead.
double tail_sq(const HermiteExpansion& exp, int Q);

/// C ||sigma|| n^{-1/4} sqrt(sum_{q<=Q} J_q^2 q 3^q) + (3/2) sqrt(tail_sq).
/// Throws HypothesisViolation for Q > log_3 sqrt(n) without the override.
BoundEntry thm1_bound(const HermiteExpansion& exp, const BoundParams& params, int Q);

/// C n^{-1/2} A (||sigma||^2 + n^{-1/2} B) + (3/2) sqrt(tail_sq) with
/// A = sum J_q^2 q 3^q and B = sum J_q^2 3^q over q <= Q.
BoundEntry thm2_bound(const HermiteExpansion& exp, const BoundParams& params, int Q);

/// Evaluates the curve per the Q policy and picks the minimizer.
BoundReport optimize_Q(const HermiteExpansion& exp, const BoundParams& params);

/// Largest Q a scan may reach for this expansion and theorem.
int scan_limit(const HermiteExpansion& exp, const BoundParams& params);

/// Abscissa used when fitting a rate.
enum class RateModel {
  log_log_n,  // log bound vs log log n: (log n)^{-gamma}
  log_n,      // log bound vs log n: n^{-gamma}
  sqrt_log_n  // log bound vs sqrt(log n): exp(-c sqrt(log n))
};
std::string_view to_string(RateModel model);

struct RateRow {
  std::string activation;
  double log_n = 0.0;
  Theorem theorem = Theorem::thm1;
  BoundReport report;
};

struct RateFit {
  std::string activation;
  Theorem theorem = Theorem::thm1;
  RateModel model = RateModel::log_log_n;
  double slope = 0.0;
  double r_squared = 0.0;
  /// Reference exponent from the comparison table, for display.
  double target = 0.0;
};

struct RateSpec {
  HermiteExpansion expansion;
  Theorem theorem;
  RateModel model;
  double target;
};

struct RateTable {
  std::vector<RateRow> rows;
  std::vector<RateFit> fits;
};

/// Default widths for a rate fit, as log n:
///   log-log-n:  n = 10^(2^j), j = 6..13
///   log-n:      n = 10^k, k = 4..16
///   sqrt-log-n: n = 10^k, k = 4, 8, ..., 256
std::vector<double> default_log_n_grid(RateModel model);

/// Model a rate fit is expected to follow for this activation.
RateSpec default_rate_spec(const HermiteExpansion& exp);

/// Optimized bound per (activation, n) plus one fit per activation.
/// Cells are computed independently and assembled in input order.
RateTable rate_table(const std::vector<RateSpec>& specs,
                     const std::vector<double>& log_n_grid, double C = 1.0,
                     int threads = 1);

RateFit fit_rate(const std::vector<RateRow>& rows, RateModel model);

}  // namespace chaoslab
