#include "chaoslab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "chaoslab/errors.hpp"

namespace chaoslab {

namespace {

const double kLog3 = std::log(3.0);
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Parseval remainders below this fraction of ||sigma||^2 are dominated by
// rounding in the subtraction.
constexpr double kCancellationFloor = 1e-10;

/// Running log(sum exp(x_i)).
class LogSum {
 public:
  void add(double x) {
    if (x == kNegInf) return;
    if (x <= value_) {
      value_ += std::log1p(std::exp(x - value_));
    } else {
      value_ = x + (value_ == kNegInf ? 0.0 : std::log1p(std::exp(value_ - x)));
    }
  }
  double value() const { return value_; }

 private:
  double value_ = kNegInf;
};

/// Prefix quantities shared by both bounds, for q = 0..limit.
struct Prefix {
  std::vector<double> sum_sq;    // sum_{q'<=q} J^2
  std::vector<double> log_a;     // log sum J^2 q 3^q
  std::vector<double> log_b;     // log sum J^2 3^q

  Prefix(const HermiteExpansion& exp, int limit) {
    const auto n = static_cast<std::size_t>(limit) + 1;
    sum_sq.resize(n);
    log_a.resize(n);
    log_b.resize(n);
    double s = 0.0, comp = 0.0;  // Kahan
    LogSum a, b;
    for (int q = 0; q <= limit; ++q) {
      const double lsq = exp.log_coeff_sq(q);
      const double sq = lsq == kNegInf ? 0.0 : std::exp(lsq);
      const double y = sq - comp;
      const double t = s + y;
      comp = (t - s) - y;
      s = t;
      if (q > 0) a.add(lsq + std::log(double(q)) + q * kLog3);
      b.add(lsq + q * kLog3);
      sum_sq[static_cast<std::size_t>(q)] = s;
      log_a[static_cast<std::size_t>(q)] = a.value();
      log_b[static_cast<std::size_t>(q)] = b.value();
    }
  }
};

double direct_tail(const HermiteExpansion& exp, int Q) {
  double total = 0.0;
  const int stop = exp.has_extension() ? std::max(exp.qmax(), Q) + 1000000 : exp.qmax();
  for (int q = Q + 1; q <= stop; ++q) {
    const double sq = exp.coeff_sq(q);
    total += sq;
    if (q > exp.qmax() && sq < 1e-30 * total) break;
  }
  return total;
}

double tail_from_partial(const HermiteExpansion& exp, int Q, double partial) {
  const double remainder = exp.sigma_norm_sq() - partial;
  if (remainder > kCancellationFloor * exp.sigma_norm_sq()) return remainder;
  return std::max(direct_tail(exp, Q), 0.0);
}

void check_order(const HermiteExpansion& exp, int Q) {
  if (Q < 0) throw DomainError("truncation level Q must be >= 0");
  if (Q > exp.qmax() && !exp.has_extension())
    throw DomainError("truncation level Q = " + std::to_string(Q) +
                      " exceeds the expansion's Qmax = " + std::to_string(exp.qmax()));
}

void check_gate(const BoundParams& params, int Q) {
  if (params.theorem == Theorem::thm1 && !params.override_hypothesis &&
      Q > hypothesis_cap(params.log_n))
    throw HypothesisViolation("Q = " + std::to_string(Q) +
                              " exceeds log_3 sqrt(n) = " +
                              std::to_string(params.log_n / (2.0 * kLog3)) +
                              "; pass the hypothesis override to evaluate anyway");
}

BoundEntry entry_from(const HermiteExpansion& exp, const BoundParams& params,
                      int Q, double partial, double log_a, double log_b) {
  BoundEntry e;
  e.Q = Q;
  e.tail_term = 1.5 * std::sqrt(tail_from_partial(exp, Q, partial));
  if (log_a != kNegInf) {
    if (params.theorem == Theorem::thm1) {
      e.main_term = params.C * exp.sigma_norm() *
                    std::exp(-0.25 * params.log_n + 0.5 * log_a);
    } else {
      const double inner =
          exp.sigma_norm_sq() + (log_b == kNegInf ? 0.0 : std::exp(-0.5 * params.log_n + log_b));
      e.main_term = params.C * std::exp(-0.5 * params.log_n + log_a) * inner;
    }
  }
  e.total = e.main_term + e.tail_term;
  return e;
}

BoundEntry evaluate(const HermiteExpansion& exp, const BoundParams& params, int Q) {
  check_order(exp, Q);
  check_gate(params, Q);
  const Prefix prefix(exp, Q);
  const auto i = static_cast<std::size_t>(Q);
  return entry_from(exp, params, Q, prefix.sum_sq[i], prefix.log_a[i], prefix.log_b[i]);
}

}  // namespace

BoundParams BoundParams::with_n(double n, Theorem theorem) {
  if (!(n >= 1.0)) throw DomainError("network width n must be >= 1");
  return with_log_n(std::log(n), theorem);
}

BoundParams BoundParams::with_log_n(double log_n, Theorem theorem) {
  if (!(log_n >= 0.0) || !std::isfinite(log_n))
    throw DomainError("log n must be finite and >= 0");
  BoundParams p;
  p.log_n = log_n;
  p.theorem = theorem;
  return p;
}

double BoundParams::n() const { return std::exp(log_n); }

int hypothesis_cap(double log_n) {
  return static_cast<int>(std::floor(log_n / (2.0 * kLog3) + 1e-9));
}

double tail_sq(const HermiteExpansion& exp, int Q) {
  check_order(exp, Q);
  double partial = 0.0;
  for (int q = 0; q <= Q; ++q) partial += exp.coeff_sq(q);
  return tail_from_partial(exp, Q, partial);
}

BoundEntry thm1_bound(const HermiteExpansion& exp, const BoundParams& params, int Q) {
  if (!(params.C > 0.0)) throw DomainError("bound constant C must be > 0");
  BoundParams p = params;
  p.theorem = Theorem::thm1;
  return evaluate(exp, p, Q);
}

BoundEntry thm2_bound(const HermiteExpansion& exp, const BoundParams& params, int Q) {
  if (!(params.C > 0.0)) throw DomainError("bound constant C must be > 0");
  BoundParams p = params;
  p.theorem = Theorem::thm2;
  return evaluate(exp, p, Q);
}

int scan_limit(const HermiteExpansion& exp, const BoundParams& params) {
  if (params.theorem == Theorem::thm1 && !params.override_hypothesis) {
    const int cap = hypothesis_cap(params.log_n);
    return exp.has_extension() ? cap : std::min(cap, exp.qmax());
  }
  return exp.qmax();
}

BoundReport optimize_Q(const HermiteExpansion& exp, const BoundParams& params) {
  if (!(params.C > 0.0)) throw DomainError("bound constant C must be > 0");
  BoundReport report;
  switch (params.policy) {
    case QPolicy::fixed:
      report.curve.push_back(evaluate(exp, params, params.fixed_q));
      break;
    case QPolicy::corollary1: {
      const int Q = static_cast<int>(std::lround(params.log_n / (3.0 * kLog3)));
      report.curve.push_back(evaluate(exp, params, Q));
      break;
    }
    case QPolicy::optimize: {
      const int limit = scan_limit(exp, params);
      const Prefix prefix(exp, limit);
      report.curve.reserve(static_cast<std::size_t>(limit) + 1);
      for (int Q = 0; Q <= limit; ++Q) {
        const auto i = static_cast<std::size_t>(Q);
        report.curve.push_back(
            entry_from(exp, params, Q, prefix.sum_sq[i], prefix.log_a[i], prefix.log_b[i]));
      }
      break;
    }
  }
  const auto best = std::min_element(
      report.curve.begin(), report.curve.end(),
      [](const BoundEntry& a, const BoundEntry& b) { return a.total < b.total; });
  report.Q_star = best->Q;
  report.main_term = best->main_term;
  report.tail_term = best->tail_term;
  report.total = best->total;
  return report;
}

std::string_view to_string(RateModel model) {
  switch (model) {
    case RateModel::log_log_n: return "log-log-n";
    case RateModel::log_n: return "log-n";
    case RateModel::sqrt_log_n: return "sqrt-log-n";
  }
  return "unknown";
}

std::vector<double> default_log_n_grid(RateModel model) {
  const double ln10 = std::log(10.0);
  std::vector<double> grid;
  switch (model) {
    case RateModel::log_log_n:
      for (int j = 6; j <= 13; ++j) grid.push_back(std::ldexp(1.0, j) * ln10);
      break;
    case RateModel::log_n:
      for (int k = 4; k <= 16; ++k) grid.push_back(k * ln10);
      break;
    case RateModel::sqrt_log_n:
      for (int k = 4; k <= 256; k *= 2) grid.push_back(k * ln10);
      break;
  }
  return grid;
}

RateSpec default_rate_spec(const HermiteExpansion& exp) {
  const auto& act = exp.activation();
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  switch (act.kind()) {
    case ActivationKind::relu:
      return {exp, Theorem::thm1, RateModel::log_log_n, -0.75};
    case ActivationKind::tanh:
    case ActivationKind::logistic:
      return {exp, Theorem::thm1, RateModel::sqrt_log_n, nan};
    case ActivationKind::erf:
    case ActivationKind::polynomial:
      return {exp, Theorem::thm2, RateModel::log_n, -0.5};
    case ActivationKind::coefficient_table: {
      const auto& label = act.label();
      if (label.rfind("power:", 0) == 0) {
        const double alpha = std::stod(label.substr(6));
        return {exp, Theorem::thm1, RateModel::log_log_n, -(alpha - 0.5)};
      }
      return {exp, Theorem::thm2, RateModel::log_n, -0.5};
    }
    case ActivationKind::callable:
      break;
  }
  return {exp, Theorem::thm1, RateModel::log_log_n, nan};
}

RateFit fit_rate(const std::vector<RateRow>& rows, RateModel model) {
  std::vector<double> xs, ys;
  for (const auto& row : rows) {
    if (!(row.report.total > 0.0)) continue;
    switch (model) {
      case RateModel::log_log_n: xs.push_back(std::log(row.log_n)); break;
      case RateModel::log_n: xs.push_back(row.log_n); break;
      case RateModel::sqrt_log_n: xs.push_back(std::sqrt(row.log_n)); break;
    }
    ys.push_back(std::log(row.report.total));
  }
  if (xs.size() < 2) throw InsufficientData("rate fit needs at least two positive bounds");
  const auto line = fit_line(xs, ys);
  RateFit fit;
  fit.model = model;
  fit.slope = line.slope;
  fit.r_squared = line.r_squared;
  if (!rows.empty()) {
    fit.activation = rows.front().activation;
    fit.theorem = rows.front().theorem;
  }
  return fit;
}

RateTable rate_table(const std::vector<RateSpec>& specs,
                     const std::vector<double>& log_n_grid, double C, int threads) {
  const std::size_t cells = specs.size() * log_n_grid.size();
  std::vector<RateRow> rows(cells);
  std::vector<std::exception_ptr> errors(cells);

  auto compute = [&](std::size_t cell) {
    const auto& spec = specs[cell / log_n_grid.size()];
    const double log_n = log_n_grid[cell % log_n_grid.size()];
    try {
      BoundParams params = BoundParams::with_log_n(log_n, spec.theorem);
      params.C = C;
      rows[cell] = {spec.expansion.activation().label(), log_n, spec.theorem,
                    optimize_Q(spec.expansion, params)};
    } catch (...) {
      errors[cell] = std::current_exception();
    }
  };

  threads = std::max(1, threads);
  if (threads == 1) {
    for (std::size_t c = 0; c < cells; ++c) compute(c);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t c = static_cast<std::size_t>(t); c < cells;
             c += static_cast<std::size_t>(threads))
          compute(c);
      });
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  RateTable table;
  table.rows = std::move(rows);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto first = table.rows.begin() + static_cast<std::ptrdiff_t>(s * log_n_grid.size());
    std::vector<RateRow> slice(first, first + static_cast<std::ptrdiff_t>(log_n_grid.size()));
    auto fit = fit_rate(slice, specs[s].model);
    fit.target = specs[s].target;
    table.fits.push_back(fit);
  }
  return table;
}

}  // namespace chaoslab
