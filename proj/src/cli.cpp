#include "chaoslab/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "chaoslab/bounds.hpp"
#include "chaoslab/errors.hpp"
#include "chaoslab/hermite.hpp"
#include "chaoslab/records.hpp"
#include "chaoslab/simulator.hpp"
#include "chaoslab/verify.hpp"

namespace chaoslab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Common {
  std::uint64_t seed = 1;
  std::string format = "csv";
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Master seed");
  sub->add_option("--format", c.format, "Data format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", c.out, "Primary output path (stdout when omitted)");
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::pair<std::string, std::string>> collect_parameters(const CLI::App* sub) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto* opt : sub->get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help" || name.empty()) continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : " ") + r;
      if (opt->get_type_size() == 0 && value.empty()) value = "true";
    } else {
      value = opt->get_default_str();
    }
    out.emplace_back(name, value);
  }
  return out;
}

/// Writes the tables and, with --out, the manifest next to the primary file.
void emit(const std::vector<Table>& tables, const Common& common, const CLI::App* sub,
          std::chrono::steady_clock::time_point start, const std::string& started_at,
          std::ostream& out) {
  const Format format = parse_format(common.format);
  if (common.out.empty()) {
    for (std::size_t i = 0; i < tables.size(); ++i) {
      if (i) out << '\n';
      write_table(tables[i], format, out);
    }
    return;
  }
  RunManifest manifest;
  manifest.command = sub->get_name();
  manifest.parameters = collect_parameters(sub);
  manifest.master_seed = common.seed;
  manifest.version = artifact_version();
  manifest.started_at = started_at;
  const std::filesystem::path primary(common.out);
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto path = i == 0 ? primary : sibling_path(primary, tables[i].name, format);
    std::ofstream file(path, std::ios::binary);
    if (!file) throw DomainError("cannot open output file " + path.string());
    write_table(tables[i], format, file);
    manifest.outputs.push_back(path.string());
  }
  manifest.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream mf(manifest_path(primary), std::ios::binary);
  if (!mf) throw DomainError("cannot open manifest file");
  mf << manifest.to_json();
}

/// "1e6", "81" or "10^8192", returned as log n.
double parse_log_n(const std::string& token) {
  const auto caret = token.find('^');
  if (caret != std::string::npos) {
    const double base = std::stod(token.substr(0, caret));
    const double power = std::stod(token.substr(caret + 1));
    if (!(base > 1.0)) throw DomainError("bad width '" + token + "'");
    return power * std::log(base);
  }
  std::size_t used = 0;
  const double n = std::stod(token, &used);
  if (used != token.size()) throw DomainError("bad width '" + token + "'");
  if (!(n >= 1.0)) throw DomainError("network width n must be >= 1");
  return std::log(n);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

/// Rate grid: "A:B" steps by decades, otherwise a comma list.
std::vector<double> parse_log_n_grid(const std::string& text) {
  const auto range = split(text, ':');
  if (range.size() == 2) {
    const double a = parse_log_n(range[0]), b = parse_log_n(range[1]);
    const double ln10 = std::log(10.0);
    std::vector<double> grid;
    for (double x = a; x <= b * (1 + 1e-12); x += ln10) grid.push_back(x);
    return grid;
  }
  std::vector<double> grid;
  for (const auto& t : split(text, ',')) grid.push_back(parse_log_n(t));
  return grid;
}

/// Simulation widths: "A:B" doubles from A to B, otherwise a comma list.
std::vector<int> parse_width_grid(const std::string& text) {
  std::vector<int> widths;
  const auto range = split(text, ':');
  if (range.size() == 2) {
    const int a = std::stoi(range[0]), b = std::stoi(range[1]);
    if (a < 1 || b < a) throw DomainError("bad width range '" + text + "'");
    for (long long n = a; n <= b; n *= 2) widths.push_back(static_cast<int>(n));
    return widths;
  }
  for (const auto& t : split(text, ',')) widths.push_back(std::stoi(t));
  if (widths.empty()) throw DomainError("empty width grid");
  return widths;
}

Cell width_cell(double log_n) {
  double n = std::exp(log_n);
  if (std::isfinite(n) && log_n < 700.0) {
    const double decades = log_n / std::log(10.0);
    if (std::abs(decades - std::round(decades)) <= 1e-9) return std::pow(10.0, std::round(decades));
    const double whole = std::round(n);
    return std::abs(n - whole) <= 1e-9 * n ? whole : n;
  }
  return "10^" + format_double(log_n / std::log(10.0));
}

std::string theorem_name(Theorem t) { return t == Theorem::thm1 ? "1" : "2"; }

// ---------------------------------------------------------------- coeffs

struct CoeffsArgs {
  Common common;
  std::string activation;
  int qmax = 20;
  std::string mode = "auto";
  int panels = 64;
};

std::vector<Table> cmd_coeffs(const CoeffsArgs& a) {
  ExpansionOptions opts;
  opts.panels = a.panels;
  opts.mode = a.mode == "quadrature" ? CoeffMode::quadrature
              : a.mode == "paper"    ? CoeffMode::paper_verbatim
                                     : CoeffMode::automatic;
  const auto exp = expansion(Activation::parse(a.activation), a.qmax, opts);
  Table coeffs;
  coeffs.name = "coefficients";
  coeffs.columns = {"q", "J_q", "source"};
  for (int q = 0; q <= exp.qmax(); ++q)
    coeffs.add({std::int64_t{q}, exp.coeff(q), std::string(to_string(exp.source(q)))});
  Table summary;
  summary.name = "summary";
  summary.columns = {"activation", "qmax", "sigma_norm_sq", "parseval_gap"};
  summary.add({exp.activation().label(), std::int64_t{exp.qmax()}, exp.sigma_norm_sq(),
               parseval_gap(exp)});
  return {coeffs, summary};
}

// ----------------------------------------------------------------- bound

struct BoundArgs {
  Common common;
  std::string activation;
  std::string n;
  int theorem = 1;
  bool optimize = false;
  int q = -1;
  bool corollary1 = false;
  double C = 1.0;
  bool override_hypothesis = false;
  int qmax = 512;
};

std::vector<Table> cmd_bound(const BoundArgs& a) {
  const auto exp = expansion(Activation::parse(a.activation), a.qmax);
  BoundParams params = BoundParams::with_log_n(parse_log_n(a.n),
                                               a.theorem == 2 ? Theorem::thm2 : Theorem::thm1);
  params.C = a.C;
  params.override_hypothesis = a.override_hypothesis;
  if (a.q >= 0) {
    params.policy = QPolicy::fixed;
    params.fixed_q = a.q;
  } else if (a.corollary1) {
    params.policy = QPolicy::corollary1;
  }
  const auto report = optimize_Q(exp, params);

  Table curve;
  curve.name = "curve";
  curve.columns = {"Q", "main_term", "tail_term", "total"};
  for (const auto& e : report.curve)
    curve.add({std::int64_t{e.Q}, e.main_term, e.tail_term, e.total});
  Table summary;
  summary.name = "summary";
  summary.columns = {"activation", "n", "theorem", "policy", "C", "Q_star",
                     "main_term", "tail_term", "total"};
  const char* policy = params.policy == QPolicy::fixed        ? "fixed"
                       : params.policy == QPolicy::corollary1 ? "corollary1"
                                                              : "optimize";
  summary.add({exp.activation().label(), width_cell(params.log_n), theorem_name(params.theorem),
               std::string(policy), a.C, std::int64_t{report.Q_star}, report.main_term,
               report.tail_term, report.total});
  return {summary, curve};
}

// ----------------------------------------------------------------- rates

struct RatesArgs {
  Common common;
  std::vector<std::string> activations{"relu", "power:1.25", "erf", "poly:0,0,1", "tanh"};
  std::string grid;
  int theorem = 0;
  double C = 1.0;
  std::string plot;
  int qmax = 512;
  int threads = 1;
};

double abscissa(RateModel model, double log_n) {
  switch (model) {
    case RateModel::log_log_n: return std::log(log_n);
    case RateModel::log_n: return log_n;
    case RateModel::sqrt_log_n: return std::sqrt(log_n);
  }
  return log_n;
}

void write_svg(const std::vector<RateSpec>& specs, const RateTable& table,
               const std::string& path) {
  constexpr int kW = 560, kH = 180, kPad = 50;
  std::ofstream svg(path, std::ios::binary);
  if (!svg) throw DomainError("cannot open plot file " + path);
  const int height = kH * static_cast<int>(specs.size());
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << height
      << "\" font-family=\"monospace\" font-size=\"11\">\n";
  for (std::size_t s = 0; s < specs.size(); ++s) {
    std::vector<double> xs, ys;
    for (const auto& row : table.rows)
      if (row.activation == table.fits[s].activation && row.report.total > 0.0 &&
          row.theorem == specs[s].theorem) {
        xs.push_back(abscissa(specs[s].model, row.log_n));
        ys.push_back(std::log(row.report.total));
      }
    if (xs.size() < 2) continue;
    const auto [x0, x1] = std::minmax_element(xs.begin(), xs.end());
    const auto [y0, y1] = std::minmax_element(ys.begin(), ys.end());
    const double dx = std::max(*x1 - *x0, 1e-12), dy = std::max(*y1 - *y0, 1e-12);
    const int top = static_cast<int>(s) * kH;
    const int left = kPad, right = kW - 10, bottom = top + kH - 30, upper = top + 20;
    svg << "<g>\n<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << upper << "\" x2=\"" << left << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left + 5 << "\" y=\"" << upper - 5 << "\">"
        << table.fits[s].activation << ": log bound vs " << to_string(specs[s].model)
        << ", slope " << format_double(std::round(table.fits[s].slope * 1e4) / 1e4)
        << "</text>\n<polyline fill=\"none\" stroke=\"steelblue\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double px = left + (xs[i] - *x0) / dx * (right - left);
      const double py = bottom - (ys[i] - *y0) / dy * (bottom - upper);
      svg << (i ? " " : "") << std::round(px * 10) / 10 << "," << std::round(py * 10) / 10;
    }
    svg << "\"/>\n</g>\n";
  }
  svg << "</svg>\n";
}

std::vector<Table> cmd_rates(const RatesArgs& a) {
  std::vector<RateSpec> specs;
  for (const auto& name : a.activations) {
    auto spec = default_rate_spec(expansion(Activation::parse(name), a.qmax));
    if (a.theorem == 1 || a.theorem == 2) {
      spec.theorem = a.theorem == 1 ? Theorem::thm1 : Theorem::thm2;
      spec.model = a.theorem == 1 ? RateModel::log_log_n : RateModel::log_n;
    }
    specs.push_back(std::move(spec));
  }
  const auto fixed_grid = a.grid.empty() ? std::vector<double>{} : parse_log_n_grid(a.grid);
  if (!a.grid.empty() && fixed_grid.size() < 4)
    throw DomainError("rate grids need at least 4 widths");

  RateTable table;
  for (const auto& spec : specs) {
    const auto grid = fixed_grid.empty() ? default_log_n_grid(spec.model) : fixed_grid;
    auto part = rate_table({spec}, grid, a.C, a.threads);
    table.rows.insert(table.rows.end(), part.rows.begin(), part.rows.end());
    table.fits.push_back(part.fits.front());
  }

  Table rows;
  rows.name = "rates";
  rows.columns = {"activation", "n", "Q_star", "main_term", "tail_term", "total",
                  "log10_n", "theorem"};
  for (const auto& r : table.rows)
    rows.add({r.activation, width_cell(r.log_n), std::int64_t{r.report.Q_star},
              r.report.main_term, r.report.tail_term, r.report.total,
              r.log_n / std::log(10.0), theorem_name(r.theorem)});
  Table fits;
  fits.name = "fits";
  fits.columns = {"activation", "theorem", "model", "slope", "r_squared", "reference"};
  for (const auto& f : table.fits)
    fits.add({f.activation, theorem_name(f.theorem), std::string(to_string(f.model)), f.slope,
              f.r_squared, f.target});
  if (!a.plot.empty()) write_svg(specs, table, a.plot);
  return {rows, fits};
}

// -------------------------------------------------------------- simulate

struct SimulateArgs {
  Common common;
  std::string activation = "relu";
  int d = 3;
  int n = 64;
  int M = 8;
  int R = 10000;
  std::vector<std::string> checks;
  std::vector<int> q;
  std::string grid;
  int qmax = 64;
  double coeff = kNaN;
  double memory_cap_mb = 4096.0;
  int threads = 1;
};

double memory_estimate_mb(const SimulateArgs& a, int n, int threads) {
  const double per_replica = double(n) * (a.d + 1) + double(a.M) * n * 3 + 4.0 * a.M * a.M;
  return 8.0 * (double(a.R) * a.M * 3 + threads * per_replica) / (1024.0 * 1024.0);
}

std::vector<Table> cmd_simulate(const SimulateArgs& a) {
  SimConfig cfg;
  cfg.d = a.d;
  cfg.n = a.n;
  cfg.M = a.M;
  cfg.R = a.R;
  cfg.master_seed = a.common.seed;
  cfg.activation = Activation::parse(a.activation);
  cfg.threads = a.threads;
  cfg.validate();

  const auto widths = a.grid.empty() ? std::vector<int>{a.n} : parse_width_grid(a.grid);
  for (int n : widths) {
    const double mb = memory_estimate_mb(a, n, cfg.worker_count());
    if (mb > a.memory_cap_mb)
      throw FeasibilityError("estimated memory " + format_double(std::round(mb)) +
                             " MB for R*M*n = " + std::to_string(a.R) + "*" +
                             std::to_string(a.M) + "*" + std::to_string(n) +
                             " exceeds the cap of " + format_double(a.memory_cap_mb) +
                             " MB; lower R, M or n, or raise --memory-cap-mb");
  }
  const auto exp = expansion(cfg.activation, a.qmax);
  const auto checks = a.checks.empty() ? std::vector<std::string>{"covariance"} : a.checks;

  Table t;
  t.name = "simulation";
  t.columns = {"quantity", "q", "d", "n", "M", "R", "estimate", "stderr", "seed"};
  const auto seed = std::to_string(a.common.seed);
  auto add = [&](const std::string& quantity, Cell q, Cell n, double est, double err) {
    t.add({quantity, std::move(q), std::int64_t{a.d}, std::move(n), std::int64_t{a.M},
           std::int64_t{a.R}, est, err, seed});
  };
  const Cell none = std::string();

  for (const auto& check : checks) {
    if (check == "covariance") {
      for (int n : widths) {
        auto c = cfg;
        c.n = n;
        const auto field = simulate_field(c, exp, FieldKind::full);
        std::vector<std::pair<int, int>> pairs;
        for (int i = 0; i < a.M; ++i)
          for (int j = i; j < a.M; ++j) pairs.emplace_back(i, j);
        const auto report = covariance_check(field, exp, pairs);
        for (const auto& p : report.pairs) {
          const std::string tag = "[" + std::to_string(p.i) + "," + std::to_string(p.j) + "]";
          add("covariance" + tag, none, std::int64_t{n}, p.empirical.value, p.empirical.error);
          add("covariance_series" + tag, none, std::int64_t{n}, p.series, 0.0);
          if (!std::isnan(p.kernel)) add("covariance_kernel" + tag, none, std::int64_t{n}, p.kernel, 0.0);
          add("covariance_z" + tag, none, std::int64_t{n}, p.z, kNaN);
        }
        add("covariance_max_abs_z", none, std::int64_t{n}, report.max_abs_z, kNaN);
      }
    } else if (check == "gap") {
      const int q = a.q.empty() ? 1 : a.q.front();
      const double J = std::isnan(a.coeff) ? exp.coeff(q) : a.coeff;
      const auto law = gap_law(cfg, q, J, widths);
      for (const auto& g : law.points) {
        add("fourth_moment_gap", std::int64_t{q}, std::int64_t{g.n}, g.gap.value, g.gap.error);
        add("fourth_moment_gap_raw", std::int64_t{q}, std::int64_t{g.n}, g.raw_gap.value,
            g.raw_gap.error);
        add("n_times_gap", std::int64_t{q}, std::int64_t{g.n}, g.gap.value * g.n,
            g.gap.error * g.n);
      }
      if (widths.size() >= 2) {
        add("gap_slope", std::int64_t{q}, none, law.slope.value, law.slope.error);
        add("n_times_gap_pooled", std::int64_t{q}, none, law.n_gap.value, law.n_gap.error);
      }
      add("n_times_gap_cumulant", std::int64_t{q}, none, law.cumulant_prediction, 0.0);
      add("n_times_gap_diagram_sum", std::int64_t{q}, none, law.diagram_prediction, 0.0);
    } else if (check == "w2") {
      for (int n : widths) {
        auto c = cfg;
        c.n = n;
        const auto field = simulate_field(c, exp, FieldKind::full);
        add("w2_gaussian_proxy", none, std::int64_t{n}, w2_gaussian_proxy(field, exp), kNaN);
      }
    } else if (check == "reconstruction") {
      const auto qs = a.q.empty() ? std::vector<int>{1, 3, 5} : a.q;
      for (int n : widths)
        for (int Q : qs) {
          auto c = cfg;
          c.n = n;
          const auto e = chaos_remainder_mc(c, exp, Q);
          add("chaos_remainder", std::int64_t{Q}, std::int64_t{n}, e.value, e.error);
          add("tail_sq", std::int64_t{Q}, std::int64_t{n}, tail_sq(exp, Q), 0.0);
        }
    } else if (check == "moments") {
      const auto qs = a.q.empty() ? std::vector<int>{0, 1, 2, 3, 4} : a.q;
      for (int n : widths)
        for (int q : qs) {
          auto c = cfg;
          c.n = n;
          const auto e = chaos_norm_mc(c, exp, q);
          add("chaos_norm_sq", std::int64_t{q}, std::int64_t{n}, e.value, e.error);
          add("coeff_sq", std::int64_t{q}, std::int64_t{n}, exp.coeff_sq(q), 0.0);
        }
    } else {
      throw DomainError("unknown check '" + check + "'");
    }
  }
  return {t};
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  Common common;
  std::vector<std::string> suites;
  bool all = false;
  int threads = 1;
};

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hermite expansion, bound, combinatorics and simulation checks for wide random "
               "networks on the sphere",
               "chaoslab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", artifact_version());
  int threads = default_threads();
  app.add_option("--threads", threads, "Worker threads (default from CHAOSLAB_THREADS)")
      ->check(CLI::PositiveNumber);

  CoeffsArgs coeffs;
  auto* c = app.add_subcommand("coeffs", "Hermite coefficients of an activation");
  c->option_defaults()->always_capture_default();
  add_common(c, coeffs.common);
  c->add_option("--activation", coeffs.activation, "Activation")->required();
  c->add_option("--qmax", coeffs.qmax, "Highest order")->check(CLI::Range(0, 4096));
  c->add_option("--mode", coeffs.mode, "Coefficient source")
      ->check(CLI::IsMember({"auto", "quadrature", "paper"}));
  c->add_option("--panels", coeffs.panels, "Minimum quadrature panels");

  BoundArgs bound;
  auto* b = app.add_subcommand("bound", "Evaluate a bound at one width");
  b->option_defaults()->always_capture_default();
  add_common(b, bound.common);
  b->add_option("--activation", bound.activation, "Activation")->required();
  b->add_option("--n", bound.n, "Width, e.g. 1e6 or 10^500")->required();
  b->add_option("--theorem", bound.theorem, "1 or 2")->check(CLI::IsMember({1, 2}));
  auto* opt_flag = b->add_flag("--optimize", bound.optimize, "Scan Q for the minimum (default)");
  auto* q_opt = b->add_option("--q", bound.q, "Fixed truncation level");
  auto* cor_flag = b->add_flag("--corollary1", bound.corollary1, "Q = log n / (3 log 3)");
  opt_flag->excludes(q_opt)->excludes(cor_flag);
  q_opt->excludes(cor_flag);
  b->add_option("--C", bound.C, "Bound constant");
  b->add_flag("--override-hypothesis", bound.override_hypothesis,
              "Evaluate the first bound beyond Q <= log_3 sqrt(n)");
  b->add_option("--qmax", bound.qmax, "Stored coefficient count");

  RatesArgs rates;
  auto* r = app.add_subcommand("rates", "Optimized bounds over a width grid and fitted rates");
  r->option_defaults()->always_capture_default();
  add_common(r, rates.common);
  r->add_option("--activations", rates.activations, "Activations");
  r->add_option("--n-grid", rates.grid, "A:B in decades or a comma list (default per model)");
  r->add_option("--theorem", rates.theorem, "Force theorem 1 or 2 (0: per activation)")
      ->check(CLI::IsMember({0, 1, 2}));
  r->add_option("--C", rates.C, "Bound constant");
  r->add_option("--plot", rates.plot, "Write an SVG plot here");
  r->add_option("--qmax", rates.qmax, "Stored coefficient count");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Monte Carlo checks on the random field");
  s->option_defaults()->always_capture_default();
  add_common(s, sim.common);
  s->add_option("--activation", sim.activation, "Activation");
  s->add_option("--d", sim.d, "Input dimension");
  s->add_option("--n", sim.n, "Width");
  s->add_option("--M", sim.M, "Points on the sphere");
  s->add_option("--R", sim.R, "Replicas");
  s->add_option("--check", sim.checks, "covariance, gap, w2, reconstruction, moments")
      ->check(CLI::IsMember({"covariance", "gap", "w2", "reconstruction", "moments"}));
  s->add_option("--q", sim.q, "Chaos orders");
  s->add_option("--n-grid", sim.grid, "Widths: A:B doubling or a comma list");
  s->add_option("--qmax", sim.qmax, "Stored coefficient count");
  s->add_option("--coeff", sim.coeff, "Override J_q for the gap check");
  s->add_option("--memory-cap-mb", sim.memory_cap_mb, "Refuse runs estimated above this");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Run the verification suites");
  v->option_defaults()->always_capture_default();
  add_common(v, ver.common);
  v->add_option("--suite", ver.suites, "Suites to run")
      ->check(CLI::IsMember(suite_names()));
  v->add_flag("--all", ver.all, "Run every suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  const std::string started_at = utc_now();
  try {
    if (*c) {
      emit(cmd_coeffs(coeffs), coeffs.common, c, start, started_at, out);
    } else if (*b) {
      emit(cmd_bound(bound), bound.common, b, start, started_at, out);
    } else if (*r) {
      rates.threads = threads;
      emit(cmd_rates(rates), rates.common, r, start, started_at, out);
    } else if (*s) {
      sim.threads = threads;
      emit(cmd_simulate(sim), sim.common, s, start, started_at, out);
    } else if (*v) {
      const auto suites = ver.all || ver.suites.empty() ? suite_names() : ver.suites;
      VerifyOptions opts;
      opts.seed = ver.common.seed;
      opts.threads = threads;
      std::vector<CheckResult> results;
      bool failed = false;
      for (const auto& name : suites) {
        for (auto& res : run_suite(name, opts)) {
          out << format_check(res) << '\n';
          failed = failed || res.status == CheckStatus::fail;
          results.push_back(std::move(res));
        }
      }
      if (!ver.common.out.empty())
        emit({checks_table(results)}, ver.common, v, start, started_at, out);
      return failed ? kExitAssertion : kExitOk;
    }
  } catch (const HypothesisViolation& e) {
    err << "hypothesis violation: " << e.what() << '\n';
    return kExitHypothesis;
  } catch (const InvalidActivation& e) {
    err << "invalid activation: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FeasibilityError& e) {
    err << "refused: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Unsupported& e) {
    err << "unsupported: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitAssertion;
  }
  return kExitOk;
}

}  // namespace chaoslab
