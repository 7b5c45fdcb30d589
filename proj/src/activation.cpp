#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "chaoslab/errors.hpp"
#include "chaoslab/hermite.hpp"

namespace chaoslab {

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::relu: return "relu";
    case ActivationKind::erf: return "erf";
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::logistic: return "logistic";
    case ActivationKind::polynomial: return "polynomial";
    case ActivationKind::coefficient_table: return "coefficient-table";
    case ActivationKind::callable: return "callable";
  }
  return "unknown";
}

Activation Activation::relu() {
  Activation a;
  a.kind_ = ActivationKind::relu;
  a.label_ = "relu";
  a.kinks_ = {0.0};
  a.fn_ = [](double z) { return z > 0.0 ? z : 0.0; };
  return a;
}

Activation Activation::erf() {
  Activation a;
  a.kind_ = ActivationKind::erf;
  a.label_ = "erf";
  a.fn_ = [](double z) { return std::erf(z); };
  return a;
}

Activation Activation::tanh() {
  Activation a;
  a.kind_ = ActivationKind::tanh;
  a.label_ = "tanh";
  a.fn_ = [](double z) { return std::tanh(z); };
  return a;
}

Activation Activation::logistic() {
  Activation a;
  a.kind_ = ActivationKind::logistic;
  a.label_ = "logistic";
  a.fn_ = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  return a;
}

Activation Activation::polynomial(std::vector<double> monomials) {
  if (monomials.empty()) monomials.push_back(0.0);
  Activation a;
  a.kind_ = ActivationKind::polynomial;
  std::ostringstream os;
  os << "poly:";
  for (std::size_t k = 0; k < monomials.size(); ++k)
    os << (k ? "," : "") << monomials[k];
  a.label_ = os.str();
  a.monomials_ = std::move(monomials);
  a.fn_ = [m = a.monomials_](double z) {
    double acc = 0.0;
    for (auto it = m.rbegin(); it != m.rend(); ++it) acc = acc * z + *it;
    return acc;
  };
  return a;
}

Activation Activation::coefficient_table(std::map<int, double> coeffs) {
  for (const auto& [q, _] : coeffs)
    if (q < 0) throw InvalidActivation("coefficient table index must be >= 0");
  Activation a;
  a.kind_ = ActivationKind::coefficient_table;
  std::ostringstream os;
  os << "table:";
  bool first = true;
  for (const auto& [q, v] : coeffs) {
    os << (first ? "" : ",") << "J" << q << "=" << v;
    first = false;
  }
  a.label_ = os.str();
  a.table_ = std::move(coeffs);
  a.fn_ = [t = a.table_](double z) {
    if (t.empty()) return 0.0;
    std::vector<double> h(static_cast<std::size_t>(t.rbegin()->first) + 1);
    hermite_normalized_all(z, h);
    double acc = 0.0;
    for (const auto& [q, v] : t) acc += v * h[static_cast<std::size_t>(q)];
    return acc;
  };
  return a;
}

Activation Activation::coefficient_sequence(std::function<double(int)> coeff,
                                            std::string label) {
  Activation a;
  a.kind_ = ActivationKind::coefficient_table;
  a.label_ = std::move(label);
  a.sequence_ = std::move(coeff);
  return a;
}

Activation Activation::callable(std::function<double(double)> fn,
                                std::string label, std::vector<double> kinks) {
  Activation a;
  a.kind_ = ActivationKind::callable;
  a.label_ = std::move(label);
  std::sort(kinks.begin(), kinks.end());
  a.kinks_ = std::move(kinks);
  a.fn_ = std::move(fn);
  return a;
}

double Activation::sequence_coeff(int q) const {
  if (!sequence_) throw Unsupported("activation is not a coefficient sequence");
  return sequence_(q);
}

double Activation::operator()(double z) const {
  if (!fn_)
    throw Unsupported("activation '" + label_ +
                      "' is an infinite coefficient sequence and cannot be "
                      "evaluated pointwise");
  return fn_(z);
}

int Activation::parity() const {
  switch (kind_) {
    case ActivationKind::erf:
    case ActivationKind::tanh:
      return -1;
    case ActivationKind::polynomial: {
      bool has_even = false, has_odd = false;
      for (std::size_t k = 0; k < monomials_.size(); ++k)
        if (monomials_[k] != 0.0) (k % 2 ? has_odd : has_even) = true;
      if (has_odd && !has_even) return -1;
      if (has_even && !has_odd) return 1;
      return 0;
    }
    default:
      return 0;
  }
}

std::vector<std::string> Activation::supported_kinds() {
  return {"relu", "erf", "tanh", "logistic", "poly:c0,c1,...",
          "table:J<q>=<value>,...", "power:<alpha>", "expdecay:<beta>[:odd]"};
}

namespace {

double parse_double(std::string_view text, std::string_view what) {
  // std::from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw InvalidActivation("cannot parse " + std::string(what) + " '" +
                            std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string kinds_message() {
  std::string msg = "supported kinds:";
  for (const auto& k : Activation::supported_kinds()) msg += " " + k;
  return msg;
}

}  // namespace

Activation Activation::parse(std::string_view text) {
  if (text == "relu") return relu();
  if (text == "erf") return erf();
  if (text == "tanh") return tanh();
  if (text == "logistic" || text == "sigmoid") return logistic();

  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw InvalidActivation("unknown activation '" + std::string(text) + "'; " +
                            kinds_message());
  const auto head = text.substr(0, colon);
  const auto body = text.substr(colon + 1);

  if (head == "poly") {
    std::vector<double> m;
    for (auto part : split(body, ',')) m.push_back(parse_double(part, "monomial"));
    return polynomial(std::move(m));
  }
  if (head == "table") {
    std::map<int, double> t;
    for (auto part : split(body, ',')) {
      const auto eq = part.find('=');
      if (part.empty() || part.front() != 'J' || eq == std::string_view::npos)
        throw InvalidActivation("table entries look like J3=0.5, got '" +
                                std::string(part) + "'");
      const double qd = parse_double(part.substr(1, eq - 1), "table index");
      if (qd < 0 || qd != std::floor(qd))
        throw InvalidActivation("table index must be a nonnegative integer");
      t[static_cast<int>(qd)] = parse_double(part.substr(eq + 1), "table value");
    }
    return coefficient_table(std::move(t));
  }
  if (head == "power") {
    const double alpha = parse_double(body, "power exponent");
    if (alpha <= 0.5)
      throw InvalidActivation("power:<alpha> needs alpha > 1/2 for square summability");
    return coefficient_sequence(
        [alpha](int q) { return q == 0 ? 0.0 : std::pow(double(q), -alpha); },
        "power:" + std::string(body));
  }
  if (head == "expdecay") {
    const auto parts = split(body, ':');
    const double beta = parse_double(parts[0], "decay rate");
    if (beta <= 0.0) throw InvalidActivation("expdecay:<beta> needs beta > 0");
    bool odd_only = false;
    if (parts.size() == 2 && parts[1] == "odd")
      odd_only = true;
    else if (parts.size() != 1)
      throw InvalidActivation("expdecay syntax is expdecay:<beta>[:odd]");
    return coefficient_sequence(
        [beta, odd_only](int q) {
          if (odd_only && q % 2 == 0) return 0.0;
          return std::exp(-beta * q);
        },
        "expdecay:" + std::string(body));
  }
  throw InvalidActivation("unknown activation '" + std::string(text) + "'; " +
                          kinds_message());
}

}  // namespace chaoslab
