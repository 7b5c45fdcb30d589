#include "chaoslab/combinatorics.hpp"

#include <array>
#include <cstdint>
#include <exception>
#include <cmath>
#include <numeric>
#include <thread>

#include "chaoslab/errors.hpp"

namespace chaoslab {

namespace {

void check_pair(int q1, int q) {
  if (q < 1) throw DomainError("q must be >= 1");
  if (q1 < 0 || q1 > q) throw DomainError("need 0 <= q1 <= q");
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

constexpr int kMaxEnumerationQ = 4;
constexpr int kMaxNodes = 4 * kMaxEnumerationQ;

// Depth-first perfect matching enumeration over at most 16 nodes.
// Node i lives in row i / q.
class MatchingCounter {
 public:
  explicit MatchingCounter(int q) : q_(q), nodes_(4 * q) {}

  /// Counts matchings whose first node is paired with `first_partner`.
  std::vector<std::uint64_t> count_branch(int first_partner) {
    hist_.assign(static_cast<std::size_t>(q_) + 1, 0);
    used_.fill(false);
    if (row(first_partner) == row(0)) return hist_;
    used_[0] = used_[first_partner] = true;
    const int r = pair_kind(0, first_partner);
    recurse(r == 12 ? 1 : 0, r == 34 ? 1 : 0);
    return hist_;
  }

  int nodes() const { return nodes_; }

 private:
  int row(int node) const { return node / q_; }

  int pair_kind(int a, int b) const {
    const int ra = std::min(row(a), row(b));
    const int rb = std::max(row(a), row(b));
    if (ra == 0 && rb == 1) return 12;
    if (ra == 2 && rb == 3) return 34;
    return 0;
  }

  void recurse(int edges12, int edges34) {
    int first = -1;
    for (int i = 0; i < nodes_; ++i)
      if (!used_[i]) {
        first = i;
        break;
      }
    if (first < 0) {
      if (edges12 != edges34)
        throw NumericalError("matching with unequal row 1-2 and row 3-4 edge counts");
      ++hist_[static_cast<std::size_t>(edges12)];
      return;
    }
    used_[first] = true;
    for (int j = first + 1; j < nodes_; ++j) {
      if (used_[j] || row(j) == row(first)) continue;
      used_[j] = true;
      const int kind = pair_kind(first, j);
      recurse(edges12 + (kind == 12), edges34 + (kind == 34));
      used_[j] = false;
    }
    used_[first] = false;
  }

  int q_;
  int nodes_;
  std::array<bool, kMaxNodes> used_{};
  std::vector<std::uint64_t> hist_;
};

}  // namespace

BigInt factorial(int n) {
  if (n < 0) throw DomainError("factorial of a negative number");
  BigInt r = 1;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

BigInt upsilon(int q1, int q) {
  check_pair(q1, q);
  const BigInt c = binomial(q, q1);
  const BigInt f = factorial(q1);
  return c * c * c * c * f * f * factorial(2 * q - 2 * q1);
}

double upsilon_log(int q1, int q) {
  check_pair(q1, q);
  if (q > 1000000) throw DomainError("upsilon_log supports q <= 1e6");
  return 4.0 * log_binomial(q, q1) + 2.0 * std::lgamma(q1 + 1.0) +
         std::lgamma(2.0 * (q - q1) + 1.0);
}

bool upsilon_identity(int q1, int q) {
  check_pair(q1, q);
  const BigInt qf = factorial(q);
  const BigInt lhs_num = upsilon(q1, q);
  const BigInt den = qf * qf;
  if (lhs_num % den != 0) return false;
  const BigInt c = binomial(q, q1);
  return lhs_num / den == c * c * binomial(2 * (q - q1), q - q1);
}

std::vector<BigInt> matching_histogram(int q, int threads) {
  if (q < 1) throw DomainError("q must be >= 1");
  if (q > kMaxEnumerationQ)
    throw FeasibilityError("exhaustive matching enumeration is capped at q = 4");
  const int nodes = 4 * q;
  threads = std::max(1, threads);

  // One branch per partner of node 0; each branch lands in its own slot so
  // the final reduction runs in a fixed order.
  std::vector<std::vector<std::uint64_t>> partial(static_cast<std::size_t>(nodes));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  auto work = [&](int worker) {
    try {
      MatchingCounter counter(q);
      for (int partner = 1 + worker; partner < nodes; partner += threads)
        partial[static_cast<std::size_t>(partner)] = counter.count_branch(partner);
    } catch (...) {
      errors[static_cast<std::size_t>(worker)] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<BigInt> hist(static_cast<std::size_t>(q) + 1, 0);
  for (int partner = 1; partner < nodes; ++partner)
    for (std::size_t k = 0; k < hist.size(); ++k)
      hist[k] += partial[static_cast<std::size_t>(partner)][k];
  return hist;
}

BigInt enumerate_matchings(int q, int q1, int threads) {
  check_pair(q1, q);
  return matching_histogram(q, threads).at(static_cast<std::size_t>(q1));
}

UpsilonMaxProfile upsilon_max_profile(int q) {
  if (q < 3) throw DomainError("upsilon_max_profile needs q >= 3");
  UpsilonMaxProfile best;
  best.log_max = -INFINITY;
  for (int q1 = 0; q1 < q; ++q1) {
    const double v = upsilon_log(q1, q);
    if (v > best.log_max) {
      best.log_max = v;
      best.argmax = q1;
    }
  }
  const double log_scale =
      2.0 * std::lgamma(q + 1.0) + 2.0 * q * std::log(3.0) - std::log(double(q));
  best.log_gap = best.log_max - log_scale;
  best.ratio = std::exp(best.log_gap);
  return best;
}

BigInt offdiag_count(int p, int q, int p1) {
  if (!(p > q && q >= 1)) throw DomainError("offdiag_count needs p > q >= 1");
  if (p1 < p - q || p1 > p - 1) throw DomainError("offdiag_count needs p-q <= p1 <= p-1");
  const int r = q - p + p1;
  const BigInt cp = binomial(p, p1);
  const BigInt fp = factorial(p1);
  const BigInt cq = binomial(q, r);
  const BigInt fq = factorial(r);
  return cp * cp * fp * fp * cq * cq * fq * fq * factorial(2 * (p - p1));
}

DiagramCount diagram_count(int q, bool with_oracle, int threads) {
  DiagramCount dc;
  dc.q = q;
  for (int q1 = 0; q1 <= q; ++q1) dc.counts[q1] = upsilon(q1, q);
  if (with_oracle && q <= kMaxEnumerationQ) {
    const auto hist = matching_histogram(q, threads);
    std::map<int, BigInt> oracle;
    for (int q1 = 0; q1 <= q; ++q1) oracle[q1] = hist[static_cast<std::size_t>(q1)];
    dc.oracle_counts = std::move(oracle);
  }
  return dc;
}

}  // namespace chaoslab
