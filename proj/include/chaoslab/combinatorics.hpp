#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <optional>
#include <vector>

namespace chaoslab {

using BigInt = boost::multiprecision::cpp_int;

BigInt factorial(int n);
BigInt binomial(int n, int k);

/// Diagram count C(q,q1)^4 (q1!)^2 (2q-2q1)! for four rows of q nodes with
/// q1 edges between the first two rows.
BigInt upsilon(int q1, int q);

/// log of upsilon() through lgamma; usable far beyond big-integer range.
double upsilon_log(int q1, int q);

/// Checks upsilon(q1,q) / (q!)^2 == C(q,q1)^2 C(2(q-q1), q-q1) in exact
/// integer arithmetic.
bool upsilon_identity(int q1, int q);

/// Exhaustively enumerates the perfect matchings of 4 rows of q labelled
/// nodes with no intra-row edge and returns how many have exactly q1 edges
/// between rows 1 and 2. Throws FeasibilityError for q > 4.
///
/// Work is split over the partner of the first node; the count does not
/// depend on `threads`.
BigInt enumerate_matchings(int q, int q1, int threads = 1);

/// Histogram over q1 of the same enumeration, with the row-3/row-4 edge
/// count check applied to every matching.
std::vector<BigInt> matching_histogram(int q, int threads = 1);

struct UpsilonMaxProfile {
  int argmax = 0;
  double log_max = 0.0;
  /// max upsilon / ((q!)^2 3^{2q} / q)
  double ratio = 0.0;
  /// log_max - [2 log q! + 2q log 3 - log q]
  double log_gap = 0.0;
};

/// Scans q1 in [0, q-1] for the largest diagram count.
UpsilonMaxProfile upsilon_max_profile(int q);

/// Off-diagonal count
///   C(p,p1)^2 (p1!)^2 C(q,q-p+p1)^2 ((q-p+p1)!)^2 (2(p-p1))!
/// for p > q >= 1 and p-q <= p1 <= p-1.
BigInt offdiag_count(int p, int q, int p1);

struct DiagramCount {
  int q = 0;
  std::map<int, BigInt> counts;
  std::optional<std::map<int, BigInt>> oracle_counts;
};

/// Closed-form counts for every q1 in [0, q]; the enumeration oracle is
/// attached when `with_oracle` and q <= 4.
DiagramCount diagram_count(int q, bool with_oracle, int threads = 1);

}  // namespace chaoslab
