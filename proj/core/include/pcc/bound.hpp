#pragma once

// Spearman ceiling of an ideal binary (similar / dissimilar) classifier.
//
// Setting: n scored pairs sorted by descending gold similarity, so gold ranks
// are 1..n without ties. The best a two-level predictor can do is call the
// first k pairs positive and the rest negative. Under mean-rank substitution
// the positives share rank (k+1)/2 and the negatives share (k+n+1)/2, and
//
//   sum d^2 = n(n+1)(2n+1)/6 + (n/4)(k^2 - nk - (n+1)^2),
//
// minimised at k = n/2. Plugging that into rho = 1 - 6 sum d^2 / (n(n^2-1))
// gives (7n^2 - 4) / (8(n^2 - 1)), which decreases to 7/8.
//
// Every closed form here is evaluated in exact rational arithmetic and only
// converted to double at the API boundary.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace pcc::bound {

using Rational = boost::multiprecision::cpp_rational;

/// One (n, k) configuration of the optimal binary classifier.
struct BoundAnalysis {
    std::int64_t n = 0;
    std::int64_t k = 0;
    double sum_d_sq = 0.0;
    double rho = 0.0;
};

/// One row of a ceiling sweep. `k_star` is the smallest minimising k.
struct SweepRow {
    std::int64_t n = 0;
    std::int64_t k_star = 0;
    double min_sum_d_sq = 0.0;
    double max_rho = 0.0;
};

// Exact forms. All throw InvalidInput unless n >= 2 and 1 <= k <= n-1.
Rational sum_d_sq_closed_exact(std::int64_t n, std::int64_t k);
Rational sum_d_sq_bruteforce_exact(std::int64_t n, std::int64_t k);
/// The intermediate line of the derivation:
/// sum_{i=1..n} (i - (k+1)/2)^2 - n^2 (n-k) / 4.
Rational sum_d_sq_intermediate_exact(std::int64_t n, std::int64_t k);
/// 1 - 6 s / (n(n^2-1)).
Rational rho_from_sum_d_sq(std::int64_t n, const Rational& sum_d_sq);
Rational max_spearman_exact(std::int64_t n);

double sum_d_sq_closed(std::int64_t n, std::int64_t k);

/// Builds strictly decreasing gold (ranks 1..n) and k ones followed by n-k
/// zeros, ranks both through compute_ranks and sums the squared differences.
double sum_d_sq_bruteforce(std::int64_t n, std::int64_t k);

/// All k in [1, n-1] minimising k^2 - nk: {n/2} for even n,
/// {(n-1)/2, (n+1)/2} for odd n.
std::vector<std::int64_t> optimal_k(std::int64_t n);

/// (7n^2 - 4) / (8(n^2 - 1)) for even n. For odd n, the best Spearman over
/// optimal_k(n); the 7/8 limit is the same.
double max_spearman(std::int64_t n);

BoundAnalysis analyze(std::int64_t n, std::int64_t k);

/// Spearman of a two-level predictor against tie-free gold, using
/// rho = 1 - 6 sum d^2 / (n(n^2-1)) with mean ranks for the tied predictions.
/// Throws InvalidInput on length mismatch, n < 2, more than two prediction
/// levels or tied gold; DegenerateInput when all predictions are equal.
double binary_predictor_spearman(std::span<const double> predictions, std::span<const double> gold);

/// One row per input n, in input order. Rows with n <= bruteforce_limit are
/// cross-checked against sum_d_sq_bruteforce; a mismatch throws std::logic_error.
std::vector<SweepRow> bound_sweep(std::span<const std::int64_t> n_values,
                                  std::int64_t bruteforce_limit = 1000);

/// `n,k_star,min_sum_d_sq,max_rho` header and one line per row, floats at
/// 12 significant digits.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

} // namespace pcc::bound
