#include "pcc/bound.hpp"

#include "pcc/correlation.hpp"
#include "pcc/errors.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace pcc::bound {

namespace {

using boost::multiprecision::cpp_int;

void require_n(std::int64_t n) {
    if (n < 2) {
        throw InvalidInput("bound: n must be >= 2, got " + std::to_string(n));
    }
}

void require_nk(std::int64_t n, std::int64_t k) {
    require_n(n);
    if (k < 1 || k > n - 1) {
        throw InvalidInput("bound: k must lie in [1, n-1], got n=" + std::to_string(n) +
                           " k=" + std::to_string(k));
    }
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

// Twice a mean rank; mean ranks are half-integers.
cpp_int twice(double rank) { return cpp_int(std::llround(2.0 * rank)); }

} // namespace

Rational sum_d_sq_closed_exact(std::int64_t n, std::int64_t k) {
    require_nk(n, k);
    const cpp_int N = n;
    const cpp_int K = k;
    return Rational(N * (N + 1) * (2 * N + 1), 6) +
           Rational(N, 4) * Rational(K * K - N * K - (N + 1) * (N + 1));
}

Rational sum_d_sq_bruteforce_exact(std::int64_t n, std::int64_t k) {
    require_nk(n, k);
    const auto size = static_cast<std::size_t>(n);

    // Descending order is ranked by negating: rank 1 is the most similar pair.
    std::vector<double> neg_gold(size);
    std::vector<double> neg_pred(size);
    for (std::size_t i = 0; i < size; ++i) {
        neg_gold[i] = -static_cast<double>(size - i);
        neg_pred[i] = static_cast<std::int64_t>(i) < k ? -1.0 : 0.0;
    }
    const RankedVector gold_ranks = compute_ranks(neg_gold);
    const RankedVector pred_ranks = compute_ranks(neg_pred);

    cpp_int four_sum = 0;
    for (std::size_t i = 0; i < size; ++i) {
        const cpp_int d2 = twice(pred_ranks.ranks[i]) - twice(gold_ranks.ranks[i]);
        four_sum += d2 * d2;
    }
    return Rational(four_sum, 4);
}

Rational sum_d_sq_intermediate_exact(std::int64_t n, std::int64_t k) {
    require_nk(n, k);
    // sum (i - (k+1)/2)^2 = sum ((2i - k - 1)^2) / 4
    cpp_int four_sum = 0;
    for (std::int64_t i = 1; i <= n; ++i) {
        const cpp_int t = 2 * i - k - 1;
        four_sum += t * t;
    }
    const cpp_int N = n;
    return Rational(four_sum, 4) - Rational(N * N * (N - k), 4);
}

Rational rho_from_sum_d_sq(std::int64_t n, const Rational& sum_d_sq) {
    require_n(n);
    const cpp_int N = n;
    return Rational(1) - Rational(6) * sum_d_sq / Rational(N * (N * N - 1));
}

std::vector<std::int64_t> optimal_k(std::int64_t n) {
    require_n(n);
    std::vector<std::int64_t> out;
    const std::int64_t lo = n / 2;
    const std::int64_t hi = (n + 1) / 2;
    out.push_back(lo);
    if (hi != lo) {
        // k^2 - nk is symmetric about n/2, so floor and ceil tie for odd n.
        out.push_back(hi);
    }
    return out;
}

Rational max_spearman_exact(std::int64_t n) {
    require_n(n);
    Rational best = rho_from_sum_d_sq(n, sum_d_sq_closed_exact(n, optimal_k(n).front()));
    for (std::int64_t k : optimal_k(n)) {
        const Rational rho = rho_from_sum_d_sq(n, sum_d_sq_closed_exact(n, k));
        if (rho > best) {
            best = rho;
        }
    }
    return best;
}

double sum_d_sq_closed(std::int64_t n, std::int64_t k) { return to_double(sum_d_sq_closed_exact(n, k)); }

double sum_d_sq_bruteforce(std::int64_t n, std::int64_t k) {
    return to_double(sum_d_sq_bruteforce_exact(n, k));
}

double max_spearman(std::int64_t n) { return to_double(max_spearman_exact(n)); }

BoundAnalysis analyze(std::int64_t n, std::int64_t k) {
    const Rational s = sum_d_sq_closed_exact(n, k);
    return BoundAnalysis{n, k, to_double(s), to_double(rho_from_sum_d_sq(n, s))};
}

double binary_predictor_spearman(std::span<const double> predictions, std::span<const double> gold) {
    if (predictions.size() != gold.size()) {
        throw InvalidInput("binary_predictor_spearman: length mismatch");
    }
    const std::size_t n = predictions.size();
    if (n < 2) {
        throw InvalidInput("binary_predictor_spearman: need at least two observations");
    }

    const RankedVector pred_ranks = compute_ranks(predictions);
    const RankedVector gold_ranks = compute_ranks(gold);

    // Two-level predictions produce exactly one or two distinct ranks.
    double level_a = pred_ranks.ranks[0];
    bool has_b = false;
    double level_b = 0.0;
    for (double r : pred_ranks.ranks) {
        if (r == level_a || (has_b && r == level_b)) {
            continue;
        }
        if (has_b) {
            throw InvalidInput("binary_predictor_spearman: predictions take more than two values");
        }
        has_b = true;
        level_b = r;
    }
    if (!has_b) {
        throw DegenerateInput("binary_predictor_spearman: all predictions identical");
    }
    for (double r : gold_ranks.ranks) {
        if (r != std::floor(r)) {
            throw InvalidInput("binary_predictor_spearman: gold scores contain ties");
        }
    }

    cpp_int four_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const cpp_int d2 = twice(pred_ranks.ranks[i]) - twice(gold_ranks.ranks[i]);
        four_sum += d2 * d2;
    }
    return to_double(rho_from_sum_d_sq(static_cast<std::int64_t>(n), Rational(four_sum, 4)));
}

std::vector<SweepRow> bound_sweep(std::span<const std::int64_t> n_values, std::int64_t bruteforce_limit) {
    std::vector<SweepRow> rows;
    rows.reserve(n_values.size());
    for (std::int64_t n : n_values) {
        require_n(n);
        const std::int64_t k_star = optimal_k(n).front();
        const Rational min_sum = sum_d_sq_closed_exact(n, k_star);
        if (n <= bruteforce_limit && sum_d_sq_bruteforce_exact(n, k_star) != min_sum) {
            throw std::logic_error("bound_sweep: closed form disagrees with brute force at n=" +
                                   std::to_string(n));
        }
        rows.push_back(SweepRow{n, k_star, to_double(min_sum), max_spearman(n)});
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << "n,k_star,min_sum_d_sq,max_rho\n";
    char buf[64];
    for (const SweepRow& row : rows) {
        out << row.n << ',' << row.k_star << ',';
        std::snprintf(buf, sizeof buf, "%.12g", row.min_sum_d_sq);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.12g", row.max_rho);
        out << buf << '\n';
    }
}

} // namespace pcc::bound
