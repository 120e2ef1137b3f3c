#pragma once

#include <span>
#include <vector>

namespace pcc {

/// Values together with their 1-based ranks. Tied values share the mean of
/// the positions they jointly occupy, so the ranks always sum to n(n+1)/2.
struct RankedVector {
    std::vector<double> values;
    std::vector<double> ranks;
};

/// Ascending 1-based ranks with mean-rank tie handling.
/// Throws InvalidInput on empty input or non-finite entries.
RankedVector compute_ranks(std::span<const double> values);

/// Spearman's rho computed as the Pearson correlation of the mean-rank
/// vectors. Throws InvalidInput on length mismatch, n < 2 or non-finite
/// entries, and DegenerateInput when either rank vector is constant.
double spearman(std::span<const double> x, std::span<const double> y);

/// Pearson's r with population moments, clamped to [-1, 1].
/// Throws DegenerateInput when either argument has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

} // namespace pcc
