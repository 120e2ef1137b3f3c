#include "pcc/correlation.hpp"

#include "pcc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace pcc {

namespace {

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw InvalidInput(std::string(what) + ": non-finite entry");
        }
    }
}

void require_pair(std::span<const double> x, std::span<const double> y, const char* what) {
    if (x.size() != y.size()) {
        throw InvalidInput(std::string(what) + ": length mismatch (" + std::to_string(x.size()) +
                           " vs " + std::to_string(y.size()) + ")");
    }
    if (x.size() < 2) {
        throw InvalidInput(std::string(what) + ": need at least two observations");
    }
    require_finite(x, what);
    require_finite(y, what);
}

} // namespace

RankedVector compute_ranks(std::span<const double> values) {
    if (values.empty()) {
        throw InvalidInput("compute_ranks: empty input");
    }
    require_finite(values, "compute_ranks");

    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    RankedVector out;
    out.values.assign(values.begin(), values.end());
    out.ranks.resize(n);

    std::size_t first = 0;
    while (first < n) {
        std::size_t last = first;
        while (last + 1 < n && values[order[last + 1]] == values[order[first]]) {
            ++last;
        }
        // positions first..last (0-based) hold ranks first+1..last+1
        const double mean_rank = 0.5 * static_cast<double>(first + last + 2);
        for (std::size_t j = first; j <= last; ++j) {
            out.ranks[order[j]] = mean_rank;
        }
        first = last + 1;
    }
    return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    require_pair(x, y, "pearson");

    const double n = static_cast<double>(x.size());
    const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;

    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        throw DegenerateInput("pearson: zero variance");
    }
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
    require_pair(x, y, "spearman");
    const RankedVector rx = compute_ranks(x);
    const RankedVector ry = compute_ranks(y);
    try {
        return pearson(rx.ranks, ry.ranks);
    } catch (const DegenerateInput&) {
        throw DegenerateInput("spearman: zero rank variance (all values tied)");
    }
}

} // namespace pcc
