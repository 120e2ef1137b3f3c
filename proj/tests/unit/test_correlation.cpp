#include "pcc/correlation.hpp"
#include "pcc/errors.hpp"
#include "pcc/rng.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

using namespace pcc;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

} // namespace

TEST_SUITE("correlation") {

TEST_CASE("distinct values rank by position") {
    const std::vector<double> v{3.0, 1.0, 2.0};
    const auto r = compute_ranks(v);
    CHECK(r.ranks == std::vector<double>{3.0, 1.0, 2.0});
    CHECK(r.values == v);
}

TEST_CASE("ties take the mean rank") {
    const std::vector<double> v{1.0, 1.0, 2.0, 2.0};
    CHECK(compute_ranks(v).ranks == std::vector<double>{1.5, 1.5, 3.5, 3.5});
}

TEST_CASE("ranks match the counting oracle on data with duplicates") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(50);
        for (double& x : v) x = static_cast<double>(rng.below(12));
        const auto r = compute_ranks(v);
        CHECK(r.ranks == oracle::ranks_by_counting(v));
        const double total = std::accumulate(r.ranks.begin(), r.ranks.end(), 0.0);
        CHECK(total == 50.0 * 51.0 / 2.0);
    }
}

TEST_CASE("ranking is monotone and independent of the order of equal values") {
    Rng rng(12);
    std::vector<double> v(40);
    for (double& x : v) x = static_cast<double>(rng.below(7));
    const auto r = compute_ranks(v);
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (v[i] < v[j]) CHECK(r.ranks[i] < r.ranks[j]);
            if (v[i] == v[j]) CHECK(r.ranks[i] == r.ranks[j]);
        }
    }
}

TEST_CASE("rank input validation") {
    CHECK_THROWS_AS(compute_ranks(std::vector<double>{}), InvalidInput);
    CHECK_THROWS_AS(compute_ranks(std::vector<double>{1.0, std::nan("")}), InvalidInput);
    CHECK_THROWS_AS(compute_ranks(std::vector<double>{std::numeric_limits<double>::infinity()}), InvalidInput);
}

TEST_CASE("spearman on exact orderings") {
    CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 3, 4}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("spearman matches the direct sum-of-squared-differences formula without ties") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = random_vector(rng, 30);
        const auto y = random_vector(rng, 30);
        CHECK(std::abs(spearman(x, y) - oracle::spearman_sum_d_sq(x, y)) < 1e-12);
    }
}

TEST_CASE("spearman is unchanged by strictly increasing transforms") {
    Rng rng(14);
    const auto x = random_vector(rng, 25);
    const auto y = random_vector(rng, 25);
    std::vector<double> gx(x.size());
    std::transform(x.begin(), x.end(), gx.begin(), [](double v) { return std::exp(v) + v * v * v; });
    CHECK(spearman(gx, y) == spearman(x, y));
}

TEST_CASE("pearson on exact linear relations") {
    CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{6, 4, 2}) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("pearson matches the two-pass oracle") {
    Rng rng(15);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = random_vector(rng, 100);
        auto y = random_vector(rng, 100);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.5 * x[i];
        CHECK(std::abs(pearson(x, y) - oracle::pearson_two_pass(x, y)) < 1e-12);
    }
}

TEST_CASE("pearson affine invariance and permutation equivariance") {
    Rng rng(16);
    const auto x = random_vector(rng, 60);
    const auto y = random_vector(rng, 60);
    std::vector<double> ax(x.size());
    std::vector<double> nx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        ax[i] = 3.5 * x[i] - 7.0;
        nx[i] = -0.25 * x[i] + 2.0;
    }
    const double r = pearson(x, y);
    CHECK(std::abs(pearson(ax, y) - r) < 1e-12);
    CHECK(std::abs(pearson(nx, y) + r) < 1e-12);

    std::vector<std::size_t> perm(x.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng shuffler(17);
    shuffler.shuffle(std::span<std::size_t>(perm));
    std::vector<double> px(x.size());
    std::vector<double> py(y.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        px[i] = x[perm[i]];
        py[i] = y[perm[i]];
    }
    CHECK(std::abs(pearson(px, py) - r) < 1e-12);
    CHECK(std::abs(spearman(px, py) - spearman(x, y)) < 1e-12);
}

TEST_CASE("both statistics stay inside [-1, 1]") {
    Rng rng(18);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + rng.below(20);
        auto x = random_vector(rng, n);
        auto y = x;
        for (double& v : y) v = v * (rng.uniform() < 0.5 ? 1.0 : -1.0) * 1e-3 + v;
        const double p = pearson(x, y);
        const double s = spearman(x, y);
        CHECK(std::abs(p) <= 1.0 + 1e-12);
        CHECK(std::abs(s) <= 1.0 + 1e-12);
    }
}

TEST_CASE("degenerate and malformed inputs") {
    const std::vector<double> flat{2.0, 2.0, 2.0};
    const std::vector<double> ramp{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(pearson(flat, ramp), DegenerateInput);
    CHECK_THROWS_AS(spearman(ramp, flat), DegenerateInput);
    CHECK_THROWS_AS(spearman(ramp, std::vector<double>{1.0, 2.0}), InvalidInput);
    CHECK_THROWS_AS(pearson(std::vector<double>{1.0}, std::vector<double>{1.0}), InvalidInput);
}

}
