#include "pcc/bound.hpp"
#include "pcc/errors.hpp"
#include "pcc/rng.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <sstream>
#include <vector>

using namespace pcc;
using bound::Rational;

TEST_SUITE("bound") {

TEST_CASE("hand-computed sums of squared rank differences") {
    CHECK(bound::sum_d_sq_closed(4, 2) == 1.0);
    CHECK(bound::sum_d_sq_bruteforce(4, 2) == 1.0);
    CHECK(bound::sum_d_sq_closed(2, 1) == 0.0);
    CHECK(bound::sum_d_sq_closed_exact(3, 1) == bound::sum_d_sq_bruteforce_exact(3, 1));
    CHECK(bound::sum_d_sq_closed_exact(6, 3) == bound::sum_d_sq_bruteforce_exact(6, 3));
    CHECK(bound::sum_d_sq_closed_exact(100, 37) == bound::sum_d_sq_bruteforce_exact(100, 37));
}

TEST_CASE("brute force agrees with a literal rank-difference count") {
    for (std::int64_t n = 2; n <= 30; ++n) {
        for (std::int64_t k = 1; k < n; ++k) {
            // predicted rank of the top k is (k+1)/2, of the rest (k+n+1)/2; gold rank is i
            Rational total = 0;
            for (std::int64_t i = 1; i <= n; ++i) {
                const Rational pred = i <= k ? Rational(k + 1, 2) : Rational(k + n + 1, 2);
                total += (pred - i) * (pred - i);
            }
            CHECK(total == bound::sum_d_sq_bruteforce_exact(n, k));
        }
    }
}

TEST_CASE("out-of-range k and n") {
    CHECK_THROWS_AS(bound::sum_d_sq_closed(4, 0), InvalidInput);
    CHECK_THROWS_AS(bound::sum_d_sq_closed(4, 4), InvalidInput);
    CHECK_THROWS_AS(bound::sum_d_sq_bruteforce(4, 5), InvalidInput);
    CHECK_THROWS_AS(bound::optimal_k(1), InvalidInput);
    CHECK_THROWS_AS(bound::max_spearman(1), InvalidInput);
}

TEST_CASE("optimal k") {
    CHECK(bound::optimal_k(10) == std::vector<std::int64_t>{5});
    CHECK(bound::optimal_k(2) == std::vector<std::int64_t>{1});
    CHECK(bound::optimal_k(7) == std::vector<std::int64_t>{3, 4});
}

TEST_CASE("even n has a unique integer minimiser at n/2") {
    for (std::int64_t n = 2; n <= 200; n += 2) {
        const Rational at_half = bound::sum_d_sq_closed_exact(n, n / 2);
        for (std::int64_t k = 1; k < n; ++k) {
            if (k != n / 2) CHECK(bound::sum_d_sq_closed_exact(n, k) > at_half);
        }
    }
}

TEST_CASE("max spearman values") {
    CHECK(bound::max_spearman(2) == 1.0);
    CHECK(bound::max_spearman(4) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(bound::max_spearman_exact(4) == Rational(9, 10));
    CHECK(bound::rho_from_sum_d_sq(4, 1) == Rational(9, 10));
    CHECK(std::abs(bound::max_spearman(1'000'000) - 0.875) < 1e-6);
}

TEST_CASE("max spearman for even n equals the rational closed form") {
    for (std::int64_t n = 2; n <= 400; n += 2) {
        const Rational expected = Rational(7 * n * n - 4, 8 * (n * n - 1));
        CHECK(bound::max_spearman_exact(n) == expected);
        CHECK(bound::max_spearman_exact(n) - Rational(7, 8) == Rational(3, 8 * (n * n - 1)));
    }
}

TEST_CASE("odd n maximises over both optimal k") {
    for (std::int64_t n = 3; n <= 99; n += 2) {
        const Rational a = bound::rho_from_sum_d_sq(n, bound::sum_d_sq_closed_exact(n, (n - 1) / 2));
        const Rational b = bound::rho_from_sum_d_sq(n, bound::sum_d_sq_closed_exact(n, (n + 1) / 2));
        CHECK(bound::max_spearman_exact(n) == (a > b ? a : b));
        // both splits tie and land exactly on 7/8 for every odd n
        CHECK(bound::max_spearman_exact(n) == Rational(7, 8));
        CHECK(a == b);
    }
}

TEST_CASE("analyze is consistent") {
    const auto a = bound::analyze(10, 3);
    CHECK(a.n == 10);
    CHECK(a.k == 3);
    CHECK(a.sum_d_sq == bound::sum_d_sq_closed(10, 3));
    CHECK(a.rho == doctest::Approx(1.0 - 6.0 * a.sum_d_sq / (10.0 * 99.0)).epsilon(1e-15));
    CHECK(a.rho <= bound::max_spearman(10));
}

TEST_CASE("binary predictor examples") {
    CHECK(bound::binary_predictor_spearman(std::vector<double>{1, 1, 0, 0}, std::vector<double>{4, 3, 2, 1}) ==
          doctest::Approx(0.9).epsilon(1e-15));
    CHECK(bound::binary_predictor_spearman(std::vector<double>{1, 0}, std::vector<double>{2.0, 1.0}) == 1.0);
}

TEST_CASE("binary predictor rejects invalid input") {
    CHECK_THROWS_AS(bound::binary_predictor_spearman(std::vector<double>{1, 1, 1}, std::vector<double>{3, 2, 1}),
                    DegenerateInput);
    CHECK_THROWS_AS(bound::binary_predictor_spearman(std::vector<double>{0, 1, 2}, std::vector<double>{3, 2, 1}),
                    InvalidInput);
    CHECK_THROWS_AS(bound::binary_predictor_spearman(std::vector<double>{0, 1, 1}, std::vector<double>{3, 3, 1}),
                    InvalidInput);
    CHECK_THROWS_AS(bound::binary_predictor_spearman(std::vector<double>{0, 1}, std::vector<double>{3, 2, 1}),
                    InvalidInput);
}

TEST_CASE("binary predictors never exceed the ceiling at n = 20") {
    Rng rng(21);
    const double ceiling = bound::max_spearman(20);
    for (int trial = 0; trial < 10'000; ++trial) {
        std::vector<double> gold(20);
        std::vector<double> pred(20);
        for (double& g : gold) g = rng.normal();
        std::size_t ones = 0;
        do {
            ones = 0;
            for (double& p : pred) {
                p = static_cast<double>(rng.below(2));
                ones += p > 0.5 ? 1 : 0;
            }
        } while (ones == 0 || ones == pred.size());
        CHECK(bound::binary_predictor_spearman(pred, gold) <= ceiling + 1e-12);
    }
}

TEST_CASE("sweep rows and csv") {
    const std::vector<std::int64_t> ns{2, 4};
    const auto rows = bound::bound_sweep(ns);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].n == 2);
    CHECK(rows[0].k_star == 1);
    CHECK(rows[0].min_sum_d_sq == 0.0);
    CHECK(rows[0].max_rho == 1.0);
    CHECK(rows[1].k_star == 2);
    CHECK(rows[1].min_sum_d_sq == 1.0);

    std::ostringstream csv;
    bound::write_sweep_csv(csv, rows);
    CHECK(csv.str() == "n,k_star,min_sum_d_sq,max_rho\n2,1,0,1\n4,2,1,0.9\n");

    const std::vector<std::int64_t> big{1'000'000};
    CHECK(std::abs(bound::bound_sweep(big).front().max_rho - 0.875) < 1e-6);
}

}
