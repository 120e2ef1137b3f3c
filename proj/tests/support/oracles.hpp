#pragma once

// Reference implementations used only by tests. They share no code with the
// library and favour the most literal formulation over speed.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace pcc::oracle {

// rank = 1 + #(strictly smaller) + (#(equal) - 1) / 2
inline std::vector<double> ranks_by_counting(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t smaller = 0;
        std::size_t equal = 0;
        for (double w : v) {
            if (w < v[i]) ++smaller;
            if (w == v[i]) ++equal;
        }
        out[i] = 1.0 + static_cast<double>(smaller) + static_cast<double>(equal - 1) / 2.0;
    }
    return out;
}

// 1 - 6 sum d^2 / (n (n^2 - 1)), valid only without ties.
inline double spearman_sum_d_sq(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = ranks_by_counting(x);
    const auto ry = ranks_by_counting(y);
    long double d2 = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const long double d = static_cast<long double>(rx[i]) - ry[i];
        d2 += d * d;
    }
    const long double n = static_cast<long double>(x.size());
    return static_cast<double>(1.0L - 6.0L * d2 / (n * (n * n - 1.0L)));
}

inline double pearson_two_pass(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    long double mx = 0.0L;
    long double my = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<long double>(n);
    my /= static_cast<long double>(n);
    long double sxy = 0.0L;
    long double sxx = 0.0L;
    long double syy = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const long double dx = x[i] - mx;
        const long double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

inline double naive_cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Direct double sum, no max subtraction. Rows are samples.
inline double info_nce_naive(const Eigen::MatrixXd& anchors, const Eigen::MatrixXd& positives,
                             const std::optional<Eigen::MatrixXd>& negatives, double tau) {
    const Eigen::Index n = anchors.rows();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd a = anchors.row(i).transpose();
        const double num = std::exp(naive_cosine(a, positives.row(i).transpose()) / tau);
        double den = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            den += std::exp(naive_cosine(a, positives.row(j).transpose()) / tau);
            if (negatives) den += std::exp(naive_cosine(a, negatives->row(j).transpose()) / tau);
        }
        total += -std::log(num / den);
    }
    return total / static_cast<double>(n);
}

// Central difference of f at x along every coordinate.
inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          Eigen::VectorXd x, double h) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x);
        x[i] = keep - h;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

// Largest componentwise |a - f| / max(|a|, |f|, floor). The floor keeps
// components that are zero up to rounding from dominating the ratio.
inline double max_relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric, double floor) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
        const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
    return worst;
}

} // namespace pcc::oracle
