#pragma once

// Full-graph gradient checks: features -> encoder -> cosine -> loss, analytic
// backprop against central differences over every encoder parameter.

#include "pcc/encoder.hpp"
#include "pcc/losses.hpp"
#include "pcc/rng.hpp"
#include "pcc/similarity.hpp"
#include "support/oracles.hpp"

namespace pcc::gradcheck {

inline constexpr double kStep = 1e-4;

// Components whose analytic and numeric values are both below this fraction
// of the largest gradient entry are compared on an absolute scale.
inline constexpr double kRelativeFloor = 1e-3;

inline Eigen::MatrixXd random_features(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

// Initialised parameters with every entry, biases included, moved off its init.
inline EncoderParams random_params(const EncoderShape& shape, Rng& rng) {
    EncoderParams p = init_encoder(shape, rng.next_u64());
    for (Eigen::Index i = 0; i < p.theta.size(); ++i) p.theta[i] += 0.3 * rng.normal();
    return p;
}

inline double compare(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
    const double scale = std::max(analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff());
    return oracle::max_relative_error(analytic, numeric, kRelativeFloor * scale);
}

// Returns the worst relative error over all parameters for one random trial.
inline double contrastive_trial(std::uint64_t seed, bool extended, const EncoderShape& shape = {}) {
    Rng rng(derive_seed(seed, 0xC0));
    const Eigen::Index n = 4;
    const Eigen::Index sides = extended ? 3 : 2;
    EncoderParams params = random_params(shape, rng);
    const Eigen::MatrixXd inputs = random_features(rng, sides * n, shape.input_dim);
    const double tau = rng.uniform(0.1, 1.0);

    const auto make_batch = [&](const Eigen::MatrixXd& e) {
        ContrastiveBatch b{e.topRows(n), e.middleRows(n, n), std::nullopt, tau};
        if (extended) b.hard_negatives = e.bottomRows(n);
        return b;
    };

    EncodeCache cache;
    const Eigen::MatrixXd emb = encode(params, inputs, &cache);
    ContrastiveGrad g;
    contrastive_loss_and_grad(make_batch(emb), extended, &g);
    Eigen::MatrixXd grad_emb(emb.rows(), emb.cols());
    grad_emb.topRows(n) = g.anchors;
    grad_emb.middleRows(n, n) = g.positives;
    if (extended) grad_emb.bottomRows(n) = *g.hard_negatives;
    const Eigen::VectorXd analytic = encode_backward(params, cache, grad_emb);

    const Eigen::VectorXd numeric = oracle::central_difference(
        [&](const Eigen::VectorXd& theta) {
            EncoderParams q = params;
            q.theta = theta;
            const auto b = make_batch(encode(q, inputs));
            return extended ? info_nce_extended(b) : info_nce(b);
        },
        params.theta, kStep);
    return compare(analytic, numeric);
}

inline double pearson_trial(std::uint64_t seed, const EncoderShape& shape = {}) {
    Rng rng(derive_seed(seed, 0xF0));
    const Eigen::Index n = 8;
    EncoderParams params = random_params(shape, rng);
    const Eigen::MatrixXd inputs = random_features(rng, 2 * n, shape.input_dim);
    std::vector<double> gold(static_cast<std::size_t>(n));
    for (double& y : gold) y = rng.uniform(0.0, 5.0);

    const auto make_batch = [&](const Eigen::MatrixXd& e) {
        const Eigen::VectorXd c = cosine_rows(e.topRows(n), e.bottomRows(n));
        return SimilarityBatch{std::vector<double>(c.data(), c.data() + c.size()), gold};
    };

    EncodeCache cache;
    const Eigen::MatrixXd emb = encode(params, inputs, &cache);
    const auto dcos = pearson_loss_grad(make_batch(emb), VarianceGuard::Strict);
    Eigen::MatrixXd grad_emb(emb.rows(), emb.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd a = emb.row(i).transpose();
        const Eigen::VectorXd b = emb.row(n + i).transpose();
        grad_emb.row(i) = cosine_grad_lhs(a, b, dcos[static_cast<std::size_t>(i)]).transpose();
        grad_emb.row(n + i) = cosine_grad_lhs(b, a, dcos[static_cast<std::size_t>(i)]).transpose();
    }
    const Eigen::VectorXd analytic = encode_backward(params, cache, grad_emb);

    const Eigen::VectorXd numeric = oracle::central_difference(
        [&](const Eigen::VectorXd& theta) {
            EncoderParams q = params;
            q.theta = theta;
            return pearson_loss(make_batch(encode(q, inputs)), VarianceGuard::Strict);
        },
        params.theta, kStep);
    return compare(analytic, numeric);
}

} // namespace pcc::gradcheck
