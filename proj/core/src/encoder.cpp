#include "pcc/encoder.hpp"

#include "pcc/errors.hpp"
#include "pcc/rng.hpp"

#include <cmath>
#include <string>

namespace pcc {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Offsets {
    Index w1 = 0;
    Index b1 = 0;
    Index w2 = 0;
    Index b2 = 0;
};

Offsets offsets(const EncoderShape& s) {
    Offsets o;
    o.b1 = o.w1 + s.hidden_dim * s.input_dim;
    o.w2 = o.b1 + s.hidden_dim;
    o.b2 = o.w2 + s.embed_dim * s.hidden_dim;
    return o;
}

void require_layout(const EncoderParams& p) {
    const Index count = p.shape.parameter_count();
    if (p.theta.size() != count || p.adam_m.size() != count || p.adam_v.size() != count) {
        throw InvalidInput("encoder: parameter buffers do not match shape");
    }
}

} // namespace

Eigen::Map<const MatrixXd> EncoderParams::w1() const {
    return {theta.data() + offsets(shape).w1, shape.hidden_dim, shape.input_dim};
}
Eigen::Map<const VectorXd> EncoderParams::b1() const {
    return {theta.data() + offsets(shape).b1, shape.hidden_dim};
}
Eigen::Map<const MatrixXd> EncoderParams::w2() const {
    return {theta.data() + offsets(shape).w2, shape.embed_dim, shape.hidden_dim};
}
Eigen::Map<const VectorXd> EncoderParams::b2() const {
    return {theta.data() + offsets(shape).b2, shape.embed_dim};
}
Eigen::Map<MatrixXd> EncoderParams::w1() { return {theta.data() + offsets(shape).w1, shape.hidden_dim, shape.input_dim}; }
Eigen::Map<VectorXd> EncoderParams::b1() { return {theta.data() + offsets(shape).b1, shape.hidden_dim}; }
Eigen::Map<MatrixXd> EncoderParams::w2() { return {theta.data() + offsets(shape).w2, shape.embed_dim, shape.hidden_dim}; }
Eigen::Map<VectorXd> EncoderParams::b2() { return {theta.data() + offsets(shape).b2, shape.embed_dim}; }

EncoderParams init_encoder(const EncoderShape& shape, std::uint64_t seed) {
    if (shape.input_dim < 1 || shape.hidden_dim < 1 || shape.embed_dim < 1) {
        throw InvalidInput("init_encoder: dimensions must be positive");
    }
    EncoderParams p;
    p.shape = shape;
    p.seed = seed;
    p.step = 0;
    const Index count = shape.parameter_count();
    p.theta = VectorXd::Zero(count);
    p.adam_m = VectorXd::Zero(count);
    p.adam_v = VectorXd::Zero(count);

    Rng rng(seed);
    const double lim1 = 1.0 / std::sqrt(static_cast<double>(shape.input_dim));
    auto w1 = p.w1();
    for (Index j = 0; j < w1.cols(); ++j) {
        for (Index i = 0; i < w1.rows(); ++i) {
            w1(i, j) = rng.uniform(-lim1, lim1);
        }
    }
    const double lim2 = 1.0 / std::sqrt(static_cast<double>(shape.hidden_dim));
    auto w2 = p.w2();
    for (Index j = 0; j < w2.cols(); ++j) {
        for (Index i = 0; i < w2.rows(); ++i) {
            w2(i, j) = rng.uniform(-lim2, lim2);
        }
    }
    return p;
}

MatrixXd encode(const EncoderParams& params, const MatrixXd& features, EncodeCache* cache) {
    require_layout(params);
    if (features.cols() != params.shape.input_dim) {
        throw InvalidInput("encode: feature dimension " + std::to_string(features.cols()) +
                           " does not match encoder input " + std::to_string(params.shape.input_dim));
    }
    MatrixXd hidden = features * params.w1().transpose();
    hidden.rowwise() += params.b1().transpose();
    hidden = hidden.array().tanh().matrix();

    MatrixXd out = hidden * params.w2().transpose();
    out.rowwise() += params.b2().transpose();

    if (cache != nullptr) {
        cache->input = features;
        cache->hidden = std::move(hidden);
    }
    return out;
}

MatrixXd encode(const EncoderParams& params, std::span<const ItemFeatures> items) {
    MatrixXd features(static_cast<Index>(items.size()), params.shape.input_dim);
    for (std::size_t r = 0; r < items.size(); ++r) {
        if (static_cast<Index>(items[r].features.size()) != params.shape.input_dim) {
            throw InvalidInput("encode: item '" + items[r].id + "' has " +
                               std::to_string(items[r].features.size()) + " features, expected " +
                               std::to_string(params.shape.input_dim));
        }
        for (Index c = 0; c < params.shape.input_dim; ++c) {
            features(static_cast<Index>(r), c) = items[r].features[static_cast<std::size_t>(c)];
        }
    }
    return encode(params, features);
}

VectorXd encode_backward(const EncoderParams& params, const EncodeCache& cache, const MatrixXd& grad_embeddings) {
    require_layout(params);
    if (grad_embeddings.rows() != cache.hidden.rows() || grad_embeddings.cols() != params.shape.embed_dim) {
        throw InvalidInput("encode_backward: gradient shape does not match cached batch");
    }
    const Offsets o = offsets(params.shape);
    const EncoderShape& s = params.shape;
    VectorXd grad = VectorXd::Zero(s.parameter_count());

    Eigen::Map<MatrixXd>(grad.data() + o.w2, s.embed_dim, s.hidden_dim) = grad_embeddings.transpose() * cache.hidden;
    Eigen::Map<VectorXd>(grad.data() + o.b2, s.embed_dim) = grad_embeddings.colwise().sum().transpose();

    const MatrixXd grad_hidden = grad_embeddings * params.w2();
    const MatrixXd grad_pre = grad_hidden.array() * (1.0 - cache.hidden.array().square());

    Eigen::Map<MatrixXd>(grad.data() + o.w1, s.hidden_dim, s.input_dim) = grad_pre.transpose() * cache.input;
    Eigen::Map<VectorXd>(grad.data() + o.b1, s.hidden_dim) = grad_pre.colwise().sum().transpose();
    return grad;
}

void apply_gradients(EncoderParams& params, const VectorXd& grad, double learning_rate, const AdamConfig& adam) {
    require_layout(params);
    if (grad.size() != params.theta.size()) {
        throw InvalidInput("apply_gradients: gradient has " + std::to_string(grad.size()) +
                           " entries, expected " + std::to_string(params.theta.size()));
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw InvalidInput("apply_gradients: learning rate must be positive and finite");
    }
    if (!grad.allFinite()) {
        throw TrainingDiverged("apply_gradients: non-finite gradient at step " + std::to_string(params.step));
    }

    params.step += 1;
    const double t = static_cast<double>(params.step);
    const double bias1 = 1.0 - std::pow(adam.beta1, t);
    const double bias2 = 1.0 - std::pow(adam.beta2, t);

    params.adam_m = adam.beta1 * params.adam_m + (1.0 - adam.beta1) * grad;
    params.adam_v = adam.beta2 * params.adam_v + (1.0 - adam.beta2) * grad.cwiseProduct(grad);
    const VectorXd m_hat = params.adam_m / bias1;
    const VectorXd v_hat = params.adam_v / bias2;
    params.theta.array() -= learning_rate * m_hat.array() / (v_hat.array().sqrt() + adam.epsilon);

    if (!all_finite(params)) {
        throw TrainingDiverged("apply_gradients: parameters became non-finite at step " + std::to_string(params.step));
    }
}

bool all_finite(const EncoderParams& params) {
    return params.theta.allFinite() && params.adam_m.allFinite() && params.adam_v.allFinite();
}

} // namespace pcc
