#pragma once

// Toy sentence encoder: a two-layer perceptron
//
//   embedding = W2 tanh(W1 x + b1) + b2
//
// mapping D input features to a d-dimensional embedding through H tanh
// units. Parameters live in one flat vector so the optimizer, checkpoints and
// finite-difference checks can treat them uniformly. Layout:
//
//   [ W1 (H x D, column-major) | b1 (H) | W2 (d x H, column-major) | b2 (d) ]

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pcc {

struct EncoderShape {
    Eigen::Index input_dim = 32;
    Eigen::Index hidden_dim = 64;
    Eigen::Index embed_dim = 32;

    Eigen::Index parameter_count() const {
        return hidden_dim * input_dim + hidden_dim + embed_dim * hidden_dim + embed_dim;
    }

    bool operator==(const EncoderShape&) const = default;
};

/// An input item: stands in for a sentence.
struct ItemFeatures {
    std::string id;
    std::vector<double> features;
};

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Encoder weights plus Adam moment buffers.
struct EncoderParams {
    EncoderShape shape;
    std::uint64_t seed = 0;
    std::uint64_t step = 0;
    Eigen::VectorXd theta;
    Eigen::VectorXd adam_m;
    Eigen::VectorXd adam_v;

    Eigen::Map<const Eigen::MatrixXd> w1() const;
    Eigen::Map<const Eigen::VectorXd> b1() const;
    Eigen::Map<const Eigen::MatrixXd> w2() const;
    Eigen::Map<const Eigen::VectorXd> b2() const;

    Eigen::Map<Eigen::MatrixXd> w1();
    Eigen::Map<Eigen::VectorXd> b1();
    Eigen::Map<Eigen::MatrixXd> w2();
    Eigen::Map<Eigen::VectorXd> b2();
};

/// Weights uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)) from `seed`, biases
/// and moments zero, step 0. Throws InvalidInput on non-positive dimensions.
EncoderParams init_encoder(const EncoderShape& shape, std::uint64_t seed);

/// Activations kept by encode() for the backward pass.
struct EncodeCache {
    Eigen::MatrixXd input;
    Eigen::MatrixXd hidden;
};

/// Encodes one item per row of `features` (N x D) into an N x d matrix.
/// Throws InvalidInput on a feature-dimension mismatch.
Eigen::MatrixXd encode(const EncoderParams& params, const Eigen::MatrixXd& features,
                       EncodeCache* cache = nullptr);
Eigen::MatrixXd encode(const EncoderParams& params, std::span<const ItemFeatures> items);

/// Gradient of a scalar loss with respect to theta, given dLoss/dEmbedding
/// for the rows encoded into `cache`.
Eigen::VectorXd encode_backward(const EncoderParams& params, const EncodeCache& cache,
                                const Eigen::MatrixXd& grad_embeddings);

/// One Adam step in place. Increments `step`. Throws TrainingDiverged if the
/// gradient or the updated parameters are not finite, InvalidInput on a
/// shape mismatch or non-positive learning rate.
void apply_gradients(EncoderParams& params, const Eigen::VectorXd& grad, double learning_rate,
                     const AdamConfig& adam = {});

/// True when every weight and moment is finite.
bool all_finite(const EncoderParams& params);

} // namespace pcc
