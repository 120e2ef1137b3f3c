#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace pcc {

/// Anchors, positives and optional hard negatives, one embedding per row.
/// Row i of `positives` (and `hard_negatives`) pairs with row i of `anchors`.
struct ContrastiveBatch {
    Eigen::MatrixXd anchors;
    Eigen::MatrixXd positives;
    std::optional<Eigen::MatrixXd> hard_negatives;
    double temperature = 0.0;
};

/// Predicted cosines X and gold similarity scores Y of a batch of pairs.
struct SimilarityBatch {
    std::vector<double> cosines;
    std::vector<double> gold_scores;
};

/// Gradients with respect to every embedding row of a ContrastiveBatch.
struct ContrastiveGrad {
    Eigen::MatrixXd anchors;
    Eigen::MatrixXd positives;
    std::optional<Eigen::MatrixXd> hard_negatives;
};

/// How pearson_loss treats a near-constant cosine vector.
enum class VarianceGuard {
    /// Throw DegenerateInput when sigma_X <= kVarianceEpsilon.
    Strict,
    /// Use max(sigma_X, kVarianceEpsilon) in the denominator.
    Training,
};

inline constexpr double kVarianceEpsilon = 1e-8;

/// Mean over i of -log(exp(c_ii / t) / sum_j exp(c_ij / t)), c_ij = cos(a_i, p_j).
/// Hard negatives, if present, are ignored.
double info_nce(const ContrastiveBatch& batch);

/// As info_nce, with exp(cos(a_i, n_j) / t) for every j added to each
/// denominator. Throws InvalidInput when the batch has no hard negatives.
double info_nce_extended(const ContrastiveBatch& batch);

/// Gradient of info_nce (plain) or info_nce_extended (extended) with respect
/// to all embeddings.
ContrastiveGrad contrastive_grad(const ContrastiveBatch& batch, bool extended);

/// Loss and gradient in one pass. `grad` may be null.
double contrastive_loss_and_grad(const ContrastiveBatch& batch, bool extended, ContrastiveGrad* grad);

/// 1 - pearson(X, Y), population moments. Range [0, 2].
double pearson_loss(const SimilarityBatch& batch, VarianceGuard guard = VarianceGuard::Strict);

/// d(pearson_loss)/dX. Sums to zero.
std::vector<double> pearson_loss_grad(const SimilarityBatch& batch, VarianceGuard guard = VarianceGuard::Strict);

double pearson_loss_and_grad(const SimilarityBatch& batch, VarianceGuard guard, std::vector<double>* grad);

} // namespace pcc
