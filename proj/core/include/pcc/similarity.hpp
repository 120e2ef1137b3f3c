#pragma once

#include <Eigen/Core>

#include <span>

namespace pcc {

/// Norms at or below this are rejected by cosine().
inline constexpr double kMinEmbeddingNorm = 1e-12;

/// Cosine similarity clamped to [-1, 1]. Throws DegenerateInput if either
/// vector has norm <= kMinEmbeddingNorm and InvalidInput on size mismatch.
double cosine(std::span<const double> a, std::span<const double> b);
double cosine(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

/// Row-wise cosine between two equally shaped embedding matrices.
Eigen::VectorXd cosine_rows(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Gradient of cos(a, b) with respect to a, scaled by `upstream`:
/// upstream * (b / (|a||b|) - cos * a / |a|^2). Uses the unclamped cosine.
Eigen::VectorXd cosine_grad_lhs(const Eigen::Ref<const Eigen::VectorXd>& a,
                                const Eigen::Ref<const Eigen::VectorXd>& b, double upstream);

} // namespace pcc
