#include "pcc/losses.hpp"

#include "pcc/errors.hpp"
#include "pcc/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pcc {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void validate(const ContrastiveBatch& batch, bool extended) {
    const Index n = batch.anchors.rows();
    const Index d = batch.anchors.cols();
    if (n < 1 || d < 1) {
        throw InvalidInput("contrastive loss: empty batch");
    }
    if (batch.positives.rows() != n || batch.positives.cols() != d) {
        throw InvalidInput("contrastive loss: positives shape does not match anchors");
    }
    if (extended) {
        if (!batch.hard_negatives) {
            throw InvalidInput("info_nce_extended: batch has no hard negatives");
        }
        if (batch.hard_negatives->rows() != n || batch.hard_negatives->cols() != d) {
            throw InvalidInput("contrastive loss: hard negatives shape does not match anchors");
        }
    }
    if (!(batch.temperature > 0.0) || !std::isfinite(batch.temperature)) {
        throw InvalidInput("contrastive loss: temperature must be positive and finite");
    }
}

struct Normalized {
    MatrixXd unit;
    VectorXd norms;
};

Normalized normalize_rows(const MatrixXd& m) {
    Normalized out{MatrixXd(m.rows(), m.cols()), VectorXd(m.rows())};
    for (Index i = 0; i < m.rows(); ++i) {
        const double norm = m.row(i).norm();
        if (!(norm > kMinEmbeddingNorm)) {
            throw DegenerateInput("contrastive loss: zero-norm embedding at row " + std::to_string(i));
        }
        if (!std::isfinite(norm)) {
            throw InvalidInput("contrastive loss: non-finite embedding at row " + std::to_string(i));
        }
        out.norms(i) = norm;
        out.unit.row(i) = m.row(i) / norm;
    }
    return out;
}

// Gradient of sum_ij g_ij cos(l_i, r_j) with respect to the rows of l and r,
// given unit rows, norms and the unclamped cosine matrix.
void accumulate_cosine_grad(const MatrixXd& g, const MatrixXd& cos, const Normalized& lhs,
                            const Normalized& rhs, MatrixXd& grad_lhs, MatrixXd& grad_rhs) {
    const MatrixXd gc = g.cwiseProduct(cos);
    const VectorXd row_weight = gc.rowwise().sum();
    const VectorXd col_weight = gc.colwise().sum().transpose();

    MatrixXd dl = g * rhs.unit;
    dl -= row_weight.asDiagonal() * lhs.unit;
    grad_lhs += lhs.norms.cwiseInverse().asDiagonal() * dl;

    MatrixXd dr = g.transpose() * lhs.unit;
    dr -= col_weight.asDiagonal() * rhs.unit;
    grad_rhs += rhs.norms.cwiseInverse().asDiagonal() * dr;
}

struct PearsonParts {
    VectorXd dx;
    VectorXd dy;
    double sigma_x = 0.0;
    double sigma_y = 0.0;
    double denom_x = 0.0;
    double cov = 0.0;
    bool guarded = false;
};

PearsonParts pearson_parts(const SimilarityBatch& batch, VarianceGuard guard) {
    const std::size_t n = batch.cosines.size();
    if (n != batch.gold_scores.size()) {
        throw InvalidInput("pearson_loss: cosines and gold scores differ in length");
    }
    if (n < 2) {
        throw InvalidInput("pearson_loss: need at least two pairs");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double x = batch.cosines[i];
        if (!std::isfinite(x) || x < -1.0 - 1e-9 || x > 1.0 + 1e-9) {
            throw InvalidInput("pearson_loss: cosine out of range at index " + std::to_string(i));
        }
        if (!std::isfinite(batch.gold_scores[i])) {
            throw InvalidInput("pearson_loss: non-finite gold score at index " + std::to_string(i));
        }
    }

    const auto count = static_cast<Index>(n);
    const Eigen::Map<const VectorXd> x(batch.cosines.data(), count);
    const Eigen::Map<const VectorXd> y(batch.gold_scores.data(), count);
    const double inv_n = 1.0 / static_cast<double>(n);

    PearsonParts p;
    p.dx = x.array() - x.mean();
    p.dy = y.array() - y.mean();
    p.sigma_x = std::sqrt(p.dx.squaredNorm() * inv_n);
    p.sigma_y = std::sqrt(p.dy.squaredNorm() * inv_n);
    p.cov = p.dx.dot(p.dy) * inv_n;

    if (!(p.sigma_y > kVarianceEpsilon)) {
        throw DegenerateInput("pearson_loss: gold scores have (near) zero variance");
    }
    p.denom_x = p.sigma_x;
    if (!(p.sigma_x > kVarianceEpsilon)) {
        if (guard == VarianceGuard::Strict) {
            throw DegenerateInput("pearson_loss: predicted cosines have (near) zero variance");
        }
        p.denom_x = kVarianceEpsilon;
        p.guarded = true;
    }
    return p;
}

} // namespace

double contrastive_loss_and_grad(const ContrastiveBatch& batch, bool extended, ContrastiveGrad* grad) {
    validate(batch, extended);

    const Index n = batch.anchors.rows();
    const double inv_t = 1.0 / batch.temperature;

    const Normalized a = normalize_rows(batch.anchors);
    const Normalized p = normalize_rows(batch.positives);
    const MatrixXd cos_p = a.unit * p.unit.transpose();

    MatrixXd logits(n, extended ? 2 * n : n);
    logits.leftCols(n) = cos_p.cwiseMax(-1.0).cwiseMin(1.0) * inv_t;

    Normalized neg;
    MatrixXd cos_n;
    if (extended) {
        neg = normalize_rows(*batch.hard_negatives);
        cos_n = a.unit * neg.unit.transpose();
        logits.rightCols(n) = cos_n.cwiseMax(-1.0).cwiseMin(1.0) * inv_t;
    }

    // Row-wise log-softmax with max subtraction.
    MatrixXd probs(logits.rows(), logits.cols());
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double m = logits.row(i).maxCoeff();
        double sum = 0.0;
        for (Index j = 0; j < logits.cols(); ++j) {
            const double e = std::exp(logits(i, j) - m);
            probs(i, j) = e;
            sum += e;
        }
        const double lse = m + std::log(sum);
        total += lse - logits(i, i);
        probs.row(i) /= sum;
    }
    const double loss = total / static_cast<double>(n);

    if (grad != nullptr) {
        const double scale = inv_t / static_cast<double>(n);
        MatrixXd g_pos = probs.leftCols(n);
        g_pos.diagonal().array() -= 1.0;
        g_pos *= scale;

        grad->anchors = MatrixXd::Zero(n, batch.anchors.cols());
        grad->positives = MatrixXd::Zero(n, batch.positives.cols());
        accumulate_cosine_grad(g_pos, cos_p, a, p, grad->anchors, grad->positives);

        if (extended) {
            const MatrixXd g_neg = probs.rightCols(n) * scale;
            grad->hard_negatives = MatrixXd::Zero(n, batch.hard_negatives->cols());
            accumulate_cosine_grad(g_neg, cos_n, a, neg, grad->anchors, *grad->hard_negatives);
        } else {
            grad->hard_negatives.reset();
        }
    }
    return loss;
}

double info_nce(const ContrastiveBatch& batch) { return contrastive_loss_and_grad(batch, false, nullptr); }

double info_nce_extended(const ContrastiveBatch& batch) {
    return contrastive_loss_and_grad(batch, true, nullptr);
}

ContrastiveGrad contrastive_grad(const ContrastiveBatch& batch, bool extended) {
    ContrastiveGrad g;
    contrastive_loss_and_grad(batch, extended, &g);
    return g;
}

double pearson_loss_and_grad(const SimilarityBatch& batch, VarianceGuard guard, std::vector<double>* grad) {
    const PearsonParts p = pearson_parts(batch, guard);
    const double r = p.cov / (p.denom_x * p.sigma_y);

    if (grad != nullptr) {
        const double inv_n = 1.0 / static_cast<double>(batch.cosines.size());
        VectorXd dr = p.dy / (p.denom_x * p.sigma_y);
        if (!p.guarded) {
            dr -= (r / (p.sigma_x * p.sigma_x)) * p.dx;
        }
        dr *= -inv_n;
        grad->assign(dr.data(), dr.data() + dr.size());
    }
    return 1.0 - r;
}

double pearson_loss(const SimilarityBatch& batch, VarianceGuard guard) {
    return pearson_loss_and_grad(batch, guard, nullptr);
}

std::vector<double> pearson_loss_grad(const SimilarityBatch& batch, VarianceGuard guard) {
    std::vector<double> g;
    pearson_loss_and_grad(batch, guard, &g);
    return g;
}

} // namespace pcc
