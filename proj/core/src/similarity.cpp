#include "pcc/similarity.hpp"

#include "pcc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pcc {

namespace {

double checked_norm(const Eigen::Ref<const Eigen::VectorXd>& v) {
    const double n = v.norm();
    if (!(n > kMinEmbeddingNorm)) {
        throw DegenerateInput("cosine: embedding norm below 1e-12");
    }
    return n;
}

} // namespace

double cosine(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    if (a.size() != b.size()) {
        throw InvalidInput("cosine: dimension mismatch");
    }
    const double na = checked_norm(a);
    const double nb = checked_norm(b);
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

double cosine(std::span<const double> a, std::span<const double> b) {
    const Eigen::Map<const Eigen::VectorXd> va(a.data(), static_cast<Eigen::Index>(a.size()));
    const Eigen::Map<const Eigen::VectorXd> vb(b.data(), static_cast<Eigen::Index>(b.size()));
    return cosine(va, vb);
}

Eigen::VectorXd cosine_rows(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw InvalidInput("cosine_rows: shape mismatch");
    }
    Eigen::VectorXd out(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        out(i) = cosine(a.row(i).transpose(), b.row(i).transpose());
    }
    return out;
}

Eigen::VectorXd cosine_grad_lhs(const Eigen::Ref<const Eigen::VectorXd>& a,
                                const Eigen::Ref<const Eigen::VectorXd>& b, double upstream) {
    const double na = checked_norm(a);
    const double nb = checked_norm(b);
    const double c = a.dot(b) / (na * nb);
    return upstream * (b / (na * nb) - (c / (na * na)) * a);
}

} // namespace pcc
