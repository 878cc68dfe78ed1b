#ifndef MASHSPUD_BASELINES_HPP
#define MASHSPUD_BASELINES_HPP

#include "alignment.hpp"
#include "graph.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <stdexcept>
#include <vector>

/**
 * @file baselines.hpp
 *
 * @brief Simplified JLMA (joint Laplacian eigenmaps) and MAPA (per-domain eigenmaps
 * plus Procrustes) for comparison runs.
 */

namespace mashspud {

struct BaselineConfig {
    int dim = 2;
    KernelParams kparams;
};

/// Eigenvalues below this count as zero when skipping the trivial Laplacian modes.
inline constexpr double kLaplacianZeroTol = 1e-9;

/**
 * @brief Symmetric normalized Laplacian I - D^-1/2 W D^-1/2.
 */
inline Matrix normalized_laplacian(const Matrix& w) {
    const Vector deg = w.rowwise().sum();
    if ((deg.array() <= 0).any()) {
        throw std::invalid_argument("normalized_laplacian: isolated vertex");
    }
    const Vector inv_sqrt = deg.cwiseSqrt().cwiseInverse();
    Matrix l = -(inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal());
    l.diagonal().array() += 1.0;
    return 0.5 * (l + l.transpose());
}

struct SpectralEmbedding {
    /// D^-1/2 v for the selected eigenvectors v; columns are D-orthonormal.
    Matrix coords;
    Vector eigenvalues;
    /// Number of eigenvalues treated as zero (connected components).
    int zero_modes = 0;
};

/**
 * @brief Laplacian eigenmaps: the `dim` eigenvectors after the zero eigenvalues.
 */
inline SpectralEmbedding laplacian_eigenmaps(const Matrix& w, int dim) {
    const Matrix l = normalized_laplacian(w);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(l);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("laplacian_eigenmaps: eigensolver failed");
    }
    const Vector& vals = eig.eigenvalues();
    int zeros = 0;
    while (zeros < vals.size() && vals(zeros) < kLaplacianZeroTol) {
        ++zeros;
    }
    if (zeros + dim > vals.size()) {
        throw std::runtime_error("laplacian_eigenmaps: fewer nonzero eigenvalues than requested dimensions");
    }
    const Vector inv_sqrt = w.rowwise().sum().cwiseSqrt().cwiseInverse();
    SpectralEmbedding out;
    out.zero_modes = zeros;
    out.eigenvalues = vals.segment(zeros, dim);
    Matrix vecs = eig.eigenvectors().middleCols(zeros, dim);
    detail::fix_signs(vecs);
    out.coords = inv_sqrt.asDiagonal() * vecs;
    return out;
}

/**
 * @brief JLMA: Laplacian eigenmaps on the joint similarity with anchor links only.
 */
inline AlignmentResult jlma_align(const DomainPair& pair, const BaselineConfig& cfg) {
    validate(pair);
    if (pair.anchors.empty()) {
        throw std::invalid_argument("jlma_align: no anchors");
    }
    const auto wx = build_domain_similarity(pair.x, cfg.kparams);
    const auto wy = build_domain_similarity(pair.y, cfg.kparams);
    const auto joint = build_joint_similarity(pair.anchors, wx, wy, 1.0, 0.0);
    const auto spec = laplacian_eigenmaps(joint.w, cfg.dim);
    AlignmentResult out;
    out.method = "jlma";
    out.n_x = pair.n_x();
    out.n_y = pair.n_y();
    out.embedding.coords = spec.coords;
    out.embedding.eigenvalues = spec.eigenvalues;
    return out;
}

/**
 * @brief Similarity transform y -> scale * (y - mean_y) * rotation + mean_x.
 */
struct Procrustes {
    Matrix rotation;
    double scale = 1.0;
    Vector mean_x;
    Vector mean_y;
    /// Set when the anchor cross-covariance is rank deficient.
    bool degenerate = false;

    Matrix apply(const Matrix& y) const {
        return ((scale * ((y.rowwise() - mean_y.transpose()) * rotation)).rowwise() + mean_x.transpose()).eval();
    }
};

/**
 * @brief Orthogonal Procrustes with scaling and translation mapping rows of `src` onto `dst`.
 */
inline Procrustes fit_procrustes(const Matrix& dst, const Matrix& src) {
    if (dst.rows() != src.rows() || dst.cols() != src.cols() || dst.rows() < 1) {
        throw std::invalid_argument("fit_procrustes: shape mismatch");
    }
    Procrustes out;
    out.mean_x = dst.colwise().mean().transpose();
    out.mean_y = src.colwise().mean().transpose();
    const Matrix xc = dst.rowwise() - out.mean_x.transpose();
    const Matrix yc = src.rowwise() - out.mean_y.transpose();
    const Matrix m = yc.transpose() * xc;
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.rotation = svd.matrixU() * svd.matrixV().transpose();
    const double denom = yc.squaredNorm();
    out.scale = denom > 0 ? svd.singularValues().sum() / denom : 1.0;
    const Vector& sv = svd.singularValues();
    out.degenerate = sv.size() == 0 || sv(sv.size() - 1) <= 1e-12 * std::max(sv(0), 1e-300);
    return out;
}

/**
 * @brief MAPA: embed each domain separately, then Procrustes-align Y onto X via anchors.
 */
inline AlignmentResult mapa_align(const DomainPair& pair, const BaselineConfig& cfg, Procrustes* transform = nullptr) {
    validate(pair);
    if (static_cast<int>(pair.anchors.size()) < cfg.dim + 1) {
        throw std::invalid_argument("mapa_align: need at least dim + 1 anchors");
    }
    const auto ex = laplacian_eigenmaps(build_domain_similarity(pair.x, cfg.kparams).weights, cfg.dim).coords;
    const auto ey = laplacian_eigenmaps(build_domain_similarity(pair.y, cfg.kparams).weights, cfg.dim).coords;
    Matrix ax(static_cast<Eigen::Index>(pair.anchors.size()), cfg.dim);
    Matrix ay(static_cast<Eigen::Index>(pair.anchors.size()), cfg.dim);
    for (std::size_t a = 0; a < pair.anchors.size(); ++a) {
        ax.row(static_cast<Eigen::Index>(a)) = ex.row(pair.anchors[a].x);
        ay.row(static_cast<Eigen::Index>(a)) = ey.row(pair.anchors[a].y);
    }
    const Procrustes fit = fit_procrustes(ax, ay);
    if (transform) {
        *transform = fit;
    }
    AlignmentResult out;
    out.method = "mapa";
    out.n_x = pair.n_x();
    out.n_y = pair.n_y();
    out.embedding.coords.resize(pair.size(), cfg.dim);
    out.embedding.coords.topRows(pair.n_x()) = ex;
    out.embedding.coords.bottomRows(pair.n_y()) = fit.apply(ey);
    return out;
}

} // namespace mashspud

#endif
