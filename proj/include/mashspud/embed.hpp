#ifndef MASHSPUD_EMBED_HPP
#define MASHSPUD_EMBED_HPP

#include "data.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file embed.hpp
 *
 * @brief Information distances between probability rows and classical MDS.
 */

namespace mashspud {

/// Smoothing added before logarithms in the KL and potential distances.
inline constexpr double kLogSmoothing = 1e-7;

enum class InfoDistance { potential, hellinger, kl };

inline std::string to_string(InfoDistance d) {
    switch (d) {
    case InfoDistance::potential:
        return "potential";
    case InfoDistance::hellinger:
        return "hellinger";
    case InfoDistance::kl:
        return "kl";
    }
    return "?";
}

inline InfoDistance info_distance_from_string(const std::string& s) {
    if (s == "potential") {
        return InfoDistance::potential;
    }
    if (s == "hellinger") {
        return InfoDistance::hellinger;
    }
    if (s == "kl") {
        return InfoDistance::kl;
    }
    throw std::invalid_argument("unknown information distance '" + s + "'");
}

namespace detail {

inline void check_probability(const Vector& p, const char* who) {
    if ((p.array() < 0).any() || std::abs(p.sum() - 1.0) > 1e-6) {
        throw std::invalid_argument(std::string(who) + ": input is not a probability vector");
    }
}

inline void check_pair(const Vector& p, const Vector& q, const char* who) {
    if (p.size() != q.size()) {
        throw std::invalid_argument(std::string(who) + ": length mismatch");
    }
    check_probability(p, who);
    check_probability(q, who);
}

} // namespace detail

/// (1/sqrt 2) * || sqrt(p) - sqrt(q) ||, bounded by 1.
inline double hellinger(const Vector& p, const Vector& q) {
    detail::check_pair(p, q, "hellinger");
    return (p.array().sqrt() - q.array().sqrt()).matrix().norm() / std::sqrt(2.0);
}

/// KL(p||q) + KL(q||p) after adding kLogSmoothing to every entry.
inline double kl_divergence_distance(const Vector& p, const Vector& q) {
    detail::check_pair(p, q, "kl_divergence_distance");
    const auto lp = (p.array() + kLogSmoothing).log();
    const auto lq = (q.array() + kLogSmoothing).log();
    return ((p.array() - q.array()) * (lp - lq)).sum();
}

/// || log(p + eps) - log(q + eps) ||.
inline double potential_distance(const Vector& p, const Vector& q) {
    detail::check_pair(p, q, "potential_distance");
    return ((p.array() + kLogSmoothing).log() - (q.array() + kLogSmoothing).log()).matrix().norm();
}

/**
 * @brief All-pairs information distance between the rows of a row-stochastic matrix.
 *
 * Evaluated pairwise (no Gram-matrix shortcut) so that identical rows give exactly 0.
 */
inline Matrix row_distances(const Matrix& probs, InfoDistance kind) {
    const Eigen::Index n = probs.rows();
    // Columns of `feat` are the transformed rows.
    Matrix feat;
    switch (kind) {
    case InfoDistance::potential:
    case InfoDistance::kl:
        feat = (probs.array() + kLogSmoothing).log().matrix().transpose();
        break;
    case InfoDistance::hellinger:
        feat = probs.array().max(0.0).sqrt().matrix().transpose();
        break;
    }
    const Matrix pt = probs.transpose();
    Matrix d = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index m = n - i - 1;
        if (m == 0) {
            continue;
        }
        Eigen::RowVectorXd vals;
        if (kind == InfoDistance::kl) {
            vals = ((pt.rightCols(m).colwise() - pt.col(i)).array() * (feat.rightCols(m).colwise() - feat.col(i)).array())
                       .colwise()
                       .sum();
        } else {
            vals = (feat.rightCols(m).colwise() - feat.col(i)).colwise().norm();
            if (kind == InfoDistance::hellinger) {
                vals /= std::sqrt(2.0);
            }
        }
        d.row(i).tail(m) = vals;
        d.col(i).tail(m) = vals.transpose();
    }
    return d;
}

/**
 * @brief Coordinates from classical MDS plus bookkeeping.
 */
struct Embedding {
    /// n x d, column means zero.
    Matrix coords;
    /// Gram eigenvalues backing each column, non-increasing.
    Vector eigenvalues;
    /// Set when fewer positive eigenvalues existed than the requested dimension.
    bool truncated = false;
};

namespace detail {

/// Flips each column so its largest-magnitude entry is positive (first one on ties).
inline void fix_signs(Matrix& vecs) {
    for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
        Eigen::Index best = 0;
        for (Eigen::Index r = 1; r < vecs.rows(); ++r) {
            if (std::abs(vecs(r, c)) > std::abs(vecs(best, c))) {
                best = r;
            }
        }
        if (vecs(best, c) < 0) {
            vecs.col(c) *= -1.0;
        }
    }
}

} // namespace detail

/**
 * @brief Torgerson MDS: B = -1/2 J D^2 J, top eigenpairs scaled by sqrt(eigenvalue).
 *
 * Non-positive eigenvalues are dropped; if that leaves fewer than `dim` columns the
 * embedding is narrower and `truncated` is set.
 */
inline Embedding classical_mds(const Matrix& dist, int dim) {
    const Eigen::Index n = dist.rows();
    if (dist.cols() != n) {
        throw std::invalid_argument("classical_mds: distance matrix must be square");
    }
    if (dim < 1) {
        throw std::invalid_argument("classical_mds: dim must be positive");
    }
    if (!dist.allFinite()) {
        throw std::invalid_argument("classical_mds: non-finite distances");
    }
    const Matrix sq = dist.array().square().matrix();
    const Vector row_mean = sq.rowwise().mean();
    const Vector col_mean = sq.colwise().mean().transpose();
    const double grand = sq.mean();
    Matrix b = -0.5 * ((sq.colwise() - row_mean).rowwise() - col_mean.transpose()).array() - 0.5 * grand;
    b = 0.5 * (b + b.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Matrix> eig(b);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("classical_mds: eigendecomposition failed");
    }
    const Vector& vals = eig.eigenvalues();
    const double scale = std::max(vals.cwiseAbs().maxCoeff(), 1.0);
    const double tol = 1e-10 * scale;

    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = n - 1; i >= 0 && static_cast<int>(keep.size()) < dim; --i) {
        if (vals(i) > tol) {
            keep.push_back(i);
        }
    }

    Embedding out;
    out.truncated = static_cast<int>(keep.size()) < dim;
    out.coords.resize(n, static_cast<Eigen::Index>(keep.size()));
    out.eigenvalues.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        out.coords.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(keep[c]);
        out.eigenvalues(static_cast<Eigen::Index>(c)) = vals(keep[c]);
    }
    detail::fix_signs(out.coords);
    for (Eigen::Index c = 0; c < out.coords.cols(); ++c) {
        out.coords.col(c) *= std::sqrt(out.eigenvalues(c));
    }
    return out;
}

} // namespace mashspud

#endif
