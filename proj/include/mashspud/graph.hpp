#ifndef MASHSPUD_GRAPH_HPP
#define MASHSPUD_GRAPH_HPP

#include "data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file graph.hpp
 *
 * @brief k-NN search, the alpha-decaying kernel, and the joint block similarity matrix.
 */

namespace mashspud {

enum class Metric { euclidean, manhattan };

/**
 * @brief Kernel construction parameters.
 */
struct KernelParams {
    /// Neighbour count; the bandwidth of each point is the distance to its k-th neighbour.
    int k = 5;
    /// Decay exponent of the kernel.
    double alpha = 2.0;
    Metric metric = Metric::euclidean;
};

struct Neighbor {
    Eigen::Index index;
    double distance;
};

/// Per-point k nearest neighbours, closest first.
using NeighborLists = std::vector<std::vector<Neighbor>>;

/// All-pairs distances between rows of `values`.
inline Matrix pairwise_distances(const Matrix& values, Metric metric = Metric::euclidean) {
    const Eigen::Index n = values.rows();
    Matrix d = Matrix::Zero(n, n);
    const Matrix t = values.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = metric == Metric::euclidean ? (t.col(i) - t.col(j)).norm() : (t.col(i) - t.col(j)).lpNorm<1>();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

/**
 * @brief Exact k-NN from a precomputed distance matrix.
 *
 * The point itself is excluded; ties go to the lower index.
 */
inline NeighborLists knn_from_distances(const Matrix& dist, int k) {
    const Eigen::Index n = dist.rows();
    if (k < 1 || k >= n) {
        throw std::invalid_argument("k must satisfy 1 <= k < n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    }
    NeighborLists out(static_cast<std::size_t>(n));
    std::vector<Eigen::Index> order;
    for (Eigen::Index i = 0; i < n; ++i) {
        order.resize(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        order.erase(order.begin() + i);
        auto closer = [&](Eigen::Index a, Eigen::Index b) {
            return dist(i, a) < dist(i, b) || (dist(i, a) == dist(i, b) && a < b);
        };
        std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);
        auto& row = out[static_cast<std::size_t>(i)];
        row.reserve(static_cast<std::size_t>(k));
        for (int r = 0; r < k; ++r) {
            row.push_back({order[static_cast<std::size_t>(r)], dist(i, order[static_cast<std::size_t>(r)])});
        }
    }
    return out;
}

/// Within-domain distances, 0-1 normalized over the whole matrix.
inline Matrix domain_distances(const Matrix& values, Metric metric = Metric::euclidean) {
    return normalize_01(pairwise_distances(values, metric), NormalizeMode::whole_matrix);
}

/// k nearest neighbours of every row under the normalized within-domain distance.
inline NeighborLists knn_distances(const DataMatrix& data, const KernelParams& params) {
    return knn_from_distances(domain_distances(data.values, params.metric), params.k);
}

/**
 * @brief Two-sided adaptive-bandwidth kernel.
 *
 * K = 0.5 exp(-(d/sigma_i)^alpha) + 0.5 exp(-(d/sigma_j)^alpha).
 */
inline double alpha_decay_kernel(double d, double sigma_i, double sigma_j, double alpha) {
    if (!(sigma_i > 0) || !(sigma_j > 0)) {
        throw std::invalid_argument("alpha_decay_kernel: bandwidth must be positive");
    }
    if (!(alpha > 0)) {
        throw std::invalid_argument("alpha_decay_kernel: alpha must be positive");
    }
    if (d < 0) {
        throw std::invalid_argument("alpha_decay_kernel: negative distance");
    }
    return 0.5 * std::exp(-std::pow(d / sigma_i, alpha)) + 0.5 * std::exp(-std::pow(d / sigma_j, alpha));
}

/**
 * @brief Kernel matrix of one domain on its symmetrized k-NN graph.
 */
struct DomainSimilarity {
    /// Symmetric, entries in [0, 1], unit diagonal, zero off the k-NN union.
    Matrix weights;
    /// Directed k-NN lists used to build `weights`.
    NeighborLists neighbors;
    /// Per-point bandwidth after the zero-bandwidth fallback.
    Vector sigma;
    KernelParams params;

    Eigen::Index size() const { return weights.rows(); }

    /// Undirected edge set (i < j) of the k-NN union graph.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges() const {
        std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
        for (std::size_t i = 0; i < neighbors.size(); ++i) {
            for (const auto& nb : neighbors[i]) {
                const auto a = std::min<Eigen::Index>(static_cast<Eigen::Index>(i), nb.index);
                const auto b = std::max<Eigen::Index>(static_cast<Eigen::Index>(i), nb.index);
                out.emplace_back(a, b);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
};

/**
 * @brief Builds the kernel matrix from precomputed within-domain distances.
 *
 * A zero bandwidth (k-th neighbour at distance 0) is replaced by the smallest
 * positive neighbour distance in the domain, or 1e-12 when there is none.
 */
inline DomainSimilarity similarity_from_distances(const Matrix& dist, const KernelParams& params) {
    if (!(params.alpha > 0)) {
        throw std::invalid_argument("alpha must be positive");
    }
    DomainSimilarity out;
    out.params = params;
    out.neighbors = knn_from_distances(dist, params.k);
    const Eigen::Index n = dist.rows();

    double smallest_positive = std::numeric_limits<double>::infinity();
    for (const auto& row : out.neighbors) {
        for (const auto& nb : row) {
            if (nb.distance > 0) {
                smallest_positive = std::min(smallest_positive, nb.distance);
            }
        }
    }
    const double fallback = std::isfinite(smallest_positive) ? smallest_positive : 1e-12;

    out.sigma.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = out.neighbors[static_cast<std::size_t>(i)].back().distance;
        out.sigma(i) = s > 0 ? s : fallback;
    }

    out.weights = Matrix::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (const auto& nb : out.neighbors[static_cast<std::size_t>(i)]) {
            const double v = alpha_decay_kernel(nb.distance, out.sigma(i), out.sigma(nb.index), params.alpha);
            out.weights(i, nb.index) = v;
            out.weights(nb.index, i) = v;
        }
    }
    return out;
}

inline DomainSimilarity build_domain_similarity(const DataMatrix& data, const KernelParams& params) {
    return similarity_from_distances(domain_distances(data.values, params.metric), params);
}

/**
 * @brief W = [[W_X, W_XY], [W_YX, W_Y]] with anchor and neighbour-extension links.
 */
struct JointSimilarity {
    Matrix w;
    Eigen::Index n_x = 0;
    Eigen::Index n_y = 0;
    double nu = 1.0;
    double gamma = 1.0;

    Eigen::Index size() const { return n_x + n_y; }
    auto cross() const { return w.topRightCorner(n_x, n_y); }
    auto cross() { return w.topRightCorner(n_x, n_y); }

    /// Writes a cross-domain entry and its mirror.
    void set_cross(Eigen::Index i, Eigen::Index j, double value) {
        w(i, n_x + j) = value;
        w(n_x + j, i) = value;
    }
};

/**
 * @brief Assembles the joint similarity.
 *
 * Anchor pairs get `nu`. For anchor (i, j) and each k-NN y_l of y_j without a known
 * correspondence, W_XY(i, l) = gamma * W_Y(l, j); the X side is handled the same way.
 * Colliding extension entries keep the maximum and never overwrite an anchor.
 */
inline JointSimilarity build_joint_similarity(const AnchorList& anchors, const DomainSimilarity& wx, const DomainSimilarity& wy,
                                              double nu = 1.0, double gamma = 1.0) {
    if (!(nu > 0 && nu <= 1)) {
        throw std::invalid_argument("nu must be in (0, 1]");
    }
    if (!(gamma >= 0 && gamma <= 1)) {
        throw std::invalid_argument("gamma must be in [0, 1]");
    }
    const Eigen::Index nx = wx.size();
    const Eigen::Index ny = wy.size();
    validate_anchors(anchors, nx, ny);

    JointSimilarity out;
    out.n_x = nx;
    out.n_y = ny;
    out.nu = nu;
    out.gamma = gamma;
    out.w = Matrix::Zero(nx + ny, nx + ny);
    out.w.topLeftCorner(nx, nx) = wx.weights;
    out.w.bottomRightCorner(ny, ny) = wy.weights;

    std::vector<char> anchored_x(static_cast<std::size_t>(nx), 0), anchored_y(static_cast<std::size_t>(ny), 0);
    for (const auto& a : anchors) {
        anchored_x[static_cast<std::size_t>(a.x)] = 1;
        anchored_y[static_cast<std::size_t>(a.y)] = 1;
    }

    Matrix cross = Matrix::Zero(nx, ny);
    if (gamma > 0) {
        for (const auto& a : anchors) {
            for (const auto& nb : wy.neighbors[static_cast<std::size_t>(a.y)]) {
                if (!anchored_y[static_cast<std::size_t>(nb.index)]) {
                    cross(a.x, nb.index) = std::max(cross(a.x, nb.index), gamma * wy.weights(nb.index, a.y));
                }
            }
            for (const auto& nb : wx.neighbors[static_cast<std::size_t>(a.x)]) {
                if (!anchored_x[static_cast<std::size_t>(nb.index)]) {
                    cross(nb.index, a.y) = std::max(cross(nb.index, a.y), gamma * wx.weights(nb.index, a.x));
                }
            }
        }
    }
    for (const auto& a : anchors) {
        cross(a.x, a.y) = nu;
    }
    out.w.topRightCorner(nx, ny) = cross;
    out.w.bottomLeftCorner(ny, nx) = cross.transpose();
    return out;
}

inline JointSimilarity build_joint_similarity(const DomainPair& pair, const DomainSimilarity& wx, const DomainSimilarity& wy,
                                              double nu = 1.0, double gamma = 1.0) {
    return build_joint_similarity(pair.anchors, wx, wy, nu, gamma);
}

/// Nonzero entries of `w` as "row,col,value" lines.
inline void write_coo(const Matrix& w, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << "row,col,value\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            if (w(i, j) != 0) {
                out << i << ',' << j << ',' << w(i, j) << '\n';
            }
        }
    }
}

} // namespace mashspud

#endif
