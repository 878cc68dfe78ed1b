#ifndef MASHSPUD_SPUD_HPP
#define MASHSPUD_SPUD_HPP

#include "alignment.hpp"
#include "embed.hpp"
#include "graph.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file spud.hpp
 *
 * @brief Shortest paths on the union of two domain graphs joined at anchors.
 */

namespace mashspud {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Undirected weighted graph as adjacency lists of (target, length).
using WeightedGraph = std::vector<std::vector<std::pair<Eigen::Index, double>>>;

/**
 * @brief Edge lengths 1 - similarity on the k-NN union graph, divided by the largest length.
 */
inline WeightedGraph length_graph(const DomainSimilarity& sim) {
    const auto edges = sim.edges();
    double longest = 0.0;
    for (const auto& [a, b] : edges) {
        longest = std::max(longest, 1.0 - sim.weights(a, b));
    }
    WeightedGraph g(static_cast<std::size_t>(sim.size()));
    for (const auto& [a, b] : edges) {
        const double len = longest > 0 ? (1.0 - sim.weights(a, b)) / longest : 0.0;
        g[static_cast<std::size_t>(a)].emplace_back(b, len);
        g[static_cast<std::size_t>(b)].emplace_back(a, len);
    }
    return g;
}

/// Dijkstra from one source; unreachable nodes stay at infinity.
inline Vector dijkstra(const WeightedGraph& g, Eigen::Index source) {
    Vector dist = Vector::Constant(static_cast<Eigen::Index>(g.size()), kUnreachable);
    using Item = std::pair<double, Eigen::Index>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist(source) = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist(u)) {
            continue;
        }
        for (const auto& [v, len] : g[static_cast<std::size_t>(u)]) {
            const double nd = d + len;
            if (nd < dist(v)) {
                dist(v) = nd;
                heap.emplace(nd, v);
            }
        }
    }
    return dist;
}

/// All-pairs shortest paths by repeated Dijkstra, symmetrized against rounding.
inline Matrix domain_geodesics(const WeightedGraph& g) {
    const auto n = static_cast<Eigen::Index>(g.size());
    Matrix d(n, n);
    for (Eigen::Index s = 0; s < n; ++s) {
        d.row(s) = dijkstra(g, s).transpose();
    }
    return d.cwiseMin(d.transpose());
}

inline Matrix domain_geodesics(const DomainSimilarity& sim) {
    return domain_geodesics(length_graph(sim));
}

struct NearestAnchor {
    /// Position in the anchor list, or -1 when no anchor is reachable.
    Eigen::Index anchor = -1;
    double distance = kUnreachable;
};

/**
 * @brief For every point, the anchor with the smallest within-domain geodesic distance.
 *
 * `anchor_points[a]` is the domain index of anchor a. Ties go to the lower point index.
 */
inline std::vector<NearestAnchor> nearest_anchor(const Matrix& dists, const std::vector<Eigen::Index>& anchor_points) {
    if (anchor_points.empty()) {
        throw std::invalid_argument("nearest_anchor: empty anchor set");
    }
    std::vector<NearestAnchor> out(static_cast<std::size_t>(dists.rows()));
    for (Eigen::Index i = 0; i < dists.rows(); ++i) {
        auto& best = out[static_cast<std::size_t>(i)];
        for (std::size_t a = 0; a < anchor_points.size(); ++a) {
            const double d = dists(i, anchor_points[a]);
            if (!std::isfinite(d)) {
                continue;
            }
            const bool better = best.anchor < 0 || d < best.distance ||
                                (d == best.distance && anchor_points[a] < anchor_points[static_cast<std::size_t>(best.anchor)]);
            if (better) {
                best.anchor = static_cast<Eigen::Index>(a);
                best.distance = d;
            }
        }
    }
    return out;
}

enum class Aggregation { min, max, mean, abs_diff };
enum class GeodesicMode { nearest_anchor, all_anchors, dense_nama };

inline Aggregation aggregation_from_string(const std::string& s) {
    if (s == "min") {
        return Aggregation::min;
    }
    if (s == "max") {
        return Aggregation::max;
    }
    if (s == "mean") {
        return Aggregation::mean;
    }
    if (s == "abs_diff") {
        return Aggregation::abs_diff;
    }
    throw std::invalid_argument("unknown aggregation '" + s + "'");
}

inline GeodesicMode geodesic_mode_from_string(const std::string& s) {
    if (s == "nearest_anchor") {
        return GeodesicMode::nearest_anchor;
    }
    if (s == "all_anchors") {
        return GeodesicMode::all_anchors;
    }
    if (s == "dense_nama") {
        return GeodesicMode::dense_nama;
    }
    throw std::invalid_argument("unknown geodesic mode '" + s + "'");
}

struct GeodesicConfig {
    Aggregation aggregation = Aggregation::min;
    GeodesicMode mode = GeodesicMode::nearest_anchor;
    bool use_info_distance = false;
    /// Anchor similarity; the anchor hop has length 1 - nu.
    double nu = 1.0;
};

/**
 * @brief Joint geodesic matrix: within-domain blocks plus estimated cross distances.
 */
struct CrossGeodesic {
    Matrix dists;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> reachable;
    Eigen::Index n_x = 0;
    Eigen::Index n_y = 0;

    auto cross() const { return dists.topRightCorner(n_x, n_y); }
};

namespace detail {

inline double aggregate(Aggregation agg, double c1, double c2) {
    switch (agg) {
    case Aggregation::min:
        return std::min(c1, c2);
    case Aggregation::max:
        return std::max(c1, c2);
    case Aggregation::mean:
        return 0.5 * (c1 + c2);
    case Aggregation::abs_diff:
        if (!std::isfinite(c1) || !std::isfinite(c2)) {
            return kUnreachable;
        }
        return std::abs(c1 - c2);
    }
    return kUnreachable;
}

/// Shortest anchor-x to anchor-y distances on the union graph restricted to anchor nodes.
inline Matrix anchor_closure(const AnchorList& anchors, const Matrix& gx, const Matrix& gy, double hop) {
    const auto m = static_cast<Eigen::Index>(anchors.size());
    // Nodes 0..m-1 are anchor x-sides, m..2m-1 the y-sides.
    Matrix c = Matrix::Constant(2 * m, 2 * m, kUnreachable);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            c(a, b) = gx(anchors[static_cast<std::size_t>(a)].x, anchors[static_cast<std::size_t>(b)].x);
            c(m + a, m + b) = gy(anchors[static_cast<std::size_t>(a)].y, anchors[static_cast<std::size_t>(b)].y);
        }
        c(a, m + a) = std::min(c(a, m + a), hop);
        c(m + a, a) = std::min(c(m + a, a), hop);
    }
    for (Eigen::Index k = 0; k < 2 * m; ++k) {
        for (Eigen::Index j = 0; j < 2 * m; ++j) {
            const double ckj = c(k, j);
            if (!std::isfinite(ckj)) {
                continue;
            }
            for (Eigen::Index i = 0; i < 2 * m; ++i) {
                const double via = c(i, k) + ckj;
                if (via < c(i, j)) {
                    c(i, j) = via;
                }
            }
        }
    }
    return c.topRightCorner(m, m);
}

} // namespace detail

/**
 * @brief Estimates geodesic distances between the domains through anchor pairs.
 *
 * nearest_anchor: each side routes through its own nearest anchor and the two candidate
 * lengths are aggregated. all_anchors and dense_nama: exact shortest paths on the union
 * graph, where anchor pairs are joined by an edge of length 1 - nu (dense_nama is expected
 * to be given Euclidean distance matrices and always uses min).
 */
inline CrossGeodesic cross_geodesics(const AnchorList& anchors, const Matrix& gx, const Matrix& gy, const GeodesicConfig& cfg) {
    if (anchors.empty()) {
        throw std::invalid_argument("cross_geodesics: no anchors");
    }
    if (!(cfg.nu > 0 && cfg.nu <= 1)) {
        throw std::invalid_argument("cross_geodesics: nu must be in (0, 1]");
    }
    const Eigen::Index nx = gx.rows();
    const Eigen::Index ny = gy.rows();
    validate_anchors(anchors, nx, ny);
    const double hop = 1.0 - cfg.nu;

    Matrix cross(nx, ny);
    if (cfg.mode == GeodesicMode::nearest_anchor) {
        std::vector<Eigen::Index> ax, ay;
        for (const auto& a : anchors) {
            ax.push_back(a.x);
            ay.push_back(a.y);
        }
        const auto near_x = nearest_anchor(gx, ax);
        const auto near_y = nearest_anchor(gy, ay);
        for (Eigen::Index i = 0; i < nx; ++i) {
            const auto& na = near_x[static_cast<std::size_t>(i)];
            for (Eigen::Index j = 0; j < ny; ++j) {
                const auto& nb = near_y[static_cast<std::size_t>(j)];
                const double c1 = na.anchor < 0 ? kUnreachable
                                                : na.distance + hop + gy(anchors[static_cast<std::size_t>(na.anchor)].y, j);
                const double c2 = nb.anchor < 0 ? kUnreachable
                                                : nb.distance + hop + gx(anchors[static_cast<std::size_t>(nb.anchor)].x, i);
                cross(i, j) = detail::aggregate(cfg.aggregation, c1, c2);
            }
        }
    } else {
        const Matrix closure = detail::anchor_closure(anchors, gx, gy, hop);
        const auto m = static_cast<Eigen::Index>(anchors.size());
        // Column a of to_y: shortest distance from anchor a's x-side to every y_j.
        Matrix to_y = Matrix::Constant(ny, m, kUnreachable);
        for (Eigen::Index a = 0; a < m; ++a) {
            for (Eigen::Index b = 0; b < m; ++b) {
                const double cab = closure(a, b);
                if (std::isfinite(cab)) {
                    to_y.col(a) = to_y.col(a).cwiseMin((gy.col(anchors[static_cast<std::size_t>(b)].y).array() + cab).matrix());
                }
            }
        }
        Matrix cross_t = Matrix::Constant(ny, nx, kUnreachable);
        for (Eigen::Index a = 0; a < m; ++a) {
            const Eigen::Index ax = anchors[static_cast<std::size_t>(a)].x;
            for (Eigen::Index i = 0; i < nx; ++i) {
                const double from_x = gx(i, ax);
                if (std::isfinite(from_x)) {
                    cross_t.col(i) = cross_t.col(i).cwiseMin((to_y.col(a).array() + from_x).matrix());
                }
            }
        }
        cross = cross_t.transpose();
    }

    CrossGeodesic out;
    out.n_x = nx;
    out.n_y = ny;
    out.dists.resize(nx + ny, nx + ny);
    out.dists.topLeftCorner(nx, nx) = gx;
    out.dists.bottomRightCorner(ny, ny) = gy;
    out.dists.topRightCorner(nx, ny) = cross;
    out.dists.bottomLeftCorner(ny, nx) = cross.transpose();
    out.reachable = out.dists.array().isFinite();
    return out;
}

/// Replaces infinite entries by 1.5 times the largest finite entry.
inline Matrix impute_unreachable(const Matrix& d) {
    double largest = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (std::isfinite(d.data()[i])) {
            largest = std::max(largest, d.data()[i]);
        }
    }
    const double fill = largest > 0 ? 1.5 * largest : 1.0;
    return d.unaryExpr([fill](double v) { return std::isfinite(v) ? v : fill; });
}

/**
 * @brief Information-distance view of a distance matrix.
 *
 * Rows of 1 - normalize01(d) are turned into probability vectors and compared with the
 * potential distance; the result is 0-1 normalized.
 */
inline Matrix distances_to_information(const Matrix& d) {
    Matrix affinity = (1.0 - normalize_01(d, NormalizeMode::whole_matrix).array()).matrix();
    const Vector sums = affinity.rowwise().sum();
    for (Eigen::Index i = 0; i < affinity.rows(); ++i) {
        if (sums(i) > 0) {
            affinity.row(i) /= sums(i);
        } else {
            affinity.row(i).setConstant(1.0 / static_cast<double>(affinity.cols()));
        }
    }
    return normalize_01(row_distances(affinity, InfoDistance::potential), NormalizeMode::whole_matrix);
}

/// Within-domain geodesics as used by the configured mode.
inline Matrix spud_domain_distances(const DataMatrix& data, const KernelParams& kparams, GeodesicMode mode) {
    if (mode == GeodesicMode::dense_nama) {
        return domain_distances(data.values, kparams.metric);
    }
    return domain_geodesics(build_domain_similarity(data, kparams));
}

/**
 * @brief Full SPUD: geodesics, cross estimates, optional information distance, MDS.
 */
inline AlignmentResult spud_align(const DomainPair& pair, const KernelParams& kparams, GeodesicConfig cfg, int dim) {
    validate(pair);
    if (dim < 1 || dim > pair.size() - 1) {
        throw std::invalid_argument("spud_align: dim must be in [1, n_x + n_y - 1]");
    }
    if (cfg.mode == GeodesicMode::dense_nama) {
        cfg.aggregation = Aggregation::min;
    }
    const Matrix gx = spud_domain_distances(pair.x, kparams, cfg.mode);
    const Matrix gy = spud_domain_distances(pair.y, kparams, cfg.mode);
    const CrossGeodesic cg = cross_geodesics(pair.anchors, gx, gy, cfg);

    AlignmentResult out;
    out.method = cfg.mode == GeodesicMode::dense_nama ? "nama" : "spud";
    out.n_x = pair.n_x();
    out.n_y = pair.n_y();
    out.distances = impute_unreachable(cg.dists);
    if (cfg.use_info_distance) {
        out.distances = distances_to_information(out.distances);
    }
    out.embedding = classical_mds(out.distances, dim);
    return out;
}

} // namespace mashspud

#endif
