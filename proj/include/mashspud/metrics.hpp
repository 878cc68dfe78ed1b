#ifndef MASHSPUD_METRICS_HPP
#define MASHSPUD_METRICS_HPP

#include "data.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

/**
 * @file metrics.hpp
 *
 * @brief FOSCTTM, cross-embedding classification, and the combined score.
 */

namespace mashspud {

/**
 * @brief FOSCTTM over a cross-domain distance block.
 *
 * `cross(i, j)` is the distance between x_i and y_j. For every true pair the fraction of
 * co-domain points strictly closer than the true match is taken in both directions;
 * the result averages over pairs and directions.
 */
inline double foscttm_from_cross(const Matrix& cross, const AnchorList& true_pairs) {
    if (true_pairs.empty()) {
        throw std::invalid_argument("foscttm: empty pair list");
    }
    const Eigen::Index nx = cross.rows();
    const Eigen::Index ny = cross.cols();
    if (nx < 2 || ny < 2) {
        throw std::invalid_argument("foscttm: each domain needs at least two points");
    }
    double total = 0.0;
    for (const auto& p : true_pairs) {
        if (p.x < 0 || p.x >= nx || p.y < 0 || p.y >= ny) {
            throw std::invalid_argument("foscttm: pair index out of range");
        }
        const double ref = cross(p.x, p.y);
        const auto closer_y = (cross.row(p.x).array() < ref).count();
        const auto closer_x = (cross.col(p.y).array() < ref).count();
        total += static_cast<double>(closer_y) / static_cast<double>(ny - 1);
        total += static_cast<double>(closer_x) / static_cast<double>(nx - 1);
    }
    return total / (2.0 * static_cast<double>(true_pairs.size()));
}

/// Euclidean distances between embedded X rows (first `n_x`) and embedded Y rows.
inline Matrix cross_distances(const Matrix& coords, Eigen::Index n_x) {
    const Eigen::Index n_y = coords.rows() - n_x;
    const Matrix xt = coords.topRows(n_x).transpose();
    const Matrix yt = coords.bottomRows(n_y).transpose();
    Matrix out(n_x, n_y);
    for (Eigen::Index j = 0; j < n_y; ++j) {
        out.col(j) = (xt.colwise() - yt.col(j)).colwise().norm().transpose();
    }
    return out;
}

/// FOSCTTM of a joint embedding whose first `n_x` rows are domain X.
inline double foscttm(const Matrix& coords, Eigen::Index n_x, const AnchorList& true_pairs) {
    return foscttm_from_cross(cross_distances(coords, n_x), true_pairs);
}

/// Identity correspondence (i, i) for i < n.
inline AnchorList identity_pairs(Eigen::Index n) {
    AnchorList out;
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        out.push_back({i, i});
    }
    return out;
}

/**
 * @brief k-NN majority vote from labelled reference rows to query rows.
 *
 * Neighbour ties go to the lower index; vote ties go to the smallest summed distance,
 * then to the lowest label id.
 */
inline std::vector<int> knn_vote(const Matrix& reference, const std::vector<int>& labels, const Matrix& queries, int k) {
    const Eigen::Index n = reference.rows();
    if (static_cast<Eigen::Index>(labels.size()) != n) {
        throw std::invalid_argument("knn_vote: label count does not match reference rows");
    }
    if (k < 1 || k > n) {
        throw std::invalid_argument("knn_vote: k must be in [1, n_reference]");
    }
    const Matrix rt = reference.transpose();
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(queries.rows()));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        const Vector d = (rt.colwise() - queries.row(q).transpose()).colwise().norm().transpose();
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::partial_sort(order.begin(), order.begin() + k, order.end(),
                          [&](Eigen::Index a, Eigen::Index b) { return d(a) < d(b) || (d(a) == d(b) && a < b); });
        std::map<int, std::pair<int, double>> tally;
        for (int r = 0; r < k; ++r) {
            const auto idx = order[static_cast<std::size_t>(r)];
            auto& t = tally[labels[static_cast<std::size_t>(idx)]];
            t.first += 1;
            t.second += d(idx);
        }
        auto best = tally.begin();
        for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
            const auto& [cnt, dist] = it->second;
            if (cnt > best->second.first || (cnt == best->second.first && dist < best->second.second)) {
                best = it;
            }
        }
        out.push_back(best->first);
    }
    return out;
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size() || truth.empty()) {
        throw std::invalid_argument("accuracy: size mismatch");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        hits += predicted[i] == truth[i];
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

/// CE: k-NN trained on embedded X, scored on embedded Y.
inline double cross_embedding_accuracy(const Matrix& coords, Eigen::Index n_x, const std::vector<int>& labels_x,
                                       const std::vector<int>& labels_y, int k = 5) {
    const Eigen::Index n_y = coords.rows() - n_x;
    if (static_cast<Eigen::Index>(labels_x.size()) != n_x || static_cast<Eigen::Index>(labels_y.size()) != n_y) {
        throw std::invalid_argument("cross_embedding_accuracy: labels missing for embedded points");
    }
    return accuracy(knn_vote(coords.topRows(n_x), labels_x, coords.bottomRows(n_y), k), labels_y);
}

inline double combined_score(double ce_accuracy, double foscttm_score) {
    return ce_accuracy - foscttm_score;
}

struct MetricsReport {
    double foscttm = 0.0;
    double ce_accuracy = 0.0;
    double combined = 0.0;
    std::size_t n_eval_pairs = 0;
    int ce_k = 5;
    int dim = 0;
};

/// Both metrics on one embedding; `true_pairs` drives FOSCTTM.
inline MetricsReport evaluate(const Matrix& coords, Eigen::Index n_x, const AnchorList& true_pairs, const std::vector<int>& labels_x,
                              const std::vector<int>& labels_y, int ce_k = 5) {
    MetricsReport r;
    r.foscttm = foscttm(coords, n_x, true_pairs);
    r.ce_accuracy = cross_embedding_accuracy(coords, n_x, labels_x, labels_y, ce_k);
    r.combined = combined_score(r.ce_accuracy, r.foscttm);
    r.n_eval_pairs = true_pairs.size();
    r.ce_k = ce_k;
    r.dim = static_cast<int>(coords.cols());
    return r;
}

} // namespace mashspud

#endif
