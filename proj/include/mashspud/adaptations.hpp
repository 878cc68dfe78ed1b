#ifndef MASHSPUD_ADAPTATIONS_HPP
#define MASHSPUD_ADAPTATIONS_HPP

#include "data.hpp"
#include "metrics.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file adaptations.hpp
 *
 * @brief Builds two-domain problems from one labelled dataset: feature splits,
 * Gaussian distortion, random rotation, and anchor sampling.
 */

namespace mashspud {

enum class AdaptationKind { random, skewed, even, distort, rotation };

inline std::string to_string(AdaptationKind k) {
    switch (k) {
    case AdaptationKind::random:
        return "random";
    case AdaptationKind::skewed:
        return "skewed";
    case AdaptationKind::even:
        return "even";
    case AdaptationKind::distort:
        return "distort";
    case AdaptationKind::rotation:
        return "rotation";
    }
    return "?";
}

inline AdaptationKind adaptation_from_string(const std::string& s) {
    for (auto k : {AdaptationKind::random, AdaptationKind::skewed, AdaptationKind::even, AdaptationKind::distort,
                   AdaptationKind::rotation}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw std::invalid_argument("unknown adaptation '" + s + "'");
}

/// Anchor fractions of the standard sweep.
inline const std::vector<double> kStandardAnchorFractions{0.05, 0.10, 0.15, 0.20, 0.30, 0.50};

/// Per-feature importance scores (larger = more important).
using ImportanceOracle = std::function<std::vector<double>(const DataMatrix&, RandomSource&)>;

/**
 * @brief Permutation importance of a k-NN classifier.
 *
 * Rows are split 70/30 into reference and test sets; each feature's score is the mean
 * drop in test accuracy over `repeats` shuffles of that feature's test column.
 */
inline std::vector<double> knn_permutation_importance(const DataMatrix& data, RandomSource& rng, int k = 5, int repeats = 5) {
    if (!data.labels) {
        throw std::invalid_argument("permutation importance needs labels");
    }
    const Eigen::Index n = data.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    rng.shuffle(order);
    const auto n_ref = static_cast<std::size_t>(std::max<Eigen::Index>(k, static_cast<Eigen::Index>(std::llround(0.7 * n))));
    if (n_ref >= order.size()) {
        throw std::invalid_argument("permutation importance: too few rows");
    }
    std::vector<Eigen::Index> ref_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_ref));
    std::vector<Eigen::Index> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_ref), order.end());
    const DataMatrix ref = select_rows(data, ref_idx);
    const DataMatrix test = select_rows(data, test_idx);

    const double base = accuracy(knn_vote(ref.values, *ref.labels, test.values, k), *test.labels);
    std::vector<double> scores(static_cast<std::size_t>(data.cols()), 0.0);
    for (Eigen::Index f = 0; f < data.cols(); ++f) {
        for (int r = 0; r < repeats; ++r) {
            Matrix permuted = test.values;
            std::vector<Eigen::Index> perm(static_cast<std::size_t>(permuted.rows()));
            std::iota(perm.begin(), perm.end(), Eigen::Index{0});
            rng.shuffle(perm);
            for (Eigen::Index i = 0; i < permuted.rows(); ++i) {
                permuted(i, f) = test.values(perm[static_cast<std::size_t>(i)], f);
            }
            scores[static_cast<std::size_t>(f)] += base - accuracy(knn_vote(ref.values, *ref.labels, permuted, k), *test.labels);
        }
        scores[static_cast<std::size_t>(f)] /= repeats;
    }
    return scores;
}

/// Feature indices by descending score, ties to the lower index.
inline std::vector<Eigen::Index> rank_features(const std::vector<double>& scores) {
    std::vector<Eigen::Index> idx(scores.size());
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
    });
    return idx;
}

/// Oracle that scores features by their position in a fixed ranking of names.
inline ImportanceOracle ranking_oracle(std::vector<std::string> ranked_names) {
    return [names = std::move(ranked_names)](const DataMatrix& data, RandomSource&) {
        std::vector<double> scores(static_cast<std::size_t>(data.cols()), -1.0 * static_cast<double>(names.size() + 1));
        for (std::size_t r = 0; r < names.size(); ++r) {
            auto it = std::find(data.feature_names.begin(), data.feature_names.end(), names[r]);
            if (it == data.feature_names.end()) {
                throw std::invalid_argument("ranking names unknown feature '" + names[r] + "'");
            }
            scores[static_cast<std::size_t>(it - data.feature_names.begin())] = -static_cast<double>(r);
        }
        return scores;
    };
}

/// One feature name per line, most important first.
inline std::vector<std::string> load_ranking_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            names.push_back(line);
        }
    }
    return names;
}

inline void write_ranking_file(const std::vector<std::string>& names, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    for (const auto& n : names) {
        out << n << '\n';
    }
}

struct AdaptationSpec {
    AdaptationKind kind = AdaptationKind::random;
    double anchor_fraction = 0.2;
    std::uint64_t seed = 0;
    /// Standard deviation of the additive noise (distort only).
    double noise_scale = 0.05;
    /// Defaults to knn_permutation_importance when empty (skewed/even only).
    ImportanceOracle importance;
};

/// ceil(fraction * n) rows, sampled without replacement, anchored to themselves.
inline AnchorList sample_anchors(Eigen::Index n, double fraction, RandomSource rng) {
    if (!(fraction > 0 && fraction <= 1)) {
        throw std::invalid_argument("anchor fraction must be in (0, 1]");
    }
    const auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    rng.shuffle(rows);
    rows.resize(std::min(count, rows.size()));
    std::sort(rows.begin(), rows.end());
    AnchorList out;
    out.reserve(rows.size());
    for (auto r : rows) {
        out.push_back({r, r});
    }
    return out;
}

inline DomainPair sample_anchors(DomainPair pair, double fraction, RandomSource rng) {
    if (pair.n_x() != pair.n_y()) {
        throw std::invalid_argument("sample_anchors: domains must share row identity");
    }
    pair.anchors = sample_anchors(pair.n_x(), fraction, std::move(rng));
    return pair;
}

namespace detail {

inline DomainPair pair_from_columns(const DataMatrix& data, std::vector<Eigen::Index> x_cols, std::vector<Eigen::Index> y_cols) {
    std::sort(x_cols.begin(), x_cols.end());
    std::sort(y_cols.begin(), y_cols.end());
    DomainPair pair;
    pair.x = select_columns(data, x_cols);
    pair.y = select_columns(data, y_cols);
    return pair;
}

// Streams: 1 = feature assignment / noise, 2 = anchors, 3 = importance.
inline RandomSource stream(std::uint64_t seed, std::uint64_t tag) {
    return RandomSource(seed).fork(tag);
}

} // namespace detail

/// Shuffled features, ceil(p/2) to X and the rest to Y.
inline DomainPair split_random(const DataMatrix& data, const AdaptationSpec& spec) {
    const Eigen::Index p = data.cols();
    if (p < 2) {
        throw std::invalid_argument("split_random: need at least two features");
    }
    std::vector<Eigen::Index> cols(static_cast<std::size_t>(p));
    std::iota(cols.begin(), cols.end(), Eigen::Index{0});
    auto rng = detail::stream(spec.seed, 1);
    rng.shuffle(cols);
    const auto half = static_cast<std::size_t>((p + 1) / 2);
    auto pair = detail::pair_from_columns(data, {cols.begin(), cols.begin() + static_cast<std::ptrdiff_t>(half)},
                                          {cols.begin() + static_cast<std::ptrdiff_t>(half), cols.end()});
    return sample_anchors(std::move(pair), spec.anchor_fraction, detail::stream(spec.seed, 2));
}

enum class ImportanceSplit { skewed, even };

/**
 * @brief Importance-driven splits.
 *
 * skewed: the top ceil(p/2) features form X. even: the top ceil(p/2) features are shuffled
 * and dealt ceil(h/2) to X and the rest to Y; the remaining features are shuffled and
 * fill X up to ceil(p/2), the rest go to Y.
 */
inline DomainPair split_by_importance(const DataMatrix& data, const AdaptationSpec& spec, ImportanceSplit mode) {
    if (!data.labels) {
        throw std::invalid_argument("split_by_importance: labels required");
    }
    const Eigen::Index p = data.cols();
    if (p < 2) {
        throw std::invalid_argument("split_by_importance: need at least two features");
    }
    auto irng = detail::stream(spec.seed, 3);
    const auto scores = spec.importance ? spec.importance(data, irng) : knn_permutation_importance(data, irng);
    const auto ranked = rank_features(scores);
    const auto half = static_cast<std::size_t>((p + 1) / 2);

    std::vector<Eigen::Index> x_cols, y_cols;
    if (mode == ImportanceSplit::skewed) {
        x_cols.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(half));
        y_cols.assign(ranked.begin() + static_cast<std::ptrdiff_t>(half), ranked.end());
    } else {
        auto rng = detail::stream(spec.seed, 1);
        std::vector<Eigen::Index> important(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(half));
        std::vector<Eigen::Index> rest(ranked.begin() + static_cast<std::ptrdiff_t>(half), ranked.end());
        rng.shuffle(important);
        rng.shuffle(rest);
        const std::size_t to_x = (important.size() + 1) / 2;
        x_cols.assign(important.begin(), important.begin() + static_cast<std::ptrdiff_t>(to_x));
        y_cols.assign(important.begin() + static_cast<std::ptrdiff_t>(to_x), important.end());
        for (auto c : rest) {
            (x_cols.size() < half ? x_cols : y_cols).push_back(c);
        }
    }
    auto pair = detail::pair_from_columns(data, std::move(x_cols), std::move(y_cols));
    return sample_anchors(std::move(pair), spec.anchor_fraction, detail::stream(spec.seed, 2));
}

/// Y = X + N(0, noise_scale^2) per cell.
inline DomainPair distort_gaussian(const DataMatrix& data, const AdaptationSpec& spec) {
    if (!(spec.noise_scale >= 0)) {
        throw std::invalid_argument("distort_gaussian: noise_scale must be nonnegative");
    }
    DomainPair pair;
    pair.x = data;
    pair.y = data;
    auto rng = detail::stream(spec.seed, 1);
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            pair.y.values(i, j) += spec.noise_scale * rng.normal();
        }
    }
    return sample_anchors(std::move(pair), spec.anchor_fraction, detail::stream(spec.seed, 2));
}

/**
 * @brief Orthogonal factor of a seeded Gaussian matrix, normalized so R has a positive
 * diagonal and det(Q) = +1.
 */
inline Matrix random_rotation(Eigen::Index p, RandomSource& rng) {
    Matrix g(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < p; ++i) {
            g(i, j) = rng.normal();
        }
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < p; ++i) {
        if (r(i, i) < 0) {
            q.col(i) *= -1.0;
        }
    }
    if (q.determinant() < 0) {
        q.col(0) *= -1.0;
    }
    return q;
}

/// Y = X Q for a random proper rotation Q.
inline DomainPair distort_rotation(const DataMatrix& data, const AdaptationSpec& spec) {
    if (data.cols() < 2) {
        throw std::invalid_argument("distort_rotation: need at least two features");
    }
    auto rng = detail::stream(spec.seed, 1);
    const Matrix q = random_rotation(data.cols(), rng);
    DomainPair pair;
    pair.x = data;
    pair.y = data;
    pair.y.values = data.values * q;
    return sample_anchors(std::move(pair), spec.anchor_fraction, detail::stream(spec.seed, 2));
}

inline DomainPair adapt(const DataMatrix& data, const AdaptationSpec& spec) {
    switch (spec.kind) {
    case AdaptationKind::random:
        return split_random(data, spec);
    case AdaptationKind::skewed:
        return split_by_importance(data, spec, ImportanceSplit::skewed);
    case AdaptationKind::even:
        return split_by_importance(data, spec, ImportanceSplit::even);
    case AdaptationKind::distort:
        return distort_gaussian(data, spec);
    case AdaptationKind::rotation:
        return distort_rotation(data, spec);
    }
    throw std::invalid_argument("unknown adaptation");
}

/**
 * @brief Sparse-label transfer setup: X holds the top `n_top` features of a random
 * `row_fraction` of the rows, Y holds the remaining features of every row.
 *
 * Each X row is anchored to its source row in Y.
 */
inline DomainPair label_transfer_pair(const DataMatrix& data, const std::vector<Eigen::Index>& ranked, std::size_t n_top,
                                      double row_fraction, RandomSource rng) {
    if (n_top < 1 || n_top >= ranked.size()) {
        throw std::invalid_argument("label_transfer_pair: n_top must leave features for both domains");
    }
    std::vector<Eigen::Index> top(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n_top));
    std::vector<Eigen::Index> rest(ranked.begin() + static_cast<std::ptrdiff_t>(n_top), ranked.end());
    std::sort(top.begin(), top.end());
    std::sort(rest.begin(), rest.end());
    const AnchorList rows = sample_anchors(data.rows(), row_fraction, std::move(rng));
    std::vector<Eigen::Index> keep;
    for (const auto& a : rows) {
        keep.push_back(a.x);
    }
    DomainPair pair;
    pair.x = select_columns(select_rows(data, keep), top);
    pair.y = select_columns(data, rest);
    for (std::size_t r = 0; r < keep.size(); ++r) {
        pair.anchors.push_back({static_cast<Eigen::Index>(r), keep[r]});
    }
    return pair;
}

} // namespace mashspud

#endif
