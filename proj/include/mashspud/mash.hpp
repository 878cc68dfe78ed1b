#ifndef MASHSPUD_MASH_HPP
#define MASHSPUD_MASH_HPP

#include "alignment.hpp"
#include "embed.hpp"
#include "graph.hpp"
#include "metrics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

/**
 * @file mash.hpp
 *
 * @brief Joint diffusion operator, entropy-based time selection, integrated diffusion
 * distance, and the pseudo-connection refinement loop.
 */

namespace mashspud {

/**
 * @brief Row-stochastic P = D^-1 W.
 */
struct DiffusionOperator {
    Matrix p;
    /// Row sums of the similarity matrix P was built from.
    Vector degree;
    /// Selected time scale; 0 until chosen.
    int t = 0;
};

inline DiffusionOperator row_normalize(const Matrix& w) {
    DiffusionOperator op;
    op.degree = w.rowwise().sum();
    if ((op.degree.array() <= 0).any()) {
        throw std::invalid_argument("row_normalize: zero row sum");
    }
    op.p = op.degree.cwiseInverse().asDiagonal() * w;
    return op;
}

inline DiffusionOperator row_normalize(const JointSimilarity& w) {
    return row_normalize(w.w);
}

/**
 * @brief Spectrum of P via its symmetric conjugate D^1/2 P D^-1/2 = D^-1/2 W D^-1/2.
 *
 * Requires P to have been built from a symmetric W.
 */
inline Vector diffusion_spectrum(const DiffusionOperator& op) {
    const Vector s = op.degree.cwiseSqrt();
    Matrix sym = s.asDiagonal() * op.p * s.cwiseInverse().asDiagonal();
    sym = 0.5 * (sym + sym.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("diffusion_spectrum: eigendecomposition failed");
    }
    return eig.eigenvalues();
}

/**
 * @brief Von Neumann entropy H(t), t = 1..t_max, of the nonnegative part of a spectrum.
 */
inline std::vector<double> von_neumann_entropy(const Vector& eigenvalues, int t_max) {
    std::vector<double> lambdas;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        if (eigenvalues(i) > 0) {
            lambdas.push_back(std::min(eigenvalues(i), 1.0));
        }
    }
    std::vector<double> h;
    h.reserve(static_cast<std::size_t>(t_max));
    for (int t = 1; t <= t_max; ++t) {
        double total = 0.0;
        for (double l : lambdas) {
            total += std::pow(l, t);
        }
        double entropy = 0.0;
        if (total > 0) {
            for (double l : lambdas) {
                const double eta = std::pow(l, t) / total;
                if (eta > 0) {
                    entropy -= eta * std::log(eta);
                }
            }
        }
        h.push_back(entropy);
    }
    return h;
}

enum class KneeRule { two_line, second_difference };

inline std::string to_string(KneeRule r) {
    return r == KneeRule::two_line ? "two_line" : "second_difference";
}

inline KneeRule knee_rule_from_string(const std::string& s) {
    if (s == "two_line") {
        return KneeRule::two_line;
    }
    if (s == "second_difference") {
        return KneeRule::second_difference;
    }
    throw std::invalid_argument("unknown knee rule: " + s);
}

namespace detail {

inline bool is_flat(const std::vector<double>& curve) {
    const auto [lo, hi] = std::minmax_element(curve.begin(), curve.end());
    return *hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi));
}

/// Least-squares line through (x, y) restricted to [first, last).
inline std::pair<double, double> fit_line(const std::vector<double>& y, std::size_t first, std::size_t last) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(last - first);
    for (std::size_t i = first; i < last; ++i) {
        const auto x = static_cast<double>(i + 1);
        sx += x;
        sy += y[i];
        sxx += x * x;
        sxy += x * y[i];
    }
    const double det = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / det;
    return {slope, (sy - slope * sx) / n};
}

} // namespace detail

/**
 * @brief Knee of an entropy curve, where `curve[t-1]` is H(t).
 *
 * two_line: the breakpoint minimizing the summed absolute residuals of separate
 * least-squares lines fitted left and right of it (both including it).
 * second_difference: argmax of the discrete second difference.
 * Flat or too-short curves give t = 1.
 */
inline int entropy_knee(const std::vector<double>& curve, KneeRule rule = KneeRule::two_line) {
    if (curve.size() < 3 || detail::is_flat(curve)) {
        return 1;
    }
    if (rule == KneeRule::second_difference) {
        int best_t = 1;
        double best = 1e-12;
        for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
            const double second = curve[i - 1] - 2.0 * curve[i] + curve[i + 1];
            if (second > best) {
                best = second;
                best_t = static_cast<int>(i) + 1;
            }
        }
        return best_t;
    }
    int best_t = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 1; b + 1 < curve.size(); ++b) {
        const auto [ml, bl] = detail::fit_line(curve, 0, b + 1);
        const auto [mr, br] = detail::fit_line(curve, b, curve.size());
        double err = 0.0;
        for (std::size_t i = 0; i <= b; ++i) {
            err += std::abs(ml * static_cast<double>(i + 1) + bl - curve[i]);
        }
        for (std::size_t i = b; i < curve.size(); ++i) {
            err += std::abs(mr * static_cast<double>(i + 1) + br - curve[i]);
        }
        if (err < best) {
            best = err;
            best_t = static_cast<int>(b) + 1;
        }
    }
    return best_t;
}

struct TimeSelection {
    int t = 1;
    std::vector<double> curve;
};

inline TimeSelection select_t(const DiffusionOperator& op, int t_max = 100, KneeRule rule = KneeRule::two_line) {
    if (t_max < 2) {
        throw std::invalid_argument("select_t: t_max must be at least 2");
    }
    TimeSelection out;
    out.curve = von_neumann_entropy(diffusion_spectrum(op), t_max);
    out.t = entropy_knee(out.curve, rule);
    return out;
}

/// P^t by repeated squaring.
inline Matrix matrix_power(const Matrix& p, int t) {
    if (t < 1) {
        throw std::invalid_argument("matrix_power: t must be positive");
    }
    Matrix result;
    Matrix base = p;
    bool first = true;
    while (t > 0) {
        if (t & 1) {
            if (first) {
                result = base;
                first = false;
            } else {
                result = (result * base).eval();
            }
        }
        t >>= 1;
        if (t > 0) {
            base = (base * base).eval();
        }
    }
    return result;
}

struct DiffusionDistance {
    /// P^t.
    Matrix powered;
    /// Information distance between rows of P^t, 0-1 normalized.
    Matrix dist;
};

inline DiffusionDistance integrated_diffusion_distance(const DiffusionOperator& op, InfoDistance kind) {
    if (op.t < 1) {
        throw std::invalid_argument("integrated_diffusion_distance: time scale not set");
    }
    DiffusionDistance out;
    out.powered = matrix_power(op.p, op.t);
    const Vector sums = out.powered.rowwise().sum();
    out.powered = sums.cwiseInverse().asDiagonal() * out.powered;
    out.dist = normalize_01(row_distances(out.powered.cwiseMax(0.0), kind), NormalizeMode::whole_matrix);
    return out;
}

/**
 * @brief Refinement loop settings.
 */
struct MashConfig {
    InfoDistance info_distance = InfoDistance::potential;
    /// Cross pairs with integrated diffusion distance below eta become candidates.
    double eta = 0.2;
    /// 0 gives MASH- (no refinement).
    int max_iterations = 10;
    int max_new_per_iter = 10;
    double holdout_fraction = 0.2;
    std::optional<int> t_override;
    int t_max = 100;
    KneeRule knee_rule = KneeRule::two_line;
    double nu = 1.0;
    double gamma = 1.0;
    /// Rebuild the final operator with every anchor, including the held-out ones.
    bool restore_holdout = false;
};

using PairSet = std::set<std::pair<Eigen::Index, Eigen::Index>>;

/**
 * @brief Writes W_XY(i, j) = nu - D(i, j) for the closest unconnected cross pairs below eta.
 *
 * At most `cfg.max_new_per_iter` pairs are added, smallest distance first with ties broken
 * lexicographically. Pairs in `excluded` or already nonzero in W_XY are skipped.
 */
inline AnchorList add_pseudo_connections(JointSimilarity& w, const Matrix& dist, const MashConfig& cfg, const PairSet& excluded) {
    std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> candidates;
    for (Eigen::Index i = 0; i < w.n_x; ++i) {
        for (Eigen::Index j = 0; j < w.n_y; ++j) {
            const double d = dist(i, w.n_x + j);
            if (d < cfg.eta && w.w(i, w.n_x + j) == 0 && !excluded.count({i, j})) {
                candidates.emplace_back(d, i, j);
            }
        }
    }
    const auto take = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(std::max(cfg.max_new_per_iter, 0)));
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end());
    AnchorList added;
    for (std::size_t c = 0; c < take; ++c) {
        const auto& [d, i, j] = candidates[c];
        w.set_cross(i, j, w.nu - d);
        added.push_back({i, j});
    }
    return added;
}

namespace detail {

struct MashPass {
    DiffusionOperator op;
    DiffusionDistance dd;
    std::vector<double> curve;
};

inline MashPass mash_pass(const JointSimilarity& w, const MashConfig& cfg) {
    MashPass pass;
    pass.op = row_normalize(w);
    if (cfg.t_override) {
        pass.op.t = *cfg.t_override;
    } else {
        auto sel = select_t(pass.op, cfg.t_max, cfg.knee_rule);
        pass.op.t = sel.t;
        pass.curve = std::move(sel.curve);
    }
    pass.dd = integrated_diffusion_distance(pass.op, cfg.info_distance);
    return pass;
}

} // namespace detail

/// FOSCTTM of held-out pairs measured directly on a joint distance matrix.
inline double holdout_foscttm(const Matrix& dist, Eigen::Index n_x, const AnchorList& held_out) {
    const Eigen::Index n_y = dist.rows() - n_x;
    return foscttm_from_cross(dist.topRightCorner(n_x, n_y), held_out);
}

/**
 * @brief Splits anchors into (training, held-out) by a seeded shuffle.
 *
 * The held-out count is floor(fraction * |anchors|), at least one, and always leaves one
 * training anchor.
 */
inline std::pair<AnchorList, AnchorList> split_holdout(const AnchorList& anchors, double fraction, RandomSource& rng) {
    if (anchors.size() < 2) {
        throw std::invalid_argument("split_holdout: need at least two anchors to hold any out");
    }
    AnchorList shuffled = anchors;
    rng.shuffle(shuffled);
    auto n_hold = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(anchors.size())));
    n_hold = std::clamp<std::size_t>(n_hold, 1, anchors.size() - 1);
    AnchorList held(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_hold));
    AnchorList train(shuffled.begin() + static_cast<std::ptrdiff_t>(n_hold), shuffled.end());
    std::sort(held.begin(), held.end());
    std::sort(train.begin(), train.end());
    return {train, held};
}

/**
 * @brief MASH with precomputed domain similarities.
 *
 * With `max_iterations == 0` every anchor is used and no refinement runs (MASH-).
 * Otherwise a held-out share of anchors scores each refinement pass; passes that do not
 * strictly lower the held-out FOSCTTM are reverted and their pairs excluded.
 */
inline AlignmentResult mash_align(const AnchorList& anchors, const DomainSimilarity& wx, const DomainSimilarity& wy,
                                  const MashConfig& cfg, int dim, RandomSource rng) {
    const Eigen::Index nx = wx.size();
    const Eigen::Index ny = wy.size();
    validate_anchors(anchors, nx, ny);
    if (anchors.empty()) {
        throw std::invalid_argument("mash_align: no anchors");
    }
    if (dim < 1 || dim > nx + ny - 1) {
        throw std::invalid_argument("mash_align: dim must be in [1, n_x + n_y - 1]");
    }
    if (cfg.max_iterations < 0 || cfg.max_new_per_iter < 1) {
        throw std::invalid_argument("mash_align: iteration caps must be positive");
    }
    if (cfg.max_iterations > 0 && !(cfg.holdout_fraction > 0 && cfg.holdout_fraction < 1)) {
        throw std::invalid_argument("mash_align: holdout_fraction must be in (0, 1)");
    }

    MashDiagnostics diag;
    AnchorList train = anchors;
    if (cfg.max_iterations > 0) {
        std::tie(train, diag.holdout_anchors) = split_holdout(anchors, cfg.holdout_fraction, rng);
    }
    diag.training_anchors = train.size();

    JointSimilarity w = build_joint_similarity(train, wx, wy, cfg.nu, cfg.gamma);
    detail::MashPass best = detail::mash_pass(w, cfg);
    diag.vne_curve = best.curve;
    if (!diag.holdout_anchors.empty()) {
        diag.initial_holdout_foscttm = holdout_foscttm(best.dd.dist, nx, diag.holdout_anchors);
    }
    double best_score = diag.initial_holdout_foscttm;

    PairSet excluded;
    std::vector<std::pair<AnchorPair, double>> kept;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        JointSimilarity candidate = w;
        AnchorList added = add_pseudo_connections(candidate, best.dd.dist, cfg, excluded);
        if (added.empty()) {
            break;
        }
        detail::MashPass pass = detail::mash_pass(candidate, cfg);
        MashIteration record;
        record.t = pass.op.t;
        record.holdout_foscttm = holdout_foscttm(pass.dd.dist, nx, diag.holdout_anchors);
        record.added = added;
        record.accepted = record.holdout_foscttm < best_score;
        if (record.accepted) {
            for (const auto& a : added) {
                kept.push_back({a, candidate.w(a.x, nx + a.y)});
            }
            w = std::move(candidate);
            best = std::move(pass);
            best_score = record.holdout_foscttm;
        } else {
            for (const auto& a : added) {
                excluded.insert({a.x, a.y});
            }
            ++diag.reverted_iterations;
        }
        diag.iterations.push_back(std::move(record));
        ++diag.iterations_run;
    }
    if (cfg.restore_holdout && !diag.holdout_anchors.empty()) {
        JointSimilarity full = build_joint_similarity(anchors, wx, wy, cfg.nu, cfg.gamma);
        for (const auto& [a, v] : kept) {
            if (full.w(a.x, nx + a.y) == 0) {
                full.set_cross(a.x, a.y, v);
            }
        }
        best = detail::mash_pass(full, cfg);
    }
    diag.t_selected = best.op.t;

    AlignmentResult out;
    out.method = cfg.max_iterations > 0 ? "mash" : "mash_minus";
    out.n_x = nx;
    out.n_y = ny;
    out.distances = best.dd.dist;
    out.coupling = best.dd.powered.topRightCorner(nx, ny);
    out.embedding = classical_mds(out.distances, dim);
    out.diagnostics = std::move(diag);
    return out;
}

inline AlignmentResult mash_align(const DomainPair& pair, const KernelParams& kparams, const MashConfig& cfg, int dim,
                                  RandomSource rng) {
    validate(pair);
    return mash_align(pair.anchors, build_domain_similarity(pair.x, kparams), build_domain_similarity(pair.y, kparams), cfg,
                      dim, std::move(rng));
}

/**
 * @brief Predicts Y labels by k-NN vote among embedded X points.
 */
inline std::vector<int> transfer_labels(const AlignmentResult& result, const std::vector<int>& labels_x, int k = 5) {
    if (static_cast<Eigen::Index>(labels_x.size()) != result.n_x) {
        throw std::invalid_argument("transfer_labels: labels must cover every X point");
    }
    if (k < 1 || k > result.n_x) {
        throw std::invalid_argument("transfer_labels: k must be in [1, n_x]");
    }
    return knn_vote(result.coords().topRows(result.n_x), labels_x, result.coords().bottomRows(result.n_y), k);
}

} // namespace mashspud

#endif
