#ifndef MASHSPUD_ALIGNMENT_HPP
#define MASHSPUD_ALIGNMENT_HPP

#include "data.hpp"
#include "embed.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mashspud {

/// One pass of the pseudo-connection loop.
struct MashIteration {
    int t = 0;
    double holdout_foscttm = 0.0;
    bool accepted = false;
    AnchorList added;
};

struct MashDiagnostics {
    int t_selected = 0;
    std::vector<double> vne_curve;
    int iterations_run = 0;
    std::size_t training_anchors = 0;
    AnchorList holdout_anchors;
    /// Held-out FOSCTTM of the initial operator.
    double initial_holdout_foscttm = 0.0;
    std::vector<MashIteration> iterations;
    int reverted_iterations = 0;

    /// Held-out scores of the initial pass and every accepted iteration, in order.
    std::vector<double> accepted_trace() const {
        std::vector<double> out{initial_holdout_foscttm};
        for (const auto& it : iterations) {
            if (it.accepted) {
                out.push_back(it.holdout_foscttm);
            }
        }
        return out;
    }
};

/**
 * @brief Output of every alignment method: a joint embedding with X rows first.
 */
struct AlignmentResult {
    std::string method;
    Embedding embedding;
    Eigen::Index n_x = 0;
    Eigen::Index n_y = 0;
    /// The joint distance matrix that was embedded (empty for spectral baselines).
    Matrix distances;
    /// Cross-domain block of the powered diffusion operator (MASH only).
    std::optional<Matrix> coupling;
    std::optional<MashDiagnostics> diagnostics;

    const Matrix& coords() const { return embedding.coords; }
};

} // namespace mashspud

#endif
