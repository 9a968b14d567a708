#pragma once

#include "mvst/tensor.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace mvst {

/// Gloss ids in [0, vocab).
using GlossSequence = std::vector<std::size_t>;

/// One lattice column per CTC symbol: 0 is blank, gloss g is column g + 1.
using AlignmentPath = std::vector<std::size_t>;

inline constexpr std::size_t ctc_blank = 0;

/// U x (vocab + 1) per-position log-probabilities, row-major.
struct LogProbLattice {
    std::size_t positions = 0;
    std::size_t classes = 0;
    std::vector<double> values;

    double operator()(std::size_t t, std::size_t c) const { return values[t * classes + c]; }

    static LogProbLattice from_tensor(const Tensor& log_probs);
    /// Row-wise log_softmax of arbitrary scores.
    static LogProbLattice from_logits(std::size_t positions, std::size_t classes,
                                      const std::vector<double>& logits);
    /// Throws NumericError unless every row log-sum-exps to 0 within tol.
    void validate(double tol = 1e-9) const;
};

/// Merge consecutive repeats, then drop blanks; maps columns back to gloss ids.
GlossSequence collapse(const AlignmentPath& path);

/// Blanks needed beyond |G|: one between each pair of equal neighbours.
std::size_t ctc_min_positions(const GlossSequence& target);

struct CtcScore {
    double log_prob = 0.0;
    /// False when no alignment of length U can produce the target; then
    /// log_prob is -infinity by definition rather than by underflow.
    bool feasible = true;
};

/// log p(G | lattice) by the forward recursion over the blank-interleaved target.
CtcScore ctc_log_prob(const LogProbLattice& lattice, const GlossSequence& target);

/// Sum of path probabilities over all (classes^U) paths collapsing to the
/// target. Throws ConfigError when classes^U exceeds 10^6.
double brute_force_prob(const LogProbLattice& lattice, const GlossSequence& target);

/// Probability mass of every collapsed output, by exhaustive enumeration.
std::map<GlossSequence, double> brute_force_distribution(const LogProbLattice& lattice);

enum class CtcVariant {
    nll,  ///< -log p(G|I)
    paper ///< 1 - p(G|I)
};

CtcVariant parse_ctc_variant(const std::string& name);
std::string to_string(CtcVariant variant);

/// Differentiable CTC loss on a [U x classes] tensor of log-probabilities.
/// Infeasible targets give +inf (nll) or 1 (paper) with zero gradient and
/// a logged diagnostic.
Tensor ctc_loss(const Tensor& log_probs, const GlossSequence& target, CtcVariant variant);

/// Per-position argmax (ties to the lower column, so blank wins), then collapse.
GlossSequence best_path_decode(const LogProbLattice& lattice);

} // namespace mvst
