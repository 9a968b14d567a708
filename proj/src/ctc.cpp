#include "mvst/ctc.hpp"

#include "mvst/error.hpp"
#include "mvst/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvst {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b)
{
    if (a == neg_inf) {
        return b;
    }
    if (b == neg_inf) {
        return a;
    }
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

std::vector<std::size_t> extended_labels(const GlossSequence& target)
{
    std::vector<std::size_t> ext(2 * target.size() + 1, ctc_blank);
    for (std::size_t n = 0; n < target.size(); ++n) {
        ext[2 * n + 1] = target[n] + 1;
    }
    return ext;
}

// Whether state s may be entered from s - 2 (skipping a blank).
bool can_skip(const std::vector<std::size_t>& ext, std::size_t s)
{
    return s >= 2 && ext[s] != ctc_blank && ext[s] != ext[s - 2];
}

struct Recursion {
    std::vector<std::size_t> ext;
    std::vector<double> alpha; // U x S, includes emission at t
    std::vector<double> beta;  // U x S, excludes emission at t
    double log_prob = neg_inf;
};

void check_target(const LogProbLattice& lattice, const GlossSequence& target)
{
    for (auto g : target) {
        if (g + 1 >= lattice.classes) {
            throw DimensionError("ctc: gloss id " + std::to_string(g) + " outside lattice with "
                                 + std::to_string(lattice.classes) + " columns");
        }
    }
}

Recursion run_recursion(const LogProbLattice& lp, const GlossSequence& target, bool with_beta)
{
    Recursion r;
    r.ext = extended_labels(target);
    const std::size_t u = lp.positions;
    const std::size_t s_count = r.ext.size();
    r.alpha.assign(u * s_count, neg_inf);
    auto alpha = [&](std::size_t t, std::size_t s) -> double& { return r.alpha[t * s_count + s]; };

    alpha(0, 0) = lp(0, r.ext[0]);
    if (s_count > 1) {
        alpha(0, 1) = lp(0, r.ext[1]);
    }
    for (std::size_t t = 1; t < u; ++t) {
        for (std::size_t s = 0; s < s_count; ++s) {
            double acc = alpha(t - 1, s);
            if (s >= 1) {
                acc = log_add(acc, alpha(t - 1, s - 1));
            }
            if (can_skip(r.ext, s)) {
                acc = log_add(acc, alpha(t - 1, s - 2));
            }
            alpha(t, s) = acc == neg_inf ? neg_inf : acc + lp(t, r.ext[s]);
        }
    }
    r.log_prob = alpha(u - 1, s_count - 1);
    if (s_count > 1) {
        r.log_prob = log_add(r.log_prob, alpha(u - 1, s_count - 2));
    }

    if (with_beta) {
        r.beta.assign(u * s_count, neg_inf);
        auto beta = [&](std::size_t t, std::size_t s) -> double& { return r.beta[t * s_count + s]; };
        beta(u - 1, s_count - 1) = 0.0;
        if (s_count > 1) {
            beta(u - 1, s_count - 2) = 0.0;
        }
        for (std::size_t t = u - 1; t-- > 0;) {
            for (std::size_t s = 0; s < s_count; ++s) {
                double acc = neg_inf;
                for (std::size_t next = s; next <= s + 2 && next < s_count; ++next) {
                    if (next == s + 2 && !can_skip(r.ext, next)) {
                        continue;
                    }
                    const double b = beta(t + 1, next);
                    if (b != neg_inf) {
                        acc = log_add(acc, b + lp(t + 1, r.ext[next]));
                    }
                }
                beta(t, s) = acc;
            }
        }
    }
    return r;
}

} // namespace

LogProbLattice LogProbLattice::from_tensor(const Tensor& log_probs)
{
    if (log_probs.rank() != 2) {
        throw DimensionError("lattice tensor must be rank 2, got " + shape_string(log_probs.shape()));
    }
    LogProbLattice l;
    l.positions = log_probs.dim(0);
    l.classes = log_probs.dim(1);
    l.values.assign(log_probs.values().begin(), log_probs.values().end());
    return l;
}

LogProbLattice LogProbLattice::from_logits(std::size_t positions, std::size_t classes,
                                           const std::vector<double>& logits)
{
    if (logits.size() != positions * classes) {
        throw DimensionError("lattice logits: expected " + std::to_string(positions * classes)
                             + " values, got " + std::to_string(logits.size()));
    }
    LogProbLattice l{positions, classes, logits};
    for (std::size_t t = 0; t < positions; ++t) {
        double* row = l.values.data() + t * classes;
        double lse = neg_inf;
        for (std::size_t c = 0; c < classes; ++c) {
            lse = log_add(lse, row[c]);
        }
        for (std::size_t c = 0; c < classes; ++c) {
            row[c] -= lse;
        }
    }
    return l;
}

void LogProbLattice::validate(double tol) const
{
    if (values.size() != positions * classes || classes == 0) {
        throw DimensionError("lattice storage does not match its extents");
    }
    for (std::size_t t = 0; t < positions; ++t) {
        double lse = neg_inf;
        for (std::size_t c = 0; c < classes; ++c) {
            lse = log_add(lse, (*this)(t, c));
        }
        if (!(std::abs(lse) <= tol)) {
            throw NumericError("lattice row " + std::to_string(t) + " log-sums to "
                               + std::to_string(lse) + ", not 0");
        }
    }
}

GlossSequence collapse(const AlignmentPath& path)
{
    GlossSequence out;
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (auto c : path) {
        if (c != prev && c != ctc_blank) {
            out.push_back(c - 1);
        }
        prev = c;
    }
    return out;
}

std::size_t ctc_min_positions(const GlossSequence& target)
{
    std::size_t n = target.size();
    for (std::size_t i = 1; i < target.size(); ++i) {
        if (target[i] == target[i - 1]) {
            ++n;
        }
    }
    return n;
}

CtcScore ctc_log_prob(const LogProbLattice& lattice, const GlossSequence& target)
{
    check_target(lattice, target);
    if (lattice.positions == 0 || lattice.positions < ctc_min_positions(target)) {
        return {neg_inf, false};
    }
    return {run_recursion(lattice, target, false).log_prob, true};
}

namespace {

constexpr std::size_t brute_force_limit = 1'000'000;

// Calls visit(path, log_prob) for every path over the lattice.
template <typename Visit>
void enumerate_paths(const LogProbLattice& lattice, Visit&& visit)
{
    std::size_t total = 1;
    for (std::size_t t = 0; t < lattice.positions; ++t) {
        total *= lattice.classes;
        if (total > brute_force_limit) {
            throw ConfigError("brute-force CTC: instance too large ("
                              + std::to_string(lattice.classes) + "^"
                              + std::to_string(lattice.positions) + " paths)");
        }
    }
    AlignmentPath path(lattice.positions, 0);
    for (std::size_t index = 0; index < total; ++index) {
        std::size_t rest = index;
        double lp = 0.0;
        for (std::size_t t = lattice.positions; t-- > 0;) {
            path[t] = rest % lattice.classes;
            rest /= lattice.classes;
            lp += lattice(t, path[t]);
        }
        visit(path, lp);
    }
}

} // namespace

double brute_force_prob(const LogProbLattice& lattice, const GlossSequence& target)
{
    check_target(lattice, target);
    double total = 0.0;
    enumerate_paths(lattice, [&](const AlignmentPath& path, double lp) {
        if (collapse(path) == target) {
            total += std::exp(lp);
        }
    });
    return total;
}

std::map<GlossSequence, double> brute_force_distribution(const LogProbLattice& lattice)
{
    std::map<GlossSequence, double> dist;
    enumerate_paths(lattice, [&](const AlignmentPath& path, double lp) {
        dist[collapse(path)] += std::exp(lp);
    });
    return dist;
}

CtcVariant parse_ctc_variant(const std::string& name)
{
    if (name == "nll") {
        return CtcVariant::nll;
    }
    if (name == "paper") {
        return CtcVariant::paper;
    }
    throw ConfigError("unknown ctc loss variant '" + name + "' (expected nll or paper)");
}

std::string to_string(CtcVariant variant)
{
    return variant == CtcVariant::nll ? "nll" : "paper";
}

Tensor ctc_loss(const Tensor& log_probs, const GlossSequence& target, CtcVariant variant)
{
    auto lattice = LogProbLattice::from_tensor(log_probs);
    check_target(lattice, target);
    const bool feasible
        = lattice.positions > 0 && lattice.positions >= ctc_min_positions(target);
    if (!feasible) {
        log_warning("ctc: target of length " + std::to_string(target.size())
                    + " cannot be aligned to " + std::to_string(lattice.positions) + " positions");
        const double value = variant == CtcVariant::nll ? std::numeric_limits<double>::infinity() : 1.0;
        return Tensor::from_op({}, {value}, {log_probs}, [](std::span<const double>) {});
    }

    auto rec = run_recursion(lattice, target, true);
    const double log_p = rec.log_prob;
    const double value = variant == CtcVariant::nll ? -log_p : 1.0 - std::exp(log_p);

    // d(log p)/d lp[t][c] = sum over states s labelled c of exp(alpha + beta - log p).
    const std::size_t u = lattice.positions, classes = lattice.classes, s_count = rec.ext.size();
    std::vector<double> dlogp(u * classes, 0.0);
    if (log_p != neg_inf) {
        for (std::size_t t = 0; t < u; ++t) {
            for (std::size_t s = 0; s < s_count; ++s) {
                const double a = rec.alpha[t * s_count + s];
                const double b = rec.beta[t * s_count + s];
                if (a != neg_inf && b != neg_inf) {
                    dlogp[t * classes + rec.ext[s]] += std::exp(a + b - log_p);
                }
            }
        }
    }
    const double factor = variant == CtcVariant::nll ? -1.0 : -std::exp(log_p);
    return Tensor::from_op({}, {value}, {log_probs},
                           [lp = log_probs, dlogp = std::move(dlogp), factor](
                               std::span<const double> g) mutable {
                               if (!lp.requires_grad()) {
                                   return;
                               }
                               auto gl = lp.grad_buffer();
                               for (std::size_t i = 0; i < gl.size(); ++i) {
                                   gl[i] += g[0] * factor * dlogp[i];
                               }
                           });
}

GlossSequence best_path_decode(const LogProbLattice& lattice)
{
    AlignmentPath path(lattice.positions);
    for (std::size_t t = 0; t < lattice.positions; ++t) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < lattice.classes; ++c) {
            if (lattice(t, c) > lattice(t, best)) {
                best = c;
            }
        }
        path[t] = best;
    }
    return collapse(path);
}

} // namespace mvst
