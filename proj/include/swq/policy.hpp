#pragma once
// Scheduling policies.  All of them reduce to an exact integer argmax of
// sum_j v_j * sigma_j over the schedule set for some per-queue value vector v:
//
//   MaxWeight                     v_j = Q_j
//   WeightedMaxWeight / LQFSBatch v_j = w_j Q_j
//   BackPressure                  v_j = max(0, Q_j - sum_j' P_jj' Q_j')
//   LargestClassWeightedMaxWeight v_j = max over classes k at j of w_k Qk
//                                 (the winning class receives the whole
//                                  allocation, recorded in class_split)
//
// Policies are pure: the service cap (never more than the queue holds) is the
// engine's job, and a policy may well schedule more than is present.
//
// Exactness: for a constraint row whose coefficients are unit fractions of the
// bound (c_j = bound/m_j, integer m_j -- every built-in network except the
// two-queue epsilon/epsilon^2 row), the integer optimum provably puts the whole
// budget on one queue, the one maximizing v_j*m_j; ties resolve to the largest
// index under Lexicographic (that allocation is the lexicographically smallest
// maximizer).  Other rows get a small exact branch-and-bound over the support.

#include <cstdint>
#include <optional>
#include <vector>

#include "swq/network.hpp"
#include "swq/rng.hpp"

namespace swq {

enum class PolicyKind {
    MaxWeight,
    WeightedMaxWeight,
    LargestClassWeightedMaxWeight,
    LQFSBatch,
    BackPressure,
    ProportionalScheduler,
};

enum class TieBreak { Lexicographic, SeededRandom };

struct PolicyConfig {
    PolicyKind kind = PolicyKind::MaxWeight;
    // Per-queue weights; empty means unit weights.  Callers resolve the
    // "auto_rho" config sentinel to 1/rho_j before constructing policies.
    std::vector<double> weights;
    // Per-class weights for the largest-class policy (1/rho_k, stored
    // explicitly by callers).
    std::vector<double> class_weights;
    TieBreak tie_break = TieBreak::Lexicographic;
    uint64_t seed = 0;  // tie-break / rounding substream
};

struct Schedule {
    std::vector<int64_t> sigma;                         // per queue
    std::optional<std::vector<int64_t>> class_split;    // per class, when targeted
};

// Shared integer/continuous argmax over one schedule set.  Built once per
// (spec, policy); reused every step.
class ArgmaxEngine {
public:
    ArgmaxEngine(const ScheduleSet& set, size_t n_queues);

    // Exact integer argmax of <v, sigma>; v must be nonnegative.  Queues with
    // v_j == 0 receive nothing (so the zero vector yields the zero schedule
    // and back-pressure never serves nonpositive weight).
    // Throws std::invalid_argument for RC sets with overlapping supports.
    std::vector<int64_t> integer_argmax(const std::vector<double>& v, TieBreak tie,
                                        Rng* tie_rng) const;

    // Vertex maximizer of <v, sigma> over the continuous relaxation (RC: the
    // polytope <c,sigma> <= bound; Explicit: the convex hull).  Lexicographic
    // tie handling, zero-value queues get nothing.
    std::vector<double> continuous_argmax(const std::vector<double>& v) const;

    // Max of <v, sigma> over the relaxation, computed without materializing an
    // argmax (independent route, used to cross-check Lyapunov identities).
    double continuous_max_value(const std::vector<double>& v) const;

    const ScheduleSet& set() const { return *set_; }
    size_t n_queues() const { return n_; }

private:
    const ScheduleSet* set_;
    size_t n_;
    // flattened per-row support caches for the RC hot path
    struct RowCache {
        std::vector<int> support;
        std::vector<double> coeff;
        std::vector<double> units;  // max_units as double (harmonic density scale)
        std::vector<int64_t> units_i;
        double bound;
        bool harmonic;
    };
    std::vector<RowCache> rows_;
    mutable std::vector<double> scratch_v_;  // gathered values per support

    void row_argmax_exact(const RowCache& row, const std::vector<double>& v, TieBreak tie,
                          Rng* tie_rng, std::vector<int64_t>& out) const;
};

Schedule max_weight_schedule(const ArgmaxEngine& eng, const std::vector<int64_t>& qlen,
                             const std::vector<double>& weights, TieBreak tie, Rng* tie_rng);

Schedule back_pressure_schedule(const ArgmaxEngine& eng, const NetworkSpec& spec,
                                const std::vector<int64_t>& qlen, TieBreak tie, Rng* tie_rng);

// Needs per-class lengths; allocation per queue goes wholly to the class
// maximizing class_weights[k] * clen[k] (smallest class index on ties).
Schedule largest_class_schedule(const ArgmaxEngine& eng, const NetworkSpec& spec,
                                const std::vector<int64_t>& clen,
                                const std::vector<double>& class_weights, TieBreak tie,
                                Rng* tie_rng);

// Proportional-fairness scheduler: continuous optimum sigma*_j =
// (Q_j / sum Q over the row's positive queues) * bound / c_j, then a
// mean-preserving randomized rounding (floor + pairwise pipage on the
// fractional cost mass; never exceeds the budget).  RC disjoint rows only.
Schedule proportional_schedule(const ArgmaxEngine& eng, const std::vector<int64_t>& qlen,
                               Rng& rng);
std::vector<double> proportional_fractional(const ArgmaxEngine& eng,
                                            const std::vector<int64_t>& qlen);

}  // namespace swq
