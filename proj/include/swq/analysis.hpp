#pragma once
// Static network analysis (traffic rates, load margins, instability parameter
// conditions) and trajectory analysis (drain/reload cycle instrumentation,
// arrival concentration, stability proxies).

#include <cstdint>
#include <string>
#include <vector>

#include "swq/network.hpp"
#include "swq/rational.hpp"
#include "swq/sim.hpp"

namespace swq {

struct TrafficSolution {
    std::vector<double> lambda;     // per class: total arrival rate
    std::vector<double> rho_class;  // lambda_k / p_k
    std::vector<double> rho_queue;  // sum of rho_class over the queue's classes
    // max over constraint rows of <c, rho>/bound; NaN for explicit-form sets
    double r_rho = 0.0;
    double residual = 0.0;  // max |lambda - a - lambda P|
};

// Solves lambda = a + lambda P directly; throws std::runtime_error when I - P
// is singular (the network is not open: some class never exits).
TrafficSolution traffic_solve(const NetworkSpec& spec);

enum class Criticality { Interior, Boundary, Supercritical };

struct SubcritReport {
    Criticality status = Criticality::Supercritical;
    // Both routes report the same convention: scale is the largest e with
    // e*rho still feasible, margin = 1 - 1/scale, eps_feasible = scale - 1
    // (the largest eps such that rho(1+eps) stays feasible).
    double margin = 0.0;
    double scale = 0.0;
    double eps_feasible = 0.0;
    std::string route;  // "constraints" or "hull_lp"
};

// ResourceConstrained sets: per-row load ratios.  Explicit sets: a small LP
// deciding the largest scaling of rho inside the convex hull of the points.
// Throws std::runtime_error when an explicit set is too large for the LP.
SubcritReport subcritical_check(const NetworkSpec& spec, const TrafficSolution& traffic,
                                size_t lp_point_limit = 200000);

// Parameter conditions for the two instability constructions on the
// two-component network: unweighted MaxWeight, and the batch variant that
// weighs spread queues by 1/nu.  All arithmetic is exact.
enum class InstabilityKind { MaxWeight, BatchLqfs };

struct ConditionReport {
    struct Item {
        std::string name;
        std::string detail;
        bool pass;
    };
    std::vector<Item> items;
    bool all_pass = false;
    Rational a_lower, a_upper;  // admissible open interval for a
    Rational r_rho;             // a(1 + 1/nu)
    Rational gamma_max;         // supremum of admissible per-cycle growth factors
};

ConditionReport instability_conditions(InstabilityKind kind, const Rational& a, int64_t nu,
                                     int64_t J);

// Queue indices of the two components' hub and spread queues.
struct ComponentTags {
    int a0 = -1;
    std::vector<int> a_spread;
    int b0 = -1;
    std::vector<int> b_spread;
};

struct CycleRecord {
    int64_t start = 0;  // cycle boundaries are sample times
    int64_t U = 0;      // loaded component first drained to <= nu^2
    int64_t V = 0;      // receiving hub first back in balance with its spread
    char component = 'A';  // which component was loaded (draining) this cycle
    double M = 0.0;        // loaded component mass at start
    double M_next = 0.0;   // receiving component mass at V
    double growth = 0.0;   // M_next / M
    double predicted_V = 0.0;  // start + (J/(J+nu)) M / (1 - a + a nu/J); nu -> 1 primed
    double balance_gap = 0.0;  // max_j |hub - mult * spread_j| at V
};

struct CycleScan {
    std::vector<CycleRecord> cycles;
    double mean_growth = 0.0;      // arithmetic mean
    double geo_mean_growth = 0.0;  // exp(mean log)
    std::string diagnostic;        // set when no complete cycle was found
};

// Scans a two-component trajectory for alternating drain/reload cycles.  The
// loaded component drains until its mass is <= nu^2 (time U); the opposite
// hub, which has been absorbing that mass, then spreads out until it is within
// mult * its largest spread queue (time V), where mult = nu normally and 1 in
// primed (batch-variant) mode; roles then swap.  Cycles whose starting mass is
// <= nu^2 are warm-up artifacts and are not reported.
CycleScan detect_cycles(const Trajectory& traj, const ComponentTags& tags, int64_t nu,
                        double a, bool primed);

// Fraction of independent Bernoulli(rate) arrival streams whose centered
// counting process stays within delta*T over the whole horizon, i.e.
// sup_{0<=s<=t<=T} |N(t)-N(s) - rate(t-s)| <= delta*T.
double concentration_pass_rate(double rate, int64_t T, double delta, int trials,
                               uint64_t seed);
// Same, with the rate taken from the spec's designated spread stream (first
// dispatch group's per-member rate, else the smallest positive arrival rate).
double concentration_pass_rate(const NetworkSpec& spec, int64_t T, double delta, int trials,
                               uint64_t seed);

struct StabilityProxy {
    double empty_fraction = 0.0;   // fraction of samples with empty network
    double time_avg_total = 0.0;   // mean total over the second half
    double drift_slope = 0.0;      // least-squares slope of total vs t
    double drift_slope_se = 0.0;   // jackknife standard error (10 blocks); NaN if short
    int64_t samples = 0;
};

StabilityProxy stability_proxy(const Trajectory& traj);

}  // namespace swq
