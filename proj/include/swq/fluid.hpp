#pragma once
// Deterministic fluid (mean-drift) integrator for single-class networks, with
// Lyapunov monitors used by the stability certificates.
//
// Dynamics, explicit Euler with step dt: the service vector is the continuous
// argmax of sum_j w_j Qbar_j sigma_j over the relaxed schedule set (a vertex;
// lexicographic choice on ties), the drain rate is p_j sigma*_j capped at
// Qbar_j/dt so mass never goes negative, and inflow is external rate plus
// routed drain.  Piecewise-linear dynamics make higher-order schemes
// pointless; tie chattering converges to the sliding motion at O(dt), which
// the certificate tolerance absorbs.
//
// Monitors (rho_j = lambda_j / p_j is the per-queue load):
//   g        total mass sum_j Qbar_j
//   h        max_sigma sum_j Qbar_j (sigma_j / rho_j - 1), the load-scaled
//            service headroom; decays at a certified rate under 1/rho weights
//   f        sum_j Qbar_j rate_j / lambda_j with rate the last uncapped
//            service rate; h = f - g exactly when rate is the 1/rho-weighted
//            argmax rate (the decomposition the h certificate relies on)
//   g_branch max_sigma sum_j Qbar_j (sigma_j - rho_j), the unweighted variant
//            certified on branching (tree-routed) networks

#include <cstdint>
#include <string>
#include <vector>

#include "swq/network.hpp"
#include "swq/policy.hpp"

namespace swq {

struct FluidState {
    double t = 0.0;
    std::vector<double> q;      // per-queue mass
    std::vector<double> arr;    // cumulative inflow
    std::vector<double> dep;    // cumulative drain
    std::vector<double> alloc;  // cumulative scheduled service time
    std::vector<double> rate;   // last uncapped service rate p_j sigma*_j
    std::vector<double> drain;  // last applied (capped) drain rate
};

enum class LyapunovFn { H, F, G, GBranch };

struct LyapunovReading {
    double t = 0.0;
    double h = 0.0, f = 0.0, g = 0.0, g_branch = 0.0;
    double left_slope = 0.0;  // backward difference of h over one step
};

struct FluidRun {
    std::vector<FluidState> states;        // thinned to record_every steps
    std::vector<LyapunovReading> readings; // every step
    FluidState final_state;
    double dt = 0.0;
    bool emptied = false;
    double empty_time = -1.0;
    double empty_threshold = 0.0;  // declared empty when total mass < this
};

class FluidIntegrator {
public:
    // weights: all-ones for the plain fluid, 1/rho for the weighted one.
    // Single-class specs only; throws std::invalid_argument otherwise.
    FluidIntegrator(const NetworkSpec& spec, const std::vector<double>& weights, double dt);

    void step(FluidState& s) const;
    // fills rate/drain for the current q without advancing the state
    void rates(FluidState& s) const;
    LyapunovReading read(const FluidState& s, double prev_h) const;
    FluidState initial(const std::vector<double>& q0) const;

    // dt times the network-wide maximum drain rate: below this much total
    // mass, one step can finish the job, so the run declares empty.
    double empty_threshold() const { return empty_threshold_; }
    const std::vector<double>& lambda() const { return lambda_; }
    const std::vector<double>& rho() const { return rho_; }

private:
    const NetworkSpec* spec_;
    std::vector<double> weights_;
    double dt_;
    ArgmaxEngine eng_;
    std::vector<double> lambda_, rho_;
    double empty_threshold_;
    mutable std::vector<double> v_, sigma_, inflow_;  // scratch
};

// One Euler step through a throwaway integrator (test convenience).
FluidState fluid_step(const FluidState& s, const NetworkSpec& spec,
                      const std::vector<double>& weights, double dt);

// Integrates from q0 (|q0|_1 <= 1) until t_max or declared empty; states are
// recorded every record_every steps plus the final one, readings every step.
FluidRun fluid_run(const NetworkSpec& spec, const std::vector<double>& weights,
                   const std::vector<double>& q0, double dt, double t_max,
                   int64_t record_every = 1);

// Exact evaluation of one monitor at a state; lambda is the traffic solution.
// Throws std::runtime_error when a queue holds mass but has zero traffic rate.
double lyapunov_eval(const FluidState& s, const NetworkSpec& spec,
                     const std::vector<double>& lambda, LyapunovFn which);

// 1/rho_queue from the traffic equations (weights for the stabilized policy).
std::vector<double> make_rho_weights(const NetworkSpec& spec);

struct CertificateReport {
    std::string monitored;  // "h" or "g_branch"
    double bound = 0.0;     // required decay rate (positive number)
    double tolerance = 0.0; // 10 dt * observed Lipschitz constant
    double window = 0.0;    // slope window in time units
    double worst_slope = 0.0;
    double worst_interval_start = 0.0, worst_interval_end = 0.0;
    bool pass = false;
    bool emptied = false;
    double empty_time = -1.0;
};

// Checks that every windowed slope of the monitored function, while mass
// remains, is <= -bound + tolerance.  Interval slopes rather than pointwise
// derivatives keep argmax chattering from producing false failures.
CertificateReport decay_certificate(const FluidRun& run, LyapunovFn which, double bound,
                                    double window = 0.05);

}  // namespace swq
