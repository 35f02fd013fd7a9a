#pragma once
// Discrete-time stochastic engine.  One step, in this exact order:
//
//   1. schedule sigma from the policy, evaluated on Q(t-1);
//   2. per queue, cap the allocation at the current length; each unit of
//      service tries to complete the head-of-line job, which succeeds with
//      the job's class probability p_k (geometric sizes are memoryless, so a
//      failed job simply stays at the head);
//   3. completed jobs are routed by one categorical draw over row k of the
//      routing matrix, with the residual mass meaning "leave the network";
//   4. routed jobs are appended to their destination buffers (source-queue
//      order), then external arrivals (dispatch groups in group order, then
//      ungrouped classes in class order); nothing arriving at step t can be
//      served at step t;
//   5. counters and t advance.
//
// Randomness comes from three fixed substreams (arrivals, service, routing)
// plus a fourth for policy tie-breaks, so swapping the policy never perturbs
// the arrival or service draws.

#include <cstdint>
#include <deque>
#include <vector>

#include "swq/network.hpp"
#include "swq/policy.hpp"
#include "swq/rng.hpp"

namespace swq {

struct SimCounters {
    std::vector<int64_t> external;    // per class
    std::vector<int64_t> arrivals;    // per class, external plus routed
    std::vector<int64_t> departures;  // per class
    std::vector<int64_t> service;     // per queue, capped allocation
    std::vector<std::vector<int64_t>> routed;  // [from class][to class]
    std::vector<int64_t> exited;      // per class
};

struct Trajectory {
    std::vector<int64_t> t;                  // strictly increasing samples
    std::vector<std::vector<int64_t>> qlen;  // per sample, per queue
    std::vector<std::vector<int64_t>> clen;  // per sample, per class; empty when single-class
    std::vector<int64_t> total;
    std::vector<std::vector<int64_t>> sigma;  // schedule applied in the step ending at t
};

class Sim {
public:
    // The policy config must be fully resolved (explicit weights, no
    // sentinels).  Throws std::invalid_argument on kind/weight mismatches.
    Sim(const NetworkSpec& spec, const PolicyConfig& policy, uint64_t seed);

    // Seeds the initial buffer contents; only valid before the first step.
    void add_initial(int cls, int64_t count);

    void step();

    // Runs `steps` further steps, recording the entry state, every
    // record_every-th step, and the final step.  steps and record_every >= 1.
    Trajectory run(int64_t steps, int64_t record_every);

    int64_t t() const { return t_; }
    const std::vector<int64_t>& qlen() const { return qlen_; }
    const std::vector<int64_t>& clen() const { return clen_; }
    int64_t total() const;
    const SimCounters& counters() const { return ctr_; }
    const std::vector<int64_t>& last_sigma() const { return last_sigma_; }
    const NetworkSpec& spec() const { return *spec_; }

    // Every-step conservation checks (default on in debug builds); the
    // release default still spot-checks every 10^4 steps.
    void set_paranoid(bool on) { paranoid_ = on; }

    // Verifies flow conservation and buffer/counter agreement; throws
    // std::runtime_error with a diagnostic on any violation.
    void check_conservation() const;

    // Head-of-line sequence number for a class's buffer (FIFO inspection
    // hook for tests); -1 when empty.
    int64_t front_seq(int cls) const;

private:
    const NetworkSpec* spec_;
    PolicyConfig pol_;
    ArgmaxEngine eng_;
    Rng arr_rng_, svc_rng_, rte_rng_, tie_rng_;

    std::vector<std::deque<uint64_t>> buf_;  // per class, FIFO of sequence numbers
    std::vector<int64_t> qlen_, clen_, q0_, c0_;
    SimCounters ctr_;
    std::vector<std::vector<double>> cumrow_;  // per class, cumulative routing row
    std::vector<int64_t> last_sigma_;
    std::vector<int> staged_;  // destination classes of this step's routed jobs
    int64_t t_ = 0;
    uint64_t seq_ = 0;
    bool paranoid_;

    void append_job(int cls);
    Schedule compute_schedule();
};

}  // namespace swq
