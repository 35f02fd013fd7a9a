#pragma once
// Canned network constructors.  Every builder returns a spec that passes
// validate_spec and whose traffic solution matches the closed form noted in
// the implementation.

#include <cstdint>
#include <vector>

#include "swq/analysis.hpp"
#include "swq/network.hpp"
#include "swq/policy.hpp"

namespace swq {

struct TaggedBuild {
    NetworkSpec spec;
    ComponentTags tags;
};

// Two-component network: hubs A0/B0 exit after service, spread queues cross
// into the opposite hub, and each component's external stream of rate a lands
// uniformly on its J spread queues (one dispatch draw per step by default;
// per_queue_arrivals switches to independent Bernoulli(a/J) streams).  Unit
// jobs.  One constraint row per component: sigma_hub + (1/nu) sum sigma_spread
// <= 1.  Loads: hub a, spread a/J.
TaggedBuild build_instability_network(double a, int64_t nu, int64_t J,
                                      bool per_queue_arrivals = false);

// Chain of J queues, entry rate a at the first, unit jobs, every queue its own
// constraint sigma_j <= capacity_j (all 1 when omitted).  Loads: all a.
NetworkSpec build_tandem(int64_t J, double a, std::vector<double> capacities = {});

// Rooted out-tree; parent[0] = -1 and parent[j] < j.  entry_prob[j] is the
// routing probability from parent[j] into j (per-node child sums <= 1, the
// remainder exits); the root receives external rate a.  Unit jobs, per-queue
// capacity rows.  Loads: a times the product of entry probabilities on the
// root path.
NetworkSpec build_pure_branching(const std::vector<int>& parent, double a,
                                 const std::vector<double>& entry_prob,
                                 std::vector<double> capacities = {});

// Four queues A0, A1, B0, B1.  A0 and B0 are single-class with external rate
// a; A1 and B1 each hold K classes chained in place (class i feeds class i+1
// in the same queue, the last exits); A0 feeds B1's first class and B0 feeds
// A1's first class.  Unit jobs.  Rows: eps*sigma_A0 + eps^2*sigma_A1 <= 1 and
// the B mirror.  Every class has rate a.
TaggedBuild build_multiclass_rs(double a, double epsilon, int64_t K);

// Same topology with the K-class chains collapsed to one class of geometric
// mean size m = (1-2*eps)/eps^2, i.e. p_A1 = p_B1 = eps^2/(1-2*eps).
TaggedBuild build_collapsed_rs(double a, double epsilon);

struct LqfsBuild {
    NetworkSpec spec;
    ComponentTags tags;
    PolicyConfig policy;
};

// The two-component network paired with the batch policy that maximizes
// Q_hub sigma_hub + (1/nu) sum Q_spread sigma_spread per component.
LqfsBuild build_lqfs_network(double a, int64_t nu, int64_t J);

}  // namespace swq
