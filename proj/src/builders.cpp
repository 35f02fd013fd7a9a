#include "swq/builders.hpp"

#include <stdexcept>
#include <string>

namespace swq {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument("builder: " + msg);
}

// single-class spec skeleton with one class per queue and zero routing
NetworkSpec skeleton(std::vector<std::string> ids) {
    NetworkSpec spec;
    spec.queue_ids = ids;
    spec.class_ids = std::move(ids);
    size_t n = spec.queue_ids.size();
    spec.class_queue.resize(n);
    for (size_t k = 0; k < n; ++k) spec.class_queue[k] = static_cast<int>(k);
    spec.arrival_rate.assign(n, 0.0);
    spec.service_p.assign(n, 1.0);
    spec.routing.assign(n, std::vector<double>(n, 0.0));
    return spec;
}

void finish(NetworkSpec& spec) {
    spec.schedule_set.finalize(spec.n_queues());
    spec.finalize();
    auto problems = validate_spec(spec);
    if (!problems.empty()) throw std::logic_error("builder produced invalid spec: " + problems.front());
}

}  // namespace

TaggedBuild build_instability_network(double a, int64_t nu, int64_t J,
                                      bool per_queue_arrivals) {
    require(a > 0.0 && a < 1.0, "arrival rate a must lie in (0,1)");
    require(nu >= 1, "speed ratio nu must be >= 1");
    require(J >= 1, "spread count J must be >= 1");

    std::vector<std::string> ids;
    ids.reserve(2 * (J + 1));
    for (char comp : {'A', 'B'})
        for (int64_t j = 0; j <= J; ++j) ids.push_back(comp + std::to_string(j));

    TaggedBuild out;
    out.spec = skeleton(std::move(ids));
    NetworkSpec& spec = out.spec;

    const int a0 = 0, b0 = static_cast<int>(J) + 1;
    out.tags.a0 = a0;
    out.tags.b0 = b0;
    for (int j = 1; j <= J; ++j) {
        out.tags.a_spread.push_back(a0 + j);
        out.tags.b_spread.push_back(b0 + j);
        spec.routing[a0 + j][b0] = 1.0;  // spread jobs cross to the opposite hub
        spec.routing[b0 + j][a0] = 1.0;
        spec.arrival_rate[a0 + j] = a / static_cast<double>(J);
        spec.arrival_rate[b0 + j] = a / static_cast<double>(J);
    }
    // hubs exit after service (empty routing rows)

    if (!per_queue_arrivals) {
        DispatchGroup ga, gb;
        ga.rate = gb.rate = a;
        ga.members = out.tags.a_spread;
        gb.members = out.tags.b_spread;
        spec.dispatch_groups = {ga, gb};
    }

    for (int hub : {a0, b0}) {
        ConstraintRow row;
        row.support.push_back(hub);
        row.coeff.push_back(1.0);
        for (int j = 1; j <= J; ++j) {
            row.support.push_back(hub + j);
            row.coeff.push_back(1.0 / static_cast<double>(nu));
        }
        row.bound = 1.0;
        spec.schedule_set.rows.push_back(std::move(row));
    }

    finish(spec);
    return out;
}

NetworkSpec build_tandem(int64_t J, double a, std::vector<double> capacities) {
    require(J >= 1, "tandem length must be >= 1");
    require(a > 0.0 && a < 1.0, "arrival rate a must lie in (0,1)");
    if (capacities.empty()) capacities.assign(J, 1.0);
    require(static_cast<int64_t>(capacities.size()) == J, "capacities length must equal J");

    std::vector<std::string> ids;
    for (int64_t j = 1; j <= J; ++j) ids.push_back("Q" + std::to_string(j));
    NetworkSpec spec = skeleton(std::move(ids));
    spec.arrival_rate[0] = a;
    for (int64_t j = 0; j + 1 < J; ++j) spec.routing[j][j + 1] = 1.0;

    for (int64_t j = 0; j < J; ++j) {
        require(capacities[j] > 0.0, "capacities must be positive");
        ConstraintRow row;
        row.support = {static_cast<int>(j)};
        row.coeff = {1.0};
        row.bound = capacities[j];
        spec.schedule_set.rows.push_back(std::move(row));
    }

    finish(spec);
    return spec;
}

NetworkSpec build_pure_branching(const std::vector<int>& parent, double a,
                                 const std::vector<double>& entry_prob,
                                 std::vector<double> capacities) {
    const size_t n = parent.size();
    require(n >= 1, "tree must have at least one node");
    require(entry_prob.size() == n, "entry_prob length must match parent length");
    require(parent[0] == -1, "node 0 must be the root (parent -1)");
    require(a > 0.0 && a < 1.0, "arrival rate a must lie in (0,1)");
    if (capacities.empty()) capacities.assign(n, 1.0);
    require(capacities.size() == n, "capacities length must match parent length");

    std::vector<std::string> ids;
    for (size_t j = 0; j < n; ++j) ids.push_back("N" + std::to_string(j));
    NetworkSpec spec = skeleton(std::move(ids));
    spec.arrival_rate[0] = a;

    std::vector<double> child_sum(n, 0.0);
    for (size_t j = 1; j < n; ++j) {
        require(parent[j] >= 0 && parent[j] < static_cast<int>(j),
                "parent indices must precede their children");
        require(entry_prob[j] > 0.0 && entry_prob[j] <= 1.0, "entry probabilities must lie in (0,1]");
        child_sum[parent[j]] += entry_prob[j];
        spec.routing[parent[j]][j] = entry_prob[j];
    }
    for (size_t j = 0; j < n; ++j)
        require(child_sum[j] <= 1.0 + 1e-12, "child probabilities at a node exceed 1");

    for (size_t j = 0; j < n; ++j) {
        require(capacities[j] > 0.0, "capacities must be positive");
        ConstraintRow row;
        row.support = {static_cast<int>(j)};
        row.coeff = {1.0};
        row.bound = capacities[j];
        spec.schedule_set.rows.push_back(std::move(row));
    }

    finish(spec);
    return spec;
}

namespace {

// shared frame for the two rate-skewed two-hub variants
NetworkSpec rs_frame(double a, double epsilon) {
    require(a > 0.0 && a <= 1.0, "arrival rate a must lie in (0,1]");
    require(epsilon > 0.0 && epsilon < 0.5, "epsilon must lie in (0, 1/2)");
    NetworkSpec spec;
    spec.queue_ids = {"A0", "A1", "B0", "B1"};
    return spec;
}

void rs_rows(NetworkSpec& spec, double epsilon) {
    for (int hub : {0, 2}) {
        ConstraintRow row;
        row.support = {hub, hub + 1};
        row.coeff = {epsilon, epsilon * epsilon};
        row.bound = 1.0;
        spec.schedule_set.rows.push_back(std::move(row));
    }
}

ComponentTags rs_tags() {
    ComponentTags tags;
    tags.a0 = 0;
    tags.a_spread = {1};
    tags.b0 = 2;
    tags.b_spread = {3};
    return tags;
}

}  // namespace

TaggedBuild build_multiclass_rs(double a, double epsilon, int64_t K) {
    require(K >= 1, "chain length K must be >= 1");
    TaggedBuild out;
    out.spec = rs_frame(a, epsilon);
    out.tags = rs_tags();
    NetworkSpec& spec = out.spec;

    // class layout: A0, A1c1..A1cK, B0, B1c1..B1cK
    spec.class_ids.push_back("A0");
    spec.class_queue.push_back(0);
    for (int64_t i = 1; i <= K; ++i) {
        spec.class_ids.push_back("A1c" + std::to_string(i));
        spec.class_queue.push_back(1);
    }
    spec.class_ids.push_back("B0");
    spec.class_queue.push_back(2);
    for (int64_t i = 1; i <= K; ++i) {
        spec.class_ids.push_back("B1c" + std::to_string(i));
        spec.class_queue.push_back(3);
    }

    const size_t n_cls = spec.class_ids.size();
    spec.arrival_rate.assign(n_cls, 0.0);
    spec.service_p.assign(n_cls, 1.0);
    spec.routing.assign(n_cls, std::vector<double>(n_cls, 0.0));

    const int ca0 = 0, ca1 = 1, cb0 = static_cast<int>(K) + 1, cb1 = static_cast<int>(K) + 2;
    spec.arrival_rate[ca0] = a;
    spec.arrival_rate[cb0] = a;
    spec.routing[ca0][cb1] = 1.0;  // hub output enters the opposite side's chain
    spec.routing[cb0][ca1] = 1.0;
    for (int64_t i = 0; i + 1 < K; ++i) {
        spec.routing[ca1 + i][ca1 + i + 1] = 1.0;  // advance along the in-place chain
        spec.routing[cb1 + i][cb1 + i + 1] = 1.0;
    }
    // chain tails and nothing else exit

    rs_rows(spec, epsilon);
    finish(spec);
    return out;
}

TaggedBuild build_collapsed_rs(double a, double epsilon) {
    TaggedBuild out;
    out.spec = rs_frame(a, epsilon);
    out.tags = rs_tags();
    NetworkSpec& spec = out.spec;

    spec.class_ids = spec.queue_ids;
    spec.class_queue = {0, 1, 2, 3};
    spec.arrival_rate = {a, 0.0, a, 0.0};
    const double p_side = epsilon * epsilon / (1.0 - 2.0 * epsilon);
    spec.service_p = {1.0, p_side, 1.0, p_side};
    spec.routing.assign(4, std::vector<double>(4, 0.0));
    spec.routing[0][3] = 1.0;
    spec.routing[2][1] = 1.0;

    rs_rows(spec, epsilon);
    finish(spec);
    return out;
}

LqfsBuild build_lqfs_network(double a, int64_t nu, int64_t J) {
    TaggedBuild base = build_instability_network(a, nu, J);
    LqfsBuild out;
    out.spec = std::move(base.spec);
    out.tags = std::move(base.tags);
    out.policy.kind = PolicyKind::LQFSBatch;
    out.policy.weights.assign(out.spec.n_queues(), 1.0);
    for (int j : out.tags.a_spread) out.policy.weights[j] = 1.0 / static_cast<double>(nu);
    for (int j : out.tags.b_spread) out.policy.weights[j] = 1.0 / static_cast<double>(nu);
    return out;
}

}  // namespace swq
