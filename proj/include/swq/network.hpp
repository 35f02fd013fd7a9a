#pragma once
// Network model: queues, job classes, Bernoulli arrivals, geometric services,
// probabilistic routing, and the schedule set (explicit list or resource
// constraint rows <c,sigma> <= bound with disjoint supports).
//
// Queues and classes carry string ids at the boundary; internally everything
// is dense indices in declaration order.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace swq {

enum class ScheduleForm { Explicit, ResourceConstrained };

struct ConstraintRow {
    std::vector<int> support;       // queue indices with coeff > 0
    std::vector<double> coeff;      // same length as support
    double bound = 1.0;

    // caches filled by ScheduleSet::finalize()
    std::vector<int64_t> max_units;  // floor(bound/coeff) per support entry
    bool harmonic = false;           // every coeff == bound / integer
};

struct ScheduleSet {
    ScheduleForm form = ScheduleForm::ResourceConstrained;
    std::vector<std::vector<int64_t>> schedules;  // Explicit form
    std::vector<ConstraintRow> rows;              // ResourceConstrained form

    bool disjoint_supports = true;  // cache (RC form)
    void finalize(size_t n_queues);
};

struct DispatchGroup {
    // One Bernoulli(rate) trial per step; on success the arrival lands on a
    // uniformly chosen member class.  Member per-class rates must equal
    // rate/|members| so the traffic equations stay in terms of per-class means.
    double rate = 0.0;
    std::vector<int> members;  // class indices
};

struct NetworkSpec {
    std::vector<std::string> queue_ids;
    std::vector<std::string> class_ids;
    std::vector<int> class_queue;              // owning queue per class
    std::vector<double> arrival_rate;          // per class, Bernoulli mean
    std::vector<DispatchGroup> dispatch_groups;
    std::vector<double> service_p;             // per class, geometric parameter
    std::vector<std::vector<double>> routing;  // K x K, row-substochastic
    ScheduleSet schedule_set;

    // caches
    std::vector<std::vector<int>> queue_classes;  // classes per queue
    std::vector<int> group_of_class;              // -1 when not grouped

    size_t n_queues() const { return queue_ids.size(); }
    size_t n_classes() const { return class_ids.size(); }
    bool single_class() const;
    int queue_index(const std::string& id) const;  // -1 when missing
    int class_index(const std::string& id) const;
    void finalize();  // rebuild caches; call after manual construction
};

// Structural validation; returns human-readable violations (empty means valid).
std::vector<std::string> validate_spec(const NetworkSpec& spec);

// Enumerates the maximal elements of a ResourceConstrained set.  Refuses with
// std::runtime_error once more than dim_limit feasible points exist (the
// anti-explosion guard); std::invalid_argument for Explicit form or rows with
// a zero-coefficient queue in every constraint (unbounded).
std::vector<std::vector<int64_t>> enumerate_maximal_schedules(const ScheduleSet& set,
                                                              size_t n_queues,
                                                              size_t dim_limit);

// Speed scaling: queue j runs m_j times faster.  RC rows divide coefficients
// by m_j; Explicit schedules multiply entries by m_j (integer m only there).
// Throws std::invalid_argument on m_j <= 0.
ScheduleSet scale_schedule_set(const ScheduleSet& set, size_t n_queues,
                               const std::vector<double>& m);

NetworkSpec network_from_json(const nlohmann::json& j);
nlohmann::json network_to_json(const NetworkSpec& spec);
NetworkSpec load_network_file(const std::string& path);
void save_network_file(const NetworkSpec& spec, const std::string& path);

}  // namespace swq
