#include "swq/sim.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace swq {

namespace {

#ifdef NDEBUG
constexpr bool kParanoidDefault = false;
#else
constexpr bool kParanoidDefault = true;
#endif

}  // namespace

Sim::Sim(const NetworkSpec& spec, const PolicyConfig& policy, uint64_t seed)
    : spec_(&spec),
      pol_(policy),
      eng_(spec.schedule_set, spec.n_queues()),
      arr_rng_(seed, stream::arrivals),
      svc_rng_(seed, stream::service),
      rte_rng_(seed, stream::routing),
      tie_rng_(policy.seed != 0 ? policy.seed : seed, stream::tie_break),
      paranoid_(kParanoidDefault) {
    const size_t J = spec.n_queues();
    const size_t K = spec.n_classes();
    const bool needs_weights =
        pol_.kind == PolicyKind::WeightedMaxWeight || pol_.kind == PolicyKind::LQFSBatch;
    if (needs_weights && pol_.weights.size() != J)
        throw std::invalid_argument("policy: per-queue weights required for this kind");
    if (!pol_.weights.empty()) {
        if (pol_.weights.size() != J)
            throw std::invalid_argument("policy: weight vector length mismatch");
        for (double w : pol_.weights)
            if (!(w > 0.0)) throw std::invalid_argument("policy: weights must be positive");
    }
    if (pol_.kind == PolicyKind::LargestClassWeightedMaxWeight) {
        if (pol_.class_weights.size() != K)
            throw std::invalid_argument("policy: per-class weights required for this kind");
        for (double w : pol_.class_weights)
            if (!(w > 0.0)) throw std::invalid_argument("policy: class weights must be positive");
    }

    buf_.resize(K);
    qlen_.assign(J, 0);
    clen_.assign(K, 0);
    q0_.assign(J, 0);
    c0_.assign(K, 0);
    last_sigma_.assign(J, 0);
    ctr_.external.assign(K, 0);
    ctr_.arrivals.assign(K, 0);
    ctr_.departures.assign(K, 0);
    ctr_.service.assign(J, 0);
    ctr_.routed.assign(K, std::vector<int64_t>(K, 0));
    ctr_.exited.assign(K, 0);
    cumrow_.resize(K);
    for (size_t k = 0; k < K; ++k) {
        cumrow_[k].resize(K);
        double acc = 0.0;
        for (size_t k2 = 0; k2 < K; ++k2) {
            acc += spec.routing[k][k2];
            cumrow_[k][k2] = acc;
        }
    }
}

void Sim::add_initial(int cls, int64_t count) {
    if (t_ != 0) throw std::logic_error("add_initial: simulation already started");
    if (cls < 0 || static_cast<size_t>(cls) >= spec_->n_classes() || count < 0)
        throw std::invalid_argument("add_initial: bad class or count");
    for (int64_t i = 0; i < count; ++i) append_job(cls);
    q0_[spec_->class_queue[cls]] += count;
    c0_[cls] += count;
}

void Sim::append_job(int cls) {
    buf_[cls].push_back(seq_++);
    clen_[cls] += 1;
    qlen_[spec_->class_queue[cls]] += 1;
}

int64_t Sim::total() const { return std::accumulate(qlen_.begin(), qlen_.end(), int64_t{0}); }

int64_t Sim::front_seq(int cls) const {
    return buf_[cls].empty() ? -1 : static_cast<int64_t>(buf_[cls].front());
}

Schedule Sim::compute_schedule() {
    Rng* tie = pol_.tie_break == TieBreak::SeededRandom ? &tie_rng_ : nullptr;
    switch (pol_.kind) {
        case PolicyKind::MaxWeight:
            return max_weight_schedule(eng_, qlen_, {}, pol_.tie_break, tie);
        case PolicyKind::WeightedMaxWeight:
        case PolicyKind::LQFSBatch:
            return max_weight_schedule(eng_, qlen_, pol_.weights, pol_.tie_break, tie);
        case PolicyKind::LargestClassWeightedMaxWeight:
            return largest_class_schedule(eng_, *spec_, clen_, pol_.class_weights,
                                          pol_.tie_break, tie);
        case PolicyKind::BackPressure:
            return back_pressure_schedule(eng_, *spec_, qlen_, pol_.tie_break, tie);
        case PolicyKind::ProportionalScheduler:
            return proportional_schedule(eng_, qlen_, tie_rng_);
    }
    throw std::logic_error("unknown policy kind");
}

void Sim::step() {
    const size_t J = spec_->n_queues();
    const size_t K = spec_->n_classes();
    Schedule sched = compute_schedule();
    last_sigma_ = sched.sigma;
    staged_.clear();

    // service, queues in index order
    for (size_t j = 0; j < J; ++j) {
        int64_t units = std::min(sched.sigma[j], qlen_[j]);
        if (units <= 0) continue;
        ctr_.service[j] += units;  // capped allocation, whether or not consumed
        int target = -1;
        if (sched.class_split) {
            for (int k : spec_->queue_classes[j])
                if ((*sched.class_split)[k] > 0) target = k;
        }
        for (int64_t u = 0; u < units; ++u) {
            int k;
            if (target >= 0) {
                // whole allocation devoted to one class; surplus units lost
                if (buf_[target].empty()) break;
                k = target;
            } else {
                // FIFO across the queue's classes: oldest head-of-line job
                k = -1;
                uint64_t oldest = 0;
                for (int kc : spec_->queue_classes[j]) {
                    if (buf_[kc].empty()) continue;
                    if (k < 0 || buf_[kc].front() < oldest) {
                        k = kc;
                        oldest = buf_[kc].front();
                    }
                }
                if (k < 0) break;
            }
            if (!svc_rng_.bernoulli(spec_->service_p[k])) continue;  // job stays at the head
            buf_[k].pop_front();
            clen_[k] -= 1;
            qlen_[j] -= 1;
            ctr_.departures[k] += 1;
            size_t dest = rte_rng_.categorical_residual(cumrow_[k].data(), K);
            if (dest == K) {
                ctr_.exited[k] += 1;
            } else {
                ctr_.routed[k][dest] += 1;
                staged_.push_back(static_cast<int>(dest));
            }
        }
    }

    // routed jobs land after all service (no same-step service), in
    // source-queue completion order
    for (int cls : staged_) {
        append_job(cls);
        ctr_.arrivals[cls] += 1;
    }

    // external arrivals: dispatch groups first, then ungrouped classes
    for (const auto& g : spec_->dispatch_groups) {
        if (!arr_rng_.bernoulli(g.rate)) continue;
        int cls = g.members[arr_rng_.uniform_int(g.members.size())];
        append_job(cls);
        ctr_.external[cls] += 1;
        ctr_.arrivals[cls] += 1;
    }
    for (size_t k = 0; k < K; ++k) {
        if (spec_->group_of_class[k] >= 0 || spec_->arrival_rate[k] <= 0.0) continue;
        if (!arr_rng_.bernoulli(spec_->arrival_rate[k])) continue;
        append_job(static_cast<int>(k));
        ctr_.external[k] += 1;
        ctr_.arrivals[k] += 1;
    }

    t_ += 1;
    if (paranoid_ || t_ % 10000 == 0) check_conservation();
}

Trajectory Sim::run(int64_t steps, int64_t record_every) {
    if (steps < 1) throw std::invalid_argument("run: steps must be >= 1");
    if (record_every < 1) throw std::invalid_argument("run: record_every must be >= 1");
    Trajectory traj;
    const bool multi = !spec_->single_class();
    auto record = [&] {
        traj.t.push_back(t_);
        traj.qlen.push_back(qlen_);
        if (multi) traj.clen.push_back(clen_);
        traj.total.push_back(total());
        traj.sigma.push_back(last_sigma_);
    };
    record();
    for (int64_t i = 1; i <= steps; ++i) {
        step();
        if (i % record_every == 0 || i == steps) record();
    }
    return traj;
}

void Sim::check_conservation() const {
    const size_t J = spec_->n_queues();
    const size_t K = spec_->n_classes();
    auto fail = [&](const std::string& what) {
        std::ostringstream os;
        os << "conservation violated at t=" << t_ << ": " << what;
        throw std::runtime_error(os.str());
    };
    for (size_t k = 0; k < K; ++k) {
        if (static_cast<int64_t>(buf_[k].size()) != clen_[k])
            fail("buffer/length cache mismatch for class " + spec_->class_ids[k]);
        if (clen_[k] != c0_[k] + ctr_.arrivals[k] - ctr_.departures[k])
            fail("class flow identity for " + spec_->class_ids[k]);
        int64_t routed_in = 0;
        for (size_t k2 = 0; k2 < K; ++k2) routed_in += ctr_.routed[k2][k];
        if (ctr_.arrivals[k] != ctr_.external[k] + routed_in)
            fail("arrival split identity for " + spec_->class_ids[k]);
        int64_t routed_out = 0;
        for (size_t k2 = 0; k2 < K; ++k2) routed_out += ctr_.routed[k][k2];
        if (ctr_.departures[k] != routed_out + ctr_.exited[k])
            fail("departure split identity for " + spec_->class_ids[k]);
        if (clen_[k] < 0) fail("negative class length for " + spec_->class_ids[k]);
    }
    for (size_t j = 0; j < J; ++j) {
        int64_t ql = 0, a = 0, d = 0, q0 = 0;
        for (int k : spec_->queue_classes[j]) {
            ql += clen_[k];
            a += ctr_.arrivals[k];
            d += ctr_.departures[k];
            q0 += c0_[k];
        }
        if (ql != qlen_[j] || qlen_[j] != q0 + a - d)
            fail("queue flow identity for " + spec_->queue_ids[j]);
        if (qlen_[j] < 0) fail("negative queue length for " + spec_->queue_ids[j]);
    }
}

}  // namespace swq
