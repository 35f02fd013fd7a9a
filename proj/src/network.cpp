#include "swq/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "swq/linalg.hpp"

namespace swq {

using nlohmann::json;

void ScheduleSet::finalize(size_t n_queues) {
    if (form == ScheduleForm::ResourceConstrained) {
        std::vector<int> seen(n_queues, 0);
        disjoint_supports = true;
        for (auto& row : rows) {
            row.max_units.assign(row.support.size(), 0);
            row.harmonic = true;
            for (size_t i = 0; i < row.support.size(); ++i) {
                int q = row.support[i];
                if (q >= 0 && q < static_cast<int>(n_queues)) {
                    if (seen[q]++) disjoint_supports = false;
                }
                double c = row.coeff[i];
                if (c > 0.0 && row.bound > 0.0) {
                    double units = row.bound / c;
                    row.max_units[i] = static_cast<int64_t>(std::floor(units + 1e-9));
                    if (std::fabs(units - std::round(units)) > 1e-9 * std::max(1.0, units))
                        row.harmonic = false;
                }
            }
        }
    }
}

bool NetworkSpec::single_class() const {
    if (n_classes() != n_queues()) return false;
    for (size_t k = 0; k < class_queue.size(); ++k) {
        size_t q = static_cast<size_t>(class_queue[k]);
        if (q >= n_queues() || queue_classes[q].size() != 1) return false;
    }
    return true;
}

int NetworkSpec::queue_index(const std::string& id) const {
    auto it = std::find(queue_ids.begin(), queue_ids.end(), id);
    return it == queue_ids.end() ? -1 : static_cast<int>(it - queue_ids.begin());
}

int NetworkSpec::class_index(const std::string& id) const {
    auto it = std::find(class_ids.begin(), class_ids.end(), id);
    return it == class_ids.end() ? -1 : static_cast<int>(it - class_ids.begin());
}

void NetworkSpec::finalize() {
    queue_classes.assign(n_queues(), {});
    for (size_t k = 0; k < class_queue.size(); ++k) {
        int q = class_queue[k];
        if (q >= 0 && q < static_cast<int>(n_queues()))
            queue_classes[q].push_back(static_cast<int>(k));
    }
    group_of_class.assign(n_classes(), -1);
    for (size_t g = 0; g < dispatch_groups.size(); ++g)
        for (int k : dispatch_groups[g].members)
            if (k >= 0 && k < static_cast<int>(n_classes()))
                group_of_class[k] = static_cast<int>(g);
    schedule_set.finalize(n_queues());
}

namespace {

void check_routing_open(const NetworkSpec& spec, std::vector<std::string>& out) {
    // Row-substochastic nonnegative P is "open" (spectral radius < 1) exactly
    // when I - P is nonsingular, since the Perron root of a nonnegative matrix
    // is itself an eigenvalue.
    const size_t K = spec.n_classes();
    if (K == 0) return;
    std::vector<double> A(K * K, 0.0);
    std::vector<double> b(K, 1.0);
    for (size_t i = 0; i < K; ++i)
        for (size_t j = 0; j < K; ++j)
            A[i * K + j] = (i == j ? 1.0 : 0.0) - spec.routing[i][j];
    if (!linalg::lu_solve(A, b, K))
        out.push_back("routing: I - P is singular; every job must eventually exit "
                      "(spectral radius of P must be < 1)");
}

}  // namespace

std::vector<std::string> validate_spec(const NetworkSpec& spec) {
    std::vector<std::string> v;
    const size_t J = spec.n_queues();
    const size_t K = spec.n_classes();
    auto note = [&](const std::string& s) { v.push_back(s); };

    if (J == 0) note("no queues");
    {
        std::set<std::string> ids(spec.queue_ids.begin(), spec.queue_ids.end());
        if (ids.size() != J) note("duplicate queue ids");
        std::set<std::string> cids(spec.class_ids.begin(), spec.class_ids.end());
        if (cids.size() != K) note("duplicate class ids");
    }
    if (spec.class_queue.size() != K || spec.arrival_rate.size() != K ||
        spec.service_p.size() != K || spec.routing.size() != K) {
        note("class arrays have inconsistent sizes");
        return v;  // further indexing unsafe
    }
    for (size_t k = 0; k < K; ++k) {
        const std::string& cid = spec.class_ids[k];
        if (spec.class_queue[k] < 0 || spec.class_queue[k] >= static_cast<int>(J))
            note("class " + cid + ": owning queue out of range");
        double a = spec.arrival_rate[k];
        if (!(a >= 0.0 && a <= 1.0))
            note("class " + cid + ": arrival rate " + std::to_string(a) + " outside [0,1]");
        double p = spec.service_p[k];
        if (!(p > 0.0 && p <= 1.0))
            note("class " + cid + ": service parameter " + std::to_string(p) +
                 " outside (0,1]");
        if (spec.routing[k].size() != K) {
            note("class " + cid + ": routing row has wrong length");
            continue;
        }
        double rowsum = 0.0;
        for (double x : spec.routing[k]) {
            if (!(x >= 0.0 && x <= 1.0)) {
                note("class " + cid + ": routing entry outside [0,1]");
                break;
            }
            rowsum += x;
        }
        if (rowsum > 1.0 + 1e-12)
            note("class " + cid + ": routing row sums to " + std::to_string(rowsum) + " > 1");
    }
    for (size_t q = 0; q < J; ++q)
        if (spec.queue_classes.size() == J && spec.queue_classes[q].empty())
            note("queue " + spec.queue_ids[q] + ": no classes");

    // dispatch groups must partition consistently with per-class means
    {
        std::vector<int> in_group(K, 0);
        for (const auto& g : spec.dispatch_groups) {
            if (!(g.rate >= 0.0 && g.rate <= 1.0)) note("dispatch group: rate outside [0,1]");
            if (g.members.empty()) {
                note("dispatch group: empty member list");
                continue;
            }
            for (int k : g.members) {
                if (k < 0 || k >= static_cast<int>(K)) {
                    note("dispatch group: member class index out of range");
                    continue;
                }
                if (in_group[k]++) note("class " + spec.class_ids[k] + ": in two dispatch groups");
                double want = g.rate / static_cast<double>(g.members.size());
                if (std::fabs(spec.arrival_rate[k] - want) > 1e-9)
                    note("class " + spec.class_ids[k] +
                         ": arrival rate inconsistent with its dispatch group (" +
                         std::to_string(spec.arrival_rate[k]) + " vs " + std::to_string(want) +
                         ")");
            }
        }
    }

    // schedule set
    const ScheduleSet& ss = spec.schedule_set;
    if (ss.form == ScheduleForm::Explicit) {
        if (ss.schedules.empty()) note("schedule set: explicit form with no schedules");
        bool has_zero = false;
        for (const auto& s : ss.schedules) {
            if (s.size() != J) {
                note("schedule set: schedule vector has wrong length");
                continue;
            }
            bool zero = true;
            for (int64_t x : s) {
                if (x < 0) note("schedule set: negative schedule entry");
                if (x != 0) zero = false;
            }
            if (zero) has_zero = true;
        }
        // downward closure: every componentwise reduction must be present
        std::set<std::vector<int64_t>> present(ss.schedules.begin(), ss.schedules.end());
        size_t budget = 200000;  // verification work cap
        bool capped = false;
        for (const auto& s : ss.schedules) {
            if (s.size() != J) continue;
            for (size_t j = 0; j < J && !capped; ++j) {
                if (s[j] == 0) continue;
                auto t = s;
                t[j] -= 1;
                if (budget-- == 0) { capped = true; break; }
                if (!present.count(t)) {
                    std::ostringstream os;
                    os << "schedule set: not downward closed (missing reduction of [";
                    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
                    os << "] at " << spec.queue_ids[j] << ")";
                    note(os.str());
                }
            }
        }
        if (capped) note("schedule set: too large to verify downward closure");
        if (!has_zero && !ss.schedules.empty())
            note("schedule set: zero schedule missing");
    } else {
        if (ss.rows.empty()) note("schedule set: no constraint rows");
        for (const auto& row : ss.rows) {
            if (row.support.size() != row.coeff.size()) {
                note("schedule set: constraint support/coeff length mismatch");
                continue;
            }
            if (!(row.bound > 0.0)) note("schedule set: constraint bound must be > 0");
            for (size_t i = 0; i < row.support.size(); ++i) {
                if (row.support[i] < 0 || row.support[i] >= static_cast<int>(J))
                    note("schedule set: constraint references unknown queue");
                if (!(row.coeff[i] > 0.0))
                    note("schedule set: nonpositive constraint coefficient");
            }
        }
    }

    if (v.empty()) check_routing_open(spec, v);
    return v;
}

namespace {

void enumerate_rec(const ScheduleSet& set, size_t n_queues, size_t dim_limit, size_t q,
                   std::vector<int64_t>& cur, std::vector<double>& slack,
                   std::vector<std::vector<int64_t>>& feasible) {
    if (q == n_queues) {
        if (feasible.size() >= dim_limit)
            throw std::runtime_error("enumerate_maximal_schedules: more than " +
                                     std::to_string(dim_limit) +
                                     " feasible points (schedule set too large; use the "
                                     "constraint form directly)");
        feasible.push_back(cur);
        return;
    }
    // max count for queue q across rows containing it
    int64_t cap = -1;  // -1 = unconstrained
    for (size_t r = 0; r < set.rows.size(); ++r) {
        const auto& row = set.rows[r];
        for (size_t i = 0; i < row.support.size(); ++i) {
            if (row.support[i] == static_cast<int>(q)) {
                int64_t c = static_cast<int64_t>(std::floor(slack[r] / row.coeff[i] + 1e-9));
                cap = (cap < 0) ? c : std::min(cap, c);
            }
        }
    }
    if (cap < 0)
        throw std::invalid_argument(
            "enumerate_maximal_schedules: queue " + std::to_string(q) +
            " appears in no constraint (set is unbounded)");
    for (int64_t x = 0; x <= cap; ++x) {
        cur[q] = x;
        // update slacks
        std::vector<double> next = slack;
        bool ok = true;
        if (x > 0) {
            for (size_t r = 0; r < set.rows.size() && ok; ++r) {
                const auto& row = set.rows[r];
                for (size_t i = 0; i < row.support.size(); ++i) {
                    if (row.support[i] == static_cast<int>(q)) {
                        next[r] -= static_cast<double>(x) * row.coeff[i];
                        if (next[r] < -1e-9) ok = false;
                    }
                }
            }
        }
        if (ok) enumerate_rec(set, n_queues, dim_limit, q + 1, cur, next, feasible);
    }
    cur[q] = 0;
}

}  // namespace

std::vector<std::vector<int64_t>> enumerate_maximal_schedules(const ScheduleSet& set,
                                                              size_t n_queues,
                                                              size_t dim_limit) {
    if (set.form != ScheduleForm::ResourceConstrained)
        throw std::invalid_argument("enumerate_maximal_schedules: constraint form required");
    std::vector<std::vector<int64_t>> feasible;
    std::vector<int64_t> cur(n_queues, 0);
    std::vector<double> slack;
    for (const auto& row : set.rows) slack.push_back(row.bound);
    enumerate_rec(set, n_queues, dim_limit, 0, cur, slack, feasible);

    // keep points where no coordinate can be incremented
    auto fits = [&](const std::vector<int64_t>& s) {
        for (const auto& row : set.rows) {
            double lhs = 0.0;
            for (size_t i = 0; i < row.support.size(); ++i)
                lhs += row.coeff[i] * static_cast<double>(s[row.support[i]]);
            if (lhs > row.bound + 1e-9) return false;
        }
        return true;
    };
    std::vector<std::vector<int64_t>> maximal;
    for (auto& s : feasible) {
        bool is_max = true;
        for (size_t j = 0; j < n_queues && is_max; ++j) {
            s[j] += 1;
            if (fits(s)) is_max = false;
            s[j] -= 1;
        }
        if (is_max) maximal.push_back(s);
    }
    return maximal;
}

ScheduleSet scale_schedule_set(const ScheduleSet& set, size_t n_queues,
                               const std::vector<double>& m) {
    if (m.size() != n_queues)
        throw std::invalid_argument("scale_schedule_set: scale vector length mismatch");
    for (double x : m)
        if (!(x > 0.0)) throw std::invalid_argument("scale_schedule_set: scales must be > 0");
    ScheduleSet out = set;
    if (set.form == ScheduleForm::Explicit) {
        for (double x : m)
            if (std::fabs(x - std::round(x)) > 1e-9)
                throw std::invalid_argument(
                    "scale_schedule_set: explicit form needs integer scales");
        for (auto& s : out.schedules)
            for (size_t j = 0; j < s.size(); ++j)
                s[j] *= static_cast<int64_t>(std::llround(m[j]));
    } else {
        for (auto& row : out.rows)
            for (size_t i = 0; i < row.support.size(); ++i)
                row.coeff[i] /= m[row.support[i]];
    }
    out.finalize(n_queues);
    return out;
}

// ------------------------------------------------------------------ JSON

NetworkSpec network_from_json(const json& j) {
    NetworkSpec spec;
    for (const auto& q : j.at("queues")) spec.queue_ids.push_back(q.get<std::string>());
    for (const auto& c : j.at("classes")) {
        spec.class_ids.push_back(c.at("id").get<std::string>());
        const std::string qid = c.at("queue").get<std::string>();
        auto it = std::find(spec.queue_ids.begin(), spec.queue_ids.end(), qid);
        if (it == spec.queue_ids.end())
            throw std::invalid_argument("network json: class references unknown queue " + qid);
        spec.class_queue.push_back(static_cast<int>(it - spec.queue_ids.begin()));
    }
    const size_t K = spec.class_ids.size();
    auto cidx = [&](const std::string& id) {
        auto it = std::find(spec.class_ids.begin(), spec.class_ids.end(), id);
        if (it == spec.class_ids.end())
            throw std::invalid_argument("network json: unknown class " + id);
        return static_cast<int>(it - spec.class_ids.begin());
    };

    spec.arrival_rate.assign(K, 0.0);
    const auto& arr = j.at("arrivals");
    for (auto it = arr.at("rates").begin(); it != arr.at("rates").end(); ++it)
        spec.arrival_rate[cidx(it.key())] = it.value().get<double>();
    if (arr.contains("groups")) {
        for (const auto& g : arr.at("groups")) {
            DispatchGroup dg;
            dg.rate = g.at("rate").get<double>();
            for (const auto& mem : g.at("members")) dg.members.push_back(cidx(mem.get<std::string>()));
            spec.dispatch_groups.push_back(std::move(dg));
        }
    }

    spec.service_p.assign(K, 1.0);
    for (auto it = j.at("service").begin(); it != j.at("service").end(); ++it)
        spec.service_p[cidx(it.key())] = it.value().get<double>();

    spec.routing.assign(K, std::vector<double>(K, 0.0));
    for (auto it = j.at("routing").begin(); it != j.at("routing").end(); ++it) {
        int from = cidx(it.key());
        for (auto jt = it.value().begin(); jt != it.value().end(); ++jt)
            spec.routing[from][cidx(jt.key())] = jt.value().get<double>();
    }

    const auto& ss = j.at("schedule_set");
    const std::string form = ss.at("form").get<std::string>();
    if (form == "explicit") {
        spec.schedule_set.form = ScheduleForm::Explicit;
        for (const auto& s : ss.at("schedules"))
            spec.schedule_set.schedules.push_back(s.get<std::vector<int64_t>>());
    } else if (form == "constraints") {
        spec.schedule_set.form = ScheduleForm::ResourceConstrained;
        for (const auto& r : ss.at("rows")) {
            ConstraintRow row;
            row.bound = r.value("bound", 1.0);
            for (auto it = r.at("coeffs").begin(); it != r.at("coeffs").end(); ++it) {
                auto qt = std::find(spec.queue_ids.begin(), spec.queue_ids.end(), it.key());
                if (qt == spec.queue_ids.end())
                    throw std::invalid_argument("network json: constraint on unknown queue " +
                                                it.key());
                row.support.push_back(static_cast<int>(qt - spec.queue_ids.begin()));
                row.coeff.push_back(it.value().get<double>());
            }
            spec.schedule_set.rows.push_back(std::move(row));
        }
    } else {
        throw std::invalid_argument("network json: unknown schedule_set form '" + form + "'");
    }

    spec.finalize();
    return spec;
}

json network_to_json(const NetworkSpec& spec) {
    json j;
    j["schema_version"] = 1;
    j["queues"] = spec.queue_ids;
    j["classes"] = json::array();
    for (size_t k = 0; k < spec.n_classes(); ++k)
        j["classes"].push_back({{"id", spec.class_ids[k]},
                                {"queue", spec.queue_ids[spec.class_queue[k]]}});
    json rates = json::object();
    for (size_t k = 0; k < spec.n_classes(); ++k)
        if (spec.arrival_rate[k] != 0.0) rates[spec.class_ids[k]] = spec.arrival_rate[k];
    j["arrivals"] = {{"rates", rates}};
    if (!spec.dispatch_groups.empty()) {
        json groups = json::array();
        for (const auto& g : spec.dispatch_groups) {
            json members = json::array();
            for (int k : g.members) members.push_back(spec.class_ids[k]);
            groups.push_back({{"rate", g.rate}, {"members", members}});
        }
        j["arrivals"]["groups"] = groups;
    }
    json service = json::object();
    for (size_t k = 0; k < spec.n_classes(); ++k) service[spec.class_ids[k]] = spec.service_p[k];
    j["service"] = service;
    json routing = json::object();
    for (size_t k = 0; k < spec.n_classes(); ++k) {
        json row = json::object();
        for (size_t k2 = 0; k2 < spec.n_classes(); ++k2)
            if (spec.routing[k][k2] != 0.0) row[spec.class_ids[k2]] = spec.routing[k][k2];
        if (!row.empty()) routing[spec.class_ids[k]] = row;
    }
    j["routing"] = routing;
    json ss;
    if (spec.schedule_set.form == ScheduleForm::Explicit) {
        ss["form"] = "explicit";
        ss["schedules"] = spec.schedule_set.schedules;
    } else {
        ss["form"] = "constraints";
        json rows = json::array();
        for (const auto& row : spec.schedule_set.rows) {
            json coeffs = json::object();
            for (size_t i = 0; i < row.support.size(); ++i)
                coeffs[spec.queue_ids[row.support[i]]] = row.coeff[i];
            rows.push_back({{"coeffs", coeffs}, {"bound", row.bound}});
        }
        ss["rows"] = rows;
    }
    j["schedule_set"] = ss;
    return j;
}

NetworkSpec load_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open network file: " + path);
    json j;
    in >> j;
    // accept both a bare spec and the wrapper written by the build mode
    if (j.is_object() && j.contains("network")) return network_from_json(j.at("network"));
    return network_from_json(j);
}

void save_network_file(const NetworkSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write network file: " + path);
    out << network_to_json(spec).dump(2) << "\n";
}

}  // namespace swq
