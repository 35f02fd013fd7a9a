#include "swq/experiment.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "swq/builders.hpp"

namespace swq {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad_config(const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
}

Rational rational_field(const json& j, const std::string& key) {
    const json& v = j.at(key);
    if (v.is_string()) return Rational::parse(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<int64_t>());
    bad_config("field '" + key + "' must be an integer or a fraction string like \"7/12\"");
}

PolicyKind parse_kind(const std::string& s) {
    if (s == "max_weight") return PolicyKind::MaxWeight;
    if (s == "weighted_max_weight") return PolicyKind::WeightedMaxWeight;
    if (s == "largest_class_weighted_max_weight")
        return PolicyKind::LargestClassWeightedMaxWeight;
    if (s == "lqfs_batch") return PolicyKind::LQFSBatch;
    if (s == "back_pressure") return PolicyKind::BackPressure;
    if (s == "proportional") return PolicyKind::ProportionalScheduler;
    bad_config("unknown policy kind '" + s + "'");
}

std::string kind_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::MaxWeight: return "max_weight";
        case PolicyKind::WeightedMaxWeight: return "weighted_max_weight";
        case PolicyKind::LargestClassWeightedMaxWeight:
            return "largest_class_weighted_max_weight";
        case PolicyKind::LQFSBatch: return "lqfs_batch";
        case PolicyKind::BackPressure: return "back_pressure";
        case PolicyKind::ProportionalScheduler: return "proportional";
    }
    return "?";
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) bad_config("top level must be a JSON object");
    ExperimentConfig cfg;
    for (auto& [key, value] : j.items()) {
        if (key == "schema_version") {
            if (value.get<int>() != kSchemaVersion)
                bad_config("unsupported schema_version");
        } else if (key == "mode") {
            cfg.mode = value.get<std::string>();
        } else if (key == "seed") {
            cfg.seed = value.get<uint64_t>();
        } else if (key == "steps") {
            cfg.steps = value.get<int64_t>();
        } else if (key == "record_every") {
            cfg.record_every = value.get<int64_t>();
        } else if (key == "out") {
            cfg.out_dir = value.get<std::string>();
        } else if (key == "network") {
            NetworkChoice& n = cfg.network;
            for (auto& [k2, v2] : value.items()) {
                if (k2 == "preset") n.preset = v2.get<std::string>();
                else if (k2 == "file") n.file = v2.get<std::string>();
                else if (k2 == "a") n.a = rational_field(value, "a");
                else if (k2 == "nu") n.nu = v2.get<int64_t>();
                else if (k2 == "J") n.J = v2.get<int64_t>();
                else if (k2 == "K") n.K = v2.get<int64_t>();
                else if (k2 == "eps") n.eps = v2.get<double>();
                else if (k2 == "per_queue_arrivals") n.per_queue_arrivals = v2.get<bool>();
                else if (k2 == "capacities") n.capacities = v2.get<std::vector<double>>();
                else if (k2 == "parent") n.parent = v2.get<std::vector<int>>();
                else if (k2 == "entry_prob") n.entry_prob = v2.get<std::vector<double>>();
                else bad_config("unknown network field '" + k2 + "'");
            }
        } else if (key == "policy") {
            PolicyChoice& p = cfg.policy;
            for (auto& [k2, v2] : value.items()) {
                if (k2 == "kind") p.kind = parse_kind(v2.get<std::string>());
                else if (k2 == "weights") {
                    if (v2.is_string() && v2.get<std::string>() == "auto_rho")
                        p.auto_rho_weights = true;
                    else p.weights = v2.get<std::vector<double>>();
                } else if (k2 == "class_weights") {
                    if (v2.is_string() && v2.get<std::string>() == "auto_rho")
                        p.auto_rho_class_weights = true;
                    else p.class_weights = v2.get<std::vector<double>>();
                } else if (k2 == "tie_break") {
                    std::string s = v2.get<std::string>();
                    if (s == "lexicographic") p.tie_break = TieBreak::Lexicographic;
                    else if (s == "seeded_random") p.tie_break = TieBreak::SeededRandom;
                    else bad_config("unknown tie_break '" + s + "'");
                } else if (k2 == "seed") p.seed = v2.get<uint64_t>();
                else bad_config("unknown policy field '" + k2 + "'");
            }
        } else if (key == "init") {
            InitChoice& in = cfg.init;
            for (auto& [k2, v2] : value.items()) {
                if (k2 == "counts") {
                    for (auto& [id, cnt] : v2.items())
                        in.counts.emplace_back(id, cnt.get<int64_t>());
                } else if (k2 == "pattern") {
                    in.balanced_pattern = true;
                    in.M = v2.at("M").get<int64_t>();
                    if (v2.contains("eps")) in.pattern_eps = v2.at("eps").get<double>();
                } else bad_config("unknown init field '" + k2 + "'");
            }
        } else if (key == "fluid") {
            FluidChoice& f = cfg.fluid;
            for (auto& [k2, v2] : value.items()) {
                if (k2 == "dt") f.dt = v2.get<double>();
                else if (k2 == "t_max") f.t_max = v2.get<double>();
                else if (k2 == "record_every") f.record_every = v2.get<int64_t>();
                else if (k2 == "q0") {
                    if (v2.is_string()) {
                        if (v2.get<std::string>() != "uniform")
                            bad_config("fluid q0 must be \"uniform\" or an {id: mass} object");
                    } else {
                        for (auto& [id, mass] : v2.items()) f.q0[id] = mass.get<double>();
                    }
                } else if (k2 == "monitor") f.monitor = v2.get<std::string>();
                else if (k2 == "bound") f.bound = v2.get<double>();
                else if (k2 == "window") f.window = v2.get<double>();
                else bad_config("unknown fluid field '" + k2 + "'");
            }
        } else if (key == "sweep") {
            SweepChoice& s = cfg.sweep;
            for (auto& [k2, v2] : value.items()) {
                if (k2 == "workers") s.workers = v2.get<int>();
                else if (k2 == "grid") {
                    for (auto& [param, vals] : v2.items()) {
                        std::vector<std::string> out;
                        for (const auto& v3 : vals)
                            out.push_back(v3.is_string() ? v3.get<std::string>()
                                                         : v3.dump());
                        s.grid[param] = std::move(out);
                    }
                } else bad_config("unknown sweep field '" + k2 + "'");
            }
        } else {
            bad_config("unknown field '" + key + "'");
        }
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad_config("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        bad_config("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

ResolvedNetwork resolve_network(const NetworkChoice& choice) {
    ResolvedNetwork out;
    if (!choice.file.empty()) {
        if (!choice.preset.empty()) bad_config("give either a preset or a network file, not both");
        out.spec = load_network_file(choice.file);
        return out;
    }
    std::string p = choice.preset;
    if (p.empty()) bad_config("network preset or file required");
    if (p == "fig4-tandem") p = "tandem";
    out.preset = p;

    if (p == "fig2" || p == "lqfs") {
        Rational a = choice.a.value_or(Rational(7, 12));
        int64_t nu = choice.nu.value_or(6);
        int64_t J = choice.J.value_or(30);
        out.a = a;
        out.nu = nu;
        out.J = J;
        if (p == "fig2") {
            TaggedBuild b = build_instability_network(a.to_double(), nu, J,
                                                      choice.per_queue_arrivals);
            out.spec = std::move(b.spec);
            out.tags = b.tags;
        } else {
            LqfsBuild b = build_lqfs_network(a.to_double(), nu, J);
            out.spec = std::move(b.spec);
            out.tags = b.tags;
            out.policy = b.policy;
        }
    } else if (p == "tandem") {
        Rational a = choice.a.value_or(Rational(1, 2));
        int64_t J = choice.J.value_or(5);
        out.a = a;
        out.J = J;
        out.spec = build_tandem(J, a.to_double(), choice.capacities);
    } else if (p == "branching") {
        Rational a = choice.a.value_or(Rational(4, 5));
        out.a = a;
        std::vector<int> parent = choice.parent;
        std::vector<double> prob = choice.entry_prob;
        if (parent.empty()) {
            parent = {-1, 0, 0, 1, 1, 2, 2};  // two-level binary tree
            prob = {0.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
        }
        out.spec = build_pure_branching(parent, a.to_double(), prob, choice.capacities);
    } else if (p == "fig6" || p == "fig8-collapsed") {
        Rational a = choice.a.value_or(Rational(1));
        double eps = choice.eps.value_or(0.1791);
        out.a = a;
        if (p == "fig6") {
            int64_t K = choice.K.value_or(20);
            TaggedBuild b = build_multiclass_rs(a.to_double(), eps, K);
            out.spec = std::move(b.spec);
            out.tags = b.tags;
        } else {
            TaggedBuild b = build_collapsed_rs(a.to_double(), eps);
            out.spec = std::move(b.spec);
            out.tags = b.tags;
        }
    } else {
        bad_config("unknown preset '" + choice.preset + "'");
    }
    return out;
}

PolicyConfig resolve_policy(const PolicyChoice& choice, const ResolvedNetwork& net) {
    PolicyConfig cfg;
    if (choice.kind) {
        cfg.kind = *choice.kind;
    } else if (net.policy) {
        cfg = *net.policy;
    } else {
        cfg.kind = PolicyKind::MaxWeight;
    }
    if (!choice.weights.empty()) cfg.weights = choice.weights;
    if (!choice.class_weights.empty()) cfg.class_weights = choice.class_weights;
    if (choice.auto_rho_weights) {
        TrafficSolution ts = traffic_solve(net.spec);
        cfg.weights.resize(net.spec.n_queues());
        for (size_t j = 0; j < net.spec.n_queues(); ++j) {
            if (ts.rho_queue[j] <= 0.0)
                bad_config("auto_rho weights: queue " + net.spec.queue_ids[j] +
                           " carries no traffic");
            cfg.weights[j] = 1.0 / ts.rho_queue[j];
        }
        if (!choice.kind && !net.policy) cfg.kind = PolicyKind::WeightedMaxWeight;
    }
    if (choice.auto_rho_class_weights) {
        TrafficSolution ts = traffic_solve(net.spec);
        cfg.class_weights.resize(net.spec.n_classes());
        for (size_t k = 0; k < net.spec.n_classes(); ++k) {
            if (ts.rho_class[k] <= 0.0)
                bad_config("auto_rho class weights: class " + net.spec.class_ids[k] +
                           " carries no traffic");
            cfg.class_weights[k] = 1.0 / ts.rho_class[k];
        }
        if (!choice.kind) cfg.kind = PolicyKind::LargestClassWeightedMaxWeight;
    }
    cfg.tie_break = choice.tie_break;
    if (choice.seed != 0) cfg.seed = choice.seed;
    return cfg;
}

std::vector<std::pair<int, int64_t>> resolve_init(const InitChoice& init,
                                                  const ResolvedNetwork& net) {
    const NetworkSpec& spec = net.spec;
    std::vector<std::pair<int, int64_t>> out;
    for (const auto& [id, count] : init.counts) {
        if (count < 0) bad_config("negative initial count for '" + id + "'");
        int k = spec.class_index(id);
        if (k < 0) {
            int q = spec.queue_index(id);
            if (q < 0) bad_config("unknown id '" + id + "' in init counts");
            if (spec.queue_classes[q].size() != 1)
                bad_config("queue '" + id + "' holds several classes; use a class id");
            k = spec.queue_classes[q][0];
        }
        out.emplace_back(k, count);
    }
    if (init.balanced_pattern) {
        if (!net.tags) bad_config("balanced init pattern needs a two-component network");
        if (init.M < 0) bad_config("pattern mass M must be nonnegative");
        const ComponentTags& tg = *net.tags;
        int64_t J = static_cast<int64_t>(tg.b_spread.size());
        int64_t nu = net.nu > 0 ? net.nu : 1;
        int64_t per_spread = init.M / (J + nu);
        int64_t hub = init.M - J * per_spread;
        for (int j : tg.b_spread)
            if (per_spread > 0) out.emplace_back(spec.queue_classes[j][0], per_spread);
        if (hub > 0) out.emplace_back(spec.queue_classes[tg.b0][0], hub);
        int64_t small = static_cast<int64_t>(init.pattern_eps * static_cast<double>(init.M) /
                                             static_cast<double>(nu));
        if (small > 0) out.emplace_back(spec.queue_classes[tg.a0][0], small);
    }
    return out;
}

SimOutcome run_simulation(const ExperimentConfig& cfg, const ResolvedNetwork& net,
                          uint64_t seed) {
    SimOutcome out;
    out.policy = resolve_policy(cfg.policy, net);
    out.seed = seed;
    Sim sim(net.spec, out.policy, seed);
    for (const auto& [k, count] : resolve_init(cfg.init, net)) sim.add_initial(k, count);
    auto t0 = std::chrono::steady_clock::now();
    out.traj = sim.run(cfg.steps, cfg.record_every);
    auto t1 = std::chrono::steady_clock::now();
    out.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
    out.proxy = stability_proxy(out.traj);
    if (net.tags && net.nu > 0 && net.a) {
        bool primed = out.policy.kind == PolicyKind::LQFSBatch;
        out.cycles = detect_cycles(out.traj, *net.tags, net.nu, net.a->to_double(), primed);
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const NetworkSpec& spec, const Trajectory& traj) {
    os << "t";
    for (const auto& id : spec.queue_ids) os << ',' << id;
    os << ",total";
    const bool classes = !traj.clen.empty();
    if (classes)
        for (const auto& id : spec.class_ids) os << ',' << id;
    os << '\n';
    for (size_t i = 0; i < traj.t.size(); ++i) {
        os << traj.t[i];
        for (int64_t q : traj.qlen[i]) os << ',' << q;
        os << ',' << traj.total[i];
        if (classes)
            for (int64_t c : traj.clen[i]) os << ',' << c;
        os << '\n';
    }
}

void write_fluid_csv(std::ostream& os, const NetworkSpec& spec, const FluidRun& run) {
    os << "t";
    for (const auto& id : spec.queue_ids) os << ',' << id;
    os << ",total,h,f,g\n";
    // states are thinned; pair each with its reading by time index
    size_t ri = 0;
    for (const auto& s : run.states) {
        while (ri + 1 < run.readings.size() && run.readings[ri].t < s.t - 1e-12) ++ri;
        const LyapunovReading& rd = run.readings[ri];
        os << format_double(s.t);
        double total = 0.0;
        for (double q : s.q) {
            os << ',' << format_double(q);
            total += q;
        }
        os << ',' << format_double(total) << ',' << format_double(rd.h) << ','
           << format_double(rd.f) << ',' << format_double(rd.g) << '\n';
    }
}

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir + "'");
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << body;
}

json network_block(const ExperimentConfig& cfg, const ResolvedNetwork& net) {
    json n;
    if (!net.preset.empty()) n["preset"] = net.preset;
    if (!cfg.network.file.empty()) n["file"] = cfg.network.file;
    if (net.a) n["a"] = net.a->str();
    if (net.nu > 0) n["nu"] = net.nu;
    if (net.J > 0) n["J"] = net.J;
    n["queues"] = net.spec.n_queues();
    n["classes"] = net.spec.n_classes();
    return n;
}

json policy_block(const PolicyConfig& p) {
    json out;
    out["kind"] = kind_name(p.kind);
    if (!p.weights.empty()) out["weights"] = p.weights;
    if (!p.class_weights.empty()) out["class_weights"] = p.class_weights;
    out["tie_break"] = p.tie_break == TieBreak::SeededRandom ? "seeded_random" : "lexicographic";
    if (p.seed != 0) out["seed"] = p.seed;
    return out;
}

json cycles_json(const CycleScan& scan) {
    json out;
    out["schema_version"] = kSchemaVersion;
    json arr = json::array();
    for (const auto& c : scan.cycles) {
        json e;
        e["start"] = c.start;
        e["U"] = c.U;
        e["V"] = c.V;
        e["component"] = std::string(1, c.component);
        e["M"] = c.M;
        e["M_next"] = c.M_next;
        e["growth"] = c.growth;
        e["predicted_V"] = c.predicted_V;
        e["balance_gap"] = c.balance_gap;
        arr.push_back(std::move(e));
    }
    out["cycles"] = std::move(arr);
    out["mean_growth"] = scan.mean_growth;
    out["geo_mean_growth"] = scan.geo_mean_growth;
    if (!scan.diagnostic.empty()) out["diagnostic"] = scan.diagnostic;
    return out;
}

std::string sim_plot_script(const NetworkSpec& spec) {
    std::ostringstream os;
    size_t total_col = 2 + spec.n_queues();
    os << "# gnuplot script; run from this directory\n"
       << "set datafile separator comma\n"
       << "set xlabel 't'\n"
       << "set ylabel 'jobs'\n"
       << "set key outside\n"
       << "plot 'trajectory.csv' using 1:" << total_col
       << " skip 1 with lines lw 2 title 'total'\n";
    return os.str();
}

std::string fluid_plot_script(const NetworkSpec& spec) {
    std::ostringstream os;
    size_t base = 2 + spec.n_queues();  // total column
    os << "# gnuplot script; run from this directory\n"
       << "set datafile separator comma\n"
       << "set xlabel 't'\n"
       << "set ylabel 'value'\n"
       << "set key outside\n"
       << "plot 'fluid.csv' using 1:" << base << " skip 1 with lines title 'total', \\\n"
       << "     'fluid.csv' using 1:" << base + 1 << " skip 1 with lines title 'h', \\\n"
       << "     'fluid.csv' using 1:" << base + 2 << " skip 1 with lines title 'f', \\\n"
       << "     'fluid.csv' using 1:" << base + 3 << " skip 1 with lines title 'g'\n";
    return os.str();
}

int mode_simulate(const ExperimentConfig& cfg, const ResolvedNetwork& net) {
    SimOutcome out = run_simulation(cfg, net, cfg.seed);

    json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["mode"] = "simulate";
    summary["seed"] = out.seed;
    summary["steps"] = cfg.steps;
    summary["record_every"] = cfg.record_every;
    summary["network"] = network_block(cfg, net);
    summary["policy"] = policy_block(out.policy);
    const Trajectory& traj = out.traj;
    json fin;
    for (size_t j = 0; j < net.spec.n_queues(); ++j)
        fin[net.spec.queue_ids[j]] = traj.qlen.back()[j];
    summary["final"] = std::move(fin);
    int64_t tmin = traj.total.front(), tmax = traj.total.front();
    for (int64_t v : traj.total) {
        tmin = std::min(tmin, v);
        tmax = std::max(tmax, v);
    }
    summary["total_initial"] = traj.total.front();
    summary["total_final"] = traj.total.back();
    summary["total_min"] = tmin;
    summary["total_max"] = tmax;
    summary["empty_fraction"] = out.proxy.empty_fraction;
    summary["time_avg_total"] = out.proxy.time_avg_total;
    summary["drift_slope"] = out.proxy.drift_slope;
    if (std::isfinite(out.proxy.drift_slope_se))
        summary["drift_slope_se"] = out.proxy.drift_slope_se;
    summary["samples"] = out.proxy.samples;
    summary["wall_time_s"] = out.wall_time_s;
    if (out.cycles) {
        summary["n_cycles"] = out.cycles->cycles.size();
        summary["geo_mean_growth"] = out.cycles->geo_mean_growth;
    }

    if (!cfg.out_dir.empty()) {
        ensure_dir(cfg.out_dir);
        fs::path dir(cfg.out_dir);
        std::ostringstream csv;
        write_trajectory_csv(csv, net.spec, traj);
        write_file((dir / "trajectory.csv").string(), csv.str());
        write_file((dir / "summary.json").string(), summary.dump(2) + "\n");
        if (out.cycles)
            write_file((dir / "cycles.json").string(), cycles_json(*out.cycles).dump(2) + "\n");
        write_file((dir / "plot.gp").string(), sim_plot_script(net.spec));
    }

    std::cout << "simulate: " << cfg.steps << " steps, seed " << out.seed << ", total "
              << traj.total.front() << " -> " << traj.total.back() << "\n"
              << "  empty_fraction " << out.proxy.empty_fraction << ", drift slope "
              << out.proxy.drift_slope;
    if (std::isfinite(out.proxy.drift_slope_se))
        std::cout << " (se " << out.proxy.drift_slope_se << ")";
    std::cout << "\n";
    if (out.cycles) {
        if (out.cycles->cycles.empty())
            std::cout << "  cycles: none (" << out.cycles->diagnostic << ")\n";
        else
            std::cout << "  cycles: " << out.cycles->cycles.size() << ", geo-mean growth "
                      << out.cycles->geo_mean_growth << "\n";
    }
    return 0;
}

int mode_fluid(const ExperimentConfig& cfg, const ResolvedNetwork& net) {
    const NetworkSpec& spec = net.spec;
    PolicyConfig pol = resolve_policy(cfg.policy, net);
    std::vector<double> weights = pol.weights;  // empty: unweighted

    std::vector<double> q0(spec.n_queues(), 0.0);
    if (cfg.fluid.q0.empty()) {
        for (auto& q : q0) q = 1.0 / static_cast<double>(spec.n_queues());
    } else {
        for (const auto& [id, mass] : cfg.fluid.q0) {
            int j = spec.queue_index(id);
            if (j < 0) bad_config("unknown queue id '" + id + "' in fluid q0");
            q0[j] = mass;
        }
    }

    FluidRun run = fluid_run(spec, weights, q0, cfg.fluid.dt, cfg.fluid.t_max,
                             cfg.fluid.record_every);
    LyapunovFn which;
    if (cfg.fluid.monitor == "h") which = LyapunovFn::H;
    else if (cfg.fluid.monitor == "g_branch") which = LyapunovFn::GBranch;
    else bad_config("fluid monitor must be 'h' or 'g_branch'");
    CertificateReport cert = decay_certificate(run, which, cfg.fluid.bound, cfg.fluid.window);

    json cj;
    cj["schema_version"] = kSchemaVersion;
    cj["mode"] = "fluid";
    cj["network"] = network_block(cfg, net);
    cj["weights"] = weights.empty() ? json("unit") : json(weights);
    cj["dt"] = cfg.fluid.dt;
    cj["t_max"] = cfg.fluid.t_max;
    cj["monitor"] = cert.monitored;
    cj["bound"] = cert.bound;
    cj["tolerance"] = cert.tolerance;
    cj["window"] = cert.window;
    cj["worst_slope"] = cert.worst_slope;
    cj["worst_interval"] = {cert.worst_interval_start, cert.worst_interval_end};
    cj["pass"] = cert.pass;
    cj["emptied"] = run.emptied;
    if (run.emptied) cj["empty_time"] = run.empty_time;

    if (!cfg.out_dir.empty()) {
        ensure_dir(cfg.out_dir);
        fs::path dir(cfg.out_dir);
        std::ostringstream csv;
        write_fluid_csv(csv, spec, run);
        write_file((dir / "fluid.csv").string(), csv.str());
        write_file((dir / "certificate.json").string(), cj.dump(2) + "\n");
        write_file((dir / "plot.gp").string(), fluid_plot_script(spec));
    }

    std::cout << "fluid: dt " << cfg.fluid.dt << ", ";
    if (run.emptied)
        std::cout << "emptied at t = " << run.empty_time << "\n";
    else
        std::cout << "still positive at t_max = " << cfg.fluid.t_max << "\n";
    std::cout << "  certificate (" << cert.monitored << ", bound " << cert.bound
              << "): " << (cert.pass ? "PASS" : "FAIL") << ", worst slope " << cert.worst_slope
              << " on [" << cert.worst_interval_start << ", " << cert.worst_interval_end
              << "]\n";
    return 0;
}

int mode_check(const ExperimentConfig& cfg, const ResolvedNetwork& net) {
    const NetworkSpec& spec = net.spec;
    TrafficSolution ts = traffic_solve(spec);
    SubcritReport sub = subcritical_check(spec, ts);

    json out;
    out["schema_version"] = kSchemaVersion;
    out["mode"] = "check";
    out["network"] = network_block(cfg, net);
    out["traffic_residual"] = ts.residual;
    if (std::isfinite(ts.r_rho)) out["r_rho"] = ts.r_rho;
    const char* status = sub.status == Criticality::Interior     ? "interior"
                         : sub.status == Criticality::Boundary   ? "boundary"
                                                                 : "supercritical";
    out["load_status"] = status;
    out["margin"] = sub.margin;
    out["eps_feasible"] = sub.eps_feasible;
    out["route"] = sub.route;

    std::cout << "network: " << (net.preset.empty() ? cfg.network.file : net.preset);
    if (net.a) std::cout << " (a = " << net.a->str();
    if (net.nu > 0) std::cout << ", nu = " << net.nu;
    if (net.J > 0) std::cout << ", J = " << net.J;
    if (net.a) std::cout << ")";
    std::cout << "\n";
    std::cout << "traffic residual: " << ts.residual << "\n";
    if (std::isfinite(ts.r_rho)) std::cout << "r_rho: " << ts.r_rho << "\n";
    std::cout << "load: " << status << " (margin " << sub.margin << ", eps "
              << sub.eps_feasible << ", via " << sub.route << ")\n";

    bool two_component = net.tags && net.a && net.nu > 0 && net.J > 0;
    if (two_component) {
        InstabilityKind kind = net.preset == "lqfs" ? InstabilityKind::BatchLqfs
                                                    : InstabilityKind::MaxWeight;
        ConditionReport rep = instability_conditions(kind, *net.a, net.nu, net.J);
        std::cout << "growth conditions ("
                  << (kind == InstabilityKind::BatchLqfs ? "batch variant" : "standard")
                  << "):\n";
        json items = json::array();
        for (const auto& it : rep.items) {
            std::cout << "  [" << (it.pass ? "PASS" : "FAIL") << "] " << it.name << ": "
                      << it.detail << "\n";
            items.push_back({{"name", it.name}, {"detail", it.detail}, {"pass", it.pass}});
        }
        std::cout << "  all conditions " << (rep.all_pass ? "hold" : "do NOT hold") << "\n";
        std::cout << "  a interval: (" << rep.a_lower.str() << ", " << rep.a_upper.str()
                  << ")\n";
        std::cout << "  r_rho exact: " << rep.r_rho.str() << " = " << rep.r_rho.to_double()
                  << "\n";
        std::cout << "  gamma_max: " << rep.gamma_max.str() << " = "
                  << rep.gamma_max.to_double() << "\n";
        json tj;
        tj["kind"] = kind == InstabilityKind::BatchLqfs ? "batch_lqfs" : "max_weight";
        tj["items"] = std::move(items);
        tj["all_pass"] = rep.all_pass;
        tj["a_lower"] = rep.a_lower.str();
        tj["a_upper"] = rep.a_upper.str();
        tj["r_rho"] = rep.r_rho.str();
        tj["gamma_max"] = rep.gamma_max.str();
        out["conditions"] = std::move(tj);
    }

    if (!cfg.out_dir.empty()) {
        ensure_dir(cfg.out_dir);
        write_file((fs::path(cfg.out_dir) / "check.json").string(), out.dump(2) + "\n");
    }
    return 0;
}

int mode_build(const ExperimentConfig& cfg, const ResolvedNetwork& net) {
    json out;
    out["schema_version"] = kSchemaVersion;
    out["network"] = network_to_json(net.spec);
    if (!net.preset.empty()) out["preset"] = net.preset;
    if (net.a) out["a"] = net.a->str();
    if (net.nu > 0) out["nu"] = net.nu;
    if (net.J > 0) out["J"] = net.J;
    if (net.tags) {
        json tj;
        tj["a0"] = net.tags->a0;
        tj["a_spread"] = net.tags->a_spread;
        tj["b0"] = net.tags->b0;
        tj["b_spread"] = net.tags->b_spread;
        out["tags"] = std::move(tj);
    }
    if (net.policy) out["policy"] = policy_block(*net.policy);

    std::string dir = cfg.out_dir.empty() ? "." : cfg.out_dir;
    ensure_dir(dir);
    std::string path = (fs::path(dir) / "network.json").string();
    write_file(path, out.dump(2) + "\n");
    std::cout << "wrote " << path << " (" << net.spec.n_queues() << " queues, "
              << net.spec.n_classes() << " classes)\n";
    return 0;
}

struct SweepPoint {
    std::map<std::string, std::string> params;
    ExperimentConfig cfg;
    uint64_t seed = 0;
};

void apply_sweep_param(ExperimentConfig& cfg, const std::string& key,
                       const std::string& value, bool& seed_set) {
    if (key == "a") cfg.network.a = Rational::parse(value);
    else if (key == "nu") cfg.network.nu = std::stoll(value);
    else if (key == "J") cfg.network.J = std::stoll(value);
    else if (key == "K") cfg.network.K = std::stoll(value);
    else if (key == "eps") cfg.network.eps = std::stod(value);
    else if (key == "steps") cfg.steps = std::stoll(value);
    else if (key == "seed") {
        cfg.seed = std::stoull(value);
        seed_set = true;
    } else bad_config("unsupported sweep parameter '" + key + "'");
}

int mode_sweep(const ExperimentConfig& cfg) {
    if (cfg.sweep.grid.empty()) bad_config("sweep needs a nonempty grid");
    if (cfg.sweep.workers < 1) bad_config("sweep workers must be >= 1");

    // Cartesian grid in key order; per-point seed is either the swept value or
    // derived from the master seed by the point index.
    std::vector<std::string> keys;
    for (const auto& [k, vals] : cfg.sweep.grid) {
        if (vals.empty()) bad_config("empty grid for sweep parameter '" + k + "'");
        keys.push_back(k);
    }
    std::vector<SweepPoint> points;
    std::vector<size_t> idx(keys.size(), 0);
    while (true) {
        SweepPoint pt;
        pt.cfg = cfg;
        pt.cfg.mode = "simulate";
        pt.cfg.out_dir.clear();
        bool seed_set = false;
        for (size_t i = 0; i < keys.size(); ++i) {
            const std::string& val = cfg.sweep.grid.at(keys[i])[idx[i]];
            pt.params[keys[i]] = val;
            apply_sweep_param(pt.cfg, keys[i], val, seed_set);
        }
        pt.seed = seed_set ? pt.cfg.seed : derive_seed(cfg.seed, points.size());
        points.push_back(std::move(pt));
        size_t d = keys.size();
        while (d > 0) {
            --d;
            if (++idx[d] < cfg.sweep.grid.at(keys[d]).size()) break;
            idx[d] = 0;
            if (d == 0) goto grid_done;
        }
        if (keys.empty()) break;
    }
grid_done:;

    std::vector<json> results(points.size());
    std::atomic<size_t> next{0};
    auto work = [&]() {
        for (size_t i = next.fetch_add(1); i < points.size(); i = next.fetch_add(1)) {
            const SweepPoint& pt = points[i];
            json r;
            r["params"] = pt.params;
            r["seed"] = pt.seed;
            try {
                ResolvedNetwork net = resolve_network(pt.cfg.network);
                SimOutcome out = run_simulation(pt.cfg, net, pt.seed);
                r["empty_fraction"] = out.proxy.empty_fraction;
                r["drift_slope"] = out.proxy.drift_slope;
                if (std::isfinite(out.proxy.drift_slope_se))
                    r["drift_slope_se"] = out.proxy.drift_slope_se;
                r["time_avg_total"] = out.proxy.time_avg_total;
                r["total_final"] = out.traj.total.back();
                if (out.cycles) {
                    r["n_cycles"] = out.cycles->cycles.size();
                    if (!out.cycles->cycles.empty())
                        r["geo_mean_growth"] = out.cycles->geo_mean_growth;
                }
            } catch (const std::exception& e) {
                r["error"] = e.what();
            }
            results[i] = std::move(r);
        }
    };
    size_t n_workers = std::min<size_t>(cfg.sweep.workers, points.size());
    std::vector<std::thread> pool;
    for (size_t i = 0; i + 1 < n_workers; ++i) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    json out;
    out["schema_version"] = kSchemaVersion;
    out["mode"] = "sweep";
    out["master_seed"] = cfg.seed;
    out["points"] = results;
    int errors = 0;
    for (const auto& r : results)
        if (r.contains("error")) ++errors;
    out["errors"] = errors;

    if (!cfg.out_dir.empty()) {
        ensure_dir(cfg.out_dir);
        write_file((fs::path(cfg.out_dir) / "sweep.json").string(), out.dump(2) + "\n");
    }
    std::cout << "sweep: " << points.size() << " points, " << errors << " errors\n";
    for (size_t i = 0; i < results.size(); ++i) {
        const json& r = results[i];
        std::cout << "  ";
        for (const auto& [k, v] : points[i].params) std::cout << k << "=" << v << " ";
        if (r.contains("error"))
            std::cout << "ERROR: " << r["error"].get<std::string>() << "\n";
        else
            std::cout << "slope " << r["drift_slope"].get<double>() << ", final "
                      << r["total_final"].get<int64_t>() << "\n";
    }
    return 0;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg) {
    try {
        if (cfg.mode == "sweep") return mode_sweep(cfg);
        ResolvedNetwork net = resolve_network(cfg.network);
        if (cfg.mode == "simulate") {
            if (cfg.steps < 1) bad_config("steps must be >= 1");
            if (cfg.record_every < 1) bad_config("record_every must be >= 1");
            return mode_simulate(cfg, net);
        }
        if (cfg.mode == "fluid") return mode_fluid(cfg, net);
        if (cfg.mode == "check") return mode_check(cfg, net);
        if (cfg.mode == "build") return mode_build(cfg, net);
        bad_config("unknown mode '" + cfg.mode + "'");
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace swq
