#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swq/experiment.hpp"

namespace {

std::vector<std::pair<std::string, std::string>> parse_assignments(
    const std::vector<std::string>& specs, const std::string& flag) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& spec : specs) {
        size_t start = 0;
        while (start <= spec.size()) {
            size_t comma = spec.find(',', start);
            std::string tok = spec.substr(start, comma == std::string::npos ? std::string::npos
                                                                            : comma - start);
            if (!tok.empty()) {
                size_t eq = tok.find('=');
                if (eq == std::string::npos || eq == 0)
                    throw std::invalid_argument(flag + ": expected id=value, got '" + tok + "'");
                out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
            }
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& flag) {
    std::vector<double> out;
    size_t start = 0;
    while (start <= s.size()) {
        size_t comma = s.find(',', start);
        std::string tok = s.substr(start, comma == std::string::npos ? std::string::npos
                                                                     : comma - start);
        if (!tok.empty()) {
            try {
                size_t pos = 0;
                out.push_back(std::stod(tok, &pos));
                if (pos != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw std::invalid_argument(flag + ": not a number: '" + tok + "'");
            }
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

struct CliOptions {
    std::string config;
    std::string preset;
    std::string network_file;
    std::string a;
    std::optional<int64_t> nu, J, K;
    std::optional<double> eps;
    bool per_queue_arrivals = false;

    std::string policy;
    std::string weights;
    std::string class_weights;
    std::string tie_break;
    std::optional<uint64_t> policy_seed;

    std::vector<std::string> init;
    std::optional<int64_t> pattern_M;
    std::optional<double> pattern_eps;

    std::optional<int64_t> steps;
    std::optional<int64_t> record_every;
    std::optional<uint64_t> seed;
    std::string out;

    std::optional<double> dt, t_max, bound, window;
    std::string q0;
    std::string monitor;

    std::optional<int> workers;
};

void add_network_flags(CLI::App* sub, CliOptions& o) {
    sub->add_option("--config", o.config, "experiment config JSON; flags override its fields");
    sub->add_option("--preset", o.preset,
                    "fig2 | tandem | fig4-tandem | branching | fig6 | fig8-collapsed | lqfs");
    sub->add_option("--network-file", o.network_file, "network spec JSON from the build mode");
    sub->add_option("--a", o.a, "arrival rate, exact fraction like 7/12 or an integer");
    sub->add_option("--nu", o.nu, "hub/spread speed ratio");
    sub->add_option("--J", o.J, "spread count / tandem length");
    sub->add_option("--K", o.K, "chained class count (fig6)");
    sub->add_option("--eps", o.eps, "rate skew epsilon (fig6 / fig8-collapsed)");
    sub->add_flag("--per-queue-arrivals", o.per_queue_arrivals,
                  "independent Bernoulli(a/J) streams instead of one dispatch draw");
    sub->add_option("--out", o.out, "output directory for artifacts");
    sub->add_option("--seed", o.seed, "master seed");
}

void add_policy_flags(CLI::App* sub, CliOptions& o) {
    sub->add_option("--policy", o.policy,
                    "max_weight | weighted_max_weight | largest_class_weighted_max_weight | "
                    "lqfs_batch | back_pressure | proportional");
    sub->add_option("--weights", o.weights, "auto_rho or a comma list of queue weights");
    sub->add_option("--class-weights", o.class_weights,
                    "auto_rho or a comma list of class weights");
    sub->add_option("--tie-break", o.tie_break, "lexicographic | seeded_random");
    sub->add_option("--policy-seed", o.policy_seed, "tie-break stream seed (default: run seed)");
}

swq::ExperimentConfig build_config(const CliOptions& o, const std::string& mode) {
    swq::ExperimentConfig cfg;
    if (!o.config.empty()) cfg = swq::load_config_file(o.config);
    cfg.mode = mode;

    if (!o.preset.empty()) cfg.network.preset = o.preset;
    if (!o.network_file.empty()) cfg.network.file = o.network_file;
    if (!o.a.empty()) cfg.network.a = swq::Rational::parse(o.a);
    if (o.nu) cfg.network.nu = *o.nu;
    if (o.J) cfg.network.J = *o.J;
    if (o.K) cfg.network.K = *o.K;
    if (o.eps) cfg.network.eps = *o.eps;
    if (o.per_queue_arrivals) cfg.network.per_queue_arrivals = true;

    if (!o.policy.empty()) {
        if (o.policy == "max_weight") cfg.policy.kind = swq::PolicyKind::MaxWeight;
        else if (o.policy == "weighted_max_weight")
            cfg.policy.kind = swq::PolicyKind::WeightedMaxWeight;
        else if (o.policy == "largest_class_weighted_max_weight")
            cfg.policy.kind = swq::PolicyKind::LargestClassWeightedMaxWeight;
        else if (o.policy == "lqfs_batch") cfg.policy.kind = swq::PolicyKind::LQFSBatch;
        else if (o.policy == "back_pressure") cfg.policy.kind = swq::PolicyKind::BackPressure;
        else if (o.policy == "proportional")
            cfg.policy.kind = swq::PolicyKind::ProportionalScheduler;
        else throw std::invalid_argument("unknown --policy '" + o.policy + "'");
    }
    if (!o.weights.empty()) {
        if (o.weights == "auto_rho") cfg.policy.auto_rho_weights = true;
        else cfg.policy.weights = parse_double_list(o.weights, "--weights");
    }
    if (!o.class_weights.empty()) {
        if (o.class_weights == "auto_rho") cfg.policy.auto_rho_class_weights = true;
        else cfg.policy.class_weights = parse_double_list(o.class_weights, "--class-weights");
    }
    if (!o.tie_break.empty()) {
        if (o.tie_break == "lexicographic") cfg.policy.tie_break = swq::TieBreak::Lexicographic;
        else if (o.tie_break == "seeded_random")
            cfg.policy.tie_break = swq::TieBreak::SeededRandom;
        else throw std::invalid_argument("unknown --tie-break '" + o.tie_break + "'");
    }
    if (o.policy_seed) cfg.policy.seed = *o.policy_seed;

    for (const auto& [id, val] : parse_assignments(o.init, "--init")) {
        try {
            cfg.init.counts.emplace_back(id, std::stoll(val));
        } catch (const std::exception&) {
            throw std::invalid_argument("--init: not a count: '" + val + "'");
        }
    }
    if (o.pattern_M) {
        cfg.init.balanced_pattern = true;
        cfg.init.M = *o.pattern_M;
    }
    if (o.pattern_eps) cfg.init.pattern_eps = *o.pattern_eps;

    if (o.steps) cfg.steps = *o.steps;
    if (o.record_every) {
        cfg.record_every = *o.record_every;
        cfg.fluid.record_every = *o.record_every;
    }
    if (o.seed) cfg.seed = *o.seed;
    if (!o.out.empty()) cfg.out_dir = o.out;

    if (o.dt) cfg.fluid.dt = *o.dt;
    if (o.t_max) cfg.fluid.t_max = *o.t_max;
    if (o.bound) cfg.fluid.bound = *o.bound;
    if (o.window) cfg.fluid.window = *o.window;
    if (!o.monitor.empty()) cfg.fluid.monitor = o.monitor;
    for (const auto& [id, val] : parse_assignments({o.q0}, "--q0")) {
        try {
            cfg.fluid.q0[id] = std::stod(val);
        } catch (const std::exception&) {
            throw std::invalid_argument("--q0: not a mass: '" + val + "'");
        }
    }

    if (o.workers) cfg.sweep.workers = *o.workers;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"switched queueing network simulation and analysis toolkit"};
    app.require_subcommand(1);
    CliOptions o;

    CLI::App* build = app.add_subcommand("build", "write a network spec JSON from a preset");
    add_network_flags(build, o);

    CLI::App* check = app.add_subcommand(
        "check", "traffic solution, load margin, and growth-window conditions");
    add_network_flags(check, o);

    CLI::App* simulate = app.add_subcommand("simulate", "run the discrete-time simulation");
    add_network_flags(simulate, o);
    add_policy_flags(simulate, o);
    simulate->add_option("--init", o.init,
                         "initial jobs, id=count pairs (repeatable / comma separated)");
    simulate->add_option("--init-pattern-M", o.pattern_M,
                         "balanced two-component initial mass M");
    simulate->add_option("--init-pattern-eps", o.pattern_eps,
                         "small-side fraction for the balanced pattern");
    simulate->add_option("--steps", o.steps, "number of steps");
    simulate->add_option("--record-every", o.record_every, "sampling period");

    CLI::App* fluid = app.add_subcommand("fluid", "integrate the fluid model");
    add_network_flags(fluid, o);
    add_policy_flags(fluid, o);
    fluid->add_option("--dt", o.dt, "Euler step");
    fluid->add_option("--t-max", o.t_max, "integration horizon");
    fluid->add_option("--q0", o.q0, "initial masses, id=mass pairs (default uniform, mass 1)");
    fluid->add_option("--monitor", o.monitor, "h | g_branch");
    fluid->add_option("--bound", o.bound, "required decay rate for the certificate");
    fluid->add_option("--window", o.window, "slope window length");
    fluid->add_option("--record-every", o.record_every, "state sampling period");

    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter grid (config file required)");
    add_network_flags(sweep, o);
    add_policy_flags(sweep, o);
    sweep->add_option("--steps", o.steps, "number of steps per point");
    sweep->add_option("--record-every", o.record_every, "sampling period");
    sweep->add_option("--workers", o.workers, "worker thread count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    std::string mode;
    if (build->parsed()) mode = "build";
    else if (check->parsed()) mode = "check";
    else if (simulate->parsed()) mode = "simulate";
    else if (fluid->parsed()) mode = "fluid";
    else mode = "sweep";

    swq::ExperimentConfig cfg;
    try {
        cfg = build_config(o, mode);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return swq::run_experiment(cfg);
}
