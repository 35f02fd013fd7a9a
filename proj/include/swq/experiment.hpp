#pragma once
// Experiment driver shared by the CLI and the test suite: preset resolution,
// config parsing, artifact writers, and the simulate/fluid/check/sweep modes.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "swq/analysis.hpp"
#include "swq/fluid.hpp"
#include "swq/network.hpp"
#include "swq/policy.hpp"
#include "swq/rational.hpp"
#include "swq/sim.hpp"

namespace swq {

inline constexpr int kSchemaVersion = 1;

// Which network to run: a named preset with optional parameter overrides, or
// a spec file produced by the build mode.  Presets: fig2, tandem (alias
// fig4-tandem), branching, fig6, fig8-collapsed, lqfs.
struct NetworkChoice {
    std::string preset;
    std::string file;
    std::optional<Rational> a;
    std::optional<int64_t> nu;
    std::optional<int64_t> J;
    std::optional<int64_t> K;
    std::optional<double> eps;
    bool per_queue_arrivals = false;
    std::vector<double> capacities;   // tandem / branching
    std::vector<int> parent;          // branching tree override
    std::vector<double> entry_prob;
};

struct PolicyChoice {
    std::optional<PolicyKind> kind;     // default: preset policy, else plain max-weight
    bool auto_rho_weights = false;      // queue weights 1/rho
    bool auto_rho_class_weights = false;
    std::vector<double> weights;
    std::vector<double> class_weights;
    TieBreak tie_break = TieBreak::Lexicographic;
    uint64_t seed = 0;  // 0: reuse the run seed
};

struct InitChoice {
    // id -> job count; class ids, or queue ids for single-class queues
    std::vector<std::pair<std::string, int64_t>> counts;
    // balanced two-component pattern: mass M on the B side with hub close to
    // nu times each spread queue, floor(eps*M/nu) jobs on hub A0
    bool balanced_pattern = false;
    int64_t M = 0;
    double pattern_eps = 0.0;
};

struct FluidChoice {
    double dt = 1e-3;
    double t_max = 50.0;
    int64_t record_every = 1;
    std::map<std::string, double> q0;  // queue id -> mass; empty: uniform mass 1
    std::string monitor = "h";         // h | g_branch
    double bound = 0.0;                // required decay rate
    double window = 0.05;
};

struct SweepChoice {
    // parameter name -> grid values (as strings; parsed per parameter).
    // Supported: a, nu, J, K, eps, seed, steps.
    std::map<std::string, std::vector<std::string>> grid;
    int workers = 4;
};

struct ExperimentConfig {
    std::string mode = "simulate";  // simulate | fluid | check | sweep | build
    NetworkChoice network;
    PolicyChoice policy;
    InitChoice init;
    int64_t steps = 100000;
    int64_t record_every = 1;
    uint64_t seed = 1;
    std::string out_dir;  // empty: stdout only, no artifact files
    FluidChoice fluid;
    SweepChoice sweep;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

struct ResolvedNetwork {
    NetworkSpec spec;
    std::optional<ComponentTags> tags;   // two-component presets
    std::optional<PolicyConfig> policy;  // preset-supplied policy (lqfs)
    std::string preset;
    std::optional<Rational> a;
    int64_t nu = 0;
    int64_t J = 0;
};

ResolvedNetwork resolve_network(const NetworkChoice& choice);
PolicyConfig resolve_policy(const PolicyChoice& choice, const ResolvedNetwork& net);
// class index -> initial job count, ids resolved and pattern expanded
std::vector<std::pair<int, int64_t>> resolve_init(const InitChoice& init,
                                                  const ResolvedNetwork& net);

struct SimOutcome {
    Trajectory traj;
    StabilityProxy proxy;
    std::optional<CycleScan> cycles;
    PolicyConfig policy;
    uint64_t seed = 0;
    double wall_time_s = 0.0;
};

SimOutcome run_simulation(const ExperimentConfig& cfg, const ResolvedNetwork& net,
                          uint64_t seed);

// shortest round-trip decimal form (to_chars), identical across reruns
std::string format_double(double x);

void write_trajectory_csv(std::ostream& os, const NetworkSpec& spec, const Trajectory& traj);
void write_fluid_csv(std::ostream& os, const NetworkSpec& spec, const FluidRun& run);

// Executes cfg.mode and writes artifacts under cfg.out_dir.
// Returns 0 on success, 2 on config/validation errors, 3 on runtime failures.
int run_experiment(const ExperimentConfig& cfg);

}  // namespace swq
