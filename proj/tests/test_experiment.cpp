#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "swq/experiment.hpp"
#include "swq/rng.hpp"

using namespace swq;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("swq_exp_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("config parser fills every section") {
    json j = json::parse(R"({
        "schema_version": 1,
        "mode": "fluid",
        "seed": 42,
        "steps": 5000,
        "record_every": 10,
        "out": "/tmp/somewhere",
        "network": {"preset": "tandem", "a": "1/2", "J": 5,
                    "capacities": [2.0, 1.0, 1.0, 1.0, 1.0]},
        "policy": {"kind": "weighted_max_weight", "weights": [1.0, 2.0, 3.0, 4.0, 5.0],
                   "tie_break": "seeded_random", "seed": 99},
        "init": {"counts": {"Q1": 10}, "pattern": {"M": 360, "eps": 0.25}},
        "fluid": {"dt": 0.0005, "t_max": 12.5, "record_every": 4,
                  "q0": {"Q1": 0.5}, "monitor": "h", "bound": 0.04, "window": 0.1},
        "sweep": {"workers": 2, "grid": {"a": ["1/4", "1/2"], "steps": [100, 200]}}
    })");
    ExperimentConfig cfg = config_from_json(j);
    CHECK(cfg.mode == "fluid");
    CHECK(cfg.seed == 42);
    CHECK(cfg.steps == 5000);
    CHECK(cfg.record_every == 10);
    CHECK(cfg.out_dir == "/tmp/somewhere");
    CHECK(cfg.network.preset == "tandem");
    CHECK(*cfg.network.a == Rational(1, 2));
    CHECK(*cfg.network.J == 5);
    CHECK(cfg.network.capacities.size() == 5);
    REQUIRE(cfg.policy.kind.has_value());
    CHECK(*cfg.policy.kind == PolicyKind::WeightedMaxWeight);
    CHECK(cfg.policy.weights == std::vector<double>{1, 2, 3, 4, 5});
    CHECK(cfg.policy.tie_break == TieBreak::SeededRandom);
    CHECK(cfg.policy.seed == 99);
    REQUIRE(cfg.init.counts.size() == 1);
    CHECK(cfg.init.counts[0].first == "Q1");
    CHECK(cfg.init.counts[0].second == 10);
    CHECK(cfg.init.balanced_pattern);
    CHECK(cfg.init.M == 360);
    CHECK(cfg.init.pattern_eps == 0.25);
    CHECK(cfg.fluid.dt == 0.0005);
    CHECK(cfg.fluid.t_max == 12.5);
    CHECK(cfg.fluid.record_every == 4);
    CHECK(cfg.fluid.q0.at("Q1") == 0.5);
    CHECK(cfg.fluid.bound == 0.04);
    CHECK(cfg.fluid.window == 0.1);
    CHECK(cfg.sweep.workers == 2);
    CHECK(cfg.sweep.grid.at("a") == std::vector<std::string>{"1/4", "1/2"});
    // numeric grid entries are kept as their printed form
    CHECK(cfg.sweep.grid.at("steps") == std::vector<std::string>{"100", "200"});
}

TEST_CASE("config parser rejects unknown fields and bad values") {
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"bogus": 1})")), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"schema_version": 2})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"network": {"shape": "x"}})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"policy": {"mood": "x"}})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"policy": {"kind": "round_robin"}})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"policy": {"tie_break": "coin"}})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"init": {"jobs": 5}})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"fluid": {"step": 0.1}})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"fluid": {"q0": "gaussian"}})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"sweep": {"threads": 4}})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"network": {"a": 0.5}})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse("[1,2]")), std::invalid_argument);
}

TEST_CASE("rate parameter accepts fractions and integers") {
    auto cfg = config_from_json(json::parse(R"({"network": {"preset": "fig6", "a": 1}})"));
    CHECK(*cfg.network.a == Rational(1));
    auto cfg2 = config_from_json(json::parse(R"({"network": {"a": "7/12"}})"));
    CHECK(*cfg2.network.a == Rational(7, 12));
    auto cfg3 = config_from_json(json::parse(R"({"policy": {"weights": "auto_rho"}})"));
    CHECK(cfg3.policy.auto_rho_weights);
    CHECK(cfg3.policy.weights.empty());
    auto cfg4 = config_from_json(json::parse(R"({"policy": {"class_weights": "auto_rho"}})"));
    CHECK(cfg4.policy.auto_rho_class_weights);
}

TEST_CASE("preset resolution covers every named network") {
    NetworkChoice c;
    c.preset = "fig2";
    auto fig2 = resolve_network(c);
    CHECK(fig2.spec.n_queues() == 62);
    CHECK(fig2.tags.has_value());
    CHECK(*fig2.a == Rational(7, 12));
    CHECK(fig2.nu == 6);
    CHECK(fig2.J == 30);
    CHECK_FALSE(fig2.policy.has_value());

    c.preset = "fig4-tandem";
    auto tan = resolve_network(c);
    CHECK(tan.preset == "tandem");
    CHECK(tan.spec.n_queues() == 5);
    CHECK(*tan.a == Rational(1, 2));

    c.preset = "branching";
    auto br = resolve_network(c);
    CHECK(br.spec.n_queues() == 7);  // two-level binary tree by default

    c.preset = "fig6";
    auto f6 = resolve_network(c);
    CHECK(f6.spec.n_queues() == 4);
    CHECK(f6.spec.n_classes() == 42);
    CHECK(f6.tags.has_value());

    c.preset = "fig8-collapsed";
    auto f8 = resolve_network(c);
    CHECK(f8.spec.n_queues() == 4);
    CHECK(f8.spec.n_classes() == 4);

    c.preset = "lqfs";
    auto lq = resolve_network(c);
    REQUIRE(lq.policy.has_value());
    CHECK(lq.policy->kind == PolicyKind::LQFSBatch);

    c.preset = "fig99";
    CHECK_THROWS_AS(resolve_network(c), std::invalid_argument);
    c.preset = "";
    CHECK_THROWS_AS(resolve_network(c), std::invalid_argument);
    c.preset = "fig2";
    c.file = "/tmp/x.json";
    CHECK_THROWS_AS(resolve_network(c), std::invalid_argument);
}

TEST_CASE("policy resolution applies defaults and derived weights") {
    NetworkChoice c;
    c.preset = "fig2";
    auto net = resolve_network(c);

    PolicyChoice plain;
    auto p0 = resolve_policy(plain, net);
    CHECK(p0.kind == PolicyKind::MaxWeight);
    CHECK(p0.weights.empty());

    PolicyChoice rho;
    rho.auto_rho_weights = true;
    auto p1 = resolve_policy(rho, net);
    CHECK(p1.kind == PolicyKind::WeightedMaxWeight);
    REQUIRE(p1.weights.size() == 62);
    CHECK(p1.weights[net.tags->a0] == doctest::Approx(12.0 / 7.0).epsilon(1e-12));
    CHECK(p1.weights[net.tags->a_spread[5]] == doctest::Approx(360.0 / 7.0).epsilon(1e-12));

    c.preset = "lqfs";
    auto lq = resolve_network(c);
    auto p2 = resolve_policy(plain, lq);
    CHECK(p2.kind == PolicyKind::LQFSBatch);  // preset policy carried through
    PolicyChoice forced;
    forced.kind = PolicyKind::MaxWeight;
    auto p3 = resolve_policy(forced, lq);
    CHECK(p3.kind == PolicyKind::MaxWeight);

    PolicyChoice seeded;
    seeded.seed = 123;
    auto p4 = resolve_policy(seeded, net);
    CHECK(p4.seed == 123);
}

TEST_CASE("initial condition resolution handles ids and the balanced pattern") {
    NetworkChoice c;
    c.preset = "fig2";
    auto net = resolve_network(c);

    InitChoice byid;
    byid.counts = {{"A0", 7}};
    auto r = resolve_init(byid, net);
    REQUIRE(r.size() == 1);
    CHECK(r[0].first == net.tags->a0);
    CHECK(r[0].second == 7);

    InitChoice bad;
    bad.counts = {{"nope", 1}};
    CHECK_THROWS_AS(resolve_init(bad, net), std::invalid_argument);
    InitChoice neg;
    neg.counts = {{"A0", -1}};
    CHECK_THROWS_AS(resolve_init(neg, net), std::invalid_argument);

    InitChoice pat;
    pat.balanced_pattern = true;
    pat.M = 3600;
    pat.pattern_eps = 0.5;
    auto rp = resolve_init(pat, net);
    // 30 spread queues at M/(J+nu) = 100 each, remainder 600 on the busy hub,
    // floor(eps*M/nu) = 300 on the other hub
    REQUIRE(rp.size() == 32);
    int64_t sum = 0;
    for (size_t i = 0; i < 30; ++i) {
        CHECK(rp[i].second == 100);
        sum += rp[i].second;
    }
    CHECK(rp[30].first == net.tags->b0);
    CHECK(rp[30].second == 600);
    CHECK(rp[31].first == net.tags->a0);
    CHECK(rp[31].second == 300);

    // a queue holding several classes cannot be addressed by queue id
    c = NetworkChoice{};
    c.preset = "fig6";
    auto multi = resolve_network(c);
    InitChoice viaq;
    viaq.counts = {{multi.spec.queue_ids[1], 3}};
    CHECK_THROWS_AS(resolve_init(viaq, multi), std::invalid_argument);
    InitChoice pat2;
    pat2.balanced_pattern = true;
    pat2.M = 100;
    auto tandem = resolve_network([] {
        NetworkChoice t;
        t.preset = "tandem";
        return t;
    }());
    CHECK_THROWS_AS(resolve_init(pat2, tandem), std::invalid_argument);
}

TEST_CASE("doubles print in shortest round-trip form") {
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
    Rng rng(77, 0);
    for (int i = 0; i < 200; ++i) {
        double x = (rng.next_double() - 0.5) * 1e6;
        CHECK(std::stod(format_double(x)) == x);
    }
}

TEST_CASE("trajectory csv layout is exact") {
    NetworkSpec spec;
    spec.queue_ids = {"x", "y"};
    spec.class_ids = {"x", "y"};
    spec.class_queue = {0, 1};
    spec.arrival_rate = {0.1, 0.1};
    spec.service_p = {1.0, 1.0};
    spec.routing = {{0.0, 0.0}, {0.0, 0.0}};
    ConstraintRow row;
    row.support = {0, 1};
    row.coeff = {1.0, 1.0};
    row.bound = 1.0;
    spec.schedule_set.rows = {row};
    spec.finalize();

    Trajectory traj;
    traj.t = {0, 2};
    traj.qlen = {{1, 2}, {3, 4}};
    traj.total = {3, 7};
    std::ostringstream os;
    write_trajectory_csv(os, spec, traj);
    CHECK(os.str() == "t,x,y,total\n0,1,2,3\n2,3,4,7\n");

    traj.clen = {{1, 2}, {3, 4}};
    std::ostringstream os2;
    write_trajectory_csv(os2, spec, traj);
    CHECK(os2.str() == "t,x,y,total,x,y\n0,1,2,3,1,2\n2,3,4,7,3,4\n");

    FluidRun run;
    run.dt = 0.5;
    FluidState s;
    s.t = 0.0;
    s.q = {0.5, 0.25};
    run.states = {s};
    LyapunovReading rd;
    rd.t = 0.0;
    rd.h = 1.5;
    rd.f = 2.0;
    rd.g = 0.5;
    run.readings = {rd};
    std::ostringstream os3;
    write_fluid_csv(os3, spec, run);
    CHECK(os3.str() == "t,x,y,total,h,f,g\n0,0.5,0.25,0.75,1.5,2,0.5\n");
}

TEST_CASE("simulate mode writes stable artifacts") {
    auto dir1 = fresh_dir("sim1");
    auto dir2 = fresh_dir("sim2");
    ExperimentConfig cfg;
    cfg.mode = "simulate";
    cfg.network.preset = "tandem";
    cfg.network.J = 3;
    cfg.steps = 2000;
    cfg.record_every = 10;
    cfg.seed = 7;
    cfg.out_dir = dir1.string();
    REQUIRE(run_experiment(cfg) == 0);

    CHECK(fs::exists(dir1 / "trajectory.csv"));
    CHECK(fs::exists(dir1 / "plot.gp"));
    json summary = read_json(dir1 / "summary.json");
    CHECK(summary.at("schema_version") == 1);
    CHECK(summary.at("mode") == "simulate");
    CHECK(summary.at("seed") == 7);
    CHECK(summary.at("samples") == 201);
    CHECK(summary.at("network").at("queues") == 3);
    CHECK(summary.at("policy").at("kind") == "max_weight");
    CHECK(summary.contains("drift_slope"));
    CHECK(summary.contains("empty_fraction"));
    CHECK_FALSE(summary.contains("n_cycles"));  // no two-component tags here

    std::string header = slurp(dir1 / "trajectory.csv").substr(0, 15);
    CHECK(header == "t,Q1,Q2,Q3,tota");

    cfg.out_dir = dir2.string();
    REQUIRE(run_experiment(cfg) == 0);
    CHECK(slurp(dir1 / "trajectory.csv") == slurp(dir2 / "trajectory.csv"));
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("fluid mode writes a certificate") {
    auto dir = fresh_dir("fluid");
    ExperimentConfig cfg;
    cfg.mode = "fluid";
    cfg.network.preset = "tandem";
    cfg.network.J = 3;
    cfg.policy.auto_rho_weights = true;
    cfg.fluid.t_max = 12.0;
    cfg.fluid.bound = 0.1;
    cfg.out_dir = dir.string();
    REQUIRE(run_experiment(cfg) == 0);

    json cert = read_json(dir / "certificate.json");
    CHECK(cert.at("schema_version") == 1);
    CHECK(cert.at("monitor") == "h");
    CHECK(cert.at("bound") == 0.1);
    CHECK(cert.at("pass") == true);
    CHECK(cert.at("emptied") == true);
    CHECK(cert.at("worst_slope").get<double>() < 0.0);
    std::string fluid_csv = slurp(dir / "fluid.csv");
    CHECK(fluid_csv.rfind("t,Q1,Q2,Q3,total,h,f,g\n", 0) == 0);
    CHECK(fs::exists(dir / "plot.gp"));
    fs::remove_all(dir);
}

TEST_CASE("check mode reports the exact growth window") {
    auto dir = fresh_dir("check");
    ExperimentConfig cfg;
    cfg.mode = "check";
    cfg.network.preset = "fig2";
    cfg.out_dir = dir.string();
    REQUIRE(run_experiment(cfg) == 0);

    json out = read_json(dir / "check.json");
    CHECK(out.at("load_status") == "interior");
    CHECK(out.at("traffic_residual").get<double>() <= 1e-10);
    auto cond = out.at("conditions");
    CHECK(cond.at("all_pass") == true);
    CHECK(cond.at("a_lower") == "5/9");
    CHECK(cond.at("a_upper") == "95/161");
    CHECK(cond.at("r_rho") == "49/72");
    CHECK(cond.at("gamma_max") == "35/32");
    fs::remove_all(dir);
}

TEST_CASE("build mode output feeds back through the file loader") {
    auto dir = fresh_dir("build");
    ExperimentConfig cfg;
    cfg.mode = "build";
    cfg.network.preset = "tandem";
    cfg.network.J = 4;
    cfg.out_dir = dir.string();
    REQUIRE(run_experiment(cfg) == 0);
    REQUIRE(fs::exists(dir / "network.json"));

    NetworkChoice from_file;
    from_file.file = (dir / "network.json").string();
    auto net = resolve_network(from_file);
    CHECK(net.spec.n_queues() == 4);
    CHECK(network_to_json(net.spec) ==
          network_to_json(resolve_network([] {
                              NetworkChoice c;
                              c.preset = "tandem";
                              c.J = 4;
                              return c;
                          }())
                              .spec));
    fs::remove_all(dir);
}

TEST_CASE("driver exit codes distinguish config from runtime failures") {
    ExperimentConfig cfg;
    cfg.mode = "simulate";
    cfg.network.preset = "fig99";
    CHECK(run_experiment(cfg) == 2);

    cfg.network.preset = "tandem";
    cfg.steps = 0;
    CHECK(run_experiment(cfg) == 2);
    cfg.steps = 100;

    cfg.mode = "orbit";
    CHECK(run_experiment(cfg) == 2);

    cfg.mode = "fluid";
    cfg.fluid.monitor = "energy";
    CHECK(run_experiment(cfg) == 2);
    cfg.fluid.monitor = "h";

    cfg.mode = "simulate";
    cfg.network.preset.clear();
    cfg.network.file = "/nonexistent/net.json";
    CHECK(run_experiment(cfg) == 3);
}

TEST_CASE("sweep enumerates the grid and isolates failures") {
    auto dir = fresh_dir("sweep");
    ExperimentConfig cfg;
    cfg.mode = "sweep";
    cfg.network.preset = "tandem";
    cfg.network.J = 3;
    cfg.steps = 500;
    cfg.seed = 9;
    cfg.sweep.grid["a"] = {"1/4", "1/2", "3/2"};
    cfg.sweep.workers = 2;
    cfg.out_dir = dir.string();
    REQUIRE(run_experiment(cfg) == 0);

    json out = read_json(dir / "sweep.json");
    CHECK(out.at("mode") == "sweep");
    CHECK(out.at("master_seed") == 9);
    CHECK(out.at("errors") == 1);
    auto pts = out.at("points");
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].at("params").at("a") == "1/4");
    CHECK(pts[2].at("params").at("a") == "3/2");
    CHECK(pts[2].contains("error"));  // rate outside (0,1)
    CHECK_FALSE(pts[0].contains("error"));
    CHECK(pts[0].contains("drift_slope"));
    CHECK(pts[0].at("seed") == derive_seed(9, 0));
    CHECK(pts[1].at("seed") == derive_seed(9, 1));

    // an explicitly swept seed is used verbatim
    ExperimentConfig cfg2 = cfg;
    cfg2.sweep.grid.clear();
    cfg2.sweep.grid["seed"] = {"11", "12"};
    cfg2.out_dir.clear();
    auto dir2 = fresh_dir("sweep2");
    cfg2.out_dir = dir2.string();
    REQUIRE(run_experiment(cfg2) == 0);
    json out2 = read_json(dir2 / "sweep.json");
    CHECK(out2.at("points")[0].at("seed") == 11);
    CHECK(out2.at("points")[1].at("seed") == 12);
    CHECK(out2.at("errors") == 0);
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("sweep validates its grid") {
    ExperimentConfig cfg;
    cfg.mode = "sweep";
    cfg.network.preset = "tandem";
    CHECK(run_experiment(cfg) == 2);  // empty grid
    cfg.sweep.grid["a"] = {};
    CHECK(run_experiment(cfg) == 2);
    cfg.sweep.grid["a"] = {"1/2"};
    cfg.sweep.workers = 0;
    CHECK(run_experiment(cfg) == 2);
    cfg.sweep.workers = 1;
    cfg.sweep.grid["flavor"] = {"x"};
    CHECK(run_experiment(cfg) == 2);  // unsupported parameter
}
