// plab command line: graph, walks, model, sim, topple, lonely and exp subcommands.
// Results are printed as JSON on stdout; errors go to stderr with exit code 1.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "plab/plab.hpp"

using nlohmann::json;
using namespace plab;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<Vertex> parse_vertices(const std::string& s) {
    std::vector<Vertex> out;
    for (const auto& t : split(s, ',')) out.push_back(static_cast<Vertex>(std::stoul(t)));
    return out;
}

// A comma list, or a file of whitespace-separated vertex ids.
std::vector<Vertex> load_vertices(const std::string& s) {
    if (std::filesystem::exists(s)) {
        std::ifstream in(s);
        std::vector<Vertex> out;
        for (unsigned long v; in >> v;) out.push_back(static_cast<Vertex>(v));
        return out;
    }
    return parse_vertices(s);
}

// An edge-list file, or an inline family: rr:N:D[:SEED], complete:N, cycle:N,
// torus:SIDE, hypercube:DIM.
Graph load_graph(const std::string& spec, std::uint64_t seed) {
    const auto parts = split(spec, ':');
    if (parts.size() >= 2) {
        if (parts[0] == "rr") {
            if (parts.size() < 3) throw Error("rr graph spec is rr:N:D[:SEED]");
            const std::uint64_t s = parts.size() > 3 ? std::stoull(parts[3]) : seed;
            return gen_random_regular(std::stoul(parts[1]), std::stoul(parts[2]), s);
        }
        return gen_named(parse_named_family(parts[0]), std::stoul(parts[1]));
    }
    std::ifstream in(spec);
    if (!in) throw Error("cannot open graph file '" + spec + "'");
    return load_edge_list(in);
}

ModelSpec load_model_arg(const std::string& spec) {
    // Special models inline: special:KIND:speed[,speed]
    const auto parts = split(spec, ':');
    if (parts.size() == 3 && parts[0] == "special") {
        std::vector<double> speeds;
        for (const auto& t : split(parts[2], ',')) speeds.push_back(std::stod(t));
        return make_special(parse_special_kind(parts[1]), speeds);
    }
    std::ifstream in(spec);
    if (!in) throw Error("cannot open model file '" + spec + "'");
    return load_model(in);
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

json walk_result(const WalkFunctionalResult& r) {
    return {{"estimate", r.estimate}, {"stderr", r.stderr_}, {"samples", r.samples}, {"method", to_string(r.method)}};
}

Configuration make_init(const std::string& spec, const Graph& g, const ModelSpec& m, std::uint64_t seed) {
    if (spec == "balanced") return init_balanced_random(g, m.num_species(), seed);
    if (spec.rfind("stationary:", 0) == 0) {
        const DensityVector d = parse_densities(m, spec.substr(11));
        std::vector<std::size_t> counts;
        for (const auto& x : d)
            counts.push_back(static_cast<std::size_t>(std::llround(to_double(x) * static_cast<double>(g.num_vertices()))));
        return init_stationary(g, counts, seed);
    }
    if (spec.rfind("file:", 0) == 0) {
        // One "vertex species-name" pair per line.
        std::ifstream in(spec.substr(5));
        if (!in) throw Error("cannot open init file '" + spec.substr(5) + "'");
        std::vector<Placement> place;
        Vertex v;
        std::string name;
        while (in >> v >> name) place.push_back({v, m.id(name)});
        return init_explicit(g.num_vertices(), m.num_species(), place);
    }
    throw Error("unknown init '" + spec + "' (balanced, stationary:A=0.5,..., file:PATH)");
}

json event_json(const Event& e) {
    json ms = json::array();
    for (const auto& m : e.meetings)
        ms.push_back({{"other", m.other}, {"other_species", m.other_species}, {"effective", m.effective}, {"output", m.output}});
    return {{"step", e.step}, {"mover", e.mover}, {"species", e.mover_species}, {"from", e.from},
            {"to", e.to},     {"moved", e.moved}, {"meetings", ms}};
}

json classification_json(const ModelSpec& m, const Classification& cls) {
    json types = json::object();
    for (std::size_t s = 0; s < cls.types.size(); ++s) {
        const auto& t = cls.types[s];
        types[m.species(static_cast<SpeciesId>(s)).name] = {{"persistent", t.persistent},
                                                            {"min_density", to_string(t.min_density)}};
    }
    return {{"types", types},
            {"system_persistent", cls.system_persistent},
            {"min_total", to_string(cls.min_total)},
            {"caveats", cls.caveats}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"plab: interacting particle systems on graphs"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.fallthrough();
    unsigned threads = 1;
    std::uint64_t seed = 1;
    app.add_option("--threads", threads, "worker threads for replicate fan-out")->capture_default_str();
    app.add_option("--seed", seed, "master seed")->capture_default_str();

    // graph
    auto* graph = app.add_subcommand("graph", "generate and inspect graphs")->require_subcommand(1);
    std::string family = "rr", out_path, graph_spec, walk_name = "simple";
    std::size_t n = 0, d = 0;
    auto* gen = graph->add_subcommand("gen", "generate a graph as an edge list");
    gen->add_option("--family", family, "rr | complete | cycle | torus | hypercube")->capture_default_str();
    gen->add_option("--n", n, "vertices (side for torus, dimension for hypercube)")->required();
    gen->add_option("--d", d, "degree for rr");
    gen->add_option("--out", out_path, "output file (default stdout)");
    auto* spectrum = graph->add_subcommand("spectrum", "second eigenvalue of the walk");
    spectrum->add_option("--graph", graph_spec, "edge-list file or inline family spec")->required();
    spectrum->add_option("--walk", walk_name)->capture_default_str();

    // walks
    auto* walks = app.add_subcommand("walks", "hitting, return and meeting times")->require_subcommand(1);
    std::string target_list, strategy = "bernoulli:0.5";
    Vertex x = 0, y = 0;
    std::size_t reps = 1000;
    auto* hitting = walks->add_subcommand("hitting", "exact hitting times to a target set");
    hitting->add_option("--graph", graph_spec)->required();
    hitting->add_option("--target", target_list, "comma-separated vertices")->required();
    hitting->add_option("--walk", walk_name)->capture_default_str();
    auto* hmax = walks->add_subcommand("hmax", "worst-case hitting time");
    hmax->add_option("--graph", graph_spec)->required();
    hmax->add_option("--walk", walk_name)->capture_default_str();
    auto* meet = walks->add_subcommand("meet", "meeting time of two tokens under a strategy");
    meet->add_option("--graph", graph_spec)->required();
    meet->add_option("--x", x)->required();
    meet->add_option("--y", y)->required();
    meet->add_option("--strategy", strategy, "bernoulli:P | alternating")->capture_default_str();
    meet->add_option("--reps", reps)->capture_default_str();
    meet->add_option("--walk", walk_name)->capture_default_str();

    // model
    auto* model = app.add_subcommand("model", "reaction model checks")->require_subcommand(1);
    std::string model_spec, densities;
    auto* check = model->add_subcommand("check", "dissipativity, persistence, agential, ephemeral ordering");
    check->add_option("--model", model_spec, "JSON file or special:KIND:speeds")->required();
    check->add_option("--densities", densities, "e.g. A=0.55,B=0.45 (default: equal)");

    // sim
    auto* sim = app.add_subcommand("sim", "run the dynamics")->require_subcommand(1);
    std::string init = "balanced", log_path;
    std::uint64_t step_cap = 1'000'000'000ULL, series = 0;
    auto* sim_run = sim->add_subcommand("run", "one simulation to equilibrium");
    sim_run->add_option("--graph", graph_spec)->required();
    sim_run->add_option("--model", model_spec)->required();
    sim_run->add_option("--init", init, "balanced | stationary:A=..,B=.. | file:PATH")->capture_default_str();
    sim_run->add_option("--walk", walk_name)->capture_default_str();
    sim_run->add_option("--step-cap", step_cap)->capture_default_str();
    sim_run->add_option("--series", series, "record counts every this many steps");
    sim_run->add_option("--log", log_path, "event log (JSON lines)");
    sim_run->add_option("--out", out_path, "result file (default stdout)");

    // topple
    auto* topple = app.add_subcommand("topple", "site-wise toppling with stationary reds");
    std::string blue_list, red_list, order = "random";
    std::size_t stack_len = 64, orders = 1;
    topple->add_option("--graph", graph_spec)->required();
    topple->add_option("--blue", blue_list, "vertex list or file")->required();
    topple->add_option("--red", red_list, "vertex list or file")->required();
    topple->add_option("--stack-len", stack_len)->capture_default_str();
    topple->add_option("--policy,--order", order, "random | greedy | v1,v2,...")->capture_default_str();
    topple->add_option("--orders", orders, "random orders to compare")->capture_default_str();

    // lonely
    auto* lonely = app.add_subcommand("lonely", "non-interacting walkers")->require_subcommand(1);
    std::size_t walkers = 0;
    std::uint64_t steps = 0;
    double lambda = 1.1;
    std::string rate = "auto", horizon = "auto";
    auto* plain = lonely->add_subcommand("plain", "one walker steps per time step");
    plain->add_option("--graph", graph_spec)->required();
    plain->add_option("--walkers", walkers)->required();
    plain->add_option("--steps", steps)->required();
    plain->add_option("--walk", walk_name)->capture_default_str();
    auto* poisson = lonely->add_subcommand("poisson", "Poissonised system with collision classes");
    poisson->add_option("--graph", graph_spec)->required();
    poisson->add_option("--lambda", lambda)->capture_default_str();
    poisson->add_option("--rate", rate, "move rate or auto (1/n)")->capture_default_str();
    poisson->add_option("--horizon", horizon, "time steps or auto (ceil(0.11 n ln n))")->capture_default_str();

    // exp
    auto* exp = app.add_subcommand("exp", "run an experiment plan");
    std::string plan_path, out_dir;
    exp->add_option("--plan", plan_path, "JSON plan file")->required();
    exp->add_option("--out", out_dir, "directory for results.jsonl and summary.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        const WalkKind walk = parse_walk_kind(walk_name);
        if (*gen) {
            Graph g = family == "rr" ? gen_random_regular(n, d, seed) : gen_named(parse_named_family(family), n);
            if (out_path.empty()) {
                save_edge_list(std::cout, g);
            } else {
                std::ofstream os(out_path);
                save_edge_list(os, g);
            }
        } else if (*spectrum) {
            const Graph g = load_graph(graph_spec, seed);
            const double mu2 = spectral_mu2(g, walk);
            print({{"n", g.num_vertices()}, {"d", g.d()}, {"walk", to_string(walk)}, {"mu2", mu2}, {"gap", 1 - mu2}});
        } else if (*hitting) {
            const Graph g = load_graph(graph_spec, seed);
            const auto target = parse_vertices(target_list);
            print({{"target", target}, {"walk", to_string(walk)}, {"hitting", hitting_exact(g, target, walk)}});
        } else if (*hmax) {
            const Graph g = load_graph(graph_spec, seed);
            const auto [hx, hy] = h_max_pair(g, walk);
            print({{"h_max", h_max(g, walk)}, {"x", hx}, {"y", hy}});
        } else if (*meet) {
            const Graph g = load_graph(graph_spec, seed);
            McOptions mc;
            mc.reps = reps;
            mc.seed = seed;
            mc.threads = threads;
            print(walk_result(meeting_time_mc(g, x, y, Strategy::parse(strategy), walk, mc)));
        } else if (*check) {
            const ModelSpec m = load_model_arg(model_spec);
            DensityVector d0;
            if (densities.empty()) {
                d0.assign(m.num_species(), Rational(1, static_cast<long>(m.num_species())));
            } else {
                d0 = parse_densities(m, densities);
            }
            const auto diss = validate_dissipative(m);
            const auto cls = persistence_classify(m, d0);
            const auto agential = validate_agential(m, cls);
            const auto ordering = ephemeral_ordering(m, cls);
            json ord = {{"ok", ordering.ok}};
            std::vector<std::string> names;
            for (auto s : (ordering.ok ? ordering.order : ordering.cycle)) names.push_back(m.species(s).name);
            ord[ordering.ok ? "order" : "cycle"] = names;
            print({{"dissipative", {{"ok", diss.ok}, {"violations", diss.violations}}},
                   {"classification", classification_json(m, cls)},
                   {"agential", {{"ok", agential.ok}, {"violations", agential.violations}}},
                   {"ephemeral_ordering", ord}});
        } else if (*sim_run) {
            const Graph g = load_graph(graph_spec, seed);
            const ModelSpec m = load_model_arg(model_spec);
            Configuration c = make_init(init, g, m, stream(seed, 1)());
            EventLog log;
            RunOptions ro;
            ro.step_cap = step_cap;
            ro.series_interval = series;
            if (!log_path.empty()) ro.log = &log;
            const auto initial = c.counts();
            const SimResult res = run(g, m, c, walk, seed, ro);
            json ser = json::array();
            for (const auto& p : res.series) ser.push_back({{"step", p.step}, {"counts", p.counts}});
            json out{{"termination", to_string(res.termination)},
                     {"steps", res.steps},
                     {"steps_by_species", res.steps_by_species},
                     {"reactions", res.reactions},
                     {"max_occupancy", res.max_occupancy},
                     {"initial_counts", initial},
                     {"final_counts", res.final_counts},
                     {"series", ser}};
            if (!log_path.empty()) {
                std::ofstream os(log_path);
                for (const auto& e : log.events) os << event_json(e).dump() << '\n';
                out["log_truncated"] = log.truncated;
            }
            if (out_path.empty()) {
                print(out);
            } else {
                std::ofstream os(out_path);
                os << out.dump(2) << '\n';
            }
        } else if (*topple) {
            const Graph g = load_graph(graph_spec, seed);
            const auto blue = load_vertices(blue_list), red = load_vertices(red_list);
            TopplingPolicy policy = RandomOrder{seed};
            if (order == "greedy") {
                policy = GreedyFirst{};
            } else if (order != "random") {
                policy = FixedOrder{parse_vertices(order)};
            }
            const auto res = toppling_run_with_retry(g, blue, red, stack_len, seed, policy);
            json out{{"odometer", res.odometer}, {"total_moves", res.total_moves}, {"legal", res.legal}, {"complete", res.complete}};
            if (orders > 1) {
                // Shared stacks, fresh random orders; stacks double until every order completes.
                for (std::size_t len = std::max<std::size_t>(stack_len, 1);; len *= 2) {
                    try {
                        const auto inst = toppling_build(g, blue, red, len, seed);
                        bool equal = true;
                        for (std::size_t i = 0; i < orders; ++i) {
                            const auto o = toppling_run(inst, RandomOrder{seed + 1 + i});
                            if (o.odometer != res.odometer || o.total_moves != res.total_moves) equal = false;
                        }
                        out["orders"] = orders;
                        out["odometers_equal"] = equal;
                        break;
                    } catch (const StackExhausted&) {
                        if (len >= (std::size_t{1} << 26)) throw;
                    }
                }
            }
            print(out);
        } else if (*plain) {
            const Graph g = load_graph(graph_spec, seed);
            const auto res = run_plain(g, walkers, steps, walk, seed);
            print({{"walkers", walkers}, {"steps", steps}, {"lonely", res.lonely}, {"met", res.met}});
        } else if (*poisson) {
            const Graph g = load_graph(graph_spec, seed);
            PoissonOptions po;
            po.lambda0 = lambda;
            po.rate = rate == "auto" ? 0.0 : std::stod(rate);
            if (horizon != "auto") po.horizon = std::stoull(horizon);
            po.record_moves = false;
            const auto sys = run_poissonised(g, po, seed);
            const auto& s = sys.summary;
            print({{"lambda0", sys.lambda0}, {"rate", sys.rate}, {"horizon", sys.horizon}, {"particles", s.particles},
                   {"lonely", s.lonely}, {"strong_colliders", s.strong_colliders}, {"weak_colliders", s.weak_colliders},
                   {"max_multi_move", s.max_multi_move}, {"total_moves", s.total_moves}});
        } else if (*exp) {
            std::ifstream in(plan_path);
            if (!in) throw Error("cannot open plan '" + plan_path + "'");
            ExperimentPlan plan = plan_from_json(json::parse(in));
            if (app.get_option("--threads")->count()) plan.threads = threads;
            if (app.get_option("--seed")->count()) plan.seed = seed;
            if (!out_dir.empty()) plan.output = out_dir;
            const ScalingRun res = run_scaling(plan);
            if (!plan.output.empty()) {
                std::filesystem::create_directories(plan.output);
                std::ofstream rj(plan.output + "/results.jsonl"), sc(plan.output + "/summary.csv");
                if (!rj || !sc) throw Error("cannot write to '" + plan.output + "'");
                write_results_jsonl(rj, plan, res);
                write_summary_csv(sc, res);
            }
            json cells = json::array();
            for (const auto& c : res.cells)
                cells.push_back({{"n", c.n}, {"k", c.k}, {"mean_T", c.mean}, {"stderr", c.stderr_}, {"capped", c.capped}});
            json out{{"scenario", plan.scenario}, {"cells", cells}};
            if (res.fit) {
                out["fit"] = {{"law", to_string(res.fit->law)}, {"c", res.fit->c}, {"residuals", res.fit->residuals},
                              {"max_residual", res.fit->max_residual()}};
            }
            print(out);
        }
    } catch (const std::exception& e) {
        std::cerr << "plab: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
