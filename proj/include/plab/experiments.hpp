#pragma once

// Scenario orchestration: replicate fan-out over graph/parameter grids,
// scaling-law fits, bound checks and the moving-target estimate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "plab/configuration.hpp"
#include "plab/engine.hpp"
#include "plab/error.hpp"
#include "plab/graph.hpp"
#include "plab/model_io.hpp"
#include "plab/parallel.hpp"
#include "plab/reaction_model.hpp"
#include "plab/rng.hpp"
#include "plab/spectral.hpp"
#include "plab/special_models.hpp"
#include "plab/stats.hpp"
#include "plab/walks.hpp"

namespace plab {

// ---------------------------------------------------------------------------
// Laws and fits
// ---------------------------------------------------------------------------

enum class Law { NLogN, N, N2OverK, N34 };

inline const char* to_string(Law l) {
    switch (l) {
        case Law::NLogN: return "n_ln_n";
        case Law::N: return "n";
        case Law::N2OverK: return "n2_over_k";
        case Law::N34: return "n_3_4";
    }
    return "?";
}

inline Law parse_law(const std::string& s) {
    if (s == "n_ln_n" || s == "nlogn" || s == "n-ln-n") return Law::NLogN;
    if (s == "n") return Law::N;
    if (s == "n2_over_k" || s == "n2/k") return Law::N2OverK;
    if (s == "n_3_4" || s == "n^3/4") return Law::N34;
    throw Error("unknown law '" + s + "' (n_ln_n, n, n2_over_k, n_3_4)");
}

// Natural log throughout.
inline double law_value(Law l, double n, double k = 1.0) {
    switch (l) {
        case Law::NLogN: return n * std::log(n);
        case Law::N: return n;
        case Law::N2OverK:
            if (!(k > 0)) throw Error("law n2_over_k needs k > 0");
            return n * n / k;
        case Law::N34: return std::pow(n, 0.75);
    }
    return 0.0;
}

struct Cell {
    double n = 0;
    double k = 0;
    double mean = 0;
    double stderr_ = 0;
    std::size_t replicates = 0;
    std::size_t capped = 0;  // replicates that hit the step cap
    double mu2 = std::numeric_limits<double>::quiet_NaN();
};

struct ScalingFit {
    Law law = Law::NLogN;
    double c = 0;
    std::vector<Cell> cells;          // cells used in the fit
    std::vector<double> residuals;    // |mean - c f| / (c f), per fitted cell
    std::vector<Cell> excluded;       // step-capped cells
    double max_residual() const {
        double m = 0;
        for (double r : residuals) m = std::max(m, r);
        return m;
    }
};

// Weighted least squares for T = c f(n): weights 1/stderr^2, or uniform when
// every stderr is zero.
inline ScalingFit fit(std::span<const Cell> samples, Law law) {
    if (samples.size() < 2) throw Error("fit: need at least 2 cells");
    std::size_t zero = 0;
    for (const auto& s : samples) {
        if (!(s.stderr_ >= 0) || !std::isfinite(s.stderr_)) throw Error("fit: invalid standard error");
        if (s.stderr_ == 0) ++zero;
    }
    if (zero != 0 && zero != samples.size()) throw Error("fit: degenerate weights (some standard errors are zero)");
    ScalingFit out;
    out.law = law;
    double num = 0, den = 0;
    for (const auto& s : samples) {
        const double f = law_value(law, s.n, s.k);
        if (!(f > 0)) throw Error("fit: law value must be positive");
        const double w = zero ? 1.0 : 1.0 / (s.stderr_ * s.stderr_);
        num += w * f * s.mean;
        den += w * f * f;
    }
    out.c = num / den;
    for (const auto& s : samples) {
        const double pred = out.c * law_value(law, s.n, s.k);
        out.residuals.push_back(std::abs(s.mean - pred) / pred);
        out.cells.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

struct GraphFamily {
    std::string name = "random-regular";  // random-regular | complete | cycle | torus | hypercube
    std::size_t d = 10;

    // For torus the size argument is the vertex count (must be a square); for
    // hypercube it must be a power of two.
    Graph make(std::size_t n, std::uint64_t seed) const {
        if (name == "random-regular") return gen_random_regular(n, d, seed);
        const NamedFamily kind = parse_named_family(name);
        if (kind == NamedFamily::Torus2d) {
            const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
            if (side * side != n) throw Error("torus family needs a square vertex count");
            return gen_named(kind, side);
        }
        if (kind == NamedFamily::Hypercube) {
            std::size_t dim = 0;
            while ((std::size_t{1} << dim) < n) ++dim;
            if ((std::size_t{1} << dim) != n) throw Error("hypercube family needs a power-of-two vertex count");
            return gen_named(kind, dim);
        }
        return gen_named(kind, n);
    }
};

enum class InitKind { Balanced, Stationary, Distinct };

inline InitKind parse_init_kind(const std::string& s) {
    if (s == "balanced") return InitKind::Balanced;
    if (s == "stationary") return InitKind::Stationary;
    if (s == "distinct") return InitKind::Distinct;
    throw Error("unknown init '" + s + "' (balanced, stationary, distinct)");
}

struct ExperimentPlan {
    std::string scenario = "scaling";
    GraphFamily family;
    std::vector<std::size_t> n_values;
    std::vector<std::size_t> k_values;  // per-cell species-0 count for distinct/stationary init; empty: n/2 each
    ModelSpec model = make_two_type_annihilation(0.5);
    InitKind init = InitKind::Balanced;
    std::vector<double> densities;  // stationary init: particles of species s = round(density * n)
    std::size_t replicates = 50;
    WalkKind walk = WalkKind::Simple;
    Law law = Law::NLogN;
    std::uint64_t seed = 1;
    std::uint64_t step_cap = 0;  // 0: 1000 n ln n + 10^6
    unsigned threads = 1;
    bool record_mu2 = false;
    std::string output;  // directory for results.jsonl and summary.csv; empty: none

    void validate() const {
        if (n_values.empty()) throw Error("plan: n grid is empty");
        if (replicates < 1) throw Error("plan: replicates must be >= 1");
        if (!k_values.empty() && k_values.size() != n_values.size() && n_values.size() != 1)
            throw Error("plan: k grid must match the n grid or n must be a single value");
    }

    std::size_t num_cells() const { return std::max(n_values.size(), k_values.size()); }
    std::size_t n_of(std::size_t cell) const { return n_values.size() == 1 ? n_values[0] : n_values[cell]; }
    std::optional<std::size_t> k_of(std::size_t cell) const {
        if (k_values.empty()) return std::nullopt;
        return k_values.size() == 1 ? k_values[0] : k_values[cell];
    }
};

inline ExperimentPlan plan_from_json(const nlohmann::json& j) {
    ExperimentPlan p;
    p.scenario = j.value("scenario", p.scenario);
    if (j.contains("graph")) {
        const auto& gj = j.at("graph");
        p.family.name = gj.value("family", p.family.name);
        p.family.d = gj.value("d", p.family.d);
    }
    p.n_values = j.at("n").get<std::vector<std::size_t>>();
    p.k_values = j.value("k", std::vector<std::size_t>{});
    if (j.contains("model")) {
        const auto& mj = j.at("model");
        if (mj.is_object() && mj.contains("special")) {
            const auto speeds = mj.at("speeds").get<std::vector<double>>();
            p.model = make_special(parse_special_kind(mj.at("special").get<std::string>()), speeds);
        } else {
            p.model = model_from_json(mj);
        }
    }
    p.init = parse_init_kind(j.value("init", std::string("balanced")));
    p.densities = j.value("densities", std::vector<double>{});
    p.replicates = j.value("replicates", p.replicates);
    p.walk = parse_walk_kind(j.value("walk", std::string("simple")));
    p.law = parse_law(j.value("law", std::string("n_ln_n")));
    p.seed = j.value("seed", p.seed);
    p.step_cap = j.value("step_cap", p.step_cap);
    p.threads = j.value("threads", p.threads);
    p.record_mu2 = j.value("record_mu2", p.record_mu2);
    p.output = j.value("output", std::string());
    p.validate();
    return p;
}

struct ReplicateRecord {
    std::size_t cell = 0;
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t replicate = 0;
    std::uint64_t steps = 0;
    Termination termination = Termination::Equilibrium;
    std::vector<std::size_t> final_counts;
};

struct ScalingRun {
    std::vector<Cell> cells;
    std::vector<ReplicateRecord> records;
    std::optional<ScalingFit> fit;  // absent when fewer than 2 uncapped cells
};

inline std::uint64_t default_experiment_cap(std::size_t n) {
    const double nn = static_cast<double>(n);
    return static_cast<std::uint64_t>(1000.0 * nn * std::log(std::max(nn, 2.0))) + 1'000'000ULL;
}

namespace detail {

inline Configuration plan_init(const ExperimentPlan& p, const Graph& g, std::optional<std::size_t> k, std::uint64_t seed) {
    const std::size_t n = g.num_vertices();
    const std::size_t ns = p.model.num_species();
    switch (p.init) {
        case InitKind::Balanced:
            if (ns < 2) throw Error("balanced init needs two species");
            return init_balanced_random(g, ns, seed);
        case InitKind::Distinct: {
            std::vector<std::size_t> counts(ns, 0);
            if (k) {
                if (ns < 2 || *k > n) throw Error("distinct init: bad k");
                counts[0] = *k;
                counts[1] = n - *k;
            } else {
                for (auto& c : counts) c = n / ns;
            }
            return init_distinct_random(g, counts, seed);
        }
        case InitKind::Stationary: {
            if (p.densities.size() != ns) throw Error("stationary init needs one density per species");
            std::vector<std::size_t> counts(ns);
            for (std::size_t s = 0; s < ns; ++s)
                counts[s] = static_cast<std::size_t>(std::llround(p.densities[s] * static_cast<double>(n)));
            return init_stationary(g, counts, seed);
        }
    }
    throw Error("unreachable init");
}

}  // namespace detail

// Each replicate draws its own graph and start from stream(seed, cell, replicate).
inline ScalingRun run_scaling(const ExperimentPlan& plan) {
    plan.validate();
    ScalingRun out;
    for (std::size_t cell = 0; cell < plan.num_cells(); ++cell) {
        const std::size_t n = plan.n_of(cell);
        const auto k = plan.k_of(cell);
        const std::uint64_t cap = plan.step_cap ? plan.step_cap : default_experiment_cap(n);
        auto recs = parallel_map<ReplicateRecord>(plan.replicates, plan.threads, [&](std::size_t r) {
            Rng seeds = stream(plan.seed, cell, r);
            const std::uint64_t gseed = seeds(), iseed = seeds(), eseed = seeds();
            const Graph g = plan.family.make(n, gseed);
            Configuration c = detail::plan_init(plan, g, k, iseed);
            RunOptions ro;
            ro.step_cap = cap;
            const SimResult res = run(g, plan.model, c, plan.walk, eseed, ro);
            return ReplicateRecord{cell, n, k.value_or(0), r, res.steps, res.termination, res.final_counts};
        });
        Cell agg;
        agg.n = static_cast<double>(n);
        agg.k = static_cast<double>(k.value_or(0));
        MeanAccumulator acc;
        for (const auto& rec : recs) {
            acc.add(static_cast<double>(rec.steps));
            if (rec.termination == Termination::StepCap) ++agg.capped;
        }
        agg.mean = acc.mean();
        agg.stderr_ = acc.stderr_of_mean();
        agg.replicates = recs.size();
        if (plan.record_mu2) {
            Rng seeds = stream(plan.seed, cell, 0);
            agg.mu2 = spectral_mu2(plan.family.make(n, seeds()), plan.walk);
        }
        out.cells.push_back(agg);
        out.records.insert(out.records.end(), recs.begin(), recs.end());
    }
    std::vector<Cell> usable, capped;
    for (const auto& c : out.cells) (c.capped ? capped : usable).push_back(c);
    if (usable.size() >= 2) {
        out.fit = fit(usable, plan.law);
        out.fit->excluded = capped;
    }
    return out;
}

inline void write_results_jsonl(std::ostream& os, const ExperimentPlan& plan, const ScalingRun& run) {
    for (const auto& r : run.records) {
        nlohmann::json j{{"scenario", plan.scenario}, {"cell", r.cell},          {"n", r.n},
                         {"k", r.k},                  {"replicate", r.replicate}, {"T", r.steps},
                         {"termination", to_string(r.termination)}, {"final_counts", r.final_counts}};
        os << j.dump() << '\n';
    }
}

inline void write_summary_csv(std::ostream& os, const ScalingRun& run) {
    os << "n,k,replicates,mean_T,stderr,capped,mu2";
    for (Law l : {Law::NLogN, Law::N, Law::N2OverK, Law::N34}) os << ",T_over_" << to_string(l);
    if (run.fit) os << ",fit_law,fit_c,fit_residual";
    os << '\n';
    for (const auto& c : run.cells) {
        os << c.n << ',' << c.k << ',' << c.replicates << ',' << c.mean << ',' << c.stderr_ << ',' << c.capped << ','
           << c.mu2;
        for (Law l : {Law::NLogN, Law::N, Law::N2OverK, Law::N34}) {
            if (l == Law::N2OverK && c.k <= 0) {
                os << ',';
                continue;
            }
            os << ',' << c.mean / law_value(l, c.n, c.k);
        }
        if (run.fit) {
            os << ',' << to_string(run.fit->law) << ',' << run.fit->c << ',';
            for (std::size_t i = 0; i < run.fit->cells.size(); ++i)
                if (run.fit->cells[i].n == c.n && run.fit->cells[i].k == c.k) os << run.fit->residuals[i];
        }
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// Worst-case bound
// ---------------------------------------------------------------------------

struct WorstCaseInstance {
    double red_speed = 0;
    double mean = 0;
    double stderr_ = 0;
    bool below_upper = false;  // mean < 4 k H_max + 3 SE
};

struct WorstCaseReport {
    double h_max = 0;
    std::size_t k = 0;
    double lower_mean = 0;
    double lower_stderr = 0;
    double lower_expected = 0;  // k H_max
    bool lower_ok = false;      // |mean - k H_max| <= 3 SE
    std::vector<WorstCaseInstance> upper;
    bool upper_ok = false;
};

namespace detail {

inline std::pair<double, double> mean_extinction(const Graph& g, const ModelSpec& m, std::size_t reps, std::uint64_t seed,
                                                 const std::function<Configuration(Rng&)>& make_config,
                                                 unsigned threads = 1) {
    const std::uint64_t cap = 1'000'000'000ULL;
    auto ts = parallel_map<double>(reps, threads, [&](std::size_t r) {
        Rng rng = stream(seed, r);
        Configuration c = make_config(rng);
        RunOptions ro;
        ro.step_cap = cap;
        const auto res = run(g, m, c, WalkKind::Simple, rng(), ro);
        if (res.termination != Termination::Equilibrium) throw StepCapExceeded("extinction run did not finish", cap);
        return static_cast<double>(res.steps);
    });
    MeanAccumulator acc;
    for (double t : ts) acc.add(t);
    return {acc.mean(), acc.stderr_of_mean()};
}

}  // namespace detail

// (a) k stationary reds at y, k blues at x with H_x(y) = H_max; (b) random red
// speeds and arbitrary (possibly shared) start vertices.
inline WorstCaseReport check_worst_case(const Graph& g, std::size_t k, double p, std::size_t reps, std::uint64_t seed,
                                        std::size_t upper_instances = 20, unsigned threads = 1) {
    if (k < 1) throw Error("check_worst_case: k must be >= 1");
    WorstCaseReport rep;
    rep.k = k;
    const auto [x, y] = h_max_pair(g, WalkKind::Simple);
    const Vertex target[] = {y};
    rep.h_max = hitting_exact(g, target, WalkKind::Simple)[x];
    rep.lower_expected = static_cast<double>(k) * rep.h_max;
    {
        const ModelSpec m = make_two_type_annihilation(0.0);
        std::vector<Placement> place;
        for (std::size_t i = 0; i < k; ++i) place.push_back({y, 0});
        for (std::size_t i = 0; i < k; ++i) place.push_back({x, 1});
        auto [mean, se] = detail::mean_extinction(
            g, m, reps, stream(seed, 1)(), [&](Rng&) { return init_explicit(g.num_vertices(), 2, place); }, threads);
        rep.lower_mean = mean;
        rep.lower_stderr = se;
        rep.lower_ok = std::abs(mean - rep.lower_expected) <= 3 * se + 1e-9 * rep.lower_expected;
    }
    Rng rng = stream(seed, 2);
    rep.upper_ok = true;
    for (std::size_t i = 0; i < upper_instances; ++i) {
        const double speed = i == 0 ? p : uniform01(rng);
        const ModelSpec m = make_two_type_annihilation(speed);
        std::vector<Placement> place;
        for (std::size_t j = 0; j < 2 * k; ++j)
            place.push_back({static_cast<Vertex>(uniform_index(rng, g.num_vertices())), static_cast<SpeciesId>(j < k ? 0 : 1)});
        auto [mean, se] = detail::mean_extinction(
            g, m, reps, rng(), [&](Rng&) { return init_explicit(g.num_vertices(), 2, place); }, threads);
        WorstCaseInstance inst{speed, mean, se, mean < 4.0 * rep.lower_expected + 3 * se};
        rep.upper_ok = rep.upper_ok && inst.below_upper;
        rep.upper.push_back(inst);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Predator-prey scaling
// ---------------------------------------------------------------------------

enum class PredatorInit { Random, Adversarial };

struct PredatorCell {
    std::size_t k = 0;
    double mean = 0;
    double stderr_ = 0;
    double scaled = 0;  // mean k / n^2
};

struct PredatorReport {
    std::size_t n = 0;
    std::vector<PredatorCell> cells;
    double spread = 0;  // max scaled / min scaled
};

// k predators (species A) and n - k prey on distinct vertices. Adversarial:
// predators on the first k vertices in BFS order from vertex 0, all prey on
// the last vertex in that order.
inline PredatorReport check_predator_scaling(const GraphFamily& family, std::size_t n, std::span<const std::size_t> k_grid,
                                             std::span<const double> speeds, std::size_t reps, std::uint64_t seed,
                                             PredatorInit init = PredatorInit::Random, unsigned threads = 1) {
    const double ln = std::log(static_cast<double>(n));
    for (auto k : k_grid)
        if (k < 4 || static_cast<double>(k) > static_cast<double>(n) / ln)
            throw Error("check_predator_scaling: k=" + std::to_string(k) + " outside 4 <= k <= n/ln n");
    const ModelSpec m = make_special(SpecialKind::PredatorPrey, speeds);
    PredatorReport rep;
    rep.n = n;
    for (std::size_t ci = 0; ci < k_grid.size(); ++ci) {
        const std::size_t k = k_grid[ci];
        auto ts = parallel_map<double>(reps, threads, [&](std::size_t r) {
            Rng seeds = stream(seed, ci, r);
            const Graph g = family.make(n, seeds());
            Configuration c;
            if (init == PredatorInit::Random) {
                const std::size_t counts[] = {k, n - k};
                c = init_distinct_random(g, counts, seeds());
            } else {
                std::vector<Vertex> order{0};
                std::vector<char> seen(n, 0);
                seen[0] = 1;
                for (std::size_t i = 0; i < order.size(); ++i)
                    for (Vertex u : g.neighbors(order[i]))
                        if (!seen[u]) {
                            seen[u] = 1;
                            order.push_back(u);
                        }
                std::vector<Placement> place;
                for (std::size_t i = 0; i < k; ++i) place.push_back({order[i], 0});
                for (std::size_t i = k; i < n; ++i) place.push_back({order.back(), 1});
                c = init_explicit(n, 2, place);
            }
            const auto res = run(g, m, c, WalkKind::Simple, seeds());
            if (res.termination != Termination::Equilibrium) throw Error("predator run did not reach equilibrium");
            return static_cast<double>(res.steps);
        });
        MeanAccumulator acc;
        for (double t : ts) acc.add(t);
        const double nn = static_cast<double>(n);
        rep.cells.push_back({k, acc.mean(), acc.stderr_of_mean(), acc.mean() * static_cast<double>(k) / (nn * nn)});
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (const auto& c : rep.cells) {
        lo = std::min(lo, c.scaled);
        hi = std::max(hi, c.scaled);
    }
    rep.spread = rep.cells.empty() ? 0 : hi / lo;
    return rep;
}

// ---------------------------------------------------------------------------
// Moving targets
// ---------------------------------------------------------------------------

// targets[i] is the target set checked at time i r.
using TargetGenerator = std::function<std::vector<std::vector<Vertex>>(Rng&, std::size_t checks)>;

// k independent lazy walkers from uniform starts, revealed at times 0, r, 2r, ...
inline TargetGenerator lazy_walker_targets(const Graph& g, std::size_t k, std::uint64_t r) {
    return [&g, k, r](Rng& rng, std::size_t checks) {
        std::vector<Vertex> pos(k);
        for (auto& v : pos) v = static_cast<Vertex>(uniform_index(rng, g.num_vertices()));
        std::vector<std::vector<Vertex>> out;
        out.reserve(checks);
        for (std::size_t i = 0; i < checks; ++i) {
            if (i > 0)
                for (auto& v : pos)
                    for (std::uint64_t t = 0; t < r; ++t) v = step(g, v, WalkKind::Lazy, rng);
            out.push_back(pos);
        }
        return out;
    };
}

inline TargetGenerator static_targets(std::vector<Vertex> set) {
    return [set = std::move(set)](Rng&, std::size_t checks) { return std::vector<std::vector<Vertex>>(checks, set); };
}

struct MovingTargetReport {
    bool ran = false;
    std::string precondition_failure;
    double mu2 = 0;
    std::size_t ell = 0;
    std::size_t checks = 0;  // s ell
    double lower = 0;        // e^{-18 s}
    double upper = 0;        // e^{-3 s}
    double estimate = 0;     // conditional-probability (Rao-Blackwellised) estimate
    double stderr_ = 0;
    double mc_estimate = 0;  // plain indicator estimate on the same targets
    double mc_stderr = 0;
    bool in_band = false;
};

// The walker starts uniform. Each replicate samples the target sets, then
// propagates the walker's lazy-walk distribution exactly, removing the mass on
// A_{ir} at each check; the surviving mass is the conditional probability of
// avoiding every target. A sampled walker path gives the plain estimate.
inline MovingTargetReport check_moving_target(const Graph& g, std::size_t k, std::uint64_t r, std::size_t s,
                                              std::size_t reps, std::uint64_t seed, TargetGenerator targets = {},
                                              std::optional<double> mu2_known = std::nullopt) {
    MovingTargetReport rep;
    const std::size_t n = g.num_vertices();
    if (!g.is_regular()) throw Error("check_moving_target: graph must be regular");
    if (k < 1 || 8 * k > n) {
        rep.precondition_failure = "k must satisfy 1 <= k <= n/8";
        return rep;
    }
    if (r < 1 || s < 1 || reps < 1) throw Error("check_moving_target: r, s, reps must be positive");
    rep.mu2 = mu2_known ? *mu2_known : spectral_mu2(g, WalkKind::Lazy);
    if (!(std::pow(rep.mu2, static_cast<double>(r)) < 1.0 / 17.0)) {
        rep.precondition_failure = "mu2^r = " + std::to_string(std::pow(rep.mu2, static_cast<double>(r))) + " is not < 1/17";
        return rep;
    }
    if (!targets) targets = lazy_walker_targets(g, k, r);
    rep.ran = true;
    rep.ell = static_cast<std::size_t>(std::ceil(6.0 * static_cast<double>(n) / static_cast<double>(k)));
    rep.checks = s * rep.ell;
    rep.lower = std::exp(-18.0 * static_cast<double>(s));
    rep.upper = std::exp(-3.0 * static_cast<double>(s));

    // Dense r-step lazy transition matrix (symmetric on a regular graph).
    Eigen::MatrixXd step1 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Vertex u = 0; u < n; ++u) {
        step1(u, u) += 0.5;
        const double w = 0.5 / static_cast<double>(g.degree(u));
        for (Vertex v : g.neighbors(u)) step1(v, u) += w;
    }
    Eigen::MatrixXd pr = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::uint64_t t = 0; t < r; ++t) pr = step1 * pr;

    MeanAccumulator rb, mc;
    Eigen::VectorXd x(static_cast<Eigen::Index>(n)), y(static_cast<Eigen::Index>(n));
    for (std::size_t rep_i = 0; rep_i < reps; ++rep_i) {
        Rng rng = stream(seed, rep_i);
        const auto sets = targets(rng, rep.checks);
        if (sets.size() != rep.checks) throw Error("check_moving_target: generator returned the wrong number of sets");
        x.setConstant(1.0 / static_cast<double>(n));
        Vertex walker = static_cast<Vertex>(uniform_index(rng, n));
        bool alive = true;
        for (std::size_t i = 0; i < rep.checks; ++i) {
            if (i > 0) {
                y.noalias() = pr * x;
                x.swap(y);
                for (std::uint64_t t = 0; t < r && alive; ++t) walker = step(g, walker, WalkKind::Lazy, rng);
            }
            for (Vertex v : sets[i]) {
                x[v] = 0.0;
                if (v == walker) alive = false;
            }
        }
        rb.add(x.sum());
        mc.add(alive ? 1.0 : 0.0);
    }
    rep.estimate = rb.mean();
    rep.stderr_ = rb.stderr_of_mean();
    rep.mc_estimate = mc.mean();
    rep.mc_stderr = mc.stderr_of_mean();
    rep.in_band = rep.estimate >= rep.lower - 3 * rep.stderr_ && rep.estimate <= rep.upper + 3 * rep.stderr_;
    return rep;
}

// ---------------------------------------------------------------------------
// Survival
// ---------------------------------------------------------------------------

struct SurvivalReport {
    std::uint64_t horizon = 0;
    double fraction = 0;
    double stderr_ = 0;
    std::size_t runs = 0;
};

// Stationary starts with round(density n) particles per species (at least one
// for positive densities); a run survives if every positive-density species
// still has a particle after ceil(multiplier n ln n) steps.
inline SurvivalReport check_survival(const Graph& g, const ModelSpec& m, std::span<const double> densities,
                                     double multiplier, std::size_t reps, std::uint64_t seed, unsigned threads = 1) {
    if (densities.size() != m.num_species()) throw Error("check_survival: one density per species required");
    const auto& sp = m.species();
    for (const auto& s : sp)
        if (std::abs(s.speed - sp.front().speed) > 1e-12) throw Error("check_survival: species speeds must be equal");
    if (reps < 1 || multiplier < 0) throw Error("check_survival: bad reps or multiplier");
    const std::size_t n = g.num_vertices();
    const double nn = static_cast<double>(n);
    SurvivalReport rep;
    rep.horizon = static_cast<std::uint64_t>(std::ceil(multiplier * nn * std::log(nn)));
    std::vector<std::size_t> counts(densities.size());
    for (std::size_t s = 0; s < counts.size(); ++s) {
        if (densities[s] < 0) throw Error("check_survival: negative density");
        counts[s] = densities[s] > 0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(densities[s] * nn))) : 0;
    }
    auto ok = parallel_map<char>(reps, threads, [&](std::size_t r) {
        Rng seeds = stream(seed, r);
        Configuration c = init_stationary(g, counts, seeds());
        RunOptions ro;
        ro.step_cap = rep.horizon;
        const auto res = run(g, m, c, WalkKind::Simple, seeds(), ro);
        for (std::size_t s = 0; s < counts.size(); ++s)
            if (counts[s] > 0 && res.final_counts[s] == 0) return char{0};
        return char{1};
    });
    MeanAccumulator acc;
    for (char v : ok) acc.add(v ? 1.0 : 0.0);
    rep.runs = reps;
    rep.fraction = acc.mean();
    rep.stderr_ = acc.stderr_of_mean();
    return rep;
}

}  // namespace plab
