#pragma once

// Non-interacting walker systems: the plain model (one uniformly chosen walker
// steps per time step) and the Poissonised model (Po(lambda0) particles per
// vertex, each taking Po(rate) steps per time step), with strong and weak
// collision classification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "plab/error.hpp"
#include "plab/graph.hpp"
#include "plab/rng.hpp"
#include "plab/walks.hpp"

namespace plab {

struct PlainMove {
    std::uint32_t walker;
    Vertex to;
};

// Starting vertices plus the serialized sequence of single walker steps.
struct PlainTrace {
    std::vector<Vertex> start;
    std::vector<PlainMove> moves;
};

struct PlainOutcome {
    std::size_t lonely = 0;
    std::size_t met = 0;
    std::vector<char> met_flags;
};

namespace detail {

// Per-vertex walker lists with O(1) removal.
class Occupancy {
public:
    Occupancy(std::size_t vertices, std::size_t walkers) : lists_(vertices), pos_(walkers), where_(walkers) {}
    void place(std::uint32_t w, Vertex v) {
        where_[w] = v;
        pos_[w] = static_cast<std::uint32_t>(lists_[v].size());
        lists_[v].push_back(w);
    }
    void remove(std::uint32_t w) {
        auto& list = lists_[where_[w]];
        const std::uint32_t last = list.back();
        list[pos_[w]] = last;
        pos_[last] = pos_[w];
        list.pop_back();
    }
    const std::vector<std::uint32_t>& at(Vertex v) const { return lists_[v]; }
    Vertex where(std::uint32_t w) const { return where_[w]; }

private:
    std::vector<std::vector<std::uint32_t>> lists_;
    std::vector<std::uint32_t> pos_;
    std::vector<Vertex> where_;
};

}  // namespace detail

// Walkers co-located at time 0 count as having met. A step marks the mover and
// every walker at its arrival vertex.
inline PlainOutcome lonely_from_trace(std::size_t num_vertices, const PlainTrace& trace) {
    const std::size_t k = trace.start.size();
    PlainOutcome out;
    out.met_flags.assign(k, 0);
    detail::Occupancy occ(num_vertices, k);
    for (std::uint32_t w = 0; w < k; ++w) occ.place(w, trace.start[w]);
    for (Vertex v = 0; v < num_vertices; ++v) {
        if (occ.at(v).size() < 2) continue;
        for (auto w : occ.at(v)) out.met_flags[w] = 1;
    }
    for (const auto& mv : trace.moves) {
        if (occ.where(mv.walker) == mv.to) continue;
        occ.remove(mv.walker);
        const auto& here = occ.at(mv.to);
        if (!here.empty()) {
            out.met_flags[mv.walker] = 1;
            for (auto w : here) out.met_flags[w] = 1;
        }
        occ.place(mv.walker, mv.to);
    }
    out.met = static_cast<std::size_t>(std::count(out.met_flags.begin(), out.met_flags.end(), 1));
    out.lonely = k - out.met;
    return out;
}

// Samples the plain model's trace: uniform starts, then `steps` moves of a uniform walker.
inline PlainTrace sample_plain_trace(const Graph& g, std::size_t walkers, std::uint64_t steps, WalkKind w,
                                     std::uint64_t seed) {
    if (walkers == 0) throw Error("run_plain: need at least one walker");
    Rng rng = stream(seed, 0x706c6eULL);
    PlainTrace trace;
    trace.start.resize(walkers);
    for (auto& v : trace.start) v = static_cast<Vertex>(uniform_index(rng, g.num_vertices()));
    std::vector<Vertex> pos = trace.start;
    trace.moves.reserve(steps);
    for (std::uint64_t t = 0; t < steps; ++t) {
        const auto walker = static_cast<std::uint32_t>(uniform_index(rng, walkers));
        pos[walker] = step(g, pos[walker], w, rng);
        trace.moves.push_back({walker, pos[walker]});
    }
    return trace;
}

inline PlainOutcome run_plain(const Graph& g, std::size_t walkers, std::uint64_t steps, WalkKind w,
                              std::uint64_t seed) {
    return lonely_from_trace(g.num_vertices(), sample_plain_trace(g, walkers, steps, w, seed));
}

// ---------------------------------------------------------------------------
// Poissonised model
// ---------------------------------------------------------------------------

enum class Collision : std::uint8_t { None, Weak, Strong };

struct PoissonOptions {
    double lambda0 = 1.1;
    double rate = 0.0;          // 0: 1/n
    std::optional<std::uint64_t> horizon;  // unset: ceil(0.11 n ln n)
    bool record_moves = true;
    bool record_positions = false;  // per-step snapshots for audits (small n only)
};

struct PoissonMove {
    std::uint32_t particle;
    std::vector<Vertex> path;  // start, then each vertex stepped to
};

struct PoissonSummary {
    std::size_t particles = 0;
    std::size_t lonely = 0;
    std::size_t strong_colliders = 0;
    std::size_t weak_colliders = 0;
    std::size_t initial_colocated_vertices = 0;
    unsigned max_multi_move = 0;
    std::uint64_t total_moves = 0;
};

struct PoissonSystem {
    std::size_t num_vertices = 0;
    double lambda0 = 0.0;
    double rate = 0.0;
    std::uint64_t horizon = 0;
    std::vector<Vertex> start;
    std::vector<Vertex> position;
    std::vector<Collision> status;
    std::vector<std::vector<PoissonMove>> moves;     // per time step, when recorded
    std::vector<std::vector<Vertex>> snapshots;      // positions before step 1, after each step
    std::vector<std::uint64_t> strong_pairs;         // keys a * P + b, a < b, sorted
    std::vector<std::uint64_t> weak_pairs;           // never-strong pairs with intersecting visits
    PoissonSummary summary;

    std::vector<std::size_t> vertex_counts() const {
        std::vector<std::size_t> c(num_vertices, 0);
        for (Vertex v : position) ++c[v];
        return c;
    }
};

inline std::uint64_t default_poisson_horizon(std::size_t n) {
    const double nn = static_cast<double>(n);
    return static_cast<std::uint64_t>(std::ceil(0.11 * nn * std::log(nn)));
}

inline PoissonSystem run_poissonised(const Graph& g, PoissonOptions opts, std::uint64_t seed) {
    const std::size_t n = g.num_vertices();
    if (!(opts.lambda0 > 0.0)) throw Error("run_poissonised: lambda0 must be positive");
    if (opts.rate == 0.0) opts.rate = 1.0 / static_cast<double>(n);
    if (!(opts.rate > 0.0 && opts.rate <= 1.0)) throw Error("run_poissonised: move rate must lie in (0, 1]");

    Rng rng = stream(seed, 0x706f69ULL);
    PoissonSystem sys;
    sys.num_vertices = n;
    sys.lambda0 = opts.lambda0;
    sys.rate = opts.rate;
    sys.horizon = opts.horizon ? *opts.horizon : default_poisson_horizon(n);
    std::poisson_distribution<unsigned> initial(opts.lambda0);
    for (Vertex v = 0; v < n; ++v) {
        const unsigned k = initial(rng);
        sys.start.insert(sys.start.end(), k, v);
    }
    const std::size_t total = sys.start.size();
    sys.position = sys.start;
    const auto key = [total](std::uint32_t a, std::uint32_t b) {
        if (a > b) std::swap(a, b);
        return static_cast<std::uint64_t>(a) * total + b;
    };

    detail::Occupancy occ(n, total);
    for (std::uint32_t p = 0; p < total; ++p) occ.place(p, sys.position[p]);
    std::unordered_set<std::uint64_t> strong, candidates;
    for (Vertex v = 0; v < n; ++v) {
        const auto& here = occ.at(v);
        if (here.size() >= 2) ++sys.summary.initial_colocated_vertices;
        for (std::size_t i = 0; i < here.size(); ++i)
            for (std::size_t j = i + 1; j < here.size(); ++j) strong.insert(key(here[i], here[j]));
    }
    if (opts.record_positions) sys.snapshots.push_back(sys.position);

    const double move_prob = -std::expm1(-opts.rate);
    std::geometric_distribution<std::uint64_t> skip(move_prob);
    std::vector<char> moving(total, 0);
    std::vector<PoissonMove> step_moves;
    std::vector<std::pair<Vertex, std::uint32_t>> visits;
    for (std::uint64_t t = 1; t <= sys.horizon; ++t) {
        step_moves.clear();
        if (total > 0) {
            for (std::uint64_t p = skip(rng); p < total; p += 1 + skip(rng)) {
                const auto id = static_cast<std::uint32_t>(p);
                const unsigned k = zero_truncated_poisson(rng, opts.rate);
                PoissonMove mv{id, {sys.position[id]}};
                for (unsigned s = 0; s < k; ++s) mv.path.push_back(step(g, mv.path.back(), WalkKind::Simple, rng));
                sys.summary.max_multi_move = std::max(sys.summary.max_multi_move, k);
                sys.summary.total_moves += k;
                moving[id] = 1;
                step_moves.push_back(std::move(mv));
            }
        }
        // Visited sets: path vertices for movers, the current vertex otherwise.
        visits.clear();
        for (const auto& mv : step_moves) {
            for (Vertex v : mv.path) {
                visits.emplace_back(v, mv.particle);
                for (auto other : occ.at(v))
                    if (!moving[other]) candidates.insert(key(mv.particle, other));
            }
        }
        std::sort(visits.begin(), visits.end());
        visits.erase(std::unique(visits.begin(), visits.end()), visits.end());
        for (std::size_t i = 0; i < visits.size();) {
            std::size_t j = i;
            while (j < visits.size() && visits[j].first == visits[i].first) ++j;
            for (std::size_t a = i; a < j; ++a)
                for (std::size_t b = a + 1; b < j; ++b) candidates.insert(key(visits[a].second, visits[b].second));
            i = j;
        }
        for (const auto& mv : step_moves) {
            occ.remove(mv.particle);
            occ.place(mv.particle, mv.path.back());
            sys.position[mv.particle] = mv.path.back();
        }
        for (const auto& mv : step_moves) {
            for (auto other : occ.at(mv.path.back()))
                if (other != mv.particle) strong.insert(key(mv.particle, other));
            moving[mv.particle] = 0;
        }
        if (opts.record_moves) sys.moves.push_back(step_moves);
        if (opts.record_positions) sys.snapshots.push_back(sys.position);
    }

    sys.status.assign(total, Collision::None);
    sys.strong_pairs.assign(strong.begin(), strong.end());
    std::sort(sys.strong_pairs.begin(), sys.strong_pairs.end());
    for (auto k : sys.strong_pairs) {
        sys.status[k / total] = Collision::Strong;
        sys.status[k % total] = Collision::Strong;
    }
    for (auto k : candidates) {
        if (strong.count(k)) continue;
        sys.weak_pairs.push_back(k);
        for (auto p : {k / total, k % total})
            if (sys.status[p] == Collision::None) sys.status[p] = Collision::Weak;
    }
    std::sort(sys.weak_pairs.begin(), sys.weak_pairs.end());
    sys.summary.particles = total;
    for (auto s : sys.status) {
        if (s == Collision::None) ++sys.summary.lonely;
        if (s == Collision::Weak) ++sys.summary.weak_colliders;
        if (s == Collision::Strong) ++sys.summary.strong_colliders;
    }
    return sys;
}

struct CouplingResult {
    bool success = false;
    std::string failure;
    PlainTrace trace;
};

// Picks `walkers` particles uniformly and serializes their single steps in a
// uniformly random interleaving within each time step, truncated to `steps`.
inline CouplingResult couple_to_plain(const PoissonSystem& sys, std::size_t walkers, std::uint64_t steps,
                                      std::uint64_t seed) {
    CouplingResult res;
    if (walkers == 0) {
        res.success = true;
        return res;
    }
    const std::size_t total = sys.start.size();
    if (total < walkers) {
        res.failure = "only " + std::to_string(total) + " particles for " + std::to_string(walkers) + " walkers";
        return res;
    }
    if (sys.moves.size() != sys.horizon) throw Error("couple_to_plain: movement log was not recorded");
    Rng rng = stream(seed, 0x63706cULL);
    std::vector<std::uint32_t> ids(total);
    std::iota(ids.begin(), ids.end(), 0u);
    for (std::size_t i = 0; i < walkers; ++i) std::swap(ids[i], ids[i + uniform_index(rng, total - i)]);
    std::vector<std::int64_t> walker_of(total, -1);
    for (std::size_t i = 0; i < walkers; ++i) {
        walker_of[ids[i]] = static_cast<std::int64_t>(i);
        res.trace.start.push_back(sys.start[ids[i]]);
    }
    std::vector<const PoissonMove*> owner;
    std::vector<std::uint32_t> tokens;
    for (const auto& step_moves : sys.moves) {
        tokens.clear();
        owner.assign(walkers, nullptr);
        std::vector<std::size_t> next(walkers, 1);
        for (const auto& mv : step_moves) {
            const auto w = walker_of[mv.particle];
            if (w < 0) continue;
            owner[static_cast<std::size_t>(w)] = &mv;
            tokens.insert(tokens.end(), mv.path.size() - 1, static_cast<std::uint32_t>(w));
        }
        std::shuffle(tokens.begin(), tokens.end(), rng);
        for (auto w : tokens) {
            if (res.trace.moves.size() >= steps) break;
            res.trace.moves.push_back({w, owner[w]->path[next[w]++]});
        }
        if (res.trace.moves.size() >= steps) break;
    }
    if (res.trace.moves.size() < steps) {
        res.failure = "chosen particles made only " + std::to_string(res.trace.moves.size()) + " moves, need " +
                      std::to_string(steps);
        return res;
    }
    res.success = true;
    return res;
}

}  // namespace plab
