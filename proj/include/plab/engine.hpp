#pragma once

// Discrete-time dynamics of a reaction model on a graph. Each step selects a
// species with probability proportional to speed * count, moves a uniform
// particle of that species one walk step, and lets it meet the particles
// already present at the arrival vertex in uniformly random order until an
// effective reaction happens.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plab/configuration.hpp"
#include "plab/error.hpp"
#include "plab/graph.hpp"
#include "plab/reaction_model.hpp"
#include "plab/rng.hpp"
#include "plab/walks.hpp"

namespace plab {

enum class Termination { Equilibrium, StepCap, Frozen };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::Equilibrium: return "equilibrium";
        case Termination::StepCap: return "step-cap";
        case Termination::Frozen: return "frozen";
    }
    return "?";
}

enum class Status { Active, Equilibrium, Frozen };

// Equilibrium: no effective variant has its inputs present. Frozen: every
// present reactive pair consists of two zero-speed species, which can never
// meet because meetings only happen on arrival.
inline Status equilibrium_status(const ModelSpec& m, const Configuration& c) {
    bool realizable = false;
    for (const auto& v : m.variants()) {
        const bool present = v.a == v.b ? c.count(v.a) >= 2 : (c.count(v.a) > 0 && c.count(v.b) > 0);
        if (!present) continue;
        realizable = true;
        if (m.species(v.a).speed > 0.0 || m.species(v.b).speed > 0.0) return Status::Active;
    }
    return realizable ? Status::Frozen : Status::Equilibrium;
}

inline bool is_equilibrium(const ModelSpec& m, const Configuration& c) {
    return equilibrium_status(m, c) == Status::Equilibrium;
}

struct Meeting {
    ParticleId other = 0;
    SpeciesId other_species = 0;
    bool effective = false;
    std::vector<SpeciesId> output;  // sampled output when effective
    bool operator==(const Meeting&) const = default;
};

struct Event {
    std::uint64_t step = 0;
    ParticleId mover = 0;
    SpeciesId mover_species = 0;
    Vertex from = 0;
    Vertex to = 0;
    bool moved = false;
    std::vector<Meeting> meetings;

    bool operator==(const Event&) const = default;
};

struct EventLog {
    std::size_t limit = 100000;
    bool truncated = false;
    std::vector<Event> events;
};

struct SeriesPoint {
    std::uint64_t step = 0;
    std::vector<std::size_t> counts;
    bool operator==(const SeriesPoint&) const = default;
};

struct SimResult {
    Termination termination = Termination::Equilibrium;
    std::uint64_t steps = 0;
    std::vector<std::uint64_t> steps_by_species;
    std::uint64_t reactions = 0;
    std::size_t max_occupancy = 0;
    std::vector<SeriesPoint> series;
    std::vector<std::size_t> final_counts;

    bool operator==(const SimResult&) const = default;
};

struct RunOptions {
    std::uint64_t step_cap = 1'000'000'000ULL;
    std::uint64_t series_interval = 0;  // 0: no time series; otherwise sample every this many steps
    EventLog* log = nullptr;
    std::function<void(std::uint64_t)> progress;  // called every progress_interval steps
    std::uint64_t progress_interval = 100'000'000ULL;
};

// Moves along a random walk step.
struct RandomWalkMover {
    StepResult operator()(const Graph& g, Vertex from, WalkKind w, Rng& rng) const {
        return walk_step(g, from, w, rng);
    }
};

template <class Mover = RandomWalkMover>
class Engine {
public:
    Engine(const Graph& g, const ModelSpec& m, WalkKind w, Mover mover = {})
        : g_(g), m_(m), walk_(w), mover_(std::move(mover)) {
        if (!g.is_connected()) throw Error("engine: graph is not connected");
        const std::size_t ns = m.num_species();
        for (const auto& s : m.species())
            if (s.speed < 0.0) throw Error("engine: negative speed");
        cumulative_.resize(ns);
    }

    SimResult run(Configuration& c, std::uint64_t seed, const RunOptions& opts = {}) {
        if (c.num_vertices() != g_.num_vertices() || c.num_species() != m_.num_species()) {
            throw Error("engine: configuration does not match graph/model");
        }
        Rng rng = stream(seed, 0x656e67ULL);
        const std::size_t ns = m_.num_species();
        SimResult res;
        res.steps_by_species.assign(ns, 0);
        res.max_occupancy = c.max_occupancy();
        if (opts.series_interval) res.series.push_back({0, c.counts()});

        Status status = equilibrium_status(m_, c);
        while (status == Status::Active) {
            if (res.steps >= opts.step_cap) {
                res.termination = Termination::StepCap;
                break;
            }
            const SpeciesId s = select_species(c, rng);
            const auto members = c.of_species(s);
            const Handle h = members[uniform_index(rng, members.size())];
            ++res.steps_by_species[s];
            ++res.steps;
            const bool reacted = step_particle(c, h, res, opts.log, rng);
            if (reacted) status = equilibrium_status(m_, c);
            if (opts.series_interval && res.steps % opts.series_interval == 0) res.series.push_back({res.steps, c.counts()});
            if (opts.progress && res.steps % opts.progress_interval == 0) opts.progress(res.steps);
        }
        if (status == Status::Equilibrium) res.termination = Termination::Equilibrium;
        if (status == Status::Frozen) res.termination = Termination::Frozen;
        res.final_counts = c.counts();
        return res;
    }

private:
    SpeciesId select_species(const Configuration& c, Rng& rng) {
        double total = 0.0;
        const std::size_t ns = m_.num_species();
        for (std::size_t s = 0; s < ns; ++s) {
            total += m_.species(static_cast<SpeciesId>(s)).speed * static_cast<double>(c.count(static_cast<SpeciesId>(s)));
            cumulative_[s] = total;
        }
        const double u = uniform01(rng) * total;
        for (std::size_t s = 0; s < ns; ++s)
            if (u < cumulative_[s] && c.count(static_cast<SpeciesId>(s)) > 0) return static_cast<SpeciesId>(s);
        for (std::size_t s = ns; s-- > 0;)  // u == total after rounding
            if (c.count(static_cast<SpeciesId>(s)) > 0 && m_.species(static_cast<SpeciesId>(s)).speed > 0.0)
                return static_cast<SpeciesId>(s);
        throw Error("engine: no particle can move");
    }

    // Returns true when an effective reaction occurred.
    bool step_particle(Configuration& c, Handle h, SimResult& res, EventLog* log, Rng& rng) {
        const Particle p = c.particle(h);
        const StepResult st = mover_(g_, p.vertex, walk_, rng);
        Event* ev = nullptr;
        if (log && !log->truncated) {
            if (log->events.size() >= log->limit) {
                log->truncated = true;
            } else {
                log->events.push_back({res.steps, p.id, p.species, p.vertex, st.to, st.moved, {}});
                ev = &log->events.back();
            }
        }
        if (!st.moved) return false;
        c.lift(h);
        const Vertex v = st.to;

        candidates_.clear();
        for (Handle r : c.occupants(v))
            if (m_.has_effective(p.species, c.particle(r).species)) candidates_.push_back(r);
        for (std::size_t i = 0; i < candidates_.size(); ++i) {
            const std::size_t j = i + uniform_index(rng, candidates_.size() - i);
            std::swap(candidates_[i], candidates_[j]);
            const Handle other = candidates_[i];
            const Particle q = c.particle(other);
            const Outcome& out = sample_outcome(p.species, q.species, rng);
            const bool effective = !is_identity(out, p.species, q.species);
            if (ev) ev->meetings.push_back({q.id, q.species, effective, effective ? out.output : std::vector<SpeciesId>{}});
            if (!effective) continue;
            c.remove(h);
            c.remove(other);
            for (SpeciesId s : out.output) c.add(v, s);
            ++res.reactions;
            res.max_occupancy = std::max(res.max_occupancy, c.occupants(v).size());
            return true;
        }
        c.drop(h, v);
        res.max_occupancy = std::max(res.max_occupancy, c.occupants(v).size());
        return false;
    }

    const Outcome& sample_outcome(SpeciesId a, SpeciesId b, Rng& rng) const {
        const auto& outs = m_.outcomes(a, b);
        if (outs.size() == 1) return outs.front();
        const double u = uniform01(rng);
        double acc = 0.0;
        for (const auto& o : outs) {
            acc += o.p;
            if (u < acc) return o;
        }
        return outs.back();
    }

    static bool is_identity(const Outcome& o, SpeciesId a, SpeciesId b) {
        return o.output.size() == 2 && o.output[0] == std::min(a, b) && o.output[1] == std::max(a, b);
    }

    const Graph& g_;
    const ModelSpec& m_;
    WalkKind walk_;
    Mover mover_;
    std::vector<double> cumulative_;
    std::vector<Handle> candidates_;
};

inline SimResult run(const Graph& g, const ModelSpec& m, Configuration& c, WalkKind w, std::uint64_t seed,
                     const RunOptions& opts = {}) {
    Engine<> engine(g, m, w);
    return engine.run(c, seed, opts);
}

}  // namespace plab
