#pragma once

// Constructors for the one- and two-type special models, and the site-wise
// (instruction stack) construction of annihilation with stationary reds.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "plab/error.hpp"
#include "plab/graph.hpp"
#include "plab/reaction_model.hpp"
#include "plab/rng.hpp"
#include "plab/walks.hpp"

namespace plab {

enum class SpecialKind { OneTypeAnnihilation, Coalescence, TwoTypeAnnihilation, PredatorPrey, Infection };

inline SpecialKind parse_special_kind(const std::string& s) {
    if (s == "one-type-annihilation") return SpecialKind::OneTypeAnnihilation;
    if (s == "coalescence") return SpecialKind::Coalescence;
    if (s == "two-type-annihilation") return SpecialKind::TwoTypeAnnihilation;
    if (s == "predator-prey") return SpecialKind::PredatorPrey;
    if (s == "infection") return SpecialKind::Infection;
    throw Error("unknown special model '" + s + "'");
}

inline const char* to_string(SpecialKind k) {
    switch (k) {
        case SpecialKind::OneTypeAnnihilation: return "one-type-annihilation";
        case SpecialKind::Coalescence: return "coalescence";
        case SpecialKind::TwoTypeAnnihilation: return "two-type-annihilation";
        case SpecialKind::PredatorPrey: return "predator-prey";
        case SpecialKind::Infection: return "infection";
    }
    return "?";
}

// Species are named A (and B). Same-type pairs in two-type models are inert.
// Energies default to 1, except infection where e_B = 2 keeps A+B -> A+A dissipative.
inline ModelSpec make_special(SpecialKind kind, std::span<const double> speeds) {
    const bool one_type = kind == SpecialKind::OneTypeAnnihilation || kind == SpecialKind::Coalescence;
    const std::size_t arity = one_type ? 1 : 2;
    if (speeds.size() != arity) {
        throw Error(std::string(to_string(kind)) + " takes " + std::to_string(arity) + " species speed(s), got " +
                    std::to_string(speeds.size()));
    }
    ModelSpec m;
    const SpeciesId a = m.add_species({"A", speeds[0], Rational(1)});
    auto set = [&](SpeciesId x, SpeciesId y, std::vector<SpeciesId> out) {
        Outcome o;
        o.output = std::move(out);
        m.set_reaction(x, y, {o});
    };
    if (one_type) {
        set(a, a, kind == SpecialKind::Coalescence ? std::vector<SpeciesId>{a} : std::vector<SpeciesId>{});
    } else {
        const SpeciesId b = m.add_species({"B", speeds[1], Rational(kind == SpecialKind::Infection ? 2 : 1)});
        switch (kind) {
            case SpecialKind::TwoTypeAnnihilation: set(a, b, {}); break;
            case SpecialKind::PredatorPrey: set(a, b, {a}); break;
            case SpecialKind::Infection: set(a, b, {a, a}); break;
            default: break;
        }
    }
    m.validate_parameters();
    return m;
}

// Two-type annihilation with red (A) speed p and blue (B) speed 1 - p.
inline ModelSpec make_two_type_annihilation(double p) {
    const double speeds[] = {p, 1.0 - p};
    return make_special(SpecialKind::TwoTypeAnnihilation, speeds);
}

// ---------------------------------------------------------------------------
// Site-wise toppling for stationary reds
// ---------------------------------------------------------------------------

class StackExhausted : public Error {
public:
    explicit StackExhausted(Vertex v)
        : Error("instruction stack exhausted at vertex " + std::to_string(v)), vertex_(v) {}
    Vertex vertex() const noexcept { return vertex_; }

private:
    Vertex vertex_;
};

// Pre-sampled instruction stacks: entry i of vertex v is a uniform neighbour
// of v drawn from stream(seed, v), so longer stacks extend shorter ones.
class InstructionStacks {
public:
    InstructionStacks() = default;
    InstructionStacks(const Graph& g, std::size_t length, std::uint64_t seed)
        : seed_(seed), length_(length), stacks_(g.num_vertices()) {
        for (Vertex v = 0; v < g.num_vertices(); ++v) {
            Rng rng = stream(seed, 0x746f70ULL, v);
            const auto nb = g.neighbors(v);
            stacks_[v].reserve(length);
            for (std::size_t i = 0; i < length; ++i) stacks_[v].push_back(nb[uniform_index(rng, nb.size())]);
        }
    }
    std::size_t length() const { return length_; }
    std::uint64_t seed() const { return seed_; }
    std::span<const Vertex> at(Vertex v) const { return stacks_[v]; }

private:
    std::uint64_t seed_ = 0;
    std::size_t length_ = 0;
    std::vector<std::vector<Vertex>> stacks_;
};

class TopplingInstance {
public:
    TopplingInstance(const Graph& g, std::span<const Vertex> blue, std::span<const Vertex> red, std::size_t stack_len,
                     std::uint64_t seed)
        : g_(&g),
          stacks_(std::make_shared<const InstructionStacks>(g, stack_len, seed)),
          used_(g.num_vertices(), 0),
          blues_(g.num_vertices()),
          reds_(g.num_vertices(), 0),
          occupied_pos_(g.num_vertices(), kNone) {
        for (Vertex v : red) {
            check(v);
            ++reds_[v];
        }
        std::uint64_t id = 0;
        for (Vertex v : blue) {
            check(v);
            blues_[v].push_back(id++);
            mark(v);
        }
        blue_count_ = blue.size();
    }

    const Graph& graph() const { return *g_; }
    const InstructionStacks& stacks() const { return *stacks_; }
    std::size_t blue_count() const { return blue_count_; }
    std::size_t red_count() const {
        std::size_t s = 0;
        for (auto r : reds_) s += r;
        return s;
    }
    bool has_blue(Vertex v) const { return !blues_[v].empty(); }
    std::span<const Vertex> blue_sites() const { return occupied_; }
    const std::vector<std::size_t>& odometer() const { return used_; }
    std::size_t used(Vertex v) const { return used_[v]; }

    // Moves the lowest-id blue at v along v's next instruction; annihilates on arrival at a red.
    void topple(Vertex v) {
        if (blues_[v].empty()) throw Error("illegal topple: no blue at vertex " + std::to_string(v));
        if (used_[v] >= stacks_->length()) throw StackExhausted(v);
        const Vertex to = stacks_->at(v)[used_[v]++];
        auto& here = blues_[v];
        auto lowest = std::min_element(here.begin(), here.end());
        const std::uint64_t id = *lowest;
        *lowest = here.back();
        here.pop_back();
        if (here.empty()) unmark(v);
        --blue_count_;
        if (reds_[to] > 0) {
            --reds_[to];
            return;
        }
        blues_[to].push_back(id);
        if (blues_[to].size() == 1) mark(to);
        ++blue_count_;
    }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    void check(Vertex v) const {
        if (v >= g_->num_vertices()) throw Error("toppling: vertex " + std::to_string(v) + " out of range");
    }
    void mark(Vertex v) {
        if (occupied_pos_[v] != kNone) return;
        occupied_pos_[v] = occupied_.size();
        occupied_.push_back(v);
    }
    void unmark(Vertex v) {
        const std::size_t pos = occupied_pos_[v];
        const Vertex last = occupied_.back();
        occupied_[pos] = last;
        occupied_pos_[last] = pos;
        occupied_.pop_back();
        occupied_pos_[v] = kNone;
    }

    const Graph* g_;
    std::shared_ptr<const InstructionStacks> stacks_;
    std::vector<std::size_t> used_;
    std::vector<std::vector<std::uint64_t>> blues_;
    std::vector<std::size_t> reds_;
    std::vector<Vertex> occupied_;
    std::vector<std::size_t> occupied_pos_;
    std::size_t blue_count_ = 0;
};

inline TopplingInstance toppling_build(const Graph& g, std::span<const Vertex> blue, std::span<const Vertex> red,
                                       std::size_t stack_len, std::uint64_t seed) {
    return TopplingInstance(g, blue, red, stack_len, seed);
}

struct FixedOrder {
    std::vector<Vertex> sites;
};
struct RandomOrder {
    std::uint64_t seed = 0;
};
struct GreedyFirst {};

using TopplingPolicy = std::variant<FixedOrder, RandomOrder, GreedyFirst>;

struct TopplingOutcome {
    std::vector<std::size_t> odometer;
    std::uint64_t total_moves = 0;
    bool legal = true;     // every toppled site held a blue
    bool complete = false; // no blue remains
};

// Topples on a copy of the instance until no blue remains (or a fixed order
// runs out / hits an empty site). Throws StackExhausted.
inline TopplingOutcome toppling_run(TopplingInstance t, const TopplingPolicy& policy) {
    TopplingOutcome out;
    if (const auto* fixed = std::get_if<FixedOrder>(&policy)) {
        for (Vertex v : fixed->sites) {
            if (t.blue_count() == 0 || v >= t.graph().num_vertices() || !t.has_blue(v)) {
                out.legal = false;
                break;
            }
            t.topple(v);
            ++out.total_moves;
        }
    } else if (const auto* random = std::get_if<RandomOrder>(&policy)) {
        Rng rng = stream(random->seed, 0x726e64ULL);
        while (t.blue_count() > 0) {
            const auto sites = t.blue_sites();
            t.topple(sites[uniform_index(rng, sites.size())]);
            ++out.total_moves;
        }
    } else {
        while (t.blue_count() > 0) {
            const auto sites = t.blue_sites();
            t.topple(*std::min_element(sites.begin(), sites.end()));
            ++out.total_moves;
        }
    }
    out.complete = t.blue_count() == 0;
    out.odometer = t.odometer();
    return out;
}

// Reruns with doubled stack length until no stack runs dry.
inline TopplingOutcome toppling_run_with_retry(const Graph& g, std::span<const Vertex> blue,
                                               std::span<const Vertex> red, std::size_t stack_len,
                                               std::uint64_t seed, const TopplingPolicy& policy,
                                               std::size_t max_len = std::size_t{1} << 26) {
    for (std::size_t len = std::max<std::size_t>(stack_len, 1);; len *= 2) {
        try {
            return toppling_run(toppling_build(g, blue, red, len, seed), policy);
        } catch (const StackExhausted&) {
            if (len >= max_len) throw;
        }
    }
}

// Engine mover that consumes shared instruction stacks instead of fresh randomness.
class InstructionMover {
public:
    explicit InstructionMover(std::shared_ptr<const InstructionStacks> stacks)
        : stacks_(std::move(stacks)), used_(std::make_shared<std::vector<std::size_t>>()) {}

    StepResult operator()(const Graph& g, Vertex from, WalkKind, Rng&) {
        if (used_->empty()) used_->assign(g.num_vertices(), 0);
        auto& u = (*used_)[from];
        if (u >= stacks_->length()) throw StackExhausted(from);
        return {stacks_->at(from)[u++], true};
    }
    const std::vector<std::size_t>& used() const { return *used_; }

private:
    std::shared_ptr<const InstructionStacks> stacks_;
    std::shared_ptr<std::vector<std::size_t>> used_;
};

}  // namespace plab
