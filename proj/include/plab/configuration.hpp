#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "plab/error.hpp"
#include "plab/graph.hpp"
#include "plab/reaction_model.hpp"
#include "plab/rng.hpp"

namespace plab {

using ParticleId = std::uint64_t;
using Handle = std::uint32_t;

struct Particle {
    ParticleId id = 0;
    SpeciesId species = 0;
    Vertex vertex = 0;
};

// Particles with stable ids, indexed per species (O(1) uniform sampling and
// swap-remove) and per vertex. Handles are internal slots and are recycled.
class Configuration {
public:
    Configuration() = default;
    Configuration(std::size_t num_vertices, std::size_t num_species)
        : by_species_(num_species), occupancy_(num_vertices) {}

    std::size_t num_vertices() const { return occupancy_.size(); }
    std::size_t num_species() const { return by_species_.size(); }

    ParticleId add(Vertex v, SpeciesId s) {
        if (v >= occupancy_.size()) throw Error("vertex " + std::to_string(v) + " out of range");
        if (s < 0 || static_cast<std::size_t>(s) >= by_species_.size()) throw Error("species id out of range");
        Handle h;
        if (!free_.empty()) {
            h = free_.back();
            free_.pop_back();
        } else {
            h = static_cast<Handle>(slots_.size());
            slots_.emplace_back();
        }
        Slot& slot = slots_[h];
        slot.particle = {next_id_++, s, v};
        slot.alive = true;
        slot.placed = true;
        slot.species_pos = static_cast<std::uint32_t>(by_species_[s].size());
        by_species_[s].push_back(h);
        slot.vertex_pos = static_cast<std::uint32_t>(occupancy_[v].size());
        occupancy_[v].push_back(h);
        ++total_;
        return slot.particle.id;
    }

    void remove(Handle h) {
        Slot& slot = slots_[h];
        if (slot.placed) detach_vertex(h);
        auto& list = by_species_[slot.particle.species];
        const Handle last = list.back();
        list[slot.species_pos] = last;
        slots_[last].species_pos = slot.species_pos;
        list.pop_back();
        slot.alive = false;
        free_.push_back(h);
        --total_;
    }

    // Takes h off its vertex list without placing it anywhere (mid-move state).
    void lift(Handle h) {
        detach_vertex(h);
        slots_[h].placed = false;
    }

    void drop(Handle h, Vertex v) {
        Slot& slot = slots_[h];
        slot.particle.vertex = v;
        slot.placed = true;
        slot.vertex_pos = static_cast<std::uint32_t>(occupancy_[v].size());
        occupancy_[v].push_back(h);
    }

    void move(Handle h, Vertex to) {
        lift(h);
        drop(h, to);
    }

    const Particle& particle(Handle h) const { return slots_[h].particle; }
    std::size_t count(SpeciesId s) const { return by_species_[s].size(); }
    std::size_t total() const { return total_; }
    std::span<const Handle> of_species(SpeciesId s) const { return by_species_[s]; }
    std::span<const Handle> occupants(Vertex v) const { return occupancy_[v]; }
    ParticleId next_id() const { return next_id_; }

    std::vector<std::size_t> counts() const {
        std::vector<std::size_t> c(by_species_.size());
        for (std::size_t s = 0; s < c.size(); ++s) c[s] = by_species_[s].size();
        return c;
    }

    // Live particles sorted by id.
    std::vector<Particle> particles() const {
        std::vector<Particle> out;
        out.reserve(total_);
        for (const auto& s : slots_)
            if (s.alive) out.push_back(s.particle);
        std::sort(out.begin(), out.end(), [](const Particle& a, const Particle& b) { return a.id < b.id; });
        return out;
    }

    std::size_t max_occupancy() const {
        std::size_t best = 0;
        for (const auto& list : occupancy_) best = std::max(best, list.size());
        return best;
    }

    // Counts match index sizes and occupancy sums; ids unique; positions consistent.
    bool consistent() const {
        std::size_t alive = 0, occupied = 0;
        std::vector<ParticleId> ids;
        for (Handle h = 0; h < slots_.size(); ++h) {
            const Slot& s = slots_[h];
            if (!s.alive) continue;
            ++alive;
            ids.push_back(s.particle.id);
            const auto& list = by_species_[s.particle.species];
            if (s.species_pos >= list.size() || list[s.species_pos] != h) return false;
            const auto& occ = occupancy_[s.particle.vertex];
            if (s.vertex_pos >= occ.size() || occ[s.vertex_pos] != h) return false;
        }
        std::size_t indexed = 0;
        for (const auto& list : by_species_) indexed += list.size();
        for (const auto& list : occupancy_) occupied += list.size();
        std::sort(ids.begin(), ids.end());
        return alive == total_ && indexed == total_ && occupied == total_ &&
               std::adjacent_find(ids.begin(), ids.end()) == ids.end();
    }

private:
    struct Slot {
        Particle particle;
        std::uint32_t species_pos = 0;
        std::uint32_t vertex_pos = 0;
        bool alive = false;
        bool placed = false;
    };

    void detach_vertex(Handle h) {
        Slot& slot = slots_[h];
        auto& occ = occupancy_[slot.particle.vertex];
        const Handle last = occ.back();
        occ[slot.vertex_pos] = last;
        slots_[last].vertex_pos = slot.vertex_pos;
        occ.pop_back();
    }

    std::vector<Slot> slots_;
    std::vector<Handle> free_;
    std::vector<std::vector<Handle>> by_species_;
    std::vector<std::vector<Handle>> occupancy_;
    std::size_t total_ = 0;
    ParticleId next_id_ = 0;
};

// ---------------------------------------------------------------------------
// Initial configurations
// ---------------------------------------------------------------------------

// floor(n/2) of each colour on distinct uniform vertices.
inline Configuration init_balanced_random(const Graph& g, std::size_t num_species, std::uint64_t seed,
                                          SpeciesId red = 0, SpeciesId blue = 1) {
    const std::size_t n = g.num_vertices();
    Rng rng = stream(seed, 0x62616cULL);
    std::vector<Vertex> order(n);
    std::iota(order.begin(), order.end(), Vertex{0});
    std::shuffle(order.begin(), order.end(), rng);
    Configuration c(n, num_species);
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) c.add(order[i], red);
    for (std::size_t i = half; i < 2 * half; ++i) c.add(order[i], blue);
    return c;
}

// Independent uniform (stationary) positions; counts[s] particles of species s.
inline Configuration init_stationary(const Graph& g, std::span<const std::size_t> counts, std::uint64_t seed) {
    const std::size_t n = g.num_vertices();
    Rng rng = stream(seed, 0x737461ULL);
    Configuration c(n, counts.size());
    for (std::size_t s = 0; s < counts.size(); ++s)
        for (std::size_t i = 0; i < counts[s]; ++i) c.add(static_cast<Vertex>(uniform_index(rng, n)), static_cast<SpeciesId>(s));
    return c;
}

// k particles on distinct uniform vertices per species, species in order.
inline Configuration init_distinct_random(const Graph& g, std::span<const std::size_t> counts, std::uint64_t seed) {
    const std::size_t n = g.num_vertices();
    std::size_t total = 0;
    for (auto k : counts) total += k;
    if (total > n) throw Error("more particles than vertices for a distinct placement");
    Rng rng = stream(seed, 0x646973ULL);
    std::vector<Vertex> order(n);
    std::iota(order.begin(), order.end(), Vertex{0});
    std::shuffle(order.begin(), order.end(), rng);
    Configuration c(n, counts.size());
    std::size_t next = 0;
    for (std::size_t s = 0; s < counts.size(); ++s)
        for (std::size_t i = 0; i < counts[s]; ++i) c.add(order[next++], static_cast<SpeciesId>(s));
    return c;
}

struct Placement {
    Vertex vertex;
    SpeciesId species;
};

// Ids follow list order; repeated vertices are allowed.
inline Configuration init_explicit(std::size_t num_vertices, std::size_t num_species,
                                   std::span<const Placement> placements) {
    Configuration c(num_vertices, num_species);
    for (const auto& p : placements) c.add(p.vertex, p.species);
    return c;
}

}  // namespace plab
