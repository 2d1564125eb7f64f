#pragma once

// Regular (multi)graphs on dense vertex ids 0..n-1, stored as CSR adjacency.
//
// Adjacency lists hold one entry per edge end, so a loop at v appears twice in
// v's list and contributes 2 to deg(v). The simple random walk picks a uniform
// list entry; the lazy walk first stays put with probability 1/2.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "plab/error.hpp"
#include "plab/rng.hpp"

namespace plab {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

enum class WalkKind { Simple, Lazy };

inline const char* to_string(WalkKind w) { return w == WalkKind::Lazy ? "lazy" : "simple"; }

inline WalkKind parse_walk_kind(const std::string& s) {
    if (s == "lazy") return WalkKind::Lazy;
    if (s == "simple") return WalkKind::Simple;
    throw Error("unknown walk kind '" + s + "' (expected simple|lazy)");
}

class Graph {
public:
    Graph() = default;

    // Symmetric by construction. Loops are written (u, u).
    static Graph from_edges(std::size_t n, std::vector<Edge> edges) {
        std::vector<std::vector<Vertex>> adj(n);
        for (const auto& [u, v] : edges) {
            if (u >= n || v >= n) {
                throw Error("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") out of range for n=" + std::to_string(n));
            }
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        Graph g = from_adjacency(adj);
        g.edges_ = std::move(edges);
        return g;
    }

    // Raw adjacency lists, not checked for symmetry; see validate().
    static Graph from_adjacency(const std::vector<std::vector<Vertex>>& adj) {
        Graph g;
        g.offsets_.assign(adj.size() + 1, 0);
        for (std::size_t v = 0; v < adj.size(); ++v) g.offsets_[v + 1] = g.offsets_[v] + adj[v].size();
        g.targets_.reserve(g.offsets_.back());
        for (const auto& list : adj) g.targets_.insert(g.targets_.end(), list.begin(), list.end());
        g.analyse();
        return g;
    }

    std::size_t num_vertices() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }
    std::span<const Vertex> neighbors(Vertex v) const {
        return {targets_.data() + offsets_[v], degree(v)};
    }

    bool is_regular() const { return regular_; }
    // Common degree; 0 when the graph is not regular.
    std::size_t d() const { return regular_ ? degree_ : 0; }
    std::size_t max_degree() const { return max_degree_; }
    bool is_simple() const { return simple_; }
    bool is_connected() const { return connected_; }
    bool is_bipartite() const { return bipartite_; }

    // Undirected edge list; insertion order for graphs built from edges.
    std::vector<Edge> edges() const {
        if (!edges_.empty() || targets_.empty()) return edges_;
        std::vector<Edge> out;
        for (Vertex u = 0; u < num_vertices(); ++u) {
            std::size_t loops = 0;
            for (Vertex v : neighbors(u)) {
                if (v > u) out.emplace_back(u, v);
                if (v == u) ++loops;
            }
            for (std::size_t i = 0; i < loops / 2; ++i) out.emplace_back(u, u);
        }
        return out;
    }

    std::size_t num_edges() const { return targets_.size() / 2; }

    bool operator==(const Graph& o) const { return offsets_ == o.offsets_ && targets_ == o.targets_; }

private:
    void analyse() {
        const std::size_t n = num_vertices();
        regular_ = true;
        max_degree_ = 0;
        degree_ = n ? degree(0) : 0;
        for (Vertex v = 0; v < n; ++v) {
            if (degree(v) != degree_) regular_ = false;
            max_degree_ = std::max(max_degree_, degree(v));
        }
        simple_ = true;
        std::vector<Vertex> scratch;
        for (Vertex v = 0; v < n && simple_; ++v) {
            scratch.assign(neighbors(v).begin(), neighbors(v).end());
            std::sort(scratch.begin(), scratch.end());
            if (std::adjacent_find(scratch.begin(), scratch.end()) != scratch.end()) simple_ = false;
            if (std::binary_search(scratch.begin(), scratch.end(), v)) simple_ = false;
        }
        // BFS two-colouring; out-of-range entries are ignored here and reported by validate().
        connected_ = true;
        bipartite_ = true;
        if (n == 0) return;
        std::vector<int> colour(n, -1);
        std::queue<Vertex> frontier;
        colour[0] = 0;
        frontier.push(0);
        std::size_t seen = 1;
        while (!frontier.empty()) {
            const Vertex u = frontier.front();
            frontier.pop();
            for (Vertex v : neighbors(u)) {
                if (v >= n) continue;
                if (colour[v] < 0) {
                    colour[v] = 1 - colour[u];
                    ++seen;
                    frontier.push(v);
                } else if (colour[v] == colour[u]) {
                    bipartite_ = false;
                }
            }
        }
        connected_ = seen == n;
    }

    std::vector<std::size_t> offsets_;
    std::vector<Vertex> targets_;
    std::vector<Edge> edges_;
    std::size_t degree_ = 0;
    std::size_t max_degree_ = 0;
    bool regular_ = true;
    bool simple_ = true;
    bool connected_ = true;
    bool bipartite_ = true;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct GraphReport {
    bool ok = true;
    std::string failure;  // "range", "symmetry", "regularity", "connectivity"
    std::string detail;
};

inline GraphReport validate(const Graph& g) {
    const std::size_t n = g.num_vertices();
    auto fail = [](std::string kind, std::string detail) {
        return GraphReport{false, std::move(kind), std::move(detail)};
    };
    for (Vertex u = 0; u < n; ++u) {
        for (Vertex v : g.neighbors(u)) {
            if (v >= n) {
                return fail("range", "vertex " + std::to_string(u) + " lists neighbour " + std::to_string(v));
            }
        }
    }
    auto count_in = [&](Vertex list_owner, Vertex x) {
        const auto nb = g.neighbors(list_owner);
        return static_cast<std::size_t>(std::count(nb.begin(), nb.end(), x));
    };
    for (Vertex u = 0; u < n; ++u) {
        for (Vertex v : g.neighbors(u)) {
            if (v == u) {
                if (count_in(u, u) % 2 != 0) {
                    return fail("symmetry", "vertex " + std::to_string(u) + " has an odd loop entry count");
                }
            } else if (count_in(u, v) != count_in(v, u)) {
                return fail("symmetry", std::to_string(v) + " appears " + std::to_string(count_in(u, v)) +
                                            "x in list of " + std::to_string(u) + " but " + std::to_string(u) +
                                            " appears " + std::to_string(count_in(v, u)) + "x in list of " +
                                            std::to_string(v));
            }
        }
    }
    if (!g.is_regular()) {
        for (Vertex v = 1; v < n; ++v) {
            if (g.degree(v) != g.degree(0)) {
                return fail("regularity", "deg(0)=" + std::to_string(g.degree(0)) + " but deg(" +
                                              std::to_string(v) + ")=" + std::to_string(g.degree(v)));
            }
        }
    }
    if (!g.is_connected()) return fail("connectivity", "graph has more than one component");
    return {};
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

struct RandomRegularOptions {
    std::size_t max_attempts = 1000;
};

// Simple connected d-regular graph by stub pairing that refuses loops and
// repeated edges as it goes (restarting when stuck); disconnected outcomes are
// rejected. Deterministic given seed.
inline Graph gen_random_regular(std::size_t n, std::size_t d, std::uint64_t seed,
                                RandomRegularOptions opts = {}) {
    if ((n * d) % 2 != 0) {
        throw Error("parity violation: n*d = " + std::to_string(n * d) + " is odd");
    }
    if (d >= n) throw Error("degree " + std::to_string(d) + " must be below n=" + std::to_string(n));
    if (d == 0) throw Error("degree must be positive");
    Rng rng = stream(seed, 0x7265677261ULL);
    std::vector<Vertex> stubs;
    std::vector<std::vector<Vertex>> adj(n);
    std::vector<Edge> edges;
    auto adjacent = [&](Vertex u, Vertex v) {
        return std::find(adj[u].begin(), adj[u].end(), v) != adj[u].end();
    };
    for (std::size_t attempt = 1; attempt <= opts.max_attempts; ++attempt) {
        stubs.clear();
        edges.clear();
        for (auto& a : adj) a.clear();
        for (Vertex v = 0; v < n; ++v) stubs.insert(stubs.end(), d, v);
        bool stuck = false;
        while (!stubs.empty() && !stuck) {
            bool paired = false;
            for (int tries = 0; tries < 64 && !paired; ++tries) {
                std::size_t i = uniform_index(rng, stubs.size());
                std::size_t j = uniform_index(rng, stubs.size());
                const Vertex u = stubs[i], v = stubs[j];
                if (i == j || u == v || adjacent(u, v)) continue;
                adj[u].push_back(v);
                adj[v].push_back(u);
                edges.emplace_back(std::min(u, v), std::max(u, v));
                if (i < j) std::swap(i, j);
                stubs[i] = stubs.back();
                stubs.pop_back();
                stubs[j] = stubs.back();
                stubs.pop_back();
                paired = true;
            }
            if (paired) continue;
            // Random probing failed; look for any admissible pair exhaustively.
            std::vector<std::pair<std::size_t, std::size_t>> admissible;
            for (std::size_t i = 0; i < stubs.size(); ++i) {
                for (std::size_t j = i + 1; j < stubs.size(); ++j) {
                    if (stubs[i] != stubs[j] && !adjacent(stubs[i], stubs[j])) admissible.emplace_back(i, j);
                }
            }
            if (admissible.empty()) {
                stuck = true;
                break;
            }
            auto [i, j] = admissible[uniform_index(rng, admissible.size())];
            const Vertex u = stubs[i], v = stubs[j];
            adj[u].push_back(v);
            adj[v].push_back(u);
            edges.emplace_back(std::min(u, v), std::max(u, v));
            stubs[j] = stubs.back();
            stubs.pop_back();
            stubs[i] = stubs.back();
            stubs.pop_back();
        }
        if (stuck) continue;
        std::sort(edges.begin(), edges.end());
        Graph g = Graph::from_edges(n, std::move(edges));
        if (g.is_connected()) return g;
        edges.clear();
    }
    throw Error("random regular generation failed after " + std::to_string(opts.max_attempts) + " attempts");
}

enum class NamedFamily { Complete, Cycle, Torus2d, Hypercube };

inline NamedFamily parse_named_family(const std::string& s) {
    if (s == "complete") return NamedFamily::Complete;
    if (s == "cycle") return NamedFamily::Cycle;
    if (s == "torus2d" || s == "torus") return NamedFamily::Torus2d;
    if (s == "hypercube") return NamedFamily::Hypercube;
    throw Error("unknown graph family '" + s + "'");
}

// size: vertex count (complete, cycle), side length (torus2d) or dimension (hypercube).
// cycle(2) is the two-vertex double edge, the only non-simple output.
inline Graph gen_named(NamedFamily kind, std::size_t size) {
    std::vector<Edge> edges;
    switch (kind) {
        case NamedFamily::Complete: {
            if (size < 2) throw Error("complete graph needs n >= 2");
            for (Vertex u = 0; u < size; ++u)
                for (Vertex v = u + 1; v < size; ++v) edges.emplace_back(u, v);
            return Graph::from_edges(size, std::move(edges));
        }
        case NamedFamily::Cycle: {
            if (size < 2) throw Error("cycle needs n >= 2");
            for (Vertex u = 0; u < size; ++u) {
                const Vertex v = static_cast<Vertex>((u + 1) % size);
                edges.emplace_back(std::min(u, v), std::max(u, v));
            }
            return Graph::from_edges(size, std::move(edges));
        }
        case NamedFamily::Torus2d: {
            if (size < 3) throw Error("torus side must be >= 3");
            const std::size_t n = size * size;
            auto id = [size](std::size_t r, std::size_t c) { return static_cast<Vertex>(r * size + c); };
            for (std::size_t r = 0; r < size; ++r) {
                for (std::size_t c = 0; c < size; ++c) {
                    edges.emplace_back(id(r, c), id(r, (c + 1) % size));
                    edges.emplace_back(id(r, c), id((r + 1) % size, c));
                }
            }
            return Graph::from_edges(n, std::move(edges));
        }
        case NamedFamily::Hypercube: {
            if (size < 1 || size > 24) throw Error("hypercube dimension must be in [1, 24]");
            const std::size_t n = std::size_t{1} << size;
            for (Vertex u = 0; u < n; ++u)
                for (std::size_t b = 0; b < size; ++b) {
                    const Vertex v = u ^ (Vertex{1} << b);
                    if (u < v) edges.emplace_back(u, v);
                }
            return Graph::from_edges(n, std::move(edges));
        }
    }
    throw Error("unreachable graph family");
}

// ---------------------------------------------------------------------------
// Collapsed chains
// ---------------------------------------------------------------------------

// G/A: vertices of V\A keep their relative order and the contracted vertex v_A
// comes last. Every edge xy of G becomes x_A y_A, keeping multiplicity and loops.
inline Graph collapse(const Graph& g, std::span<const Vertex> a) {
    const std::size_t n = g.num_vertices();
    std::vector<char> in_a(n, 0);
    for (Vertex v : a) {
        if (v >= n) throw Error("collapse: vertex " + std::to_string(v) + " out of range");
        in_a[v] = 1;
    }
    const auto size_a = static_cast<std::size_t>(std::count(in_a.begin(), in_a.end(), 1));
    if (size_a == 0) throw Error("collapse: contracted set is empty");
    if (size_a == n) throw Error("collapse: contracted set is the whole vertex set");
    const Vertex contracted = static_cast<Vertex>(n - size_a);
    std::vector<Vertex> relabel(n);
    Vertex next = 0;
    for (Vertex v = 0; v < n; ++v) relabel[v] = in_a[v] ? contracted : next++;
    std::vector<Edge> edges;
    for (auto [x, y] : g.edges()) edges.emplace_back(relabel[x], relabel[y]);
    return Graph::from_edges(contracted + 1, std::move(edges));
}

// ---------------------------------------------------------------------------
// Edge-list text format: "n d" header, then one "u v" line per undirected edge.
// d is 0 for irregular multigraphs (collapsed chains).
// ---------------------------------------------------------------------------

inline void save_edge_list(std::ostream& os, const Graph& g) {
    os << g.num_vertices() << ' ' << g.d() << '\n';
    for (auto [u, v] : g.edges()) os << u << ' ' << v << '\n';
}

inline Graph load_edge_list(std::istream& is) {
    std::string line;
    std::size_t n = 0, d = 0;
    if (!std::getline(is, line)) throw Error("edge list: missing header");
    {
        std::istringstream header(line);
        if (!(header >> n >> d)) throw Error("edge list: malformed header '" + line + "'");
    }
    std::vector<Edge> edges;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream row(line);
        long long u = -1, v = -1;
        if (!(row >> u >> v) || u < 0 || v < 0) {
            throw Error("edge list: malformed line " + std::to_string(lineno) + ": '" + line + "'");
        }
        edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
    }
    Graph g = Graph::from_edges(n, std::move(edges));
    if (d != 0 && (!g.is_regular() || g.d() != d)) {
        throw Error("edge list: header declares d=" + std::to_string(d) + " but the graph is not " +
                    std::to_string(d) + "-regular");
    }
    return g;
}

}  // namespace plab
