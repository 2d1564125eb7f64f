#pragma once

// Single random-walk stepping plus exact and Monte-Carlo walk functionals.
//
// Time indexing: "before time T" examines the walk at times 0, 1, ..., T-1,
// where time 0 is the starting position.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "plab/error.hpp"
#include "plab/graph.hpp"
#include "plab/parallel.hpp"
#include "plab/rng.hpp"
#include "plab/spectral.hpp"
#include "plab/stats.hpp"

namespace plab {

struct StepResult {
    Vertex to;
    bool moved;  // false for a lazy hold
};

template <class Gen>
inline StepResult walk_step(const Graph& g, Vertex v, WalkKind w, Gen& rng) {
    if (w == WalkKind::Lazy && coin(rng, 0.5)) return {v, false};
    const auto nb = g.neighbors(v);
    return {nb[uniform_index(rng, nb.size())], true};
}

template <class Gen>
inline Vertex step(const Graph& g, Vertex v, WalkKind w, Gen& rng) {
    return walk_step(g, v, w, rng).to;
}

enum class Method { ExactLinearSolve, MonteCarlo };

inline const char* to_string(Method m) {
    return m == Method::ExactLinearSolve ? "exact-linear-solve" : "monte-carlo";
}

struct WalkFunctionalResult {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
    Method method = Method::MonteCarlo;
};

struct McOptions {
    std::uint64_t reps = 1000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::uint64_t step_cap = 0;  // 0: 100 n^2
};

namespace detail {

inline std::uint64_t default_step_cap(const Graph& g) {
    const auto n = static_cast<std::uint64_t>(g.num_vertices());
    return std::max<std::uint64_t>(100 * n * n, 1000);
}

inline std::vector<char> membership(const Graph& g, std::span<const Vertex> set, const char* what) {
    std::vector<char> in(g.num_vertices(), 0);
    for (Vertex v : set) {
        if (v >= g.num_vertices()) throw Error(std::string(what) + ": vertex " + std::to_string(v) + " out of range");
        in[v] = 1;
    }
    return in;
}

// Runs reps replicates of fn(rng) -> double and summarises them.
template <class Fn>
WalkFunctionalResult monte_carlo(const McOptions& opts, Fn&& fn) {
    if (opts.reps == 0) throw Error("monte-carlo: reps must be >= 1");
    auto values = parallel_map<double>(opts.reps, opts.threads, [&](std::size_t r) {
        Rng rng = stream(opts.seed, r);
        return fn(rng);
    });
    MeanAccumulator acc;
    for (double v : values) acc.add(v);
    return {acc.mean(), acc.stderr_of_mean(), acc.count(), Method::MonteCarlo};
}

// One step of distribution propagation: out = x P.
inline void push_distribution(const Graph& g, WalkKind w, const std::vector<double>& x, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    const double hold = w == WalkKind::Lazy ? 0.5 : 0.0;
    for (Vertex u = 0; u < g.num_vertices(); ++u) {
        if (x[u] == 0.0) continue;
        out[u] += hold * x[u];
        const auto nb = g.neighbors(u);
        const double share = (1.0 - hold) * x[u] / static_cast<double>(nb.size());
        for (Vertex v : nb) out[v] += share;
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exact hitting times
// ---------------------------------------------------------------------------

// h[x] = expected steps from x to the target set; solves h = 1 + P h off the target.
inline std::vector<double> hitting_exact(const Graph& g, std::span<const Vertex> target, WalkKind w) {
    const std::size_t n = g.num_vertices();
    if (target.empty()) throw Error("hitting_exact: target set is empty");
    if (!g.is_connected()) throw Error("hitting_exact: graph is not connected");
    const auto in_target = detail::membership(g, target, "hitting_exact");
    std::vector<int> index(n, -1);
    int m = 0;
    for (Vertex v = 0; v < n; ++v)
        if (!in_target[v]) index[v] = m++;
    std::vector<double> h(n, 0.0);
    if (m == 0) return h;

    const double hold = w == WalkKind::Lazy ? 0.5 : 0.0;
    std::vector<Eigen::Triplet<double>> entries;
    for (Vertex u = 0; u < n; ++u) {
        if (index[u] < 0) continue;
        const auto nb = g.neighbors(u);
        const double move = (1.0 - hold) / static_cast<double>(nb.size());
        entries.emplace_back(index[u], index[u], 1.0 - hold);
        for (Vertex v : nb)
            if (index[v] >= 0) entries.emplace_back(index[u], index[v], -move);
    }
    Eigen::SparseMatrix<double> a(m, m);
    a.setFromTriplets(entries.begin(), entries.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(a);
    if (solver.info() != Eigen::Success) throw Error("hitting_exact: singular system (internal error)");
    const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(m);
    Eigen::VectorXd sol = solver.solve(rhs);
    // Iterative refinement drives the residual to 1e-10 (relative to |h| for huge hitting times).
    const double budget = 1e-10 * std::max(1.0, sol.lpNorm<Eigen::Infinity>() * 1e-6);
    double residual = (rhs - a * sol).lpNorm<Eigen::Infinity>();
    for (int round = 0; round < 3 && residual > 1e-10; ++round) {
        sol += solver.solve(rhs - a * sol);
        residual = (rhs - a * sol).lpNorm<Eigen::Infinity>();
    }
    if (!(residual <= budget)) {
        throw Error("hitting_exact: residual " + std::to_string(residual) + " too large (internal error)");
    }
    for (Vertex v = 0; v < n; ++v)
        if (index[v] >= 0) h[v] = sol[index[v]];
    return h;
}

inline double h_max(const Graph& g, WalkKind w) {
    double best = 0.0;
    for (Vertex y = 0; y < g.num_vertices(); ++y) {
        const Vertex target[] = {y};
        const auto h = hitting_exact(g, target, w);
        best = std::max(best, *std::max_element(h.begin(), h.end()));
    }
    return best;
}

// Pair (x, y) attaining H_x(y) = H_max.
inline std::pair<Vertex, Vertex> h_max_pair(const Graph& g, WalkKind w) {
    double best = -1.0;
    std::pair<Vertex, Vertex> arg{0, 0};
    for (Vertex y = 0; y < g.num_vertices(); ++y) {
        const Vertex target[] = {y};
        const auto h = hitting_exact(g, target, w);
        for (Vertex x = 0; x < h.size(); ++x) {
            if (h[x] > best) {
                best = h[x];
                arg = {x, y};
            }
        }
    }
    return arg;
}

// ---------------------------------------------------------------------------
// Return times and the fundamental matrix diagonal
// ---------------------------------------------------------------------------

inline WalkFunctionalResult return_time_mc(const Graph& g, Vertex v, WalkKind w, McOptions opts) {
    if (v >= g.num_vertices()) throw Error("return_time_mc: vertex out of range");
    const std::uint64_t cap = opts.step_cap ? opts.step_cap : detail::default_step_cap(g);
    return detail::monte_carlo(opts, [&](Rng& rng) {
        Vertex pos = v;
        for (std::uint64_t t = 1; t <= cap; ++t) {
            pos = step(g, pos, w, rng);
            if (pos == v) return static_cast<double>(t);
        }
        throw StepCapExceeded("return_time_mc: replicate exceeded step cap", cap);
    });
}

struct ZResult {
    double zvv = 0.0;
    double epi_h = 0.0;  // E_pi H(v) = Z_vv / pi_v
    std::uint64_t terms = 0;
};

// Z_vv = sum_{t>=0} (P^t_vv - pi_v) for the lazy walk, truncated once the
// tail bound mu2^t / (1 - mu2) falls below 1e-10.
inline ZResult stationary_hitting_Z(const Graph& g, Vertex v, WalkKind w = WalkKind::Lazy) {
    if (w != WalkKind::Lazy) throw Error("stationary_hitting_Z: requires the lazy walk");
    const std::size_t n = g.num_vertices();
    if (v >= n) throw Error("stationary_hitting_Z: vertex out of range");
    const double mu2 = spectral_mu2(g, WalkKind::Lazy);
    if (mu2 >= 1.0 - 1e-12) throw Error("stationary_hitting_Z: mu2 = 1, graph is not an expander");
    const double pi_v = static_cast<double>(g.degree(v)) / static_cast<double>(2 * g.num_edges());
    std::vector<double> x(n, 0.0), next(n, 0.0);
    x[v] = 1.0;
    ZResult res;
    double tail = 1.0 / (1.0 - mu2);
    for (std::uint64_t t = 0; tail >= 1e-10; ++t) {
        res.zvv += x[v] - pi_v;
        ++res.terms;
        detail::push_distribution(g, WalkKind::Lazy, x, next);
        std::swap(x, next);
        tail *= mu2;
        if (res.terms > 100'000'000) throw Error("stationary_hitting_Z: series did not truncate");
    }
    res.epi_h = res.zvv / pi_v;
    return res;
}

// ---------------------------------------------------------------------------
// Meeting times under strategies
// ---------------------------------------------------------------------------

struct MeetingState {
    std::uint64_t steps = 0;
    Vertex positions[2] = {0, 0};
    std::span<const std::uint8_t> history;  // token moved at each previous step
};

// A rule choosing which of the two tokens (0 starts at x, 1 at y) moves next.
class Strategy {
public:
    using Callback = std::function<int(const MeetingState&, Rng&)>;

    // Token 0 moves with probability p.
    static Strategy bernoulli(double p) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error("bernoulli strategy: p must lie in [0, 1]");
        Strategy s;
        s.kind_ = Kind::Bernoulli;
        s.p_ = p;
        return s;
    }
    static Strategy alternating() {
        Strategy s;
        s.kind_ = Kind::Alternating;
        return s;
    }
    static Strategy custom(Callback cb) {
        Strategy s;
        s.kind_ = Kind::Custom;
        s.callback_ = std::move(cb);
        return s;
    }
    // "bernoulli:0.3", "alternating"
    static Strategy parse(const std::string& text) {
        if (text == "alternating") return alternating();
        const std::string prefix = "bernoulli:";
        if (text.rfind(prefix, 0) == 0) return bernoulli(std::stod(text.substr(prefix.size())));
        throw Error("unknown strategy '" + text + "'");
    }

    bool needs_history() const { return kind_ == Kind::Custom; }

    int choose(const MeetingState& state, Rng& rng) const {
        switch (kind_) {
            case Kind::Bernoulli:
                return coin(rng, p_) ? 0 : 1;
            case Kind::Alternating:
                return static_cast<int>(state.steps % 2);
            case Kind::Custom: {
                const int token = callback_(state, rng);
                if (token != 0 && token != 1) throw Error("custom strategy returned token " + std::to_string(token));
                return token;
            }
        }
        return 0;
    }

private:
    enum class Kind { Bernoulli, Alternating, Custom };
    Kind kind_ = Kind::Bernoulli;
    double p_ = 0.5;
    Callback callback_;
};

inline WalkFunctionalResult meeting_time_mc(const Graph& g, Vertex x, Vertex y, const Strategy& s, WalkKind w,
                                            McOptions opts) {
    if (x == y) throw Error("meeting_time_mc: tokens must start apart");
    if (x >= g.num_vertices() || y >= g.num_vertices()) throw Error("meeting_time_mc: vertex out of range");
    const std::uint64_t cap = opts.step_cap ? opts.step_cap : detail::default_step_cap(g);
    return detail::monte_carlo(opts, [&](Rng& rng) {
        MeetingState state;
        state.positions[0] = x;
        state.positions[1] = y;
        std::vector<std::uint8_t> history;
        while (state.steps < cap) {
            if (s.needs_history()) state.history = history;
            const int token = s.choose(state, rng);
            state.positions[token] = step(g, state.positions[token], w, rng);
            ++state.steps;
            if (s.needs_history()) history.push_back(static_cast<std::uint8_t>(token));
            if (state.positions[0] == state.positions[1]) return static_cast<double>(state.steps);
        }
        throw StepCapExceeded("meeting_time_mc: replicate exceeded step cap", cap);
    });
}

// ---------------------------------------------------------------------------
// Hitting a set from a uniform start in another set
// ---------------------------------------------------------------------------

struct HitFromRandomResult {
    WalkFunctionalResult mean;
    double threshold = 0.0;  // |A| / (2|B|)
    double tail_prob = 0.0;  // empirical P(H >= threshold)
    double tail_stderr = 0.0;
};

inline HitFromRandomResult hit_from_random_mc(const Graph& g, std::span<const Vertex> a, std::span<const Vertex> b,
                                              WalkKind w, McOptions opts) {
    if (a.empty() || b.empty()) throw Error("hit_from_random_mc: sets must be nonempty");
    const auto in_a = detail::membership(g, a, "hit_from_random_mc");
    const auto in_b = detail::membership(g, b, "hit_from_random_mc");
    for (Vertex v : a)
        if (in_b[v]) throw Error("hit_from_random_mc: sets must be disjoint");
    std::vector<Vertex> starts;
    for (Vertex v = 0; v < g.num_vertices(); ++v)
        if (in_a[v]) starts.push_back(v);
    std::size_t size_b = 0;
    for (char c : in_b) size_b += c ? 1 : 0;
    const double threshold = static_cast<double>(starts.size()) / (2.0 * static_cast<double>(size_b));
    const std::uint64_t cap = opts.step_cap ? opts.step_cap : detail::default_step_cap(g);

    const auto times = parallel_map<double>(opts.reps, opts.threads, [&](std::size_t r) {
        Rng rng = stream(opts.seed, r);
        Vertex pos = starts[uniform_index(rng, starts.size())];
        for (std::uint64_t t = 1; t <= cap; ++t) {
            pos = step(g, pos, w, rng);
            if (in_b[pos]) return static_cast<double>(t);
        }
        throw StepCapExceeded("hit_from_random_mc: replicate exceeded step cap", cap);
    });
    MeanAccumulator acc;
    std::uint64_t tail = 0;
    for (double t : times) {
        acc.add(t);
        if (t >= threshold) ++tail;
    }
    HitFromRandomResult res;
    res.mean = {acc.mean(), acc.stderr_of_mean(), acc.count(), Method::MonteCarlo};
    res.threshold = threshold;
    res.tail_prob = static_cast<double>(tail) / static_cast<double>(times.size());
    res.tail_stderr = proportion_stderr(res.tail_prob, times.size());
    return res;
}

// ---------------------------------------------------------------------------
// Mixing
// ---------------------------------------------------------------------------

// max_v |P^t_uv - pi_v| by t distribution pushes from the indicator of u.
inline double mixing_distance(const Graph& g, Vertex u, std::uint64_t t, WalkKind w = WalkKind::Lazy) {
    const std::size_t n = g.num_vertices();
    if (u >= n) throw Error("mixing_distance: vertex out of range");
    std::vector<double> x(n, 0.0), next(n, 0.0);
    x[u] = 1.0;
    for (std::uint64_t s = 0; s < t; ++s) {
        detail::push_distribution(g, w, x, next);
        std::swap(x, next);
    }
    const double two_m = static_cast<double>(2 * g.num_edges());
    double worst = 0.0;
    for (Vertex v = 0; v < n; ++v) worst = std::max(worst, std::abs(x[v] - static_cast<double>(g.degree(v)) / two_m));
    return worst;
}

// ---------------------------------------------------------------------------
// Return / hit probabilities within a horizon
// ---------------------------------------------------------------------------

// p_{A,T}: lazy walk from a uniform vertex of A is in A at some time
// 1 <= t <= T-1 having made at least one non-lazy step by then.
inline WalkFunctionalResult p_return_mc(const Graph& g, std::span<const Vertex> a, std::uint64_t horizon,
                                        McOptions opts) {
    if (a.empty()) throw Error("p_return_mc: set must be nonempty");
    const auto in_a = detail::membership(g, a, "p_return_mc");
    std::vector<Vertex> starts;
    for (Vertex v = 0; v < g.num_vertices(); ++v)
        if (in_a[v]) starts.push_back(v);
    return detail::monte_carlo(opts, [&](Rng& rng) {
        Vertex pos = starts[uniform_index(rng, starts.size())];
        bool moved = false;
        for (std::uint64_t t = 1; t < horizon; ++t) {
            const StepResult s = walk_step(g, pos, WalkKind::Lazy, rng);
            pos = s.to;
            moved = moved || s.moved;
            if (moved && in_a[pos]) return 1.0;
        }
        return 0.0;
    });
}

// p_{v,B,T}: walk from v visits B at some time 0 <= t <= T-1.
inline WalkFunctionalResult p_hit_mc(const Graph& g, Vertex v, std::span<const Vertex> b, std::uint64_t horizon,
                                     WalkKind w, McOptions opts) {
    const auto in_b = detail::membership(g, b, "p_hit_mc");
    if (v >= g.num_vertices()) throw Error("p_hit_mc: vertex out of range");
    if (in_b[v]) throw Error("p_hit_mc: start vertex lies in B");
    return detail::monte_carlo(opts, [&](Rng& rng) {
        Vertex pos = v;
        for (std::uint64_t t = 1; t < horizon; ++t) {
            pos = step(g, pos, w, rng);
            if (in_b[pos]) return 1.0;
        }
        return 0.0;
    });
}

}  // namespace plab
