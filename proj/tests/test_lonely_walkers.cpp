#include <gtest/gtest.h>

#include <boost/math/distributions/poisson.hpp>
#include <set>

#include "plab/graph.hpp"
#include "plab/lonely_walkers.hpp"
#include "plab/stats.hpp"

using namespace plab;

namespace {

// Replays a plain trace and records every meeting pair by direct position scan.
std::set<std::pair<std::uint32_t, std::uint32_t>> brute_met_pairs(const PlainTrace& t) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> met;
    std::vector<Vertex> pos = t.start;
    const auto k = static_cast<std::uint32_t>(pos.size());
    for (std::uint32_t a = 0; a < k; ++a)
        for (std::uint32_t b = a + 1; b < k; ++b)
            if (pos[a] == pos[b]) met.insert({a, b});
    for (const auto& mv : t.moves) {
        pos[mv.walker] = mv.to;
        for (std::uint32_t b = 0; b < k; ++b)
            if (b != mv.walker && pos[b] == mv.to) met.insert({std::min(b, mv.walker), std::max(b, mv.walker)});
    }
    return met;
}

}  // namespace

TEST(Plain, SingleWalkerIsLonely) {
    const Graph g = gen_named(NamedFamily::Cycle, 7);
    for (std::uint64_t steps : {0, 1, 10, 1000}) {
        const auto out = run_plain(g, 1, steps, WalkKind::Simple, steps);
        EXPECT_EQ(out.lonely, 1u);
        EXPECT_EQ(out.met, 0u);
    }
    EXPECT_THROW(run_plain(g, 0, 5, WalkKind::Simple, 1), Error);
}

TEST(Plain, TwoVerticesAlwaysMeet) {
    const Graph c2 = gen_named(NamedFamily::Cycle, 2);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto out = run_plain(c2, 2, 1, WalkKind::Simple, seed);
        EXPECT_EQ(out.lonely, 0u);
    }
}

TEST(Plain, LonelyNonIncreasingInT) {
    const Graph g = gen_random_regular(256, 6, 3);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto full = sample_plain_trace(g, 200, 2000, WalkKind::Simple, seed);
        std::size_t prev = 200;
        for (std::uint64_t T : {0, 10, 100, 500, 1000, 2000}) {
            const auto prefix = sample_plain_trace(g, 200, T, WalkKind::Simple, seed);
            ASSERT_EQ(prefix.start, full.start);
            ASSERT_TRUE(std::equal(prefix.moves.begin(), prefix.moves.end(), full.moves.begin(),
                                   [](const PlainMove& a, const PlainMove& b) { return a.walker == b.walker && a.to == b.to; }));
            const auto out = lonely_from_trace(256, prefix);
            EXPECT_LE(out.lonely, prev);
            prev = out.lonely;
        }
    }
}

TEST(Plain, MetRelationMatchesBruteForce) {
    const Graph g = gen_random_regular(40, 4, 9);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const WalkKind w = seed % 2 ? WalkKind::Lazy : WalkKind::Simple;
        const auto trace = sample_plain_trace(g, 25, 60, w, seed);
        const auto out = lonely_from_trace(40, trace);
        const auto pairs = brute_met_pairs(trace);
        std::vector<char> flags(25, 0);
        for (auto [a, b] : pairs) {
            EXPECT_LT(a, b);
            flags[a] = flags[b] = 1;
        }
        EXPECT_EQ(out.met_flags, flags);
        EXPECT_EQ(out.met + out.lonely, 25u);
    }
}

TEST(Poisson, ClassificationMatchesBruteForce) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t n = 16 + 8 * (seed % 7);
        const Graph g = gen_random_regular(n, 4, seed);
        PoissonOptions po;
        po.rate = 0.3;
        po.horizon = 30;
        po.record_positions = true;
        const auto sys = run_poissonised(g, po, seed);
        const std::size_t P = sys.start.size();
        ASSERT_EQ(sys.snapshots.size(), 31u);
        std::set<std::uint64_t> strong, touch;
        for (const auto& snap : sys.snapshots)
            for (std::uint32_t a = 0; a < P; ++a)
                for (std::uint32_t b = a + 1; b < P; ++b)
                    if (snap[a] == snap[b]) strong.insert(std::uint64_t{a} * P + b);
        for (std::size_t t = 0; t < sys.moves.size(); ++t) {
            std::vector<std::set<Vertex>> visited(P);
            for (std::uint32_t p = 0; p < P; ++p) visited[p].insert(sys.snapshots[t][p]);
            for (const auto& mv : sys.moves[t]) {
                EXPECT_EQ(mv.path.front(), sys.snapshots[t][mv.particle]);
                EXPECT_EQ(mv.path.back(), sys.snapshots[t + 1][mv.particle]);
                EXPECT_GE(mv.path.size(), 2u);
                visited[mv.particle].insert(mv.path.begin(), mv.path.end());
            }
            for (std::uint32_t a = 0; a < P; ++a)
                for (std::uint32_t b = a + 1; b < P; ++b) {
                    const bool meet = std::any_of(visited[a].begin(), visited[a].end(),
                                                  [&](Vertex v) { return visited[b].count(v) > 0; });
                    if (meet) touch.insert(std::uint64_t{a} * P + b);
                }
        }
        std::set<std::uint64_t> weak;
        for (auto k : touch)
            if (!strong.count(k)) weak.insert(k);
        EXPECT_EQ(std::vector<std::uint64_t>(strong.begin(), strong.end()), sys.strong_pairs);
        EXPECT_EQ(std::vector<std::uint64_t>(weak.begin(), weak.end()), sys.weak_pairs);
        for (std::uint32_t p = 0; p < P; ++p) {
            bool s = false, w = false;
            for (auto k : strong) s |= (k / P == p || k % P == p);
            for (auto k : weak) w |= (k / P == p || k % P == p);
            const Collision expect = s ? Collision::Strong : (w ? Collision::Weak : Collision::None);
            EXPECT_EQ(sys.status[p], expect);
        }
        EXPECT_EQ(sys.summary.lonely + sys.summary.weak_colliders + sys.summary.strong_colliders, P);
    }
}

TEST(Poisson, ZeroHorizonCountsInitialColocation) {
    const std::size_t n = 2000;
    const Graph g = gen_random_regular(n, 4, 1);
    const double lambda = 1.1;
    const double p2 = 1.0 - std::exp(-lambda) * (1.0 + lambda);
    MeanAccumulator vertices, particles;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        PoissonOptions po;
        po.horizon = 0;
        const auto sys = run_poissonised(g, po, seed);
        EXPECT_EQ(sys.horizon, 0u);
        EXPECT_EQ(sys.summary.total_moves, 0u);
        EXPECT_EQ(sys.summary.weak_colliders, 0u);
        // Exactly the particles sharing their start vertex collide strongly.
        std::vector<std::size_t> at(n, 0);
        for (Vertex v : sys.start) ++at[v];
        std::size_t shared = 0, colocated = 0;
        for (auto c : at) {
            if (c >= 2) shared += c, ++colocated;
        }
        EXPECT_EQ(sys.summary.strong_colliders, shared);
        EXPECT_EQ(sys.summary.initial_colocated_vertices, colocated);
        vertices.add(static_cast<double>(colocated));
        particles.add(static_cast<double>(sys.summary.particles));
    }
    EXPECT_NEAR(vertices.mean(), n * p2, 4 * vertices.stderr_of_mean() + 1e-9);
    EXPECT_NEAR(particles.mean(), lambda * n, 4 * particles.stderr_of_mean() + 1e-9);
}

TEST(Poisson, CountsStayPoisson) {
    const std::size_t n = 1024;
    const Graph g = gen_random_regular(n, 10, 2);
    PoissonOptions po;
    po.rate = 0.5;
    po.horizon = 40;
    po.record_moves = false;
    std::vector<double> obs(6, 0.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto sys = run_poissonised(g, po, seed);
        EXPECT_GT(sys.summary.total_moves, 0u);
        std::vector<std::size_t> at(n, 0);
        for (Vertex v : sys.position) ++at[v];
        for (auto c : at) obs[std::min<std::size_t>(c, 5)] += 1;
    }
    boost::math::poisson_distribution<> po_dist(1.1);
    std::vector<double> exp(6);
    for (int k = 0; k < 5; ++k) exp[k] = 10.0 * n * boost::math::pdf(po_dist, k);
    exp[5] = 10.0 * n * boost::math::cdf(boost::math::complement(po_dist, 4));
    EXPECT_GT(chi_square(obs, exp).p_value, 0.001);
}

TEST(Poisson, ErrorsAndDefaults) {
    const Graph g = gen_random_regular(64, 4, 1);
    PoissonOptions bad;
    bad.lambda0 = 0.0;
    EXPECT_THROW(run_poissonised(g, bad, 1), Error);
    PoissonOptions fast;
    fast.rate = 1.5;
    EXPECT_THROW(run_poissonised(g, fast, 1), Error);
    const auto sys = run_poissonised(g, {}, 1);
    EXPECT_EQ(sys.horizon, default_poisson_horizon(64));
    EXPECT_DOUBLE_EQ(sys.rate, 1.0 / 64);
    const auto again = run_poissonised(g, {}, 1);
    EXPECT_EQ(sys.strong_pairs, again.strong_pairs);
    EXPECT_EQ(sys.position, again.position);
}

TEST(Coupling, Basics) {
    const Graph g = gen_random_regular(256, 6, 5);
    PoissonOptions po;
    const auto sys = run_poissonised(g, po, 3);
    const auto none = couple_to_plain(sys, 0, 100, 1);
    EXPECT_TRUE(none.success);
    EXPECT_TRUE(none.trace.start.empty());
    EXPECT_TRUE(none.trace.moves.empty());
    const auto too_many = couple_to_plain(sys, sys.start.size() + 1, 10, 1);
    EXPECT_FALSE(too_many.success);
    EXPECT_FALSE(too_many.failure.empty());
    PoissonOptions quiet = po;
    quiet.record_moves = false;
    EXPECT_THROW(couple_to_plain(run_poissonised(g, quiet, 3), 10, 10, 1), Error);
}

TEST(Coupling, HugeIntensitySucceeds) {
    const std::size_t n = 256;
    const Graph g = gen_random_regular(n, 6, 5);
    const auto steps = static_cast<std::uint64_t>(std::ceil(0.1 * n * std::log(double(n))));
    // 2n walkers: never enough particles at the default intensity, always at a huge one.
    PoissonOptions po;
    const auto thin = couple_to_plain(run_poissonised(g, po, 1), 2 * n, steps, 1);
    EXPECT_FALSE(thin.success);
    po.lambda0 = 20.0;
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto sys = run_poissonised(g, po, seed);
        const auto c = couple_to_plain(sys, 2 * n, steps, seed);
        ok += c.success;
        if (!c.success) continue;
        // A valid plain trace: every move follows an edge from the walker's position.
        std::vector<Vertex> pos = c.trace.start;
        ASSERT_EQ(c.trace.moves.size(), steps);
        for (const auto& mv : c.trace.moves) {
            const auto nb = g.neighbors(pos[mv.walker]);
            EXPECT_NE(std::find(nb.begin(), nb.end(), mv.to), nb.end());
            pos[mv.walker] = mv.to;
        }
        EXPECT_LE(lonely_from_trace(n, c.trace).lonely, 2 * n);
    }
    EXPECT_EQ(ok, 20);
}
