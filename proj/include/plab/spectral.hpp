#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "plab/error.hpp"
#include "plab/graph.hpp"
#include "plab/rng.hpp"

namespace plab {

struct SpectralOptions {
    double tolerance = 1e-9;
    std::uint64_t max_iterations = 1'000'000;
};

struct SpectralResult {
    double mu2 = 0.0;
    double residual = 0.0;
    std::uint64_t iterations = 0;
};

namespace detail {

// y = (1/2)(I + D^{-1/2} A D^{-1/2}) x, the symmetrised lazy transition operator.
inline void apply_lazy_symmetric(const Graph& g, const std::vector<double>& inv_sqrt_deg,
                                 const std::vector<double>& x, std::vector<double>& y) {
    const std::size_t n = g.num_vertices();
    for (Vertex u = 0; u < n; ++u) {
        double acc = 0.0;
        for (Vertex v : g.neighbors(u)) acc += x[v] * inv_sqrt_deg[v];
        y[u] = 0.5 * x[u] + 0.5 * acc * inv_sqrt_deg[u];
    }
}

inline void project_out(std::vector<double>& x, const std::vector<double>& unit) {
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * unit[i];
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= dot * unit[i];
}

inline double norm2(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

}  // namespace detail

// Second-largest eigenvalue of the lazy transition matrix by power iteration
// on the symmetrised operator, deflating the known top eigenvector sqrt(deg)
// (the all-ones vector on regular graphs). Stops once the eigen-residual
// |Sx - lambda x| drops below the tolerance.
inline SpectralResult lazy_mu2_power(const Graph& g, SpectralOptions opts = {}) {
    const std::size_t n = g.num_vertices();
    if (n == 0) throw Error("spectral_mu2: empty graph");
    if (!g.is_connected()) throw Error("spectral_mu2: graph is not connected");
    if (n == 1) return {0.0, 0.0, 0};
    std::vector<double> inv_sqrt_deg(n), top(n);
    double top_norm = 0.0;
    for (Vertex v = 0; v < n; ++v) {
        const double deg = static_cast<double>(g.degree(v));
        inv_sqrt_deg[v] = 1.0 / std::sqrt(deg);
        top[v] = std::sqrt(deg);
        top_norm += deg;
    }
    top_norm = std::sqrt(top_norm);
    for (double& t : top) t /= top_norm;

    Rng rng = stream(0x5eedULL, n);
    std::vector<double> x(n), y(n);
    for (double& xi : x) xi = uniform01(rng) - 0.5;
    detail::project_out(x, top);
    double nx = detail::norm2(x);
    for (double& xi : x) xi /= nx;

    SpectralResult res;
    for (std::uint64_t it = 1; it <= opts.max_iterations; ++it) {
        detail::apply_lazy_symmetric(g, inv_sqrt_deg, x, y);
        detail::project_out(y, top);
        double lambda = 0.0;
        for (std::size_t i = 0; i < n; ++i) lambda += x[i] * y[i];
        double r2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = y[i] - lambda * x[i];
            r2 += diff * diff;
        }
        res = {lambda, std::sqrt(r2), it};
        if (res.residual <= opts.tolerance) return res;
        const double ny = detail::norm2(y);
        if (ny == 0.0) return {0.0, 0.0, it};  // x lies in the null space: mu2 = 0
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ny;
    }
    throw Error("spectral_mu2: no convergence after " + std::to_string(opts.max_iterations) +
                " iterations (residual " + std::to_string(res.residual) + ")");
}

// Simple-walk eigenvalues are 2*lazy - 1, so both kinds share the lazy iteration,
// whose spectrum is nonnegative and therefore dominated by mu2.
inline double spectral_mu2(const Graph& g, WalkKind w, SpectralOptions opts = {}) {
    if (w == WalkKind::Simple) opts.tolerance /= 2.0;
    const double lazy = lazy_mu2_power(g, opts).mu2;
    return w == WalkKind::Lazy ? lazy : 2.0 * lazy - 1.0;
}

}  // namespace plab
