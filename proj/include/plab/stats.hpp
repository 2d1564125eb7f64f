#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace plab {

// Streaming mean / standard-error accumulator (Welford; merge is Chan's update).
class MeanAccumulator {
public:
    void add(double x) {
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }
    void merge(const MeanAccumulator& other) {
        if (other.count_ == 0) return;
        if (count_ == 0) {
            *this = other;
            return;
        }
        const double n1 = static_cast<double>(count_), n2 = static_cast<double>(other.count_);
        const double delta = other.mean_ - mean_;
        mean_ += delta * n2 / (n1 + n2);
        m2_ += other.m2_ + delta * delta * n1 * n2 / (n1 + n2);
        count_ += other.count_;
    }
    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }
    double variance() const { return count_ < 2 ? 0.0 : std::max(0.0, m2_ / static_cast<double>(count_ - 1)); }
    double stderr_of_mean() const {
        return count_ ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
    }

private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline double proportion_stderr(double p, std::uint64_t n) {
    return n ? std::sqrt(p * (1.0 - p) / static_cast<double>(n)) : 0.0;
}

struct ChiSquareResult {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

// Pearson goodness of fit; bins with zero expectation are skipped.
inline ChiSquareResult chi_square(std::span<const double> observed, std::span<const double> expected,
                                  int fitted_params = 0) {
    ChiSquareResult r;
    int bins = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) continue;
        const double diff = observed[i] - expected[i];
        r.statistic += diff * diff / expected[i];
        ++bins;
    }
    r.dof = static_cast<double>(bins - 1 - fitted_params);
    if (r.dof < 1.0) return r;
    boost::math::chi_squared dist(r.dof);
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

}  // namespace plab
