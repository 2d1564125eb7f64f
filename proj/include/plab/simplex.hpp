#pragma once

// Dense primal simplex for   minimize c.x   s.t.  G x <= b,  x >= 0,  with b >= 0,
// so the slack basis is feasible from the start. Bland's rule guarantees
// termination. Scalar is exact (Rational) or floating (tolerance 1e-9).

#include <cstddef>
#include <type_traits>
#include <vector>

#include "plab/error.hpp"

namespace plab {

enum class LpStatus { Optimal, Unbounded };

template <class Scalar>
struct LpResult {
    LpStatus status = LpStatus::Optimal;
    Scalar objective{};
    std::vector<Scalar> x;
};

template <class Scalar>
class SlackSimplex {
public:
    SlackSimplex(std::vector<std::vector<Scalar>> g, std::vector<Scalar> b)
        : rows_(g.size()), vars_(rows_ ? g.front().size() : 0) {
        for (const Scalar& bi : b)
            if (negative(bi)) throw Error("simplex: right-hand side must be nonnegative");
        const std::size_t cols = vars_ + rows_;
        tableau_.assign(rows_, std::vector<Scalar>(cols, Scalar(0)));
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < vars_; ++j) tableau_[i][j] = g[i][j];
            tableau_[i][vars_ + i] = Scalar(1);
        }
        rhs_ = std::move(b);
        basis_.resize(rows_);
        for (std::size_t i = 0; i < rows_; ++i) basis_[i] = vars_ + i;
    }

    LpResult<Scalar> minimize(const std::vector<Scalar>& c) const {
        auto tab = tableau_;
        auto rhs = rhs_;
        auto basis = basis_;
        const std::size_t cols = vars_ + rows_;
        std::vector<Scalar> reduced(cols, Scalar(0));
        for (std::size_t j = 0; j < vars_; ++j) reduced[j] = c[j];
        Scalar value(0);  // objective at the current basis (slack costs are 0)

        for (std::size_t iter = 0;; ++iter) {
            if (iter > 100000) throw Error("simplex: iteration limit");
            std::size_t enter = cols;
            for (std::size_t j = 0; j < cols; ++j) {
                if (negative(reduced[j])) {
                    enter = j;
                    break;
                }
            }
            if (enter == cols) break;
            std::size_t leave = rows_;
            Scalar best_ratio(0);
            for (std::size_t i = 0; i < rows_; ++i) {
                if (!positive(tab[i][enter])) continue;
                const Scalar ratio = rhs[i] / tab[i][enter];
                if (leave == rows_ || ratio < best_ratio ||
                    (!(best_ratio < ratio) && basis[i] < basis[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == rows_) return {LpStatus::Unbounded, Scalar(0), {}};
            const Scalar pivot = tab[leave][enter];
            for (std::size_t j = 0; j < cols; ++j) tab[leave][j] /= pivot;
            rhs[leave] /= pivot;
            for (std::size_t i = 0; i < rows_; ++i) {
                if (i == leave || is_zero(tab[i][enter])) continue;
                const Scalar factor = tab[i][enter];
                for (std::size_t j = 0; j < cols; ++j) tab[i][j] -= factor * tab[leave][j];
                rhs[i] -= factor * rhs[leave];
            }
            const Scalar factor = reduced[enter];
            for (std::size_t j = 0; j < cols; ++j) reduced[j] -= factor * tab[leave][j];
            value += factor * rhs[leave];
            basis[leave] = enter;
        }
        LpResult<Scalar> res;
        res.objective = value;
        res.x.assign(vars_, Scalar(0));
        for (std::size_t i = 0; i < rows_; ++i)
            if (basis[i] < vars_) res.x[basis[i]] = rhs[i];
        return res;
    }

private:
    static constexpr bool floating = std::is_floating_point_v<Scalar>;
    static bool negative(const Scalar& v) {
        if constexpr (floating) return v < -1e-9;
        else return v < 0;
    }
    static bool positive(const Scalar& v) {
        if constexpr (floating) return v > 1e-9;
        else return v > 0;
    }
    static bool is_zero(const Scalar& v) { return !negative(v) && !positive(v); }

    std::size_t rows_;
    std::size_t vars_;
    std::vector<std::vector<Scalar>> tableau_;
    std::vector<Scalar> rhs_;
    std::vector<std::size_t> basis_;
};

}  // namespace plab
