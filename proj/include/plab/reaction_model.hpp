#pragma once

// Species, reaction tables and the mean-field classification of reaction models:
// dissipativity, persistence (via a fluid relaxation solved as a linear
// program), agentiality and the ephemeral ordering.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "plab/error.hpp"
#include "plab/rational.hpp"
#include "plab/simplex.hpp"

namespace plab {

using SpeciesId = int;

struct Species {
    std::string name;
    double speed = 0.0;
    Rational energy{1};
};

// One possible output multiset of a meeting, stored sorted.
struct Outcome {
    std::vector<SpeciesId> output;
    Rational probability{1};
    double p = 1.0;  // set from probability by ModelSpec::set_reaction
};

// A deterministic effective reaction: input pair -> output with positive probability.
struct Variant {
    SpeciesId a = 0;
    SpeciesId b = 0;
    std::vector<SpeciesId> output;
    std::vector<long> stoichiometry;  // output minus input, one entry per species
    double p = 1.0;
};

class ModelSpec;

struct Classification;

class ModelSpec {
public:
    ModelSpec() = default;
    explicit ModelSpec(std::vector<Species> species) : species_(std::move(species)) { reset_table(); }

    SpeciesId add_species(Species s) {
        species_.push_back(std::move(s));
        reset_table();
        return static_cast<SpeciesId>(species_.size() - 1);
    }

    // Replaces the distribution for the unordered pair {a, b}.
    void set_reaction(SpeciesId a, SpeciesId b, std::vector<Outcome> outcomes) {
        check_id(a);
        check_id(b);
        Rational total(0);
        for (auto& o : outcomes) {
            std::sort(o.output.begin(), o.output.end());
            for (SpeciesId s : o.output) check_id(s);
            if (o.probability < 0) throw Error("reaction probabilities must be nonnegative");
            total += o.probability;
            o.p = to_double(o.probability);
        }
        if (outcomes.empty()) throw Error("reaction for pair has no outcomes");
        if (abs(total - 1) > Rational(1, 1000000000000LL)) {
            throw Error("reaction probabilities for {" + species_[a].name + ", " + species_[b].name +
                        "} sum to " + to_string(total) + ", not 1");
        }
        table_[index(a, b)] = outcomes;
        table_[index(b, a)] = std::move(outcomes);
        rebuild_variants();
    }

    std::size_t num_species() const { return species_.size(); }
    const std::vector<Species>& species() const { return species_; }
    const Species& species(SpeciesId s) const { return species_.at(s); }
    void set_speed(SpeciesId s, double speed) { species_.at(s).speed = speed; }
    void set_energy(SpeciesId s, Rational e) { species_.at(s).energy = std::move(e); }

    std::optional<SpeciesId> find(const std::string& name) const {
        for (std::size_t i = 0; i < species_.size(); ++i)
            if (species_[i].name == name) return static_cast<SpeciesId>(i);
        return std::nullopt;
    }
    SpeciesId id(const std::string& name) const {
        if (auto s = find(name)) return *s;
        throw Error("unknown species '" + name + "'");
    }

    // Missing pairs are the identity output {a, b} with probability 1.
    const std::vector<Outcome>& outcomes(SpeciesId a, SpeciesId b) const { return table_[index(a, b)]; }
    bool has_effective(SpeciesId a, SpeciesId b) const { return effective_[index(a, b)]; }
    // The pair's only possible output, when the distribution is a point mass.
    bool is_deterministic(SpeciesId a, SpeciesId b) const { return table_[index(a, b)].size() == 1; }

    const std::vector<Variant>& variants() const { return variants_; }

    // Speeds must be nonnegative and sum to 1 within 1e-9; energies positive.
    void validate_parameters() const {
        double total = 0.0;
        for (const auto& s : species_) {
            if (!(s.speed >= 0.0 && s.speed <= 1.0)) throw Error("species '" + s.name + "' has speed outside [0, 1]");
            if (s.energy <= 0) throw Error("species '" + s.name + "' has non-positive energy");
            total += s.speed;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            std::ostringstream os;
            os << "species speeds sum to " << total << ", not 1";
            throw Error(os.str());
        }
    }

    std::string describe(const Variant& v) const {
        std::string s = "{" + species_[v.a].name + "," + species_[v.b].name + "} -> {";
        for (std::size_t i = 0; i < v.output.size(); ++i) s += (i ? "," : "") + species_[v.output[i]].name;
        return s + "}";
    }

    // Write-once memo of classifications keyed by density vector.
    std::shared_ptr<const Classification> cached(const std::string& key) const;
    void store(const std::string& key, std::shared_ptr<const Classification> c) const;

private:
    std::size_t index(SpeciesId a, SpeciesId b) const { return static_cast<std::size_t>(a) * species_.size() + b; }
    void check_id(SpeciesId s) const {
        if (s < 0 || static_cast<std::size_t>(s) >= species_.size()) throw Error("species id out of range");
    }
    void reset_table() {
        const std::size_t n = species_.size();
        std::vector<std::vector<Outcome>> table(n * n);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                const std::size_t old_n = n - 1;
                if (a < old_n && b < old_n && table_.size() == old_n * old_n) {
                    table[a * n + b] = table_[a * old_n + b];
                } else {
                    Outcome id;
                    id.output = {static_cast<SpeciesId>(std::min(a, b)), static_cast<SpeciesId>(std::max(a, b))};
                    table[a * n + b] = {id};
                }
            }
        table_ = std::move(table);
        rebuild_variants();
    }
    void rebuild_variants() {
        const std::size_t n = species_.size();
        variants_.clear();
        effective_.assign(n * n, 0);
        for (SpeciesId a = 0; a < static_cast<SpeciesId>(n); ++a) {
            for (SpeciesId b = a; b < static_cast<SpeciesId>(n); ++b) {
                const std::vector<SpeciesId> input{a, b};
                for (const auto& o : table_[index(a, b)]) {
                    if (o.probability <= 0 || o.output == input) continue;
                    Variant v{a, b, o.output, std::vector<long>(n, 0), o.p};
                    --v.stoichiometry[a];
                    --v.stoichiometry[b];
                    for (SpeciesId s : o.output) ++v.stoichiometry[s];
                    variants_.push_back(std::move(v));
                    effective_[index(a, b)] = effective_[index(b, a)] = 1;
                }
            }
        }
        cache_ = std::make_shared<Cache>();
    }

    struct Cache {
        std::mutex mutex;
        std::map<std::string, std::shared_ptr<const Classification>> entries;
    };

    std::vector<Species> species_;
    std::vector<std::vector<Outcome>> table_;
    std::vector<char> effective_;
    std::vector<Variant> variants_;
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

// ---------------------------------------------------------------------------
// Dissipativity
// ---------------------------------------------------------------------------

struct ModelReport {
    bool ok = true;
    std::vector<std::string> violations;
};

// Every effective variant must strictly lower the total energy.
inline ModelReport validate_dissipative(const ModelSpec& m) {
    ModelReport r;
    for (const auto& v : m.variants()) {
        const Rational before = m.species(v.a).energy + m.species(v.b).energy;
        Rational after(0);
        for (SpeciesId s : v.output) after += m.species(s).energy;
        if (!(before > after)) {
            r.ok = false;
            r.violations.push_back(m.describe(v) + ": energy " + to_string(before) + " -> " + to_string(after));
        }
    }
    return r;
}

inline const std::vector<Variant>& expand_variants(const ModelSpec& m) { return m.variants(); }

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

using DensityVector = std::vector<Rational>;

struct TypeVerdict {
    bool persistent = false;
    Rational min_density{0};            // optimum of the feasibility program
    std::vector<Rational> certificate;  // firing amounts per variant attaining it
};

struct Classification {
    std::vector<TypeVerdict> types;
    bool system_persistent = false;
    Rational min_total{0};
    std::vector<char> enabled;       // per variant: fireable from the initial support
    bool unbounded_firing = false;   // some enabled firing direction never runs out
    std::vector<std::string> caveats;

    bool persistent(SpeciesId s) const { return types.at(s).persistent; }
    std::vector<SpeciesId> ephemeral_types() const {
        std::vector<SpeciesId> out;
        for (std::size_t s = 0; s < types.size(); ++s)
            if (!types[s].persistent) out.push_back(static_cast<SpeciesId>(s));
        return out;
    }
};

inline std::shared_ptr<const Classification> ModelSpec::cached(const std::string& key) const {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->entries.find(key);
    return it == cache_->entries.end() ? nullptr : it->second;
}

inline void ModelSpec::store(const std::string& key, std::shared_ptr<const Classification> c) const {
    std::lock_guard lock(cache_->mutex);
    cache_->entries.emplace(key, std::move(c));
}

namespace detail {

// Variants whose inputs can ever be simultaneously present, grown from the
// initial support by variant outputs.
inline std::vector<char> fireable_variants(const ModelSpec& m, const DensityVector& d0) {
    std::vector<char> support(m.num_species(), 0), enabled(m.variants().size(), 0);
    for (std::size_t s = 0; s < d0.size(); ++s) support[s] = d0[s] > 0;
    for (bool grew = true; grew;) {
        grew = false;
        for (std::size_t i = 0; i < m.variants().size(); ++i) {
            const auto& v = m.variants()[i];
            if (enabled[i] || !support[v.a] || !support[v.b]) continue;
            enabled[i] = 1;
            grew = true;
            for (SpeciesId s : v.output) support[s] = 1;
        }
    }
    return enabled;
}

inline std::string density_key(const DensityVector& d0) {
    std::string key;
    for (const auto& d : d0) key += to_string(d) + ";";
    return key;
}

template <class Scalar>
Scalar from_rational(const Rational& r) {
    if constexpr (std::is_floating_point_v<Scalar>) return to_double(r);
    else return Scalar(r);
}

}  // namespace detail

// Fluid relaxation: type x is ephemeral iff some f >= 0 over the fireable
// variants keeps d0 + C f >= 0 and reaches (d0 + C f)_x = 0. The per-type
// minimum of (d0 + C f)_x is the reported epsilon.
template <class Scalar = Rational>
Classification persistence_classify_with(const ModelSpec& m, const DensityVector& d0) {
    const std::size_t ns = m.num_species();
    if (d0.size() != ns) throw Error("density vector has " + std::to_string(d0.size()) + " entries, model has " +
                                     std::to_string(ns) + " species");
    for (const auto& d : d0)
        if (d < 0) throw Error("densities must be nonnegative");

    Classification cls;
    cls.enabled = detail::fireable_variants(m, d0);
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < cls.enabled.size(); ++i)
        if (cls.enabled[i]) cols.push_back(i);

    // -C f <= d0
    std::vector<std::vector<Scalar>> g(ns, std::vector<Scalar>(cols.size(), Scalar(0)));
    std::vector<Scalar> b(ns);
    for (std::size_t s = 0; s < ns; ++s) {
        b[s] = detail::from_rational<Scalar>(d0[s]);
        for (std::size_t j = 0; j < cols.size(); ++j)
            g[s][j] = Scalar(-m.variants()[cols[j]].stoichiometry[s]);
    }
    const SlackSimplex<Scalar> lp(g, b);
    auto to_rational = [](const Scalar& v) {
        if constexpr (std::is_floating_point_v<Scalar>) return rational_from_double(v);
        else return Rational(v);
    };
    auto expand = [&](const std::vector<Scalar>& x) {
        std::vector<Rational> full(m.variants().size(), Rational(0));
        for (std::size_t j = 0; j < cols.size(); ++j) full[cols[j]] = to_rational(x[j]);
        return full;
    };
    auto is_zero = [](const Scalar& v) {
        if constexpr (std::is_floating_point_v<Scalar>) return std::abs(v) <= 1e-9;
        else return v == 0;
    };

    cls.types.resize(ns);
    for (std::size_t x = 0; x < ns; ++x) {
        std::vector<Scalar> c(cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j) c[j] = Scalar(m.variants()[cols[j]].stoichiometry[x]);
        const auto res = lp.minimize(c);
        if (res.status != LpStatus::Optimal) throw Error("persistence LP unexpectedly unbounded");
        const Scalar min_density = b[x] + res.objective;
        auto& verdict = cls.types[x];
        verdict.persistent = !is_zero(min_density);
        verdict.min_density = is_zero(min_density) ? Rational(0) : to_rational(min_density);
        verdict.certificate = expand(res.x);
        if (!verdict.persistent) {
            for (std::size_t j = 0; j < cols.size(); ++j) {
                const auto& v = m.variants()[cols[j]];
                const bool keeps_one = std::find(v.output.begin(), v.output.end(), v.a) != v.output.end();
                if (!is_zero(res.x[j]) && v.a == v.b && keeps_one) {
                    cls.caveats.push_back("fluid-semantics: " + m.species(static_cast<SpeciesId>(x)).name +
                                          " is driven to zero using the same-type reaction " + m.describe(v) +
                                          ", which never removes the last particle in the discrete process");
                    break;
                }
            }
        }
    }
    {
        std::vector<Scalar> c(cols.size(), Scalar(0));
        Scalar total_b(0);
        for (std::size_t s = 0; s < ns; ++s) {
            total_b += b[s];
            for (std::size_t j = 0; j < cols.size(); ++j) c[j] += Scalar(m.variants()[cols[j]].stoichiometry[s]);
        }
        const auto res = lp.minimize(c);
        const Scalar min_total = total_b + res.objective;
        cls.system_persistent = !is_zero(min_total);
        cls.min_total = is_zero(min_total) ? Rational(0) : to_rational(min_total);
    }
    {
        std::vector<Scalar> c(cols.size(), Scalar(-1));
        cls.unbounded_firing = !cols.empty() && lp.minimize(c).status == LpStatus::Unbounded;
        if (cls.unbounded_firing) {
            cls.caveats.push_back("inconclusive: some firing direction is unbounded (model is not dissipative)");
        }
    }
    return cls;
}

inline Classification persistence_classify(const ModelSpec& m, const DensityVector& d0) {
    const std::string key = detail::density_key(d0);
    if (auto hit = m.cached(key)) return *hit;
    auto cls = std::make_shared<const Classification>(persistence_classify_with<Rational>(m, d0));
    m.store(key, cls);
    return *m.cached(key);
}

// ---------------------------------------------------------------------------
// Agentiality and ephemeral ordering
// ---------------------------------------------------------------------------

inline ModelReport validate_agential(const ModelSpec& m, const Classification& cls) {
    ModelReport r;
    for (const auto& v : m.variants()) {
        if (!cls.persistent(v.a) && !cls.persistent(v.b)) {
            r.ok = false;
            r.violations.push_back(m.describe(v) + ": both inputs are ephemeral");
        }
    }
    return r;
}

struct EphemeralOrdering {
    bool ok = true;
    std::vector<SpeciesId> order;  // when ok
    std::vector<SpeciesId> cycle;  // when not ok: x1 < x2 < ... < x1
};

// x < y over ephemeral types iff an effective variant has x among its inputs
// and y among its outputs. Returns a topological order (ties by species id)
// or a directed cycle, which includes self-relations x < x.
inline EphemeralOrdering ephemeral_ordering(const ModelSpec& m, const Classification& cls) {
    const std::size_t ns = m.num_species();
    std::vector<std::vector<char>> rel(ns, std::vector<char>(ns, 0));
    for (const auto& v : m.variants()) {
        for (SpeciesId x : {v.a, v.b}) {
            if (cls.persistent(x)) continue;
            for (SpeciesId y : v.output)
                if (!cls.persistent(y)) rel[x][y] = 1;
        }
    }
    const auto eph = cls.ephemeral_types();
    EphemeralOrdering out;
    for (SpeciesId x : eph) {
        if (rel[x][x]) {
            out.ok = false;
            out.cycle = {x};
            return out;
        }
    }
    std::vector<int> indegree(ns, 0);
    for (SpeciesId x : eph)
        for (SpeciesId y : eph)
            if (rel[x][y]) ++indegree[y];
    std::vector<char> placed(ns, 0);
    for (std::size_t round = 0; round < eph.size(); ++round) {
        SpeciesId pick = -1;
        for (SpeciesId x : eph) {
            if (!placed[x] && indegree[x] == 0) {
                pick = x;
                break;
            }
        }
        if (pick < 0) break;
        placed[pick] = 1;
        out.order.push_back(pick);
        for (SpeciesId y : eph)
            if (rel[pick][y]) --indegree[y];
    }
    if (out.order.size() == eph.size()) return out;

    // Walk backwards along unplaced predecessors until a vertex repeats.
    out.ok = false;
    out.order.clear();
    SpeciesId cur = -1;
    for (SpeciesId x : eph)
        if (!placed[x]) {
            cur = x;
            break;
        }
    std::vector<SpeciesId> path;
    std::vector<int> seen_at(ns, -1);
    while (seen_at[cur] < 0) {
        seen_at[cur] = static_cast<int>(path.size());
        path.push_back(cur);
        SpeciesId pred = -1;
        for (SpeciesId x : eph)
            if (!placed[x] && rel[x][cur]) {
                pred = x;
                break;
            }
        cur = pred;
    }
    std::vector<SpeciesId> cycle(path.begin() + seen_at[cur], path.end());
    std::reverse(cycle.begin(), cycle.end());
    out.cycle = std::move(cycle);
    return out;
}

}  // namespace plab
