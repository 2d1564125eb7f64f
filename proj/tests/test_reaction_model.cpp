#include <gtest/gtest.h>

#include <sstream>

#include "plab/model_io.hpp"
#include "plab/rational.hpp"
#include "plab/reaction_model.hpp"
#include "plab/rng.hpp"
#include "plab/special_models.hpp"

using namespace plab;

namespace {

Outcome out(std::vector<SpeciesId> s, Rational p = Rational(1)) {
    Outcome o;
    o.output = std::move(s);
    o.probability = p;
    return o;
}

ModelSpec species_model(std::initializer_list<const char*> names) {
    ModelSpec m;
    const double speed = 1.0 / static_cast<double>(names.size());
    for (const char* n : names) m.add_species({n, speed, Rational(1)});
    return m;
}

DensityVector dens(std::initializer_list<const char*> values) {
    DensityVector d;
    for (const char* v : values) d.push_back(parse_rational(v));
    return d;
}

}  // namespace

TEST(Dissipative, Examples) {
    EXPECT_TRUE(validate_dissipative(make_two_type_annihilation(0.5)).ok);

    ModelSpec cat = species_model({"A", "B", "c", "d"});
    cat.set_reaction(0, 2, {out({0, 3})});
    cat.set_reaction(1, 3, {out({1, 2})});
    const auto r = validate_dissipative(cat);
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.violations.size(), 2u);

    ModelSpec inf = species_model({"A", "B"});
    inf.set_reaction(0, 1, {out({0, 0})});
    EXPECT_FALSE(validate_dissipative(inf).ok);
    inf.set_energy(1, Rational(2));
    EXPECT_TRUE(validate_dissipative(inf).ok);
}

TEST(Variants, Examples) {
    const ModelSpec ann = make_two_type_annihilation(0.5);
    const auto& v = expand_variants(ann);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_TRUE(v[0].output.empty());
    EXPECT_EQ(v[0].stoichiometry, (std::vector<long>{-1, -1}));

    ModelSpec idle = species_model({"A"});
    idle.set_reaction(0, 0, {out({0, 0})});
    EXPECT_TRUE(expand_variants(idle).empty());
    EXPECT_FALSE(idle.has_effective(0, 0));

    ModelSpec half = species_model({"A", "b"});
    half.set_reaction(0, 1, {out({}, Rational(1, 2)), out({1, 0}, Rational(1, 2))});
    ASSERT_EQ(expand_variants(half).size(), 1u);
    EXPECT_EQ(expand_variants(half)[0].stoichiometry, (std::vector<long>{-1, -1}));
    EXPECT_DOUBLE_EQ(expand_variants(half)[0].p, 0.5);
    EXPECT_FALSE(half.is_deterministic(0, 1));
    EXPECT_TRUE(half.has_effective(1, 0));
}

TEST(ModelSpec, Errors) {
    ModelSpec m = species_model({"A", "B"});
    EXPECT_THROW(m.set_reaction(0, 1, {out({}, Rational(1, 2))}), Error);
    EXPECT_THROW(m.set_reaction(0, 2, {out({})}), Error);
    EXPECT_THROW(m.set_reaction(0, 1, {}), Error);
    EXPECT_THROW(m.id("C"), Error);
    ModelSpec slow;
    slow.add_species({"A", 0.3, Rational(1)});
    EXPECT_THROW(slow.validate_parameters(), Error);
    ModelSpec cold;
    cold.add_species({"A", 1.0, Rational(0)});
    EXPECT_THROW(cold.validate_parameters(), Error);
}

TEST(Persistence, UnbalancedAnnihilation) {
    const ModelSpec m = make_two_type_annihilation(0.5);
    const auto cls = persistence_classify(m, dens({"0.55", "0.45"}));
    EXPECT_TRUE(cls.persistent(0));
    EXPECT_FALSE(cls.persistent(1));
    EXPECT_EQ(cls.types[0].min_density, Rational(1, 10));
    EXPECT_EQ(cls.types[1].min_density, Rational(0));
    EXPECT_TRUE(cls.system_persistent);
    EXPECT_EQ(cls.min_total, Rational(1, 10));
    EXPECT_TRUE(validate_agential(m, cls).ok);
    const auto ord = ephemeral_ordering(m, cls);
    EXPECT_TRUE(ord.ok);
    EXPECT_EQ(ord.order, (std::vector<SpeciesId>{1}));
}

TEST(Persistence, BalancedAnnihilation) {
    const ModelSpec m = make_two_type_annihilation(0.5);
    const auto cls = persistence_classify(m, dens({"1/2", "1/2"}));
    EXPECT_FALSE(cls.persistent(0));
    EXPECT_FALSE(cls.persistent(1));
    EXPECT_FALSE(cls.system_persistent);
    const auto ag = validate_agential(m, cls);
    EXPECT_FALSE(ag.ok);
    EXPECT_EQ(ag.violations.size(), 1u);
}

TEST(Persistence, PredatorPrey) {
    const double speeds[] = {0.5, 0.5};
    const ModelSpec m = make_special(SpecialKind::PredatorPrey, speeds);
    const auto cls = persistence_classify(m, dens({"0.2", "0.8"}));
    EXPECT_TRUE(cls.persistent(0));
    EXPECT_EQ(cls.types[0].min_density, Rational(1, 5));
    EXPECT_FALSE(cls.persistent(1));
    EXPECT_TRUE(cls.system_persistent);
    EXPECT_TRUE(validate_agential(m, cls).ok);
    EXPECT_EQ(ephemeral_ordering(m, cls).order, (std::vector<SpeciesId>{1}));
}

TEST(Persistence, OneTypeModels) {
    const double one[] = {1.0};
    const ModelSpec ann = make_special(SpecialKind::OneTypeAnnihilation, one);
    const auto a = persistence_classify(ann, dens({"1"}));
    EXPECT_FALSE(a.persistent(0));
    EXPECT_FALSE(validate_agential(ann, a).ok);
    EXPECT_TRUE(a.caveats.empty());

    const ModelSpec coal = make_special(SpecialKind::Coalescence, one);
    EXPECT_TRUE(validate_dissipative(coal).ok);
    const auto c = persistence_classify(coal, dens({"1"}));
    EXPECT_FALSE(c.persistent(0));
    EXPECT_FALSE(c.system_persistent);
    ASSERT_FALSE(c.caveats.empty());
    EXPECT_NE(c.caveats.front().find("fluid"), std::string::npos);
}

TEST(Persistence, Infection) {
    const double speeds[] = {0.5, 0.5};
    const ModelSpec m = make_special(SpecialKind::Infection, speeds);
    EXPECT_TRUE(validate_dissipative(m).ok);
    const auto cls = persistence_classify(m, dens({"0.1", "0.9"}));
    EXPECT_TRUE(cls.persistent(0));
    EXPECT_EQ(cls.types[0].min_density, Rational(1, 10));
    EXPECT_FALSE(cls.persistent(1));
    EXPECT_TRUE(validate_agential(m, cls).ok);
}

TEST(Persistence, ZeroDensityTypesAreEphemeralAndUnreachableVariantsIdle) {
    // A+B -> 0 cannot fire when B is absent; A stays at its density.
    const ModelSpec m = make_two_type_annihilation(0.5);
    const auto cls = persistence_classify(m, dens({"0.3", "0"}));
    EXPECT_TRUE(cls.persistent(0));
    EXPECT_EQ(cls.types[0].min_density, Rational(3, 10));
    EXPECT_FALSE(cls.persistent(1));
    EXPECT_EQ(cls.enabled, (std::vector<char>{0}));
}

TEST(Persistence, SupportFixpointEnablesChains) {
    // A+b -> c, then A+c -> 0: the second variant is fireable only after the first.
    ModelSpec m = species_model({"A", "b", "c"});
    m.set_reaction(0, 1, {out({2})});
    m.set_reaction(0, 2, {out({})});
    const auto cls = persistence_classify(m, dens({"0.9", "0.1", "0"}));
    EXPECT_EQ(cls.enabled, (std::vector<char>{1, 1}));
    EXPECT_TRUE(cls.persistent(0));
    EXPECT_EQ(cls.types[0].min_density, Rational(7, 10));
    EXPECT_FALSE(cls.persistent(1));
    EXPECT_FALSE(cls.persistent(2));
    const auto ord = ephemeral_ordering(m, cls);
    ASSERT_TRUE(ord.ok);
    EXPECT_EQ(ord.order, (std::vector<SpeciesId>{1, 2}));
}

TEST(Persistence, CatalyticCycleIsReported) {
    // A+b -> A+c and A+c -> A+b: b and c interconvert for free.
    ModelSpec m = species_model({"A", "b", "c"});
    m.set_reaction(0, 1, {out({0, 2})});
    m.set_reaction(0, 2, {out({0, 1})});
    EXPECT_FALSE(validate_dissipative(m).ok);
    const auto cls = persistence_classify(m, dens({"1/2", "1/4", "1/4"}));
    EXPECT_TRUE(cls.persistent(0));
    EXPECT_FALSE(cls.persistent(1));
    EXPECT_FALSE(cls.persistent(2));
    EXPECT_TRUE(cls.unbounded_firing);
    const auto ord = ephemeral_ordering(m, cls);
    EXPECT_FALSE(ord.ok);
    std::vector<SpeciesId> cyc = ord.cycle;
    std::sort(cyc.begin(), cyc.end());
    EXPECT_EQ(cyc, (std::vector<SpeciesId>{1, 2}));
}

TEST(Persistence, CertificateReachesZero) {
    const ModelSpec m = make_two_type_annihilation(0.5);
    const DensityVector d0 = dens({"0.55", "0.45"});
    const auto cls = persistence_classify(m, d0);
    const auto& cert = cls.types[1].certificate;
    ASSERT_EQ(cert.size(), 1u);
    EXPECT_EQ(cert[0], Rational(9, 20));
    // d0 + C f >= 0 with blue at 0
    EXPECT_EQ(d0[1] - cert[0], Rational(0));
    EXPECT_GE(d0[0] - cert[0], Rational(0));
}

TEST(Persistence, FloatingPointAgreesWithRational) {
    const double speeds[] = {0.5, 0.5};
    for (SpecialKind k : {SpecialKind::TwoTypeAnnihilation, SpecialKind::PredatorPrey, SpecialKind::Infection}) {
        const ModelSpec m = make_special(k, speeds);
        for (const auto& d : {dens({"0.55", "0.45"}), dens({"0.3", "0.7"}), dens({"1/2", "1/2"})}) {
            const auto exact = persistence_classify_with<Rational>(m, d);
            const auto approx = persistence_classify_with<double>(m, d);
            for (std::size_t s = 0; s < 2; ++s) {
                EXPECT_EQ(exact.types[s].persistent, approx.types[s].persistent);
                EXPECT_NEAR(to_double(exact.types[s].min_density), to_double(approx.types[s].min_density), 1e-9);
            }
        }
    }
}

TEST(Persistence, MonotoneInOwnDensity) {
    Rng rng = stream(21);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t ns = 3 + uniform_index(rng, 3);
        ModelSpec m;
        for (std::size_t s = 0; s < ns; ++s)
            m.add_species({std::string(1, static_cast<char>('A' + s)), 1.0 / static_cast<double>(ns), Rational(1)});
        for (int r = 0; r < 3; ++r) {
            const auto a = static_cast<SpeciesId>(uniform_index(rng, ns));
            const auto b = static_cast<SpeciesId>(uniform_index(rng, ns));
            std::vector<SpeciesId> o;
            const std::size_t len = uniform_index(rng, 2);
            for (std::size_t i = 0; i < len; ++i) o.push_back(static_cast<SpeciesId>(uniform_index(rng, ns)));
            m.set_reaction(a, b, {out(o)});
        }
        DensityVector d(ns);
        for (auto& x : d) x = Rational(static_cast<long>(uniform_index(rng, 10)), 10);
        const auto base = persistence_classify(m, d);
        for (std::size_t x = 0; x < ns; ++x) {
            if (!base.persistent(static_cast<SpeciesId>(x))) continue;
            DensityVector more = d;
            more[x] += Rational(static_cast<long>(1 + uniform_index(rng, 5)), 10);
            EXPECT_TRUE(persistence_classify(m, more).persistent(static_cast<SpeciesId>(x)));
            ++checked;
        }
    }
    EXPECT_GT(checked, 20);
}

TEST(Persistence, CacheMatchesDirect) {
    ModelSpec m = make_two_type_annihilation(0.5);
    const auto d = dens({"0.6", "0.4"});
    const auto a = persistence_classify(m, d);
    const auto b = persistence_classify(m, d);
    const auto c = persistence_classify_with<Rational>(m, d);
    EXPECT_EQ(a.types[0].min_density, c.types[0].min_density);
    EXPECT_EQ(b.types[0].min_density, c.types[0].min_density);
    // a copy that changes its table must not see the original's cache
    ModelSpec copy = m;
    copy.set_reaction(0, 1, {out({0})});
    EXPECT_EQ(persistence_classify(copy, d).types[0].min_density, Rational(3, 5));
    EXPECT_EQ(persistence_classify(m, d).types[0].min_density, Rational(1, 5));
    EXPECT_THROW(persistence_classify(m, dens({"1"})), Error);
    EXPECT_THROW(persistence_classify(m, dens({"-1", "1"})), Error);
}

TEST(ModelIo, RoundTripAndDensities) {
    const std::string text = R"({
      "species": [{"name": "A", "speed": "1/2", "energy": 1},
                  {"name": "b", "speed": 0.5, "energy": "3/2"}],
      "reactions": [{"in": ["A", "b"], "out": [{"set": [], "p": "1/3"}, {"set": ["A"], "p": "2/3"}]}]
    })";
    std::istringstream is(text);
    const ModelSpec m = load_model(is);
    EXPECT_EQ(m.num_species(), 2u);
    EXPECT_EQ(m.species(1).energy, Rational(3, 2));
    EXPECT_EQ(m.outcomes(0, 1).size(), 2u);
    EXPECT_EQ(m.variants().size(), 2u);
    const ModelSpec again = model_from_json(model_to_json(m));
    EXPECT_EQ(model_to_json(again), model_to_json(m));
    const auto d = parse_densities(m, "A=0.55,b=9/20");
    EXPECT_EQ(d[0], Rational(11, 20));
    EXPECT_EQ(d[1], Rational(9, 20));
    EXPECT_EQ(parse_densities(m, "b=1")[0], Rational(0));
    EXPECT_THROW(parse_densities(m, "C=1"), Error);
    EXPECT_THROW(parse_densities(m, "A"), Error);
    std::istringstream bad(R"({"species": [{"name": "A", "speed": 0.4}]})");
    EXPECT_THROW(load_model(bad), Error);
    std::istringstream junk("{not json");
    EXPECT_THROW(load_model(junk), Error);
}

TEST(Rationals, Parse) {
    EXPECT_EQ(parse_rational("7"), Rational(7));
    EXPECT_EQ(parse_rational("-3/4"), Rational(-3, 4));
    EXPECT_EQ(parse_rational("0.55"), Rational(11, 20));
    EXPECT_EQ(parse_rational("1.5e-3"), Rational(3, 2000));
    EXPECT_EQ(rational_from_double(0.55), Rational(11, 20));
    EXPECT_THROW(parse_rational("1/0"), Error);
    EXPECT_THROW(parse_rational("abc"), Error);
}
