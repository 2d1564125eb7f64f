#pragma once

// JSON model files:
//   { "species":   [{"name": "A", "speed": 0.5, "energy": 1}, ...],
//     "reactions": [{"in": ["A", "B"], "out": [{"set": [], "p": "1/2"}, ...]}, ...] }
// Numeric fields accept JSON numbers or rational strings ("11/20", "0.55").

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plab/error.hpp"
#include "plab/rational.hpp"
#include "plab/reaction_model.hpp"

namespace plab {

namespace detail {

inline Rational json_rational(const nlohmann::json& j, const char* what) {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_number()) return rational_from_double(j.get<double>());
    throw Error(std::string("model file: field '") + what + "' must be a number or rational string");
}

inline nlohmann::json rational_json(const Rational& r) {
    if (denominator(r) == 1 && abs(numerator(r)) < BigInt(1LL << 53)) return numerator(r).convert_to<long long>();
    return to_string(r);
}

}  // namespace detail

inline ModelSpec model_from_json(const nlohmann::json& j) {
    if (!j.contains("species") || !j["species"].is_array()) throw Error("model file: missing 'species' array");
    ModelSpec m;
    for (const auto& s : j["species"]) {
        Species sp;
        sp.name = s.at("name").get<std::string>();
        if (m.find(sp.name)) throw Error("model file: duplicate species '" + sp.name + "'");
        sp.speed = to_double(detail::json_rational(s.at("speed"), "speed"));
        sp.energy = s.contains("energy") ? detail::json_rational(s["energy"], "energy") : Rational(1);
        m.add_species(std::move(sp));
    }
    if (j.contains("reactions")) {
        for (const auto& r : j["reactions"]) {
            const auto in = r.at("in").get<std::vector<std::string>>();
            if (in.size() != 2) throw Error("model file: reactions take exactly two inputs");
            std::vector<Outcome> outcomes;
            for (const auto& o : r.at("out")) {
                Outcome out;
                for (const auto& name : o.at("set").get<std::vector<std::string>>()) out.output.push_back(m.id(name));
                out.probability = o.contains("p") ? detail::json_rational(o["p"], "p") : Rational(1);
                out.p = to_double(out.probability);
                outcomes.push_back(std::move(out));
            }
            m.set_reaction(m.id(in[0]), m.id(in[1]), std::move(outcomes));
        }
    }
    m.validate_parameters();
    return m;
}

inline ModelSpec load_model(std::istream& is) {
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("model file: ") + e.what());
    }
    try {
        return model_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("model file: ") + e.what());
    }
}

inline nlohmann::json model_to_json(const ModelSpec& m) {
    nlohmann::json j;
    j["species"] = nlohmann::json::array();
    for (const auto& s : m.species())
        j["species"].push_back({{"name", s.name}, {"speed", s.speed}, {"energy", detail::rational_json(s.energy)}});
    j["reactions"] = nlohmann::json::array();
    const auto n = static_cast<SpeciesId>(m.num_species());
    for (SpeciesId a = 0; a < n; ++a) {
        for (SpeciesId b = a; b < n; ++b) {
            if (!m.has_effective(a, b)) continue;
            nlohmann::json r;
            r["in"] = {m.species(a).name, m.species(b).name};
            r["out"] = nlohmann::json::array();
            for (const auto& o : m.outcomes(a, b)) {
                std::vector<std::string> names;
                for (SpeciesId s : o.output) names.push_back(m.species(s).name);
                r["out"].push_back({{"set", names}, {"p", detail::rational_json(o.probability)}});
            }
            j["reactions"].push_back(std::move(r));
        }
    }
    return j;
}

// "A=0.55,B=0.45"; unnamed species default to density 0.
inline DensityVector parse_densities(const ModelSpec& m, const std::string& text) {
    DensityVector d(m.num_species(), Rational(0));
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error("densities: expected NAME=VALUE, got '" + item + "'");
        d[m.id(item.substr(0, eq))] = parse_rational(item.substr(eq + 1));
        pos = comma + 1;
    }
    return d;
}

}  // namespace plab
