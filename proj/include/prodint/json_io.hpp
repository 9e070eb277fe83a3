#pragma once

// JSON wire formats: algebra elements as {"kind","n","data"}, well-ordered
// sets as {"type",...}, families and step mappings either by a catalog
// generator name or by explicit per-index values, and result objects.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "algebra.hpp"
#include "catalog.hpp"
#include "family.hpp"
#include "ordinal.hpp"
#include "stepmap.hpp"
#include "transfinite.hpp"

namespace prodint {

using nlohmann::json;

inline json toJson(const Element& x) {
    json j;
    switch (x.kind()) {
    case Kind::Scalar: j["kind"] = "scalar"; break;
    case Kind::Matrix: j["kind"] = "matrix"; break;
    case Kind::Diag:   j["kind"] = "diag"; break;
    }
    j["n"] = x.dim();
    j["data"] = x.data();
    return j;
}

inline Element elementFromJson(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const int n = j.value("n", 1);
    std::vector<double> data = j.at("data").get<std::vector<double>>();
    if (kind == "scalar") return Element::scalar(data.at(0));
    if (kind == "matrix") return Element::matrix(n, std::move(data));
    if (kind == "diag") return Element::diag(n, std::move(data));
    throw std::invalid_argument("json: unknown element kind " + kind);
}

inline json toJson(const WellOrderedSet& s) {
    json j;
    switch (s.type()) {
    case SetType::Finite:
        j["type"] = "finite";
        j["points"] = s.finitePoints();
        break;
    case SetType::Ladder:
        j["type"] = "ladder";
        j["a"] = s.lo();
        j["b"] = s.hi();
        break;
    case SetType::Tower:
        j["type"] = "tower";
        j["m"] = s.depth();
        j["a"] = s.lo();
        j["b"] = s.hi();
        break;
    }
    return j;
}

inline WellOrderedSet setFromJson(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "finite") return WellOrderedSet::finite(j.at("points").get<std::vector<double>>());
    if (type == "ladder") return WellOrderedSet::ladder(j.at("a").get<double>(), j.at("b").get<double>());
    if (type == "tower")
        return WellOrderedSet::tower(j.at("m").get<int>(), j.at("a").get<double>(),
                                     j.at("b").get<double>());
    throw std::invalid_argument("json: unknown set type " + type);
}

inline json toJson(const TransfiniteResult& r) {
    json j;
    j["value"] = toJson(r.value);
    j["achieved_tol"] = r.achievedTol;
    j["terms_used"] = r.termsUsed;
    j["truncated"] = r.truncated;
    j["limit_points_visited"] = r.limitPointsVisited;
    if (!r.divergence.empty()) j["divergence"] = r.divergence;
    return j;
}

inline json toJson(const SummabilityVerdict& v) {
    json j;
    j["verdict"] = verdictName(v.verdict);
    if (!v.witness.empty()) j["witness"] = v.witness;
    if (v.verdict == Verdict::Convergent) j["sum"] = v.sumValue;
    return j;
}

namespace detail {

/// A family from an inline per-index value table (finite sets) with an
/// optional default element.
inline Family familyFromValues(const WellOrderedSet& set, const json& spec) {
    struct Entry {
        std::vector<std::uint64_t> coords;
        bool top;
    };
    auto keyOf = [](const OrdinalIndex& idx) {
        std::string k = idx.top ? "T" : "";
        for (auto c : idx.coords) k += std::to_string(c) + ",";
        return k;
    };
    std::map<std::string, Element> table;
    Kind kind = Kind::Scalar;
    int dim = 1;
    for (const auto& row : spec.at("values")) {
        OrdinalIndex idx;
        if (row.contains("top") && row.at("top").get<bool>()) {
            idx = OrdinalIndex::topIndex();
        } else {
            idx = OrdinalIndex::of(row.at("idx").get<std::vector<std::uint64_t>>());
        }
        Element e = elementFromJson(row.at("elem"));
        kind = e.kind();
        dim = e.dim();
        table.emplace(keyOf(idx), std::move(e));
    }
    Element dflt = spec.contains("default") ? elementFromJson(spec.at("default"))
                                            : Element::zero(kind, dim);
    Family f;
    f.set = set;
    f.kind = kind;
    f.dim = dim;
    f.gen = [table, dflt, keyOf](const OrdinalIndex& idx) {
        auto it = table.find(keyOf(idx));
        return it == table.end() ? dflt : it->second;
    };
    return f;
}

}  // namespace detail

/// Families arrive either as {"generator": {"name": ..., "params": ...}}
/// with a catalog name, or as {"set": ..., "values": [...]} tables.
inline Family familyFromJson(const json& j) {
    if (j.contains("generator")) {
        const json& g = j.at("generator");
        const std::string name = g.at("name").get<std::string>();
        const json params = g.value("params", json::object());
        if (name == "ex201") return ex201Family(params.value("z", 1.0));
        if (name == "ex301") return ex301(params.value("z", 1.0)).gapWeightedFamily();
        if (name == "ex302") return ex302(params.value("z", 1.0)).gapWeightedFamily();
        if (name == "zero" || name == "constant") {
            WellOrderedSet set = j.contains("set") ? setFromJson(j.at("set"))
                                                   : WellOrderedSet::ladder(0.0, 1.0);
            const double c = name == "zero" ? 0.0 : params.value("c", 1.0);
            return scalarFamily(set, [c](const OrdinalIndex& idx) { return idx.top ? 0.0 : c; });
        }
        if (name == "geometric") {
            WellOrderedSet set = j.contains("set") ? setFromJson(j.at("set"))
                                                   : WellOrderedSet::ladder(0.0, 1.0);
            const double ratio = params.value("ratio", 0.5);
            const double coeff = params.value("coeff", 1.0);
            return scalarFamily(set, [ratio, coeff](const OrdinalIndex& idx) {
                if (idx.top) return 0.0;
                double e = 0.0;
                for (auto c : idx.coords) e += static_cast<double>(c);
                return coeff * std::pow(ratio, e);
            });
        }
        throw UnknownName(name);
    }
    WellOrderedSet set = setFromJson(j.at("set"));
    return detail::familyFromValues(set, j);
}

/// Step mappings arrive the same way; generator names refer to the catalog.
inline StepMapping stepMappingFromJson(const json& j) {
    if (j.contains("generator")) {
        const json& g = j.at("generator");
        const std::string name = g.at("name").get<std::string>();
        const json params = g.value("params", json::object());
        if (name == "ex301") return ex301(params.value("z", 1.0));
        if (name == "ex302") return ex302(params.value("z", 1.0));
        if (name == "ex32")
            return ex32(params.value("q", 1.0), params.value("C", 1.0), params.value("a", 0.0),
                        params.value("b", 1.0));
        if (name == "ex33") return ex33(params.value("a", 0.0), params.value("b", 1.0));
        if (name == "twovalue")
            return twoValueStep(elementFromJson(params.at("za")), elementFromJson(params.at("zb")),
                                params.value("a", 0.0), params.value("b", 1.0));
        throw UnknownName(name);
    }
    WellOrderedSet set = setFromJson(j.at("set"));
    Family f = detail::familyFromValues(set, j);
    StepMapping s;
    s.set = std::move(set);
    s.kind = f.kind;
    s.dim = f.dim;
    s.values = f.gen;
    return s;
}

}  // namespace prodint
