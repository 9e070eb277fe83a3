#pragma once

#include <functional>
#include <utility>

#include "algebra.hpp"
#include "ordinal.hpp"

namespace prodint {

/// Lazy assignment index -> algebra element over a well-ordered set. The
/// generator must be defined for every member index, the top included (the
/// neutral element there when the mapping has nothing to say at b).
struct Family {
    WellOrderedSet set;
    Kind kind = Kind::Scalar;
    int dim = 1;
    std::function<Element(const OrdinalIndex&)> gen;

    Element operator()(const OrdinalIndex& idx) const { return gen(idx); }
};

inline Family scalarFamily(WellOrderedSet set,
                           std::function<double(const OrdinalIndex&)> f) {
    Family fam;
    fam.set = std::move(set);
    fam.kind = Kind::Scalar;
    fam.dim = 1;
    fam.gen = [f = std::move(f)](const OrdinalIndex& idx) { return Element::scalar(f(idx)); };
    return fam;
}

/// The family of norms of another family, used by the absolute-summability
/// checks.
inline Family normFamily(const Family& f) {
    Family fam;
    fam.set = f.set;
    fam.kind = Kind::Scalar;
    fam.dim = 1;
    fam.gen = [f](const OrdinalIndex& idx) { return Element::scalar(norm(f.gen(idx))); };
    return fam;
}

/// Pointwise transform of a family's values.
inline Family mapFamily(const Family& f, std::function<Element(const Element&)> t,
                        Kind kind, int dim) {
    Family fam;
    fam.set = f.set;
    fam.kind = kind;
    fam.dim = dim;
    fam.gen = [f, t = std::move(t)](const OrdinalIndex& idx) { return t(f.gen(idx)); };
    return fam;
}

}  // namespace prodint
