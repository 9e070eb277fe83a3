#pragma once

// Named mappings used across the examples and the CLI: the alternating
// double family on the depth-1 tower, its gap-unweighted step mappings, the
// two geometric-ladder step mappings built from partial sums, the rationally
// discontinuous bounded mapping, and sqrt(t) cos(pi/t).

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "family.hpp"
#include "ordinal.hpp"
#include "series_tools.hpp"
#include "stepmap.hpp"

namespace prodint {

struct UnknownName : std::invalid_argument {
    explicit UnknownName(const std::string& n) : std::invalid_argument("catalog: unknown name " + n) {}
};
struct BadParams : std::invalid_argument {
    explicit BadParams(const std::string& m) : std::invalid_argument("catalog: " + m) {}
};

namespace detail {

/// Numeric limit of sum_{k>=1} term(k) via the tail tracker; terms must
/// decay monotonically or alternate.
inline double seriesLimit(const std::function<double(std::uint64_t)>& term, double tol,
                          std::uint64_t cap = 4000000) {
    TailTracker tracker(1);
    double acc = 0.0;
    std::uint64_t nextTry = 24;
    for (std::uint64_t k = 1; k <= cap; ++k) {
        const double t = term(k);
        acc += t;
        tracker.push(&acc, 1, std::abs(t));
        if (tracker.count() >= 8) {
            if (tracker.count() % 4 == 0 && tracker.settled(tol * 0.25)) return acc;
            if (tracker.count() >= nextTry) {
                nextTry = std::max(tracker.count() + 8, tracker.nextSnapshotAt());
                if (auto est = tracker.tryLimit(tol * 0.5)) return est->value[0];
            }
        }
    }
    return acc;
}

/// Ladder step mapping whose values are the partial sums of a term series,
/// with memoized prefix sums so deep walks stay linear.
inline StepMapping partialSumLadder(std::function<double(std::uint64_t)> term, double zb, double a,
                                    double b) {
    struct Cache {
        std::mutex m;
        std::vector<double> partial{0.0};  // partial[n] = sum_{k<=n} term(k)
    };
    auto cache = std::make_shared<Cache>();
    auto partialAt = [cache, term](std::uint64_t n) {
        std::lock_guard<std::mutex> lock(cache->m);
        while (cache->partial.size() <= n)
            cache->partial.push_back(cache->partial.back() +
                                     term(static_cast<std::uint64_t>(cache->partial.size())));
        return cache->partial[n];
    };
    StepMapping s;
    s.set = WellOrderedSet::ladder(a, b);
    s.kind = Kind::Scalar;
    s.dim = 1;
    s.values = [partialAt, zb](const OrdinalIndex& idx) {
        if (idx.top) return Element::scalar(zb);
        return Element::scalar(partialAt(idx.coords[0]));
    };
    s.successorJump = [term](const OrdinalIndex& idx) {
        return Element::scalar(term(idx.coords[0]));  // z(n) - z(n-1) = term(n)
    };
    return s;
}

}  // namespace detail

/// Example family on the depth-1 tower over [0,1]:
/// x(n0,n1) = (-1)^{n0+n1} / ((n0+1)(n1+1)) * z, nothing at the top.
inline Family ex201Family(double z = 1.0) {
    return scalarFamily(WellOrderedSet::tower(1, 0.0, 1.0), [z](const OrdinalIndex& idx) {
        if (idx.top) return 0.0;
        const double n0 = static_cast<double>(idx.coords[0]);
        const double n1 = static_cast<double>(idx.coords[1]);
        const double sign = (idx.coords[0] + idx.coords[1]) % 2 == 0 ? 1.0 : -1.0;
        return sign * z / ((n0 + 1.0) * (n1 + 1.0));
    });
}

/// Step mapping with z(n0,n1) = (-2)^{n0+n1+2} / ((n0+1)(n1+1)) * z and
/// z_1 = 0; its gap-weighted family is ex201.
inline StepMapping ex301(double z = 1.0) {
    StepMapping s;
    s.set = WellOrderedSet::tower(1, 0.0, 1.0);
    s.kind = Kind::Scalar;
    s.dim = 1;
    s.values = [z](const OrdinalIndex& idx) {
        if (idx.top) return Element::scalar(0.0);
        const double n0 = static_cast<double>(idx.coords[0]);
        const double n1 = static_cast<double>(idx.coords[1]);
        const double sign = (idx.coords[0] + idx.coords[1]) % 2 == 0 ? 1.0 : -1.0;
        return Element::scalar(sign * z * std::ldexp(1.0, static_cast<int>(idx.coords[0] + idx.coords[1]) + 2) /
                               ((n0 + 1.0) * (n1 + 1.0)));
    };
    s.gapWeighted = [z](const OrdinalIndex& idx) {
        const double n0 = static_cast<double>(idx.coords[0]);
        const double n1 = static_cast<double>(idx.coords[1]);
        const double sign = (idx.coords[0] + idx.coords[1]) % 2 == 0 ? 1.0 : -1.0;
        return Element::scalar(sign * z / ((n0 + 1.0) * (n1 + 1.0)));
    };
    return s;
}

/// Step mapping with z(n0,n1) = 2^{n0+n1+2} / ((n0+1)^2 (n1+1)^2) * z; its
/// gap-weighted family is absolutely summable with sum (pi^2/6)^2 z.
inline StepMapping ex302(double z = 1.0) {
    StepMapping s;
    s.set = WellOrderedSet::tower(1, 0.0, 1.0);
    s.kind = Kind::Scalar;
    s.dim = 1;
    s.values = [z](const OrdinalIndex& idx) {
        if (idx.top) return Element::scalar(0.0);
        const double n0 = static_cast<double>(idx.coords[0]);
        const double n1 = static_cast<double>(idx.coords[1]);
        return Element::scalar(z * std::ldexp(1.0, static_cast<int>(idx.coords[0] + idx.coords[1]) + 2) /
                               ((n0 + 1.0) * (n0 + 1.0) * (n1 + 1.0) * (n1 + 1.0)));
    };
    s.gapWeighted = [z](const OrdinalIndex& idx) {
        const double n0 = static_cast<double>(idx.coords[0]);
        const double n1 = static_cast<double>(idx.coords[1]);
        return Element::scalar(z / ((n0 + 1.0) * (n0 + 1.0) * (n1 + 1.0) * (n1 + 1.0)));
    };
    return s;
}

/// Ladder step mapping whose values are the partial sums
/// z(n) = sum_{k=1}^{n} (-1)^{k+1} / (C (k + (-1)^{k+1}/2)^{1/q} + (-1)^k/2),
/// empty sum at n = 0; the top value is the limit of the series.
inline StepMapping ex32(double q = 1.0, double C = 1.0, double a = 0.0, double b = 1.0) {
    if (!(q > 0.0 && q < 2.0)) throw BadParams("ex32 needs q in (0,2)");
    if (!(C > 0.5 * std::pow(2.0 / 3.0, 1.0 / q))) throw BadParams("ex32 needs C > (1/2)(2/3)^{1/q}");
    auto term = [q, C](std::uint64_t k) {
        const double sk = k % 2 == 1 ? 1.0 : -1.0;  // (-1)^{k+1}
        return sk / (C * std::pow(static_cast<double>(k) + sk * 0.5, 1.0 / q) - sk * 0.5);
    };
    const double zb = detail::seriesLimit(term, 1e-13);
    return detail::partialSumLadder(term, zb, a, b);
}

/// Ladder step mapping with partial sums of sum (-1)^{k+1}/(sqrt(k+1) log(k+1)).
inline StepMapping ex33(double a = 0.0, double b = 1.0) {
    auto term = [](std::uint64_t k) {
        const double sk = k % 2 == 1 ? 1.0 : -1.0;
        const double kk = static_cast<double>(k) + 1.0;
        return sk / (std::sqrt(kk) * std::log(kk));
    };
    const double zb = detail::seriesLimit(term, 1e-13);
    return detail::partialSumLadder(term, zb, a, b);
}

/// Bounded right regulated mapping discontinuous at every rational: the
/// series with terms (1/n^2)(2 u cos(pi/(2u)) + (pi/2) sin(pi/(2u))) at
/// u = nt - ceil(nt), truncated at m terms; the value is I at points where
/// some nt with n <= m is an exact integer.
inline RegulatedSample ex401(int m = 200) {
    if (m < 1) throw BadParams("ex401 needs at least one series term");
    auto evalAt = [m](double t) {
        double acc = 0.0;
        for (int n = 1; n <= m; ++n) {
            const double u = n * t - std::ceil(n * t);
            if (u == 0.0) return 1.0;  // rational point of the truncated rule
            const double w = M_PI / (2.0 * u);
            acc += (2.0 * u * std::cos(w) + 0.5 * M_PI * std::sin(w)) / (static_cast<double>(n) * n);
        }
        return acc;
    };
    RegulatedSample r;
    r.a = 0.0;
    r.b = 1.0;
    r.kind = Kind::Scalar;
    r.dim = 1;
    r.eval = [evalAt](double t) { return Element::scalar(evalAt(t)); };
    r.rightLimit = [evalAt](double t) {
        // sample t + 2^{-k} until three probes agree; the right limit exists
        double prev = evalAt(t + std::ldexp(1.0, -18));
        double prev2 = prev + 1.0;
        for (int k = 19; k <= 46; ++k) {
            const double v = evalAt(t + std::ldexp(1.0, -k));
            if (std::abs(v - prev) < 1e-9 && std::abs(v - prev2) < 1e-8)
                return Element::scalar(v);
            prev2 = prev;
            prev = v;
        }
        return Element::scalar(prev);
    };
    return r;
}

/// F(t) = sqrt(t) cos(pi/t) on (0,1], F(0) = 0; continuous on [0,1].
inline RegulatedSample sqrtCos() {
    auto f = [](double t) { return t == 0.0 ? 0.0 : std::sqrt(t) * std::cos(M_PI / t); };
    RegulatedSample r;
    r.a = 0.0;
    r.b = 1.0;
    r.kind = Kind::Scalar;
    r.dim = 1;
    r.eval = [f](double t) { return Element::scalar(f(t)); };
    r.rightLimit = r.eval;  // continuous
    return r;
}

/// A(t) = t * I.
inline RegulatedSample linearMapping(Kind kind = Kind::Scalar, int dim = 1, double a = 0.0,
                                     double b = 1.0) {
    RegulatedSample r;
    r.a = a;
    r.b = b;
    r.kind = kind;
    r.dim = dim;
    r.eval = [kind, dim](double t) { return scale(t, Element::identity(kind, dim)); };
    r.rightLimit = r.eval;
    return r;
}

inline RegulatedSample constantMapping(const Element& c, double a = 0.0, double b = 1.0) {
    RegulatedSample r;
    r.a = a;
    r.b = b;
    r.kind = c.kind();
    r.dim = c.dim();
    r.eval = [c](double) { return c; };
    r.rightLimit = r.eval;
    return r;
}

/// A two-step mapping: z_a on [a, b) and z_b at b.
inline StepMapping twoValueStep(const Element& za, const Element& zb, double a = 0.0, double b = 1.0) {
    StepMapping s;
    s.set = WellOrderedSet::finite({a, b});
    s.kind = za.kind();
    s.dim = za.dim();
    s.values = [za, zb](const OrdinalIndex& idx) { return idx.top ? zb : za; };
    return s;
}

struct CatalogEntry {
    std::string name;
    std::string summary;
    std::string closedForm;
};

inline const std::vector<CatalogEntry>& catalogEntries() {
    static const std::vector<CatalogEntry> entries = {
        {"ex201", "alternating double family on the depth-1 tower", "(log 2)^2"},
        {"ex301", "step mapping whose gap-weighted family is ex201", "exp((log 2)^2)"},
        {"ex302", "absolutely summable tower step mapping", "exp((pi^2/6)^2)"},
        {"ex32", "ladder partial sums with pairwise cancelling jump factors", "I"},
        {"ex33", "ladder partial sums of (-1)^{k+1}/(sqrt(k+1) log(k+1))",
         "prod_{n>=2} (1+(-1)^n/(sqrt(n) log n))"},
        {"ex401", "bounded right regulated, discontinuous at every rational", "Riemann integrable"},
        {"sqrtcos", "sqrt(t) cos(pi/t)", "exp(-1)"},
        {"ex711", "idempotent diagonal path with Haahti product e1", "e1"},
        {"linear", "A(t) = t I", "exp((b^2-a^2)/2)"},
        {"constant", "A(t) = c", "exp(c (b-a))"},
    };
    return entries;
}

}  // namespace prodint
