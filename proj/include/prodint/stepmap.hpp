#pragma once

// Step mappings constant on [alpha, S(alpha)) over a well-ordered set of
// steps, right regulated mappings given by an analytic rule plus a
// right-limit oracle, and the oscillation machinery that approximates a
// right regulated mapping by a step mapping within eps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "algebra.hpp"
#include "family.hpp"
#include "ordinal.hpp"

namespace prodint {

struct StepMapping {
    WellOrderedSet set;
    Kind kind = Kind::Scalar;
    int dim = 1;
    std::function<Element(const OrdinalIndex&)> values;  // z_alpha, top included
    // optional closed form of (S(alpha)-alpha) z_alpha; the generic product
    // of a huge value with a tiny gap overflows where the closed form is tame
    std::function<Element(const OrdinalIndex&)> gapWeighted;
    // optional closed form of z_alpha - z_{predecessor(alpha)} for successor
    // indices; partial-sum valued mappings would otherwise pay O(n) per jump
    std::function<Element(const OrdinalIndex&)> successorJump;

    /// A(t) = z_alpha for t in [alpha, S(alpha)), A(b) = z_b.
    Element evaluate(double t) const { return values(set.locate(t)); }

    Family valueFamily() const {
        Family f;
        f.set = set;
        f.kind = kind;
        f.dim = dim;
        f.gen = values;
        return f;
    }

    /// The family (S(alpha)-alpha) z_alpha with nothing at the top.
    Family gapWeightedFamily() const {
        Family f;
        f.set = set;
        f.kind = kind;
        f.dim = dim;
        if (gapWeighted) {
            f.gen = [kind = kind, dim = dim, gw = gapWeighted](const OrdinalIndex& idx) {
                if (idx.top) return Element::zero(kind, dim);
                return gw(idx);
            };
        } else {
            f.gen = [set = set, values = values, kind = kind, dim = dim](const OrdinalIndex& idx) {
                if (idx.top) return Element::zero(kind, dim);
                return scale(set.gap(idx), values(idx));
            };
        }
        return f;
    }
};

struct RegulatedSample {
    double a = 0.0, b = 1.0;
    Kind kind = Kind::Scalar;
    int dim = 1;
    std::function<Element(double)> eval;
    std::function<Element(double)> rightLimit;  // A(t+), defined on [a,b)
};

/// Uniform evaluation surface for the product-integral routines.
struct EvalMapping {
    double a = 0.0, b = 1.0;
    Kind kind = Kind::Scalar;
    int dim = 1;
    std::function<Element(double)> at;

    static EvalMapping of(const StepMapping& s) {
        return {s.set.lo(), s.set.hi(), s.kind, s.dim,
                [s](double t) { return s.evaluate(t); }};
    }
    static EvalMapping of(const RegulatedSample& r) { return {r.a, r.b, r.kind, r.dim, r.eval}; }
};

struct EpsilonPartition {
    double eps = 0.0;
    std::vector<double> points;
    bool exhausted = false;
};

namespace detail {

// Oscillation sup of A over the open interval (x, y), estimated on a grid.
// Scalars use max-min exactly on the samples; other kinds compare each
// sample against a spread of anchors.
inline double oscillationOnGrid(const std::function<Element(double)>& at, Kind kind, double x,
                                double y, int grid) {
    if (!(y > x) || grid < 2) return 0.0;
    const double h = (y - x) / (grid + 1);
    if (kind == Kind::Scalar) {
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (int i = 1; i <= grid; ++i) {
            const double v = at(x + i * h).data()[0];
            if (first) { lo = hi = v; first = false; }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return hi - lo;
    }
    std::vector<Element> samples;
    samples.reserve(grid);
    for (int i = 1; i <= grid; ++i) samples.push_back(at(x + i * h));
    const int anchorStride = std::max(1, grid / 48);
    double osc = 0.0;
    for (size_t i = 0; i < samples.size(); i += anchorStride)
        for (const auto& s : samples) osc = std::max(osc, dist(samples[i], s));
    return osc;
}

}  // namespace detail

/// G_eps(x) = sup of y in (x, b] with oscillation of A over (x, y) at most
/// eps, approximated by bisection on y. Grid samples underestimate the sup,
/// so the result is pulled back by one grid cell; G_eps(b) = b.
inline double gEpsilon(const RegulatedSample& A, double x, double eps, int grid = 4096) {
    if (x >= A.b) return A.b;
    if (detail::oscillationOnGrid(A.eval, A.kind, x, A.b, grid) <= eps) return A.b;
    double lo = x, hi = A.b;
    for (int it = 0; it < 48 && hi - lo > 1e-15 * (A.b - A.a); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (detail::oscillationOnGrid(A.eval, A.kind, x, mid, grid) <= eps)
            lo = mid;
        else
            hi = mid;
    }
    const double cell = (lo - x) / (grid + 1);
    return std::max(x + 1e-15 * (A.b - A.a), lo - cell);
}

/// Exact variant for step mappings: oscillation over an open (x,y) is a
/// finite comparison of the step values visible there, so G_eps lands
/// exactly on the first step start that breaks the bound. A successor walk
/// cannot pass a limit element; when it is capped the result is a
/// conservative lower bound of the sup.
inline double gEpsilon(const StepMapping& A, double x, double eps, std::uint64_t walkCap = 20000) {
    const double b = A.set.hi();
    if (x >= b) return b;
    OrdinalIndex idx = A.set.locate(x);
    if (idx.top) return b;
    std::vector<Element> seen{A.values(idx)};
    double osc = 0.0;
    for (std::uint64_t steps = 0; steps < walkCap; ++steps) {
        OrdinalIndex next = A.set.successor(idx);
        if (next.top) return b;  // no interior steps remain; z_b is not interior to (x, b]
        const double start = A.set.value(next);
        if (start >= b) return b;
        if (start <= A.set.value(idx)) return start;  // encoding resolution exhausted
        const Element z = A.values(next);
        for (const auto& s : seen) osc = std::max(osc, dist(s, z));
        if (osc > eps) return start;  // y may reach this step's start but not beyond
        seen.push_back(z);
        idx = next;
    }
    return A.set.value(idx);
}

/// Realize a finite prefix of Lambda_eps: a is the first point and each next
/// point is G_eps of the previous one, until b is reached or the budget or
/// the arithmetic gives out.
inline EpsilonPartition buildLambdaEps(const RegulatedSample& A, double eps, std::uint64_t budget,
                                       int grid = 4096) {
    EpsilonPartition out;
    out.eps = eps;
    double g = A.a;
    out.points.push_back(g);
    while (g < A.b) {
        if (out.points.size() >= budget) { out.exhausted = true; break; }
        double next = gEpsilon(A, g, eps, grid);
        if (!(next > g)) {
            // theory guarantees strict progress; the sampled sup can stall
            next = g + 1e-12 * (A.b - A.a);
            out.exhausted = true;
            if (next >= A.b) break;
            out.points.push_back(next);
            g = next;
            continue;
        }
        if (next >= A.b) break;
        out.points.push_back(next);
        g = next;
    }
    return out;
}

/// Step approximation A_eps on the realized Lambda_eps prefix with values
/// A(beta+) and top value A(b).
inline StepMapping approximateByStep(const RegulatedSample& A, double eps, std::uint64_t budget,
                                     int grid = 4096) {
    EpsilonPartition lam = buildLambdaEps(A, eps, budget, grid);
    std::vector<double> pts = lam.points;
    if (pts.empty() || pts.front() != A.a) pts.insert(pts.begin(), A.a);
    pts.push_back(A.b);
    std::vector<Element> vals;
    vals.reserve(pts.size());
    for (size_t i = 0; i + 1 < pts.size(); ++i) vals.push_back(A.rightLimit(pts[i]));
    vals.push_back(A.eval(A.b));
    StepMapping s;
    s.set = WellOrderedSet::finite(pts);
    s.kind = A.kind;
    s.dim = A.dim;
    s.values = [vals = std::move(vals)](const OrdinalIndex& idx) {
        return idx.top ? vals.back() : vals[idx.coords[0]];
    };
    return s;
}

}  // namespace prodint
