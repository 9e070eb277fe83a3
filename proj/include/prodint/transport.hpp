#pragma once

// Haahti products and parallel translation along projection-valued paths:
// the ordered endpoint-value products A(t_m)...A(t_0), their refinement
// sweeps, orthogonal projection fields of concrete surfaces in R^3, the
// classical ODE oracle T' = (P o l)'(t) T, and the idempotent diagonal path
// whose Haahti product exists while the Stieltjes product integral does not.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "algebra.hpp"
#include "partition.hpp"
#include "stepmap.hpp"
#include "stieltjes.hpp"

namespace prodint {

struct OffSurface : std::invalid_argument {
    OffSurface() : std::invalid_argument("transport: curve point is not on the surface") {}
};

using Vec3 = std::array<double, 3>;

inline double dot3(const Vec3& x, const Vec3& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }
inline double len3(const Vec3& x) { return std::sqrt(dot3(x, x)); }

struct ProjectionPath {
    double a = 0.0, b = 1.0;
    Kind kind = Kind::Matrix;
    int dim = 3;
    std::function<Element(double)> at;
};

struct Surface {
    enum class Type { Sphere, Cylinder, Polyhedron } type = Type::Sphere;
    double radius = 1.0;
    std::vector<Vec3> faceNormals;  // unit normals, polyhedral case

    static Surface sphere(double r) { return Surface{Type::Sphere, r, {}}; }
    static Surface cylinder(double r) { return Surface{Type::Cylinder, r, {}}; }
    static Surface polyhedron(std::vector<Vec3> normals) {
        for (auto& n : normals) {
            const double l = len3(n);
            if (std::abs(l - 1.0) > 1e-12)
                throw std::invalid_argument("transport: face normals must be unit length");
        }
        return Surface{Type::Polyhedron, 0.0, std::move(normals)};
    }

    bool contains(const Vec3& p) const {
        switch (type) {
        case Type::Sphere:   return std::abs(len3(p) - radius) < 1e-9;
        case Type::Cylinder: return std::abs(std::sqrt(p[0] * p[0] + p[1] * p[1]) - radius) < 1e-9;
        case Type::Polyhedron: return true;  // faces carry their own normals
        }
        return false;
    }

    Vec3 normalAt(const Vec3& p) const {
        switch (type) {
        case Type::Sphere: {
            const double l = len3(p);
            return {p[0] / l, p[1] / l, p[2] / l};
        }
        case Type::Cylinder: {
            const double l = std::sqrt(p[0] * p[0] + p[1] * p[1]);
            return {p[0] / l, p[1] / l, 0.0};
        }
        case Type::Polyhedron:
            throw std::invalid_argument("transport: polyhedral normals are per-face");
        }
        throw std::invalid_argument("transport: bad surface");
    }
};

/// Orthogonal projection onto the plane with unit normal n: I - n n^T.
inline Element tangentProjection(const Vec3& n) {
    Element P = Element::identity(Kind::Matrix, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) P.at(i, j) -= n[i] * n[j];
    return P;
}

/// P(t) = I - n(l(t)) n(l(t))^T along a curve on the surface.
inline ProjectionPath projectionField(const Surface& S, std::function<Vec3(double)> curve,
                                      double a = 0.0, double b = 1.0) {
    ProjectionPath P;
    P.a = a;
    P.b = b;
    P.at = [S, curve = std::move(curve)](double t) {
        const Vec3 p = curve(t);
        if (!S.contains(p)) throw OffSurface();
        return tangentProjection(S.normalAt(p));
    };
    return P;
}

/// The Kurzweil-Haahti partition product A(t_m) A(t_{m-1}) ... A(t_0):
/// endpoint values, m+1 factors.
inline Element haahtiProduct(const ProjectionPath& P, const std::vector<double>& points) {
    Element acc = P.at(points[0]);
    Element scratch;
    for (size_t i = 1; i < points.size(); ++i) leftMulInto(acc, P.at(points[i]), scratch);
    return acc;
}

inline Element haahtiProduct(const ProjectionPath& P, const TaggedPartition& D) {
    return haahtiProduct(P, D.points);
}

/// Uniform dyadic sweep of the Haahti products.
inline ConvergenceReport haahtiRefinement(const ProjectionPath& P, double tol, int maxLevels) {
    ConvergenceReport rep;
    rep.tol = tol;
    for (int k = 0; k <= maxLevels; ++k) {
        const std::uint64_t m = std::uint64_t{1} << k;
        std::vector<double> pts;
        pts.reserve(m + 1);
        for (std::uint64_t i = 0; i <= m; ++i)
            pts.push_back(P.a + (P.b - P.a) * static_cast<double>(i) / static_cast<double>(m));
        pts.back() = P.b;
        const Element v = haahtiProduct(P, pts);
        ConvergenceReport::Row row;
        row.m = m;
        row.value = v;
        row.delta = rep.levels.empty() ? 0.0 : dist(v, rep.levels.back().value);
        rep.levels.push_back(std::move(row));
        if (k >= 2 && rep.levels[k].delta < tol && rep.levels[k - 1].delta < tol) {
            rep.converged = true;
            break;
        }
    }
    return rep;
}

/// The refined transport value: the Richardson-extrapolated sweep limit when
/// the deltas halve, the last level otherwise.
inline Element transportLimit(const ConvergenceReport& rep) {
    if (auto e = rep.extrapolated()) return *e;
    return rep.finalValue();
}

/// Finite polyhedral translation T = P_m ... P_0.
inline Element polyhedralTransport(const std::vector<Element>& projections) {
    if (projections.empty()) throw std::invalid_argument("transport: need at least one projection");
    for (const auto& P : projections)
        if (dist(mul(P, P), P) > 1e-12 * std::max(1.0, norm(P) * norm(P))) throw NotIdempotent();
    Element acc = projections.front();
    Element scratch;
    for (size_t i = 1; i < projections.size(); ++i) leftMulInto(acc, projections[i], scratch);
    return acc;
}

/// Classical fourth-order integration of T'(t) = M(t) T(t), T(a) = P(a),
/// where M is the central difference of t -> P(l(t)).
inline Element transportOdeOracle(const ProjectionPath& P, int steps = 4000, double diffStep = 1e-5) {
    auto M = [&](double t) {
        const double lo = std::max(P.a, t - diffStep);
        const double hi = std::min(P.b, t + diffStep);
        return scale(1.0 / (hi - lo), sub(P.at(hi), P.at(lo)));
    };
    Element T = P.at(P.a);
    const double h = (P.b - P.a) / steps;
    for (int i = 0; i < steps; ++i) {
        const double t = P.a + i * h;
        const Element k1 = mul(M(t), T);
        const Element k2 = mul(M(t + 0.5 * h), add(T, scale(0.5 * h, k1)));
        const Element k3 = mul(M(t + 0.5 * h), add(T, scale(0.5 * h, k2)));
        const Element k4 = mul(M(t + h), add(T, scale(h, k3)));
        T = add(T, scale(h / 6.0, add(add(k1, scale(2.0, k2)), add(scale(2.0, k3), k4))));
    }
    return T;
}

/// |<Tu, Tv> - <u, v>| for the refined transport of tangent vectors u, v.
inline double scalarInvarianceCheck(const ProjectionPath& P, const Vec3& u, const Vec3& v,
                                    double tol, int maxLevels = 14) {
    const Element T = transportLimit(haahtiRefinement(P, tol, maxLevels));
    auto apply = [&](const Vec3& w) {
        Vec3 r{0, 0, 0};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r[i] += T.at(i, j) * w[j];
        return r;
    };
    const Vec3 Tu = apply(u), Tv = apply(v);
    return std::abs(dot3(Tu, Tv) - dot3(u, v));
}

struct HaahtiVsStieltjesResult {
    Element haahtiSide;
    Element stieltjesSide;  // ks step product times P(a)
    double distance = 0.0;
};

/// For an idempotent-valued step path with invertible jump factors, the
/// Haahti product equals (prod (I + dA)) A(a).
inline HaahtiVsStieltjesResult haahtiVsStieltjes(const StepMapping& P, double tol,
                                                 std::uint64_t budget = kDefaultBudget) {
    auto prefix = P.set.enumeratePrefix(P.set.hi(), 12);
    auto sample = prefix.indices;
    sample.push_back(OrdinalIndex::topIndex());
    for (const auto& idx : sample) {
        const Element z = P.values(idx);
        if (dist(mul(z, z), z) > 1e-12 * std::max(1.0, norm(z) * norm(z))) throw NotIdempotent();
    }
    HaahtiVsStieltjesResult out;
    ProjectionPath path{P.set.lo(), P.set.hi(), P.kind, P.dim,
                        [P](double t) { return P.evaluate(t); }};
    out.haahtiSide = transportLimit(haahtiRefinement(path, tol, 14));
    const TransfiniteResult ks = ksStepProduct(P, tol, budget);
    if (!ks.divergence.empty()) throw SingularElement();
    out.stieltjesSide = mul(ks.value, P.evaluate(P.set.lo()));
    out.distance = dist(out.haahtiSide, out.stieltjesSide);
    return out;
}

/// The idempotent diagonal path A(t) = e1 + e^{n+2} on (1-2^-n, 1-2^-n-1],
/// e1 at 0 and 1, modeled on a truncated diagonal algebra. Every Haahti
/// partition product collapses to e1 because A(0) = e1 wipes the other
/// coordinates.
inline ProjectionPath ex711Path(int truncation = 16) {
    if (truncation < 4) throw std::invalid_argument("transport: truncation too small for ex711");
    ProjectionPath P;
    P.a = 0.0;
    P.b = 1.0;
    P.kind = Kind::Diag;
    P.dim = truncation;
    P.at = [truncation](double t) {
        Element v = Element::zero(Kind::Diag, truncation);
        v.data()[0] = 1.0;  // e1 everywhere
        if (t > 0.0 && t < 1.0) {
            // the step index n with 1-2^-n < t <= 1-2^-(n+1)
            const int n = static_cast<int>(std::ceil(-std::log2(1.0 - t))) - 1;
            const int slot = n + 1;  // sequence coordinate n+2, zero-based
            if (slot >= truncation)
                throw std::invalid_argument("transport: ex711 truncation too small for this point");
            v.data()[slot] = 1.0;
        }
        return v;
    };
    return P;
}

struct Ex711Witness {
    Element productOne;
    Element productTwo;
    double distance = 0.0;
};

/// Two partitions whose interior points sit in different steps give KS
/// partition products at distance exactly 1.
inline Ex711Witness ex711DivergenceWitness(int truncation = 16) {
    const ProjectionPath P = ex711Path(truncation);
    EvalMapping M{0.0, 1.0, Kind::Diag, truncation, P.at};
    // interior points in steps n = 0,1 versus steps n = 2,3
    const std::vector<double> d1 = {0.0, 1 - std::ldexp(1.0, -1) + 0.1, 1 - std::ldexp(1.0, -2) + 0.05, 1.0};
    const std::vector<double> d2 = {0.0, 1 - std::ldexp(1.0, -3) + 0.03, 1 - std::ldexp(1.0, -4) + 0.01, 1.0};
    Ex711Witness w;
    w.productOne = rsPartitionProduct(M, d1);
    w.productTwo = rsPartitionProduct(M, d2);
    w.distance = dist(w.productOne, w.productTwo);
    return w;
}

}  // namespace prodint
