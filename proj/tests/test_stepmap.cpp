#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <prodint/catalog.hpp>
#include <prodint/stepmap.hpp>

using namespace prodint;

TEST_CASE("step evaluation locates the right step", "[stepmap]") {
    const StepMapping A = ex301();
    CHECK(A.evaluate(0.0).data()[0] == 4.0);  // z at (0,0) is (-2)^2 z = 4z
    CHECK(A.evaluate(1.0).data()[0] == 0.0);  // z_b = 0

    const StepMapping B = ex32(1.0, 1.0);
    // midpoint of [alpha(2), alpha(3)) carries z(2)
    const double mid = 0.5 * (B.set.value(OrdinalIndex::of({2})) + B.set.value(OrdinalIndex::of({3})));
    CHECK(B.evaluate(mid).data()[0] == B.values(OrdinalIndex::of({2})).data()[0]);
    // z(2) = 1 - 1/2 for q = C = 1
    CHECK(std::abs(B.evaluate(mid).data()[0] - 0.5) < 1e-15);
}

TEST_CASE("step mappings are right-continuous", "[stepmap]") {
    const StepMapping A = ex301();
    std::mt19937 rng(8080);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double t = u(rng);
        const Element at = A.evaluate(t);
        const OrdinalIndex idx = A.set.locate(t);
        const double stepEnd = A.set.value(A.set.successor(idx));
        for (int k = 20; k <= 40; ++k) {
            const double h = std::ldexp(1.0, -k);
            if (t + h < stepEnd) {
                CHECK(dist(A.evaluate(t + h), at) == 0.0);
                break;
            }
        }
    }
}

TEST_CASE("catalog formulas", "[stepmap]") {
    // gap-weighted ex301 values recover the alternating double family
    const StepMapping A = ex301();
    const Family gw = A.gapWeightedFamily();
    for (std::uint64_t n0 = 0; n0 < 5; ++n0)
        for (std::uint64_t n1 = 0; n1 < 5; ++n1) {
            const double want = ((n0 + n1) % 2 == 0 ? 1.0 : -1.0) /
                                ((static_cast<double>(n0) + 1) * (static_cast<double>(n1) + 1));
            CHECK(std::abs(gw.gen(OrdinalIndex::of({n0, n1})).data()[0] - want) < 1e-15);
        }
    // the closed form and the generic gap product agree where both are finite
    for (std::uint64_t n0 = 0; n0 < 4; ++n0)
        for (std::uint64_t n1 = 0; n1 < 4; ++n1) {
            const OrdinalIndex idx = OrdinalIndex::of({n0, n1});
            CHECK(std::abs(gw.gen(idx).data()[0] -
                           A.set.gap(idx) * A.values(idx).data()[0]) < 1e-13);
        }

    CHECK(ex33().values(OrdinalIndex::of({0})).data()[0] == 0.0);  // empty sum
    CHECK(std::abs(sqrtCos().eval(1.0).data()[0] - (-1.0)) < 1e-15);
    CHECK(sqrtCos().eval(0.0).data()[0] == 0.0);

    CHECK_THROWS_AS(ex32(2.5, 1.0), BadParams);
    CHECK_THROWS_AS(ex32(1.0, 0.1), BadParams);
}

TEST_CASE("ex401 is bounded and right regulated", "[stepmap]") {
    const RegulatedSample A = ex401(60);
    const double bound = (2.0 + M_PI / 2.0) * M_PI * M_PI / 6.0;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 300; ++i) CHECK(std::abs(A.eval(u(rng)).data()[0]) <= bound + 1.0);
    // right limits settle, also at a rational discontinuity
    const Element r = A.rightLimit(0.5);
    const Element probe = A.eval(0.5 + std::ldexp(1.0, -40));
    CHECK(dist(r, probe) < 1e-6);
}

TEST_CASE("g_epsilon respects a Lipschitz modulus", "[stepmap]") {
    const RegulatedSample lin = linearMapping();  // |A(s)-A(t)| = |s-t|
    const double g = gEpsilon(lin, 0.2, 0.25, 512);
    CHECK(g >= std::min(1.0, 0.2 + 0.25) - 0.01);
    CHECK(g <= 0.2 + 0.25 + 0.01);
}

TEST_CASE("g_epsilon on step mappings is a finite comparison", "[stepmap]") {
    StepMapping s;
    s.set = WellOrderedSet::finite({0.0, 0.5, 1.0});
    s.kind = Kind::Scalar;
    s.dim = 1;
    s.values = [](const OrdinalIndex& idx) {
        if (idx.top) return Element::scalar(5.0);
        return Element::scalar(idx.coords[0] == 0 ? 0.0 : 2.0);
    };
    // from inside the first step: the sup reaches the next step start exactly
    CHECK(gEpsilon(s, 0.2, 0.5) == 0.5);
    // a tolerance wide enough for both steps reaches b
    CHECK(gEpsilon(s, 0.2, 3.0) == 1.0);
    // x inside a step always reaches at least the step end
    CHECK(gEpsilon(s, 0.6, 1e-9) == 1.0);
}

TEST_CASE("lambda_eps realization", "[stepmap]") {
    const RegulatedSample c = constantMapping(Element::scalar(3.0));
    const EpsilonPartition lc = buildLambdaEps(c, 0.5, 100, 256);
    CHECK(lc.points.size() == 1);  // {a}; the next hop reaches b
    CHECK_FALSE(lc.exhausted);

    const RegulatedSample lin = linearMapping();
    const EpsilonPartition ll = buildLambdaEps(lin, 0.25, 100, 512);
    CHECK(ll.points.size() >= 3);   // roughly ceil(1/eps) = 4 intervals
    CHECK(ll.points.size() <= 8);
    CHECK(ll.points.front() == 0.0);
    for (size_t i = 0; i + 1 < ll.points.size(); ++i) CHECK(ll.points[i] < ll.points[i + 1]);
}

TEST_CASE("step approximation stays within eps", "[stepmap]") {
    const RegulatedSample c = constantMapping(Element::scalar(2.5));
    const StepMapping sc = approximateByStep(c, 0.1, 100, 128);
    CHECK(dist(sc.evaluate(0.3), Element::scalar(2.5)) == 0.0);

    const RegulatedSample lin = linearMapping();
    const StepMapping sl = approximateByStep(lin, 0.25, 100, 512);
    CHECK(sl.set.finitePoints().size() <= 7);
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
        const double t = u(rng);
        // skip the countably many step endpoints
        bool onEdge = false;
        for (double p : sl.set.finitePoints()) onEdge = onEdge || std::abs(t - p) < 1e-6;
        if (onEdge) continue;
        worst = std::max(worst, dist(sl.evaluate(t), lin.eval(t)));
    }
    CHECK(worst <= 0.25 + 1e-9);

    // the rough mapping's Lambda_eps accumulates below 1/2 already, so the
    // realized prefix is what the approximation can honestly cover
    const RegulatedSample rough = ex401(40);
    const EpsilonPartition lam = buildLambdaEps(rough, 0.5, 400, 384);
    CHECK(lam.exhausted);
    const StepMapping sr = approximateByStep(rough, 0.5, 400, 384);
    const double covered = lam.points.back();
    std::uniform_real_distribution<double> v(0.01, 0.99);
    int violations = 0;
    for (int i = 0; i < 200; ++i) {
        const double t = v(rng) * covered;
        bool onEdge = false;
        for (double p : sr.set.finitePoints()) onEdge = onEdge || std::abs(t - p) < 1e-5;
        if (onEdge) continue;
        if (dist(sr.evaluate(t), rough.eval(t)) > 0.5 + 0.05) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("deterministic g_epsilon golden value for the rough mapping", "[stepmap]") {
    const RegulatedSample A = ex401(40);
    const double g1 = gEpsilon(A, 0.3, 0.5, 384);
    const double g2 = gEpsilon(A, 0.3, 0.5, 384);
    CHECK(g1 == g2);
    CHECK(g1 > 0.3);
    CHECK(g1 < 1.0);
}
