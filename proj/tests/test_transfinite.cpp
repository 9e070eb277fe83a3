#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <prodint/catalog.hpp>
#include <prodint/transfinite.hpp>

using namespace prodint;

namespace {

constexpr double kLog2Squared = 0.48045301391820142;
constexpr double kExpLog2Squared = 1.6168066722416747;

Family zeroFamily(const WellOrderedSet& set) {
    return scalarFamily(set, [](const OrdinalIndex&) { return 0.0; });
}

}  // namespace

TEST_CASE("alternating double family sums to (log 2)^2", "[transfinite]") {
    const auto r = transfiniteSum(ex201Family(), 1e-9, 1000000);
    CHECK_FALSE(r.truncated);
    CHECK(std::abs(r.value.data()[0] - kLog2Squared) < 1e-9);
    CHECK(r.limitPointsVisited > 10);
}

TEST_CASE("zero and geometric families", "[transfinite]") {
    const auto lad = WellOrderedSet::ladder(0.0, 1.0);
    CHECK(transfiniteSum(zeroFamily(lad), 1e-10, 1000).value.data()[0] == 0.0);
    const Family geo = scalarFamily(lad, [](const OrdinalIndex& idx) {
        return idx.top ? 0.0 : std::ldexp(1.0, -static_cast<int>(idx.coords[0]));
    });
    CHECK(std::abs(transfiniteSum(geo, 1e-10, 100000).value.data()[0] - 2.0) < 1e-9);
}

TEST_CASE("product of exp over the double family", "[transfinite]") {
    Family ef = mapFamily(ex201Family(), [](const Element& x) { return expm(x); }, Kind::Scalar, 1);
    const auto r = transfiniteProduct(ef, 1e-9, 1000000);
    CHECK_FALSE(r.truncated);
    CHECK(std::abs(r.value.data()[0] - kExpLog2Squared) < 1e-9);

    Family idf = mapFamily(zeroFamily(WellOrderedSet::ladder(0, 1)),
                           [](const Element&) { return Element::scalar(1.0); }, Kind::Scalar, 1);
    CHECK(transfiniteProduct(idf, 1e-10, 1000).value.data()[0] == 1.0);
}

TEST_CASE("product accumulates new factors from the left", "[transfinite]") {
    // two non-commuting matrices on a three-point set
    const Element A = Element::matrix(2, {1, 1, 0, 1});
    const Element B = Element::matrix(2, {1, 0, 1, 1});
    Family f;
    f.set = WellOrderedSet::finite({0.0, 0.5, 1.0});
    f.kind = Kind::Matrix;
    f.dim = 2;
    f.gen = [A, B](const OrdinalIndex& idx) {
        if (idx.top) return Element::identity(Kind::Matrix, 2);
        return idx.coords[0] == 0 ? A : B;
    };
    const Element forward = transfiniteProduct(f, 1e-12, 100).value;
    CHECK(dist(forward, mul(B, A)) == 0.0);
    CHECK(dist(forward, mul(A, B)) > 0.5);  // order matters
}

TEST_CASE("exp-sum identity for commuting families", "[transfinite]") {
    auto [lhs, rhs] = checkExpSumIdentity(ex201Family(), 1e-9);
    CHECK(std::abs(lhs.data()[0] - kExpLog2Squared) < 1e-8);
    CHECK(std::abs(rhs.data()[0] - kExpLog2Squared) < 1e-8);

    // single-element family on {a, b}
    Family single;
    single.set = WellOrderedSet::finite({0.0, 1.0});
    single.kind = Kind::Scalar;
    single.dim = 1;
    single.gen = [](const OrdinalIndex& idx) { return Element::scalar(idx.top ? 0.0 : 0.7); };
    auto [l2, r2] = checkExpSumIdentity(single, 1e-12);
    CHECK(dist(l2, r2) < 1e-14);

    // diagonal-matrix family on the ladder: componentwise geometric sums
    Family diag;
    diag.set = WellOrderedSet::ladder(0.0, 1.0);
    diag.kind = Kind::Diag;
    diag.dim = 2;
    diag.gen = [](const OrdinalIndex& idx) {
        if (idx.top) return Element::zero(Kind::Diag, 2);
        const int n = static_cast<int>(idx.coords[0]);
        return Element::diag(2, {std::ldexp(1.0, -n), std::pow(3.0, -n)});
    };
    auto [l3, r3] = checkExpSumIdentity(diag, 1e-11);
    CHECK(dist(l3, r3) < 1e-10);
    CHECK(std::abs(l3.data()[0] - std::exp(2.0)) < 1e-9);
    CHECK(std::abs(l3.data()[1] - std::exp(1.5)) < 1e-9);

    // non-commuting family is rejected
    Family bad;
    bad.set = WellOrderedSet::finite({0.0, 0.5, 1.0});
    bad.kind = Kind::Matrix;
    bad.dim = 2;
    bad.gen = [](const OrdinalIndex& idx) {
        if (idx.top) return Element::zero(Kind::Matrix, 2);
        return idx.coords[0] == 0 ? Element::matrix(2, {0, 1, 0, 0})
                                  : Element::matrix(2, {0, 0, 1, 0});
    };
    CHECK_THROWS_AS(checkExpSumIdentity(bad, 1e-9), NotCommuting);
}

TEST_CASE("absolute summability verdicts", "[transfinite]") {
    // the double family is not absolutely summable
    const auto v1 = absSummable(ex201Family(), 1e-8, 200000);
    CHECK(v1.verdict == Verdict::DivergenceWitness);
    CHECK_FALSE(v1.witness.empty());

    // 2^{-n0-n1} over the tower: double geometric sum = 4
    const Family g = scalarFamily(WellOrderedSet::tower(1, 0, 1), [](const OrdinalIndex& idx) {
        if (idx.top) return 0.0;
        return std::ldexp(1.0, -static_cast<int>(idx.coords[0] + idx.coords[1]));
    });
    const auto v2 = absSummable(g, 1e-9, 500000);
    CHECK(v2.verdict == Verdict::Convergent);
    CHECK(std::abs(v2.sumValue - 4.0) < 1e-7);

    const auto v3 = absSummable(zeroFamily(WellOrderedSet::ladder(0, 1)), 1e-9, 1000);
    CHECK(v3.verdict == Verdict::Convergent);
    CHECK(v3.sumValue == 0.0);
}

TEST_CASE("one-minus product pairs with the summability verdict", "[transfinite]") {
    const auto lad = WellOrderedSet::ladder(0.0, 1.0);
    // p = 2^{-n-2}: sum 1/2, product positive
    const Family p = scalarFamily(lad, [](const OrdinalIndex& idx) {
        return idx.top ? 0.0 : std::ldexp(1.0, -static_cast<int>(idx.coords[0]) - 2);
    });
    auto [prod1, verd1] = checkOneMinusProduct(p, 1e-9, 100000);
    CHECK(verd1.verdict == Verdict::Convergent);
    CHECK(prod1 > 0.5);  // bounded below by exp(-2 sum p) = exp(-1)

    auto [prod2, verd2] = checkOneMinusProduct(zeroFamily(lad), 1e-10, 1000);
    CHECK(prod2 == 1.0);
    CHECK(verd2.verdict == Verdict::Convergent);

    // harmonic-type norms below 1: product heads to zero, sum diverges
    const Family q = scalarFamily(lad, [](const OrdinalIndex& idx) {
        return idx.top ? 0.0 : 0.9 / (static_cast<double>(idx.coords[0]) + 1.0);
    });
    auto [prod3, verd3] = checkOneMinusProduct(q, 1e-6, 300000);
    CHECK(verd3.verdict == Verdict::DivergenceWitness);
    CHECK(prod3 < 1e-3);

    const Family big = scalarFamily(lad, [](const OrdinalIndex&) { return 1.5; });
    CHECK_THROWS_AS(checkOneMinusProduct(big, 1e-9, 1000), DomainViolation);

    // the double family itself, restricted to members of norm below one
    // (only the first member has norm 1): the product of 1 - |x| vanishes
    const Family ex = ex201Family();
    Family restricted = ex;
    restricted.gen = [ex](const OrdinalIndex& idx) {
        if (!idx.top && idx.coords[0] == 0 && idx.coords[1] == 0) return Element::scalar(0.0);
        return ex.gen(idx);
    };
    auto [prodEx, verdictEx] = checkOneMinusProduct(restricted, 1e-6, 300000);
    CHECK(verdictEx.verdict == Verdict::DivergenceWitness);
    CHECK(prodEx < 0.05);
}

TEST_CASE("tail norms vanish toward limit elements", "[transfinite]") {
    const Family f = ex201Family();
    const OrdinalIndex gamma = f.set.locate(0.5);
    REQUIRE(f.set.isLimit(gamma));
    const auto norms = tailLimitCheck(f, gamma, 20, false);
    REQUIRE(norms.size() >= 10);
    for (size_t i = 1; i < norms.size(); ++i) CHECK(norms[i] <= norms[i - 1]);
    CHECK(norms.back() < 0.2 * norms.front());  // the tail decays like 1/n

    Family ef = mapFamily(f, [](const Element& x) { return expm(x); }, Kind::Scalar, 1);
    const auto devs = tailLimitCheck(ef, gamma, 20, true);
    CHECK(devs.back() < 0.2 * devs.front());

    CHECK_THROWS_AS(tailLimitCheck(f, OrdinalIndex::of({0, 3}), 5, false), NotLimit);
}

TEST_CASE("absolutely summable families are summable within tolerance", "[transfinite]") {
    // randomized absolutely summable matrix families over the depth-1 tower
    std::mt19937 rng(60601);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> c(4);
        for (double& v : c) v = u(rng);
        Family f;
        f.set = WellOrderedSet::tower(1, 0.0, 1.0);
        f.kind = Kind::Matrix;
        f.dim = 2;
        f.gen = [c](const OrdinalIndex& idx) {
            if (idx.top) return Element::zero(Kind::Matrix, 2);
            const double w = std::ldexp(1.0, -static_cast<int>(idx.coords[0] + idx.coords[1]));
            return Element::matrix(2, {c[0] * w, c[1] * w, c[2] * w, c[3] * w});
        };
        REQUIRE(absSummable(f, 1e-8, 400000).verdict == Verdict::Convergent);
        const auto r = transfiniteSum(f, 1e-8, 400000);
        CHECK_FALSE(r.truncated);
        CHECK(r.achievedTol <= 1e-8);
        // closed form: sum over both geometric indices is 4
        CHECK(dist(r.value, Element::matrix(2, {4 * c[0], 4 * c[1], 4 * c[2], 4 * c[3]})) < 1e-7);
    }
}

TEST_CASE("log of the exp-norm product recovers the norm sum", "[transfinite]") {
    std::mt19937 rng(787);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double coeff = u(rng);
        const Family p = scalarFamily(WellOrderedSet::ladder(0.0, 1.0),
                                      [coeff](const OrdinalIndex& idx) {
                                          if (idx.top) return 0.0;
                                          return coeff * std::ldexp(1.0, -static_cast<int>(idx.coords[0]));
                                      });
        const double tol = 1e-10;
        Family ep = mapFamily(p, [](const Element& x) { return expm(x); }, Kind::Scalar, 1);
        const double prod = transfiniteProduct(ep, tol, 100000).value.data()[0];
        const double sum = transfiniteSum(p, tol, 100000).value.data()[0];
        CHECK(prod > 0.0);
        CHECK(std::abs(std::log(prod) - sum) < 2 * 1e-8);
        CHECK(std::abs(sum - 2.0 * coeff) < 1e-8);
    }
}

TEST_CASE("identical runs produce identical bits", "[transfinite]") {
    const auto r1 = transfiniteSum(ex201Family(), 1e-9, 1000000);
    const auto r2 = transfiniteSum(ex201Family(), 1e-9, 1000000);
    CHECK(r1.value.data() == r2.value.data());
    CHECK(r1.termsUsed == r2.termsUsed);
    CHECK(r1.achievedTol == r2.achievedTol);
}
