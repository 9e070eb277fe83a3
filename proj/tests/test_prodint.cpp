#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <prodint/prodint.hpp>

using namespace prodint;

namespace {

constexpr double kExpLog2Squared = 1.6168066722416747;
constexpr double kPi2Over6Squared = 2.7058080842778455;
constexpr double kExpPi2Over6Squared = 14.966405922630929;

}  // namespace

TEST_CASE("partition products", "[prodintop]") {
    const EvalMapping zero{0.0, 1.0, Kind::Matrix, 2,
                           [](double) { return Element::zero(Kind::Matrix, 2); }};
    CHECK(dist(partitionProduct(zero, TaggedPartition::uniform(0, 1, 16)),
               Element::identity(Kind::Matrix, 2)) == 0.0);

    // constant scalar c with m uniform intervals: (1 + c/m)^m
    const double c = 0.8;
    const EvalMapping cm{0.0, 1.0, Kind::Scalar, 1, [c](double) { return Element::scalar(c); }};
    const int m = 32;
    const double got = partitionProduct(cm, TaggedPartition::uniform(0, 1, m)).data()[0];
    CHECK(std::abs(got - std::pow(1.0 + c / m, m)) < 1e-13);

    const Element A = Element::matrix(2, {0.3, -1.0, 0.2, 0.1});
    const EvalMapping am{0.0, 1.0, Kind::Matrix, 2, [A](double) { return A; }};
    CHECK(dist(partitionProduct(am, TaggedPartition::uniform(0, 1, 1)),
               add(Element::identity(Kind::Matrix, 2), A)) == 0.0);
}

TEST_CASE("riemann sweep reaches the matrix exponential", "[prodintop]") {
    const Element A = Element::matrix(2, {0.2, 0.5, -0.3, 0.4});
    const EvalMapping am{0.0, 1.0, Kind::Matrix, 2, [A](double) { return A; }};
    const ConvergenceReport rep = riemannProductIntegral(am, 1e-6, 22);
    CHECK(rep.converged);
    CHECK(dist(rep.finalValue(), expm(A)) < 1e-5);
    if (auto e = rep.extrapolated()) CHECK(dist(*e, expm(A)) < 1e-8);
}

TEST_CASE("riemann sweep on a two-piece scalar mapping", "[prodintop]") {
    const double a1 = 0.9, a2 = -0.4;
    const EvalMapping am{0.0, 1.0, Kind::Scalar, 1,
                         [a1, a2](double t) { return Element::scalar(t < 0.5 ? a1 : a2); }};
    const ConvergenceReport rep = riemannProductIntegral(am, 1e-8, 22);
    CHECK(std::abs(rep.finalValue().data()[0] - std::exp(0.5 * (a1 + a2))) < 1e-6);
}

TEST_CASE("non-commuting two-step pair: ordered product, not exp of the sum", "[prodintop]") {
    const Element A1 = Element::matrix(2, {0, 1, 0, 0});
    const Element A2 = Element::matrix(2, {0, 0, 1, 0});
    const EvalMapping am{0.0, 1.0, Kind::Matrix, 2,
                         [A1, A2](double t) { return t < 0.5 ? A1 : A2; }};
    const ConvergenceReport rep = riemannProductIntegral(am, 1e-7, 21);
    const Element want = mul(expm(scale(0.5, A2)), expm(scale(0.5, A1)));
    const Element wrong = expm(scale(0.5, add(A1, A2)));
    const Element got = rep.extrapolated() ? *rep.extrapolated() : rep.finalValue();
    CHECK(dist(got, want) < 1e-6);
    CHECK(dist(got, wrong) > 0.01);
}

TEST_CASE("step product integral formulas", "[prodintop]") {
    const auto r1 = stepProductIntegral(ex301(), 1e-9, 1000000);
    CHECK_FALSE(r1.truncated);
    CHECK(std::abs(r1.value.data()[0] - kExpLog2Squared) < 1e-8);

    const auto r2 = stepProductIntegral(ex302(), 4e-9, 20000000);
    CHECK_FALSE(r2.truncated);
    CHECK(std::abs(r2.value.data()[0] - kExpPi2Over6Squared) < 1e-6);

    // single-step constant z over {a, b}
    const StepMapping tv = twoValueStep(Element::scalar(0.6), Element::scalar(0.0), 0.0, 2.0);
    const auto r3 = stepProductIntegral(tv, 1e-12, 100);
    CHECK(std::abs(r3.value.data()[0] - std::exp(1.2)) < 1e-12);
}

TEST_CASE("commutative identity routes agree", "[prodintop]") {
    auto [lhs, rhs] = commutativeProductIntegral(ex301(), 1e-9, 1000000);
    CHECK(std::abs(lhs.data()[0] - kExpLog2Squared) < 1e-8);
    CHECK(std::abs(rhs.data()[0] - kExpLog2Squared) < 1e-8);

    const StepMapping zero = twoValueStep(Element::scalar(0.0), Element::scalar(0.0));
    auto [zl, zr] = commutativeProductIntegral(zero, 1e-12, 100);
    CHECK(zl.data()[0] == 1.0);
    CHECK(zr.data()[0] == 1.0);

    // diagonal-matrix steps on the ladder commute componentwise
    StepMapping dg;
    dg.set = WellOrderedSet::ladder(0.0, 1.0);
    dg.kind = Kind::Diag;
    dg.dim = 2;
    dg.values = [](const OrdinalIndex& idx) {
        if (idx.top) return Element::zero(Kind::Diag, 2);
        return Element::diag(2, {std::ldexp(1.0, -static_cast<int>(idx.coords[0])), 1.0});
    };
    auto [dl, dr] = commutativeProductIntegral(dg, 1e-11, 200000);
    CHECK(dist(dl, dr) < 1e-10);
}

TEST_CASE("riemann and bochner criteria separate the examples", "[prodintop]") {
    const auto rc1 = riemannCriterion(ex301());
    CHECK_FALSE(rc1.bounded);
    CHECK_FALSE(rc1.witness.empty());

    const StepMapping cm = twoValueStep(Element::scalar(2.0), Element::scalar(2.0));
    CHECK(riemannCriterion(cm).bounded);

    // the bounded rough mapping, approximated by steps, stays bounded
    const StepMapping approx = approximateByStep(ex401(40), 0.5, 200, 256);
    CHECK(riemannCriterion(approx).bounded);

    CHECK(bochnerCriterion(ex301(), 1e-6, 400000).verdict == Verdict::DivergenceWitness);
    const auto bc = bochnerCriterion(ex302(), 2e-9, 30000000);
    CHECK(bc.verdict == Verdict::Convergent);
    CHECK(std::abs(bc.sumValue - kPi2Over6Squared) < 1e-8);
    CHECK(bochnerCriterion(twoValueStep(Element::scalar(0), Element::scalar(0)), 1e-9, 100).verdict ==
          Verdict::Convergent);
}

TEST_CASE("strong residual", "[prodintop]") {
    const EvalMapping zero{0.0, 1.0, Kind::Scalar, 1, [](double) { return Element::scalar(0.0); }};
    const auto Wid = [](double) { return Element::scalar(1.0); };
    CHECK(strongResidual(zero, Wid, TaggedPartition::uniform(0, 1, 8)) == 0.0);

    // constant c with W = exp(c t): the residual is the second-order Taylor
    // defect and halves with each doubling
    const double c = 0.7;
    const EvalMapping cm{0.0, 1.0, Kind::Scalar, 1, [c](double) { return Element::scalar(c); }};
    const auto W = [c](double t) { return Element::scalar(std::exp(c * t)); };
    double prev = -1.0;
    for (int k = 2; k <= 10; ++k) {
        const double r = strongResidual(cm, W, TaggedPartition::uniform(0, 1, 1u << k));
        const std::uint64_t m = 1u << k;
        CHECK(r <= m * std::pow(c / m, 2.0) * std::exp(c / m) * std::exp(c) + 1e-12);
        if (prev >= 0.0) CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("strong residual for the tower mapping decays along aligned grids", "[prodintop]") {
    const StepMapping A = ex301();
    const EvalMapping M = EvalMapping::of(A);
    std::vector<double> residuals;
    for (int k = 0; k < 5; ++k) {
        AlignedIndefinite W(A, 4 + 4 * static_cast<std::uint64_t>(k), 1e-10);
        const TaggedPartition D = W.partition(k + 2);
        residuals.push_back(strongResidual(M, [&](double t) { return W.at(t); }, D));
    }
    for (size_t i = 1; i < residuals.size(); ++i) CHECK(residuals[i] < residuals[i - 1]);
    // the strong=>ordinary bound with measured M on the finest level
    {
        AlignedIndefinite W(A, 20, 1e-10);
        const TaggedPartition D = W.partition(6);
        const double eps = strongResidual(M, [&](double t) { return W.at(t); }, D);
        double bound = 0.0;
        for (double t : D.points) {
            bound = std::max(bound, norm(W.at(t)));
            bound = std::max(bound, norm(inverse(W.at(t))));
        }
        const double Mb = bound;
        const Element full = partitionProduct(M, D);
        const Element wend = mul(W.at(1.0), inverse(W.at(0.0)));
        CHECK(dist(full, wend) <= (std::pow(Mb, 4) + std::pow(Mb, 6) * eps) * eps + 1e-12);
    }
}

TEST_CASE("derivative of the indefinite product matches A W", "[prodintop]") {
    const double c = 0.45;
    const EvalMapping cm{0.0, 1.0, Kind::Scalar, 1, [c](double) { return Element::scalar(c); }};
    const auto W = [c](double t) { return Element::scalar(std::exp(c * t)); };
    CHECK(derivativeCheck(cm, W, {0.1, 0.3, 0.55, 0.9}) < 1e-6);

    const EvalMapping zm{0.0, 1.0, Kind::Scalar, 1, [](double) { return Element::scalar(0.0); }};
    CHECK(derivativeCheck(zm, [](double) { return Element::scalar(1.0); }, {0.2, 0.8}) == 0.0);

    // step-interior points of the tower mapping against the cached W
    const StepMapping A = ex301();
    StepIndefiniteProduct W301(A, 1e-10, 400000);
    std::vector<double> samples;
    for (std::uint64_t n0 = 0; n0 < 5; ++n0)
        for (std::uint64_t n1 = 0; n1 < 10 && samples.size() < 50; ++n1) {
            const OrdinalIndex idx = OrdinalIndex::of({n0, n1});
            const double lo = A.set.value(idx);
            const double g = A.set.gap(idx);
            if (g > 8e-6) samples.push_back(lo + 0.5 * g);
        }
    const double err = derivativeCheck(EvalMapping::of(A), [&](double t) { return W301(t); },
                                       samples, 1e-6);
    CHECK(err < 1e-5);
}

TEST_CASE("composition across an interior step endpoint", "[prodintop]") {
    const StepMapping A = ex301();
    const Family f = expGapFamily(A);
    const double tol = 1e-9;
    const double c = A.set.value(OrdinalIndex::of({1, 0}));  // 0.5, a limit point
    const Element whole = transfiniteProduct(f, tol, 1000000).value;
    const Element left = partialProductBelow(f, c, tol, 1000000).value;
    const Element right = productOverWindow(f, c, std::numeric_limits<double>::infinity(), tol,
                                            1000000).value;
    CHECK(dist(mul(right, left), whole) < 2 * 1e-7);

    const double c2 = A.set.value(OrdinalIndex::of({0, 3}));  // a successor point
    const Element l2 = partialProductBelow(f, c2, tol, 1000000).value;
    const Element r2 = productOverWindow(f, c2, std::numeric_limits<double>::infinity(), tol,
                                         1000000).value;
    CHECK(dist(mul(r2, l2), whole) < 2 * 1e-7);
}

TEST_CASE("indefinite product is continuous across a limit point", "[prodintop]") {
    const StepMapping A = ex301();
    StepIndefiniteProduct W(A, 1e-10, 400000);
    const Element atLimit = W(0.5);
    for (int k = 8; k <= 20; k += 4) {
        const double below = 0.5 - std::ldexp(1.0, -k);
        CHECK(dist(W(below), atLimit) < 6.0 / static_cast<double>(k));  // slow but shrinking
    }
    CHECK(dist(W(0.5 - std::ldexp(1.0, -20)), atLimit) <
          dist(W(0.5 - std::ldexp(1.0, -8)), atLimit));
}
