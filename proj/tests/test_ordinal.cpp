#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include <prodint/ordinal.hpp>

using namespace prodint;

TEST_CASE("tower and ladder point values", "[ordinal]") {
    const auto lad = WellOrderedSet::ladder(0.0, 1.0);
    CHECK(lad.value(OrdinalIndex::of({3})) == 0.875);
    CHECK(lad.value(OrdinalIndex::topIndex()) == 1.0);

    // alpha(n0,n1) = 1 - 2^{-n0-1} - 2^{-n0-n1-1}
    const auto t1 = WellOrderedSet::tower(1, 0.0, 1.0);
    CHECK(t1.value(OrdinalIndex::of({0, 0})) == 0.0);
    CHECK(t1.value(OrdinalIndex::of({0, 1})) == 0.25);
    CHECK(t1.value(OrdinalIndex::of({1, 0})) == 0.5);
    CHECK(t1.value(OrdinalIndex::of({2, 3})) == 1.0 - 0.125 - std::ldexp(1.0, -6));

    const auto fin = WellOrderedSet::finite({0.0, 0.5, 1.0});
    CHECK(fin.value(OrdinalIndex::of({1})) == 0.5);
    CHECK(fin.value(OrdinalIndex::topIndex()) == 1.0);
    CHECK_THROWS_AS(fin.value(OrdinalIndex::of({5})), InvalidIndex);
}

TEST_CASE("successor increments the innermost coordinate", "[ordinal]") {
    const auto lad = WellOrderedSet::ladder(0.0, 1.0);
    CHECK(lad.successor(OrdinalIndex::of({4})) == OrdinalIndex::of({5}));

    const auto t1 = WellOrderedSet::tower(1, 0.0, 1.0);
    CHECK(t1.successor(OrdinalIndex::of({2, 7})) == OrdinalIndex::of({2, 8}));

    const auto fin = WellOrderedSet::finite({0.0, 0.5, 1.0});
    CHECK(fin.successor(OrdinalIndex::of({0})) == OrdinalIndex::of({1}));
    CHECK(fin.successor(OrdinalIndex::of({1})).top);
    CHECK_THROWS_AS(fin.successor(OrdinalIndex::topIndex()), NoSuccessor);
}

TEST_CASE("successor is the next member by brute enumeration", "[ordinal]") {
    const auto t1 = WellOrderedSet::tower(1, 0.0, 1.0);
    std::vector<double> pts;
    for (std::uint64_t n0 = 0; n0 < 12; ++n0)
        for (std::uint64_t n1 = 0; n1 < 12; ++n1) pts.push_back(t1.value(OrdinalIndex::of({n0, n1})));
    std::sort(pts.begin(), pts.end());
    for (std::uint64_t n0 = 0; n0 < 8; ++n0)
        for (std::uint64_t n1 = 0; n1 < 10; ++n1) {
            const double v = t1.value(OrdinalIndex::of({n0, n1}));
            const double s = t1.value(t1.successor(OrdinalIndex::of({n0, n1})));
            // no brute-force member falls strictly between
            auto it = std::upper_bound(pts.begin(), pts.end(), v);
            REQUIRE(it != pts.end());
            CHECK(*it >= s);
        }
}

TEST_CASE("gap formulas", "[ordinal]") {
    const auto t1 = WellOrderedSet::tower(1, 0.0, 1.0);
    for (std::uint64_t n0 = 0; n0 < 6; ++n0)
        for (std::uint64_t n1 = 0; n1 < 6; ++n1)
            CHECK(t1.gap(OrdinalIndex::of({n0, n1})) ==
                  std::ldexp(1.0, -static_cast<int>(n0 + n1) - 2));
    const auto lad = WellOrderedSet::ladder(0.0, 1.0);
    for (std::uint64_t n = 0; n < 10; ++n)
        CHECK(lad.gap(OrdinalIndex::of({n})) == std::ldexp(1.0, -static_cast<int>(n) - 1));
    const auto fin = WellOrderedSet::finite({0.0, 0.3, 1.0});
    CHECK(fin.gap(OrdinalIndex::of({0})) == 0.3);
    // the interval recursion keeps gaps exact beyond the value resolution
    CHECK(t1.gap(OrdinalIndex::of({40, 30})) == std::ldexp(1.0, -72));
}

TEST_CASE("limit elements", "[ordinal]") {
    const auto t1 = WellOrderedSet::tower(1, 0.0, 1.0);
    CHECK(t1.isLimit(t1.locate(0.5)));                      // 0.5 = alpha(1,0)
    CHECK(t1.isLimit(OrdinalIndex::of({3, 0})));
    CHECK_FALSE(t1.isLimit(OrdinalIndex::of({0, 0})));      // the minimum
    CHECK_FALSE(t1.isLimit(OrdinalIndex::of({2, 5})));      // a successor
    CHECK(t1.isLimit(OrdinalIndex::topIndex()));

    const auto lad = WellOrderedSet::ladder(0.0, 1.0);
    CHECK_FALSE(lad.isLimit(OrdinalIndex::of({3})));        // 0.875 is a successor
    CHECK_FALSE(lad.isLimit(OrdinalIndex::of({0})));
    CHECK(lad.isLimit(OrdinalIndex::topIndex()));

    const auto fin = WellOrderedSet::finite({0.0, 0.5, 1.0});
    CHECK_FALSE(fin.isLimit(OrdinalIndex::topIndex()));
}

TEST_CASE("locate finds the step containing a point", "[ordinal]") {
    const auto t1 = WellOrderedSet::tower(1, 0.0, 1.0);
    CHECK(t1.locate(0.0) == OrdinalIndex::of({0, 0}));
    CHECK(t1.locate(0.3) == OrdinalIndex::of({0, 1}));  // [0.25, 0.375)
    CHECK(t1.locate(0.5) == OrdinalIndex::of({1, 0}));
    CHECK(t1.locate(1.0).top);
    std::mt19937 rng(5150);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double t = u(rng);
        const OrdinalIndex idx = t1.locate(t);
        CHECK(t1.value(idx) <= t);
        CHECK(t1.value(t1.successor(idx)) > t);
    }
}

TEST_CASE("enumerate prefix", "[ordinal]") {
    const auto lad = WellOrderedSet::ladder(0.0, 1.0);
    auto p = lad.enumeratePrefix(0.9, 100);
    REQUIRE(p.indices.size() == 4);  // 0, 0.5, 0.75, 0.875
    CHECK_FALSE(p.truncated);
    CHECK(lad.value(p.indices[3]) == 0.875);

    const auto fin = WellOrderedSet::finite({0.0, 0.25, 0.75, 1.0});
    auto q = fin.enumeratePrefix(1.0, 100);
    CHECK(q.indices.size() == 3);  // the interior points
    CHECK_FALSE(q.truncated);

    const auto t1 = WellOrderedSet::tower(1, 0.0, 1.0);
    auto r = t1.enumeratePrefix(1.0, 10);
    REQUIRE(r.indices.size() == 10);
    CHECK(r.truncated);
    for (size_t i = 0; i + 1 < r.indices.size(); ++i)
        CHECK(t1.value(r.indices[i]) < t1.value(r.indices[i + 1]));
}

TEST_CASE("value increases along successors on random tower indices", "[ordinal]") {
    std::mt19937 rng(31415);
    std::uniform_int_distribution<std::uint64_t> coord(0, 14);
    for (int depth : {0, 1, 2}) {
        const auto set = depth == 0 ? WellOrderedSet::ladder(0.0, 1.0)
                                    : WellOrderedSet::tower(depth, 0.0, 1.0);
        for (int trial = 0; trial < 3000; ++trial) {
            std::vector<std::uint64_t> c(set.coordCount());
            for (auto& v : c) v = coord(rng);
            const OrdinalIndex idx = OrdinalIndex::of(c);
            CHECK(set.value(idx) < set.value(set.successor(idx)));
        }
    }
}

TEST_CASE("limit elements are approached from below", "[ordinal]") {
    const auto t1 = WellOrderedSet::tower(1, 0.0, 1.0);
    for (const OrdinalIndex gamma :
         {OrdinalIndex::of({1, 0}), OrdinalIndex::of({4, 0}), OrdinalIndex::topIndex()}) {
        REQUIRE(t1.isLimit(gamma));
        const double gv = t1.value(gamma);
        for (int k = 2; k <= 40; ++k) {
            const double lo = gv - std::ldexp(1.0, -k);
            if (lo <= 0.0) continue;
            // walk successors from the located step until inside the window
            OrdinalIndex idx = t1.locate(lo);
            double v = t1.value(idx);
            int steps = 0;
            while (v <= lo && steps++ < 200) {
                idx = t1.successor(idx);
                v = t1.value(idx);
            }
            CHECK(v > lo);
            CHECK(v < gv);
        }
    }
}
