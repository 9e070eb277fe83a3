#pragma once

// Product integrals of I + A(t)dt: ordered partition products, Riemann
// refinement sweeps, the exact transfinite formula for step mappings with
// well-ordered steps, the boundedness and absolute-summability criteria that
// separate Riemann / strong McShane integrability from the Kurzweil case,
// and the strong-integral residual against a candidate indefinite product.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "algebra.hpp"
#include "catalog.hpp"
#include "partition.hpp"
#include "stepmap.hpp"
#include "transfinite.hpp"

namespace prodint {

/// P(V,D) with V(t,[x,y]) = I + A(t)(y-x): the ordered product with the
/// highest interval leftmost.
inline Element partitionProduct(const EvalMapping& A, const TaggedPartition& D) {
    Element acc = Element::identity(A.kind, A.dim);
    Element scratch;
    const Element id = Element::identity(A.kind, A.dim);
    for (size_t i = 0; i < D.intervals(); ++i) {
        Element factor = add(id, scale(D.points[i + 1] - D.points[i], A.at(D.tags[i])));
        leftMulInto(acc, factor, scratch);
    }
    return acc;
}

/// Uniform-partition sweep m = 2^k with left-endpoint tags (midpoint behind
/// the flag), doubling until two consecutive deltas fall under tol.
inline ConvergenceReport riemannProductIntegral(const EvalMapping& A, double tol, int maxLevels,
                                                bool midpointTags = false) {
    ConvergenceReport rep;
    rep.tol = tol;
    for (int k = 0; k <= maxLevels; ++k) {
        const std::uint64_t m = std::uint64_t{1} << k;
        const Element v = partitionProduct(A, TaggedPartition::uniform(A.a, A.b, m, midpointTags));
        ConvergenceReport::Row row;
        row.m = m;
        row.value = v;
        row.delta = rep.levels.empty() ? 0.0 : dist(v, rep.levels.back().value);
        rep.levels.push_back(std::move(row));
        if (k >= 2 && rep.levels[k].delta < tol && rep.levels[k - 1].delta < tol) {
            rep.converged = isInvertible(rep.levels[k].value);
            if (rep.converged) break;
        }
    }
    return rep;
}

/// The family exp((S(alpha)-alpha) z_alpha) with the identity at the top.
inline Family expGapFamily(const StepMapping& A) {
    Family gw = A.gapWeightedFamily();
    Family f;
    f.set = A.set;
    f.kind = A.kind;
    f.dim = A.dim;
    f.gen = [gw, kind = A.kind, dim = A.dim](const OrdinalIndex& idx) {
        if (idx.top) return Element::identity(kind, dim);
        return expm(gw.gen(idx));
    };
    return f;
}

/// prod (I + A(t)dt) for a step mapping with well-ordered steps: the
/// transfinite product of exp((S(alpha)-alpha) z_alpha).
inline TransfiniteResult stepProductIntegral(const StepMapping& A, double tol,
                                             std::uint64_t budget = kDefaultBudget) {
    return transfiniteProduct(expGapFamily(A), tol, budget);
}

/// Both routes of the commutative identity: the transfinite exp-product and
/// exp of the gap-weighted transfinite sum.
inline std::pair<Element, Element> commutativeProductIntegral(const StepMapping& A, double tol,
                                                              std::uint64_t budget = kDefaultBudget) {
    detail::requireCommutingSample(A.valueFamily());
    const TransfiniteResult lhs = stepProductIntegral(A, tol, budget);
    const TransfiniteResult rhs = transfiniteSum(A.gapWeightedFamily(), tol, budget);
    return {lhs.value, expm(rhs.value)};
}

struct BoundednessVerdict {
    bool bounded = true;
    double maxSeen = 0.0;
    std::string witness;
};

/// Riemann product integrability criterion: the step values must be bounded.
/// Scans norms in enumeration order; an unbounded witness is three blocks in
/// a row whose maxima keep at least doubling.
inline BoundednessVerdict riemannCriterion(const StepMapping& A, std::uint64_t probe = 4096) {
    BoundednessVerdict out;
    auto prefix = A.set.enumeratePrefix(A.set.hi(), probe);
    std::vector<double> blockMax;
    double cur = 0.0;
    std::uint64_t inBlock = 0;
    constexpr std::uint64_t kBlock = 8;
    for (const auto& idx : prefix.indices) {
        cur = std::max(cur, norm(A.values(idx)));
        if (++inBlock == kBlock) {
            blockMax.push_back(cur);
            out.maxSeen = std::max(out.maxSeen, cur);
            inBlock = 0;
            cur = 0.0;
        }
    }
    if (inBlock > 0) {
        blockMax.push_back(cur);
        out.maxSeen = std::max(out.maxSeen, cur);
    }
    if (blockMax.size() >= 4) {
        const size_t n = blockMax.size();
        if (blockMax[n - 1] > 2.0 * blockMax[n - 2] && blockMax[n - 2] > 2.0 * blockMax[n - 3] &&
            blockMax[n - 3] > 2.0 * blockMax[n - 4]) {
            out.bounded = false;
            out.witness = "block maxima keep doubling along the enumeration, last: " +
                          std::to_string(blockMax[n - 1]);
        }
    }
    return out;
}

/// Strong McShane / Bochner criterion: absolute summability of the family
/// (S(alpha)-alpha) z_alpha.
inline SummabilityVerdict bochnerCriterion(const StepMapping& A, double tol,
                                           std::uint64_t budget = kDefaultBudget) {
    return absSummable(A.gapWeightedFamily(), tol, budget);
}

/// sum_i norm(I + A(xi_i)(t_i - t_{i-1}) - W(t_i) W(t_{i-1})^{-1}).
inline double strongResidual(const EvalMapping& A, const std::function<Element(double)>& W,
                             const TaggedPartition& D) {
    const Element id = Element::identity(A.kind, A.dim);
    double sum = 0.0;
    Element prev = W(D.points[0]);
    Element prevInv = inverse(prev);
    for (size_t i = 0; i < D.intervals(); ++i) {
        const Element cur = W(D.points[i + 1]);
        const Element factor = add(id, scale(D.points[i + 1] - D.points[i], A.at(D.tags[i])));
        sum += dist(factor, mul(cur, prevInv));
        prev = cur;
        prevInv = inverse(prev);
    }
    return sum;
}

/// Central finite differences of W against A(t) W(t); returns the largest
/// relative error over the samples.
inline double derivativeCheck(const EvalMapping& A, const std::function<Element(double)>& W,
                              const std::vector<double>& samples, double h = 1e-6) {
    double worst = 0.0;
    for (double t : samples) {
        const Element dW = scale(0.5 / h, sub(W(t + h), W(t - h)));
        const Element rhs = mul(A.at(t), W(t));
        worst = std::max(worst, dist(dW, rhs) / std::max(1.0, norm(rhs)));
    }
    return worst;
}

/// The indefinite product W evaluated incrementally along a grid of step
/// starts: the first gridN steps of every coordinate block plus the block
/// limits, with one accelerated tail hop across each skipped block tail.
/// Aligned residual partitions stay on these points, so W lookups are exact.
class AlignedIndefinite {
public:
    AlignedIndefinite(const StepMapping& A, std::uint64_t gridN, double tol,
                      std::uint64_t budget = 200000)
        : A_(A) {
        const Family fam = expGapFamily(A_);
        Element scratch;
        Element w = Element::identity(A_.kind, A_.dim);
        auto pushPoint = [&](double t) {
            if (!starts_.empty() && !(t > starts_.back())) return;  // dyadic collision
            starts_.push_back(t);
            w_.push_back(w);
        };
        if (A_.set.type() == SetType::Finite) {
            OrdinalIndex idx = A_.set.minIndex();
            pushPoint(A_.set.lo());
            while (!idx.top) {
                Element f = fam.gen(idx);
                leftMulInto(w, f, scratch);
                OrdinalIndex next = A_.set.successor(idx);
                pushPoint(next.top ? A_.set.hi() : A_.set.value(next));
                idx = next;
            }
            return;
        }
        const size_t levels = A_.set.coordCount();
        if (levels > 2)
            throw std::invalid_argument("aligned indefinite products cover depth <= 1 towers");
        if (levels == 1) {
            OrdinalIndex idx = A_.set.minIndex();
            pushPoint(A_.set.lo());
            for (std::uint64_t n = 0; n + 1 < gridN; ++n) {
                leftMulInto(w, fam.gen(idx), scratch);
                OrdinalIndex next = A_.set.successor(idx);
                pushPoint(A_.set.value(next));
                idx = next;
            }
            const TransfiniteResult tail =
                productOverWindow(fam, A_.set.value(idx), A_.set.hi(), tol, budget);
            leftMulInto(w, tail.value, scratch);
            pushPoint(A_.set.hi());
            return;
        }
        pushPoint(A_.set.lo());
        for (std::uint64_t n0 = 0; n0 < gridN; ++n0) {
            for (std::uint64_t n1 = 0; n1 + 1 < gridN; ++n1) {
                leftMulInto(w, fam.gen(OrdinalIndex::of({n0, n1})), scratch);
                pushPoint(A_.set.value(OrdinalIndex::of({n0, n1 + 1})));
            }
            // hop across the block tail to the next block start
            const double from = A_.set.value(OrdinalIndex::of({n0, gridN - 1}));
            const double to = A_.set.value(OrdinalIndex::of({n0 + 1, 0}));
            const TransfiniteResult tail = productOverWindow(fam, from, to, tol, budget);
            leftMulInto(w, tail.value, scratch);
            pushPoint(to);
        }
        // remaining blocks up to the top in one accelerated window
        const TransfiniteResult rest =
            productOverWindow(fam, A_.set.value(OrdinalIndex::of({gridN, 0})), A_.set.hi(), tol, budget);
        leftMulInto(w, rest.value, scratch);
        pushPoint(A_.set.hi());
    }

    const std::vector<double>& stepStarts() const { return starts_; }

    /// W(t); exact on the grid, exp((t - s) z_s)-interpolated inside the
    /// grid step containing t.
    Element at(double t) const {
        size_t lo = 0, hi = starts_.size() - 1;
        while (lo + 1 < hi) {
            const size_t mid = (lo + hi) / 2;
            if (starts_[mid] <= t) lo = mid; else hi = mid;
        }
        if (t >= starts_.back()) return w_.back();
        if (t == starts_[lo]) return w_[lo];
        return mul(expm(scale(t - starts_[lo], A_.evaluate(starts_[lo]))), w_[lo]);
    }

    /// Partition over the grid: genuine single steps are split into 2^splits
    /// pieces, skipped tail regions stay whole; tags are left endpoints, so
    /// every step's first tag is its jump point.
    TaggedPartition partition(int splits) const {
        std::vector<double> pts;
        const std::uint64_t q = std::uint64_t{1} << splits;
        for (size_t i = 0; i + 1 < starts_.size(); ++i) {
            const double p = starts_[i], r = starts_[i + 1];
            OrdinalIndex idx = A_.set.locate(p);
            bool wholeStep = false;
            if (!idx.top) {
                OrdinalIndex next = A_.set.successor(idx);
                const double sv = next.top ? A_.set.hi() : A_.set.value(next);
                wholeStep = sv == r;
            }
            if (wholeStep) {
                for (std::uint64_t j = 0; j < q; ++j)
                    pts.push_back(p + (r - p) * static_cast<double>(j) / static_cast<double>(q));
            } else {
                pts.push_back(p);  // tail region: one interval, tag at the jump
            }
        }
        pts.push_back(starts_.back());
        return TaggedPartition::fromPoints(std::move(pts));
    }

private:
    StepMapping A_;
    std::vector<double> starts_;
    std::vector<Element> w_;
};

/// Indefinite step product integral W(t) = exp((t-gamma) z_gamma) *
/// prod_{alpha < gamma} exp((S(alpha)-alpha) z_alpha), gamma the step of t.
/// Values are cached; refinement sweeps revisit the same points.
class StepIndefiniteProduct {
public:
    StepIndefiniteProduct(StepMapping A, double tol, std::uint64_t budgetPerPoint = 200000)
        : A_(std::move(A)), fam_(expGapFamily(A_)), tol_(tol), budget_(budgetPerPoint) {}

    Element operator()(double t) const {
        auto it = cache_.find(t);
        if (it != cache_.end()) return it->second;
        const OrdinalIndex gamma = A_.set.locate(t);
        const double gv = A_.set.value(gamma);
        Element w = partialProductBelow(fam_, gv, tol_, budget_).value;
        if (!gamma.top && t > gv) w = mul(expm(scale(t - gv, A_.values(gamma))), w);
        if (gamma.top) w = mul(fam_.gen(gamma), w);
        cache_.emplace(t, w);
        return w;
    }

    const StepMapping& mapping() const { return A_; }

private:
    StepMapping A_;
    Family fam_;
    double tol_;
    std::uint64_t budget_;
    mutable std::map<double, Element> cache_;
};

}  // namespace prodint
