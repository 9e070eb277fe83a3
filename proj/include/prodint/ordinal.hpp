#pragma once

// Encodable well-ordered subsets of [a,b]: finite point lists, the geometric
// ladder b - 2^{-n}(b-a), and dyadic towers obtained by repeating the ladder
// construction inside every step. A tower of depth m indexes its members by
// m+1 natural coordinates, ordered lexicographically; the point b is always a
// member and carries the distinguished "top" index.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace prodint {

struct OrdinalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidIndex : OrdinalError {
    InvalidIndex() : OrdinalError("ordinal: index not valid for this set") {}
};
struct NoSuccessor : OrdinalError {
    NoSuccessor() : OrdinalError("ordinal: the top has no successor") {}
};
struct OutOfInterval : OrdinalError {
    OutOfInterval() : OrdinalError("ordinal: point outside [a,b]") {}
};

enum class SetType { Finite, Ladder, Tower };

struct OrdinalIndex {
    std::vector<std::uint64_t> coords;
    bool top = false;

    static OrdinalIndex topIndex() { return OrdinalIndex{{}, true}; }
    static OrdinalIndex of(std::vector<std::uint64_t> c) { return OrdinalIndex{std::move(c), false}; }

    bool operator==(const OrdinalIndex& o) const { return top == o.top && coords == o.coords; }
};

class WellOrderedSet {
public:
    static WellOrderedSet finite(std::vector<double> points) {
        if (points.size() < 2) throw OrdinalError("ordinal: finite set needs at least {a, b}");
        for (size_t i = 1; i < points.size(); ++i)
            if (!(points[i - 1] < points[i])) throw OrdinalError("ordinal: points must increase");
        WellOrderedSet s;
        s.type_ = SetType::Finite;
        s.points_ = std::move(points);
        s.a_ = s.points_.front();
        s.b_ = s.points_.back();
        return s;
    }

    static WellOrderedSet ladder(double a, double b) { return towerLike(SetType::Ladder, 0, a, b); }

    static WellOrderedSet tower(int depth, double a, double b) {
        if (depth < 0) throw OrdinalError("ordinal: depth must be >= 0");
        return towerLike(SetType::Tower, depth, a, b);
    }

    SetType type() const { return type_; }
    double lo() const { return a_; }
    double hi() const { return b_; }
    int depth() const { return depth_; }
    const std::vector<double>& finitePoints() const { return points_; }

    /// Number of coordinates an interior index carries.
    size_t coordCount() const {
        return type_ == SetType::Finite ? 1 : static_cast<size_t>(depth_) + 1;
    }

    bool validIndex(const OrdinalIndex& idx) const {
        if (idx.top) return true;
        if (idx.coords.size() != coordCount()) return false;
        if (type_ == SetType::Finite) return idx.coords[0] + 1 < points_.size();
        return true;
    }

    double value(const OrdinalIndex& idx) const {
        if (!validIndex(idx)) throw InvalidIndex();
        if (idx.top) return b_;
        if (type_ == SetType::Finite) return points_[idx.coords[0]];
        double L = a_, R = b_, x = a_;
        for (std::uint64_t c : idx.coords) {
            const double len = R - L;
            x = R - std::ldexp(len, -static_cast<int>(std::min<std::uint64_t>(c, 4000)));
            const double nx = R - std::ldexp(len, -static_cast<int>(std::min<std::uint64_t>(c + 1, 4000)));
            L = x;
            R = nx;
        }
        return x;
    }

    OrdinalIndex successor(const OrdinalIndex& idx) const {
        if (!validIndex(idx)) throw InvalidIndex();
        if (idx.top) throw NoSuccessor();
        if (type_ == SetType::Finite) {
            if (idx.coords[0] + 2 == points_.size()) return OrdinalIndex::topIndex();
            return OrdinalIndex::of({idx.coords[0] + 1});
        }
        OrdinalIndex s = idx;
        ++s.coords.back();
        return s;
    }

    /// The index whose successor is idx, when idx is itself a successor.
    /// Limit elements and the minimum have no predecessor.
    bool hasPredecessor(const OrdinalIndex& idx) const {
        if (!validIndex(idx)) throw InvalidIndex();
        if (idx.top) return type_ == SetType::Finite;
        if (type_ == SetType::Finite) return idx.coords[0] > 0;
        return idx.coords.back() > 0;
    }

    OrdinalIndex predecessor(const OrdinalIndex& idx) const {
        if (!hasPredecessor(idx)) throw OrdinalError("ordinal: no predecessor");
        if (idx.top) return OrdinalIndex::of({points_.size() - 2});
        OrdinalIndex p = idx;
        --p.coords.back();
        return p;
    }

    /// value(S(idx)) - value(idx), computed from the interval recursion so
    /// it stays exact at depths where the point values themselves collide
    /// in double precision.
    double gap(const OrdinalIndex& idx) const {
        if (idx.top) throw NoSuccessor();
        if (!validIndex(idx)) throw InvalidIndex();
        if (type_ == SetType::Finite) {
            const size_t i = idx.coords[0];
            return points_[i + 1] - points_[i];
        }
        double len = b_ - a_;
        for (size_t i = 0; i + 1 < idx.coords.size(); ++i)
            len = std::ldexp(len, -static_cast<int>(std::min<std::uint64_t>(idx.coords[i] + 1, 4000)));
        return std::ldexp(len, -static_cast<int>(std::min<std::uint64_t>(idx.coords.back() + 1, 4000)));
    }

    /// True iff the member is neither the minimum nor a successor. Tower
    /// interior points are limits exactly when the last coordinate is 0 and
    /// not all coordinates vanish; the top of a ladder or tower is a limit.
    bool isLimit(const OrdinalIndex& idx) const {
        if (!validIndex(idx)) throw InvalidIndex();
        if (type_ == SetType::Finite) return false;
        if (idx.top) return true;
        if (idx.coords.back() != 0) return false;
        for (std::uint64_t c : idx.coords)
            if (c != 0) return true;
        return false;
    }

    /// Index of the step containing t: value(idx) <= t < value(S(idx)) for
    /// t in [a,b), the top for t == b.
    OrdinalIndex locate(double t) const {
        if (!(t >= a_ && t <= b_)) throw OutOfInterval();
        if (t == b_) return OrdinalIndex::topIndex();
        if (type_ == SetType::Finite) {
            size_t lo = 0, hi = points_.size() - 1;
            while (lo + 1 < hi) {
                const size_t mid = (lo + hi) / 2;
                if (points_[mid] <= t) lo = mid; else hi = mid;
            }
            return OrdinalIndex::of({lo});
        }
        std::vector<std::uint64_t> coords;
        coords.reserve(coordCount());
        double L = a_, R = b_;
        for (size_t lev = 0; lev < coordCount(); ++lev) {
            const double len = R - L;
            std::uint64_t n = 0;
            if (t > L && len > 0) {
                const double ratio = (R - t) / len;  // in (0, 1]
                n = static_cast<std::uint64_t>(std::max(0.0, std::floor(-std::log2(ratio))));
                // float-guard the closed-form guess
                while (n > 0 && R - std::ldexp(len, -static_cast<int>(n)) > t) --n;
                while (R - std::ldexp(len, -static_cast<int>(n + 1)) <= t && n < 4000) ++n;
            }
            const double x = R - std::ldexp(len, -static_cast<int>(n));
            const double nx = R - std::ldexp(len, -static_cast<int>(n + 1));
            coords.push_back(n);
            L = x;
            R = nx;
        }
        return OrdinalIndex::of(std::move(coords));
    }

    struct Prefix {
        std::vector<OrdinalIndex> indices;
        bool truncated = false;
    };

    /// First members strictly below cutoff in increasing order, at most
    /// budget of them. Enumeration follows the successor chain from the
    /// minimum, so it stops short of the first limit element it meets.
    Prefix enumeratePrefix(double cutoff, std::uint64_t budget) const {
        Prefix out;
        if (budget == 0) { out.truncated = true; return out; }
        OrdinalIndex idx = minIndex();
        while (!idx.top && value(idx) < cutoff) {
            if (out.indices.size() == budget) { out.truncated = true; return out; }
            out.indices.push_back(idx);
            OrdinalIndex next = successor(idx);
            if (!next.top && value(next) <= value(idx)) break;  // dyadic collision in double
            idx = next;
        }
        return out;
    }

    OrdinalIndex minIndex() const {
        if (type_ == SetType::Finite) return OrdinalIndex::of({0});
        return OrdinalIndex::of(std::vector<std::uint64_t>(coordCount(), 0));
    }

    bool operator==(const WellOrderedSet& o) const {
        return type_ == o.type_ && depth_ == o.depth_ && a_ == o.a_ && b_ == o.b_ && points_ == o.points_;
    }

private:
    static WellOrderedSet towerLike(SetType t, int depth, double a, double b) {
        if (!(a < b)) throw OrdinalError("ordinal: need a < b");
        WellOrderedSet s;
        s.type_ = t;
        s.depth_ = depth;
        s.a_ = a;
        s.b_ = b;
        return s;
    }

    SetType type_ = SetType::Ladder;
    int depth_ = 0;
    double a_ = 0.0, b_ = 1.0;
    std::vector<double> points_;
};

}  // namespace prodint
