#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "algebra.hpp"

namespace prodint {

/// Finite tagged partition a = t_0 < ... < t_m = b with tags
/// xi_i in [t_{i-1}, t_i].
struct TaggedPartition {
    std::vector<double> points;
    std::vector<double> tags;

    size_t intervals() const { return tags.size(); }

    void validate() const {
        if (points.size() < 2 || tags.size() + 1 != points.size())
            throw std::invalid_argument("partition: need m>=1 intervals with one tag each");
        for (size_t i = 0; i + 1 < points.size(); ++i) {
            if (!(points[i] < points[i + 1]))
                throw std::invalid_argument("partition: points must increase");
            if (!(points[i] <= tags[i] && tags[i] <= points[i + 1]))
                throw std::invalid_argument("partition: tag outside its interval");
        }
    }

    static TaggedPartition uniform(double a, double b, std::uint64_t m, bool midpointTags = false) {
        TaggedPartition d;
        d.points.reserve(m + 1);
        for (std::uint64_t i = 0; i <= m; ++i)
            d.points.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(m));
        d.points.back() = b;
        d.tags.reserve(m);
        for (std::uint64_t i = 0; i < m; ++i)
            d.tags.push_back(midpointTags ? 0.5 * (d.points[i] + d.points[i + 1]) : d.points[i]);
        return d;
    }

    static TaggedPartition fromPoints(std::vector<double> pts, bool midpointTags = false) {
        TaggedPartition d;
        d.points = std::move(pts);
        for (size_t i = 0; i + 1 < d.points.size(); ++i)
            d.tags.push_back(midpointTags ? 0.5 * (d.points[i] + d.points[i + 1]) : d.points[i]);
        d.validate();
        return d;
    }
};

/// Refinement-sweep outcome: one value per level plus the deltas between
/// consecutive levels. Converged requires the last two deltas under the
/// tolerance and an invertible final value.
struct ConvergenceReport {
    struct Row {
        std::uint64_t m = 0;
        Element value;
        double delta = 0.0;  // distance to the previous level's value
    };
    std::vector<Row> levels;
    bool converged = false;
    double tol = 0.0;

    const Element& finalValue() const { return levels.back().value; }

    /// One Richardson step on the last two levels, available when the deltas
    /// shrink like 1/m (each doubling roughly halves the distance).
    std::optional<Element> extrapolated() const {
        if (levels.size() < 3) return std::nullopt;
        const double d1 = levels[levels.size() - 1].delta;
        const double d2 = levels[levels.size() - 2].delta;
        if (d2 <= 0.0 || d1 <= 0.0) return levels.back().value;
        const double ratio = d1 / d2;
        if (ratio < 0.3 || ratio > 0.7) return std::nullopt;
        const Element& vFine = levels[levels.size() - 1].value;
        const Element& vCoarse = levels[levels.size() - 2].value;
        return add(vFine, scale(ratio / (1.0 - ratio), sub(vFine, vCoarse)));
    }
};

}  // namespace prodint
