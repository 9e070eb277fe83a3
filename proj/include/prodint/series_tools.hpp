#pragma once

// Tail diagnostics for slowly settling accumulation sequences. A TailTracker
// watches the partial values of one series (or one telescoping product) and
// offers three exits:
//   * settle      -- recent increments fell below the granted budget,
//   * limit guess -- an extrapolated limit whose internal error estimate and
//                    cross-window consistency check both clear the target,
//   * divergence  -- for nonnegative scalar accumulations, snapshot-block
//                    increments that refuse to decay.
// Oscillating tails are closed by repeated adjacent averaging of a trailing
// window; any smooth one-signed residue that averaging leaves behind is
// removed by a geometric Shanks pass over the per-snapshot averaged values.
// Monotone tails go through the Shanks pass directly. A guess is reported
// only when re-running the extrapolation without the newest snapshot lands
// in the same place, so sequences drifting on a sub-polynomial scale (the
// ratio between snapshot increments creeping toward 1) fail to close and
// fall back to honest truncation.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace prodint {

using Payload = std::vector<double>;

namespace detail {

inline double payloadNorm(const Payload& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double payloadDot(const Payload& x, const Payload& y) {
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline Payload payloadSub(const Payload& x, const Payload& y) {
    Payload r = x;
    for (size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
    return r;
}

inline Payload payloadAxpy(const Payload& x, double c, const Payload& d) {
    Payload r = x;
    for (size_t i = 0; i < r.size(); ++i) r[i] += c * d[i];
    return r;
}

struct GeomEstimate {
    Payload value;
    double err = 0.0;
};

// Iterated vector Shanks on a geometrically indexed sequence y_j -> S with
// y_j ~ S + c rho^j. Entries too old to follow the asymptotic model poison
// the increment ratios, so each sweep drops leading entries until the
// trailing run is clean. The error estimate combines the last sweep
// correction with the shift produced by dropping the newest entry; both
// explode when the ratios drift, which is exactly when the model must not
// be trusted.
inline std::optional<GeomEstimate> geomExtrapolate(const std::vector<Payload>& seq0) {
    auto sweepTail = [](std::vector<Payload>& seq) -> bool {
        while (seq.size() >= 3) {
            std::vector<Payload> out;
            bool clean = true;
            for (size_t j = 0; j + 2 < seq.size(); ++j) {
                const Payload d0 = payloadSub(seq[j + 1], seq[j]);
                const Payload d1 = payloadSub(seq[j + 2], seq[j + 1]);
                const double denom = payloadDot(d0, d0);
                const double r = denom == 0.0 ? -1.0 : payloadDot(d1, d0) / denom;
                if (!(r > 0.0005 && r < 0.985)) { clean = false; break; }
                out.push_back(payloadAxpy(seq[j + 2], r / (1.0 - r), d1));
            }
            if (clean) {
                seq = std::move(out);
                return true;
            }
            seq.erase(seq.begin());  // shed the oldest entry and retry
        }
        return false;
    };
    auto runSweeps = [&](std::vector<Payload> seq) -> std::optional<GeomEstimate> {
        if (seq.size() > 12) seq.erase(seq.begin(), seq.end() - 12);
        double lastChange = -1.0;
        for (int sweep = 0; sweep < 5 && seq.size() >= 3; ++sweep) {
            const Payload prev = seq.back();
            if (!sweepTail(seq)) break;
            lastChange = payloadNorm(payloadSub(seq.back(), prev));
        }
        if (lastChange < 0.0) return std::nullopt;
        return GeomEstimate{seq.back(), lastChange};
    };
    if (seq0.size() < 4) return std::nullopt;
    auto now = runSweeps(seq0);
    if (!now) return std::nullopt;
    auto before = runSweeps({seq0.begin(), seq0.end() - 1});
    if (!before) return std::nullopt;
    const double cross = payloadNorm(payloadSub(now->value, before->value));
    return GeomEstimate{now->value, now->err + cross};
}

}  // namespace detail

struct TailEstimate {
    Payload value;
    double err = 0.0;
};

class TailTracker {
public:
    explicit TailTracker(size_t dim) : dim_(dim) {}

    static constexpr size_t kWindow = 48;
    static constexpr std::uint64_t kSnapshotBase = 24;

    void push(const Payload& partial, double increment) { push(partial.data(), partial.size(), increment); }

    void push(const double* data, size_t n, double increment) {
        ++count_;
        if (slots_.size() < kWindow) {
            slots_.emplace_back(data, data + n);
        } else {
            slots_[head_].assign(data, data + n);
            head_ = (head_ + 1) % kWindow;
        }
        incs_[incHead_] = increment;
        incHead_ = (incHead_ + 1) % kIncs;
        if (incCount_ < kIncs) ++incCount_;
        maxInc_ = std::max(maxInc_, increment);
        if (count_ == nextSnapshot_) {
            snapshots_.emplace_back(data, data + n);
            if (slots_.size() == kWindow) {
                const TailEstimate apex = averageWindow(orderedWindow());
                apexes_.push_back(apex.value);
                apexErrs_.push_back(apex.err);
                apexCounts_.push_back(count_);
            }
            nextSnapshot_ *= 2;
        }
    }

    std::uint64_t count() const { return count_; }
    std::uint64_t nextSnapshotAt() const { return nextSnapshot_; }
    double maxIncrement() const { return maxInc_; }

    /// Truncation rule: the newest increment is under the budget, the last
    /// three increments decrease, and the decay is decisively geometric --
    /// power-law tails where the next term says nothing about the remaining
    /// mass are left for the extrapolating exit.
    bool settled(double budget) const {
        if (incCount_ < 4) return false;
        const double i1 = incAt(1), i2 = incAt(2), i3 = incAt(3), i0 = incAt(0);
        if (!(i0 < budget)) return false;
        if (i0 == 0.0 && i1 == 0.0 && i2 == 0.0) return true;
        if (!(i0 < i1 && i1 < i2 && i2 < i3)) return false;
        return i0 <= 0.55 * i2;
    }

    double lastIncrement() const { return incCount_ == 0 ? 0.0 : incAt(0); }

    /// Loose bound used when a tail is abandoned: the worst recent movement,
    /// stretched by the step count when the movement is one-directional.
    double roughErrorBound() const {
        double m = lastIncrement();
        for (size_t i = 0; i < incCount_; ++i) m = std::max(m, incAt(i));
        const size_t w = slots_.size();
        if (w >= 4) {
            bool oneWay = true;
            for (size_t i = w - 3; i + 1 < w && oneWay; ++i) {
                const Payload d0 = detail::payloadSub(winAt(i), winAt(i - 1));
                const Payload d1 = detail::payloadSub(winAt(i + 1), winAt(i));
                if (detail::payloadDot(d0, d1) < 0.0) oneWay = false;
            }
            if (oneWay) m = std::max(m, lastIncrement() * static_cast<double>(count_));
        }
        return m;
    }

    /// Extrapolated limit with a cleared error target, or nothing.
    std::optional<TailEstimate> tryLimit(double target) const {
        if (auto est = tryOscillating(target)) return est;
        if (auto est = tryMonotone(target)) return est;
        return std::nullopt;
    }

    /// Snapshot-block growth certificate for nonnegative accumulations: the
    /// increments between the latest snapshots stay at or above half of the
    /// largest earlier block.
    bool divergenceWitness() const {
        if (snapshots_.size() < 5) return false;
        std::vector<double> blocks;
        for (size_t j = 1; j < snapshots_.size(); ++j)
            blocks.push_back(detail::payloadNorm(detail::payloadSub(snapshots_[j], snapshots_[j - 1])));
        const size_t n = blocks.size();
        double head = 0.0;
        for (size_t j = 0; j + 3 < n; ++j) head = std::max(head, blocks[j]);
        if (head <= 0.0) return false;
        return blocks[n - 1] >= 0.5 * head && blocks[n - 2] >= 0.5 * head && blocks[n - 3] >= 0.45 * head;
    }

    std::string blockCertificate() const {
        std::string s = "snapshot-block increments:";
        for (size_t j = 1; j < snapshots_.size(); ++j) {
            s += " ";
            s += std::to_string(detail::payloadNorm(detail::payloadSub(snapshots_[j], snapshots_[j - 1])));
        }
        return s;
    }

private:
    // Repeated adjacent averaging; for direction-alternating tails with a
    // smoothly decaying envelope the apex converges to the limit of the
    // oscillation geometrically in the window width.
    static TailEstimate averageWindow(const std::vector<Payload>& win) {
        std::vector<Payload> row = win;
        double lastStep = detail::payloadNorm(detail::payloadSub(row.back(), row[row.size() - 2]));
        while (row.size() > 1) {
            if (row.size() == 2) lastStep = detail::payloadNorm(detail::payloadSub(row[1], row[0]));
            for (size_t i = 0; i + 1 < row.size(); ++i)
                row[i] = detail::payloadAxpy(row[i], 0.5, detail::payloadSub(row[i + 1], row[i]));
            row.pop_back();
        }
        return TailEstimate{row[0], lastStep};
    }

    bool oscillating() const {
        const size_t n = slots_.size();
        if (n < 14) return false;
        double prevNorm = -1.0;
        for (size_t i = n - 11; i + 1 < n; ++i) {
            const Payload d0 = detail::payloadSub(winAt(i), winAt(i - 1));
            const Payload d1 = detail::payloadSub(winAt(i + 1), winAt(i));
            const double n0 = detail::payloadNorm(d0), n1 = detail::payloadNorm(d1);
            if (n0 == 0.0 || n1 == 0.0) return false;
            if (detail::payloadDot(d0, d1) >= 0.0) return false;
            if (prevNorm > 0.0 && n1 > 1.3 * prevNorm) return false;
            prevNorm = n1;
        }
        return true;
    }

    std::optional<TailEstimate> tryOscillating(double target) const {
        if (slots_.size() < kWindow || !oscillating()) return std::nullopt;
        // stage two: remove the one-signed residue the averaging leaves
        if (apexes_.size() >= 4) {
            if (auto est = detail::geomExtrapolate(apexes_)) {
                const double apexErr = std::max(apexErrs_[apexErrs_.size() - 1],
                                                apexErrs_[apexErrs_.size() - 2]);
                const double err = est->err + apexErr;
                if (err <= target) return TailEstimate{est->value, err};
            }
        }
        // plain apex: good when the averaging alone already converged; the
        // cross-check partner must be markedly older than the current window
        TailEstimate now = averageWindow(orderedWindow());
        const Payload* oldApex = nullptr;
        for (size_t i = 0; i < apexes_.size(); ++i)
            if (apexCounts_[i] * 10 <= count_ * 7) oldApex = &apexes_[i];
        double err;
        if (oldApex) {
            err = now.err + detail::payloadNorm(detail::payloadSub(now.value, *oldApex));
        } else if (count_ <= kWindow + 8) {
            err = now.err;  // the whole tail fits in one window
        } else {
            return std::nullopt;
        }
        if (err <= target) return TailEstimate{now.value, err};
        return std::nullopt;
    }

    std::optional<TailEstimate> tryMonotone(double target) const {
        if (snapshots_.size() < 4 || slots_.size() < 4) return std::nullopt;
        const size_t n = slots_.size();
        for (size_t i = n - 3; i + 1 < n; ++i) {
            const Payload d0 = detail::payloadSub(winAt(i), winAt(i - 1));
            const Payload d1 = detail::payloadSub(winAt(i + 1), winAt(i));
            if (detail::payloadDot(d0, d1) < 0.0) return std::nullopt;
        }
        if (auto est = detail::geomExtrapolate(snapshots_)) {
            if (est->err <= target) return TailEstimate{est->value, est->err};
        }
        return std::nullopt;
    }

    // logical index: 0 = oldest retained partial
    const Payload& winAt(size_t i) const {
        return slots_.size() < kWindow ? slots_[i] : slots_[(head_ + i) % kWindow];
    }

    std::vector<Payload> orderedWindow() const {
        std::vector<Payload> out;
        out.reserve(slots_.size());
        for (size_t i = 0; i < slots_.size(); ++i) out.push_back(winAt(i));
        return out;
    }

    // logical index: 0 = newest increment
    double incAt(size_t back) const {
        return incs_[(incHead_ + kIncs - 1 - back % kIncs) % kIncs];
    }

    static constexpr size_t kIncs = 8;

    size_t dim_;
    std::vector<Payload> slots_;
    size_t head_ = 0;
    double incs_[kIncs] = {};
    size_t incHead_ = 0;
    size_t incCount_ = 0;
    std::vector<Payload> snapshots_;
    std::vector<Payload> apexes_;
    std::vector<double> apexErrs_;
    std::vector<std::uint64_t> apexCounts_;
    std::uint64_t count_ = 0;
    std::uint64_t nextSnapshot_ = kSnapshotBase;
    double maxInc_ = 0.0;
};

}  // namespace prodint
