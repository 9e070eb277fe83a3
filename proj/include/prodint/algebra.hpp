#pragma once

// Concrete unital normed algebras: real scalars, dense square matrices with
// the operator infinity-norm, and truncated diagonal sequences with the sup
// norm. All three have a unit of norm exactly 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace prodint {

enum class Kind { Scalar, Matrix, Diag };

struct AlgebraError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct KindMismatch : AlgebraError {
    KindMismatch() : AlgebraError("algebra: operands have different kinds") {}
};
struct SingularElement : AlgebraError {
    SingularElement() : AlgebraError("algebra: element is not invertible") {}
};
struct OutOfDomain : AlgebraError {
    explicit OutOfDomain(const std::string& what) : AlgebraError(what) {}
};
struct NonFiniteData : AlgebraError {
    NonFiniteData() : AlgebraError("algebra: non-finite entry") {}
};

class Element {
public:
    Element() = default;

    static Element scalar(double v) { return Element(Kind::Scalar, 1, {v}); }

    static Element matrix(int n, std::vector<double> rowMajor) {
        if (n < 1 || rowMajor.size() != static_cast<size_t>(n) * n)
            throw AlgebraError("algebra: bad matrix payload");
        return Element(Kind::Matrix, n, std::move(rowMajor));
    }

    static Element diag(int n, std::vector<double> entries) {
        if (n < 1 || entries.size() != static_cast<size_t>(n))
            throw AlgebraError("algebra: bad diagonal payload");
        return Element(Kind::Diag, n, std::move(entries));
    }

    static Element identity(Kind k, int n = 1) {
        switch (k) {
        case Kind::Scalar: return scalar(1.0);
        case Kind::Diag:   return Element(Kind::Diag, n, std::vector<double>(n, 1.0));
        case Kind::Matrix: {
            std::vector<double> d(static_cast<size_t>(n) * n, 0.0);
            for (int i = 0; i < n; ++i) d[static_cast<size_t>(i) * n + i] = 1.0;
            return Element(Kind::Matrix, n, std::move(d));
        }
        }
        throw AlgebraError("algebra: bad kind");
    }

    static Element zero(Kind k, int n = 1) {
        switch (k) {
        case Kind::Scalar: return scalar(0.0);
        case Kind::Diag:   return Element(Kind::Diag, n, std::vector<double>(n, 0.0));
        case Kind::Matrix: return Element(Kind::Matrix, n, std::vector<double>(static_cast<size_t>(n) * n, 0.0));
        }
        throw AlgebraError("algebra: bad kind");
    }

    Kind kind() const { return kind_; }
    int dim() const { return n_; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    double& at(int i, int j) { return data_[static_cast<size_t>(i) * n_ + j]; }
    double at(int i, int j) const { return data_[static_cast<size_t>(i) * n_ + j]; }

    bool sameShape(const Element& o) const { return kind_ == o.kind_ && n_ == o.n_; }

    bool allFinite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    Element(Kind k, int n, std::vector<double> d) : kind_(k), n_(n), data_(std::move(d)) {}

    Kind kind_ = Kind::Scalar;
    int n_ = 1;
    std::vector<double> data_{0.0};
};

inline void requireSameKind(const Element& x, const Element& y) {
    if (!x.sameShape(y)) throw KindMismatch();
}

inline Element add(const Element& x, const Element& y) {
    requireSameKind(x, y);
    Element r = x;
    for (size_t i = 0; i < r.data().size(); ++i) r.data()[i] += y.data()[i];
    return r;
}

inline Element sub(const Element& x, const Element& y) {
    requireSameKind(x, y);
    Element r = x;
    for (size_t i = 0; i < r.data().size(); ++i) r.data()[i] -= y.data()[i];
    return r;
}

inline Element scale(double c, const Element& x) {
    Element r = x;
    for (double& v : r.data()) v *= c;
    return r;
}

inline Element mul(const Element& x, const Element& y) {
    requireSameKind(x, y);
    switch (x.kind()) {
    case Kind::Scalar:
        return Element::scalar(x.data()[0] * y.data()[0]);
    case Kind::Diag: {
        Element r = x;
        for (size_t i = 0; i < r.data().size(); ++i) r.data()[i] *= y.data()[i];
        return r;
    }
    case Kind::Matrix: {
        const int n = x.dim();
        Element r = Element::zero(Kind::Matrix, n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                const double xik = x.at(i, k);
                if (xik == 0.0) continue;
                for (int j = 0; j < n; ++j) r.at(i, j) += xik * y.at(k, j);
            }
        return r;
    }
    }
    throw AlgebraError("algebra: bad kind");
}

inline Element operator+(const Element& x, const Element& y) { return add(x, y); }
inline Element operator-(const Element& x, const Element& y) { return sub(x, y); }
inline Element operator*(const Element& x, const Element& y) { return mul(x, y); }
inline Element operator*(double c, const Element& x) { return scale(c, x); }

/// Submultiplicative norm with norm(identity) = 1: |x| for scalars, maximum
/// absolute row sum for matrices, sup norm for diagonal sequences.
inline double norm(const Element& x) {
    switch (x.kind()) {
    case Kind::Scalar:
        return std::abs(x.data()[0]);
    case Kind::Diag: {
        double m = 0.0;
        for (double v : x.data()) m = std::max(m, std::abs(v));
        return m;
    }
    case Kind::Matrix: {
        const int n = x.dim();
        double m = 0.0;
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) row += std::abs(x.at(i, j));
            m = std::max(m, row);
        }
        return m;
    }
    }
    throw AlgebraError("algebra: bad kind");
}

inline double dist(const Element& x, const Element& y) { return norm(sub(x, y)); }

/// norm(x - I) without forming the difference.
inline double distFromIdentity(const Element& x) {
    switch (x.kind()) {
    case Kind::Scalar:
        return std::abs(x.data()[0] - 1.0);
    case Kind::Diag: {
        double m = 0.0;
        for (double v : x.data()) m = std::max(m, std::abs(v - 1.0));
        return m;
    }
    case Kind::Matrix: {
        const int n = x.dim();
        double m = 0.0;
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) row += std::abs(x.at(i, j) - (i == j ? 1.0 : 0.0));
            m = std::max(m, row);
        }
        return m;
    }
    }
    throw AlgebraError("algebra: bad kind");
}

inline void addInto(Element& acc, const Element& term) {
    requireSameKind(acc, term);
    for (size_t i = 0; i < acc.data().size(); ++i) acc.data()[i] += term.data()[i];
}

/// acc <- term * acc, with a caller-provided scratch to avoid reallocation.
inline void leftMulInto(Element& acc, const Element& term, Element& scratch) {
    requireSameKind(acc, term);
    switch (acc.kind()) {
    case Kind::Scalar:
        acc.data()[0] = term.data()[0] * acc.data()[0];
        return;
    case Kind::Diag:
        for (size_t i = 0; i < acc.data().size(); ++i) acc.data()[i] *= term.data()[i];
        return;
    case Kind::Matrix: {
        const int n = acc.dim();
        if (!scratch.sameShape(acc)) scratch = Element::zero(acc.kind(), n);
        for (double& v : scratch.data()) v = 0.0;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                const double tik = term.at(i, k);
                if (tik == 0.0) continue;
                for (int j = 0; j < n; ++j) scratch.at(i, j) += tik * acc.at(k, j);
            }
        std::swap(acc.data(), scratch.data());
        return;
    }
    }
    throw AlgebraError("algebra: bad kind");
}

/// Gaussian elimination with partial pivoting; a pivot below
/// 1e-13 * norm(x) reports the element as singular.
inline Element inverse(const Element& x) {
    switch (x.kind()) {
    case Kind::Scalar: {
        const double v = x.data()[0];
        if (std::abs(v) < 1e-13 * std::max(1.0, std::abs(v))) throw SingularElement();
        if (v == 0.0) throw SingularElement();
        return Element::scalar(1.0 / v);
    }
    case Kind::Diag: {
        const double scale = norm(x);
        Element r = x;
        for (double& v : r.data()) {
            if (std::abs(v) < 1e-13 * scale || v == 0.0) throw SingularElement();
            v = 1.0 / v;
        }
        return r;
    }
    case Kind::Matrix: {
        const int n = x.dim();
        const double threshold = 1e-13 * std::max(norm(x), 1e-300);
        std::vector<double> a = x.data();
        Element inv = Element::identity(Kind::Matrix, n);
        std::vector<double>& b = inv.data();
        for (int col = 0; col < n; ++col) {
            int piv = col;
            double best = std::abs(a[static_cast<size_t>(col) * n + col]);
            for (int r = col + 1; r < n; ++r) {
                const double v = std::abs(a[static_cast<size_t>(r) * n + col]);
                if (v > best) { best = v; piv = r; }
            }
            if (best < threshold) throw SingularElement();
            if (piv != col) {
                for (int j = 0; j < n; ++j) {
                    std::swap(a[static_cast<size_t>(piv) * n + j], a[static_cast<size_t>(col) * n + j]);
                    std::swap(b[static_cast<size_t>(piv) * n + j], b[static_cast<size_t>(col) * n + j]);
                }
            }
            const double d = a[static_cast<size_t>(col) * n + col];
            for (int j = 0; j < n; ++j) {
                a[static_cast<size_t>(col) * n + j] /= d;
                b[static_cast<size_t>(col) * n + j] /= d;
            }
            for (int r = 0; r < n; ++r) {
                if (r == col) continue;
                const double f = a[static_cast<size_t>(r) * n + col];
                if (f == 0.0) continue;
                for (int j = 0; j < n; ++j) {
                    a[static_cast<size_t>(r) * n + j] -= f * a[static_cast<size_t>(col) * n + j];
                    b[static_cast<size_t>(r) * n + j] -= f * b[static_cast<size_t>(col) * n + j];
                }
            }
        }
        return inv;
    }
    }
    throw AlgebraError("algebra: bad kind");
}

/// exp x = sum x^k / k!, evaluated by scaling-and-squaring: scale so the
/// argument norm is at most 1/2, sum the series until the term falls below
/// 1e-18 of the running value, then square back.
inline Element expm(const Element& x) {
    if (!x.allFinite()) throw NonFiniteData();
    int s = 0;
    double nx = norm(x);
    while (nx > 0.5) { nx *= 0.5; ++s; }
    const Element xs = scale(std::ldexp(1.0, -s), x);
    Element term = Element::identity(x.kind(), x.dim());
    Element sum = term;
    for (int k = 1; k <= 64; ++k) {
        term = scale(1.0 / k, mul(xs, term));
        sum = add(sum, term);
        if (norm(term) < 1e-18 * std::max(1.0, norm(sum))) break;
    }
    for (int i = 0; i < s; ++i) sum = mul(sum, sum);
    return sum;
}

/// log x = sum (-1)^{k-1} (x-I)^k / k, valid for norm(x-I) < 1.
inline Element logm(const Element& x) {
    const Element u = sub(x, Element::identity(x.kind(), x.dim()));
    const double r = norm(u);
    if (!(r < 1.0))
        throw OutOfDomain("algebra: log requires norm(x - I) < 1, got " + std::to_string(r));
    Element power = u;
    Element sum = u;
    double sign = -1.0;
    for (int k = 2; k <= 4000000; ++k) {
        power = mul(power, u);
        const Element term = scale(sign / k, power);
        sum = add(sum, term);
        sign = -sign;
        if (norm(power) / k < 1e-18 * std::max(1.0, norm(sum))) break;
    }
    return sum;
}

inline bool isInvertible(const Element& x) {
    try {
        (void)inverse(x);
        return true;
    } catch (const SingularElement&) {
        return false;
    }
}

}  // namespace prodint
