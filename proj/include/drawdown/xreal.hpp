// Extended-exponent real: long double mantissa with a 64-bit binary exponent.
//
// Exponentials such as e^{y θ1(a c̄)} reach e^{10^5} at desk-scale rate caps;
// the closed forms are templated on the scalar so that the same code runs in
// plain double (small arguments) and in XReal (everything else).
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>

#include "drawdown/errors.hpp"

namespace drawdown {

class XReal {
public:
    constexpr XReal() = default;
    XReal(long double v) { set(v, 0); }  // NOLINT: implicit by design
    XReal(double v) { set(v, 0); }       // NOLINT
    XReal(int v) { set(v, 0); }          // NOLINT

    /// e^x for any finite x.
    static XReal exp(long double x) {
        constexpr long double ln2 = 0.693147180559945309417232121458176568L;
        if (!std::isfinite(x)) fail(ErrorKind::OverflowGuard, "non-finite exponent");
        const long double k = std::floor(x / ln2);
        const long double r = x - k * ln2;
        XReal out;
        out.set(std::exp(r), static_cast<std::int64_t>(k));
        return out;
    }

    long double mantissa() const { return m_; }
    std::int64_t exponent() const { return e_; }
    bool is_zero() const { return m_ == 0.0L; }
    int sign() const { return m_ > 0 ? 1 : (m_ < 0 ? -1 : 0); }

    /// Natural log of |x|.
    long double log_abs() const {
        constexpr long double ln2 = 0.693147180559945309417232121458176568L;
        return std::log(std::fabs(m_)) + static_cast<long double>(e_) * ln2;
    }

    long double to_long_double() const {
        if (m_ == 0) return 0;
        if (e_ > std::numeric_limits<long double>::max_exponent)
            return m_ > 0 ? std::numeric_limits<long double>::infinity()
                          : -std::numeric_limits<long double>::infinity();
        if (e_ < std::numeric_limits<long double>::min_exponent - 70) return 0;
        return std::ldexp(m_, static_cast<int>(e_));
    }

    /// Throws OverflowGuard when the value is outside the double range.
    double to_double() const {
        if (m_ == 0) return 0.0;
        if (e_ > std::numeric_limits<double>::max_exponent)
            fail(ErrorKind::OverflowGuard,
                 "value 2^" + std::to_string(e_) + " not representable as double");
        if (e_ < std::numeric_limits<double>::min_exponent - 60) return 0.0;
        return static_cast<double>(std::ldexp(m_, static_cast<int>(e_)));
    }

    XReal operator-() const {
        XReal r = *this;
        r.m_ = -r.m_;
        return r;
    }

    friend XReal operator*(const XReal& a, const XReal& b) {
        XReal r;
        r.set(a.m_ * b.m_, a.e_ + b.e_);
        return r;
    }

    friend XReal operator/(const XReal& a, const XReal& b) {
        if (b.m_ == 0) fail(ErrorKind::DomainError, "XReal division by zero");
        XReal r;
        r.set(a.m_ / b.m_, a.e_ - b.e_);
        return r;
    }

    friend XReal operator+(const XReal& a, const XReal& b) {
        if (a.m_ == 0) return b;
        if (b.m_ == 0) return a;
        constexpr std::int64_t gap = std::numeric_limits<long double>::digits + 4;
        const std::int64_t de = a.e_ - b.e_;
        if (de > gap) return a;
        if (de < -gap) return b;
        XReal r;
        if (de >= 0)
            r.set(a.m_ + std::ldexp(b.m_, static_cast<int>(-de)), a.e_);
        else
            r.set(std::ldexp(a.m_, static_cast<int>(de)) + b.m_, b.e_);
        return r;
    }

    friend XReal operator-(const XReal& a, const XReal& b) { return a + (-b); }

    XReal& operator+=(const XReal& o) { return *this = *this + o; }
    XReal& operator-=(const XReal& o) { return *this = *this - o; }
    XReal& operator*=(const XReal& o) { return *this = *this * o; }
    XReal& operator/=(const XReal& o) { return *this = *this / o; }

    friend int compare(const XReal& a, const XReal& b) { return (a - b).sign(); }
    friend bool operator<(const XReal& a, const XReal& b) { return compare(a, b) < 0; }
    friend bool operator>(const XReal& a, const XReal& b) { return compare(a, b) > 0; }
    friend bool operator<=(const XReal& a, const XReal& b) { return compare(a, b) <= 0; }
    friend bool operator>=(const XReal& a, const XReal& b) { return compare(a, b) >= 0; }
    friend bool operator==(const XReal& a, const XReal& b) { return compare(a, b) == 0; }

private:
    void set(long double m, std::int64_t e) {
        if (m == 0 || !std::isfinite(m)) {
            if (!std::isfinite(m)) fail(ErrorKind::OverflowGuard, "non-finite mantissa");
            m_ = 0;
            e_ = 0;
            return;
        }
        int k = 0;
        m_ = std::frexp(m, &k);
        e_ = e + k;
    }

    long double m_ = 0;
    std::int64_t e_ = 0;
};

inline XReal abs(const XReal& x) { return x.sign() < 0 ? -x : x; }

// Scalar shims so templated formulas work for both double and XReal.

template <class T>
T exp_as(double x);

/// Plain double exponential with the model-wide clamp at +700.
template <>
inline double exp_as<double>(double x) {
    if (x > 700.0)
        fail(ErrorKind::OverflowGuard, "exponent " + std::to_string(x) + " exceeds 700");
    return std::exp(x);
}

template <>
inline XReal exp_as<XReal>(double x) {
    return XReal::exp(x);
}

inline double to_double(double x) { return x; }
inline double to_double(const XReal& x) { return x.to_double(); }

inline int sign_of(double x) { return (x > 0) - (x < 0); }
inline int sign_of(const XReal& x) { return x.sign(); }

}  // namespace drawdown
