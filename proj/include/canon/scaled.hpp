#pragma once

// Extended-range scalars and 2x2 complex matrices.
//
// LogNumber keeps a sign and the natural log of the magnitude; it is used for
// polynomial coefficients whose magnitudes span thousands of decades.
// ScaledMatrix keeps a normalized 2x2 complex mantissa with one shared binary
// exponent, which is what transfer-matrix products need.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace canon {

using cplx = std::complex<double>;

class scale_overflow : public std::overflow_error {
public:
    scale_overflow() : std::overflow_error("scale overflow: binary exponent out of range") {}
};

struct LogNumber {
    int sign = 0;        // -1, 0, +1
    double logmag = 0.0; // ignored when sign == 0

    static constexpr LogNumber zero() { return {}; }
    static constexpr LogNumber one() { return {1, 0.0}; }

    static LogNumber from_real(double x)
    {
        if (x == 0.0 || std::isnan(x)) return {};
        return {x > 0 ? 1 : -1, std::log(std::abs(x))};
    }
    static LogNumber from_log(int sign, double logmag)
    {
        if (sign == 0 || logmag == -std::numeric_limits<double>::infinity()) return {};
        return {sign > 0 ? 1 : -1, logmag};
    }

    double to_real() const { return sign == 0 ? 0.0 : sign * std::exp(logmag); }
    bool is_zero() const { return sign == 0; }

    LogNumber operator-() const { return {-sign, logmag}; }
    friend LogNumber operator*(LogNumber a, LogNumber b)
    {
        if (a.sign == 0 || b.sign == 0) return {};
        return {a.sign * b.sign, a.logmag + b.logmag};
    }
    friend LogNumber operator/(LogNumber a, LogNumber b)
    {
        if (b.sign == 0) throw std::domain_error("LogNumber division by zero");
        if (a.sign == 0) return {};
        return {a.sign * b.sign, a.logmag - b.logmag};
    }
    friend bool operator==(const LogNumber& a, const LogNumber& b)
    {
        if (a.sign == 0 || b.sign == 0) return a.sign == b.sign;
        return a.sign == b.sign && a.logmag == b.logmag;
    }
};

// a + b by factoring out the larger magnitude.
inline LogNumber log_add(LogNumber a, LogNumber b)
{
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    if (a.logmag < b.logmag) std::swap(a, b);
    const double r = std::exp(b.logmag - a.logmag); // in (0, 1]
    if (a.sign == b.sign) return {a.sign, a.logmag + std::log1p(r)};
    if (r == 1.0) return {};
    return {a.sign, a.logmag + std::log1p(-r)};
}

inline LogNumber log_sub(LogNumber a, LogNumber b) { return log_add(a, -b); }

// Pairwise summation; rounding error grows with log2(n) instead of n.
inline LogNumber log_sum(std::span<const LogNumber> xs)
{
    if (xs.empty()) return {};
    if (xs.size() == 1) return xs[0];
    if (xs.size() == 2) return log_add(xs[0], xs[1]);
    const auto half = xs.size() / 2;
    return log_add(log_sum(xs.first(half)), log_sum(xs.subspan(half)));
}

// Complex value in log form: real and imaginary parts as LogNumbers.
struct LogComplex {
    LogNumber re;
    LogNumber im;

    // log of the modulus; -inf for zero
    double log_abs() const
    {
        if (re.is_zero() && im.is_zero()) return -std::numeric_limits<double>::infinity();
        if (re.is_zero()) return im.logmag;
        if (im.is_zero()) return re.logmag;
        const double hi = std::max(re.logmag, im.logmag);
        const double lo = std::min(re.logmag, im.logmag);
        return hi + 0.5 * std::log1p(std::exp(2.0 * (lo - hi)));
    }
    cplx to_complex() const { return {re.to_real(), im.to_real()}; }
};

namespace detail {

inline LogNumber scaled_to_log(double mantissa, std::int64_t exp2)
{
    if (mantissa == 0.0) return {};
    return {mantissa > 0 ? 1 : -1,
            std::log(std::abs(mantissa)) + static_cast<double>(exp2) * std::numbers::ln2};
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b)
{
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw scale_overflow();
    return r;
}

} // namespace detail

// Represents m * 2^exp2. Entries are stored row-major: m[0]=(1,1), m[1]=(1,2),
// m[2]=(2,1), m[3]=(2,2).
class ScaledMatrix {
public:
    using Mantissa = std::array<cplx, 4>;

    ScaledMatrix() : m_{}, exp2_(0) {}
    ScaledMatrix(const Mantissa& m, std::int64_t exp2 = 0) : m_(m), exp2_(exp2) { normalize(); }

    static ScaledMatrix identity() { return ScaledMatrix({1.0, 0.0, 0.0, 1.0}); }

    // Builds m * e^logscale, folding the scale into the binary exponent.
    static ScaledMatrix with_log_scale(Mantissa m, double logscale)
    {
        const double q = std::floor(logscale / std::numbers::ln2);
        if (!(std::abs(q) < 9.0e18)) throw scale_overflow();
        const double frac = std::exp(logscale - q * std::numbers::ln2);
        for (auto& x : m) x *= frac;
        return ScaledMatrix(m, static_cast<std::int64_t>(q));
    }

    const Mantissa& mantissa() const { return m_; }
    std::int64_t exp2() const { return exp2_; }
    cplx operator()(int i, int j) const { return m_[2 * i + j]; }

    double max_entry_abs() const
    {
        double mx = 0.0;
        for (const auto& x : m_) mx = std::max(mx, std::abs(x));
        return mx;
    }

    bool is_zero() const { return max_entry_abs() == 0.0; }

    // Rescales so the largest entry magnitude lies in [1, 2).
    void normalize()
    {
        const double mx = max_entry_abs();
        if (mx == 0.0) {
            exp2_ = 0;
            return;
        }
        if (!std::isfinite(mx)) throw std::domain_error("ScaledMatrix: non-finite entry");
        int e = 0;
        std::frexp(mx, &e); // mx = f * 2^e, f in [0.5, 1)
        const int shift = e - 1;
        if (shift == 0) return;
        for (auto& x : m_) x = {std::ldexp(x.real(), -shift), std::ldexp(x.imag(), -shift)};
        exp2_ = detail::checked_add(exp2_, shift);
    }

    // log of the largest entry magnitude of the represented matrix.
    double log_norm() const
    {
        const double mx = max_entry_abs();
        if (mx == 0.0) return -std::numeric_limits<double>::infinity();
        return std::log(mx) + static_cast<double>(exp2_) * std::numbers::ln2;
    }

    // Entry (i, j) in log form.
    LogComplex entry_log(int i, int j) const
    {
        const cplx v = (*this)(i, j);
        return {detail::scaled_to_log(v.real(), exp2_), detail::scaled_to_log(v.imag(), exp2_)};
    }

    // Entry converted to a native complex; overflows to inf beyond double range.
    cplx entry(int i, int j) const
    {
        const cplx v = (*this)(i, j);
        const auto e = static_cast<int>(std::clamp<std::int64_t>(exp2_, -100000, 100000));
        return {std::ldexp(v.real(), e), std::ldexp(v.imag(), e)};
    }

    ScaledMatrix conj() const
    {
        Mantissa c;
        for (int k = 0; k < 4; ++k) c[k] = std::conj(m_[k]);
        return ScaledMatrix(c, exp2_);
    }

private:
    Mantissa m_;
    std::int64_t exp2_;
};

inline ScaledMatrix mat_mul(const ScaledMatrix& a, const ScaledMatrix& b)
{
    const auto& x = a.mantissa();
    const auto& y = b.mantissa();
    ScaledMatrix::Mantissa r{
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    };
    return ScaledMatrix(r, detail::checked_add(a.exp2(), b.exp2()));
}

inline ScaledMatrix operator*(const ScaledMatrix& a, const ScaledMatrix& b) { return mat_mul(a, b); }

// Determinant of the represented matrix, m-determinant times 4^exp2.
inline LogComplex scaled_det(const ScaledMatrix& a)
{
    const auto& m = a.mantissa();
    const cplx d = m[0] * m[3] - m[1] * m[2];
    const std::int64_t e = detail::checked_add(a.exp2(), a.exp2());
    return {detail::scaled_to_log(d.real(), e), detail::scaled_to_log(d.imag(), e)};
}

// |det - 1| relative to the magnitude of the determinant's terms:
// |ad - bc - 1| / max(1, |ad|, |bc|). For products of unimodular factors this is
// the attainable floating-point accuracy of the determinant.
inline double det_residual(const ScaledMatrix& a)
{
    const auto& m = a.mantissa();
    const std::int64_t e2 = detail::checked_add(a.exp2(), a.exp2());
    // represented determinant is below 2^-1000: no way it equals 1
    if (e2 < -1000) return 1.0;
    const double one = e2 > 2000 ? 0.0 : std::ldexp(1.0, static_cast<int>(-e2));
    const cplx ad = m[0] * m[3];
    const cplx bc = m[1] * m[2];
    const double scale = std::max({one, std::abs(ad), std::abs(bc)});
    return std::abs(ad - bc - one) / scale;
}

} // namespace canon
