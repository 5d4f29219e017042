#pragma once

// Exponential type and order estimators.
//
// Order is a limsup, so every estimator here reports a fitted slope, a +-2 sigma
// interval and the window it was fitted on rather than a bare number.

#include <canon/fit.hpp>
#include <canon/hamiltonian.hpp>
#include <canon/monodromy.hpp>
#include <canon/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace canon {

enum class OrderMethod { GrowthFit, Coefficients, Kats, Covering, Convergence };

inline const char* method_name(OrderMethod m)
{
    switch (m) {
    case OrderMethod::GrowthFit: return "growth-fit";
    case OrderMethod::Coefficients: return "coefficients";
    case OrderMethod::Kats: return "kats";
    case OrderMethod::Covering: return "covering";
    case OrderMethod::Convergence: return "convergence-exponent";
    }
    return "?";
}

struct OrderEstimate {
    double value = 0.0;
    OrderMethod method = OrderMethod::GrowthFit;
    double lo = 0.0, hi = 0.0;               // +-2 sigma interval
    double window_lo = 0.0, window_hi = 0.0; // tau or k range actually fitted
    double residual = 0.0;                   // rms of the least-squares fit
    double trailing_max = 0.0;
    bool inconclusive = false;
    std::vector<std::string> warnings;
};

inline double kdb_type(const FiniteRankHamiltonian& H)
{
    double t = 0.0;
    for (const auto& s : H.segments()) t += s.delta() * std::sqrt(std::max(0.0, s.det()));
    return t;
}

struct CurvePoint {
    double tau;
    double log_norm;
};

inline std::vector<CurvePoint> growth_curve(const FiniteRankHamiltonian& H, const std::vector<double>& taus,
                                            unsigned threads = 0)
{
    for (std::size_t i = 0; i < taus.size(); ++i)
        if (!(taus[i] > 0.0) || (i && !(taus[i] > taus[i - 1])))
            throw std::invalid_argument("growth_curve: tau grid must be positive and increasing");
    return parallel_map(
        taus.size(),
        [&](std::size_t i) { return CurvePoint{taus[i], monodromy_eval(H, cplx(0.0, taus[i])).log_norm()}; },
        threads);
}

// Scale beyond which a truncated system stops resembling its infinite
// continuation: the balance scale 1/sqrt(d_{n-1} d_n) of the final pair of
// pieces. Past it M(i tau) is dominated by the last two factors.
inline double resolution_scale(const FiniteRankHamiltonian& H)
{
    const std::size_t n = H.size();
    if (n < 2) return std::numeric_limits<double>::infinity();
    return 1.0 / std::sqrt(H[n - 2].delta() * H[n - 1].delta());
}

inline double resolution_scale(const StringSpec& s)
{
    const std::size_t n = s.size();
    if (n < 2) return std::numeric_limits<double>::infinity();
    return 1.0 / std::sqrt(s[n - 2].length * s[n - 1].length);
}

namespace detail {

// Max slope over overlapping sub-windows of a fit; a finite-data stand-in for limsup.
inline double max_subwindow_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = x.size();
    const std::size_t w = std::max<std::size_t>(5, n / 4);
    if (n < w) return linear_fit(x, y).slope;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s + w <= n; s += std::max<std::size_t>(1, w / 2))
        best = std::max(best, linear_fit(std::span(x).subspan(s, w), std::span(y).subspan(s, w)).slope);
    return best;
}

} // namespace detail

// Slope of log log|M(i tau)| against log tau over the top two decades of the
// usable part of the curve (log|M| > 1, tau <= tau_cap).
inline OrderEstimate order_fit(const std::vector<CurvePoint>& curve,
                               double tau_cap = std::numeric_limits<double>::infinity())
{
    double top = 0.0;
    for (const auto& p : curve)
        if (p.log_norm > 1.0 && std::isfinite(p.log_norm) && p.tau <= tau_cap) top = std::max(top, p.tau);
    std::vector<double> x, y;
    for (const auto& p : curve)
        if (p.log_norm > 1.0 && std::isfinite(p.log_norm) && p.tau <= top && p.tau >= top / 100.0) {
            x.push_back(std::log(p.tau));
            y.push_back(std::log(p.log_norm));
        }
    if (x.size() < 10) throw std::invalid_argument("order_fit: fewer than 10 usable points (need log|M| > 1)");
    const LinearFit f = linear_fit(x, y);
    OrderEstimate e;
    e.method = OrderMethod::GrowthFit;
    e.value = f.slope;
    e.lo = f.slope - 2 * f.slope_se;
    e.hi = f.slope + 2 * f.slope_se;
    e.window_lo = std::exp(x.front());
    e.window_hi = std::exp(x.back());
    e.residual = f.rms;
    e.trailing_max = detail::max_subwindow_slope(x, y);
    return e;
}

// Type as the slope of log|M(i tau)| against tau over the top decade.
inline LinearFit type_fit(const std::vector<CurvePoint>& curve)
{
    if (curve.empty()) throw std::invalid_argument("type_fit: empty curve");
    const double top = curve.back().tau;
    std::vector<double> x, y;
    for (const auto& p : curve)
        if (p.tau >= top / 10.0 && std::isfinite(p.log_norm)) {
            x.push_back(p.tau);
            y.push_back(p.log_norm);
        }
    return linear_fit(x, y);
}

struct Coefficient {
    double k;
    double log_abs;
};

// Order from Taylor coefficients: for order rho, -log|a_k| ~ (1/rho) k log k.
// The O(k) term (type) is fitted alongside, otherwise it biases the slope by a
// 1/log k amount that decays far too slowly to ignore.
inline OrderEstimate order_from_coefficients(const std::vector<Coefficient>& coeffs)
{
    double kmax = 0.0;
    for (const auto& c : coeffs)
        if (std::isfinite(c.log_abs)) kmax = std::max(kmax, c.k);
    std::vector<double> kk, kl, one, y;
    double tmax = -std::numeric_limits<double>::infinity();
    for (const auto& c : coeffs) {
        if (!std::isfinite(c.log_abs) || c.k < 2.0 || c.k < kmax / 100.0) continue;
        if (c.log_abs >= 0.0) throw std::invalid_argument("order_from_coefficients: not decay-dominated");
        const double klk = c.k * std::log(c.k);
        kl.push_back(klk);
        kk.push_back(c.k);
        one.push_back(1.0);
        y.push_back(-c.log_abs);
        tmax = std::max(tmax, klk / -c.log_abs);
    }
    if (y.size() < 10) throw std::invalid_argument("order_from_coefficients: need at least 10 nonzero coefficients");

    const MultiFit f = multi_fit({kl, kk, one}, y);
    const double A = f.coef[0], sA = f.se[0];
    const double inf = std::numeric_limits<double>::infinity();
    OrderEstimate e;
    e.method = OrderMethod::Coefficients;
    e.window_lo = kmax / 100.0 < 2.0 ? 2.0 : kmax / 100.0;
    e.window_hi = kmax;
    e.residual = f.rms;
    e.trailing_max = tmax;
    if (A <= 0.0) {
        e.value = inf;
        e.lo = A + 2 * sA > 0 ? 1.0 / (A + 2 * sA) : inf;
        e.hi = inf;
        e.inconclusive = true;
        e.warnings.push_back("coefficients decay no faster than k log k: order unbounded on this window");
        return e;
    }
    e.value = 1.0 / A;
    e.lo = 1.0 / (A + 2 * sA);
    e.hi = A - 2 * sA > 0 ? 1.0 / (A - 2 * sA) : inf;
    return e;
}

// Leading data of entry (1,1) at the odd breakpoints of an alternating string
// starting with label 1: degree 2j-2 and |c_j| = product of the first 2j-2
// lengths, j = 1..J.
inline std::vector<Coefficient> alternating_string_coefficients(const StringSpec& s, std::size_t J)
{
    if (!s.alternating() || s[0].label != Label::One)
        throw std::invalid_argument("alternating_string_coefficients: string must alternate starting with label 1");
    if (J < 1 || 2 * J - 2 > s.size()) throw std::invalid_argument("alternating_string_coefficients: J too large");
    std::vector<Coefficient> out;
    out.reserve(J);
    long double acc = 0.0L;
    out.push_back({0.0, 0.0});
    for (std::size_t j = 2; j <= J; ++j) {
        acc += std::log(static_cast<long double>(s[2 * j - 4].length));
        acc += std::log(static_cast<long double>(s[2 * j - 3].length));
        out.push_back({static_cast<double>(2 * j - 2), static_cast<double>(acc)});
    }
    return out;
}

} // namespace canon
