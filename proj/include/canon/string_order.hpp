#pragma once

// Order of Krein strings: the balance point s(tau, x), greedy coverings and
// the Kats integral. Everything here is exact on the piecewise-linear label
// measures; no quadrature.

#include <canon/fit.hpp>
#include <canon/hamiltonian.hpp>
#include <canon/order.hpp>
#include <canon/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace canon {

class below_threshold : public std::domain_error {
public:
    explicit below_threshold(const std::string& what) : std::domain_error(what) {}
};

// Label measures m1(s, x) = |(s, x) n X1|, m2(s, x) = |(s, x) n X2| from
// extended-precision prefix sums.
class StringMeasure {
public:
    explicit StringMeasure(const StringSpec& s) : s_(s)
    {
        const std::size_t n = s.size();
        t_.resize(n + 1);
        c1_.resize(n + 1);
        c2_.resize(n + 1);
        long double t = 0, a = 0, b = 0;
        for (std::size_t i = 0; i < n; ++i) {
            t_[i] = t;
            c1_[i] = a;
            c2_[i] = b;
            const long double len = s[i].length;
            t += len;
            (s[i].label == Label::One ? a : b) += len;
        }
        t_[n] = t;
        c1_[n] = a;
        c2_[n] = b;
    }

    const StringSpec& spec() const { return s_; }
    std::size_t size() const { return s_.size(); }
    long double at(std::size_t k) const { return t_[k]; }
    double length() const { return static_cast<double>(t_.back()); }

    // Segment containing y, [start, end) membership, clamped to the last one.
    std::size_t locate(long double y) const
    {
        auto it = std::upper_bound(t_.begin(), t_.end(), y);
        std::size_t k = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
        return std::min(k, s_.size() - 1);
    }

    // Cumulative label measures of (0, y).
    long double F1(long double y) const { return F(y, c1_, Label::One); }
    long double F2(long double y) const { return F(y, c2_, Label::Two); }

    long double m1(long double s, long double x) const { return F1(x) - F1(s); }
    long double m2(long double s, long double x) const { return F2(x) - F2(s); }

    // Unique s in [0, x) with tau^2 m1(s,x) m2(s,x) = 1. Within one segment only
    // one of the two measures moves, so the equation is linear there.
    double s_of(double tau, double x) const { return static_cast<double>(s_of_ext(tau, x)); }

    long double s_of_ext(double tau, long double X) const
    {
        if (!(tau > 0.0)) throw std::invalid_argument("s_of: tau must be positive");
        if (!(X > 0) || X > t_.back() * (1 + 1e-15L)) throw std::invalid_argument("s_of: x outside (0, L]");
        const long double tt = static_cast<long double>(tau) * tau;
        const long double f1 = F1(X), f2 = F2(X);
        auto g = [&](std::size_t k) { return tt * (f1 - c1_[k]) * (f2 - c2_[k]); };
        if (g(0) < 1.0L) throw below_threshold("s_of: no balance point, tau^2 m1 m2 < 1 on (0, x)");
        // largest breakpoint k <= segment of x with g(t_k) >= 1
        std::size_t lo = 0, hi = locate(X);
        while (lo < hi) {
            const std::size_t mid = (lo + hi + 1) / 2;
            if (g(mid) >= 1.0L)
                lo = mid;
            else
                hi = mid - 1;
        }
        const long double A = f1 - c1_[lo], B = f2 - c2_[lo];
        long double u = s_[lo].label == Label::One ? A - 1.0L / (tt * B) : B - 1.0L / (tt * A);
        const long double end = std::min(lo + 1 < t_.size() ? t_[lo + 1] : t_.back(), X);
        return std::clamp(t_[lo] + u, t_[lo], end);
    }

private:
    long double F(long double y, const std::vector<long double>& c, Label lab) const
    {
        if (y <= 0) return 0;
        if (y >= t_.back()) return c.back();
        const std::size_t k = locate(y);
        return c[k] + (s_[k].label == lab ? y - t_[k] : 0.0L);
    }

    StringSpec s_;
    std::vector<long double> t_, c1_, c2_;
};

inline double s_of(const StringSpec& s, double tau, double x) { return StringMeasure(s).s_of(tau, x); }

// String with the (0, a/2) label-1, (a/2, a) label-2 start that the balance
// equation needs. Missing prefixes are prepended with a/2 = 0.01 L; attaching
// them does not change the order.
struct PreparedString {
    StringSpec spec;
    double a = 0.0;          // prefix length; x >= a is the working range
    double mid = 0.0;        // label boundary inside the prefix
    bool prepended = false;  // true if the input was modified
    double offset = 0.0;     // position of the input's origin in spec
};

inline PreparedString prepare_string(const StringSpec& s)
{
    if (s.size() >= 2 && s[0].label == Label::One && s[1].label == Label::Two && s[1].length >= s[0].length)
        return {s, 2 * s[0].length, s[0].length, false, 0.0};
    const double h = 0.01 * s.length();
    std::vector<StringInterval> iv{{h, Label::One}, {h, Label::Two}};
    iv.insert(iv.end(), s.intervals().begin(), s.intervals().end());
    return {StringSpec(std::move(iv)), 2 * h, h, true, 2 * h};
}

// Breakpoints L = x_1 > x_2 > ... > x_{N+1} = 0; omega_j = [x_{j+1}, x_j].
// Breakpoints are kept in extended precision so that the balance identity
// R^2 m1 m2 = 1 survives summation over thousands of intervals.
struct Covering {
    std::vector<long double> breakpoints;
    std::optional<double> R;
    std::size_t interior = 0; // leading intervals that come from the balance equation

    std::size_t count() const { return breakpoints.size() - 1; }
};

// x_{j+1} = s(R, x_j) while x_j >= a. The remainder [0, x_m] lies in the
// prefix and is cut at its label boundary, so both closing pieces carry a
// single label and contribute nothing to the condition-(A) sum.
inline Covering greedy_covering(const PreparedString& p, double R)
{
    const StringMeasure m(p.spec);
    Covering c;
    c.R = R;
    long double x = m.at(m.size());
    c.breakpoints.push_back(x);
    const std::size_t limit = static_cast<std::size_t>(R * m.length()) + 4;
    while (x >= p.a) {
        const long double nx = m.s_of_ext(R, x);
        if (!(nx < x)) throw std::runtime_error("greedy_covering: balance point did not advance");
        c.breakpoints.push_back(nx);
        ++c.interior;
        x = nx;
        if (c.interior > limit) throw std::runtime_error("greedy_covering: step bound violated");
    }
    if (x > p.mid) c.breakpoints.push_back(p.mid);
    if (x > 0) c.breakpoints.push_back(0);
    return c;
}

inline Covering greedy_covering(const StringSpec& s, double R) { return greedy_covering(prepare_string(s), R); }

// sqrt(|omega_j n X1| |omega_j n X2|) per interval, in breakpoint order.
inline std::vector<double> covering_terms(const StringSpec& s, const Covering& c)
{
    const StringMeasure m(s);
    std::vector<double> t;
    t.reserve(c.count());
    for (std::size_t j = 0; j + 1 < c.breakpoints.size(); ++j) {
        const long double hi = c.breakpoints[j], lo = c.breakpoints[j + 1];
        t.push_back(static_cast<double>(std::sqrt(std::max(0.0L, m.m1(lo, hi)) * std::max(0.0L, m.m2(lo, hi)))));
    }
    return t;
}

inline double covering_sum(const StringSpec& s, const Covering& c)
{
    long double acc = 0;
    for (double v : covering_terms(s, c)) acc += v;
    return static_cast<double>(acc);
}

struct CoveringRow {
    double R;
    std::size_t n;
    double sum_A;
};

inline std::vector<CoveringRow> covering_table(const PreparedString& p, const std::vector<double>& R_grid,
                                               unsigned threads = 0)
{
    return parallel_map(
        R_grid.size(),
        [&](std::size_t i) {
            const Covering c = greedy_covering(p, R_grid[i]);
            return CoveringRow{R_grid[i], c.count(), covering_sum(p.spec, c)};
        },
        threads);
}

struct CoveringOrder {
    OrderEstimate estimate;
    double slope_n = 0.0;   // log n(R) against log R
    double slope_sum = 0.0; // log sum_A against log R
    std::vector<CoveringRow> rows;
};

// Smallest d on the grid with slope(sum_A) <= d - 1 + slack and
// slope(n) <= d + slack. A coarse pass over d_grid is refined in 0.01 steps
// below the first passing value.
inline CoveringOrder string_order_upper(const StringSpec& s, const std::vector<double>& d_grid,
                                        const std::vector<double>& R_grid, unsigned threads = 0,
                                        double slack = 0.03)
{
    if (R_grid.size() < 3) throw std::invalid_argument("string_order_upper: need at least 3 R values");
    if (d_grid.empty()) throw std::invalid_argument("string_order_upper: empty d grid");
    const PreparedString p = prepare_string(s);
    CoveringOrder out;
    out.rows = covering_table(p, R_grid, threads);
    std::vector<double> lr, ln, ls;
    for (const auto& r : out.rows) {
        lr.push_back(std::log(r.R));
        ln.push_back(std::log(static_cast<double>(r.n)));
        ls.push_back(std::log(r.sum_A));
    }
    const LinearFit fn = linear_fit(lr, ln), fs = linear_fit(lr, ls);
    out.slope_n = fn.slope;
    out.slope_sum = fs.slope;
    auto passes = [&](double d) { return fs.slope <= d - 1 + slack && fn.slope <= d + slack; };

    auto& e = out.estimate;
    e.method = OrderMethod::Covering;
    e.window_lo = R_grid.front();
    e.window_hi = R_grid.back();
    e.residual = std::max(fn.rms, fs.rms);
    e.trailing_max = std::max(fn.slope, fs.slope + 1);
    if (p.prepended) e.warnings.push_back("prepended a label-1/label-2 prefix of length 0.02 L");

    std::vector<double> grid = d_grid;
    std::sort(grid.begin(), grid.end());
    auto first = std::find_if(grid.begin(), grid.end(), passes);
    if (first == grid.end()) {
        e.value = grid.back();
        e.inconclusive = true;
        e.warnings.push_back("no d on the grid passes");
    } else {
        double d = *first;
        const double prev = first == grid.begin() ? std::max(0.0, d - 0.05) : *(first - 1);
        for (double t = prev + 0.01; t < d - 1e-9; t += 0.01)
            if (passes(t)) {
                d = t;
                break;
            }
        e.value = d;
    }
    // the passing region is d >= max(slope_n, slope_sum + 1) - slack
    const double se = std::max(fn.slope_se, fs.slope_se);
    e.lo = std::min(e.value, std::max(fn.slope, fs.slope + 1) - slack - 2 * se);
    e.hi = std::max(e.value, std::max(fn.slope, fs.slope + 1) - slack + 2 * se);
    return out;
}

inline std::vector<double> default_d_grid()
{
    std::vector<double> g;
    for (int i = 1; i <= 20; ++i) g.push_back(0.05 * i);
    return g;
}

// K(tau) = int_a^L chi_2(x) / m2(s(tau, x), x) dx, exactly.
//
// On a label-2 interval [c, e] put u = x - c. s(tau, x) crosses breakpoint t_k
// at u_k = 1/(tau^2 A_k) - B_k with A_k = m1(t_k, c), B_k = m2(t_k, c); between
// crossings either m2(s, x) = B + u (s in a label-1 piece) or m2(s, x) is pinned
// at 1/(tau^2 A) (s in a label-2 piece). Both integrate in closed form. s is
// nondecreasing in x, so one forward sweep suffices.
inline double kats_integral(const StringMeasure& m, double a, double tau)
{
    const StringSpec& s = m.spec();
    const long double tt = static_cast<long double>(tau) * tau;
    const long double inf = std::numeric_limits<long double>::infinity();
    long double total = 0;
    std::size_t k = 0; // current piece holding s
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].label != Label::Two) continue;
        const long double c = m.at(i), e = m.at(i + 1);
        if (e <= a) continue;
        const long double u0 = std::max(0.0L, static_cast<long double>(a) - c);
        const long double f1 = m.F1(c), f2 = m.F2(c);
        auto uk = [&](std::size_t j) {
            const long double A = f1 - m.F1(m.at(j));
            return A > 0 ? 1.0L / (tt * A) - (f2 - m.F2(m.at(j))) : inf;
        };
        if (uk(0) > u0) throw below_threshold("kats_integral: tau below threshold on the working range");
        k = std::min(k, i);
        while (k + 1 < i && uk(k + 1) <= u0) ++k;
        long double lo = u0;
        const long double width = e - c;
        while (lo < width) {
            const long double next = k + 1 <= i ? std::min(uk(k + 1), width) : width;
            if (next > lo) {
                if (s[k].label == Label::One) {
                    const long double B = f2 - m.F2(m.at(k + 1));
                    total += std::log1p((next - lo) / (B + lo));
                } else {
                    const long double A = f1 - m.F1(m.at(k + 1));
                    total += tt * A * (next - lo);
                }
                lo = next;
            }
            if (lo >= width) break;
            ++k;
        }
    }
    return static_cast<double>(total);
}

struct KatsPoint {
    double tau;
    double value; // NaN when below threshold
};

inline std::vector<KatsPoint> kats_curve(const PreparedString& p, const std::vector<double>& taus,
                                         unsigned threads = 0)
{
    const StringMeasure m(p.spec);
    return parallel_map(
        taus.size(),
        [&](std::size_t i) {
            try {
                return KatsPoint{taus[i], kats_integral(m, p.a, taus[i])};
            } catch (const below_threshold&) {
                return KatsPoint{taus[i], std::numeric_limits<double>::quiet_NaN()};
            }
        },
        threads);
}

// Order as the growth exponent of K(tau): slope of log K against log tau over
// the top two decades below tau_cap. Past the resolution scale of a truncated
// string K saturates, so the cap defaults to a tenth of it.
inline OrderEstimate kats_order_functional(const StringSpec& s, const std::vector<double>& taus,
                                           std::optional<double> tau_cap = {}, unsigned threads = 0)
{
    const PreparedString p = prepare_string(s);
    const double cap = tau_cap.value_or(resolution_scale(s) / 10.0);
    const auto curve = kats_curve(p, taus, threads);
    OrderEstimate e;
    e.method = OrderMethod::Kats;
    if (p.prepended) e.warnings.push_back("prepended a label-1/label-2 prefix of length 0.02 L");
    std::size_t dropped = 0;
    double top = 0;
    for (const auto& q : curve) {
        if (std::isnan(q.value)) {
            ++dropped;
            continue;
        }
        if (q.tau <= cap && q.value > 0) top = std::max(top, q.tau);
    }
    if (dropped) e.warnings.push_back(std::to_string(dropped) + " tau values below threshold dropped");
    std::vector<double> x, y;
    for (const auto& q : curve)
        if (!std::isnan(q.value) && q.value > 0 && q.tau <= top && q.tau >= top / 100.0) {
            x.push_back(std::log(q.tau));
            y.push_back(std::log(q.value));
        }
    if (x.size() < 5) {
        // K identically zero: no label-2 mass past the prefix, bounded growth
        const auto zeros = std::count_if(curve.begin(), curve.end(),
                                         [&](const KatsPoint& q) { return q.value == 0 && q.tau <= cap; });
        if (zeros >= 5 && top == 0) {
            e.warnings.push_back("K vanishes on the grid");
            return e;
        }
        throw std::invalid_argument("kats_order_functional: too few usable tau values below the cap");
    }
    const LinearFit f = linear_fit(x, y);
    e.value = f.slope;
    e.lo = f.slope - 2 * f.slope_se;
    e.hi = f.slope + 2 * f.slope_se;
    e.window_lo = std::exp(x.front());
    e.window_hi = std::exp(x.back());
    e.residual = f.rms;
    e.trailing_max = detail::max_subwindow_slope(x, y);
    return e;
}

} // namespace canon
