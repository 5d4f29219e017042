#pragma once

// Order certificates: a finite-rank approximation H_R with weights a_j for each
// scale R, judged by the growth exponents of four sums
//   (i)   sum a_j^-2 int_{x_j}^{x_{j+1}} |H - H_R|
//   (ii)  sum a_j^2 (x_{j+1} - x_j)
//   (iii) sum log(1 + |P_j - P_{j+1}| / (a_j a_{j+1}))
//   (iv)  log 1/a_0 + log 1/a_{N-1} + sum |log(a_j / a_{j-1})|
// Growth like R^{d-1}, R^{d-1}, R^d, R^d bounds the order by d.

#include <canon/fit.hpp>
#include <canon/hamiltonian.hpp>
#include <canon/parallel.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace canon {

struct CertificateInstance {
    double R = 0.0;
    FiniteRankHamiltonian approx;
    std::vector<double> weights;

    CertificateInstance(double r, FiniteRankHamiltonian h, std::vector<double> w)
        : R(r), approx(std::move(h)), weights(std::move(w))
    {
        if (weights.size() != approx.size())
            throw std::invalid_argument("certificate: one weight per segment of the approximation");
        for (double a : weights)
            if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("certificate: weights must lie in (0, 1]");
    }
};

struct ConditionReport {
    double lhs_i = 0.0, lhs_ii = 0.0, lhs_iii = 0.0, lhs_iv = 0.0;

    double operator[](int k) const
    {
        switch (k) {
        case 0: return lhs_i;
        case 1: return lhs_ii;
        case 2: return lhs_iii;
        default: return lhs_iv;
        }
    }
};

inline ConditionReport evaluate_conditions(const FiniteRankHamiltonian& H, const CertificateInstance& c)
{
    const auto& G = c.approx;
    const auto& a = c.weights;
    if (std::abs(G.length() - H.length()) > 1e-12 * std::max(1.0, H.length()))
        throw std::invalid_argument("evaluate_conditions: approximation does not cover (0, L)");
    const std::size_t n = G.size();
    long double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = G.breakpoint(j), hi = std::min(G.breakpoint(j + 1), H.length());
        s1 += l1_distance(H, G, lo, hi) / (a[j] * a[j]);
        s2 += static_cast<long double>(a[j]) * a[j] * G[j].delta();
        if (j + 1 < n) {
            const double gap = G[j].is_rank_one() && G[j + 1].is_rank_one()
                                   ? projection_distance(G[j].phi(), G[j + 1].phi())
                                   : sym_norm(G[j].matrix() - G[j + 1].matrix());
            s3 += std::log1p(gap / (a[j] * a[j + 1]));
        }
        if (j > 0) s4 += std::abs(std::log(a[j] / a[j - 1]));
    }
    s4 += -std::log(a.front()) - std::log(a.back());
    return {static_cast<double>(s1), static_cast<double>(s2), static_cast<double>(s3), static_cast<double>(s4)};
}

struct CertificateRow {
    double R;
    ConditionReport lhs;
};

struct CertificateFit {
    double d = 0.0;
    double slack = 0.03;
    double slope[4] = {0, 0, 0, 0};
    double intercept[4] = {0, 0, 0, 0};
    double bound[4] = {0, 0, 0, 0};
    bool passed[4] = {false, false, false, false};
    bool pass = false;
    std::vector<CertificateRow> rows;
};

inline const char* condition_name(int k)
{
    static const char* names[] = {"i", "ii", "iii", "iv"};
    return names[k];
}

using CertificateFamily = std::function<CertificateInstance(double R)>;

// Fits log lhs against log R per condition. A condition whose lhs vanishes on
// the grid counts as slope -inf.
inline CertificateFit fit_certificate(const FiniteRankHamiltonian& H, const CertificateFamily& family,
                                      const std::vector<double>& R_grid, double d, unsigned threads = 0,
                                      double slack = 0.03)
{
    if (R_grid.size() < 8) throw std::invalid_argument("fit_certificate: R grid needs at least 8 points");
    CertificateFit f;
    f.d = d;
    f.slack = slack;
    f.rows = parallel_map(
        R_grid.size(),
        [&](std::size_t i) {
            return CertificateRow{R_grid[i], evaluate_conditions(H, family(R_grid[i]))};
        },
        threads);
    f.pass = true;
    for (int k = 0; k < 4; ++k) {
        f.bound[k] = (k < 2 ? d - 1 : d) + slack;
        std::vector<double> x, y;
        for (const auto& r : f.rows)
            if (r.lhs[k] > 0) {
                x.push_back(std::log(r.R));
                y.push_back(std::log(r.lhs[k]));
            }
        if (x.size() < 2) {
            f.slope[k] = -std::numeric_limits<double>::infinity();
            f.intercept[k] = 0.0;
            f.passed[k] = true;
            continue;
        }
        const LinearFit lf = linear_fit(x, y);
        f.slope[k] = lf.slope;
        f.intercept[k] = lf.intercept;
        f.passed[k] = lf.slope <= f.bound[k] && std::isfinite(lf.intercept);
        f.pass = f.pass && f.passed[k];
    }
    return f;
}

namespace detail {

// H on its first `keep` segments, then a single phi = 0 piece up to L.
inline FiniteRankHamiltonian head_with_tail(const FiniteRankHamiltonian& H, std::size_t keep)
{
    if (keep + 1 > H.size()) throw std::invalid_argument("certificate builder: Hamiltonian too short for this R");
    std::vector<Segment> seg(H.segments().begin(), H.segments().begin() + static_cast<std::ptrdiff_t>(keep));
    const double tail = H.length() - H.breakpoint(keep);
    seg.push_back(Segment::rank_one(tail, 0.0));
    return FiniteRankHamiltonian(std::move(seg));
}

} // namespace detail

// H_R = H on the first N-1 pieces, label 1 beyond; a_j = R^{(d-1)/2} there and
// a_{N-1} = 1, with N = round(R^p).
inline CertificateInstance builder_power_law(const StringSpec& s, double p, double R, double d)
{
    if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("builder_power_law: need 0 < d < 1");
    const auto N = static_cast<std::size_t>(std::llround(std::pow(R, p)));
    if (N < 2) throw std::invalid_argument("builder_power_law: R too small");
    const FiniteRankHamiltonian H = string_to_hamiltonian(s);
    std::vector<double> w(N, std::pow(R, 0.5 * (d - 1)));
    w.back() = 1.0;
    return {R, detail::head_with_tail(H, N - 1), std::move(w)};
}

// Keep pieces longer than 1/R with a_j = R^{(d-1)/2}; each run of shorter
// pieces becomes one phi = 0 piece with a_j = 1.
inline CertificateInstance builder_threshold(const FiniteRankHamiltonian& H, double R, double d)
{
    const double aw = std::pow(R, 0.5 * (d - 1));
    std::vector<Segment> seg;
    std::vector<double> w;
    long double run = 0;
    for (std::size_t j = 0; j < H.size(); ++j) {
        if (H[j].delta() > 1.0 / R) {
            if (run > 0) {
                seg.push_back(Segment::rank_one(static_cast<double>(run), 0.0));
                w.push_back(1.0);
                run = 0;
            }
            seg.push_back(H[j]);
            w.push_back(aw);
        } else {
            run += H[j].delta();
        }
    }
    if (run > 0) {
        seg.push_back(Segment::rank_one(static_cast<double>(run), 0.0));
        w.push_back(1.0);
    }
    return {R, FiniteRankHamiltonian(std::move(seg)), std::move(w)};
}

// Two weight levels for pieces with delta_j ~ j^{Delta - D}:
// a_j^2 = R^{d-1} for j <= R^d, R^{d-1 + d(D - Delta - 1)} up to N-2, 1 at N-1,
// N = round(R^{(d-1)/(Delta - D + 1)}).
inline CertificateInstance builder_two_level(const FiniteRankHamiltonian& H, double R, double d, double Delta,
                                             double D)
{
    if (!(1.0 < Delta && Delta < D - 1.0)) throw std::invalid_argument("builder_two_level: need 1 < Delta < D - 1");
    if (!(d > 1.0 / D)) throw std::invalid_argument("builder_two_level: need d > 1/D");
    const auto N = static_cast<std::size_t>(std::llround(std::pow(R, (d - 1) / (Delta - D + 1))));
    if (N < 2) throw std::invalid_argument("builder_two_level: R too small");
    const double knee = std::pow(R, d);
    const double low = std::pow(R, 0.5 * (d - 1));
    const double high = std::min(1.0, std::pow(R, 0.5 * (d - 1 + d * (D - Delta - 1))));
    std::vector<double> w(N);
    for (std::size_t j = 0; j + 1 < N; ++j) w[j] = static_cast<double>(j) <= knee ? low : high;
    w.back() = 1.0;
    return {R, detail::head_with_tail(H, N - 1), std::move(w)};
}

// Rank-one H with angle function phi on [0, L], sampled at `resolution`
// midpoints; stands in for the continuous Hamiltonian.
inline FiniteRankHamiltonian sample_angle_function(const std::function<double(double)>& phi, double L,
                                                   std::size_t resolution)
{
    std::vector<Segment> seg;
    seg.reserve(resolution);
    const double h = L / static_cast<double>(resolution);
    for (std::size_t k = 0; k < resolution; ++k)
        seg.push_back(Segment::rank_one(h, phi((static_cast<double>(k) + 0.5) * h)));
    return FiniteRankHamiltonian(std::move(seg));
}

// x_j = L j / N, angle sampled at the left endpoint, constant weight a.
inline CertificateInstance builder_uniform(const std::function<double(double)>& phi, double L, std::size_t N,
                                           double a, double R = 0.0)
{
    if (N < 1) throw std::invalid_argument("builder_uniform: N must be positive");
    std::vector<Segment> seg;
    seg.reserve(N);
    const double h = L / static_cast<double>(N);
    for (std::size_t j = 0; j < N; ++j) seg.push_back(Segment::rank_one(h, phi(static_cast<double>(j) * h)));
    return {R, FiniteRankHamiltonian(std::move(seg)), std::vector<double>(N, a)};
}

} // namespace canon
