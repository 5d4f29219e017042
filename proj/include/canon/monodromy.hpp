#pragma once

// Monodromy matrices of canonical systems J Y' = z H Y, M(0, z) = I, with
// piecewise-constant H. On each piece M' = -z J H M, so the transfer factor is
// exp(-z delta J H): for a rank-one H it is I - z delta J P exactly, since J P
// is nilpotent.

#include <canon/hamiltonian.hpp>
#include <canon/scaled.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace canon {

inline ScaledMatrix transfer_step(const Segment& seg, cplx z)
{
    const cplx zd = z * seg.delta();
    if (seg.is_rank_one()) {
        const auto [c, s] = unit_vector(seg.phi());
        // I - zd * J P with J P = [[-cs, -s^2], [c^2, cs]]
        return ScaledMatrix({1.0 + zd * (c * s), zd * (s * s), -zd * (c * c), 1.0 - zd * (c * s)});
    }

    const Sym2 h = seg.matrix();
    // A = -zd J h = zd [[b, c], [-a, -b]], A^2 = w^2 I with w = i zd sqrt(det h)
    const ScaledMatrix::Mantissa A{zd * h.b, zd * h.c, -zd * h.a, -zd * h.b};
    const cplx w = cplx(0.0, 1.0) * zd * std::sqrt(std::max(0.0, h.det()));

    cplx ch, sc; // cosh(w) and sinh(w)/w, possibly scaled by e^-r
    double r = 0.0;
    if (std::abs(w) < 1e-4) {
        const cplx w2 = w * w;
        ch = 1.0 + w2 / 2.0 + w2 * w2 / 24.0;
        sc = 1.0 + w2 / 6.0 + w2 * w2 / 120.0 + w2 * w2 * w2 / 5040.0;
    } else if (std::abs(w.real()) < 1.0) {
        ch = std::cosh(w);
        sc = std::sinh(w) / w;
    } else {
        r = std::abs(w.real());
        const cplx ep = std::exp(w - r);
        const cplx em = std::exp(-w - r);
        ch = 0.5 * (ep + em);
        sc = 0.5 * (ep - em) / w;
    }
    ScaledMatrix::Mantissa m{ch + sc * A[0], sc * A[1], sc * A[2], ch + sc * A[3]};
    return ScaledMatrix::with_log_scale(m, r);
}

// Ordered product over segments [first, last): step(last-1) ... step(first).
inline ScaledMatrix monodromy_range(const FiniteRankHamiltonian& H, cplx z, std::size_t first, std::size_t last)
{
    if (first > last || last > H.size()) throw std::out_of_range("monodromy_range: bad segment range");
    ScaledMatrix M = ScaledMatrix::identity();
    for (std::size_t i = first; i < last; ++i) M = mat_mul(transfer_step(H[i], z), M);
    return M;
}

inline ScaledMatrix monodromy_eval(const FiniteRankHamiltonian& H, cplx z, std::optional<std::size_t> upto = {})
{
    const std::size_t n = upto.value_or(H.size());
    if (n > H.size()) throw std::out_of_range("monodromy_eval: upto exceeds segment count");
    return monodromy_range(H, z, 0, n);
}

// Monodromy as a matrix polynomial in z with real coefficients kept in log form.
struct MatrixPolynomial {
    // entries[2*i + j][k] is the coefficient of z^k in entry (i, j)
    std::array<std::vector<LogNumber>, 4> entries;
    bool truncated = false;

    const std::vector<LogNumber>& entry(int i, int j) const { return entries[2 * i + j]; }

    std::size_t entry_degree(int i, int j) const
    {
        const auto& c = entry(i, j);
        for (std::size_t k = c.size(); k-- > 0;)
            if (!c[k].is_zero()) return k;
        return 0;
    }

    std::size_t degree() const
    {
        std::size_t d = 0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) d = std::max(d, entry_degree(i, j));
        return d;
    }

    LogNumber leading(int i, int j) const
    {
        const auto& c = entry(i, j);
        return c.empty() ? LogNumber{} : c[entry_degree(i, j)];
    }

    ScaledMatrix evaluate(cplx z) const
    {
        if (z == cplx(0.0)) {
            ScaledMatrix::Mantissa m{};
            for (int e = 0; e < 4; ++e)
                if (!entries[e].empty()) m[e] = entries[e][0].to_real();
            return ScaledMatrix(m);
        }
        const double logz = std::log(std::abs(z));
        const cplx unit = z / std::abs(z);
        double top = -std::numeric_limits<double>::infinity();
        for (const auto& c : entries)
            for (std::size_t k = 0; k < c.size(); ++k)
                if (!c[k].is_zero()) top = std::max(top, c[k].logmag + static_cast<double>(k) * logz);
        if (!std::isfinite(top)) return ScaledMatrix();
        ScaledMatrix::Mantissa m{};
        for (int e = 0; e < 4; ++e) {
            cplx acc = 0.0;
            cplx phase = 1.0;
            const auto& c = entries[e];
            for (std::size_t k = 0; k < c.size(); ++k) {
                if (!c[k].is_zero())
                    acc += static_cast<double>(c[k].sign) *
                           std::exp(c[k].logmag + static_cast<double>(k) * logz - top) * phase;
                phase *= unit;
            }
            m[e] = acc;
        }
        return ScaledMatrix::with_log_scale(m, top);
    }
};

namespace detail {

inline MatrixPolynomial segment_poly(const Segment& seg)
{
    const auto [c, s] = unit_vector(seg.phi());
    const double d = seg.delta();
    MatrixPolynomial p;
    // I - z d J P
    const double lin[4] = {d * c * s, d * s * s, -d * c * c, -d * c * s};
    const double cst[4] = {1.0, 0.0, 0.0, 1.0};
    for (int e = 0; e < 4; ++e) p.entries[e] = {LogNumber::from_real(cst[e]), LogNumber::from_real(lin[e])};
    return p;
}

// later * earlier, coefficients above cap dropped.
inline MatrixPolynomial poly_mul(const MatrixPolynomial& X, const MatrixPolynomial& Y, std::size_t cap)
{
    MatrixPolynomial R;
    R.truncated = X.truncated || Y.truncated;
    std::vector<LogNumber> terms;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            std::size_t full = 0;
            for (int l = 0; l < 2; ++l) {
                const auto& a = X.entry(i, l);
                const auto& b = Y.entry(l, j);
                if (!a.empty() && !b.empty()) full = std::max(full, a.size() + b.size() - 1);
            }
            auto& out = R.entries[2 * i + j];
            out.assign(std::min(full, cap + 1), LogNumber{});
            for (std::size_t k = 0; k < full; ++k) {
                terms.clear();
                for (int l = 0; l < 2; ++l) {
                    const auto& a = X.entry(i, l);
                    const auto& b = Y.entry(l, j);
                    const std::size_t lo = k + 1 > b.size() ? k + 1 - b.size() : 0;
                    for (std::size_t u = lo; u <= k && u < a.size(); ++u)
                        if (!a[u].is_zero() && !b[k - u].is_zero()) terms.push_back(a[u] * b[k - u]);
                }
                const LogNumber v = log_sum(terms);
                if (k <= cap)
                    out[k] = v;
                else if (!v.is_zero())
                    R.truncated = true;
            }
        }
    }
    return R;
}

inline MatrixPolynomial poly_tree(const FiniteRankHamiltonian& H, std::size_t lo, std::size_t hi, std::size_t cap)
{
    if (hi - lo == 1) return segment_poly(H[lo]);
    const std::size_t mid = lo + (hi - lo) / 2;
    return poly_mul(poly_tree(H, mid, hi, cap), poly_tree(H, lo, mid, cap), cap);
}

} // namespace detail

// Exact matrix polynomial M(L, z) of a rank-one Hamiltonian. Degree is at most
// the segment count; coefficients above degree_cap are dropped and flagged.
inline MatrixPolynomial monodromy_poly(const FiniteRankHamiltonian& H, std::optional<std::size_t> degree_cap = {})
{
    if (!H.all_rank_one()) throw std::invalid_argument("monodromy_poly: all segments must be rank one");
    const std::size_t cap = degree_cap.value_or(H.size());
    return detail::poly_tree(H, 0, H.size(), cap);
}

// Relative mismatch of Im(M11 conj(M21)) = Im(lambda) * int <H Theta, Theta>
// at x = L, Theta the first column of M. On a rank-one piece <Theta, e> is
// constant, so each piece contributes delta * |<Theta_j, e>|^2 exactly.
inline double energy_identity_residual(const FiniteRankHamiltonian& H, cplx lambda)
{
    if (!H.all_rank_one())
        throw std::invalid_argument("energy_identity_residual: closed form needs rank-one segments");
    ScaledMatrix M = ScaledMatrix::identity();
    LogNumber rhs{};
    for (const auto& seg : H.segments()) {
        const auto [c, s] = unit_vector(seg.phi());
        const cplx u = c * M(0, 0) + s * M(1, 0);
        const double mag2 = std::norm(u);
        if (mag2 > 0.0) {
            const LogNumber term{1, std::log(seg.delta() * mag2) +
                                        2.0 * static_cast<double>(M.exp2()) * std::numbers::ln2};
            rhs = log_add(rhs, term);
        }
        M = mat_mul(transfer_step(seg, lambda), M);
    }
    rhs = rhs * LogNumber::from_real(lambda.imag());

    const cplx prod = M(0, 0) * std::conj(M(1, 0));
    const LogNumber lhs = detail::scaled_to_log(prod.imag(), 2 * M.exp2());

    if (lhs.is_zero() && rhs.is_zero()) return 0.0;
    const double scale = std::max(lhs.is_zero() ? -INFINITY : lhs.logmag, rhs.is_zero() ? -INFINITY : rhs.logmag);
    const LogNumber diff = log_sub(lhs, rhs);
    if (diff.is_zero()) return 0.0;
    return std::exp(diff.logmag - scale);
}

} // namespace canon
