#pragma once

// Jacobi matrices and their canonical systems.
//
// Recurrence z Y_n = rho_{n-1} Y_{n-1} + q_n Y_n + rho_n Y_{n+1}, rho_0 = 0, with
// P_0 = 0, P_1 = 1 and Q_1 = 0, Q_2 = 1/rho_1. The n-th piece of the
// associated Hamiltonian has length P_n(0)^2 + Q_n(0)^2 and direction
// (P_n(0), Q_n(0)).

#include <canon/fit.hpp>
#include <canon/hamiltonian.hpp>
#include <canon/order.hpp>
#include <canon/scaled.hpp>

#include <atomic>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace canon {

class JacobiMatrix {
public:
    // (q_j, rho_j) for j >= 1
    using Generator = std::function<std::pair<double, double>(std::size_t)>;

    JacobiMatrix(const std::vector<double>& q, const std::vector<double>& rho)
    {
        if (q.size() != rho.size()) throw std::invalid_argument("JacobiMatrix: q and rho must have equal length");
        for (std::size_t j = 0; j < q.size(); ++j) push(q[j], rho[j], j + 1);
        ready_.store(q_.size());
    }

    explicit JacobiMatrix(Generator g) : gen_(std::move(g)) {}

    JacobiMatrix(const JacobiMatrix& o) : gen_(o.gen_)
    {
        std::lock_guard lk(o.mu_);
        q_ = o.q_;
        rho_ = o.rho_;
        ready_.store(q_.size());
    }

    bool unbounded() const { return static_cast<bool>(gen_); }
    std::size_t materialized() const { return ready_.load(std::memory_order_acquire); }

    // Ensures entries 1..n exist; throws if a finite matrix is shorter.
    void materialize(std::size_t n) const
    {
        if (n <= materialized()) return;
        std::lock_guard lk(mu_);
        if (!gen_) throw std::out_of_range("JacobiMatrix: only " + std::to_string(q_.size()) + " entries available");
        for (std::size_t j = q_.size() + 1; j <= n; ++j) {
            const auto [q, r] = gen_(j);
            push(q, r, j);
        }
        ready_.store(q_.size(), std::memory_order_release);
    }

    double q(std::size_t j) const
    {
        materialize(j);
        return q_[j - 1];
    }
    double rho(std::size_t j) const
    {
        if (j == 0) return 0.0;
        materialize(j);
        return rho_[j - 1];
    }

private:
    void push(double q, double r, std::size_t j) const
    {
        if (!(r > 0.0) || !std::isfinite(r) || !std::isfinite(q))
            throw std::invalid_argument("JacobiMatrix: rho_" + std::to_string(j) + " must be positive and finite");
        q_.push_back(q);
        rho_.push_back(r);
    }

    Generator gen_;
    // deque: appending keeps references to materialized entries valid
    mutable std::deque<double> q_, rho_;
    mutable std::atomic<std::size_t> ready_{0};
    mutable std::mutex mu_;
};

struct PolyValues {
    std::vector<LogComplex> P; // P[k] = P_{k+1}(z)
    std::vector<LogComplex> Q;
};

namespace detail {

inline LogComplex to_log(cplx v, double logscale)
{
    auto part = [&](double x) {
        return x == 0.0 ? LogNumber{} : LogNumber{x > 0 ? 1 : -1, std::log(std::abs(x)) + logscale};
    };
    return {part(v.real()), part(v.imag())};
}

// Y_1 .. Y_n from (Y_{k0-1}, Y_{k0}) by the recurrence, with a running log scale.
inline std::vector<LogComplex> run_recurrence(const JacobiMatrix& Jm, cplx z, std::size_t n, std::size_t k0,
                                              cplx prev, cplx cur, std::vector<LogComplex> head)
{
    double scale = 0.0;
    head.reserve(n);
    for (std::size_t k = k0; k < n; ++k) {
        // rho_k Y_{k+1} = (z - q_k) Y_k - rho_{k-1} Y_{k-1}
        const cplx next = ((z - Jm.q(k)) * cur - Jm.rho(k - 1) * prev) / Jm.rho(k);
        prev = cur;
        cur = next;
        const double mx = std::max(std::abs(prev), std::abs(cur));
        if (!std::isfinite(mx)) throw std::overflow_error("recurrence overflow within one step");
        if (mx > 0x1p200 || (mx > 0 && mx < 0x1p-200)) {
            int e;
            std::frexp(mx, &e);
            prev = std::ldexp(1.0, -e) * prev;
            cur = std::ldexp(1.0, -e) * cur;
            scale += e * std::numbers::ln2;
        }
        head.push_back(to_log(cur, scale));
    }
    return head;
}

} // namespace detail

inline PolyValues polys_at(const JacobiMatrix& Jm, cplx z, std::size_t n)
{
    if (n < 2) throw std::invalid_argument("polys_at: n must be at least 2");
    Jm.materialize(n);
    PolyValues v;
    v.P = detail::run_recurrence(Jm, z, n, 1, 0.0, 1.0, {detail::to_log(1.0, 0.0)});
    const cplx q2 = 1.0 / Jm.rho(1);
    v.Q = detail::run_recurrence(Jm, z, n, 2, 0.0, q2, {detail::to_log(0.0, 0.0), detail::to_log(q2, 0.0)});
    return v;
}

// delta_n = P_n(0)^2 + Q_n(0)^2, phi_n = direction of (P_n(0), Q_n(0)) mod pi.
inline FiniteRankHamiltonian jacobi_to_hamiltonian(const JacobiMatrix& Jm, std::size_t n_max)
{
    const PolyValues v = polys_at(Jm, 0.0, std::max<std::size_t>(n_max, 2));
    std::vector<Segment> seg;
    seg.reserve(n_max);
    for (std::size_t k = 0; k < n_max; ++k) {
        const LogNumber p = v.P[k].re, q = v.Q[k].re;
        if (p.is_zero() && q.is_zero()) throw std::logic_error("jacobi_to_hamiltonian: P_n(0) = Q_n(0) = 0");
        const double m = std::max(p.is_zero() ? -INFINITY : p.logmag, q.is_zero() ? -INFINITY : q.logmag);
        const double ph = p.is_zero() ? 0.0 : p.sign * std::exp(p.logmag - m);
        const double qh = q.is_zero() ? 0.0 : q.sign * std::exp(q.logmag - m);
        const double delta = std::exp(2 * m + std::log(ph * ph + qh * qh));
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw std::range_error("jacobi_to_hamiltonian: delta_" + std::to_string(k + 1) + " outside double range");
        seg.push_back(Segment::rank_one(delta, std::atan2(qh, ph)));
    }
    return FiniteRankHamiltonian(std::move(seg));
}

// Limit-circle cannot be decided from a finite range; flag the case where the
// last decade of pieces still carries a visible share of the length.
inline std::optional<std::string> limit_circle_warning(const FiniteRankHamiltonian& H)
{
    const std::size_t n = H.size();
    if (n < 20) return std::nullopt;
    const double tail = H.length() - H.breakpoint(n - n / 10);
    if (tail > 1e-3 * H.length())
        return "sum of delta_n still growing: last 10% of pieces carry " + std::to_string(tail / H.length()) +
               " of the length";
    return std::nullopt;
}

// max_j |rho_j - 1/(|sin(phi_j - phi_{j+1})| sqrt(delta_j delta_{j+1}))| / rho_j
inline double theorem4_residual(const JacobiMatrix& Jm, const FiniteRankHamiltonian& H)
{
    double worst = 0.0;
    for (std::size_t j = 1; j < H.size(); ++j) {
        const Segment& a = H[j - 1];
        const Segment& b = H[j];
        const double sn = projection_distance(a.phi(), b.phi());
        const double rhs = 1.0 / (sn * std::sqrt(a.delta()) * std::sqrt(b.delta()));
        const double r = Jm.rho(j);
        worst = std::max(worst, std::abs(r - rhs) / r);
    }
    return worst;
}

// Birth-death chain: q_{n+1} = lambda_n + mu_n, rho_{n+1} = sqrt(lambda_n mu_{n+1}),
// lambda_n = prod (n + B_i), mu_n = prod (n + A_i), mu_0 = 0. Entries beyond n
// are generated on demand.
inline JacobiMatrix birth_death(const std::vector<double>& A, const std::vector<double>& B, std::size_t n)
{
    if (A.empty() || A.size() != B.size()) throw std::invalid_argument("birth_death: A and B need equal nonzero length");
    auto lambda = [B](double m) {
        double v = 1.0;
        for (double b : B) v *= m + b;
        return v;
    };
    auto mu = [A](double m) {
        if (m == 0.0) return 0.0;
        double v = 1.0;
        for (double a : A) v *= m + a;
        return v;
    };
    JacobiMatrix Jm([=](std::size_t j) {
        const double m = static_cast<double>(j - 1);
        const double l = lambda(m), u1 = mu(m + 1);
        if (!(l > 0.0)) throw std::invalid_argument("birth_death: nonpositive birth rate at n = " + std::to_string(j - 1));
        if (!(u1 > 0.0)) throw std::invalid_argument("birth_death: nonpositive death rate at n = " + std::to_string(j));
        return std::pair{l + mu(m), std::sqrt(l) * std::sqrt(u1)};
    });
    Jm.materialize(n);
    return Jm;
}

// For q = 0: delta_1 = 1 and delta_{j+1} = (rho_{j-1} rho_{j-3} ... / (rho_j rho_{j-2} ...))^2.
inline std::vector<double> berezanskii_log_deltas(const std::vector<double>& rho, std::size_t n)
{
    if (rho.size() + 1 < n) throw std::invalid_argument("berezanskii_deltas: need n-1 values of rho");
    std::vector<double> out{0.0};
    long double s_prev = 0, s_cur = 0; // S_{j-1}, S_j with S_j = log rho_j + S_{j-2}
    for (std::size_t j = 1; j < n; ++j) {
        if (!(rho[j - 1] > 0.0)) throw std::invalid_argument("berezanskii_deltas: rho must be positive");
        const long double s_next = std::log(static_cast<long double>(rho[j - 1])) + s_prev;
        s_prev = s_cur;
        s_cur = s_next;
        out.push_back(static_cast<double>(2 * (s_prev - s_cur)));
    }
    return out;
}

inline std::vector<double> berezanskii_deltas(const std::vector<double>& rho, std::size_t n)
{
    auto d = berezanskii_log_deltas(rho, n);
    for (auto& x : d) x = std::exp(x);
    return d;
}

namespace detail {

inline LinearFit top_two_decades_fit(const std::vector<double>& logj, const std::vector<double>& y)
{
    const double top = logj.back();
    std::vector<double> x, v;
    for (std::size_t i = 0; i < logj.size(); ++i)
        if (logj[i] >= top - std::log(100.0)) {
            x.push_back(logj[i]);
            v.push_back(y[i]);
        }
    return linear_fit(x, v);
}

} // namespace detail

// inf{alpha : sum seq_j^-alpha < inf} for power-like sequences: 1/beta with beta
// the slope of log seq_j against log j over the top two decades.
inline OrderEstimate convergence_exponent(const std::vector<double>& seq, std::size_t n_max)
{
    const std::size_t n = std::min(n_max, seq.size());
    if (n < 10) throw std::invalid_argument("convergence_exponent: need at least 10 terms");
    std::vector<double> lj, ls;
    for (std::size_t j = 1; j <= n; ++j) {
        if (!(seq[j - 1] > 0.0)) throw std::invalid_argument("convergence_exponent: terms must be positive");
        lj.push_back(std::log(static_cast<double>(j)));
        ls.push_back(std::log(seq[j - 1]));
    }
    for (std::size_t j = n / 100; j + 1 < n; ++j)
        if (ls[j + 1] < ls[j]) throw std::invalid_argument("convergence_exponent: non-monotone tail");
    const LinearFit f = detail::top_two_decades_fit(lj, ls);
    OrderEstimate e;
    e.method = OrderMethod::Convergence;
    e.window_lo = std::max(1.0, static_cast<double>(n) / 100.0);
    e.window_hi = static_cast<double>(n);
    e.residual = f.rms;
    const double inf = std::numeric_limits<double>::infinity();
    if (f.slope <= 0) {
        e.value = inf;
        e.inconclusive = true;
        e.lo = e.hi = inf;
        return e;
    }
    e.value = 1.0 / f.slope;
    e.lo = 1.0 / (f.slope + 2 * f.slope_se);
    e.hi = f.slope > 2 * f.slope_se ? 1.0 / (f.slope - 2 * f.slope_se) : inf;
    // largest local 1/beta over the tail half of the window
    std::vector<double> x(lj.end() - static_cast<std::ptrdiff_t>(n / 2), lj.end());
    std::vector<double> y(ls.end() - static_cast<std::ptrdiff_t>(n / 2), ls.end());
    const double b = x.size() >= 2 ? linear_fit(x, y).slope : f.slope;
    e.trailing_max = b > 0 ? std::max(e.value, 1.0 / b) : inf;
    return e;
}

// |P_j(i tau)| >= pi_j tau^j with pi_j = 1/(rho_1 ... rho_j): the leading
// coefficients bound the order from below.
inline OrderEstimate jacobi_order_lower_bound(const JacobiMatrix& Jm, std::size_t n_max)
{
    Jm.materialize(n_max);
    std::vector<Coefficient> c;
    c.reserve(n_max);
    long double acc = 0;
    for (std::size_t j = 1; j <= n_max; ++j) {
        acc += std::log(static_cast<long double>(Jm.rho(j)));
        c.push_back({static_cast<double>(j), static_cast<double>(-acc)});
    }
    return order_from_coefficients(c);
}

// Exponent e with delta_n ~ n^e over the top two decades of pieces.
inline LinearFit delta_exponent(const FiniteRankHamiltonian& H)
{
    std::vector<double> lj, ld;
    for (std::size_t n = 1; n <= H.size(); ++n) {
        lj.push_back(std::log(static_cast<double>(n)));
        ld.push_back(std::log(H[n - 1].delta()));
    }
    return detail::top_two_decades_fit(lj, ld);
}

} // namespace canon
