#pragma once

// Piecewise-constant Hamiltonians and diagonal (string) Hamiltonians.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace canon {

// Real symmetric 2x2 matrix [[a, b], [b, c]].
struct Sym2 {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double trace() const { return a + c; }
    double det() const { return a * c - b * b; }
    friend Sym2 operator-(const Sym2& x, const Sym2& y) { return {x.a - y.a, x.b - y.b, x.c - y.c}; }
};

// Operator norm of a symmetric 2x2 matrix: max |eigenvalue|.
inline double sym_norm(const Sym2& m)
{
    const double mean = 0.5 * (m.a + m.c);
    const double rad = std::hypot(0.5 * (m.a - m.c), m.b);
    return std::abs(mean) + rad;
}

// Angle reduced to [0, pi); a projection depends only on the spanned line.
inline double normalize_angle(double phi)
{
    if (!std::isfinite(phi)) throw std::invalid_argument("angle must be finite");
    double r = std::fmod(phi, std::numbers::pi);
    if (r < 0.0) r += std::numbers::pi;
    if (r >= std::numbers::pi) r = 0.0;
    return r;
}

// (cos phi, sin phi), exact at the two axis angles used by strings.
inline std::pair<double, double> unit_vector(double phi)
{
    if (phi == 0.0) return {1.0, 0.0};
    if (phi == 0.5 * std::numbers::pi) return {0.0, 1.0};
    return {std::cos(phi), std::sin(phi)};
}

inline Sym2 projection(double phi)
{
    const auto [c, s] = unit_vector(phi);
    return {c * c, c * s, s * s};
}

// ||P_phi - P_psi|| in closed form.
inline double projection_distance(double phi, double psi)
{
    if (phi == psi) return 0.0;
    return std::abs(std::sin(phi - psi));
}

struct RankOne {
    double phi = 0.0;
};

struct ConstantMatrix {
    Sym2 h;
};

class Segment {
public:
    using Kind = std::variant<RankOne, ConstantMatrix>;

    static constexpr double kTraceTol = 1e-12;

    Segment(double delta, RankOne r) : delta_(delta), kind_(RankOne{normalize_angle(r.phi)}) { validate(); }
    Segment(double delta, ConstantMatrix m) : delta_(delta), kind_(m) { validate(); }

    static Segment rank_one(double delta, double phi) { return Segment(delta, RankOne{phi}); }
    static Segment constant(double delta, const Sym2& h) { return Segment(delta, ConstantMatrix{h}); }

    double delta() const { return delta_; }
    const Kind& kind() const { return kind_; }
    bool is_rank_one() const { return std::holds_alternative<RankOne>(kind_); }
    double phi() const { return std::get<RankOne>(kind_).phi; }

    Sym2 matrix() const
    {
        if (const auto* r = std::get_if<RankOne>(&kind_)) return projection(r->phi);
        return std::get<ConstantMatrix>(kind_).h;
    }

    double det() const { return is_rank_one() ? 0.0 : std::get<ConstantMatrix>(kind_).h.det(); }

private:
    void validate() const
    {
        if (!(delta_ > 0.0) || !std::isfinite(delta_))
            throw std::invalid_argument("segment length must be positive and finite");
        if (const auto* m = std::get_if<ConstantMatrix>(&kind_)) {
            const Sym2& h = m->h;
            if (!std::isfinite(h.a) || !std::isfinite(h.b) || !std::isfinite(h.c))
                throw std::invalid_argument("constant matrix must be finite");
            if (std::abs(h.trace() - 1.0) > kTraceTol)
                throw std::invalid_argument("constant matrix must have trace 1");
            if (h.a < -kTraceTol || h.c < -kTraceTol || h.det() < -kTraceTol)
                throw std::invalid_argument("constant matrix must be positive semidefinite");
        }
    }

    double delta_;
    Kind kind_;
};

namespace detail {

// Prefix sums in extended precision; breakpoints stay accurate over 1e5 pieces.
template <class Range, class Len>
std::vector<double> prefix_positions(const Range& r, Len len)
{
    std::vector<double> x;
    x.reserve(r.size() + 1);
    long double acc = 0.0L;
    x.push_back(0.0);
    for (const auto& item : r) {
        acc += static_cast<long double>(len(item));
        x.push_back(static_cast<double>(acc));
    }
    return x;
}

} // namespace detail

class FiniteRankHamiltonian {
public:
    explicit FiniteRankHamiltonian(std::vector<Segment> segments) : segments_(std::move(segments))
    {
        if (segments_.empty()) throw std::invalid_argument("Hamiltonian needs at least one segment");
        x_ = detail::prefix_positions(segments_, [](const Segment& s) { return s.delta(); });
    }

    std::size_t size() const { return segments_.size(); }
    const std::vector<Segment>& segments() const { return segments_; }
    const Segment& operator[](std::size_t i) const { return segments_[i]; }

    // x_i, with x_0 = 0 and x_size = L.
    double breakpoint(std::size_t i) const { return x_[i]; }
    const std::vector<double>& breakpoints() const { return x_; }
    double length() const { return x_.back(); }

    bool all_rank_one() const
    {
        return std::all_of(segments_.begin(), segments_.end(), [](const Segment& s) { return s.is_rank_one(); });
    }

    // Index of the segment containing x, using [start, end) membership.
    std::size_t locate(double x) const
    {
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
        return std::min(i, segments_.size() - 1);
    }

    // First `count` segments.
    FiniteRankHamiltonian prefix(std::size_t count) const
    {
        count = std::clamp<std::size_t>(count, 1, segments_.size());
        return FiniteRankHamiltonian({segments_.begin(), segments_.begin() + static_cast<std::ptrdiff_t>(count)});
    }

    friend FiniteRankHamiltonian concat(const FiniteRankHamiltonian& a, const FiniteRankHamiltonian& b)
    {
        std::vector<Segment> s = a.segments_;
        s.insert(s.end(), b.segments_.begin(), b.segments_.end());
        return FiniteRankHamiltonian(std::move(s));
    }

private:
    std::vector<Segment> segments_;
    std::vector<double> x_;
};

enum class Label : int { One = 1, Two = 2 };

struct StringInterval {
    double length;
    Label label;
};

// Partition of (0, L) into intervals where H = diag(1,0) (label 1) or
// H = diag(0,1) (label 2).
class StringSpec {
public:
    explicit StringSpec(std::vector<StringInterval> intervals) : iv_(std::move(intervals))
    {
        if (iv_.empty()) throw std::invalid_argument("string needs at least one interval");
        for (const auto& i : iv_) {
            if (!(i.length > 0.0) || !std::isfinite(i.length))
                throw std::invalid_argument("string interval length must be positive and finite");
            if (i.label != Label::One && i.label != Label::Two)
                throw std::invalid_argument("string label must be 1 or 2");
        }
        x_ = detail::prefix_positions(iv_, [](const StringInterval& s) { return s.length; });
        long double m1 = 0.0L, m2 = 0.0L;
        for (const auto& i : iv_) (i.label == Label::One ? m1 : m2) += i.length;
        measure1_ = static_cast<double>(m1);
        measure2_ = static_cast<double>(m2);
    }

    std::size_t size() const { return iv_.size(); }
    const std::vector<StringInterval>& intervals() const { return iv_; }
    const StringInterval& operator[](std::size_t i) const { return iv_[i]; }
    double breakpoint(std::size_t i) const { return x_[i]; }
    const std::vector<double>& breakpoints() const { return x_; }
    double length() const { return x_.back(); }

    // |X_1| and |X_2|.
    double measure1() const { return measure1_; }
    double measure2() const { return measure2_; }

    StringSpec swapped_labels() const
    {
        auto v = iv_;
        for (auto& i : v) i.label = i.label == Label::One ? Label::Two : Label::One;
        return StringSpec(std::move(v));
    }

    bool alternating() const
    {
        for (std::size_t i = 1; i < iv_.size(); ++i)
            if (iv_[i].label == iv_[i - 1].label) return false;
        return true;
    }

private:
    std::vector<StringInterval> iv_;
    std::vector<double> x_;
    double measure1_ = 0.0;
    double measure2_ = 0.0;
};

inline constexpr double kLabelOneAngle = 0.0;
inline constexpr double kLabelTwoAngle = 0.5 * std::numbers::pi;

inline FiniteRankHamiltonian string_to_hamiltonian(const StringSpec& s)
{
    std::vector<Segment> seg;
    seg.reserve(s.size());
    for (const auto& i : s.intervals())
        seg.push_back(Segment::rank_one(i.length, i.label == Label::One ? kLabelOneAngle : kLabelTwoAngle));
    return FiniteRankHamiltonian(std::move(seg));
}

// Power-law string on [0, 1]: breakpoints b_j = 1 - j^(-alpha), alpha = 1/p - 1,
// label 1 on [b_{2j-1}, b_{2j}] and label 2 elsewhere. Intervals [b_{j-1}, b_j]
// for j = 2..J, followed by the remainder [b_J, 1] which continues the parity
// pattern.
inline StringSpec power_law_string(double p, std::size_t J)
{
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("power_law_string: p must lie in (0, 1)");
    if (J < 2) throw std::invalid_argument("power_law_string: J must be at least 2 to hold both labels");
    const double alpha = 1.0 / p - 1.0;
    std::vector<StringInterval> iv;
    iv.reserve(J);
    for (std::size_t j = 2; j <= J; ++j) {
        const double dj = static_cast<double>(j);
        // (j-1)^-a - j^-a without cancellation
        const double len = std::pow(dj, -alpha) * std::expm1(-alpha * std::log1p(-1.0 / dj));
        iv.push_back({len, j % 2 == 0 ? Label::One : Label::Two});
    }
    iv.push_back({std::pow(static_cast<double>(J), -alpha), (J + 1) % 2 == 0 ? Label::One : Label::Two});
    return StringSpec(std::move(iv));
}

// Cantor string of total length 2 truncated at generation `depth`: images of the
// Cantor-function constancy intervals under x -> x + cantor(x) carry label 1,
// the 2^depth remaining blocks (length 3^-D + 2^-D each) carry label 2.
inline StringSpec cantor_string(int depth)
{
    if (depth < 1 || depth > 30) throw std::invalid_argument("cantor_string: depth must lie in [1, 30]");
    const std::size_t blocks = std::size_t{1} << depth;
    const double dust = std::pow(3.0, -depth) + std::ldexp(1.0, -depth);
    std::vector<StringInterval> iv;
    iv.reserve(2 * blocks - 1);
    for (std::size_t i = 0; i < blocks; ++i) {
        iv.push_back({dust, Label::Two});
        if (i + 1 == blocks) break;
        // the gap after block i was removed at generation depth - trailing_zeros(i+1)
        const int gen = depth - std::countr_zero(i + 1);
        iv.push_back({std::pow(3.0, -gen), Label::One});
    }
    return StringSpec(std::move(iv));
}

// Integral over [lo, hi] of ||H(t) - G(t)||.
inline double l1_distance(const FiniteRankHamiltonian& H, const FiniteRankHamiltonian& G, double lo, double hi)
{
    const double L = std::min(H.length(), G.length());
    const double tol = 1e-12 * std::max(H.length(), G.length());
    if (!(lo <= hi) || lo < -tol || hi > L + tol)
        throw std::invalid_argument("l1_distance: window outside the domain of both Hamiltonians");
    lo = std::max(lo, 0.0);
    hi = std::min(hi, L);
    if (lo == hi) return 0.0;

    std::size_t i = H.locate(lo), j = G.locate(lo);
    double pos = lo;
    long double total = 0.0L;
    while (pos < hi) {
        const double endH = H.breakpoint(i + 1);
        const double endG = G.breakpoint(j + 1);
        const double end = std::min({endH, endG, hi});
        const Segment& a = H[i];
        const Segment& b = G[j];
        const double norm = a.is_rank_one() && b.is_rank_one() ? projection_distance(a.phi(), b.phi())
                                                               : sym_norm(a.matrix() - b.matrix());
        if (end > pos) total += static_cast<long double>(norm) * (end - pos);
        pos = std::max(pos, end);
        bool advanced = false;
        if (endH <= pos && i + 1 < H.size()) ++i, advanced = true;
        if (endG <= pos && j + 1 < G.size()) ++j, advanced = true;
        if (!advanced) break;
    }
    return static_cast<double>(total);
}

inline double l1_distance(const FiniteRankHamiltonian& H, const FiniteRankHamiltonian& G)
{
    return l1_distance(H, G, 0.0, std::min(H.length(), G.length()));
}

} // namespace canon
