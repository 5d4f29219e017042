#pragma once

// JSON documents and CSV output.
//
//   Hamiltonian: {"L": x, "segments": [{"delta": x, "phi": x} | {"delta": x, "matrix": [[a,b],[b,c]]}]}
//   String:      {"intervals": [{"len": x, "label": 1|2}]}
//   Jacobi:      {"q": [...], "rho": [...]} or {"birth_death": {"A": [...], "B": [...]}}
//
// Numbers are written with "%.17g" under the C locale, so output is bit-stable.

#include <canon/certificates.hpp>
#include <canon/hamiltonian.hpp>
#include <canon/jacobi.hpp>
#include <canon/order.hpp>
#include <canon/string_order.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace canon::io {

using json = nlohmann::ordered_json;

inline std::string num(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Non-finite doubles become null in JSON.
inline json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline double get_number(const json& j, const char* key)
{
    if (!j.contains(key) || !j[key].is_number()) throw std::invalid_argument(std::string("missing number \"") + key + "\"");
    return j[key].get<double>();
}

inline FiniteRankHamiltonian hamiltonian_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("segments") || !j["segments"].is_array())
        throw std::invalid_argument("Hamiltonian document needs a \"segments\" array");
    std::vector<Segment> seg;
    for (const auto& s : j["segments"]) {
        const double delta = get_number(s, "delta");
        if (s.contains("phi")) {
            seg.push_back(Segment::rank_one(delta, get_number(s, "phi")));
        } else if (s.contains("matrix")) {
            const auto& m = s["matrix"];
            if (!m.is_array() || m.size() != 2 || m[0].size() != 2 || m[1].size() != 2)
                throw std::invalid_argument("\"matrix\" must be 2x2");
            const double a = m[0][0].get<double>(), b = m[0][1].get<double>();
            const double b2 = m[1][0].get<double>(), c = m[1][1].get<double>();
            if (std::abs(b - b2) > 1e-12) throw std::invalid_argument("\"matrix\" must be symmetric");
            seg.push_back(Segment::constant(delta, {a, b, c}));
        } else {
            throw std::invalid_argument("segment needs \"phi\" or \"matrix\"");
        }
    }
    FiniteRankHamiltonian H(std::move(seg));
    if (j.contains("L")) {
        const double L = get_number(j, "L");
        if (std::abs(L - H.length()) > 1e-12 * std::max(1.0, std::abs(L)))
            throw std::invalid_argument("\"L\" does not match the sum of segment lengths");
    }
    return H;
}

inline json hamiltonian_to_json(const FiniteRankHamiltonian& H)
{
    json seg = json::array();
    for (const auto& s : H.segments()) {
        if (s.is_rank_one()) {
            seg.push_back({{"delta", s.delta()}, {"phi", s.phi()}});
        } else {
            const Sym2 h = s.matrix();
            seg.push_back({{"delta", s.delta()}, {"matrix", {{h.a, h.b}, {h.b, h.c}}}});
        }
    }
    return {{"L", H.length()}, {"segments", seg}};
}

inline StringSpec string_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("intervals") || !j["intervals"].is_array())
        throw std::invalid_argument("string document needs an \"intervals\" array");
    std::vector<StringInterval> iv;
    for (const auto& i : j["intervals"]) {
        const double len = get_number(i, "len");
        const int label = static_cast<int>(get_number(i, "label"));
        if (label != 1 && label != 2) throw std::invalid_argument("\"label\" must be 1 or 2");
        iv.push_back({len, static_cast<Label>(label)});
    }
    return StringSpec(std::move(iv));
}

inline json string_to_json(const StringSpec& s)
{
    json iv = json::array();
    for (const auto& i : s.intervals()) iv.push_back({{"len", i.length}, {"label", static_cast<int>(i.label)}});
    return {{"intervals", iv}};
}

inline std::vector<double> number_list(const json& j, const char* what)
{
    if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array of numbers");
    std::vector<double> v;
    for (const auto& x : j) {
        if (!x.is_number()) throw std::invalid_argument(std::string(what) + " must be an array of numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

// n bounds materialization of the birth-death form.
inline JacobiMatrix jacobi_from_json(const json& j, std::size_t n)
{
    if (j.contains("birth_death")) {
        const auto& bd = j["birth_death"];
        return birth_death(number_list(bd.value("A", json()), "\"A\""), number_list(bd.value("B", json()), "\"B\""), n);
    }
    if (j.contains("q") && j.contains("rho"))
        return JacobiMatrix(number_list(j["q"], "\"q\""), number_list(j["rho"], "\"rho\""));
    throw std::invalid_argument("Jacobi document needs \"q\" and \"rho\", or \"birth_death\"");
}

inline json estimate_to_json(const OrderEstimate& e)
{
    json w = json::array();
    for (const auto& s : e.warnings) w.push_back(s);
    return {{"value", jnum(e.value)},
            {"method", method_name(e.method)},
            {"slope_ci", {jnum(e.lo), jnum(e.hi)}},
            {"window", {jnum(e.window_lo), jnum(e.window_hi)}},
            {"residual", jnum(e.residual)},
            {"trailing_max", jnum(e.trailing_max)},
            {"inconclusive", e.inconclusive},
            {"warnings", w}};
}

inline json certificate_to_json(const CertificateFit& f)
{
    json slopes, intercepts, bounds;
    for (int k = 0; k < 4; ++k) {
        slopes[condition_name(k)] = jnum(f.slope[k]);
        intercepts[condition_name(k)] = jnum(f.intercept[k]);
        bounds[condition_name(k)] = jnum(f.bound[k]);
    }
    return {{"d", f.d}, {"slopes", slopes}, {"pass", f.pass}, {"bounds", bounds}, {"intercepts", intercepts}};
}

inline json covering_to_json(const Covering& c)
{
    json b = json::array();
    for (long double x : c.breakpoints) b.push_back(static_cast<double>(x));
    json j{{"breakpoints", b}, {"interior", c.interior}};
    if (c.R) j["R"] = *c.R;
    return j;
}

// CSV writer: header once, rows of numbers.
class Csv {
public:
    Csv(std::ostream& os, const std::string& header) : os_(os) { os_ << header << '\n'; }

    template <class... T>
    void row(const T&... v)
    {
        bool first = true;
        ((os_ << (first ? "" : ",") << cell(v), first = false), ...);
        os_ << '\n';
    }

private:
    static std::string cell(double x) { return num(x); }
    static std::string cell(std::size_t x) { return std::to_string(x); }

    std::ostream& os_;
};

inline void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& c)
{
    Csv csv(os, "tau,log_norm");
    for (const auto& p : c) csv.row(p.tau, p.log_norm);
}

inline void write_coefficients_csv(std::ostream& os, const std::vector<Coefficient>& c)
{
    Csv csv(os, "k,log_coeff");
    for (const auto& p : c) csv.row(p.k, p.log_abs);
}

inline void write_covering_csv(std::ostream& os, const std::vector<CoveringRow>& rows)
{
    Csv csv(os, "R,n,sum_A");
    for (const auto& r : rows) csv.row(r.R, r.n, r.sum_A);
}

inline void write_kats_csv(std::ostream& os, const std::vector<KatsPoint>& pts)
{
    Csv csv(os, "tau,kats_value");
    for (const auto& p : pts) csv.row(p.tau, p.value);
}

inline void write_certificate_csv(std::ostream& os, const CertificateFit& f)
{
    Csv csv(os, "R,lhs_i,lhs_ii,lhs_iii,lhs_iv");
    for (const auto& r : f.rows) csv.row(r.R, r.lhs.lhs_i, r.lhs.lhs_ii, r.lhs.lhs_iii, r.lhs.lhs_iv);
}

} // namespace canon::io
