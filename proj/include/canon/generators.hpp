#pragma once

// Built-in examples addressed as "name:key=val,...". List values use commas,
// so keys may also be separated by ';' (bd:A=0,0,1;B=1,1,1).
//
//   powerlaw:p=0.5,J=20000        alternating string with l_j = j^{-1/p}
//   cantor:depth=14               middle-half Cantor string
//   bd:A=a1,..;B=b1,..,n=100000   birth-death Jacobi matrix
//   berezanskii:rho=geometric,base=2,n=200 | rho=power,k=2,n=200   q = 0

#include <canon/hamiltonian.hpp>
#include <canon/jacobi.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

namespace canon {

struct GeneratorError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GeneratorSpec {
    std::string name;
    std::map<std::string, std::string> params;

    bool has(const std::string& k) const { return params.count(k) != 0; }

    double number(const std::string& k, std::optional<double> fallback = {}) const
    {
        auto it = params.find(k);
        if (it == params.end()) {
            if (fallback) return *fallback;
            throw GeneratorError(name + ": missing parameter " + k);
        }
        return parse(it->second, k);
    }

    std::vector<double> list(const std::string& k) const
    {
        auto it = params.find(k);
        if (it == params.end()) throw GeneratorError(name + ": missing parameter " + k);
        std::vector<double> v;
        std::size_t pos = 0;
        const std::string& s = it->second;
        while (pos <= s.size()) {
            const std::size_t c = s.find(',', pos);
            v.push_back(parse(s.substr(pos, c == std::string::npos ? std::string::npos : c - pos), k));
            if (c == std::string::npos) break;
            pos = c + 1;
        }
        return v;
    }

    std::string text(const std::string& k, const std::string& fallback) const
    {
        auto it = params.find(k);
        return it == params.end() ? fallback : it->second;
    }

    void allow(std::initializer_list<const char*> keys) const
    {
        for (const auto& [k, v] : params) {
            bool ok = false;
            for (const char* a : keys) ok = ok || k == a;
            if (!ok) throw GeneratorError(name + ": unknown parameter " + k);
        }
    }

private:
    double parse(const std::string& s, const std::string& k) const
    {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw GeneratorError(name + ": bad value for " + k + ": '" + s + "'");
        return v;
    }
};

inline GeneratorSpec parse_generator(const std::string& text)
{
    GeneratorSpec g;
    const auto colon = text.find(':');
    g.name = text.substr(0, colon);
    if (g.name.empty()) throw GeneratorError("generator: empty name");
    if (colon == std::string::npos) return g;
    const std::string body = text.substr(colon + 1);
    static const std::regex key(R"((?:^|[,;])\s*([A-Za-z_][A-Za-z0-9_]*)=)");
    std::vector<std::smatch> hits;
    for (auto it = std::sregex_iterator(body.begin(), body.end(), key); it != std::sregex_iterator(); ++it)
        hits.push_back(*it);
    if (hits.empty() || hits.front().position(0) != 0)
        throw GeneratorError("generator: expected key=value after ':' in '" + text + "'");
    for (std::size_t i = 0; i < hits.size(); ++i) {
        const auto start = static_cast<std::size_t>(hits[i].position(0) + hits[i].length(0));
        const auto end = i + 1 < hits.size() ? static_cast<std::size_t>(hits[i + 1].position(0)) : body.size();
        if (!g.params.emplace(hits[i][1].str(), body.substr(start, end - start)).second)
            throw GeneratorError("generator: repeated key " + hits[i][1].str());
    }
    return g;
}

inline StringSpec generate_string(const GeneratorSpec& g)
{
    if (g.name == "powerlaw") {
        g.allow({"p", "J"});
        const double J = g.number("J", 20000);
        if (!(J >= 2 && J == std::floor(J))) throw GeneratorError("powerlaw: J must be an integer >= 2");
        return power_law_string(g.number("p"), static_cast<std::size_t>(J));
    }
    if (g.name == "cantor") {
        g.allow({"depth"});
        const double depth = g.number("depth", 14);
        if (!(depth >= 1 && depth <= 30 && depth == std::floor(depth)))
            throw GeneratorError("cantor: depth must be an integer in [1, 30]");
        return cantor_string(static_cast<int>(depth));
    }
    throw GeneratorError("'" + g.name + "' does not describe a string");
}

inline bool is_jacobi_generator(const GeneratorSpec& g) { return g.name == "bd" || g.name == "berezanskii"; }

inline std::size_t generator_size(const GeneratorSpec& g, double fallback)
{
    const double n = g.number("n", fallback);
    if (!(n >= 2 && n == std::floor(n))) throw GeneratorError(g.name + ": n must be an integer >= 2");
    return static_cast<std::size_t>(n);
}

inline JacobiMatrix generate_jacobi(const GeneratorSpec& g)
{
    if (g.name == "bd") {
        g.allow({"A", "B", "n"});
        return birth_death(g.list("A"), g.list("B"), generator_size(g, 100000));
    }
    if (g.name == "berezanskii") {
        g.allow({"rho", "base", "k", "n"});
        const std::size_t n = generator_size(g, 200);
        const std::string rule = g.text("rho", "geometric");
        std::vector<double> rho(n);
        if (rule == "geometric") {
            const double b = g.number("base", 2);
            for (std::size_t j = 1; j <= n; ++j) rho[j - 1] = std::pow(b, static_cast<double>(j));
        } else if (rule == "power") {
            const double k = g.number("k", 2);
            for (std::size_t j = 1; j <= n; ++j) rho[j - 1] = std::pow(static_cast<double>(j), k);
        } else {
            throw GeneratorError("berezanskii: rho must be geometric or power");
        }
        return JacobiMatrix(std::vector<double>(n, 0.0), rho);
    }
    throw GeneratorError("'" + g.name + "' does not describe a Jacobi matrix");
}

} // namespace canon
