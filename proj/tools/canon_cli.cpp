// canon: monodromy, order, certificates and Jacobi conversion from the command line.

#include <canon/canon.hpp>

#include <CLI11.hpp>

#include <complex>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

namespace {

using namespace canon;
using io::json;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---- argument parsing ----------------------------------------------------

double parse_double(const std::string& s, const std::string& what)
{
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw UsageError("bad number for " + what + ": '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

// "min:max:ppd": geometric, max excluded.
std::vector<double> parse_tau_grid(const std::string& s)
{
    const auto f = split(s, ':');
    if (f.size() != 3) throw UsageError("grid must be min:max:points-per-decade, got '" + s + "'");
    const double lo = parse_double(f[0], "grid min"), hi = parse_double(f[1], "grid max");
    const double ppd = parse_double(f[2], "points per decade");
    if (!(lo > 0 && hi > lo)) throw UsageError("grid must be positive and increasing");
    if (!(ppd >= 4 && ppd == std::floor(ppd))) throw UsageError("points per decade must be an integer >= 4");
    return geometric_grid(lo, hi, static_cast<int>(ppd));
}

// "min:max[:count]": geometric, both ends included.
std::vector<double> parse_R_grid(const std::string& s, std::size_t default_count)
{
    const auto f = split(s, ':');
    if (f.size() != 2 && f.size() != 3) throw UsageError("R range must be min:max[:count], got '" + s + "'");
    const double lo = parse_double(f[0], "R min"), hi = parse_double(f[1], "R max");
    double n = static_cast<double>(default_count);
    if (f.size() == 3) n = parse_double(f[2], "R count");
    if (!(lo > 0 && hi > lo)) throw UsageError("R range must be positive and increasing");
    if (!(n >= 3 && n == std::floor(n))) throw UsageError("R count must be an integer >= 3");
    return geometric_points(lo, hi, static_cast<std::size_t>(n));
}

// "x", "yi", "x+yi", "x-yi", "i", "-i"
cplx parse_complex(std::string s)
{
    s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
    if (s.empty()) throw UsageError("empty complex number");
    if (s.back() != 'i') return {parse_double(s, "z"), 0.0};
    s.pop_back();
    std::size_t split_at = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;)
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split_at = k;
            break;
        }
    auto imag = [&](const std::string& t) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        return parse_double(t, "z");
    };
    if (split_at == std::string::npos) return {0.0, imag(s)};
    return {parse_double(s.substr(0, split_at), "z"), imag(s.substr(split_at))};
}

// ---- inputs --------------------------------------------------------------

struct System {
    FiniteRankHamiltonian H;
    std::optional<StringSpec> string;
    std::optional<JacobiMatrix> jacobi;
    std::optional<double> p;   // power-law exponent
    std::optional<double> ell; // birth-death degree
    std::vector<std::string> warnings;

    explicit System(FiniteRankHamiltonian h) : H(std::move(h)) {}
};

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
    }
}

System from_jacobi(JacobiMatrix Jm, std::size_t n)
{
    System s(jacobi_to_hamiltonian(Jm, n));
    if (auto w = limit_circle_warning(s.H)) s.warnings.push_back(*w);
    s.jacobi.emplace(std::move(Jm));
    return s;
}

std::size_t jacobi_n(const JacobiMatrix& Jm, std::optional<std::size_t> n)
{
    return n ? *n : Jm.materialized();
}

System load_jacobi(const std::string& arg, std::optional<std::size_t> n)
{
    if (arg.find(':') != std::string::npos && !std::ifstream(arg)) {
        GeneratorSpec g;
        try {
            g = parse_generator(arg);
            if (!is_jacobi_generator(g)) throw GeneratorError("'" + g.name + "' is not a Jacobi generator");
        } catch (const GeneratorError& e) {
            throw UsageError(e.what());
        }
        JacobiMatrix Jm = generate_jacobi(g);
        System s = from_jacobi(Jm, jacobi_n(Jm, n));
        if (g.name == "bd") s.ell = static_cast<double>(g.list("A").size());
        return s;
    }
    const json j = read_json_file(arg);
    JacobiMatrix Jm = io::jacobi_from_json(j, n.value_or(100000));
    System s = from_jacobi(Jm, jacobi_n(Jm, n));
    if (j.contains("birth_death")) s.ell = static_cast<double>(j["birth_death"]["A"].size());
    return s;
}

System load_system(const std::string& input, const std::string& gen, const std::string& jac,
                   std::optional<std::size_t> n)
{
    const int given = !input.empty() + !gen.empty() + !jac.empty();
    if (given != 1) throw UsageError("give exactly one of --input, --gen, --jacobi");
    if (!jac.empty()) return load_jacobi(jac, n);
    if (!gen.empty()) {
        GeneratorSpec g;
        try {
            g = parse_generator(gen);
        } catch (const GeneratorError& e) {
            throw UsageError(e.what());
        }
        if (is_jacobi_generator(g)) return load_jacobi(gen, n);
        if (g.name != "powerlaw" && g.name != "cantor") throw UsageError("unknown generator '" + g.name + "'");
        std::optional<StringSpec> str;
        try {
            str = generate_string(g);
        } catch (const GeneratorError& e) {
            throw UsageError(e.what());
        }
        System s(string_to_hamiltonian(*str));
        s.string = std::move(str);
        if (g.name == "powerlaw") s.p = g.number("p");
        return s;
    }
    const json j = read_json_file(input);
    if (j.contains("intervals")) {
        StringSpec str = io::string_from_json(j);
        System s(string_to_hamiltonian(str));
        s.string = std::move(str);
        return s;
    }
    if (j.contains("segments")) {
        return System(io::hamiltonian_from_json(j));
    }
    if (j.contains("q") || j.contains("birth_death")) return load_jacobi(input, n);
    throw std::runtime_error(input + ": not a Hamiltonian, string or Jacobi document");
}

const StringSpec& need_string(const System& s, const char* what)
{
    if (!s.string) throw std::invalid_argument(std::string(what) + " needs a string input (--gen powerlaw/cantor or an intervals document)");
    return *s.string;
}

// ---- output --------------------------------------------------------------

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path)
    {
        if (path.empty() || path == "-") return;
        file.open(path);
        if (!file) throw std::runtime_error("cannot write " + path);
        os = &file;
    }
    std::ostream& operator*() { return *os; }
};

void emit_json(const std::string& path, const json& j)
{
    Output out(path);
    *out << j.dump(2) << '\n';
}

template <class F>
void emit_csv(const std::string& path, F&& write)
{
    if (path.empty()) return;
    Output out(path);
    write(*out);
}

void report_warnings(const std::vector<std::string>& w)
{
    for (const auto& s : w) std::cerr << "warning: " << s << '\n';
}

// ---- commands ------------------------------------------------------------

struct Common {
    std::string input, gen, jacobi, output;
    std::optional<std::size_t> n;
    unsigned threads = 0;

    void add(CLI::App* c)
    {
        c->add_option("--input", input, "Hamiltonian, string or Jacobi JSON document");
        c->add_option("--gen", gen, "built-in example, e.g. powerlaw:p=0.5,J=10000 or cantor:depth=14");
        c->add_option("--jacobi", jacobi, "Jacobi JSON document or generator (bd:..., berezanskii:...)");
        c->add_option("--n", n, "Jacobi truncation length");
        c->add_option("--output,-o", output, "output path (default stdout)");
    }
    System load() const
    {
        System s = load_system(input, gen, jacobi, n);
        report_warnings(s.warnings);
        return s;
    }
};

int cmd_monodromy(const Common& c, const std::string& tau, const std::string& z)
{
    if (!tau.empty() && !z.empty()) throw UsageError("give --tau or --z, not both");
    const System s = c.load();
    Output out(c.output);
    std::ostringstream buf;
    if (!z.empty()) {
        std::vector<cplx> zs;
        for (const auto& t : split(z, ',')) zs.push_back(parse_complex(t));
        const auto m = parallel_map(zs.size(), [&](std::size_t i) { return monodromy_eval(s.H, zs[i]); }, c.threads);
        io::Csv csv(buf, "z_re,z_im,log_norm,det_residual");
        for (std::size_t i = 0; i < zs.size(); ++i)
            csv.row(zs[i].real(), zs[i].imag(), m[i].log_norm(), det_residual(m[i]));
    } else {
        const auto taus = parse_tau_grid(tau.empty() ? "1e2:1e6:40" : tau);
        const auto m = parallel_map(
            taus.size(), [&](std::size_t i) { return monodromy_eval(s.H, cplx(0.0, taus[i])); }, c.threads);
        io::Csv csv(buf, "tau,log_norm,det_residual");
        for (std::size_t i = 0; i < taus.size(); ++i) csv.row(taus[i], m[i].log_norm(), det_residual(m[i]));
    }
    *out << buf.str();
    return 0;
}

std::vector<double> default_growth_grid(const FiniteRankHamiltonian& H)
{
    const double top = resolution_scale(H);
    if (!std::isfinite(top)) return geometric_points(1e3, 1e6, 121);
    return geometric_points(top / 1e3, top, 121);
}

std::vector<Coefficient> coefficients_of(const System& s, std::size_t& used)
{
    if (s.string && s.string->alternating() && (*s.string)[0].label == Label::One) {
        const std::size_t J = s.string->size() / 2 + 1;
        used = J;
        return alternating_string_coefficients(*s.string, J);
    }
    if (!s.H.all_rank_one()) throw std::invalid_argument("coefficient method needs a rank-one Hamiltonian");
    if (s.H.size() > 4096) throw std::invalid_argument("coefficient method: more than 4096 segments; use --method growth");
    const MatrixPolynomial P = monodromy_poly(s.H);
    std::vector<Coefficient> c;
    const auto& e = P.entries[0];
    for (std::size_t k = 0; k < e.size(); ++k)
        if (!e[k].is_zero()) c.push_back({static_cast<double>(k), e[k].logmag});
    used = e.size();
    return c;
}

int cmd_order(const Common& c, const std::string& method, const std::string& tau, const std::string& R,
              const std::string& csv_path)
{
    const System s = c.load();
    OrderEstimate e;
    json extra;
    if (method == "growth") {
        const auto taus = tau.empty() ? default_growth_grid(s.H) : parse_tau_grid(tau);
        const auto curve = growth_curve(s.H, taus, c.threads);
        e = order_fit(curve, resolution_scale(s.H));
        emit_csv(csv_path, [&](std::ostream& os) { io::write_curve_csv(os, curve); });
    } else if (method == "coeff") {
        if (s.jacobi) {
            e = jacobi_order_lower_bound(*s.jacobi, s.H.size());
            e.warnings.push_back("leading coefficients of P_n give a lower bound on the order");
            emit_csv(csv_path, [&](std::ostream& os) {
                io::Csv out(os, "k,log_coeff");
                long double acc = 0;
                for (std::size_t j = 1; j <= s.H.size(); ++j) {
                    acc += std::log(static_cast<long double>(s.jacobi->rho(j)));
                    out.row(static_cast<double>(j), static_cast<double>(-acc));
                }
            });
        } else {
            std::size_t used = 0;
            const auto coeffs = coefficients_of(s, used);
            e = order_from_coefficients(coeffs);
            emit_csv(csv_path, [&](std::ostream& os) { io::write_coefficients_csv(os, coeffs); });
        }
    } else if (method == "kats") {
        const StringSpec& str = need_string(s, "kats");
        const auto taus = parse_tau_grid(tau.empty() ? "1e2:1e8:40" : tau);
        e = kats_order_functional(str, taus, {}, c.threads);
        emit_csv(csv_path, [&](std::ostream& os) { io::write_kats_csv(os, kats_curve(prepare_string(str), taus, c.threads)); });
    } else if (method == "covering") {
        const StringSpec& str = need_string(s, "covering");
        const auto grid = parse_R_grid(R.empty() ? "1e2:1e4" : R, 9);
        const CoveringOrder co = string_order_upper(str, default_d_grid(), grid, c.threads);
        e = co.estimate;
        extra = {{"slope_n", co.slope_n}, {"slope_sum", co.slope_sum}};
        emit_csv(csv_path, [&](std::ostream& os) { io::write_covering_csv(os, co.rows); });
    } else {
        throw UsageError("--method must be growth, coeff, kats or covering");
    }
    json j = io::estimate_to_json(e);
    if (!extra.is_null()) j["covering"] = extra;
    emit_json(c.output, j);
    return 0;
}

int cmd_certificate(const Common& c, const std::string& builder, double d, const std::string& R,
                    std::optional<double> p_opt, std::optional<double> Delta_opt, std::optional<double> D_opt,
                    double slack, const std::string& csv_path)
{
    if (!(d > 0.0 && d <= 1.0)) throw UsageError("--d must lie in (0, 1]");
    const auto grid = parse_R_grid(R.empty() ? "1e2:1e6" : R, 9);
    if (grid.size() < 8) throw UsageError("certificate fits need at least 8 R values");
    const System s = c.load();
    CertificateFamily family;
    json extra = json::object();
    if (builder == "powerlaw") {
        const StringSpec& str = need_string(s, "powerlaw builder");
        const auto p = p_opt ? p_opt : s.p;
        if (!p) throw UsageError("powerlaw builder needs --p or a powerlaw generator");
        family = [&str, p = *p, d](double r) { return builder_power_law(str, p, r, d); };
        extra["p"] = *p;
    } else if (builder == "threshold") {
        family = [&s, d](double r) { return builder_threshold(s.H, r, d); };
    } else if (builder == "two-level") {
        const auto D = D_opt ? D_opt : s.ell;
        if (!D) throw UsageError("two-level builder needs --D or a bd generator");
        const double Delta = Delta_opt ? *Delta_opt : *D + delta_exponent(s.H).slope;
        family = [&s, d, Delta, D = *D](double r) { return builder_two_level(s.H, r, d, Delta, D); };
        extra["Delta"] = Delta;
        extra["D"] = *D;
    } else {
        throw UsageError("--builder must be powerlaw, threshold or two-level");
    }
    const CertificateFit f = fit_certificate(s.H, family, grid, d, c.threads, slack);
    json j = io::certificate_to_json(f);
    j["builder"] = builder;
    j["parameters"] = extra;
    emit_csv(csv_path, [&](std::ostream& os) { io::write_certificate_csv(os, f); });
    emit_json(c.output, j);
    return 0;
}

int cmd_string_cover(const Common& c, const std::string& R, const std::string& format)
{
    const System s = c.load();
    const StringSpec& str = need_string(s, "string-cover");
    const auto grid = parse_R_grid(R.empty() ? "1e2:1e4" : R, 9);
    const PreparedString p = prepare_string(str);
    if (p.prepended) std::cerr << "warning: prepended a label-1/label-2 prefix of length 0.02 L\n";
    if (format == "json") {
        const auto cov =
            parallel_map(grid.size(), [&](std::size_t i) { return greedy_covering(p, grid[i]); }, c.threads);
        json arr = json::array();
        for (const auto& cv : cov) {
            json j = io::covering_to_json(cv);
            j["sum_A"] = covering_sum(p.spec, cv);
            j["offset"] = p.offset;
            arr.push_back(j);
        }
        emit_json(c.output, {{"coverings", arr}});
    } else if (format == "csv") {
        std::ostringstream buf;
        io::write_covering_csv(buf, covering_table(p, grid, c.threads));
        Output out(c.output);
        *out << buf.str();
    } else {
        throw UsageError("--format must be csv or json");
    }
    return 0;
}

int cmd_jacobi_convert(const Common& c)
{
    if (c.jacobi.empty() && c.input.empty() && c.gen.empty()) throw UsageError("jacobi-convert needs --jacobi");
    const System s = c.load();
    if (!s.jacobi) throw UsageError("jacobi-convert needs a Jacobi input");
    const double res = theorem4_residual(*s.jacobi, s.H);
    std::cerr << "max relative rho residual: " << io::num(res) << '\n';
    emit_json(c.output, io::hamiltonian_to_json(s.H));
    return 0;
}

int cmd_type(const Common& c, const std::string& tau)
{
    const System s = c.load();
    const auto taus = parse_tau_grid(tau.empty() ? "1e4:1e6:20" : tau);
    const auto curve = growth_curve(s.H, taus, c.threads);
    const LinearFit f = type_fit(curve);
    emit_json(c.output, {{"kdb_type", kdb_type(s.H)},
                         {"fitted_type", io::jnum(f.slope)},
                         {"slope_se", io::jnum(f.slope_se)},
                         {"window", {curve.back().tau / 10.0, curve.back().tau}},
                         {"residual", io::jnum(f.rms)}});
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monodromy, order and order certificates of canonical systems"};
    app.require_subcommand(1);
    app.fallthrough();
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (default: all cores; CANON_THREADS overrides)");

    Common common;
    std::string tau, z, method = "growth", R, csv_path, builder, format = "csv";
    std::optional<double> d, p, Delta, D;
    double slack = 0.03;

    auto* mono = app.add_subcommand("monodromy", "log-norm and determinant residual of M(z)");
    common.add(mono);
    mono->add_option("--tau", tau, "grid min:max:points-per-decade on z = i tau (default 1e2:1e6:40)");
    mono->add_option("--z", z, "comma-separated complex points instead of a grid, e.g. 0,1e3i,2+1i");

    auto* order = app.add_subcommand("order", "order estimate as JSON");
    common.add(order);
    order->add_option("--method", method, "growth | coeff | kats | covering")
        ->check(CLI::IsMember({"growth", "coeff", "kats", "covering"}));
    order->add_option("--tau", tau, "tau grid min:max:points-per-decade");
    order->add_option("--R", R, "R range min:max[:count] for the covering method");
    order->add_option("--csv", csv_path, "also write the fitted data as CSV");

    auto* cert = app.add_subcommand("certificate", "fit the four certificate sums against R");
    common.add(cert);
    cert->add_option("--builder", builder, "powerlaw | threshold | two-level")->required()
        ->check(CLI::IsMember({"powerlaw", "threshold", "two-level"}));
    cert->add_option("--d", d, "candidate order bound")->required();
    cert->add_option("--R", R, "R range min:max[:count] (default 1e2:1e6:9)");
    cert->add_option("--p", p, "power-law exponent (powerlaw builder)");
    cert->add_option("--Delta", Delta, "exponent Delta (two-level builder; fitted from delta_n if absent)");
    cert->add_option("--D", D, "degree D (two-level builder)");
    cert->add_option("--slack", slack, "slope tolerance (default 0.03)");
    cert->add_option("--csv", csv_path, "also write the per-R sums as CSV");

    auto* cover = app.add_subcommand("string-cover", "greedy coverings of a string");
    common.add(cover);
    cover->add_option("--R", R, "R range min:max[:count] (default 1e2:1e4:9)");
    cover->add_option("--format", format, "csv (R,n,sum_A) or json (breakpoints)");

    auto* conv = app.add_subcommand("jacobi-convert", "Jacobi matrix to canonical-system Hamiltonian JSON");
    common.add(conv);

    auto* type = app.add_subcommand("type", "exponential type: closed form and fitted");
    common.add(type);
    type->add_option("--tau", tau, "tau grid min:max:points-per-decade (default 1e4:1e6:20)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        common.threads = resolve_threads(threads);
        if (mono->parsed()) return cmd_monodromy(common, tau, z);
        if (order->parsed()) return cmd_order(common, method, tau, R, csv_path);
        if (cert->parsed()) return cmd_certificate(common, builder, *d, R, p, Delta, D, slack, csv_path);
        if (cover->parsed()) return cmd_string_cover(common, R, format);
        if (conv->parsed()) return cmd_jacobi_convert(common);
        if (type->parsed()) return cmd_type(common, tau);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
