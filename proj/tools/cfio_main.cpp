// cfio: command-line front end for the library.
// Exit codes: 0 pass, 1 verification failure, 2 usage or input error.

#include "cfio/decompose.hpp"
#include "cfio/errors.hpp"
#include "cfio/fio.hpp"
#include "cfio/flow.hpp"
#include "cfio/phase.hpp"
#include "cfio/rng.hpp"
#include "cfio/verify.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace cfio;

namespace {

constexpr const char* version = "cfio 1.0.0";

struct RunConfig {
    std::string group = "heisenberg";
    std::uint64_t seed = 1;
    std::string out = "cfio_out";
    int jobs = 1;
    std::vector<std::string> tol_args;
    std::map<std::string, double> tol;
};

// outcome of a subcommand: exit code and the manifest fields it adds
struct Outcome {
    int code = 0;
    json inputs = json::object();
    json extra = json::object();
    std::vector<std::string> files;
};

std::map<std::string, double> parse_tol(const std::vector<std::string>& args)
{
    std::map<std::string, double> out;
    for (const std::string& a : args) {
        const auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0)
            throw InputError("--tol expects KEY=VALUE, got '" + a + "'");
        const std::string key = a.substr(0, eq), val = a.substr(eq + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(val, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != val.size() || val.empty())
            throw InputError("--tol value for '" + key + "' is not a number: '" + val + "'");
        out[key] = v;
    }
    validate_overrides(out);
    return out;
}

double tol_for(const RunConfig& cfg, const std::string& key)
{
    auto it = cfg.tol.find(key);
    if (it != cfg.tol.end())
        return it->second;
    for (const CheckInfo& c : check_catalog())
        if (c.key == key)
            return c.default_tol;
    throw InputError("unknown check '" + key + "'");
}

Vec parse_vec(const std::string& s, int n, const std::string& what)
{
    std::vector<double> v;
    std::size_t pos = 0;
    while (pos <= s.size() && !s.empty()) {
        const auto comma = s.find(',', pos);
        const std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        std::size_t used = 0;
        try {
            v.push_back(std::stod(tok, &used));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tok.size())
            throw InputError(what + ": '" + tok + "' is not a number");
        if (comma == std::string::npos)
            break;
        pos = comma + 1;
    }
    if (static_cast<int>(v.size()) != n)
        throw InputError(fmt::format("{} needs {} components, got {}", what, n, v.size()));
    return Eigen::Map<Vec>(v.data(), n);
}

std::vector<double> parse_list(const std::string& s, const std::string& what)
{
    std::vector<double> v;
    std::size_t pos = 0;
    while (true) {
        const auto comma = s.find(',', pos);
        const std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        std::size_t used = 0;
        try {
            v.push_back(std::stod(tok, &used));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tok.size())
            throw InputError(what + ": '" + tok + "' is not a number");
        if (comma == std::string::npos)
            return v;
        pos = comma + 1;
    }
}

json vec_json(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json point_json(const Point& p) { return {{"x", vec_json(p.x)}, {"u", vec_json(p.u)}}; }

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream f(p, std::ios::binary);
    if (!f)
        throw InputError("cannot write " + p.string());
    f << text;
}

// CSV numbers with 17 significant digits: exact round trip, deterministic
std::string num(double v) { return fmt::format("{:.17g}", v); }

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) { line(header); }
    void row(const std::vector<double>& v)
    {
        std::vector<std::string> s;
        for (double x : v)
            s.push_back(num(x));
        line(s);
    }
    const std::string& text() const { return text_; }

private:
    void line(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i)
            text_ += (i ? "," : "") + cells[i];
        text_ += "\n";
    }
    std::string text_;
};

std::vector<std::string> indexed(const std::string& base, int n)
{
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i)
        v.push_back(base + std::to_string(i + 1));
    return v;
}

void append(std::vector<std::string>& a, const std::vector<std::string>& b) { a.insert(a.end(), b.begin(), b.end()); }
void append(std::vector<double>& a, const Vec& b) { a.insert(a.end(), b.data(), b.data() + b.size()); }

bool polar(const Group2Step& g) { return g.d1() == 2 && g.d2() == 1; }

// fio symbols: Gaussian band at |xi| = 2^m on polar groups, otherwise a
// Gaussian ball at (2^m e1, 0.75 2^m e1) of width 2^{m-2}
struct SymbolChoice {
    std::string kind = "auto";
    int m = 1;
};

Covector ball_center(const Group2Step& g, double s)
{
    Vec xi = Vec::Zero(g.d1()), mu = Vec::Zero(g.d2());
    xi(0) = s;
    mu(0) = 0.75 * s;
    return {xi, mu};
}

Symbol make_symbol(const Group2Step& g, const SymbolChoice& c)
{
    const double s = std::ldexp(1.0, c.m);
    std::string kind = c.kind;
    if (kind == "auto")
        kind = polar(g) ? "band" : "ball";
    if (kind == "band")
        return gaussian_band_symbol(s, 0.15, 1.0, 0.15);
    if (kind == "initial")
        return initial_symbol(g, c.m, 0);
    if (kind == "ball")
        return gaussian_ball_symbol(ball_center(g, s), 0.25 * s);
    throw InputError("unknown symbol '" + c.kind + "' (auto, band, initial, ball)");
}

struct PointChoice {
    std::string x, u;
    int count = 4;
};

std::vector<Point> make_points(const Group2Step& g, double t, const SymbolChoice& sym, const PointChoice& pc,
                               std::uint64_t seed)
{
    if (!pc.x.empty() || !pc.u.empty()) {
        Point p = g.identity();
        if (!pc.x.empty())
            p.x = parse_vec(pc.x, g.d1(), "--x");
        if (!pc.u.empty())
            p.u = parse_vec(pc.u, g.d2(), "--u");
        return {p};
    }
    if (pc.count < 1)
        throw InputError("--points must be positive");
    const double s = std::ldexp(1.0, sym.m);
    if (polar(g) || sym.kind == "band" || sym.kind == "initial")
        return wavefront_points(g, t, s, pc.count, seed);
    // points along the ray through x^t of the ball centre
    const FlowPoint f = flow_origin(g, t, ball_center(g, s));
    std::vector<Point> pts;
    for (int i = 0; i < pc.count; ++i) {
        const double sc = pc.count == 1 ? 1.0 : 1.5 * i / (pc.count - 1);
        pts.push_back({f.x * sc, f.u * sc});
    }
    return pts;
}

QuadratureSpec make_spec(int nodes, double tol)
{
    QuadratureSpec s;
    s.nodes_per_dim = nodes;
    if (tol > 0.0)
        s.tol = tol;
    return s;
}

json check_json(const Check& c)
{
    json j = {{"key", c.key}, {"value", c.value}, {"tolerance", c.tol}, {"cases", c.cases}, {"pass", c.pass}};
    if (c.refine_error >= 0.0)
        j["refine_error"] = c.refine_error;
    return j;
}

void print_table(const std::vector<Check>& checks)
{
    fmt::print("{:<34} {:>12} {:>12} {:>6}  {}\n", "check", "max error", "tolerance", "cases", "result");
    for (const Check& c : checks)
        fmt::print("{:<34} {:>12.3e} {:>12.3e} {:>6}  {}\n", c.key, c.value, c.tol, c.cases, c.pass ? "pass" : "FAIL");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Wave propagators on 2-step Carnot groups: verification suites and studies"};
    app.set_version_flag("--version", version);
    app.set_config("--config", "", "TOML/INI file mirroring the flags");
    app.require_subcommand(1);

    RunConfig cfg;
    app.add_option("--group", cfg.group, "builtin group name or JSON group file")->capture_default_str();
    app.add_option("--seed", cfg.seed, "seed for every randomized sample")->capture_default_str();
    app.add_option("--out", cfg.out, "output directory")->capture_default_str();
    app.add_option("--jobs", cfg.jobs, "worker threads for verification loops")
        ->capture_default_str()
        ->check(CLI::Range(1, 256));
    app.add_option("--tol", cfg.tol_args, "tolerance override KEY=VALUE (repeatable)");

    std::function<Outcome(const Group2Step&)> action;
    std::string command;
    auto bind = [&](CLI::App* sub, std::string name, std::function<Outcome(const Group2Step&)> fn) {
        sub->callback([&, name, fn] {
            command = name;
            action = fn;
        });
    };

    // group validate
    auto* group = app.add_subcommand("group", "group definitions")->require_subcommand(1);
    auto* gval = group->add_subcommand("validate", "classify the group and check the bracket invariants");
    bind(gval, "group validate", [&](const Group2Step& g) {
        VerifyOptions o;
        o.seed = cfg.seed;
        o.tol = cfg.tol;
        o.jobs = cfg.jobs;
        o.cases = 20;
        const VerifyReport r = verify_group(g, o);
        write_text(fs::path(cfg.out) / "group_validate.json", report_json(r));
        fmt::print("{}", report_json(r));
        Outcome oc;
        oc.code = r.pass() ? 0 : 1;
        oc.files = {"group_validate.json"};
        oc.extra = {{"pass", r.pass()}, {"is_metivier", r.classification.is_metivier},
                    {"is_htype", r.classification.is_htype}};
        return oc;
    });

    // verify-all
    auto* va = app.add_subcommand("verify-all", "run every applicable invariant suite on the group");
    int va_cases = 8;
    bool va_no_fio = false;
    va->add_option("--cases", va_cases, "random cases per check")->capture_default_str()->check(CLI::Range(1, 100000));
    va->add_flag("--no-fio", va_no_fio, "skip the quadrature-based checks");
    bind(va, "verify-all", [&](const Group2Step& g) {
        VerifyOptions o;
        o.seed = cfg.seed;
        o.tol = cfg.tol;
        o.jobs = cfg.jobs;
        o.cases = va_cases;
        o.fio = !va_no_fio;
        const VerifyReport r = verify_all(g, o);
        write_text(fs::path(cfg.out) / "verify_all.json", report_json(r));
        print_table(r.checks);
        fmt::print("{}: {}\n", g.name(), r.pass() ? "all checks pass" : "verification FAILED");
        Outcome oc;
        oc.code = r.pass() ? 0 : 1;
        oc.inputs = {{"cases", va_cases}, {"fio", !va_no_fio}};
        oc.files = {"verify_all.json"};
        oc.extra = {{"pass", r.pass()}};
        return oc;
    });

    // sphere sample
    auto* sphere = app.add_subcommand("sphere", "geodesic spheres")->require_subcommand(1);
    auto* ss = sphere->add_subcommand("sample", "x^t for quasi-random unit |xi| directions");
    double ss_t = 1.0;
    int ss_count = 1000;
    ss->add_option("--t", ss_t, "time")->capture_default_str();
    ss->add_option("--count", ss_count, "number of directions")->capture_default_str()->check(CLI::Range(1, 10000000));
    bind(ss, "sphere sample", [&](const Group2Step& g) {
        // directions: quasi-random points of S^{d-1} rescaled to |xi| = 1
        std::vector<Covector> dirs;
        for (const Vec& v : quasi_random_sphere(g.dim(), ss_count, cfg.seed)) {
            Covector c = unpack_cov(v, g.d1());
            const double n = c.xi.norm();
            dirs.push_back(n > 0.0 ? Covector{c.xi / n, c.mu / n} : c);
        }
        std::vector<int> skipped;
        const std::vector<Point> pts = geodesic_sphere_sample(g, ss_t, dirs, &skipped);
        std::vector<std::string> head{"index"};
        append(head, indexed("xi", g.d1()));
        append(head, indexed("mu", g.d2()));
        append(head, indexed("x", g.d1()));
        append(head, indexed("u", g.d2()));
        CsvWriter csv(head);
        std::size_t k = 0;
        for (int i = 0; i < ss_count; ++i) {
            if (std::find(skipped.begin(), skipped.end(), i) != skipped.end())
                continue;
            std::vector<double> row{double(i)};
            append(row, dirs[i].xi);
            append(row, dirs[i].mu);
            append(row, pts[k].x);
            append(row, pts[k].u);
            csv.row(row);
            ++k;
        }
        write_text(fs::path(cfg.out) / "sphere.csv", csv.text());
        fmt::print("sphere.csv: {} rows, {} skipped\n", k, skipped.size());
        Outcome oc;
        oc.inputs = {{"t", ss_t}, {"count", ss_count}};
        oc.files = {"sphere.csv"};
        oc.extra = {{"rows", k}, {"skipped", skipped}, {"flow_tolerance", tol_for(cfg, "flow.rk4")}};
        return oc;
    });

    // phase eval
    auto* phase = app.add_subcommand("phase", "phase function")->require_subcommand(1);
    auto* pe = phase->add_subcommand("eval", "phase, density and det at (t, x, u, xi, mu)");
    double pe_t = 1.0;
    std::string pe_x, pe_u, pe_xi, pe_mu;
    pe->add_option("--t", pe_t, "time")->capture_default_str();
    pe->add_option("--x", pe_x, "first-layer point, comma separated (default 0)");
    pe->add_option("--u", pe_u, "second-layer point (default 0)");
    pe->add_option("--xi", pe_xi, "first-layer frequency")->required();
    pe->add_option("--mu", pe_mu, "second-layer frequency")->required();
    bind(pe, "phase eval", [&](const Group2Step& g) {
        Point p = g.identity();
        if (!pe_x.empty())
            p.x = parse_vec(pe_x, g.d1(), "--x");
        if (!pe_u.empty())
            p.u = parse_vec(pe_u, g.d2(), "--u");
        const Covector c{parse_vec(pe_xi, g.d1(), "--xi"), parse_vec(pe_mu, g.d2(), "--mu")};
        const PhaseData pd = phase_data(g, pe_t, c);
        const cplx v = phase_at(pd, p);
        // the closed form against the defining formula with the generic flow
        const double err = std::abs(v - phase_direct(g, pe_t, p, c));
        json rec = {{"inputs",
                     {{"t", pe_t}, {"x", vec_json(p.x)}, {"u", vec_json(p.u)}, {"xi", vec_json(c.xi)},
                      {"mu", vec_json(c.mu)}}},
                    {"value_re", v.real()},
                    {"value_im", v.imag()},
                    {"det_re", pd.det.real()},
                    {"det_im", pd.det.imag()},
                    {"density_re", pd.density.real()},
                    {"density_im", pd.density.imag()},
                    {"refine_error", err}};
        write_text(fs::path(cfg.out) / "phase_eval.json", rec.dump(2) + "\n");
        fmt::print("{}\n", rec.dump(2));
        Outcome oc;
        oc.inputs = rec["inputs"];
        oc.files = {"phase_eval.json"};
        return oc;
    });

    // transport verify
    auto* transport = app.add_subcommand("transport", "transport coefficients")->require_subcommand(1);
    auto* tv = transport->add_subcommand("verify", "closed forms against their definitions and the R oracle");
    int tv_cases = 20;
    tv->add_option("--cases", tv_cases, "random cases per identity")->capture_default_str()->check(CLI::Range(1, 100000));
    bind(tv, "transport verify", [&](const Group2Step& g) {
        VerifyOptions o;
        o.seed = cfg.seed;
        o.tol = cfg.tol;
        o.jobs = cfg.jobs;
        o.cases = tv_cases;
        const GroupClassification cls = classify(g, 200, cfg.seed);
        if (!cls.is_metivier)
            throw InputError("transport verify needs a Metivier group");
        std::vector<Check> checks;
        json arr = json::array();
        for (const CheckInfo& ci : check_catalog())
            if (ci.key.rfind("transport.", 0) == 0 && check_applies(ci.key, g, cls)) {
                checks.push_back(run_check(ci.key, g, o));
                arr.push_back(check_json(checks.back()));
            }
        print_table(checks);
        const bool ok = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
        write_text(fs::path(cfg.out) / "transport_verify.json",
                   json{{"group", g.name()}, {"seed", cfg.seed}, {"pass", ok}, {"checks", arr}}.dump(2) + "\n");
        Outcome oc;
        oc.code = ok ? 0 : 1;
        oc.inputs = {{"cases", tv_cases}};
        oc.files = {"transport_verify.json"};
        oc.extra = {{"pass", ok}};
        return oc;
    });

    // decompose directions / report
    auto* dec = app.add_subcommand("decompose", "frequency decompositions")->require_subcommand(1);
    auto* dd = dec->add_subcommand("directions", "direction set Z_m on S^{d-1} as CSV");
    int dd_d = 3, dd_m = 4;
    double dd_c = 0.25;
    dd->add_option("--d", dd_d, "ambient dimension")->capture_default_str()->check(CLI::Range(2, 8));
    dd->add_option("--m", dd_m, "dyadic scale")->capture_default_str()->check(CLI::Range(0, 12));
    dd->add_option("--c", dd_c, "separation constant")->capture_default_str()->check(CLI::PositiveNumber);
    bind(dd, "decompose directions", [&](const Group2Step&) {
        const DirectionSet set = make_directions(dd_d, dd_m, dd_c);
        std::vector<std::string> head{"index"};
        append(head, indexed("v", dd_d));
        CsvWriter csv(head);
        for (std::size_t i = 0; i < set.size(); ++i) {
            std::vector<double> row{double(i)};
            append(row, set.directions()[i]);
            csv.row(row);
        }
        write_text(fs::path(cfg.out) / "directions.csv", csv.text());
        const double cover = set.covering_radius(4000, cfg.seed);
        fmt::print("directions.csv: {} directions, delta {:.6g}, covering radius {:.6g}\n", set.size(), set.delta(),
                   cover);
        Outcome oc;
        oc.inputs = {{"d", dd_d}, {"m", dd_m}, {"c", dd_c}};
        oc.files = {"directions.csv"};
        oc.extra = {{"count", set.size()},
                    {"delta", set.delta()},
                    {"covering_radius", cover},
                    {"covering_bound", 1.5 * set.delta()}};
        oc.code = cover <= 1.5 * set.delta() ? 0 : 1;
        return oc;
    });
    auto* dr = dec->add_subcommand("report", "direction and sector counts with fitted slopes as JSON");
    int dr_d = 3, dr_mmin = 2, dr_mmax = 7;
    double dr_kappa = 1.1;
    dr->add_option("--d", dr_d, "ambient dimension of the direction sets")->capture_default_str()->check(
        CLI::Range(2, 8));
    dr->add_option("--m-min", dr_mmin)->capture_default_str()->check(CLI::Range(0, 12));
    dr->add_option("--m-max", dr_mmax)->capture_default_str()->check(CLI::Range(0, 12));
    dr->add_option("--kappa", dr_kappa)->capture_default_str();
    bind(dr, "decompose report", [&](const Group2Step&) {
        if (dr_mmax <= dr_mmin)
            throw InputError("--m-max must exceed --m-min");
        if (!(dr_kappa > 1.0))
            throw InputError("--kappa must exceed 1");
        json dirs = json::array();
        double sm = 0, sl = 0, smm = 0, sml = 0;
        const int n = dr_mmax - dr_mmin + 1;
        for (int m = dr_mmin; m <= dr_mmax; ++m) {
            const std::size_t cnt = make_directions(dr_d, m).size();
            const double l = std::log2(double(cnt));
            dirs.push_back({{"m", m}, {"count", cnt}});
            sm += m;
            sl += l;
            smm += m * m;
            sml += m * l;
        }
        const double slope = (n * sml - sm * sl) / (n * smm - sm * sm);
        const double expect = 0.5 * (dr_d - 1);
        json sectors = json::array();
        bool sectors_ok = true;
        for (int d2 : {1, 2, 3}) {
            json rows = json::array();
            double lo = SupportRegion::inf, hi = 0.0;
            for (double f : {16.0, 32.0, 64.0}) {
                const double T = f * dr_kappa * dr_kappa;
                const MuSectorDecomposition ms(d2, T, dr_kappa);
                const double ratio = double(ms.count()) / std::pow(T, d2 - 1);
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
                rows.push_back({{"T", T}, {"count", ms.count()}, {"count_over_T_power", ratio}});
            }
            if (d2 > 1)
                sectors_ok = sectors_ok && hi / lo < 2.0;
            const double mb = MuSectorDecomposition(d2, 16.0 * dr_kappa * dr_kappa, dr_kappa).sheared_mu_bound(dr_kappa);
            sectors.push_back({{"d2", d2},
                               {"rows", rows},
                               {"max_over_min", hi / lo},
                               {"tolerance", 2.0},
                               {"sheared_mu_bound", mb},
                               {"sheared_support_holds", mb <= 2.5}});
        }
        const bool slope_ok = std::abs(slope - expect) <= 0.3;
        json rep = {{"directions",
                     {{"d", dr_d}, {"rows", dirs}, {"slope", slope}, {"expected", expect}, {"tolerance", 0.3}}},
                    {"sectors", sectors},
                    {"kappa", dr_kappa},
                    {"pass", slope_ok && sectors_ok}};
        write_text(fs::path(cfg.out) / "decompose_report.json", rep.dump(2) + "\n");
        fmt::print("{}\n", rep.dump(2));
        Outcome oc;
        oc.code = slope_ok && sectors_ok ? 0 : 1;
        oc.inputs = {{"d", dr_d}, {"m_min", dr_mmin}, {"m_max", dr_mmax}, {"kappa", dr_kappa}};
        oc.files = {"decompose_report.json"};
        oc.extra = {{"direction_slope", slope}, {"pass", slope_ok && sectors_ok}};
        return oc;
    });

    // fio
    auto* fio = app.add_subcommand("fio", "oscillatory integral kernels and studies")->require_subcommand(1);
    SymbolChoice sym;
    PointChoice pts_opt;
    double f_t = 0.5, f_qtol = 0.0;
    int f_nodes = 16;
    auto common = [&](CLI::App* s, bool with_points) {
        s->add_option("--t", f_t, "time")->capture_default_str();
        s->add_option("--m", sym.m, "frequency scale 2^m")->capture_default_str()->check(CLI::Range(0, 6));
        s->add_option("--symbol", sym.kind, "auto, band, initial or ball")->capture_default_str();
        s->add_option("--nodes", f_nodes, "quadrature nodes per dimension")->capture_default_str();
        s->add_option("--quad-tol", f_qtol, "absolute refine-error limit (0: none)");
        if (with_points) {
            s->add_option("--points", pts_opt.count, "number of sampled points")->capture_default_str();
            s->add_option("--x", pts_opt.x, "single point, first layer");
            s->add_option("--u", pts_opt.u, "single point, second layer");
        }
    };
    auto sym_inputs = [&](const Group2Step& g) {
        return json{{"t", f_t},         {"m", sym.m}, {"symbol", sym.kind == "auto" ? (polar(g) ? "band" : "ball") : sym.kind},
                    {"nodes", f_nodes}, {"quad_tol", f_qtol}};
    };

    auto* fe = fio->add_subcommand("eval", "I[q](t, x) with refine errors");
    common(fe, true);
    bind(fe, "fio eval", [&](const Group2Step& g) {
        const std::vector<Point> pts = make_points(g, f_t, sym, pts_opt, cfg.seed);
        const std::vector<KernelSample> ks =
            eval_kernel_batch(g, make_symbol(g, sym), f_t, pts, make_spec(f_nodes, f_qtol));
        json recs = json::array();
        for (const KernelSample& k : ks)
            recs.push_back({{"inputs", {{"t", k.t}, {"point", point_json(k.point)}}},
                            {"value_re", k.value.real()},
                            {"value_im", k.value.imag()},
                            {"refine_error", k.refine_error}});
        write_text(fs::path(cfg.out) / "fio_eval.json", recs.dump(2) + "\n");
        fmt::print("{}\n", recs.dump(2));
        Outcome oc;
        oc.inputs = sym_inputs(g);
        oc.files = {"fio_eval.json"};
        return oc;
    });

    auto* fw = fio->add_subcommand("wave-check", "(d_t^2 + L) I[q] against I[-2i|xi| d_t q + Lambda q]");
    common(fw, true);
    bind(fw, "fio wave-check", [&](const Group2Step& g) {
        const std::vector<Point> pts = make_points(g, f_t, sym, pts_opt, cfg.seed);
        const std::vector<WaveCheck> ws =
            wave_identity_batch(g, make_symbol(g, sym), f_t, pts, make_spec(f_nodes, f_qtol));
        const double tol = tol_for(cfg, "fio.wave_identity");
        json recs = json::array();
        double worst = 0.0, worst_ref = 0.0;
        for (std::size_t i = 0; i < ws.size(); ++i) {
            recs.push_back({{"inputs", {{"t", f_t}, {"point", point_json(pts[i])}}},
                            {"lhs_re", ws[i].lhs.real()},
                            {"lhs_im", ws[i].lhs.imag()},
                            {"rhs_re", ws[i].rhs.real()},
                            {"rhs_im", ws[i].rhs.imag()},
                            {"residual", ws[i].residual},
                            {"refine_error", ws[i].refine_error}});
            worst = std::max(worst, ws[i].residual);
            worst_ref = std::max(worst_ref, ws[i].refine_error);
        }
        const bool ok = worst <= tol;
        json rep = {{"records", recs},
                    {"max_residual", worst},
                    {"refine_error", worst_ref},
                    {"tolerance", tol},
                    {"pass", ok}};
        write_text(fs::path(cfg.out) / "wave_check.json", rep.dump(2) + "\n");
        fmt::print("max residual {:.3e} (tolerance {:.1e}, refine error {:.1e}): {}\n", worst, tol, worst_ref,
                   ok ? "pass" : "FAIL");
        Outcome oc;
        oc.code = ok ? 0 : 1;
        oc.inputs = sym_inputs(g);
        oc.files = {"wave_check.json"};
        oc.extra = {{"max_residual", worst}, {"pass", ok}};
        return oc;
    });

    auto* fd = fio->add_subcommand("dec-check", "I[q] against the sheared sector decomposition (d1 = 2, d2 = 1)");
    double fd_t = 20.0, fd_kappa = 1.1, fd_scale = 1.6;
    int fd_points = 10;
    fd->add_option("--t", fd_t, "time, |t| >= 16 kappa^2")->capture_default_str();
    fd->add_option("--kappa", fd_kappa)->capture_default_str();
    fd->add_option("--scale", fd_scale, "|xi| centre of the test symbol")->capture_default_str();
    fd->add_option("--points", fd_points)->capture_default_str()->check(CLI::Range(1, 10000));
    fd->add_option("--nodes", f_nodes, "quadrature nodes per dimension")->capture_default_str();
    fd->add_option("--quad-tol", f_qtol, "absolute refine-error limit (0: none)");
    bind(fd, "fio dec-check", [&](const Group2Step& g) {
        const Symbol q = gaussian_band_symbol(fd_scale, 0.08, 1.0, 0.018);
        const std::vector<Point> pts = wavefront_points(g, fd_t, fd_scale, fd_points, cfg.seed, 0.95, 1.05, 0.1);
        const DecCheck d = dec_periodic(g, q, fd_t, pts, fd_kappa, make_spec(f_nodes, f_qtol));
        const double tol = tol_for(cfg, "fio.dec_periodic");
        json recs = json::array();
        double ref = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            recs.push_back({{"inputs", {{"t", fd_t}, {"point", point_json(pts[i])}}},
                            {"value_re", d.lhs[i].real()},
                            {"value_im", d.lhs[i].imag()},
                            {"decomposed_re", d.rhs[i].real()},
                            {"decomposed_im", d.rhs[i].imag()},
                            {"refine_error", d.refine_error[i]}});
            ref = std::max(ref, d.refine_error[i]);
        }
        const bool ok = d.discrepancy <= tol;
        const double mb = MuSectorDecomposition(g.d2(), std::abs(fd_t), fd_kappa).sheared_mu_bound(q.support.ratio_max);
        json rep = {{"records", recs},       {"discrepancy", d.discrepancy}, {"tolerance", tol},
                    {"refine_error", ref},   {"k_used", d.k_used},           {"kappa", fd_kappa},
                    {"sheared_mu_bound", mb}, {"sheared_support_holds", mb <= 2.5}, {"pass", ok}};
        write_text(fs::path(cfg.out) / "dec_check.json", rep.dump(2) + "\n");
        fmt::print("discrepancy {:.3e} (tolerance {:.1e}) over {} shifts: {}\n", d.discrepancy, tol, d.k_used.size(),
                   ok ? "pass" : "FAIL");
        Outcome oc;
        oc.code = ok ? 0 : 1;
        oc.inputs = {{"t", fd_t}, {"kappa", fd_kappa}, {"scale", fd_scale}, {"points", fd_points}, {"nodes", f_nodes}};
        oc.files = {"dec_check.json"};
        oc.extra = {{"discrepancy", d.discrepancy}, {"pass", ok}};
        return oc;
    });

    auto* fl = fio->add_subcommand("l1-study", "L1 norm of I[q_m](t, .) over a gauge ball against m (Heisenberg)");
    int fl_mmin = 2, fl_mmax = 5, fl_grid = 4;
    double fl_t = 1.0, fl_radius = 2.5;
    fl->add_option("--m-min", fl_mmin)->capture_default_str()->check(CLI::Range(0, 6));
    fl->add_option("--m-max", fl_mmax)->capture_default_str()->check(CLI::Range(0, 6));
    fl->add_option("--t", fl_t)->capture_default_str();
    fl->add_option("--radius", fl_radius, "gauge ball radius")->capture_default_str()->check(CLI::PositiveNumber);
    fl->add_option("--grid", fl_grid, "grid points per unit per 2^m")->capture_default_str()->check(
        CLI::Range(1, 64));
    bind(fl, "fio l1-study", [&](const Group2Step& g) {
        if (fl_mmax < fl_mmin)
            throw InputError("--m-max must not be below --m-min");
        std::vector<int> ms;
        for (int m = fl_mmin; m <= fl_mmax; ++m)
            ms.push_back(m);
        const L1Study st = l1_growth_study(g, ms, fl_t, fl_radius, fl_grid);
        CsvWriter csv({"m", "l1_norm", "l1_norm_refined", "grid_change"});
        for (const L1Row& r : st.rows)
            csv.row({double(r.m), r.norm, r.refined_norm, r.grid_change});
        write_text(fs::path(cfg.out) / "l1_study.csv", csv.text());
        fmt::print("{}", csv.text());
        if (st.fitted)
            fmt::print("slope {:.4f}\n", st.slope);
        Outcome oc;
        oc.inputs = {{"m_min", fl_mmin}, {"m_max", fl_mmax}, {"t", fl_t}, {"radius", fl_radius}, {"grid", fl_grid}};
        oc.files = {"l1_study.csv"};
        double gc = 0.0;
        for (const L1Row& r : st.rows)
            gc = std::max(gc, r.grid_change);
        oc.extra = {{"slope", st.fitted ? json(st.slope) : json(nullptr)}, {"max_grid_change", gc}};
        return oc;
    });

    auto* fp = fio->add_subcommand("parametrix-study", "partial sums and remainders of the parametrix");
    int fp_nmax = 2;
    std::string fp_times = "0.25,0.5";
    common(fp, true);
    fp->add_option("--n-max", fp_nmax, "highest iterate (<= 3)")->capture_default_str()->check(CLI::Range(0, 3));
    fp->add_option("--times", fp_times, "comma separated time grid")->capture_default_str();
    bind(fp, "fio parametrix-study", [&](const Group2Step& g) {
        const std::vector<double> ts = parse_list(fp_times, "--times");
        const std::vector<Point> pts = make_points(g, ts.back(), sym, pts_opt, cfg.seed);
        QuadratureSpec spec = make_spec(f_nodes, f_qtol);
        const ParametrixStudy st = parametrix_residual_study(g, make_symbol(g, sym), fp_nmax, ts, pts, spec);
        std::vector<std::string> head{"n", "t"};
        append(head, indexed("x", g.d1()));
        append(head, indexed("u", g.d2()));
        append(head, {"partial_sum_re", "partial_sum_im", "sine_sum_re", "sine_sum_im", "remainder_re",
                      "remainder_im", "refine_error"});
        CsvWriter csv(head);
        for (const ParametrixRow& r : st.rows) {
            std::vector<double> row{double(r.n), r.t};
            append(row, r.point.x);
            append(row, r.point.u);
            for (double v : {r.partial_sum.real(), r.partial_sum.imag(), r.sine_sum.real(), r.sine_sum.imag(),
                             r.remainder.real(), r.remainder.imag(), r.refine_error})
                row.push_back(v);
            csv.row(row);
        }
        write_text(fs::path(cfg.out) / "parametrix_study.csv", csv.text());
        fmt::print("parametrix_study.csv: {} rows\n", st.rows.size());
        for (std::size_t n = 0; n < st.remainder_sup.size(); ++n)
            fmt::print("n = {}: sup |remainder| {:.3e}, sup |partial sum| {:.3e}\n", n, st.remainder_sup[n],
                       st.leading_sup[n]);
        Outcome oc;
        oc.inputs = sym_inputs(g);
        oc.inputs["times"] = ts;
        oc.inputs["n_max"] = fp_nmax;
        oc.files = {"parametrix_study.csv"};
        oc.extra = {{"remainder_sup", st.remainder_sup}, {"leading_sup", st.leading_sup}};
        return oc;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        cfg.tol = parse_tol(cfg.tol_args);
        const Group2Step g = load_group(cfg.group);
        fs::create_directories(cfg.out);
        Outcome oc = action(g);
        json manifest = {{"command", command},
                         {"version", version},
                         {"group", g.name()},
                         {"group_definition", json::parse(group_to_json(g))},
                         {"seed", cfg.seed},
                         {"jobs", cfg.jobs},
                         {"tolerance_overrides", cfg.tol},
                         {"inputs", oc.inputs},
                         {"outputs", oc.files},
                         {"exit_code", oc.code}};
        for (auto& [k, v] : oc.extra.items())
            manifest[k] = v;
        write_text(fs::path(cfg.out) / "manifest.json", manifest.dump(2) + "\n");
        return oc.code;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const RefineFailure& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    }
}
