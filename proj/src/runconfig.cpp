#include "crown/runconfig.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "crown/bubble.hpp"
#include "crown/energy.hpp"
#include "crown/norms.hpp"
#include "crown/quad.hpp"
#include "crown/radial.hpp"
#include "crown/reduced.hpp"
#include "json.hpp"

namespace crown::cli {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("malformed number: " + s);
    return v;
}

long long parse_int(const std::string& s) {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("malformed integer: " + s);
    return v;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(static_cast<int>(parse_int(trim(item))));
    if (out.empty()) throw std::invalid_argument("empty integer list");
    return out;
}

void set_key(RunConfig& c, const std::string& section, const std::string& key,
             const std::string& value) {
    auto is = [&](const char* s, const char* k) { return section == s && key == k; };
    if (is("pair", "N")) c.N = static_cast<int>(parse_int(value));
    else if (is("pair", "p")) c.p = parse_double(value);
    else if (is("grid", "r_max")) c.r_max = parse_double(value);
    else if (is("grid", "nodes")) c.nodes = static_cast<int>(parse_int(value));
    else if (is("polygon", "k_list")) c.k_list = parse_int_list(value);
    else if (is("polygon", "mu0")) c.mu0 = parse_double(value);
    else if (is("polygon", "r")) c.r = parse_double(value);
    else if (is("polygon", "lambda")) c.lambda = parse_double(value);
    else if (is("mc", "budget")) c.budget = static_cast<std::uint64_t>(parse_int(value));
    else if (is("mc", "seed")) c.seed = static_cast<std::uint64_t>(parse_int(value));
    else if (is("norms", "per_scale")) c.per_scale = static_cast<int>(parse_int(value));
    else if (is("landscape", "box_lo")) c.box_lo = parse_double(value);
    else if (is("landscape", "box_hi")) c.box_hi = parse_double(value);
    else if (is("landscape", "resolution")) c.resolution = static_cast<int>(parse_int(value));
    else if (is("landscape", "grid_n")) c.grid_n = static_cast<int>(parse_int(value));
    else if (is("run", "threads")) c.threads = static_cast<int>(parse_int(value));
    else if (is("run", "out_dir")) c.out_dir = value;
    else throw std::invalid_argument("unknown config key: " + section + "." + key);
}

void validate(const RunConfig& c) {
    auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
    if (c.N < 5) fail("pair.N must be >= 5");
    if (!(c.p > 0)) fail("pair.p must be positive");
    if (!(c.r_max > 0)) fail("grid.r_max must be positive");
    if (c.nodes < 16) fail("grid.nodes must be >= 16");
    if (c.k_list.empty()) fail("polygon.k_list must be non-empty");
    for (std::size_t i = 0; i < c.k_list.size(); ++i) {
        if (c.k_list[i] < 1) fail("polygon.k_list entries must be positive");
        if (i > 0 && c.k_list[i] <= c.k_list[i - 1]) fail("polygon.k_list must be increasing");
    }
    if (!(c.mu0 > 0) || !(c.r > 0) || !(c.lambda > 0))
        fail("polygon.mu0, polygon.r, polygon.lambda must be positive");
    if (c.budget == 0) fail("mc.budget must be positive");
    if (c.per_scale < 1) fail("norms.per_scale must be >= 1");
    if (!(c.box_lo > 0) || !(c.box_hi > c.box_lo))
        fail("landscape box must satisfy 0 < box_lo < box_hi");
    if (c.resolution < 64) fail("landscape.resolution must be >= 64");
    if (c.grid_n < 2) fail("landscape.grid_n must be >= 2");
    if (c.threads < 0) fail("run.threads must be >= 0");
    if (c.out_dir.empty()) fail("run.out_dir must be non-empty");
}

}  // namespace

std::string serialize(const RunConfig& c) {
    std::ostringstream os;
    os << "[pair]\n"
       << "N = " << c.N << "\n"
       << "p = " << fmt(c.p) << "\n\n"
       << "[grid]\n"
       << "r_max = " << fmt(c.r_max) << "\n"
       << "nodes = " << c.nodes << "\n\n"
       << "[polygon]\n"
       << "k_list = ";
    for (std::size_t i = 0; i < c.k_list.size(); ++i) os << (i ? "," : "") << c.k_list[i];
    os << "\n"
       << "mu0 = " << fmt(c.mu0) << "\n"
       << "r = " << fmt(c.r) << "\n"
       << "lambda = " << fmt(c.lambda) << "\n\n"
       << "[mc]\n"
       << "budget = " << c.budget << "\n"
       << "seed = " << c.seed << "\n\n"
       << "[norms]\n"
       << "per_scale = " << c.per_scale << "\n\n"
       << "[landscape]\n"
       << "box_lo = " << fmt(c.box_lo) << "\n"
       << "box_hi = " << fmt(c.box_hi) << "\n"
       << "resolution = " << c.resolution << "\n"
       << "grid_n = " << c.grid_n << "\n\n"
       << "[run]\n"
       << "threads = " << c.threads << "\n"
       << "out_dir = " << c.out_dir << "\n";
    return os.str();
}

RunConfig parse_config(std::istream& in) {
    RunConfig c;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        set_key(c, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    validate(c);
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    return parse_config(in);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must be section.key=value: " + assignment);
    std::string key = trim(assignment.substr(0, eq));
    auto dot = key.find('.');
    if (dot == std::string::npos)
        throw std::invalid_argument("override key must be section.key: " + key);
    set_key(cfg, key.substr(0, dot), key.substr(dot + 1), trim(assignment.substr(eq + 1)));
    validate(cfg);
}

std::string config_hash(const RunConfig& cfg) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : serialize(cfg)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

using nlohmann::json;

std::string timestamp_utc() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

// CSV artifacts carry the config hash and seed as leading comment lines,
// ahead of the module's exact header.
std::string csv_stamp(const RunConfig& cfg) {
    std::ostringstream os;
    os << "# config_hash = " << config_hash(cfg) << "\n# seed = " << cfg.seed << "\n";
    return os.str();
}

void write_json(const std::filesystem::path& path, const RunConfig& cfg, json j) {
    j["config_hash"] = config_hash(cfg);
    j["seed"] = cfg.seed;
    j["metadata"] = {{"timestamp", timestamp_utc()}};
    write_text(path, j.dump(2) + "\n");
}

struct Solved {
    core::CriticalPair cp;
    radial::GroundState gs;
};

Solved solve(const RunConfig& cfg) {
    Solved s;
    s.cp = core::make_critical_pair(cfg.N, cfg.p);
    radial::GridOpts opts;
    opts.r_max = cfg.r_max;
    opts.nodes = cfg.nodes;
    s.gs = radial::solve_ground_state(s.cp, opts);
    return s;
}

int cmd_ground_state(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    auto s = solve(cfg);
    auto tail = radial::tail_constants(s.gs);
    std::ostringstream csv;
    csv << csv_stamp(cfg);
    radial::write_profiles_csv(s.gs, csv);
    write_text(out / "profile.csv", csv.str());
    json j;
    j["a"] = tail.a;
    j["b"] = tail.b;
    j["exp_u"] = tail.exp_u;
    j["exp_v"] = tail.exp_v;
    j["d_u"] = tail.d_u;
    j["d_v"] = tail.d_v;
    j["log_branch"] = tail.log_branch;
    j["fit_residual"] = tail.fit_residual;
    j["beta"] = s.gs.beta;
    j["A"] = s.gs.A;
    j["ode_residual"] = radial::ode_residual_max(s.gs);
    write_json(out / "tail_report.json", cfg, j);
    log << "ground-state: beta=" << fmt(s.gs.beta) << " a=" << fmt(tail.a)
        << " b=" << fmt(tail.b) << " A=" << fmt(s.gs.A) << "\n";
    return exit_ok;
}

int cmd_constants(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    auto s = solve(cfg);
    auto w = radial::solve_w(s.cp, s.gs);
    auto c = energy::interaction_constants(s.gs, w);
    json j;
    j["btilde11"] = c.btilde11;
    j["B11"] = c.B11;
    j["B1"] = c.B1;
    j["B2"] = c.B2;
    j["A"] = c.A;
    write_json(out / "constants.json", cfg, j);
    log << "constants: btilde11=" << fmt(c.btilde11) << " B1=" << fmt(c.B1)
        << " B2=" << fmt(c.B2) << " A=" << fmt(c.A) << "\n";
    return exit_ok;
}

int cmd_phi_check(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    auto s = solve(cfg);
    auto w = radial::solve_w(s.cp, s.gs);
    std::ostringstream csv;
    csv << csv_stamp(cfg);
    csv.precision(17);
    csv << "k,mu,mc,mc_stderr,asymptotic,ratio\n";
    bool mc_ok = true;
    double prev_gap = -1.0;
    bool trend_ok = true;
    for (int k : cfg.k_list) {
        auto pc = core::make_polygon_config(s.cp, k, cfg.mu0, cfg.r, cfg.lambda);
        const Vec& y = pc.centers[0];
        auto asym = bubble::eval_phi(pc, s.gs, w, y, bubble::PhiMode::asymptotic);
        auto mc = bubble::eval_phi(pc, s.gs, w, y, bubble::PhiMode::montecarlo, cfg.budget,
                                   cfg.seed);
        double ratio = mc.value / asym.value;
        csv << k << ',' << pc.mu << ',' << mc.value << ',' << mc.stderr_ << ','
            << asym.value << ',' << ratio << '\n';
        mc_ok = mc_ok && mc.ok;
        double gap = std::abs(ratio - 1.0);
        double slack = 2.0 * mc.stderr_ / std::abs(asym.value);
        if (prev_gap >= 0 && gap > prev_gap + slack) trend_ok = false;
        prev_gap = gap;
        log << "phi-check: k=" << k << " ratio=" << fmt(ratio)
            << " stderr=" << fmt(mc.stderr_ / std::abs(asym.value)) << "\n";
    }
    write_text(out / "phi_check.csv", csv.str());
    if (!mc_ok) return exit_numerical_error;
    return trend_ok ? exit_ok : exit_trend_failure;
}

int cmd_expansion(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    auto s = solve(cfg);
    auto w = radial::solve_w(s.cp, s.gs);
    auto rows = energy::expansion_convergence(s.gs, w, cfg.mu0, cfg.r, cfg.lambda, cfg.k_list,
                                              cfg.budget, cfg.seed);
    std::ostringstream csv;
    csv << csv_stamp(cfg);
    energy::write_convergence_csv(rows, csv);
    write_text(out / "expansion.csv", csv.str());
    bool trend_ok = true;
    double exp_u = s.cp.N / (s.cp.q + 1.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        log << "expansion: k=" << rows[i].k << " scaled_residual="
            << fmt(rows[i].scaled_residual) << "\n";
        if (i == 0) continue;
        double slack = (rows[i].stderr_ / rows[i].k) * std::pow(rows[i].mu, exp_u) +
                       (rows[i - 1].stderr_ / rows[i - 1].k) * std::pow(rows[i - 1].mu, exp_u);
        if (std::abs(rows[i].scaled_residual) >
            std::abs(rows[i - 1].scaled_residual) + slack)
            trend_ok = false;
    }
    return trend_ok ? exit_ok : exit_trend_failure;
}

int cmd_error_norm(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    auto s = solve(cfg);
    auto w = radial::solve_w(s.cp, s.gs);
    auto rows = norms::error_norm_check(s.gs, w, cfg.mu0, cfg.r, cfg.lambda, cfg.k_list,
                                        cfg.per_scale, cfg.seed);
    std::ostringstream csv;
    csv << csv_stamp(cfg);
    norms::write_error_norm_csv(rows, csv);
    write_text(out / "error_norm.csv", csv.str());
    bool trend_ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        log << "error-norm: k=" << rows[i].k << " scaled=" << fmt(rows[i].scaled) << "\n";
        if (i > 0 && !(rows[i].scaled < rows[i - 1].scaled)) trend_ok = false;
    }
    return trend_ok ? exit_ok : exit_trend_failure;
}

int cmd_landscape(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    auto s = solve(cfg);
    auto w = radial::solve_w(s.cp, s.gs);
    reduced::ReducedLandscape L;
    L.consts = energy::interaction_constants(s.gs, w);
    L.gs = &s.gs;
    L.box_lo = cfg.box_lo;
    L.box_hi = cfg.box_hi;
    std::ostringstream csv;
    csv << csv_stamp(cfg);
    reduced::write_landscape_csv(L, cfg.grid_n, csv);
    write_text(out / "landscape.csv", csv.str());
    auto res = reduced::find_interior_max(L, cfg.resolution);
    json j;
    j["M0"] = res.M0;
    j["Lambda"] = res.Lambda;
    j["value"] = res.value;
    j["margin"] = res.margin;
    j["box_lo"] = res.box_lo;
    j["box_hi"] = res.box_hi;
    write_json(out / "landscape.json", cfg, j);
    log << "landscape: M0=" << fmt(res.M0) << " Lambda=" << fmt(res.Lambda)
        << " margin=" << fmt(res.margin) << "\n";
    return exit_ok;
}

int cmd_scaling_check(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    auto s = solve(cfg);
    auto w = radial::solve_w(s.cp, s.gs);
    int k = cfg.k_list.front();
    double exp_u = s.cp.N / (s.cp.q + 1.0), exp_v = s.cp.N / (s.cp.p + 1.0);
    quad::CounterRng rng(cfg.seed, 777);
    double worst_ansatz = 0;
    for (int i = 0; i < 100; ++i) {
        double t = 0.5 + 1.5 * rng.uniform();
        auto c1 = core::make_polygon_config(s.cp, k, cfg.mu0, cfg.r, cfg.lambda);
        auto c2 = core::make_polygon_config(s.cp, k, t * cfg.mu0, cfg.r / t, t * cfg.lambda);
        Vec y(cfg.N);
        for (int d = 0; d < cfg.N; ++d) y[d] = 2.0 * cfg.r * rng.normal();
        Vec ys = y;
        ys *= 1.0 / t;
        auto f1 = bubble::eval_multibubble(c1, s.gs, y);
        auto f2 = bubble::eval_multibubble(c2, s.gs, ys);
        double su = std::pow(t, exp_u), sv = std::pow(t, exp_v);
        auto rel = [](double got, double want) {
            return std::abs(got - want) / std::max(std::abs(want), 1e-300);
        };
        worst_ansatz = std::max({worst_ansatz, rel(f2.U_sum, su * f1.U_sum),
                                 rel(f2.V_sum, sv * f1.V_sum), rel(f2.U_inner, su * f1.U_inner),
                                 rel(f2.V_inner, sv * f1.V_inner)});
    }
    reduced::ReducedLandscape L;
    L.consts = energy::interaction_constants(s.gs, w);
    L.gs = &s.gs;
    double worst_F = 0;
    for (int i = 0; i < 100; ++i) {
        double mu0 = 0.2 + 4.0 * rng.uniform();
        double r = 0.2 + 4.0 * rng.uniform();
        double lam = 0.2 + 4.0 * rng.uniform();
        double a = reduced::F(L, mu0, r, lam);
        double b = reduced::F(L, r * mu0, 1.0, r * lam);
        worst_F = std::max(worst_F, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
    }
    bool pass = worst_ansatz <= 1e-8 && worst_F <= 1e-12;
    json j;
    j["worst_rel_ansatz"] = worst_ansatz;
    j["ansatz_tolerance"] = 1e-8;
    j["worst_rel_F"] = worst_F;
    j["F_tolerance"] = 1e-12;
    j["pass"] = pass;
    write_json(out / "scaling.json", cfg, j);
    log << "scaling-check: worst_rel_ansatz=" << fmt(worst_ansatz)
        << " worst_rel_F=" << fmt(worst_F) << (pass ? " pass" : " FAIL") << "\n";
    return pass ? exit_ok : exit_trend_failure;
}

}  // namespace

int run_command(const std::string& command, const RunConfig& cfg, std::ostream& log) {
    std::filesystem::path out(cfg.out_dir);
    auto record_error = [&](int code, const std::string& msg) {
        json j;
        j["error"] = {{"code", code}, {"message", msg}, {"command", command}};
        j["config_hash"] = config_hash(cfg);
        log << j.dump() << "\n";
        std::error_code ec;
        std::filesystem::create_directories(out, ec);
        if (!ec) {
            std::ofstream f(out / "error.json", std::ios::binary);
            if (f) f << j.dump(2) << "\n";
        }
        return code;
    };
    try {
        quad::set_default_threads(cfg.threads);
        std::filesystem::create_directories(out);
        if (command == "ground-state") return cmd_ground_state(cfg, out, log);
        if (command == "constants") return cmd_constants(cfg, out, log);
        if (command == "phi-check") return cmd_phi_check(cfg, out, log);
        if (command == "expansion") return cmd_expansion(cfg, out, log);
        if (command == "error-norm") return cmd_error_norm(cfg, out, log);
        if (command == "landscape") return cmd_landscape(cfg, out, log);
        if (command == "scaling-check") return cmd_scaling_check(cfg, out, log);
        return record_error(exit_config_error, "unknown command: " + command);
    } catch (const std::invalid_argument& e) {
        return record_error(exit_config_error, e.what());
    } catch (const std::exception& e) {
        return record_error(exit_numerical_error, e.what());
    }
}

}  // namespace crown::cli
