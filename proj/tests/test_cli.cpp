#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "crown/runconfig.hpp"
#include "doctest.h"
#include "json.hpp"

#ifdef _WIN32
#error "posix-only test harness"
#endif
#include <sys/wait.h>

using namespace crown;
namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "crown_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// Run the CLI binary (path from CROWN_CLI) and return its exit code.
int run_cli(const std::string& args, std::string* output = nullptr) {
    const char* bin = std::getenv("CROWN_CLI");
    REQUIRE_MESSAGE(bin != nullptr, "CROWN_CLI must point at the built binary");
    fs::path cap = work_dir() / "stdout.txt";
    std::string cmd = std::string(bin) + " " + args + " > " + cap.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    if (output) {
        std::ifstream in(cap);
        std::ostringstream ss;
        ss << in.rdbuf();
        *output = ss.str();
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), ("missing artifact: " + p.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string drop_timestamp(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (line.find("timestamp") == std::string::npos) out << line << '\n';
    return out.str();
}

}  // namespace

TEST_CASE("serialize/parse round-trip is the identity") {
    cli::RunConfig def;
    std::istringstream in(cli::serialize(def));
    CHECK(cli::parse_config(in) == def);

    cli::RunConfig mod;
    mod.N = 8;
    mod.p = 5.0 / 3.0;
    mod.k_list = {4, 9, 21};
    mod.lambda = 0.03125;
    mod.budget = 123456789;
    mod.seed = 987654321;
    mod.out_dir = "results/run_01";
    mod.threads = 3;
    std::istringstream in2(cli::serialize(mod));
    CHECK(cli::parse_config(in2) == mod);
}

TEST_CASE("parser accepts comments and blank lines, rejects malformed input") {
    std::istringstream ok("# leading comment\n\n[pair]\nN = 7  # trailing comment\n");
    CHECK(cli::parse_config(ok).N == 7);

    auto reject = [](const std::string& text) {
        std::istringstream in(text);
        CHECK_THROWS_AS(cli::parse_config(in), std::invalid_argument);
    };
    reject("[pair]\nN 7\n");                      // missing '='
    reject("[pair\nN = 7\n");                     // malformed section header
    reject("[pair]\nbogus = 1\n");                // unknown key
    reject("[nowhere]\nN = 7\n");                 // unknown section
    reject("[pair]\nN = 4\n");                    // below the admissible range
    reject("[pair]\np = two\n");                  // malformed number
    reject("[polygon]\nk_list = 8,8\n");          // not increasing
    reject("[polygon]\nk_list = \n");             // empty list
    reject("[landscape]\nresolution = 32\n");     // too coarse
    reject("[landscape]\nbox_lo = 9\n");          // box_lo >= box_hi
    reject("[mc]\nbudget = 0\n");
}

TEST_CASE("overrides use section.key=value with full validation") {
    cli::RunConfig c;
    cli::apply_override(c, "polygon.r=2.5");
    CHECK(c.r == 2.5);
    cli::apply_override(c, "polygon.k_list=3,5");
    CHECK(c.k_list == std::vector<int>{3, 5});
    CHECK_THROWS_AS(cli::apply_override(c, "r=2"), std::invalid_argument);
    CHECK_THROWS_AS(cli::apply_override(c, "polygon.r"), std::invalid_argument);
    CHECK_THROWS_AS(cli::apply_override(c, "pair.N=4"), std::invalid_argument);
}

TEST_CASE("config hash: 16 hex digits, deterministic, field-sensitive") {
    cli::RunConfig a, b;
    std::string ha = cli::config_hash(a);
    CHECK(ha.size() == 16);
    CHECK(ha.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(cli::config_hash(b) == ha);
    b.seed = 2;
    CHECK(cli::config_hash(b) != ha);
}

TEST_CASE("--print-config emits the defaults") {
    std::string out;
    CHECK(run_cli("--print-config", &out) == cli::exit_ok);
    std::istringstream in(out);
    CHECK(cli::parse_config(in) == cli::RunConfig{});
}

TEST_CASE("ground-state artifacts: stamped profile CSV and tail report") {
    fs::path dir = work_dir() / "gs";
    CHECK(run_cli("ground-state -o " + dir.string()) == cli::exit_ok);

    std::string csv = read_file(dir / "profile.csv");
    CHECK(csv.rfind("# config_hash = ", 0) == 0);
    CHECK(csv.find("# seed = 1\n") != std::string::npos);
    CHECK(csv.find("r,U,V,dU,dV\n") != std::string::npos);
    // normalization: the r = 0 row reads U = 1 (and V = 1 up to bisection width)
    CHECK(csv.find("\n0,1,0.99999999999") != std::string::npos);

    auto tail = nlohmann::json::parse(read_file(dir / "tail_report.json"));
    CHECK(tail["a"].get<double>() == doctest::Approx(576.0).epsilon(1e-3));
    CHECK(tail["b"].get<double>() == doctest::Approx(576.0).epsilon(1e-3));
    CHECK(tail["exp_u"].get<double>() == doctest::Approx(4.0).epsilon(0.0025));
    CHECK(tail["config_hash"].get<std::string>().size() == 16);
    CHECK(tail["metadata"].contains("timestamp"));
}

TEST_CASE("constants artifact carries the closed-form lattice constant") {
    fs::path dir = work_dir() / "constants";
    CHECK(run_cli("constants -o " + dir.string()) == cli::exit_ok);
    auto j = nlohmann::json::parse(read_file(dir / "constants.json"));
    CHECK(j["btilde11"].get<double>() == doctest::Approx(1.0 / 720.0).epsilon(1e-10));
    CHECK(j["B1"].get<double>() > 0);
    CHECK(j["B2"].get<double>() > 0);
    CHECK(j["A"].get<double>() > 0);
}

TEST_CASE("expansion pipeline recomputes everything it needs") {
    fs::path dir = work_dir() / "expansion";
    CHECK(run_cli("expansion -o " + dir.string() +
                  " --set polygon.k_list=8 --set polygon.lambda=8 --set mc.budget=20000") ==
          cli::exit_ok);
    std::string csv = read_file(dir / "expansion.csv");
    CHECK(csv.find("k,mu,measured,stderr,predicted,residual,scaled_residual\n") !=
          std::string::npos);
}

TEST_CASE("config errors exit with code 2 and a machine-readable record") {
    std::string out;
    CHECK(run_cli("constants --config /nonexistent.cfg", &out) == cli::exit_config_error);
    CHECK(out.find("\"code\":2") != std::string::npos);
    CHECK(run_cli("no-such-command", &out) == cli::exit_config_error);
    CHECK(run_cli("constants --set pair.N=4", &out) == cli::exit_config_error);

    // precondition failure inside a command: error.json lands in the out dir
    fs::path dir = work_dir() / "err";
    CHECK(run_cli("ground-state -o " + dir.string() + " --set grid.r_max=1", &out) ==
          cli::exit_config_error);
    auto j = nlohmann::json::parse(read_file(dir / "error.json"));
    CHECK(j["error"]["code"].get<int>() == 2);
    CHECK(j["error"]["command"].get<std::string>() == "ground-state");
    CHECK(!j["error"]["message"].get<std::string>().empty());
}

TEST_CASE("numerical failure exits with code 3") {
    fs::path dir = work_dir() / "num";
    // a 200-sample estimate cannot certify the interaction profile
    CHECK(run_cli("phi-check -o " + dir.string() +
                  " --set mc.budget=200 --set polygon.k_list=8") ==
          cli::exit_numerical_error);
    // the table is still written for inspection
    CHECK(fs::exists(dir / "phi_check.csv"));
}

TEST_CASE("violated convergence trend exits with code 4") {
    fs::path dir = work_dir() / "trend";
    // a huge inner scale breaks the error-norm decay at desk-scale k
    CHECK(run_cli("error-norm -o " + dir.string() +
                  " --set polygon.mu0=100 --set polygon.k_list=2,3") ==
          cli::exit_trend_failure);
    CHECK(fs::exists(dir / "error_norm.csv"));
}

TEST_CASE("replays are byte-identical (timestamps confined to metadata)") {
    fs::path dir = work_dir() / "replay";
    std::string args = " -o " + dir.string() + " --set polygon.k_list=4,8";

    CHECK(run_cli("error-norm" + args) == cli::exit_ok);
    std::string csv1 = read_file(dir / "error_norm.csv");
    CHECK(run_cli("error-norm" + args) == cli::exit_ok);
    CHECK(read_file(dir / "error_norm.csv") == csv1);

    CHECK(run_cli("scaling-check" + args) == cli::exit_ok);
    std::string j1 = read_file(dir / "scaling.json");
    CHECK(run_cli("scaling-check" + args) == cli::exit_ok);
    CHECK(drop_timestamp(read_file(dir / "scaling.json")) == drop_timestamp(j1));

    CHECK(run_cli("landscape" + args) == cli::exit_ok);
    std::string l1 = read_file(dir / "landscape.csv");
    CHECK(run_cli("landscape" + args) == cli::exit_ok);
    CHECK(read_file(dir / "landscape.csv") == l1);
}

TEST_CASE("scaling-check reports both invariances and passes") {
    fs::path dir = work_dir() / "scaling";
    CHECK(run_cli("scaling-check -o " + dir.string()) == cli::exit_ok);
    auto j = nlohmann::json::parse(read_file(dir / "scaling.json"));
    CHECK(j["worst_rel_ansatz"].get<double>() <= 1e-8);
    CHECK(j["worst_rel_F"].get<double>() <= 1e-12);
    CHECK(j["pass"].get<bool>());
}
