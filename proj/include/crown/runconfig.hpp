#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace crown::cli {

// Line-oriented "key = value" configuration with [section] headers and '#'
// comments. Every field below lists its section, key, and default; serialize
// emits the canonical form (all keys, fixed order, 17 significant digits)
// and parse(serialize(c)) reproduces c exactly.
struct RunConfig {
    // [pair]
    int N = 6;       // space dimension (N >= 5)
    double p = 2.0;  // first exponent; q comes from the critical hyperbola

    // [grid] radial solver grid
    double r_max = 1e4;  // outer radius of the shooting grid
    int nodes = 4096;    // grid nodes

    // [polygon]
    std::vector<int> k_list = {8, 16, 32};  // polygon sizes, increasing
    double mu0 = 1.0;                       // inner bubble scale
    double r = 1.0;                         // polygon radius
    double lambda = 1.0;                    // outer scale factor (mu = lambda k^{(p+1)(N-2)/N})

    // [mc]
    std::uint64_t budget = 200000;  // Monte Carlo samples per estimate
    std::uint64_t seed = 1;         // root seed for all sub-streams

    // [norms]
    int per_scale = 32;  // sample-plan points per center and scale

    // [landscape]
    double box_lo = 0.125;  // search box lower corner
    double box_hi = 8.0;    // search box upper corner
    int resolution = 128;   // grid scan resolution
    int grid_n = 64;        // points in the emitted landscape CSV

    // [run]
    int threads = 0;             // worker pool size; 0 = hardware concurrency
    std::string out_dir = "out"; // artifact directory, created when missing

    bool operator==(const RunConfig&) const = default;
};

// Canonical text form (see above). Round-trips through parse_config.
std::string serialize(const RunConfig& cfg);

// Throws std::invalid_argument on unknown sections/keys, malformed lines,
// or out-of-range values.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

// Apply one "section.key=value" override (same validation as parse_config).
void apply_override(RunConfig& cfg, const std::string& assignment);

// FNV-1a (64-bit) of the canonical serialization, as 16 hex digits. Embedded
// in every artifact so outputs are traceable to their exact configuration.
std::string config_hash(const RunConfig& cfg);

// Exit codes of the command layer.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 2;     // bad config file or arguments
inline constexpr int exit_numerical_error = 3;  // solver/quadrature failure
inline constexpr int exit_trend_failure = 4;    // computed, but the expected
                                                // convergence trend is violated

// Execute one subcommand: "ground-state", "constants", "phi-check",
// "expansion", "error-norm", "landscape", or "scaling-check". Writes the
// command's artifacts into cfg.out_dir and a human-readable summary line to
// `log`. On failure writes a machine-readable error record (error.json and a
// JSON line on `log`) and returns the matching exit code.
int run_command(const std::string& command, const RunConfig& cfg, std::ostream& log);

}  // namespace crown::cli
