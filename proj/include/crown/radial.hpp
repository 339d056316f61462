#pragma once

#include <iosfwd>
#include <vector>

#include "crown/core.hpp"

namespace crown::radial {

// Radial function on [0, r_max], quintic Hermite between nodes (value, first
// and second derivative stored at every node), two-term power-law model
// c * r^{-e} (1 + d/r^2) beyond the last node (times log r when tail_log).
struct RadialProfile {
    std::vector<double> grid;  // strictly increasing, grid[0] == 0
    std::vector<double> val;
    std::vector<double> d1;
    std::vector<double> d2;

    double tail_c = 0, tail_e = 0, tail_d = 0;
    bool tail_log = false;

    double r_max() const { return grid.back(); }
    double eval(double r) const;
    double eval_d(double r) const;
    double eval_d2(double r) const;  // second derivative of the interpolant

    // index of the interval [grid[i], grid[i+1]] containing r
    std::size_t locate(double r) const;
};

struct GridOpts {
    double r_max = 1e4;
    int nodes = 4096;
};

struct GroundState {
    core::CriticalPair pair;
    RadialProfile U, V;
    double beta = 0;          // V(0)
    double beta_bracket = 0;  // final bisection bracket width (classification margin)
    double a = 0, b = 0;      // tail constants of U and V
    double A = 0;             // ground energy (2/N) * int U^{q+1}
    double splice_r = 0;      // grid values beyond this radius come from the tail fit
};

// Shooting + bisection on beta = V(0). Throws std::runtime_error when no
// bracket is found or bisection fails to converge.
GroundState solve_ground_state(const core::CriticalPair& pair, const GridOpts& opts = {});

struct TailFit {
    double a = 0, b = 0;           // leading tail coefficients of U and V
    double exp_u = 0, exp_v = 0;   // log-log fitted decay exponents
    double d_u = 0, d_v = 0;       // second-order correction coefficients
    bool log_branch = false;       // p == N/(N-2): U tail carries a log factor
    double fit_residual = 0;       // max relative model misfit over the window
};

// Fit the outer-decade tails of a solved ground state.
TailFit tail_constants(const GroundState& gs);

struct AuxProfileW {
    RadialProfile w;
    double I_rmax = 0;  // int_0^{r_max} t^{N-1} V^{p-1} dt
};

// w(r) = int_r^inf s^{1-N} int_0^s t^{N-1} V^{p-1}(t) dt ds, the unique decaying
// solution of -(w'' + (N-1)/r w') = V^{p-1}. Requires (p-1)(N-2) > 2.
AuxProfileW solve_w(const core::CriticalPair& pair, const GroundState& gs);

// One factor of a radial integrand: profile (or its derivative) to a power.
struct MomentTerm {
    const RadialProfile* prof = nullptr;
    double power = 1.0;
    bool use_deriv = false;
};

// int_{R^N} prod_i f_i^{s_i} * r^{extra_r_power} as a radial integral:
// |S^{N-1}| int_0^inf (...) r^{N-1} dr, composite Gauss on the grid plus the
// analytic continuation of the fitted power-law tails. Throws on divergence.
double radial_moment(const std::vector<MomentTerm>& terms, double extra_r_power, int N);

// Largest scaled ODE residual over interval midpoints, derivatives taken from
// the interpolant by finite differences (independent of the stored d2).
double ode_residual_max(const GroundState& gs);

// CSV with header "r,U,V,dU,dV" at full grid resolution, 17 significant digits.
void write_profiles_csv(const GroundState& gs, std::ostream& os);

}  // namespace crown::radial
