#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "crown/core.hpp"
#include "crown/quad.hpp"
#include "crown/radial.hpp"

namespace crown::energy {

// Constants of the two-scale energy expansion. B1 drives the polygon
// (outer-bubble) interaction, B2 the coupling with the inner bubble.
struct InteractionConstants {
    double btilde11 = 0;  // lim r^s k^{-s} sum_{j>=2} |x_j-x_1|^{-s}, s = N-2
    double B11 = 0;       // p * b * btilde11 (interaction-profile amplitude)
    double B1 = 0;        // (btilde11/(p+1)) (a int U^q + p b int U^q w)
    double B2 = 0;        // int U^q, plus int V^p on the p = (N+2)/(N-2) branch
    double A = 0;         // ground energy
};

// Ground energy A computed two independent ways: the defining functional
// (gradient coupling minus the potential terms, all as radial moments) and
// the shortcut (2/N) int U^{q+1}. Throws std::runtime_error when the two
// disagree by more than 0.5% (profile inaccuracy); returns the shortcut.
double ground_energy(const radial::GroundState& gs);

InteractionConstants interaction_constants(const radial::GroundState& gs,
                                           const radial::AuxProfileW& w);

// k [ -B1 k^{N-2} / (r^{N-2} mu^{N-2}) + B2 U_{0,mu0}(r) / mu^{N/(q+1)} ].
double predicted_correction(const InteractionConstants& c, const core::PolygonConfig& cfg,
                            const radial::GroundState& gs);

// Decomposition of the energy correction I(U*,V*) - (k+1)A. The coupling
// terms between the inner bubble and the polygon field are split into the
// linear cross integrals and the power brackets
//   J1 = -1/(p+1) int (|V0-V|^{p+1} - |V|^{p+1} - |V0|^{p+1}),
//   J2 = -1/(q+1) int (|U0-U|^{q+1} - |U|^{q+1} - |U0|^{q+1}),
// so that
//   measured_total = IUV_minus_kA + J1 + J2 - cross_V - cross_U
// holds exactly as an algebraic assembly of the piece estimates (which share
// one sample set). measured_total.value is that assembly; its stderr comes
// from the combined per-sample integrand on the same samples.
struct EnergyBreakdown {
    double kA_part = 0;  // (k+1) A
    quad::McEstimate J1, J2;
    quad::McEstimate IUV_minus_kA;          // polygon self-interaction deficit
    quad::McEstimate cross_V, cross_U;      // int V0^p V, int U0^q U
    quad::McEstimate measured_total;
    double predicted = 0;
    double residual = 0;    // measured_total.value - predicted
    bool comparable = true; // false when stderr exceeds 25% of |predicted|
};

EnergyBreakdown measure_expansion(const core::PolygonConfig& cfg, const radial::GroundState& gs,
                                  const radial::AuxProfileW& w, std::uint64_t budget,
                                  std::uint64_t seed);

struct ConvergenceRow {
    int k = 0;
    double mu = 0;
    double measured = 0;
    double stderr_ = 0;
    double predicted = 0;
    double residual = 0;
    double scaled_residual = 0;  // (residual / k) * mu^{N/(q+1)}, per bubble
};

// One measured/predicted comparison per k in k_list (increasing), at fixed
// (mu0, r, lambda).
std::vector<ConvergenceRow> expansion_convergence(const radial::GroundState& gs,
                                                  const radial::AuxProfileW& w, double mu0,
                                                  double r, double lambda,
                                                  const std::vector<int>& k_list,
                                                  std::uint64_t budget, std::uint64_t seed);

// CSV with header "k,mu,measured,stderr,predicted,residual,scaled_residual".
void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& os);

}  // namespace crown::energy
