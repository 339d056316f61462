#pragma once

#include <cstdint>

#include "crown/core.hpp"
#include "crown/radial.hpp"
#include "crown/vec.hpp"

namespace crown::bubble {

// Scaled/translated copy of the ground state:
// (u, v)(y) = (mu^{N/(q+1)} U01(mu(y-x)), mu^{N/(p+1)} V01(mu(y-x))).
struct BubbleField {
    const radial::GroundState* gs = nullptr;
    Vec x;
    double mu = 1.0;

    double eval_u(const Vec& y) const;
    double eval_v(const Vec& y) const;
};

// Parameter derivatives of the bubble family at a point: the scale derivative
// of the inner bubble (Y0, Z0), and the radius- and scale-derivatives of the
// j-th outer bubble (Y_{j,1}, Z_{j,1}) and (Y_{j,2}, Z_{j,2}).
struct DerivativeValues {
    double Y0 = 0, Z0 = 0;
    double Yj1 = 0, Zj1 = 0;
    double Yj2 = 0, Zj2 = 0;
};

DerivativeValues eval_derivatives(const core::PolygonConfig& cfg, const radial::GroundState& gs,
                                  int j, const Vec& y);

// The multi-bubble field values entering the ansatz.
struct MultiField {
    double U_sum = 0, V_sum = 0;      // sum over the k outer bubbles
    double U_inner = 0, V_inner = 0;  // the opposite-sign inner bubble at scale mu0
    double V_star = 0;                // V_inner - V_sum
};

MultiField eval_multibubble(const core::PolygonConfig& cfg, const radial::GroundState& gs,
                            const Vec& y);

enum class PhiMode { asymptotic, montecarlo };

struct PhiResult {
    double value = 0;
    double stderr_ = 0;  // 0 in asymptotic mode
    bool ok = true;      // MC mode: false when stderr exceeds 10% of the value
};

// Interaction profile: the Newtonian potential of (sum_j V_j)^p - sum_j V_j^p.
// Asymptotic mode evaluates the closed-form leading behavior
// (B11 k^{N-2} / (r^{N-2} mu^{N/(p+1)})) * w(mu(y - x_1)) with
// B11 = p * b_{N,p} * 2 zeta(N-2)/(2 pi)^{N-2}; it requires y in the first
// sector. MC mode importance-samples the integral directly.
PhiResult eval_phi(const core::PolygonConfig& cfg, const radial::GroundState& gs,
                   const radial::AuxProfileW& w, const Vec& y, PhiMode mode,
                   std::uint64_t budget = 200000, std::uint64_t seed = 1);

// The projected field U(y) = sum_j U_j(y) + phi(y).
PhiResult eval_projection_U(const core::PolygonConfig& cfg, const radial::GroundState& gs,
                            const radial::AuxProfileW& w, const Vec& y, PhiMode mode,
                            std::uint64_t budget = 200000, std::uint64_t seed = 1);

// Pointwise comparison envelope for the projected field:
// sum_i mu^{N/(q+1)} (1 + mu|y-x_i|)^{-(N-2)}
//   + mu^{-pN/(q+1)} k^{p(N-2)-2} sum_i (1 + k|y-x_i|)^{-min(N-2, p(N-3-theta)-2)}.
double envelope_sum(const core::PolygonConfig& cfg, const Vec& y, double theta = 0.05);

}  // namespace crown::bubble
