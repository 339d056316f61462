#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "crown/core.hpp"
#include "crown/radial.hpp"
#include "crown/vec.hpp"

namespace crown::norms {

// The four weighted sup-norms: *-norms measure corrections at the bubbles'
// own amplitude, **-norms measure equation residuals (two extra powers of
// the scale from the Laplacian).
enum class NormKind { star1, star2, dstar1, dstar2 };

struct WeightedNormSpec {
    NormKind kind = NormKind::star1;
    double mu_pow = 0;     // alpha in mu^alpha
    double decay_pow = 0;  // beta in (1 + mu|y-x_j|)^{-beta}
};

// Exponent table:
//   (*,1)  -> (N/(q+1),     N/(q+1)+tau)
//   (*,2)  -> (N/(p+1),     N/(p+1)+tau)
//   (**,1) -> (N/(q+1)+2,   N/(q+1)+2+tau)
//   (**,2) -> (N/(p+1)+2,   N/(p+1)+2+tau)
WeightedNormSpec make_norm_spec(NormKind kind, const core::CriticalPair& pair);

// sum_j mu^alpha (1 + mu|y-x_j|)^{-beta} over the k polygon centers.
double weight_sum(const core::PolygonConfig& cfg, const WeightedNormSpec& spec, const Vec& y);

// Deterministic point set over which the sups are approximated (a lower
// bound of the true sup): the centers themselves, the origin, stratified
// shells around every center at scales 1/mu, 1/k and 1, points on the
// sector boundary, and far-field shells.
struct SamplePlan {
    std::vector<Vec> points;
    std::size_t far_field_start = 0;  // indices >= this lie on far-field shells
};

SamplePlan make_sample_plan(const core::PolygonConfig& cfg, int per_scale, std::uint64_t seed);

// max_i |fvals[i]| / weight_sum(points[i]); fvals aligned with plan.points.
double weighted_ratio(const std::vector<double>& fvals, const SamplePlan& plan,
                      const core::PolygonConfig& cfg, const WeightedNormSpec& spec);

using Field = std::function<double(const Vec&)>;

struct RatioResult {
    double value = 0;
    std::size_t argmax = 0;
    bool far_field_max = false;
};

RatioResult weighted_norm(const Field& f, const SamplePlan& plan, const core::PolygonConfig& cfg,
                          const WeightedNormSpec& spec);

// Pointwise ansatz error (l1, l2) via the algebraic identities
//   l1 = -V0^p + V^p + |V*|^{p-1} V*,
//   l2 = -U0^q + sum_j U_j^q + |U*|^{q-1} U*,
// no differentiation involved. include_inner = false removes the inner
// bubble (U0 = V0 = 0), which for k = 1 makes the ansatz exact and l = 0.
std::pair<double, double> error_term(const core::PolygonConfig& cfg,
                                     const radial::GroundState& gs, const radial::AuxProfileW& w,
                                     const Vec& y, bool include_inner = true);

struct ErrorNormRow {
    int k = 0;
    double mu = 0;
    double l_norm = 0;   // ||l1||_{**,1} + ||l2||_{**,2} over the plan
    double scaled = 0;   // l_norm * mu^{N/(2(q+1))}
    bool far_field_max = false;  // plan-coverage warning flag
};

std::vector<ErrorNormRow> error_norm_check(const radial::GroundState& gs,
                                           const radial::AuxProfileW& w, double mu0, double r,
                                           double lambda, const std::vector<int>& k_list,
                                           int per_scale, std::uint64_t seed);

// CSV with header "k,mu,l_norm,scaled".
void write_error_norm_csv(const std::vector<ErrorNormRow>& rows, std::ostream& os);

// Second-order remainder of t -> |t|^{e-1} t at base, increment omega:
// |base+omega|^{e-1}(base+omega) - |base|^{e-1}base - e|base|^{e-1}omega.
double second_order_remainder(double base, double omega, double e);

// (N1, N2) at y for caller-supplied perturbation fields:
//   N1(omega2) = second-order remainder of the p-power at V*,
//   N2(omega1) = second-order remainder of the q-power at U*.
std::pair<double, double> nonlinearity(const core::PolygonConfig& cfg,
                                       const radial::GroundState& gs,
                                       const radial::AuxProfileW& w, const Field& omega1,
                                       const Field& omega2, const Vec& y);

}  // namespace crown::norms
