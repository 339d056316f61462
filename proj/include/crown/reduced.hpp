#pragma once

#include <iosfwd>

#include "crown/energy.hpp"
#include "crown/radial.hpp"

namespace crown::reduced {

// Leading-order energy landscape in the configuration parameters:
//   F(mu0, r, lambda) = -B1 / (r lambda)^{N-2} + B2 U_{0,mu0}(r) / lambda^{N/(q+1)},
// invariant under (mu0, r, lambda) -> (r mu0, 1, r lambda), so the search
// runs over the r = 1 slice F*(M0, Lambda) on the box (box_lo, box_hi)^2.
struct ReducedLandscape {
    energy::InteractionConstants consts;
    const radial::GroundState* gs = nullptr;
    double box_lo = 0.125;
    double box_hi = 8.0;
};

double F(const ReducedLandscape& L, double mu0, double r, double lambda);

// F*(M0, Lambda) = F(M0, 1, Lambda).
double F_star(const ReducedLandscape& L, double M0, double lambda);

// Closed-form maximizer of Lambda -> F*(M0, Lambda):
//   Lambda(M0) = [(q+1)(N-2) B1 / (B2 N U_{0,M0}(1))]^{(p+1)/N}.
double lambda_star(const ReducedLandscape& L, double M0);

// F1*(M0) = F*(M0, Lambda(M0)), evaluated directly and through the
// closed-form representation proportional to (M0^{N/(q+1)} U(M0))^{(p+1)(N-2)/N};
// throws std::runtime_error when the two disagree beyond 1e-8 relative.
double f1_star(const ReducedLandscape& L, double M0);

struct MaxResult {
    double M0 = 0, Lambda = 0;
    double value = 0;   // F* at the maximizer
    double margin = 0;  // interior max minus the maximum over the box boundary
    double box_lo = 0, box_hi = 0;  // box actually used (after auto-expansion)
};

// Log-grid scan of F* over the box plus golden-section refinement of F1*
// along the closed-form ridge Lambda(M0). The returned maximizer represents
// a whole scaling orbit (M0/t, t, Lambda/t) of critical configurations.
// When the margin over the boundary is not positive the box is doubled
// (auto_expand) or an std::runtime_error is thrown.
MaxResult find_interior_max(ReducedLandscape L, int resolution = 128, bool auto_expand = true);

// CSV "M0,Lambda,Fstar" on a log grid of n points over the box.
void write_landscape_csv(const ReducedLandscape& L, int n, std::ostream& os);

}  // namespace crown::reduced
