#pragma once

#include <vector>

#include "crown/vec.hpp"

namespace crown::core {

// Exponent pair on the critical hyperbola 1/(p+1) + 1/(q+1) = (N-2)/N,
// with q derived from (N, p) so the identity holds by construction.
struct CriticalPair {
    int N = 0;
    double p = 0;
    double q = 0;
    double tau = 0;  // N / ((p+1)(N-2))
    bool in_admissible_range = false;  // p in (N/(N-2), (N+2)/(N-2)]

    double hyperbola_residual() const;
};

// Throws std::invalid_argument for N < 5 or p outside (2/(N-2), (N+2)/(N-2)].
CriticalPair make_critical_pair(int N, double p);

// Vertices of the regular k-gon of radius r in the first coordinate plane.
std::vector<Vec> polygon_centers(int k, double r, int N);

// sum_{j=2}^k |x_j - x_1|^{-s} = (2r)^{-s} sum_{m=1}^{k-1} sin(m pi/k)^{-s}.
// Computed so that pairwise_sum(k, r, s) == pow(r, -s) * pairwise_sum(k, 1, s)
// holds exactly.
double pairwise_sum(int k, double r, double s);

// Limit of r^s k^{-s} pairwise_sum(k, r, s) as k -> infinity (s = N-2):
// 2 zeta(s) / (2 pi)^s.
double pairwise_sum_limit(double s);

// Riemann zeta for real s > 1 (Euler-Maclaurin corrected partial sum).
double riemann_zeta(double s);

struct PolygonConfig {
    CriticalPair pair;
    int k = 0;
    double mu0 = 0;   // inner bubble scale
    double r = 0;     // polygon radius
    double lambda = 0;
    double mu = 0;    // lambda * k^{(p+1)(N-2)/N}
    std::vector<Vec> centers;
};

PolygonConfig make_polygon_config(const CriticalPair& pair, int k, double mu0, double r,
                                  double lambda);

// Rotation by 2(j-1)pi/k in the first coordinate plane (j = 1 is the identity).
Vec rotate(const Vec& y, int j, int k);

// Reflection flipping coordinate h (1-based, 2 <= h <= N).
Vec reflect(const Vec& y, int h);

// Phi_j followed optionally by Psi_h; h = 0 means no reflection.
Vec apply_symmetry(const PolygonConfig& cfg, const Vec& y, int j, int h = 0);

// Index j of the sector Omega_j containing y (angular condition around x_j);
// boundary points go to the lower index.
int sector_index(const Vec& y, int k);

bool in_first_sector(const Vec& y, int k);

// Rotate y into Omega_1; returns the rotation index used via *j_out if given.
Vec fold_to_first_sector(const Vec& y, int k, int* j_out = nullptr);

}  // namespace crown::core
