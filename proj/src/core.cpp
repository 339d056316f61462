#include "crown/core.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace crown::core {

namespace {
constexpr double pi = std::numbers::pi;
}

double CriticalPair::hyperbola_residual() const {
    return std::abs(1.0 / (p + 1) + 1.0 / (q + 1) - double(N - 2) / N);
}

CriticalPair make_critical_pair(int N, double p) {
    if (N < 5) throw std::invalid_argument("make_critical_pair: need N >= 5, got " + std::to_string(N));
    double p_lo = 2.0 / (N - 2);
    double p_hi = double(N + 2) / (N - 2);
    if (!(p > p_lo && p <= p_hi))
        throw std::invalid_argument("make_critical_pair: p outside (2/(N-2), (N+2)/(N-2)]");

    CriticalPair cp;
    cp.N = N;
    cp.p = p;
    // 1/(q+1) = (N-2)/N - 1/(p+1)
    double inv_q1 = double(N - 2) / N - 1.0 / (p + 1);
    cp.q = 1.0 / inv_q1 - 1.0;
    cp.tau = N / ((p + 1) * (N - 2));
    cp.in_admissible_range = p > double(N) / (N - 2);
    return cp;
}

std::vector<Vec> polygon_centers(int k, double r, int N) {
    if (k < 2) throw std::invalid_argument("polygon_centers: need k >= 2");
    if (!(r > 0)) throw std::invalid_argument("polygon_centers: need r > 0");
    std::vector<Vec> xs;
    xs.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        Vec x(N);
        double phi = 2.0 * j * pi / k;
        x[0] = r * std::cos(phi);
        x[1] = r * std::sin(phi);
        xs.push_back(x);
    }
    return xs;
}

double pairwise_sum(int k, double r, double s) {
    if (k < 2) throw std::invalid_argument("pairwise_sum: need k >= 2");
    if (!(r > 0) || !(s > 1)) throw std::invalid_argument("pairwise_sum: need r > 0, s > 1");
    if (s * std::log(k / pi) > 690.0) throw std::overflow_error("pairwise_sum: k^s overflows double");

    // Kahan sum, pairing m with k-m (equal terms) so the accumulation order is
    // independent of which half the index lives in.
    double sum = 0, comp = 0;
    auto add = [&](double t) {
        double y = t - comp;
        double u = sum + y;
        comp = (u - sum) - y;
        sum = u;
    };
    for (int m = k / 2; m >= 1; --m) {
        double term = std::pow(std::sin(m * pi / k), -s);
        if (2 * m == k)
            add(term);  // antipodal, unpaired
        else
            add(2.0 * term);
    }
    double base = std::pow(2.0, -s) * sum;
    return base * std::pow(r, -s);
}

double pairwise_sum_limit(double s) { return 2.0 * riemann_zeta(s) / std::pow(2.0 * pi, s); }

double riemann_zeta(double s) {
    if (!(s > 1)) throw std::invalid_argument("riemann_zeta: need s > 1");
    const int M = 200000;
    double sum = 0, comp = 0;
    for (int n = M; n >= 1; --n) {
        double y = std::pow(double(n), -s) - comp;
        double u = sum + y;
        comp = (u - sum) - y;
        sum = u;
    }
    // Euler-Maclaurin tail at M (partial sum above includes n = M, hence -1/2 term)
    double m = M;
    sum += std::pow(m, 1 - s) / (s - 1);
    sum -= 0.5 * std::pow(m, -s);
    sum += s / 12.0 * std::pow(m, -s - 1);
    sum -= s * (s + 1) * (s + 2) / 720.0 * std::pow(m, -s - 3);
    return sum;
}

PolygonConfig make_polygon_config(const CriticalPair& pair, int k, double mu0, double r,
                                  double lambda) {
    if (k < 1) throw std::invalid_argument("make_polygon_config: need k >= 1");
    if (!(mu0 > 0 && r > 0 && lambda > 0))
        throw std::invalid_argument("make_polygon_config: parameters must be positive");
    PolygonConfig cfg;
    cfg.pair = pair;
    cfg.k = k;
    cfg.mu0 = mu0;
    cfg.r = r;
    cfg.lambda = lambda;
    cfg.mu = lambda * std::pow(double(k), (pair.p + 1) * (pair.N - 2) / pair.N);
    if (k >= 2) {
        cfg.centers = polygon_centers(k, r, pair.N);
    } else {
        Vec x(pair.N);
        x[0] = r;
        cfg.centers.push_back(x);
    }
    return cfg;
}

Vec rotate(const Vec& y, int j, int k) {
    double phi = 2.0 * (j - 1) * pi / k;
    double c = std::cos(phi), s = std::sin(phi);
    Vec out = y;
    out[0] = c * y[0] - s * y[1];
    out[1] = s * y[0] + c * y[1];
    return out;
}

Vec reflect(const Vec& y, int h) {
    Vec out = y;
    out[h - 1] = -out[h - 1];
    return out;
}

Vec apply_symmetry(const PolygonConfig& cfg, const Vec& y, int j, int h) {
    if (j < 1 || j > cfg.k) throw std::out_of_range("apply_symmetry: rotation index");
    Vec out = rotate(y, j, cfg.k);
    if (h != 0) {
        if (h < 2 || h > cfg.pair.N) throw std::out_of_range("apply_symmetry: reflection index");
        out = reflect(out, h);
    }
    return out;
}

int sector_index(const Vec& y, int k) {
    double t = std::atan2(y[1], y[0]);  // (-pi, pi]
    double x = t * k / (2.0 * pi);      // sector j covers x in [j-1-1/2, j-1+1/2)
    double f = std::floor(x + 0.5);
    if (x + 0.5 == f) f -= 1.0;  // boundary: assign to the lower index
    long m = static_cast<long>(f) % k;
    if (m < 0) m += k;
    return static_cast<int>(m) + 1;
}

bool in_first_sector(const Vec& y, int k) { return sector_index(y, k) == 1; }

Vec fold_to_first_sector(const Vec& y, int k, int* j_out) {
    int j = sector_index(y, k);
    if (j_out) *j_out = j;
    if (j == 1) return y;
    // rotate by -(j-1) steps
    return rotate(y, k - j + 2 > k ? 1 : k - j + 2, k);
}

}  // namespace crown::core
