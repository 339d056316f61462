#include "crown/reduced.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>

namespace crown::reduced {

namespace {

double inner_bubble(const ReducedLandscape& L, double mu0, double r) {
    const auto& cp = L.gs->pair;
    return std::pow(mu0, cp.N / (cp.q + 1.0)) * L.gs->U.eval(mu0 * r);
}

double golden_max(const std::function<double(double)>& f, double lo, double hi, int iters) {
    const double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return fc > fd ? c : d;
}

}  // namespace

double F(const ReducedLandscape& L, double mu0, double r, double lambda) {
    if (!(mu0 > 0) || !(r > 0) || !(lambda > 0))
        throw std::invalid_argument("F: arguments must be positive");
    const auto& cp = L.gs->pair;
    double s = double(cp.N - 2);
    return -L.consts.B1 / (std::pow(r, s) * std::pow(lambda, s)) +
           L.consts.B2 * inner_bubble(L, mu0, r) / std::pow(lambda, cp.N / (cp.q + 1.0));
}

double F_star(const ReducedLandscape& L, double M0, double lambda) { return F(L, M0, 1.0, lambda); }

double lambda_star(const ReducedLandscape& L, double M0) {
    if (!(M0 > 0)) throw std::invalid_argument("lambda_star: M0 must be positive");
    const auto& cp = L.gs->pair;
    double u = inner_bubble(L, M0, 1.0);
    return std::pow((cp.q + 1.0) * (cp.N - 2) * L.consts.B1 / (L.consts.B2 * cp.N * u),
                    (cp.p + 1.0) / cp.N);
}

double f1_star(const ReducedLandscape& L, double M0) {
    const auto& cp = L.gs->pair;
    double lam = lambda_star(L, M0);
    double direct = F_star(L, M0, lam);
    // closed-form representation via the hyperbola identities
    double u1 = std::pow(M0, cp.N / (cp.q + 1.0)) * L.gs->U.eval(M0);
    double pref = L.consts.B2 * cp.N / ((cp.p + 1.0) * (cp.N - 2));
    double inner = std::pow(
        L.consts.B2 * cp.N / ((cp.q + 1.0) * (cp.N - 2) * L.consts.B1), (cp.p + 1.0) / (cp.q + 1.0));
    double closed = pref * inner * std::pow(u1, (cp.p + 1.0) * (cp.N - 2) / cp.N);
    if (std::abs(direct - closed) > 1e-8 * std::abs(closed))
        throw std::runtime_error("f1_star: representations disagree");
    return direct;
}

MaxResult find_interior_max(ReducedLandscape L, int resolution, bool auto_expand) {
    if (resolution < 64) throw std::invalid_argument("find_interior_max: resolution < 64");
    for (int attempt = 0;; ++attempt) {
        const int n = resolution;
        double llo = std::log(L.box_lo), lhi = std::log(L.box_hi);
        auto node = [&](int i) { return std::exp(llo + (lhi - llo) * i / double(n - 1)); };
        double best = -1e300, best_m = 0, best_l = 0, boundary = -1e300;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double m0 = node(i), lam = node(j);
                double v = F_star(L, m0, lam);
                if (v > best) {
                    best = v;
                    best_m = m0;
                    best_l = lam;
                }
                if (i == 0 || j == 0 || i == n - 1 || j == n - 1)
                    boundary = std::max(boundary, v);
            }
        // refine along the closed-form ridge: maximize F1*(M0) by golden
        // section, exactly the proof's inner maximization
        double m_star = golden_max([&](double m) { return F_star(L, m, lambda_star(L, m)); },
                                   L.box_lo, L.box_hi, 80);
        double l_star = lambda_star(L, m_star);
        double v_star = F_star(L, m_star, l_star);
        if (v_star >= best) {
            best = v_star;
            best_m = m_star;
            best_l = l_star;
        }
        // require the maximizer to sit strictly inside, with a 1% relative
        // margin, so a ridge climbing toward an edge is not mistaken for an
        // interior critical point
        const double tol = 1.01;
        bool interior = best_m > L.box_lo * tol && best_m < L.box_hi / tol &&
                        best_l > L.box_lo * tol && best_l < L.box_hi / tol;
        double margin = best - boundary;
        if (interior && margin > 0) {
            MaxResult out;
            out.M0 = best_m;
            out.Lambda = best_l;
            out.value = best;
            out.margin = margin;
            out.box_lo = L.box_lo;
            out.box_hi = L.box_hi;
            return out;
        }
        if (!auto_expand || attempt >= 8)
            throw std::runtime_error("find_interior_max: no interior maximum in the box");
        L.box_lo *= 0.5;
        L.box_hi *= 2.0;
    }
}

void write_landscape_csv(const ReducedLandscape& L, int n, std::ostream& os) {
    if (n < 2) throw std::invalid_argument("write_landscape_csv: need n >= 2");
    os.precision(17);
    os << "M0,Lambda,Fstar\n";
    double llo = std::log(L.box_lo), lhi = std::log(L.box_hi);
    for (int i = 0; i < n; ++i) {
        double m0 = std::exp(llo + (lhi - llo) * i / double(n - 1));
        os << m0 << ',' << lambda_star(L, m0) << ',' << f1_star(L, m0) << '\n';
    }
}

}  // namespace crown::reduced
