#include "crown/bubble.hpp"

#include <cmath>
#include <stdexcept>

#include "crown/quad.hpp"

namespace crown::bubble {

namespace {

double exp_u(const core::CriticalPair& cp) { return cp.N / (cp.q + 1); }
double exp_v(const core::CriticalPair& cp) { return cp.N / (cp.p + 1); }

}  // namespace

double BubbleField::eval_u(const Vec& y) const {
    double s = mu * dist(y, x);
    return std::pow(mu, exp_u(gs->pair)) * gs->U.eval(s);
}

double BubbleField::eval_v(const Vec& y) const {
    double s = mu * dist(y, x);
    return std::pow(mu, exp_v(gs->pair)) * gs->V.eval(s);
}

DerivativeValues eval_derivatives(const core::PolygonConfig& cfg, const radial::GroundState& gs,
                                  int j, const Vec& y) {
    if (j < 1 || j > cfg.k) throw std::out_of_range("eval_derivatives: bubble index");
    const auto& cp = cfg.pair;
    double au = exp_u(cp), av = exp_v(cp);

    DerivativeValues d;
    // scale derivative of the inner bubble at (0, mu0)
    {
        double s = cfg.mu0 * y.norm();
        double U = gs.U.eval(s), dU = gs.U.eval_d(s);
        double V = gs.V.eval(s), dV = gs.V.eval_d(s);
        d.Y0 = std::pow(cfg.mu0, au - 1) * (au * U + s * dU);
        d.Z0 = std::pow(cfg.mu0, av - 1) * (av * V + s * dV);
    }

    const Vec& xj = cfg.centers[static_cast<std::size_t>(j - 1)];
    Vec diff = y - xj;
    double rho = diff.norm();
    double s = cfg.mu * rho;
    double U = gs.U.eval(s), dU = gs.U.eval_d(s);
    double V = gs.V.eval(s), dV = gs.V.eval_d(s);

    // scale derivative of the j-th bubble
    d.Yj2 = std::pow(cfg.mu, au - 1) * (au * U + s * dU);
    d.Zj2 = std::pow(cfg.mu, av - 1) * (av * V + s * dV);

    // radius derivative: x_j = r * e_j with the unit direction e_j, so
    // d|y - x_j|/dr = -(y - x_j).e_j / |y - x_j|
    Vec ej = xj;
    ej *= 1.0 / xj.norm();
    double ddr = rho > 0 ? -dot(diff, ej) / rho : -1.0;
    d.Yj1 = std::pow(cfg.mu, au + 1) * dU * ddr;
    d.Zj1 = std::pow(cfg.mu, av + 1) * dV * ddr;
    return d;
}

MultiField eval_multibubble(const core::PolygonConfig& cfg, const radial::GroundState& gs,
                            const Vec& y) {
    const auto& cp = cfg.pair;
    double au = exp_u(cp), av = exp_v(cp);
    double mu_u = std::pow(cfg.mu, au), mu_v = std::pow(cfg.mu, av);

    MultiField f;
    double su = 0, cu = 0, sv = 0, cv = 0;  // compensated sums
    for (const Vec& xj : cfg.centers) {
        double s = cfg.mu * dist(y, xj);
        double tu = mu_u * gs.U.eval(s);
        double tv = mu_v * gs.V.eval(s);
        double yu = tu - cu, t1 = su + yu;
        cu = (t1 - su) - yu;
        su = t1;
        double yv = tv - cv, t2 = sv + yv;
        cv = (t2 - sv) - yv;
        sv = t2;
    }
    f.U_sum = su;
    f.V_sum = sv;

    double s0 = cfg.mu0 * y.norm();
    f.U_inner = std::pow(cfg.mu0, au) * gs.U.eval(s0);
    f.V_inner = std::pow(cfg.mu0, av) * gs.V.eval(s0);
    f.V_star = f.V_inner - f.V_sum;
    return f;
}

namespace {

// (sum_j V_j)^p - sum_j V_j^p >= 0, evaluated against cancellation when one
// bubble dominates the sum
double superposition_excess(const core::PolygonConfig& cfg, const radial::GroundState& gs,
                            const Vec& z) {
    const auto& cp = cfg.pair;
    double mu_v = std::pow(cfg.mu, exp_v(cp));
    double vmax = -1;
    std::size_t imax = 0;
    double total = 0, comp = 0, sum_pow = 0;
    std::vector<double> vals(cfg.centers.size());
    for (std::size_t i = 0; i < cfg.centers.size(); ++i) {
        double v = mu_v * gs.V.eval(cfg.mu * dist(z, cfg.centers[i]));
        vals[i] = v;
        if (v > vmax) {
            vmax = v;
            imax = i;
        }
        double y = v - comp, t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    if (!(vmax > 0)) return 0;
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (i != imax) sum_pow += std::pow(vals[i], cp.p);
    // (v1 + s)^p - v1^p = v1^p expm1(p log1p(s/v1))
    double rest = total - vmax;
    double lead = std::pow(vmax, cp.p) * std::expm1(cp.p * std::log1p(rest / vmax));
    return lead - sum_pow;
}

}  // namespace

PhiResult eval_phi(const core::PolygonConfig& cfg, const radial::GroundState& gs,
                   const radial::AuxProfileW& w, const Vec& y, PhiMode mode,
                   std::uint64_t budget, std::uint64_t seed) {
    const auto& cp = cfg.pair;
    int N = cp.N;
    PhiResult out;

    if (cfg.k < 2) return out;  // a single bubble has no interaction excess

    if (mode == PhiMode::asymptotic) {
        if (!core::in_first_sector(y, cfg.k))
            throw std::invalid_argument("eval_phi: asymptotic mode needs y in the first sector");
        double b11_tilde = core::pairwise_sum_limit(double(N - 2));
        double B11 = cp.p * gs.b * b11_tilde;
        double s = cfg.mu * dist(y, cfg.centers[0]);
        out.value = B11 * std::pow(double(cfg.k), double(N - 2)) /
                    (std::pow(cfg.r, double(N - 2)) * std::pow(cfg.mu, exp_v(cp))) * w.w.eval(s);
        return out;
    }

    // Newtonian potential of the superposition excess
    double gammaN = 1.0 / ((N - 2) * quad::sphere_area(N));
    quad::Mixture mix;
    mix.id = "phi_k" + std::to_string(cfg.k);
    for (const Vec& xj : cfg.centers) mix.add(0.8 / cfg.k, quad::student_component(xj, 1.0 / cfg.mu, 2.0));
    mix.add(0.1, quad::student_component(Vec(N), std::max(cfg.r, 1.0), 1.0));
    // the kernel-shaped component keeps the importance weights square-integrable
    // against the |y-z|^{2-N} singularity
    mix.add(0.1, quad::kernel_component(y, std::max(1.0 / cfg.mu, 0.5 * cfg.r)));
    mix.normalize();

    auto f = [&](const Vec& z) {
        double d = dist(y, z);
        if (d == 0) return 0.0;
        return gammaN * std::pow(d, 2.0 - N) * superposition_excess(cfg, gs, z);
    };
    auto est = quad::integrate(f, mix, budget, seed);
    out.value = est.value;
    out.stderr_ = est.stderr_;
    out.ok = est.stderr_ <= 0.1 * std::abs(est.value);
    return out;
}

PhiResult eval_projection_U(const core::PolygonConfig& cfg, const radial::GroundState& gs,
                            const radial::AuxProfileW& w, const Vec& y, PhiMode mode,
                            std::uint64_t budget, std::uint64_t seed) {
    PhiResult phi;
    if (cfg.k >= 2) phi = eval_phi(cfg, gs, w, y, mode, budget, seed);
    auto mf = eval_multibubble(cfg, gs, y);
    phi.value += mf.U_sum;
    return phi;
}

double envelope_sum(const core::PolygonConfig& cfg, const Vec& y, double theta) {
    const auto& cp = cfg.pair;
    int N = cp.N;
    double au = exp_u(cp);
    double e2 = std::min(double(N - 2), cp.p * (N - 3 - theta) - 2);
    double first = 0, second = 0;
    for (const Vec& xj : cfg.centers) {
        double d = dist(y, xj);
        first += std::pow(cfg.mu, au) * std::pow(1.0 + cfg.mu * d, -double(N - 2));
        second += std::pow(1.0 + cfg.k * d, -e2);
    }
    second *= std::pow(cfg.mu, -cp.p * au) * std::pow(double(cfg.k), cp.p * (N - 2) - 2);
    return first + second;
}

}  // namespace crown::bubble
