#include "crown/energy.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace crown::energy {

namespace {

// |a - b|^{e+1} - b^{e+1} - a^{e+1} for a, b >= 0, evaluated so the leading
// cancellation is taken analytically when one argument dominates.
double power_bracket(double a, double b, double e1) {
    if (a <= 0 && b <= 0) return 0;
    if (b <= 0.5 * a) return std::pow(a, e1) * std::expm1(e1 * std::log1p(-b / a)) - std::pow(b, e1);
    if (a <= 0.5 * b) return std::pow(b, e1) * std::expm1(e1 * std::log1p(-a / b)) - std::pow(a, e1);
    return std::pow(std::abs(a - b), e1) - std::pow(b, e1) - std::pow(a, e1);
}

}  // namespace

double ground_energy(const radial::GroundState& gs) {
    const auto& cp = gs.pair;
    radial::MomentTerm du{&gs.U, 1.0, true}, dv{&gs.V, 1.0, true};
    radial::MomentTerm up{&gs.U, cp.q + 1.0, false}, vp{&gs.V, cp.p + 1.0, false};
    double grad = radial::radial_moment({du, dv}, 0.0, cp.N);
    double mu = radial::radial_moment({up}, 0.0, cp.N);
    double mv = radial::radial_moment({vp}, 0.0, cp.N);
    double a_def = grad - mv / (cp.p + 1.0) - mu / (cp.q + 1.0);
    if (std::abs(a_def - gs.A) > 0.005 * gs.A)
        throw std::runtime_error("ground_energy: functional and shortcut values disagree > 0.5%");
    return gs.A;
}

InteractionConstants interaction_constants(const radial::GroundState& gs,
                                           const radial::AuxProfileW& w) {
    const auto& cp = gs.pair;
    InteractionConstants c;
    c.btilde11 = core::pairwise_sum_limit(double(cp.N - 2));
    c.B11 = cp.p * gs.b * c.btilde11;
    radial::MomentTerm uq{&gs.U, cp.q, false};
    radial::MomentTerm w1{&w.w, 1.0, false};
    double int_uq = radial::radial_moment({uq}, 0.0, cp.N);
    double int_uqw = radial::radial_moment({uq, w1}, 0.0, cp.N);
    c.B1 = c.btilde11 / (cp.p + 1.0) * (gs.a * int_uq + cp.p * gs.b * int_uqw);
    c.B2 = int_uq;
    // at the pure-power corner p = (N+2)/(N-2) the two equations coincide and
    // the inner-bubble coupling collects both potentials
    double p_corner = double(cp.N + 2) / double(cp.N - 2);
    if (std::abs(cp.p - p_corner) <= 1e-12 * p_corner) {
        radial::MomentTerm vp{&gs.V, cp.p, false};
        c.B2 += radial::radial_moment({vp}, 0.0, cp.N);
    }
    c.A = ground_energy(gs);
    if (!(c.btilde11 > 0) || !(c.B11 > 0) || !(c.B1 > 0) || !(c.B2 > 0) || !(c.A > 0))
        throw std::runtime_error("interaction_constants: non-positive constant");
    return c;
}

double predicted_correction(const InteractionConstants& c, const core::PolygonConfig& cfg,
                            const radial::GroundState& gs) {
    const auto& cp = cfg.pair;
    double s = double(cp.N - 2);
    double u0_r = std::pow(cfg.mu0, cp.N / (cp.q + 1.0)) * gs.U.eval(cfg.mu0 * cfg.r);
    return cfg.k * (-c.B1 * std::pow(double(cfg.k), s) / (std::pow(cfg.r, s) * std::pow(cfg.mu, s)) +
                    c.B2 * u0_r / std::pow(cfg.mu, cp.N / (cp.q + 1.0)));
}

EnergyBreakdown measure_expansion(const core::PolygonConfig& cfg, const radial::GroundState& gs,
                                  const radial::AuxProfileW& w, std::uint64_t budget,
                                  std::uint64_t seed) {
    const auto& cp = cfg.pair;
    const int N = cp.N, k = cfg.k;
    const double p = cp.p, q = cp.q;
    const double au = N / (q + 1.0), av = N / (p + 1.0);
    const double mu_u = std::pow(cfg.mu, au), mu_v = std::pow(cfg.mu, av);
    const double mu0_u = std::pow(cfg.mu0, au), mu0_v = std::pow(cfg.mu0, av);

    InteractionConstants consts = interaction_constants(gs, w);
    // interaction-profile amplitude in closed form; its argument is the
    // distance to the nearest polygon vertex after folding into one sector
    const double phi_amp = k >= 2 ? consts.B11 * std::pow(double(k), double(N - 2)) /
                                        (std::pow(cfg.r, double(N - 2)) * mu_v)
                                  : 0.0;

    // The six shared-sample integrands. All are invariant under the k-fold
    // rotation, so whole-space sampling needs no folding; index 0 is the
    // combined correction integrand and supplies the stderr of the assembly.
    auto integrand = [&](const Vec& z, double* out) {
        thread_local std::vector<double> uj, vj;
        uj.assign(static_cast<std::size_t>(k), 0.0);
        vj.assign(static_cast<std::size_t>(k), 0.0);
        double u_sum = 0, cu = 0, v_sum = 0, cv = 0;
        int m = 0;
        for (int j = 0; j < k; ++j) {
            double s = cfg.mu * dist(z, cfg.centers[static_cast<std::size_t>(j)]);
            double u = mu_u * gs.U.eval(s);
            double v = mu_v * gs.V.eval(s);
            uj[static_cast<std::size_t>(j)] = u;
            vj[static_cast<std::size_t>(j)] = v;
            if (u > uj[static_cast<std::size_t>(m)]) m = j;
            double yu = u - cu, t = u_sum + yu;
            cu = (t - u_sum) - yu;
            u_sum = t;
            double yv = v - cv, t2 = v_sum + yv;
            cv = (t2 - v_sum) - yv;
            v_sum = t2;
        }
        double phi = 0;
        if (k >= 2) {
            Vec zf = core::fold_to_first_sector(z, k);
            phi = phi_amp * w.w.eval(cfg.mu * dist(zf, cfg.centers[0]));
        }
        double U = u_sum + phi;
        double s0 = cfg.mu0 * z.norm();
        double U0 = mu0_u * gs.U.eval(s0);
        double V0 = mu0_v * gs.V.eval(s0);

        // polygon self-interaction deficit:
        //   p/(p+1) sum_j U_j^q (U - U_j) - 1/(q+1) (U^{q+1} - sum_j U_j^{q+1})
        double um = uj[static_cast<std::size_t>(m)];
        double lin = 0, rest_pow = 0;
        for (int j = 0; j < k; ++j) {
            double u = uj[static_cast<std::size_t>(j)];
            double rest = phi;
            for (int i = 0; i < k; ++i)
                if (i != j) rest += uj[static_cast<std::size_t>(i)];
            lin += std::pow(u, q) * rest;
            if (j != m) rest_pow += std::pow(u, q + 1.0);
        }
        double excess_u = 0;
        if (um > 0) {
            double rest_m = phi;
            for (int i = 0; i < k; ++i)
                if (i != m) rest_m += uj[static_cast<std::size_t>(i)];
            excess_u = std::pow(um, q + 1.0) * std::expm1((q + 1.0) * std::log1p(rest_m / um)) -
                       rest_pow;
        }
        double c_iuv = p / (p + 1.0) * lin - excess_u / (q + 1.0);

        double c_j1 = -power_bracket(V0, v_sum, p + 1.0) / (p + 1.0);
        double c_j2 = -power_bracket(U0, U, q + 1.0) / (q + 1.0);
        double c_cv = std::pow(V0, p) * v_sum;
        double c_cu = std::pow(U0, q) * U;

        out[1] = c_iuv;
        out[2] = c_j1;
        out[3] = c_cv;
        out[4] = c_j2;
        out[5] = c_cu;
        out[0] = c_iuv + c_j1 - c_cv + c_j2 - c_cu;
    };

    quad::Mixture mix;
    mix.id = "energy_k" + std::to_string(k);
    Vec origin(N);
    for (const Vec& x : cfg.centers) {
        mix.add(1.0, quad::student_component(x, 1.0 / cfg.mu, 2.0));
        mix.add(0.5, quad::student_component(x, 10.0 / cfg.mu, 1.0));
    }
    mix.add(0.5 * k, quad::student_component(origin, 1.0 / cfg.mu0, 2.0));
    mix.add(0.5 * k, quad::student_component(origin, std::max(cfg.r, 1.0), 1.0));
    mix.normalize();

    auto est = quad::integrate_vector(integrand, 6, mix, budget, seed);

    EnergyBreakdown bd;
    bd.kA_part = (k + 1) * consts.A;
    bd.IUV_minus_kA = est[1];
    bd.J1 = est[2];
    bd.cross_V = est[3];
    bd.J2 = est[4];
    bd.cross_U = est[5];
    bd.measured_total = est[0];
    bd.measured_total.value =
        est[1].value + est[2].value - est[3].value + est[4].value - est[5].value;
    bd.predicted = predicted_correction(consts, cfg, gs);
    bd.residual = bd.measured_total.value - bd.predicted;
    bd.comparable = bd.measured_total.stderr_ <= 0.25 * std::abs(bd.predicted);
    return bd;
}

std::vector<ConvergenceRow> expansion_convergence(const radial::GroundState& gs,
                                                  const radial::AuxProfileW& w, double mu0,
                                                  double r, double lambda,
                                                  const std::vector<int>& k_list,
                                                  std::uint64_t budget, std::uint64_t seed) {
    if (k_list.empty()) throw std::invalid_argument("expansion_convergence: empty k list");
    for (std::size_t i = 1; i < k_list.size(); ++i)
        if (k_list[i] <= k_list[i - 1])
            throw std::invalid_argument("expansion_convergence: k list must increase");
    const auto& cp = gs.pair;
    std::vector<ConvergenceRow> rows;
    for (int k : k_list) {
        auto cfg = core::make_polygon_config(cp, k, mu0, r, lambda);
        auto bd = measure_expansion(cfg, gs, w, budget, seed);
        ConvergenceRow row;
        row.k = k;
        row.mu = cfg.mu;
        row.measured = bd.measured_total.value;
        row.stderr_ = bd.measured_total.stderr_;
        row.predicted = bd.predicted;
        row.residual = bd.residual;
        row.scaled_residual = bd.residual / k * std::pow(cfg.mu, cp.N / (cp.q + 1.0));
        rows.push_back(row);
    }
    return rows;
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& os) {
    os.precision(17);
    os << "k,mu,measured,stderr,predicted,residual,scaled_residual\n";
    for (const auto& r : rows)
        os << r.k << ',' << r.mu << ',' << r.measured << ',' << r.stderr_ << ',' << r.predicted
           << ',' << r.residual << ',' << r.scaled_residual << '\n';
}

}  // namespace crown::energy
