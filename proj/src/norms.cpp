#include "crown/norms.hpp"

#include <cmath>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "crown/quad.hpp"

namespace crown::norms {

namespace {

// odd power |t|^{e-1} t
double spow(double t, double e) {
    if (t == 0) return 0;
    return t > 0 ? std::pow(t, e) : -std::pow(-t, e);
}

double pairwise_limit_cached(double s) {
    static std::unordered_map<double, double> cache;
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(s);
    if (it != cache.end()) return it->second;
    double v = core::pairwise_sum_limit(s);
    cache.emplace(s, v);
    return v;
}

// closed-form amplitude of the interaction profile in front of w(mu|y-x_1|)
double phi_amplitude(const core::PolygonConfig& cfg, const radial::GroundState& gs) {
    if (cfg.k < 2) return 0;
    const auto& cp = cfg.pair;
    double b11 = cp.p * gs.b * pairwise_limit_cached(double(cp.N - 2));
    return b11 * std::pow(double(cfg.k), double(cp.N - 2)) /
           (std::pow(cfg.r, double(cp.N - 2)) * std::pow(cfg.mu, cp.N / (cp.p + 1.0)));
}

struct FieldValues {
    double U0 = 0, V0 = 0;     // inner bubble
    double U = 0, V = 0;       // projected sum (with phi) and plain sum
    double u_sum = 0;          // sum of the outer U_j
    double sum_uq = 0;         // sum_j U_j^q
};

FieldValues eval_fields(const core::PolygonConfig& cfg, const radial::GroundState& gs,
                        const radial::AuxProfileW& w, const Vec& y) {
    const auto& cp = cfg.pair;
    double au = cp.N / (cp.q + 1.0), av = cp.N / (cp.p + 1.0);
    double mu_u = std::pow(cfg.mu, au), mu_v = std::pow(cfg.mu, av);
    FieldValues f;
    for (const Vec& xj : cfg.centers) {
        double s = cfg.mu * dist(y, xj);
        double u = mu_u * gs.U.eval(s);
        f.u_sum += u;
        f.sum_uq += std::pow(u, cp.q);
        f.V += mu_v * gs.V.eval(s);
    }
    double phi = 0;
    if (cfg.k >= 2) {
        Vec yf = core::fold_to_first_sector(y, cfg.k);
        phi = phi_amplitude(cfg, gs) * w.w.eval(cfg.mu * dist(yf, cfg.centers[0]));
    }
    f.U = f.u_sum + phi;
    double s0 = cfg.mu0 * y.norm();
    f.U0 = std::pow(cfg.mu0, au) * gs.U.eval(s0);
    f.V0 = std::pow(cfg.mu0, av) * gs.V.eval(s0);
    return f;
}

}  // namespace

WeightedNormSpec make_norm_spec(NormKind kind, const core::CriticalPair& pair) {
    WeightedNormSpec spec;
    spec.kind = kind;
    double au = pair.N / (pair.q + 1.0), av = pair.N / (pair.p + 1.0);
    switch (kind) {
        case NormKind::star1: spec.mu_pow = au; break;
        case NormKind::star2: spec.mu_pow = av; break;
        case NormKind::dstar1: spec.mu_pow = au + 2.0; break;
        case NormKind::dstar2: spec.mu_pow = av + 2.0; break;
    }
    spec.decay_pow = spec.mu_pow + pair.tau;
    return spec;
}

double weight_sum(const core::PolygonConfig& cfg, const WeightedNormSpec& spec, const Vec& y) {
    double mu_a = std::pow(cfg.mu, spec.mu_pow);
    double s = 0;
    for (const Vec& xj : cfg.centers)
        s += mu_a * std::pow(1.0 + cfg.mu * dist(y, xj), -spec.decay_pow);
    return s;
}

SamplePlan make_sample_plan(const core::PolygonConfig& cfg, int per_scale, std::uint64_t seed) {
    if (per_scale < 1) throw std::invalid_argument("make_sample_plan: per_scale < 1");
    const int N = cfg.pair.N;
    SamplePlan plan;
    for (const Vec& xj : cfg.centers) plan.points.push_back(xj);
    plan.points.push_back(Vec(N));

    // stratified shells around every center at the three concentration scales
    quad::CounterRng rng(seed, 0);
    const double scales[3] = {1.0 / cfg.mu, 1.0 / double(cfg.k), 1.0};
    for (const Vec& xj : cfg.centers)
        for (double s : scales)
            for (int i = 0; i < per_scale; ++i) {
                double rho = 3.0 * s * (i + rng.uniform()) / per_scale;
                Vec y = xj;
                Vec dir = rng.sphere_dir(N);
                for (int d = 0; d < N; ++d) y[d] += rho * dir[d];
                plan.points.push_back(y);
            }

    // sector boundary (half-angle pi/k from the first center direction)
    double ang = 3.14159265358979323846 / cfg.k;
    for (double rho : {0.5 * cfg.r, cfg.r, 2.0 * cfg.r})
        for (double h : {0.0, 0.25 * cfg.r}) {
            Vec y(N);
            y[0] = rho * std::cos(ang);
            y[1] = rho * std::sin(ang);
            if (N > 2) y[2] = h;
            plan.points.push_back(y);
        }

    plan.far_field_start = plan.points.size();
    for (double rho : {2.0 * cfg.r, 5.0 * cfg.r, 10.0 * cfg.r, 20.0 * cfg.r})
        for (int i = 0; i < 4; ++i) {
            Vec dir = rng.sphere_dir(N);
            dir *= rho;
            plan.points.push_back(dir);
        }
    return plan;
}

double weighted_ratio(const std::vector<double>& fvals, const SamplePlan& plan,
                      const core::PolygonConfig& cfg, const WeightedNormSpec& spec) {
    if (fvals.size() != plan.points.size())
        throw std::invalid_argument("weighted_ratio: plan and values misaligned");
    double best = 0;
    for (std::size_t i = 0; i < fvals.size(); ++i)
        best = std::max(best, std::abs(fvals[i]) / weight_sum(cfg, spec, plan.points[i]));
    return best;
}

RatioResult weighted_norm(const Field& f, const SamplePlan& plan, const core::PolygonConfig& cfg,
                          const WeightedNormSpec& spec) {
    RatioResult out;
    for (std::size_t i = 0; i < plan.points.size(); ++i) {
        double v = std::abs(f(plan.points[i])) / weight_sum(cfg, spec, plan.points[i]);
        if (v > out.value) {
            out.value = v;
            out.argmax = i;
        }
    }
    out.far_field_max = out.argmax >= plan.far_field_start;
    return out;
}

std::pair<double, double> error_term(const core::PolygonConfig& cfg,
                                     const radial::GroundState& gs, const radial::AuxProfileW& w,
                                     const Vec& y, bool include_inner) {
    const auto& cp = cfg.pair;
    auto f = eval_fields(cfg, gs, w, y);
    double U0 = include_inner ? f.U0 : 0.0;
    double V0 = include_inner ? f.V0 : 0.0;
    double vstar = V0 - f.V;
    double ustar = U0 - f.U;
    double l1 = -std::pow(V0, cp.p) + std::pow(f.V, cp.p) + spow(vstar, cp.p);
    double l2 = -std::pow(U0, cp.q) + f.sum_uq + spow(ustar, cp.q);
    return {l1, l2};
}

std::vector<ErrorNormRow> error_norm_check(const radial::GroundState& gs,
                                           const radial::AuxProfileW& w, double mu0, double r,
                                           double lambda, const std::vector<int>& k_list,
                                           int per_scale, std::uint64_t seed) {
    if (k_list.empty()) throw std::invalid_argument("error_norm_check: empty k list");
    const auto& cp = gs.pair;
    auto spec1 = make_norm_spec(NormKind::dstar1, cp);
    auto spec2 = make_norm_spec(NormKind::dstar2, cp);
    std::vector<ErrorNormRow> rows;
    for (int k : k_list) {
        auto cfg = core::make_polygon_config(cp, k, mu0, r, lambda);
        auto plan = make_sample_plan(cfg, per_scale, seed);
        // l1 is the u-equation residual (**,1), l2 the v-equation one (**,2)
        auto n1 = weighted_norm(
            [&](const Vec& y) { return error_term(cfg, gs, w, y).first; }, plan, cfg, spec1);
        auto n2 = weighted_norm(
            [&](const Vec& y) { return error_term(cfg, gs, w, y).second; }, plan, cfg, spec2);
        ErrorNormRow row;
        row.k = k;
        row.mu = cfg.mu;
        row.l_norm = n1.value + n2.value;
        row.scaled = row.l_norm * std::pow(cfg.mu, cp.N / (2.0 * (cp.q + 1.0)));
        row.far_field_max = n1.far_field_max || n2.far_field_max;
        rows.push_back(row);
    }
    return rows;
}

void write_error_norm_csv(const std::vector<ErrorNormRow>& rows, std::ostream& os) {
    os.precision(17);
    os << "k,mu,l_norm,scaled\n";
    for (const auto& r : rows)
        os << r.k << ',' << r.mu << ',' << r.l_norm << ',' << r.scaled << '\n';
}

double second_order_remainder(double base, double omega, double e) {
    return spow(base + omega, e) - spow(base, e) - e * std::pow(std::abs(base), e - 1.0) * omega;
}

std::pair<double, double> nonlinearity(const core::PolygonConfig& cfg,
                                       const radial::GroundState& gs,
                                       const radial::AuxProfileW& w, const Field& omega1,
                                       const Field& omega2, const Vec& y) {
    const auto& cp = cfg.pair;
    auto f = eval_fields(cfg, gs, w, y);
    double vstar = f.V0 - f.V;
    double ustar = f.U0 - f.U;
    double n1 = second_order_remainder(vstar, omega2(y), cp.p);
    double n2 = second_order_remainder(ustar, omega1(y), cp.q);
    return {n1, n2};
}

}  // namespace crown::norms
