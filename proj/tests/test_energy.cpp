#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>

#include "crown/energy.hpp"
#include "crown/quad.hpp"
#include "doctest.h"

using namespace crown;

namespace {

const double pi3 = std::pow(3.14159265358979323846, 3);

struct Lab {
    core::CriticalPair cp;
    radial::GroundState gs;
    radial::AuxProfileW w;
    energy::InteractionConstants c;
};

const Lab& lab62() {
    static const Lab lab = [] {
        Lab l;
        l.cp = core::make_critical_pair(6, 2.0);
        l.gs = radial::solve_ground_state(l.cp);
        l.w = radial::solve_w(l.cp, l.gs);
        l.c = energy::interaction_constants(l.gs, l.w);
        return l;
    }();
    return lab;
}

}  // namespace

TEST_CASE("ground energy closed form and cross-check") {
    const auto& l = lab62();
    double A = energy::ground_energy(l.gs);  // throws if the two routes disagree
    CHECK(A == doctest::Approx(76.8 * pi3).epsilon(5e-3));
    CHECK(A > 0);
}

TEST_CASE("ground energy is scale invariant") {
    // (2/N) int U_{0,2}^{q+1} over R^6 by importance sampling equals A
    const auto& l = lab62();
    double mu0 = 2.0;
    double au = l.cp.N / (l.cp.q + 1.0);
    quad::Mixture mix;
    mix.id = "scaled_bubble";
    Vec origin(6);
    mix.add(0.7, quad::student_component(origin, 1.0 / mu0, 2.0));
    mix.add(0.3, quad::student_component(origin, 1.0, 1.0));
    mix.normalize();
    auto f = [&](const Vec& z) {
        double u = std::pow(mu0, au) * l.gs.U.eval(mu0 * z.norm());
        return std::pow(u, l.cp.q + 1.0);
    };
    auto est = quad::integrate(f, mix, 400000, 3);
    double A2 = 2.0 / l.cp.N * est.value;
    CHECK(std::abs(A2 - l.gs.A) < 3.0 * (2.0 / l.cp.N) * est.stderr_ + 1e-3 * l.gs.A);
}

TEST_CASE("ground energy cross-check rejects corrupted profiles") {
    // the functional is stationary at the ground state, so the corruption
    // must be large enough for the second-order energy shift to exceed 0.5%
    auto gs = lab62().gs;
    for (auto& x : gs.U.val) x *= 1.1;
    for (auto& x : gs.U.d1) x *= 1.1;
    for (auto& x : gs.U.d2) x *= 1.1;
    gs.U.tail_c *= 1.1;
    CHECK_THROWS_AS(energy::ground_energy(gs), std::runtime_error);
}

TEST_CASE("interaction constants at (N=6, p=2)") {
    const auto& c = lab62().c;
    CHECK(c.btilde11 == doctest::Approx(1.0 / 720.0).epsilon(1e-6));
    // closed-form limit against the direct pairwise summation
    double direct = std::pow(20000.0, -4.0) * core::pairwise_sum(20000, 1.0, 4.0);
    CHECK(c.btilde11 == doctest::Approx(direct).epsilon(1e-6));
    // p = (N+2)/(N-2) branch: B2 collects both potentials
    CHECK(c.B2 == doctest::Approx(4608.0 * pi3).epsilon(1e-3));
    CHECK(c.B11 > 0);
    CHECK(c.B1 > 0);
    CHECK(c.A == doctest::Approx(76.8 * pi3).epsilon(5e-3));
}

TEST_CASE("B1 positive off the pure-power corner") {
    auto cp = core::make_critical_pair(6, 1.8);
    auto gs = radial::solve_ground_state(cp);
    auto w = radial::solve_w(cp, gs);
    auto c = energy::interaction_constants(gs, w);
    CHECK(c.B1 > 0);
    CHECK(c.B2 > 0);
    // below the corner only the u-potential enters B2
    radial::MomentTerm uq{&gs.U, cp.q, false};
    CHECK(c.B2 == doctest::Approx(radial::radial_moment({uq}, 0.0, cp.N)));
}

TEST_CASE("B1 and B2 reproducible across grid resolutions") {
    const auto& l = lab62();
    radial::GridOpts coarse;
    coarse.nodes = 2048;
    auto gs2 = radial::solve_ground_state(l.cp, coarse);
    auto w2 = radial::solve_w(l.cp, gs2);
    auto c2 = energy::interaction_constants(gs2, w2);
    CHECK(c2.B1 == doctest::Approx(l.c.B1).epsilon(5e-3));
    CHECK(c2.B2 == doctest::Approx(l.c.B2).epsilon(5e-3));
}

TEST_CASE("single far bubble: correction dominated by the inner-coupling term") {
    // k=1 removes the polygon interaction; with the bubble far out and the
    // scale separation large the expansion should match the measurement
    const auto& l = lab62();
    auto cfg = core::make_polygon_config(l.cp, 1, 1.0, 5.0, 80.0);
    auto bd = energy::measure_expansion(cfg, l.gs, l.w, 400000, 7);
    CHECK(bd.IUV_minus_kA.value == 0.0);  // a single bubble has no deficit
    CHECK(bd.comparable);
    double ratio = bd.measured_total.value / bd.predicted;
    CHECK(ratio > 0.8);
    CHECK(ratio < 1.2);
}

TEST_CASE("leading coupling piece matches the frozen-center formula") {
    // int_S V^p V0 over the sector core S against V0(r)/mu^{N/(p+1)} int V^p;
    // lambda = 8 puts the remaining truncation error below the MC noise
    const auto& l = lab62();
    auto cfg = core::make_polygon_config(l.cp, 8, 1.0, 1.0, 8.0);
    double mu_v = std::pow(cfg.mu, l.cp.N / (l.cp.p + 1.0));
    double rad = 0.45 * 3.14159265358979323846 * cfg.r / cfg.k;
    quad::Mixture mix;
    mix.id = "sector_core";
    mix.add(0.9, quad::student_component(cfg.centers[0], 1.0 / cfg.mu, 2.0));
    mix.add(0.1, quad::student_component(cfg.centers[0], rad, 1.0));
    mix.normalize();
    auto f = [&](const Vec& z) {
        if (dist(z, cfg.centers[0]) >= rad) return 0.0;
        double vsum = 0;
        for (const auto& x : cfg.centers) vsum += mu_v * l.gs.V.eval(cfg.mu * dist(z, x));
        return std::pow(vsum, l.cp.p) * l.gs.V.eval(z.norm());
    };
    auto est = quad::integrate(f, mix, 200000, 11);
    radial::MomentTerm vp{&l.gs.V, l.cp.p, false};
    double formula = l.gs.V.eval(cfg.r) / mu_v * radial::radial_moment({vp}, 0.0, l.cp.N);
    CHECK(std::abs(est.value - formula) < 3.0 * est.stderr_);
}

TEST_CASE("nearest-neighbor sum against the pairwise-limit formula") {
    // int_S U_1^q sum_{j>=2} U_j vs a btilde11 (int U^q) k^{N-2}/(r mu)^{N-2}
    const auto& l = lab62();
    auto cfg = core::make_polygon_config(l.cp, 16, 1.0, 1.0, 1.0);
    double mu_u = std::pow(cfg.mu, l.cp.N / (l.cp.q + 1.0));
    double rad = 0.45 * 3.14159265358979323846 * cfg.r / cfg.k;
    quad::Mixture mix;
    mix.id = "sector_core_u";
    mix.add(0.9, quad::student_component(cfg.centers[0], 1.0 / cfg.mu, 2.0));
    mix.add(0.1, quad::student_component(cfg.centers[0], rad, 1.0));
    mix.normalize();
    auto f = [&](const Vec& z) {
        if (dist(z, cfg.centers[0]) >= rad) return 0.0;
        double u1 = mu_u * l.gs.U.eval(cfg.mu * dist(z, cfg.centers[0]));
        double rest = 0;
        for (std::size_t j = 1; j < cfg.centers.size(); ++j)
            rest += mu_u * l.gs.U.eval(cfg.mu * dist(z, cfg.centers[j]));
        return std::pow(u1, l.cp.q) * rest;
    };
    auto est = quad::integrate(f, mix, 400000, 13);
    radial::MomentTerm uq{&l.gs.U, l.cp.q, false};
    double s = double(l.cp.N - 2);
    double pred = l.gs.a * l.c.btilde11 * radial::radial_moment({uq}, 0.0, l.cp.N) *
                  std::pow(double(cfg.k), s) / (std::pow(cfg.r, s) * std::pow(cfg.mu, s));
    CHECK(est.value == doctest::Approx(pred).epsilon(0.10));
}

TEST_CASE("expansion convergence over k = 8, 16, 32") {
    const auto& l = lab62();
    auto rows = energy::expansion_convergence(l.gs, l.w, 1.0, 1.0, 1.0, {8, 16, 32}, 400000, 7);
    REQUIRE(rows.size() == 3);
    double prev_gap = 1e300;
    for (const auto& row : rows) {
        CHECK(row.mu == doctest::Approx(std::pow(double(row.k), 2.0) * 1.0));
        double gap = std::abs(row.measured / row.predicted - 1.0);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(std::abs(rows[2].measured / rows[2].predicted - 1.0) < 0.05);
    // scaled residual non-increasing in magnitude along the list
    CHECK(std::abs(rows[1].scaled_residual) <= std::abs(rows[0].scaled_residual));
    CHECK(std::abs(rows[2].scaled_residual) <= std::abs(rows[1].scaled_residual));
}

TEST_CASE("predicted terms carry opposite signs") {
    const auto& l = lab62();
    auto cfg = core::make_polygon_config(l.cp, 8, 1.0, 1.0, 1.0);
    double s = double(l.cp.N - 2);
    double polygon = -l.c.B1 * std::pow(double(cfg.k), s) / std::pow(cfg.r * cfg.mu, s);
    double inner = l.c.B2 * l.gs.U.eval(cfg.r) / std::pow(cfg.mu, l.cp.N / (l.cp.q + 1.0));
    CHECK(polygon < 0);
    CHECK(inner > 0);
    CHECK(energy::predicted_correction(l.c, cfg, l.gs) ==
          doctest::Approx(cfg.k * (polygon + inner)));
}

TEST_CASE("assembly identity and shared-sample consistency") {
    const auto& l = lab62();
    auto cfg = core::make_polygon_config(l.cp, 8, 1.0, 1.0, 1.0);
    auto bd = energy::measure_expansion(cfg, l.gs, l.w, 200000, 21);
    double assembled = bd.IUV_minus_kA.value + bd.J1.value + bd.J2.value - bd.cross_V.value -
                       bd.cross_U.value;
    CHECK(bd.measured_total.value == assembled);  // exact algebraic assembly
    CHECK(bd.kA_part == doctest::Approx(9.0 * l.gs.A));
    CHECK(bd.residual == bd.measured_total.value - bd.predicted);
    // every piece shares one sample set
    CHECK(bd.J1.n == bd.cross_U.n);
    CHECK(bd.J1.seed == bd.IUV_minus_kA.seed);
}

TEST_CASE("measured total is invariant under the critical rescaling") {
    // (mu0, r, lambda) -> (t mu0, r/t, t lambda) preserves the functional
    const auto& l = lab62();
    auto c1 = core::make_polygon_config(l.cp, 8, 1.0, 1.0, 1.0);
    auto c2 = core::make_polygon_config(l.cp, 8, 2.0, 0.5, 2.0);
    auto b1 = energy::measure_expansion(c1, l.gs, l.w, 400000, 7);
    auto b2 = energy::measure_expansion(c2, l.gs, l.w, 400000, 8);
    double pool = std::hypot(b1.measured_total.stderr_, b2.measured_total.stderr_);
    CHECK(std::abs(b1.measured_total.value - b2.measured_total.value) < 3.0 * pool);
    CHECK(b1.predicted == doctest::Approx(b2.predicted).epsilon(1e-12));
}

TEST_CASE("comparison refused when the predicted correction vanishes") {
    // at the radius where the two predicted terms cancel any finite-budget
    // stderr exceeds 25% of |predicted|
    const auto& l = lab62();
    double lo = 0.7, hi = 0.9;
    auto pred_at = [&](double r) {
        auto cfg = core::make_polygon_config(l.cp, 8, 1.0, r, 1.0);
        return energy::predicted_correction(l.c, cfg, l.gs);
    };
    REQUIRE(pred_at(lo) * pred_at(hi) < 0);
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        (pred_at(lo) * pred_at(mid) <= 0 ? hi : lo) = mid;
    }
    auto cfg = core::make_polygon_config(l.cp, 8, 1.0, 0.5 * (lo + hi), 1.0);
    auto bd = energy::measure_expansion(cfg, l.gs, l.w, 100000, 5);
    CHECK_FALSE(bd.comparable);
}

TEST_CASE("degenerate and invalid k lists") {
    const auto& l = lab62();
    auto rows = energy::expansion_convergence(l.gs, l.w, 1.0, 1.0, 1.0, {8}, 50000, 7);
    CHECK(rows.size() == 1);
    CHECK(rows[0].k == 8);
    CHECK_THROWS_AS(energy::expansion_convergence(l.gs, l.w, 1.0, 1.0, 1.0, {}, 1000, 7),
                    std::invalid_argument);
    CHECK_THROWS_AS(energy::expansion_convergence(l.gs, l.w, 1.0, 1.0, 1.0, {16, 8}, 1000, 7),
                    std::invalid_argument);
}

TEST_CASE("convergence CSV format and replay determinism") {
    const auto& l = lab62();
    auto rows = energy::expansion_convergence(l.gs, l.w, 1.0, 1.0, 1.0, {8, 16}, 50000, 7);
    std::ostringstream os;
    energy::write_convergence_csv(rows, os);
    std::string text = os.str();
    CHECK(text.rfind("k,mu,measured,stderr,predicted,residual,scaled_residual\n", 0) == 0);
    auto rows2 = energy::expansion_convergence(l.gs, l.w, 1.0, 1.0, 1.0, {8, 16}, 50000, 7);
    std::ostringstream os2;
    energy::write_convergence_csv(rows2, os2);
    CHECK(text == os2.str());
}
