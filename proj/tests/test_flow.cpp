#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chernlab/flow.hpp"

using namespace chernlab;

TEST_CASE("constant initial data is a fixed point") {
    auto dom = std::make_shared<Domain>(Domain::torus(32));
    auto tgt = std::make_shared<HermitianTarget>(TargetId::Hopf);
    MapState m = MapState::sample(dom, tgt, [](int, cd) {
        return TargetPoint{cd(1.2, 0.0), cd(0.3, 0.2), 0};
    });
    FlowConfig cfg;
    cfg.tol = 1e-10;
    const SolveReport rep = flow_to_harmonic(m, cfg);
    CHECK(rep.converged);
    CHECK(rep.steps_taken == 0);
}

TEST_CASE("flat Dirichlet problem converges to the holomorphic map") {
    auto dom = std::make_shared<Domain>(Domain::disk(48, 0.7));
    auto tgt = std::make_shared<HermitianTarget>(TargetId::FlatC2);
    // boundary data from P(x) = x^2; interior heavily perturbed, perturbation
    // supported away from the boundary
    MapState m = MapState::sample(dom, tgt, [](int, cd x) {
        const double s2 = std::norm(x) / 0.2;
        const double bump = s2 < 1.0 ? (1.0 - s2) * (1.0 - s2) * (1.0 - s2) : 0.0;
        return TargetPoint{x * x + 0.5 * bump, 0.3 * bump, 0};
    });
    FlowConfig cfg;
    cfg.tol = 1e-9;
    cfg.max_steps = 4000;
    const SolveReport rep = flow_to_harmonic(m, cfg);
    CHECK(rep.converged);
    CHECK(rep.residual_history.back() <= 1e-9);
    // energy non-increasing along the semi-implicit flow on a flat target
    for (size_t i = 1; i < rep.energy_history.size(); ++i)
        CHECK(rep.energy_history[i] <=
              rep.energy_history[i - 1] + 1e-11 * (1.0 + rep.energy_history[i - 1]));
    // limit agrees with P to discretization accuracy
    double worst = 0.0;
    const DomainChart& c = dom->chart(0);
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) {
            const cd x = c.point(i, j);
            worst = std::max(worst, std::abs(m.at(0, i, j).z1 - x * x));
            worst = std::max(worst, std::abs(m.at(0, i, j).z2));
        }
    CHECK(worst < 1e-6);
}

TEST_CASE("explicit scheme also converges with the CFL step") {
    auto dom = std::make_shared<Domain>(Domain::disk(24, 0.5));
    auto tgt = std::make_shared<HermitianTarget>(TargetId::FlatC2);
    MapState m = MapState::sample(dom, tgt, [](int, cd x) {
        return TargetPoint{x + 0.2 * std::exp(-6.0 * std::norm(x)), cd(0.0), 0};
    });
    FlowConfig cfg;
    cfg.scheme = FlowScheme::Explicit;
    cfg.tol = 1e-8;
    cfg.max_steps = 20000;
    const SolveReport rep = flow_to_harmonic(m, cfg);
    CHECK(rep.converged);
}

TEST_CASE("Hopf: perturbed holomorphic map returns to a Chern-harmonic map") {
    auto dom = std::make_shared<Domain>(Domain::disk(48, 0.5));
    auto tgt = std::make_shared<HermitianTarget>(TargetId::Hopf);
    auto holo = [](int, cd x) {
        return TargetPoint{1.3 * std::exp(0.4 * x), 0.3 * std::exp(-0.2 * x), 0};
    };
    const MapState ref = MapState::sample(dom, tgt, holo);
    const double e_ref = energy(ref).total;

    MapState m = MapState::sample(dom, tgt, [&](int ch, cd x) {
        TargetPoint p = holo(ch, x);
        // compactly supported interior perturbation: boundary data stays holomorphic
        const double s2 = std::norm(x) / 0.16;
        const double bump = s2 < 1.0 ? (1.0 - s2) * (1.0 - s2) * (1.0 - s2) : 0.0;
        p.z1 += 0.08 * bump;
        p.z2 += cd(0.0, 0.06) * bump;
        return p;
    });
    FlowConfig cfg;
    cfg.tol = 1e-6;
    cfg.max_steps = 6000;
    const SolveReport rep = flow_to_harmonic(m, cfg);
    CHECK(rep.converged);
    CHECK(rep.residual_history.back() <= 1e-6);
    CHECK(energy(m).total == doctest::Approx(e_ref).epsilon(0.01));
}

TEST_CASE("fixed-point consistency: converged maps stay put") {
    auto dom = std::make_shared<Domain>(Domain::disk(32, 0.5));
    auto tgt = std::make_shared<HermitianTarget>(TargetId::FlatC2);
    MapState m = MapState::sample(dom, tgt, [](int, cd x) {
        return TargetPoint{x * x, cd(0.0), 0};
    });
    FlowConfig cfg;
    cfg.tol = 1e-7;
    flow_to_harmonic(m, cfg);
    const GridC before = m.charts[0].z1;
    FlowConfig cfg2;
    cfg2.tol = 1e-13;
    cfg2.max_steps = 3;
    flow_to_harmonic(m, cfg2);
    double moved = 0.0;
    for (size_t t = 0; t < before.v.size(); ++t)
        moved = std::max(moved, std::abs(m.charts[0].z1.v[t] - before.v[t]));
    CHECK(moved < 3.0 * 1e-7);  // a few dt * tol
}

TEST_CASE("energy gap probe: small bumps collapse; a degree-1 sphere map does not") {
    auto dom = std::make_shared<Domain>(Domain::torus(32));
    auto tgt = std::make_shared<HermitianTarget>(TargetId::Hopf);
    FlowConfig cfg;
    cfg.tol = 1e-7;
    cfg.max_steps = 6000;
    const GapProbeResult res = energy_gap_probe(dom, tgt, 0.05, cfg, 11);
    CHECK(!res.runs.empty());
    CHECK(res.collapse_threshold > 0.0);
    for (const auto& [e0, collapsed] : res.runs)
        if (e0 <= 0.05) CHECK(collapsed);

    const MapState deg1 = concentrating_family(FamilyKind::FSProductBubble, {1.0}, 64)[0];
    CHECK(energy(deg1).total == doctest::Approx(8.0 * PI).epsilon(1e-3));
    CHECK(image_diameter(deg1) > 1.0);
    CHECK(harmonic_residual_max(deg1) < 1e-5);
}

TEST_CASE("concentrating families: closed forms and densities") {
    const std::vector<MapState> fam =
        concentrating_family(FamilyKind::FSProductBubble, {8, 16}, 96);
    // density at 0: first factor contributes 1, second k^2 (unit-sphere domain)
    for (size_t j = 0; j < fam.size(); ++j) {
        const Grid2D<double> e = energy_density(fam[j], 0);
        const double k = j == 0 ? 8.0 : 16.0;
        const DomainChart& c = fam[j].domain->chart(0);
        // nearest grid node to 0 (the endpoint grid has no exact node at 0)
        int mid = -1, mjd = -1;
        double best = 1e300;
        for (int i = 0; i < c.n; ++i)
            for (int jj = 0; jj < c.n; ++jj)
                if (std::abs(c.point(i, jj)) < best) {
                    best = std::abs(c.point(i, jj));
                    mid = i;
                    mjd = jj;
                }
        const cd x0 = c.point(mid, mjd);
        const double l2 = sqr(c.lambda(x0));
        const double expect = (4.0 / sqr(1.0 + std::norm(x0)) +
                               4.0 * k * k / sqr(1.0 + k * k * std::norm(x0))) / l2;
        CHECK(e(mid, mjd) == doctest::Approx(expect).epsilon(1e-10));
    }
    const std::vector<MapState> cm =
        concentrating_family(FamilyKind::MoebiusConstant, {8, 16, 32}, 48);
    for (const auto& m : cm) CHECK(energy(m).total < 1e-20);
}

TEST_CASE("divergence guard") {
    auto dom = std::make_shared<Domain>(Domain::disk(24, 0.5));
    auto tgt = std::make_shared<HermitianTarget>(TargetId::FlatC2);
    MapState m = MapState::sample(dom, tgt, [](int, cd x) {
        return TargetPoint{x + 0.3 * std::exp(-4.0 * std::norm(x)), cd(0.0), 0};
    });
    FlowConfig cfg;
    cfg.scheme = FlowScheme::Explicit;
    cfg.dt = 10.0;  // far beyond the CFL bound
    cfg.max_steps = 4000;
    CHECK_THROWS_AS(flow_to_harmonic(m, cfg), Error);
}
