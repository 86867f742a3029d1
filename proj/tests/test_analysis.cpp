#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chernlab/analysis.hpp"
#include "chernlab/flow.hpp"

using namespace chernlab;

TEST_CASE("scalar laplacian: flat polynomials and curved-chart closed forms") {
    {
        const DomainChart c = DomainChart::disk(48, 0.7);
        Grid2D<double> u(c.n);
        for (int i = 0; i < c.n; ++i)
            for (int j = 0; j < c.n; ++j) u(i, j) = std::norm(c.point(i, j));
        // Delta = 2 d dbar: for |x|^2 this gives 2
        const Grid2D<double> lap = scalar_laplacian(c, u);
        for (const auto& v : lap.v) CHECK(v == doctest::Approx(2.0).epsilon(1e-10));
    }
    {
        // sphere chart: Delta (paper normalization) of log(1+|x|^2) is lambda-weighted
        const DomainChart c = DomainChart::disk(96, 0.8, LambdaKind::Sphere);
        Grid2D<double> u(c.n);
        for (int i = 0; i < c.n; ++i)
            for (int j = 0; j < c.n; ++j) u(i, j) = std::log(1.0 + std::norm(c.point(i, j)));
        const Grid2D<double> lap = scalar_laplacian(c, u);
        double worst = 0.0;
        for (int i = 4; i < c.n - 4; ++i)
            for (int j = 4; j < c.n - 4; ++j) {
                const double s = 1.0 + std::norm(c.point(i, j));
                // 2 ddbar u / lambda^2 with ddbar log(1+|x|^2) = 1/s^2, lambda^2 = 4/s^2
                worst = std::max(worst, std::abs(lap(i, j) - 0.5));
            }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("Bochner: flat polynomial identity Delta e = 2|A|^2 is exact") {
    auto dom = std::make_shared<Domain>(Domain::disk(128, 0.7));
    auto tgt = std::make_shared<HermitianTarget>(TargetId::FlatC2);
    const MapState m = MapState::sample(dom, tgt, [](int, cd x) {
        return TargetPoint{x * x * x, 0.5 * x * x, 0};
    });
    const BochnerReport rep = bochner_check(m, 0, 1e-6);
    CHECK(rep.defect < 1e-8);
}

TEST_CASE("Bochner on the sphere-domain identity map: curvature terms cancel") {
    // e = 1, Delta e = 0, and 2 K_struct e must cancel the pulled-back curvature
    auto dom = std::make_shared<Domain>(Domain::disk(96, 0.7, LambdaKind::Sphere));
    auto tgt = std::make_shared<HermitianTarget>(TargetId::FSProduct);
    const MapState m = MapState::sample(dom, tgt, [](int, cd x) {
        return TargetPoint{x, cd(0.1), 0};
    });
    const BochnerReport rep = bochner_check(m, 0, 1e-4);
    CHECK(rep.defect < 1e-7);
}

TEST_CASE("Bochner: assembled rhs equals the direct third-derivative route") {
    auto tgt = std::make_shared<HermitianTarget>(TargetId::Hopf);
    auto dom = std::make_shared<Domain>(Domain::disk(96, 0.6));
    const MapState m = MapState::sample(dom, tgt, [](int, cd x) {
        return TargetPoint{1.3 * std::exp(0.4 * x), 0.3 * std::exp(-0.2 * x), 0};
    });
    const BochnerReport rep = bochner_check(m, 0, 1e-5);
    const Grid2D<double> direct = bochner_rhs_direct(m, 0);
    double worst = 0.0;
    for (int i = 8; i < 88; ++i)
        for (int j = 8; j < 88; ++j)
            worst = std::max(worst, std::abs(rep.rhs(i, j) - direct(i, j)));
    CHECK(worst < 5e-5);
    CHECK(rep.defect < 5e-5);
}

TEST_CASE("Bochner defect decreases on solved Chern-harmonic maps into Hopf") {
    auto tgt = std::make_shared<HermitianTarget>(TargetId::Hopf);
    auto holo = [](int, cd x) {
        return TargetPoint{1.3 * std::exp(0.4 * x), 0.3 * std::exp(-0.2 * x), 0};
    };
    // solve each resolution to a truncation-matched tolerance (prop. to h^2):
    // the identity defect then tracks the solve accuracy at second order
    std::vector<double> defects;
    for (int n : {64, 128}) {
        auto dom = std::make_shared<Domain>(Domain::disk(n, 0.6));
        MapState m = MapState::sample(dom, tgt, [&](int ch, cd x) {
            TargetPoint p = holo(ch, x);
            p.z1 += 0.05 * std::exp(-6.0 * std::norm(x));
            p.z2 += cd(0.0, 0.04) * std::exp(-6.0 * std::norm(x));
            return p;
        });
        FlowConfig cfg;
        cfg.tol = 4e-5 * sqr(64.0 / n);
        cfg.max_steps = 6000;
        const SolveReport rep = flow_to_harmonic(m, cfg);
        REQUIRE(rep.converged);
        defects.push_back(bochner_check(m, 0, 10.0 * cfg.tol, 8).defect);
    }
    CHECK(defects[0] / defects[1] > 2.0);
    CHECK(defects[0] / defects[1] < 8.0);
}

TEST_CASE("differential inequality fit") {
    // flat suite: C1 = C2 = 0
    auto tgt = std::make_shared<HermitianTarget>(TargetId::FlatC2);
    auto dom = std::make_shared<Domain>(Domain::disk(64, 0.7));
    const MapState flat1 = MapState::sample(dom, tgt, [](int, cd x) {
        return TargetPoint{x * x, 0.3 * x, 0};
    });
    const MapState flat2 = MapState::sample(dom, tgt, [](int, cd x) {
        return TargetPoint{std::exp(0.7 * x), cd(0.2), 0};
    });
    const DiffIneqFit f1 = fit_differential_inequality({&flat1, &flat2});
    CHECK(f1.C1 == 0.0);
    CHECK(f1.C2 < 1e-9);

    // Hopf suite: positive C2, stable under domain rescaling (C2 invariant)
    auto hopf = std::make_shared<HermitianTarget>(TargetId::Hopf);
    auto h1 = std::make_shared<Domain>(Domain::disk(64, 0.5));
    auto h2 = std::make_shared<Domain>(Domain::disk(64, 1.0));
    const MapState a = MapState::sample(h1, hopf, [](int, cd x) {
        return TargetPoint{1.3 * std::exp(0.5 * x), 0.35 * std::exp(0.3 * x), 0};
    });
    const MapState b = MapState::sample(h2, hopf, [](int, cd x) {
        return TargetPoint{1.3 * std::exp(0.25 * x), 0.35 * std::exp(0.15 * x), 0};
    });
    const DiffIneqFit fa = fit_differential_inequality({&a});
    const DiffIneqFit fb = fit_differential_inequality({&b});
    CHECK(fa.C1 == 0.0);
    CHECK(fa.C2 > 0.0);
    CHECK(fb.C2 == doctest::Approx(fa.C2).epsilon(0.01));

    // hyperbolic chart: C1 = 2 sup(-K_struct)+ = 1
    auto hd = std::make_shared<Domain>(Domain::disk(48, 0.5, LambdaKind::Hyperbolic));
    const MapState c = MapState::sample(hd, tgt, [](int, cd x) {
        return TargetPoint{x, cd(0.0), 0};
    });
    CHECK(fit_differential_inequality({&c}).C1 == doctest::Approx(1.0));

    CHECK_THROWS_AS((void)fit_differential_inequality({}), Error);
}

TEST_CASE("epsilon-regularity: flat holomorphic disk ratio 1/4pi") {
    auto dom = std::make_shared<Domain>(Domain::disk(128, 0.7));
    auto tgt = std::make_shared<HermitianTarget>(TargetId::FlatC2);
    const double eps = 0.1;
    const MapState m = MapState::sample(dom, tgt, [=](int, cd x) {
        return TargetPoint{eps * x, cd(0.0), 0};
    });
    const auto rows = epsilon_regularity_check(m, 0, {cd(0.0), cd(0.1, 0.1)}, 0.15, 1.0);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.admissible);
        CHECK(r.sup_e == doctest::Approx(eps * eps).epsilon(1e-10));
        CHECK(r.ratio == doctest::Approx(1.0 / (4.0 * PI)).epsilon(2e-3));
    }
    CHECK(empirical_c3(rows) == doctest::Approx(1.0 / (4.0 * PI)).epsilon(2e-3));
}

TEST_CASE("isoperimetric: flat inclusion attains 1/4pi; constant map degenerate") {
    auto dom = std::make_shared<Domain>(Domain::disk(128, 0.7));
    auto tgt = std::make_shared<HermitianTarget>(TargetId::FlatC2);
    const MapState m = MapState::sample(dom, tgt, [](int, cd x) {
        return TargetPoint{x, cd(0.0), 0};
    });
    const IsoperimetricRow row = isoperimetric_check(m, 0, cd(0.0), 0.4);
    CHECK(row.ratio == doctest::Approx(1.0 / (4.0 * PI)).epsilon(0.005));
    CHECK(!row.degenerate);
    CHECK(!row.nonconformal);

    const MapState cm = MapState::sample(dom, tgt, [](int, cd) {
        return TargetPoint{cd(0.3), cd(0.1), 0};
    });
    CHECK(isoperimetric_check(cm, 0, cd(0.0), 0.4).degenerate);

    // small holomorphic disk into Hopf stays below the flat-corpus-style bound
    auto hopf = std::make_shared<HermitianTarget>(TargetId::Hopf);
    const MapState hm = MapState::sample(dom, hopf, [](int, cd x) {
        return TargetPoint{1.2 * std::exp(0.3 * x), 0.3 + 0.1 * x, 0};
    });
    const IsoperimetricRow hrow = isoperimetric_check(hm, 0, cd(0.0), 0.3);
    CHECK(hrow.ratio < 0.2);
    CHECK(hrow.ratio > 0.0);
}

TEST_CASE("boundary length: circles under closed-form maps") {
    auto dom = std::make_shared<Domain>(Domain::disk(96, 0.7));
    auto tgt = std::make_shared<HermitianTarget>(TargetId::FlatC2);
    {
        const MapState m = MapState::sample(dom, tgt, [](int, cd x) {
            return TargetPoint{x, cd(0.0), 0};
        });
        CHECK(loop_length(m, 0, cd(0.0), 0.45) ==
              doctest::Approx(2.0 * PI * 0.45).epsilon(1e-4));
        const MapState c = MapState::sample(dom, tgt, [](int, cd) {
            return TargetPoint{cd(1.0), cd(0.0), 0};
        });
        CHECK(loop_length(c, 0, cd(0.0), 0.45) < 1e-12);
    }
    {
        // f(x) = x^2 on |x| = r: length = closed form of |2x| |dx| = 4 pi r^2
        const double r = 0.4;
        const MapState m = MapState::sample(dom, tgt, [](int, cd x) {
            return TargetPoint{x * x, cd(0.0), 0};
        });
        CHECK(loop_length(m, 0, cd(0.0), r) ==
              doctest::Approx(2.0 * PI * r * 2.0 * r).epsilon(1e-4));
    }
}

TEST_CASE("monotonicity: flat plane gives pi, errors flagged") {
    auto dom = std::make_shared<Domain>(Domain::disk(96, 0.7));
    auto tgt = std::make_shared<HermitianTarget>(TargetId::FlatC2);
    const MapState m = MapState::sample(dom, tgt, [](int, cd x) {
        return TargetPoint{x, cd(0.0), 0};
    });
    const MonotonicityCurve mc =
        monotonicity_check(m, 0, TargetPoint{cd(0.0), cd(0.0), 0}, {0.1, 0.2, 0.3});
    for (double v : mc.area_over_r2) CHECK(v == doctest::Approx(PI).epsilon(5e-3));
    CHECK(mc.infimum > 3.0);
    CHECK_THROWS_AS(
        (void)monotonicity_check(m, 0, TargetPoint{cd(0.0), cd(0.0), 0}, {0.9}), Error);
}

TEST_CASE("Morrey decay: smooth alpha = 2, branch point x^m alpha = 2m") {
    auto dom = std::make_shared<Domain>(Domain::disk(128, 0.7));
    auto tgt = std::make_shared<HermitianTarget>(TargetId::FlatC2);
    const std::vector<double> radii = {0.08, 0.12, 0.18, 0.27, 0.40};
    {
        const MapState m = MapState::sample(dom, tgt, [](int, cd x) {
            return TargetPoint{x + 0.2 * x * x, cd(0.0), 0};
        });
        const MorreyFit f = morrey_decay_fit(m, 0, cd(0.0), radii);
        CHECK(f.alpha == doctest::Approx(2.0).epsilon(0.05));
    }
    {
        const MapState m = MapState::sample(dom, tgt, [](int, cd x) {
            return TargetPoint{x * x, cd(0.0), 0};
        });
        const MorreyFit f = morrey_decay_fit(m, 0, cd(0.0), radii);
        CHECK(f.alpha == doctest::Approx(4.0).epsilon(0.02));
    }
    {
        const MapState cm = MapState::sample(dom, tgt, [](int, cd) {
            return TargetPoint{cd(0.5), cd(0.0), 0};
        });
        CHECK(morrey_decay_fit(cm, 0, cd(0.0), radii).degenerate);
        CHECK_THROWS_AS((void)morrey_decay_fit(cm, 0, cd(0.0), {0.1, 0.2}), Error);
    }
}

TEST_CASE("curvature contraction examples") {
    // flat target and constant maps: zero
    auto dom = std::make_shared<Domain>(Domain::disk(32, 0.5));
    auto flat = std::make_shared<HermitianTarget>(TargetId::FlatC2);
    const MapState m0 = MapState::sample(dom, flat, [](int, cd x) {
        return TargetPoint{x * x, 0.2 * x, 0};
    });
    const FrameCoefficients fc0 = frame_coefficients(m0, 0);
    const CurvatureContraction cc0 = curvature_contraction(m0, 0, fc0);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) CHECK(max_abs(cc0.G[a][b]) < 1e-14);

    // identity factor map into FSProduct: G[0][0] = R (a^1_1 conj(a^1_1)) = 1/2
    auto fs = std::make_shared<HermitianTarget>(TargetId::FSProduct);
    auto sdom = std::make_shared<Domain>(Domain::disk(48, 0.7, LambdaKind::Sphere));
    const MapState m1 = MapState::sample(sdom, fs, [](int, cd x) {
        return TargetPoint{x, cd(0.1), 0};
    });
    const FrameCoefficients fc1 = frame_coefficients(m1, 0);
    const CurvatureContraction cc1 = curvature_contraction(m1, 0, fc1);
    double worst = 0.0;
    for (int i = 2; i < 46; ++i)
        for (int j = 2; j < 46; ++j) worst = std::max(worst, std::abs(cc1.G[0][0](i, j) - 0.5));
    CHECK(worst < 1e-9);
}
