#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chernlab/domain.hpp"

#include <random>

using namespace chernlab;

TEST_CASE("spectral derivative is exact on torus modes") {
    const DomainChart c = DomainChart::torus(64, 1.0, DiffScheme::Spectral);
    GridC f(c.n);
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j)
            f(i, j) = std::exp(2.0 * PI * I * c.point(i, j).real());
    const DPair d = d_complex(c, f);
    double worst = 0.0;
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) {
            const cd expect = PI * I * std::exp(2.0 * PI * I * c.point(i, j).real());
            worst = std::max(worst, std::abs(d.d(i, j) - expect));
            worst = std::max(worst, std::abs(d.db(i, j) - expect));  // Re x depends on both
        }
    CHECK(worst < 1e-12);
}

TEST_CASE("f(x) = x has d f = 1, dbar f = 0") {
    for (DiffScheme s : {DiffScheme::Spectral, DiffScheme::Stencil4}) {
        const DomainChart c = s == DiffScheme::Spectral
                                  ? DomainChart::disk(32, 0.8)
                                  : DomainChart::disk(32, 0.8);
        GridC f(c.n);
        for (int i = 0; i < c.n; ++i)
            for (int j = 0; j < c.n; ++j) f(i, j) = c.point(i, j);
        const DPair d = d_complex(c, f);
        for (int i = 0; i < c.n; ++i)
            for (int j = 0; j < c.n; ++j) {
                CHECK(std::abs(d.d(i, j) - 1.0) < 1e-11);
                CHECK(std::abs(d.db(i, j)) < 1e-11);
            }
        (void)s;
    }
}

TEST_CASE("|x|^2 derivatives on the disk are exact to stencil order") {
    const DomainChart c = DomainChart::disk(48, 0.7);
    GridC f(c.n);
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) f(i, j) = std::norm(c.point(i, j));
    const DPair d = d_complex(c, f);
    double worst = 0.0;
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) {
            worst = std::max(worst, std::abs(d.d(i, j) - std::conj(c.point(i, j))));
            worst = std::max(worst, std::abs(d.db(i, j) - c.point(i, j)));
        }
    CHECK(worst < 1e-10);  // quadratic: exact for 4th-order stencils
}

TEST_CASE("stencil convergence order on a smooth field") {
    std::vector<double> errs;
    const std::vector<int> ns = {32, 64, 128};
    for (int n : ns) {
        const DomainChart c = DomainChart::torus(n, 1.0, DiffScheme::Stencil4);
        GridC f(c.n);
        for (int i = 0; i < c.n; ++i)
            for (int j = 0; j < c.n; ++j) {
                const cd x = c.point(i, j);
                f(i, j) = std::sin(2.0 * PI * x.real()) * std::cos(4.0 * PI * x.imag());
            }
        const DPair d = d_complex(c, f);
        double worst = 0.0;
        for (int i = 0; i < c.n; ++i)
            for (int j = 0; j < c.n; ++j) {
                const cd x = c.point(i, j);
                const double u = 2.0 * PI * std::cos(2.0 * PI * x.real()) *
                                 std::cos(4.0 * PI * x.imag());
                const double v = -4.0 * PI * std::sin(2.0 * PI * x.real()) *
                                 std::sin(4.0 * PI * x.imag());
                const cd expect = 0.5 * (u - I * v);
                worst = std::max(worst, std::abs(d.d(i, j) - expect));
            }
        errs.push_back(worst);
    }
    const auto [slope, resid] = loglog_fit({1.0 / 32, 1.0 / 64, 1.0 / 128}, errs);
    CHECK(slope == doctest::Approx(4.0).epsilon(0.08));
    (void)resid;
}

TEST_CASE("gauss curvature of the three lambda kinds") {
    {
        const DomainChart c = DomainChart::torus(32);
        const auto K = c.gauss_curvature_field();
        CHECK(max_abs(K) < 1e-10);
    }
    {
        const DomainChart c = DomainChart::sphere_chart(96);
        const auto K = c.gauss_curvature_field();
        double worst = 0.0;
        for (int i = 4; i < c.n - 4; ++i)
            for (int j = 4; j < c.n - 4; ++j) worst = std::max(worst, std::abs(K(i, j) - 1.0));
        CHECK(worst < 2e-4);
    }
    {
        const DomainChart c = DomainChart::disk(96, 0.6, LambdaKind::Hyperbolic);
        const auto K = c.gauss_curvature_field();
        double worst = 0.0;
        for (int i = 4; i < c.n - 4; ++i)
            for (int j = 4; j < c.n - 4; ++j) worst = std::max(worst, std::abs(K(i, j) + 1.0));
        CHECK(worst < 2e-4);
    }
}

TEST_CASE("integrate: torus unit field and masked gaussian bump") {
    {
        const DomainChart c = DomainChart::torus(32, 1.0);
        Grid2D<double> one(c.n, 1.0);
        CHECK(integrate(c, one) == doctest::Approx(1.0).epsilon(1e-14));
    }
    {
        // closed-form mass of a gaussian bump against a generous disk mask
        const DomainChart c = DomainChart::disk(128, 0.7);
        Grid2D<double> f(c.n);
        const double s2 = 0.006;
        for (int i = 0; i < c.n; ++i)
            for (int j = 0; j < c.n; ++j)
                f(i, j) = std::exp(-std::norm(c.point(i, j)) / (2.0 * s2)) / (2.0 * PI * s2);
        const RegionMask m = geodesic_disk_mask(c, cd(0.0), 0.6);
        CHECK(integrate(c, f, &m) == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("sphere atlas integrates to 4*pi") {
    const Domain dom = Domain::sphere_pair(128);
    std::vector<Grid2D<double>> ones = {Grid2D<double>(128, 1.0), Grid2D<double>(128, 1.0)};
    CHECK(dom.integrate_total(ones) == doctest::Approx(4.0 * PI).epsilon(1e-7));
}

TEST_CASE("geodesic disk masks: flat area, spherical cap, RadiusTooLarge") {
    {
        const DomainChart c = DomainChart::disk(128, 0.7);
        const RegionMask m = geodesic_disk_mask(c, cd(0.1, -0.05), 0.5);
        CHECK(chart_area(c, &m) == doctest::Approx(PI * 0.25).epsilon(3e-4));
        CHECK_THROWS_AS((void)geodesic_disk_mask(c, cd(0.0), 5.0), Error);
    }
    {
        // hemisphere around the north pole: area 2*pi within 1e-4
        const DomainChart c = DomainChart::sphere_chart(256);
        const RegionMask m = geodesic_disk_mask(c, cd(0.0), 0.5 * PI);
        CHECK(chart_area(c, &m) == doctest::Approx(2.0 * PI).epsilon(1e-4 / (2.0 * PI) * 4));
        // off-center spherical cap, area 2 pi (1 - cos r)
        const double r = 0.8;
        const RegionMask m2 = geodesic_disk_mask(c, cd(0.3, 0.2), r);
        CHECK(chart_area(c, &m2) ==
              doctest::Approx(2.0 * PI * (1.0 - std::cos(r))).epsilon(5e-4));
    }
    {
        // hyperbolic disk: area 4 pi sinh^2(r/2)
        const DomainChart c = DomainChart::disk(192, 0.68, LambdaKind::Hyperbolic);
        const double r = 0.9;
        const RegionMask m = geodesic_disk_mask(c, cd(-0.1, 0.15), r);
        CHECK(chart_area(c, &m) ==
              doctest::Approx(4.0 * PI * sqr(std::sinh(0.5 * r))).epsilon(5e-4));
    }
}

TEST_CASE("integrate is linear and monotone on nonnegative fields") {
    const DomainChart c = DomainChart::disk(48, 0.7);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Grid2D<double> f(c.n), g(c.n);
    for (size_t t = 0; t < f.v.size(); ++t) {
        f.v[t] = U(rng);
        g.v[t] = U(rng);
    }
    const double a = 0.7, b = 1.9;
    Grid2D<double> lin(c.n);
    for (size_t t = 0; t < f.v.size(); ++t) lin.v[t] = a * f.v[t] + b * g.v[t];
    CHECK(integrate(c, lin) ==
          doctest::Approx(a * integrate(c, f) + b * integrate(c, g)).epsilon(1e-12));
    Grid2D<double> bigger(c.n);
    for (size_t t = 0; t < f.v.size(); ++t) bigger.v[t] = f.v[t] + 0.5;
    CHECK(integrate(c, bigger) > integrate(c, f));
}

TEST_CASE("small resolutions are rejected") {
    CHECK_THROWS_AS((void)DomainChart::torus(4), Error);
}
