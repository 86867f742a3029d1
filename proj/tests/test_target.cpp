#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chernlab/target.hpp"

#include <random>

using namespace chernlab;

namespace {

TargetPoint random_point(TargetId id, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-0.9, 0.9);
    if (id == TargetId::Hopf) {
        // stay inside a shell away from 0
        cd z1(1.0 + 0.4 * U(rng), 0.4 * U(rng)), z2(0.5 * U(rng), 0.5 * U(rng));
        return {z1, z2, 0};
    }
    return {cd(U(rng), U(rng)), cd(U(rng), U(rng)), 0};
}

}  // namespace

TEST_CASE("closed-form jets validate against finite differences") {
    for (TargetId id : {TargetId::FlatC2, TargetId::FSProduct, TargetId::Hopf})
        CHECK_NOTHROW(HermitianTarget(id, /*self_test=*/true));
}

TEST_CASE("flat C^2: trivial connection and torsion") {
    HermitianTarget t(TargetId::FlatC2);
    const TargetPoint p{cd(0.3, -0.8), cd(1.1, 0.2), 0};
    const ConnectionData cn = t.chern_connection(p);
    const TorsionJet tj = t.torsion_jet(p);
    const CurvatureTensor R = t.curvature(p);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
                CHECK(std::abs(cn.gamma[a][b][c]) == 0.0);
                CHECK(std::abs(tj.L[a][b][c]) == 0.0);
                for (int d = 0; d < 2; ++d) CHECK(std::abs(R.Rm[a][b][c][d]) == 0.0);
            }
}

TEST_CASE("FS product: Gamma(0) = 0 and factor curvature 1/2") {
    // oracle values frozen from symbolic differentiation of h = 4/(1+|z|^2)^2
    HermitianTarget t(TargetId::FSProduct);
    const TargetPoint origin{cd(0.0), cd(0.0), 0};
    const ConnectionData cn = t.chern_connection(origin);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) CHECK(std::abs(cn.gamma[a][b][c]) < 1e-14);

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const TargetPoint p = random_point(TargetId::FSProduct, rng);
        const CurvatureTensor R = t.curvature(p);
        CHECK(std::abs(R.Rm[0][0][0][0] - 0.5) < 1e-12);
        CHECK(std::abs(R.Rm[1][1][1][1] - 0.5) < 1e-12);
        CHECK(std::abs(R.Rm[0][0][1][1]) < 1e-12);  // product metric: no cross factor
    }
}

TEST_CASE("Hopf: connection and torsion against the symbolic table at (1,0)") {
    // frozen from the computer-algebra oracle for h^{-1} d h
    HermitianTarget t(TargetId::Hopf);
    const TargetPoint p{cd(1.0, 0.0), cd(0.0, 0.0), 0};
    const ConnectionData cn = t.chern_connection(p);
    CHECK(std::abs(cn.gamma[0][0][0] - cd(-1.0)) < 1e-14);
    CHECK(std::abs(cn.gamma[1][1][0] - cd(-1.0)) < 1e-14);
    CHECK(std::abs(cn.gamma[0][0][1]) < 1e-14);
    CHECK(std::abs(cn.gamma[1][1][1]) < 1e-14);
    CHECK(std::abs(cn.gamma[0][1][0]) < 1e-14);
    CHECK(std::abs(cn.gamma[1][0][1]) < 1e-14);

    const TorsionJet tj = t.torsion(p);
    CHECK(std::abs(tj.L[1][0][1] - cd(-0.5)) < 1e-14);
    CHECK(std::abs(tj.L[1][1][0] - cd(0.5)) < 1e-14);
    CHECK(std::abs(tj.L[0][0][1]) < 1e-14);

    double L2 = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) L2 += std::norm(tj.L[a][b][c]);
    CHECK(L2 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("torsion antisymmetry and Kaehler vanishing") {
    std::mt19937_64 rng(5);
    for (TargetId id : {TargetId::FlatC2, TargetId::FSProduct, TargetId::Hopf}) {
        HermitianTarget t(id);
        for (int trial = 0; trial < 50; ++trial) {
            const TargetPoint p = random_point(id, rng);
            const TorsionJet tj = t.torsion(p);
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    for (int c = 0; c < 2; ++c) {
                        CHECK(std::abs(tj.L[a][b][c] + tj.L[a][c][b]) < 1e-13);
                        if (t.kaehler()) CHECK(std::abs(tj.L[a][b][c]) < 1e-12);
                    }
        }
    }
}

TEST_CASE("skew-Hermitian unitary connection") {
    std::mt19937_64 rng(17);
    for (TargetId id : {TargetId::FSProduct, TargetId::Hopf}) {
        HermitianTarget t(id);
        for (int trial = 0; trial < 50; ++trial) {
            const TargetPoint p = random_point(id, rng);
            const ConnectionData cn = t.chern_connection(p);
            // omega^b_a + conj(omega^a_b) = 0: (1,0) of one pairs with (0,1) of the other
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    for (int k = 0; k < 2; ++k)
                        CHECK(std::abs(cn.w10[a][b][k] + std::conj(cn.w01[b][a][k])) < 1e-13);
        }
    }
}

TEST_CASE("curvature conjugation symmetry at random Hopf points") {
    HermitianTarget t(TargetId::Hopf);
    std::mt19937_64 rng(23);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const TargetPoint p = random_point(TargetId::Hopf, rng);
        const CurvatureTensor R = t.curvature(p);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int q = 0; q < 2; ++q)
                    for (int s = 0; s < 2; ++s)
                        worst = std::max(worst, std::abs(R.Rm[a][b][q][s] -
                                                         std::conj(R.Rm[b][a][s][q])));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("metric compatibility of the coordinate connection") {
    // d_k h_{i jbar} = Gamma^l_{ik} h_{l jbar} reproduced by finite differences
    std::mt19937_64 rng(31);
    for (TargetId id : {TargetId::FSProduct, TargetId::Hopf}) {
        HermitianTarget t(id);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const TargetPoint p = random_point(id, rng);
            const MetricJet j = t.metric(p);
            const ConnectionData cn = t.chern_connection(p);
            for (int i = 0; i < 2; ++i)
                for (int k = 0; k < 2; ++k) {
                    // diagonal metric: d_k h_i vs Gamma^i_{ik} h_i
                    const cd lhs = j.dh[i][k];
                    const cd rhs = cn.gamma[i][i][k] * j.h[i];
                    worst = std::max(worst, std::abs(lhs - rhs));
                }
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("torsion jet agrees with finite differences of the torsion") {
    HermitianTarget t(TargetId::Hopf);
    const TargetPoint p{cd(1.1, 0.3), cd(-0.2, 0.6), 0};
    const TorsionJet tj = t.torsion_jet(p);
    const ConnectionData cn = t.chern_connection(p);
    const double eps = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < 2; ++k) {
        for (int re = 0; re < 2; ++re) {
            const cd dz = (re == 0 ? cd(eps, 0.0) : cd(0.0, eps));
            TargetPoint pp = p, pm = p;
            pp[k] += dz;
            pm[k] -= dz;
            const TorsionJet tp = t.torsion(pp), tm = t.torsion(pm);
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    for (int c = 0; c < 2; ++c) {
                        const cd fd = (tp.L[a][b][c] - tm.L[a][b][c]) / (2.0 * eps);
                        // dL = L1 c_d (dz-part) + L1b c_d (dzb-part) + omega corrections
                        const double cd_ = cn.c[k];
                        const cd w10 = cn.w10[a][a][k] - cn.w10[b][b][k] - cn.w10[c][c][k];
                        const cd w01 = cn.w01[a][a][k] - cn.w01[b][b][k] - cn.w01[c][c][k];
                        cd expect;
                        const cd dL10 = tj.L1[a][b][c][k] * cd_ - tj.L[a][b][c] * w10;
                        const cd dL01 = tj.L1b[a][b][c][k] * cd_ - tj.L[a][b][c] * w01;
                        if (re == 0) expect = dL10 + dL01;       // d/dRe = d + dbar
                        else expect = I * (dL10 - dL01);         // d/dIm = i(d - dbar)
                        worst = std::max(worst, std::abs(fd - expect));
                    }
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("transitions") {
    HermitianTarget fs(TargetId::FSProduct);
    const TargetPoint a{cd(1.0, 0.0), cd(2.0, 0.0), 0};
    const TargetPoint b = fs.transition(a, 3);
    CHECK(std::abs(b.z1 - cd(1.0)) < 1e-15);  // fixed point of inversion
    CHECK(std::abs(b.z2 - cd(0.5)) < 1e-15);

    HermitianTarget hopf(TargetId::Hopf);
    const TargetPoint h{cd(2.5, 0.0), cd(0.0, 0.0), 0};
    const TargetPoint hn = hopf.normalize(h);
    CHECK(std::abs(hn.z1 - cd(1.25)) < 1e-15);
    CHECK(hn.chart == 1);
    // metric evaluators agree across the quotient identification
    const MetricJet j0 = hopf.metric(h);
    const MetricJet j1 = hopf.metric(TargetPoint{hn.z1, hn.z2, 0});
    CHECK(j1.h[0] == doctest::Approx(j0.h[0] * 4.0));  // coordinates rescaled by 1/2
}

TEST_CASE("frame vector rotation preserves the unitary norm") {
    HermitianTarget fs(TargetId::FSProduct);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.3, 0.9);
    for (int trial = 0; trial < 20; ++trial) {
        const TargetPoint p{cd(1.0 + U(rng), U(rng)), cd(U(rng), -U(rng)), 0};
        const std::array<cd, 2> v = {cd(U(rng), U(rng)), cd(U(rng), U(rng))};
        const auto w = fs.rotate_frame_vector(p, 1, v);  // invert first factor
        const double n0 = std::norm(v[0]) + std::norm(v[1]);
        const double n1 = std::norm(w[0]) + std::norm(w[1]);
        CHECK(n1 == doctest::Approx(n0).epsilon(1e-12));
    }
}
