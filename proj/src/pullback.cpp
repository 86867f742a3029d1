#include "chernlab/pullback.hpp"

#include <cmath>

namespace chernlab {

namespace {

/// dx / dxb coefficients of the pulled-back unitary connection f*omega^i_j at one point.
struct PulledOmega {
    cd wx[2][2];   // wx[j][i]: dx coefficient of f*omega^i_j
    cd wxb[2][2];
};

PulledOmega pull_omega(const ConnectionData& cn, const MapDerivs& md, int i, int j) {
    PulledOmega po{};
    for (int b = 0; b < 2; ++b)
        for (int a = 0; a < 2; ++a) {
            cd sx = 0.0, sxb = 0.0;
            for (int k = 0; k < 2; ++k) {
                const cd dfk = md.d[k](i, j), dbfk = md.db[k](i, j);
                sx += cn.w10[b][a][k] * dfk + cn.w01[b][a][k] * std::conj(dbfk);
                sxb += cn.w10[b][a][k] * dbfk + cn.w01[b][a][k] * std::conj(dfk);
            }
            po.wx[b][a] = sx;
            po.wxb[b][a] = sxb;
        }
    return po;
}

}  // namespace

ChartGauge default_gauge(const DomainChart& c) {
    ChartGauge g;
    g.lambda = Grid2D<double>(c.n);
    g.rho_x = GridC(c.n);
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) {
            const cd x = c.point(i, j);
            g.lambda(i, j) = c.lambda(x);
            g.rho_x(i, j) = c.rho_x(x);
        }
    return g;
}

ChartGauge scaled_gauge(const DomainChart& c, const Grid2D<double>& mu) {
    GridC logmu(c.n);
    for (size_t t = 0; t < mu.v.size(); ++t) {
        if (!(mu.v[t] > 0.0)) fail("ZeroConformalFactor", "mu must be positive");
        logmu.v[t] = std::log(mu.v[t]);
    }
    const DPair dmu = d_complex(c, logmu);
    ChartGauge g = default_gauge(c);
    for (size_t t = 0; t < mu.v.size(); ++t) {
        g.lambda.v[t] /= mu.v[t];
        g.rho_x.v[t] += I * dmu.d.v[t];  // rho_x = -i d log(lambda/mu)
    }
    return g;
}

FrameCoefficients frame_coefficients(const MapState& m, int chart) {
    return frame_coefficients_g(m, chart, default_gauge(m.domain->chart(chart)));
}

FrameCoefficients frame_coefficients_g(const MapState& m, int chart, const ChartGauge& g) {
    const int n = m.domain->chart(chart).n;
    FrameCoefficients fc;
    fc.md = map_derivatives(m, chart);
    fc.a1 = Vec2Field(n);
    fc.a1b = Vec2Field(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const MetricJet mj = m.target->metric(m.at(chart, i, j));
            const double lam = g.lambda(i, j);
            for (int a = 0; a < 2; ++a) {
                const double ca = std::sqrt(mj.h[a]);
                fc.a1[a](i, j) = ca * fc.md.d[a](i, j) / lam;
                fc.a1b[a](i, j) = ca * fc.md.db[a](i, j) / lam;
            }
        }
    return fc;
}

SecondForm second_form(const MapState& m, int chart, const FrameCoefficients& fc) {
    return second_form_g(m, chart, fc, default_gauge(m.domain->chart(chart)));
}

SecondForm second_form_g(const MapState& m, int chart, const FrameCoefficients& fc,
                         const ChartGauge& g) {
    const int n = m.domain->chart(chart).n;
    const MapDerivs da1 = field_derivatives_framed(m, chart, fc.a1);
    const MapDerivs da1b = field_derivatives_framed(m, chart, fc.a1b);
    SecondForm sf;
    sf.a11 = Vec2Field(n);
    sf.a11b = Vec2Field(n);
    sf.a1b1 = Vec2Field(n);
    sf.a1b1b = Vec2Field(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const ConnectionData cn = m.target->chern_connection(m.at(chart, i, j));
            const PulledOmega po = pull_omega(cn, fc.md, i, j);
            const double lam = g.lambda(i, j);
            const cd rx = g.rho_x(i, j), rxb = std::conj(rx);
            for (int a = 0; a < 2; ++a) {
                cd cx = da1.d[a](i, j) - I * rx * fc.a1[a](i, j);
                cd cxb = da1.db[a](i, j) - I * rxb * fc.a1[a](i, j);
                cd dx = da1b.d[a](i, j) + I * rx * fc.a1b[a](i, j);
                cd dxb = da1b.db[a](i, j) + I * rxb * fc.a1b[a](i, j);
                for (int b = 0; b < 2; ++b) {
                    cx += fc.a1[b](i, j) * po.wx[b][a];
                    cxb += fc.a1[b](i, j) * po.wxb[b][a];
                    dx += fc.a1b[b](i, j) * po.wx[b][a];
                    dxb += fc.a1b[b](i, j) * po.wxb[b][a];
                }
                sf.a11[a](i, j) = cx / lam;
                sf.a11b[a](i, j) = cxb / lam;
                sf.a1b1[a](i, j) = dx / lam;
                sf.a1b1b[a](i, j) = dxb / lam;
            }
        }
    return sf;
}

Grid2D<double> torsion_identity_residual(const MapState& m, int chart) {
    const FrameCoefficients fc = frame_coefficients(m, chart);
    const SecondForm sf = second_form(m, chart, fc);
    const int n = m.domain->chart(chart).n;
    Grid2D<double> res(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const TorsionJet t = m.target->torsion(m.at(chart, i, j));
            double mx = 0.0;
            for (int a = 0; a < 2; ++a) {
                cd rhs = 0.0;
                for (int b = 0; b < 2; ++b)
                    for (int c = 0; c < 2; ++c)
                        rhs += 2.0 * t.L[a][b][c] * fc.a1[b](i, j) * fc.a1b[c](i, j);
                const cd lhs = -sf.a11b[a](i, j) + sf.a1b1[a](i, j);
                mx = std::max(mx, std::abs(lhs - rhs));
            }
            res(i, j) = mx;
        }
    return res;
}

Vec2Field harmonic_residual_field(const MapState& m, int chart) {
    const FrameCoefficients fc = frame_coefficients(m, chart);
    const SecondForm sf = second_form(m, chart, fc);
    const int n = m.domain->chart(chart).n;
    Vec2Field r(n);
    for (int a = 0; a < 2; ++a)
        for (size_t t = 0; t < r[a].v.size(); ++t)
            r[a].v[t] = sf.a11b[a].v[t] + sf.a1b1[a].v[t];
    return r;
}

double harmonic_residual_max(const MapState& m) {
    double mx = 0.0;
    for (int k = 0; k < m.domain->num_charts(); ++k) {
        const Vec2Field r = harmonic_residual_field(m, k);
        const Grid2D<double> chi = m.domain->partition_field(k);
        for (int a = 0; a < 2; ++a)
            for (size_t t = 0; t < r[a].v.size(); ++t)
                if (chi.v[t] > 0.5 && m.charts[k].valid.v[t])
                    mx = std::max(mx, std::abs(r[a].v[t]));
    }
    return mx;
}

Grid2D<double> energy_density(const MapState& m, int chart) {
    const FrameCoefficients fc = frame_coefficients(m, chart);
    const int n = m.domain->chart(chart).n;
    Grid2D<double> e(n);
    for (size_t t = 0; t < e.v.size(); ++t)
        e.v[t] = std::norm(fc.a1[0].v[t]) + std::norm(fc.a1[1].v[t]) +
                 std::norm(fc.a1b[0].v[t]) + std::norm(fc.a1b[1].v[t]);
    return e;
}

EnergyField energy(const MapState& m, const RegionMask* mask) {
    EnergyField ef;
    for (int k = 0; k < m.domain->num_charts(); ++k) ef.density.push_back(energy_density(m, k));
    if (mask) {
        ef.total = integrate(m.domain->chart(0), ef.density[0], mask);
    } else if (m.domain->sphere) {
        ef.total = m.domain->integrate_total(ef.density);
    } else {
        ef.total = integrate(m.domain->chart(0), ef.density[0]);
    }
    return ef;
}

double energy_total_oversampled(const MapState& m, int factor) {
    if (!m.jet || factor <= 1) return energy(m).total;
    double total = 0.0;
    for (int k = 0; k < m.domain->num_charts(); ++k) {
        const DomainChart& c = m.domain->chart(k);
        const int nf = c.n * factor;
        const double hf = c.periodic() ? c.size / nf : 2.0 * c.size / (nf - 1);
        double s = 0.0;
        for (int i = 0; i < nf; ++i)
            for (int j = 0; j < nf; ++j) {
                const cd x = c.periodic() ? cd(j * hf, i * hf)
                                          : cd(c.x0 + j * hf, c.y0 + i * hf);
                const double chi = m.domain->partition_weight(k, x);
                if (chi <= 0.0) continue;
                const MapJetSample js = m.jet(k, x);
                const TargetPoint qn = m.target->normalize(js.q);
                const auto J = m.target->transition_jacobian(js.q, qn.chart);
                const MetricJet mj = m.target->metric(qn);
                double e = 0.0;
                for (int a = 0; a < 2; ++a)
                    e += mj.h[a] * std::norm(J[a]) *
                         (std::norm(js.d[a]) + std::norm(js.db[a]));
                s += chi * e;  // lambda^2 from the measure cancels 1/lambda^2 in e
            }
        total += s * hf * hf;
    }
    return total;
}

MeanCurvature mean_curvature(const MapState& m, int chart) {
    const FrameCoefficients fc = frame_coefficients(m, chart);
    const int n = m.domain->chart(chart).n;
    MeanCurvature out;
    out.H = Vec2Field(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const TorsionJet t = m.target->torsion(m.at(chart, i, j));
            double e = 0.0;
            cd q = 0.0;
            for (int a = 0; a < 2; ++a) {
                e += std::norm(fc.a1[a](i, j)) + std::norm(fc.a1b[a](i, j));
                q += fc.a1[a](i, j) * std::conj(fc.a1b[a](i, j));
            }
            double h2 = 0.0;
            for (int a = 0; a < 2; ++a) {
                cd H = 0.0;
                for (int b = 0; b < 2; ++b)
                    for (int c = 0; c < 2; ++c) {
                        H += 2.0 * fc.a1b[b](i, j) * std::conj(t.L[b][c][a]) *
                             std::conj(fc.a1b[c](i, j));
                        H += 2.0 * std::conj(fc.a1[b](i, j)) * std::conj(t.L[c][b][a]) *
                             fc.a1[c](i, j);
                    }
                out.H[a](i, j) = H;
                h2 += std::norm(H);
            }
            // |H|^2 in the target metric: frame is unitary, plus the conjugate part
            out.sup_norm = std::max(out.sup_norm, std::sqrt(2.0 * h2));
            out.conformality_defect =
                std::max(out.conformality_defect, 2.0 * std::abs(q) / (e + 1e-14));
        }
    return out;
}

double conformal_change_check(const MapState& m, int chart, const Grid2D<double>& mu) {
    const DomainChart& c = m.domain->chart(chart);
    const ChartGauge g0 = default_gauge(c);
    const ChartGauge g1 = scaled_gauge(c, mu);
    const FrameCoefficients fc0 = frame_coefficients_g(m, chart, g0);
    const FrameCoefficients fc1 = frame_coefficients_g(m, chart, g1);
    const SecondForm sf0 = second_form_g(m, chart, fc0, g0);
    const SecondForm sf1 = second_form_g(m, chart, fc1, g1);
    double scale = 1e-14, dev = 0.0;
    for (int a = 0; a < 2; ++a)
        for (size_t t = 0; t < mu.v.size(); ++t) {
            const double m2 = sqr(mu.v[t]);
            scale = std::max({scale, std::abs(sf1.a11b[a].v[t]), std::abs(sf1.a1b1[a].v[t])});
            dev = std::max({dev, std::abs(sf1.a11b[a].v[t] - m2 * sf0.a11b[a].v[t]),
                            std::abs(sf1.a1b1[a].v[t] - m2 * sf0.a1b1[a].v[t])});
        }
    return dev / scale;
}

CurvatureContraction curvature_contraction(const MapState& m, int chart,
                                           const FrameCoefficients& fc) {
    const int n = m.domain->chart(chart).n;
    CurvatureContraction cc;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) cc.G[a][b] = GridC(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const CurvatureTensor R = m.target->curvature(m.at(chart, i, j));
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    cd s = 0.0;
                    for (int k = 0; k < 2; ++k)
                        for (int l = 0; l < 2; ++l) {
                            s += 2.0 * R.Rhol[a][b][k][l] * fc.a1[k](i, j) * fc.a1b[l](i, j);
                            s += R.Rm[a][b][k][l] *
                                 (fc.a1[k](i, j) * std::conj(fc.a1[l](i, j)) -
                                  fc.a1b[k](i, j) * std::conj(fc.a1b[l](i, j)));
                            s += 2.0 * R.Ranti[a][b][k][l] * std::conj(fc.a1b[k](i, j)) *
                                 std::conj(fc.a1[l](i, j));
                        }
                    cc.G[b][a](i, j) = s;  // G[j][i] holds Omega^i_j/(phi^phib)
                }
        }
    return cc;
}

double first_order_operator_check(const MapState& m, int chart, double harmonic_tol) {
    const Vec2Field r = harmonic_residual_field(m, chart);
    double rmax = 0.0;
    for (int a = 0; a < 2; ++a) rmax = std::max(rmax, max_abs(r[a]));
    if (rmax > harmonic_tol)
        fail("NotHarmonic", "harmonic residual " + std::to_string(rmax) + " above tolerance");
    const Grid2D<double> res = torsion_identity_residual(m, chart);
    return std::max(max_abs(res), rmax);
}

double second_order_operator_check(const MapState& m, int chart, double harmonic_tol) {
    const Vec2Field r = harmonic_residual_field(m, chart);
    double rmax = 0.0;
    for (int a = 0; a < 2; ++a) rmax = std::max(rmax, max_abs(r[a]));
    if (rmax > harmonic_tol)
        fail("NotHarmonic", "harmonic residual " + std::to_string(rmax) + " above tolerance");

    const DomainChart& c = m.domain->chart(chart);
    const ChartGauge g = default_gauge(c);
    const FrameCoefficients fc = frame_coefficients_g(m, chart, g);
    const SecondForm sf = second_form_g(m, chart, fc, g);
    const int n = c.n;

    // g^i := 2 L^i_{jk} a^j_1 a^k_{1b}
    Vec2Field gv(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const TorsionJet t = m.target->torsion(m.at(chart, i, j));
            for (int a = 0; a < 2; ++a) {
                cd s = 0.0;
                for (int b = 0; b < 2; ++b)
                    for (int k = 0; k < 2; ++k)
                        s += 2.0 * t.L[a][b][k] * fc.a1[b](i, j) * fc.a1b[k](i, j);
                gv[a](i, j) = s;
            }
        }
    // covariant derivative of gv (no rho weight): dg + g^b f*omega^a_b
    const MapDerivs dg = field_derivatives_framed(m, chart, gv);
    double defect = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const ConnectionData cn = m.target->chern_connection(m.at(chart, i, j));
            const TorsionJet t = m.target->torsion_jet(m.at(chart, i, j));
            const PulledOmega po = pull_omega(cn, fc.md, i, j);
            const double lam = g.lambda(i, j);
            for (int a = 0; a < 2; ++a) {
                cd lx = dg.d[a](i, j), lxb = dg.db[a](i, j);
                for (int b = 0; b < 2; ++b) {
                    lx += gv[b](i, j) * po.wx[b][a];
                    lxb += gv[b](i, j) * po.wxb[b][a];
                }
                lx /= lam;
                lxb /= lam;
                cd q1 = 0.0, q2 = 0.0;
                for (int b = 0; b < 2; ++b)
                    for (int k = 0; k < 2; ++k) {
                        cd jet1 = 0.0, jet2 = 0.0;
                        for (int l = 0; l < 2; ++l) {
                            jet1 += t.L1[a][b][k][l] * fc.a1[l](i, j) +
                                    t.L1b[a][b][k][l] * std::conj(fc.a1b[l](i, j));
                            jet2 += t.L1[a][b][k][l] * fc.a1b[l](i, j) +
                                    t.L1b[a][b][k][l] * std::conj(fc.a1[l](i, j));
                        }
                        q1 += 2.0 * (jet1 * fc.a1[b](i, j) * fc.a1b[k](i, j) +
                                     t.L[a][b][k] * (sf.a11[b](i, j) * fc.a1b[k](i, j) +
                                                     fc.a1[b](i, j) * sf.a1b1[k](i, j)));
                        q2 += 2.0 * (jet2 * fc.a1[b](i, j) * fc.a1b[k](i, j) +
                                     t.L[a][b][k] * (sf.a11b[b](i, j) * fc.a1b[k](i, j) +
                                                     fc.a1[b](i, j) * sf.a1b1b[k](i, j)));
                    }
                defect = std::max({defect, std::abs(lx - q1), std::abs(lxb - q2)});
            }
        }
    return defect;
}

Vec2Field tension_field(const MapState& m, int chart) {
    // Chain-rule assembly from the map jets (f, df, dbar f, d dbar f): exact in
    // the field differentiation, so the only numerics left are map derivatives.
    const DomainChart& c = m.domain->chart(chart);
    const int n = c.n;
    const MapDerivs md = map_derivatives(m, chart);
    const Vec2Field mdd = map_mixed_derivative(m, chart, md);
    Vec2Field tau(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const TargetPoint p = m.at(chart, i, j);
            const MetricJet mj = m.target->metric(p);
            const ConnectionData cn = m.target->chern_connection(p);
            const PulledOmega po = pull_omega(cn, md, i, j);
            const cd x = c.point(i, j);
            const double lam = c.lambda(x);
            const cd dlam = lam * c.dlog_lambda(x), dblam = std::conj(dlam);
            const cd rx = c.rho_x(x), rxb = std::conj(rx);
            cd a1[2], a1b[2], Dc_x[2], Dc_xb[2];
            for (int a = 0; a < 2; ++a) {
                const double ca = std::sqrt(mj.h[a]);
                a1[a] = ca * md.d[a](i, j) / lam;
                a1b[a] = ca * md.db[a](i, j) / lam;
                cd dx = 0.0, dxb = 0.0;
                for (int k = 0; k < 2; ++k) {
                    const cd dc = mj.dh[a][k] / (2.0 * ca);
                    const cd dbc = std::conj(mj.dh[a][k]) / (2.0 * ca);
                    dx += dc * md.d[k](i, j) + dbc * std::conj(md.db[k](i, j));
                    dxb += dc * md.db[k](i, j) + dbc * std::conj(md.d[k](i, j));
                }
                Dc_x[a] = dx;
                Dc_xb[a] = dxb;
            }
            for (int a = 0; a < 2; ++a) {
                const double ca = std::sqrt(mj.h[a]);
                const cd da1_xb = (Dc_xb[a] * md.d[a](i, j) + ca * mdd[a](i, j)) / lam -
                                  ca * md.d[a](i, j) * dblam / (lam * lam);
                const cd da1b_x = (Dc_x[a] * md.db[a](i, j) + ca * mdd[a](i, j)) / lam -
                                  ca * md.db[a](i, j) * dlam / (lam * lam);
                cd a11b = da1_xb - I * rxb * a1[a];
                cd a1b1 = da1b_x + I * rx * a1b[a];
                for (int b = 0; b < 2; ++b) {
                    a11b += a1[b] * po.wxb[b][a];
                    a1b1 += a1b[b] * po.wx[b][a];
                }
                tau[a](i, j) = (a11b + a1b1) / (lam * ca);
            }
        }
    return tau;
}

double tension_max(const MapState& m) {
    double mx = 0.0;
    for (int k = 0; k < m.domain->num_charts(); ++k) {
        const Vec2Field tau = tension_field(m, k);
        const Grid2D<double> chi = m.domain->partition_field(k);
        for (int a = 0; a < 2; ++a)
            for (size_t t = 0; t < tau[a].v.size(); ++t)
                if (chi.v[t] > 0.5 && m.charts[k].valid.v[t])
                    mx = std::max(mx, std::abs(tau[a].v[t]));
    }
    return mx;
}

Vec2Field kaehler_tension_oracle(const MapState& m, int chart) {
    if (m.target->id() == TargetId::Hopf)
        fail("NotKaehler", "oracle defined for Kaehler targets only");
    const DomainChart& c = m.domain->chart(chart);
    const int n = c.n;
    const MapDerivs md = map_derivatives(m, chart);
    const Vec2Field mdd = map_mixed_derivative(m, chart, md);
    Vec2Field tau(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const ConnectionData cn = m.target->chern_connection(m.at(chart, i, j));
            const double l2 = sqr(c.lambda(c.point(i, j)));
            for (int a = 0; a < 2; ++a) {
                cd s = mdd[a](i, j);
                for (int p = 0; p < 2; ++p)
                    for (int q = 0; q < 2; ++q)
                        s += cn.gamma[a][p][q] * md.d[q](i, j) * md.db[p](i, j);
                tau[a](i, j) = 2.0 * s / l2;
            }
        }
    return tau;
}

}  // namespace chernlab
