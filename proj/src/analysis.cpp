#include "chernlab/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace chernlab {

namespace {

struct PulledOmegaField {
    // dx / dxb coefficients of f*omega^a_b at every point
    std::vector<GridC> wx, wxb;  // indexed [b*2+a]
};

PulledOmegaField pull_omega_field(const MapState& m, int chart, const MapDerivs& md) {
    const int n = m.domain->chart(chart).n;
    PulledOmegaField po;
    po.wx.assign(4, GridC(n));
    po.wxb.assign(4, GridC(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const ConnectionData cn = m.target->chern_connection(m.at(chart, i, j));
            for (int b = 0; b < 2; ++b)
                for (int a = 0; a < 2; ++a) {
                    cd sx = 0.0, sxb = 0.0;
                    for (int k = 0; k < 2; ++k) {
                        const cd dfk = md.d[k](i, j), dbfk = md.db[k](i, j);
                        sx += cn.w10[b][a][k] * dfk + cn.w01[b][a][k] * std::conj(dbfk);
                        sxb += cn.w10[b][a][k] * dbfk + cn.w01[b][a][k] * std::conj(dfk);
                    }
                    po.wx[b * 2 + a](i, j) = sx;
                    po.wxb[b * 2 + a](i, j) = sxb;
                }
        }
    return po;
}

/// Covariant derivative of a frame-indexed field with rho-weight `w`
/// (coefficient of -i rho in its defining relation): returns phi/phib pair.
void covariant_pair(const MapState& m, int chart, const Vec2Field& v, int rho_weight,
                    const ChartGauge& g, const PulledOmegaField& po, Vec2Field& out1,
                    Vec2Field& out1b) {
    const int n = m.domain->chart(chart).n;
    const MapDerivs dv = field_derivatives_framed(m, chart, v);
    out1 = Vec2Field(n);
    out1b = Vec2Field(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double lam = g.lambda(i, j);
            const cd rx = g.rho_x(i, j), rxb = std::conj(rx);
            for (int a = 0; a < 2; ++a) {
                cd cx = dv.d[a](i, j) - static_cast<double>(rho_weight) * I * rx * v[a](i, j);
                cd cxb =
                    dv.db[a](i, j) - static_cast<double>(rho_weight) * I * rxb * v[a](i, j);
                for (int b = 0; b < 2; ++b) {
                    cx += v[b](i, j) * po.wx[b * 2 + a](i, j);
                    cxb += v[b](i, j) * po.wxb[b * 2 + a](i, j);
                }
                out1[a](i, j) = cx / lam;
                out1b[a](i, j) = cxb / lam;
            }
        }
}

int interior_margin_nodes(const DomainChart& c, int margin) {
    return c.periodic() ? 0 : margin;
}

}  // namespace

Grid2D<double> scalar_laplacian(const DomainChart& c, const Grid2D<double>& u) {
    const int n = c.n;
    GridC uc(n);
    for (size_t t = 0; t < u.v.size(); ++t) uc.v[t] = u.v[t];
    const DPair d1 = d_complex(c, uc);
    GridC u1(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) u1(i, j) = d1.d(i, j) / c.lambda(c.point(i, j));
    const DPair d2 = d_complex(c, u1);
    Grid2D<double> lap(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const cd x = c.point(i, j);
            const cd rxb = std::conj(c.rho_x(x));
            const cd v = (d2.db(i, j) - I * rxb * u1(i, j)) / c.lambda(x);
            lap(i, j) = 2.0 * v.real();
        }
    return lap;
}

ThirdDerivs third_derivatives(const MapState& m, int chart, const FrameCoefficients& fc,
                              const SecondForm& sf) {
    const ChartGauge g = default_gauge(m.domain->chart(chart));
    const PulledOmegaField po = pull_omega_field(m, chart, fc.md);
    ThirdDerivs td;
    covariant_pair(m, chart, sf.a11, 2, g, po, td.a111, td.a111b);
    covariant_pair(m, chart, sf.a11b, 0, g, po, td.a11b1, td.a11b1b);
    covariant_pair(m, chart, sf.a1b1, 0, g, po, td.a1b11, td.a1b11b);
    covariant_pair(m, chart, sf.a1b1b, -2, g, po, td.a1b1b1, td.a1b1b1b);
    return td;
}

Grid2D<double> bochner_rhs_direct(const MapState& m, int chart) {
    const FrameCoefficients fc = frame_coefficients(m, chart);
    const SecondForm sf = second_form(m, chart, fc);
    const ThirdDerivs td = third_derivatives(m, chart, fc, sf);
    const int n = m.domain->chart(chart).n;
    Grid2D<double> rhs(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double A2 = 0.0, cross = 0.0;
            for (int a = 0; a < 2; ++a) {
                A2 += std::norm(sf.a11[a](i, j)) + std::norm(sf.a11b[a](i, j)) +
                      std::norm(sf.a1b1[a](i, j)) + std::norm(sf.a1b1b[a](i, j));
                cross += (std::conj(fc.a1[a](i, j)) * td.a111b[a](i, j) +
                          fc.a1[a](i, j) * std::conj(td.a11b1[a](i, j)) +
                          std::conj(fc.a1b[a](i, j)) * td.a1b11b[a](i, j) +
                          fc.a1b[a](i, j) * std::conj(td.a1b1b1[a](i, j)))
                             .real();
            }
            rhs(i, j) = 2.0 * (A2 + cross);
        }
    return rhs;
}

BochnerReport bochner_check(const MapState& m, int chart, double harmonic_tol, int margin) {
    const DomainChart& c = m.domain->chart(chart);
    const int n = c.n;
    const Vec2Field r = harmonic_residual_field(m, chart);
    const int gate_mrg = interior_margin_nodes(c, margin);
    double rmax = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int i = gate_mrg; i < n - gate_mrg; ++i)
            for (int j = gate_mrg; j < n - gate_mrg; ++j)
                rmax = std::max(rmax, std::abs(r[a](i, j)));
    if (rmax > harmonic_tol)
        fail("NotHarmonic", "harmonic residual " + std::to_string(rmax) + " above tolerance");
    const FrameCoefficients fc = frame_coefficients(m, chart);
    const SecondForm sf = second_form(m, chart, fc);
    const CurvatureContraction cc = curvature_contraction(m, chart, fc);
    const Grid2D<double> e = energy_density(m, chart);

    BochnerReport rep;
    rep.lhs = scalar_laplacian(c, e);
    rep.rhs = Grid2D<double>(n);

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const TorsionJet t = m.target->torsion_jet(m.at(chart, i, j));
            const double Ks = 0.5 * c.gauss_K(c.point(i, j));
            double A2 = 0.0;
            for (int a = 0; a < 2; ++a)
                A2 += std::norm(sf.a11[a](i, j)) + 2.0 * std::norm(sf.a11b[a](i, j)) +
                      std::norm(sf.a1b1b[a](i, j));
            cd om1 = 0.0, om2 = 0.0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    om1 += std::conj(fc.a1[a](i, j)) * fc.a1[b](i, j) * cc.G[b][a](i, j);
                    om2 += fc.a1b[a](i, j) * std::conj(fc.a1b[b](i, j)) * cc.G[a][b](i, j);
                }
            // torsion lines of (A-31); the first Omega term carries the corrected sign
            cd l1 = 0.0, l2 = 0.0;
            for (int a = 0; a < 2; ++a) {
                cd w1 = 0.0, w2 = 0.0;
                for (int b = 0; b < 2; ++b)
                    for (int k = 0; k < 2; ++k) {
                        cd jet1 = 0.0, jet2 = 0.0;
                        for (int l = 0; l < 2; ++l) {
                            jet1 += std::conj(t.L1[a][b][k][l]) * std::conj(fc.a1[l](i, j)) +
                                    std::conj(t.L1b[a][b][k][l]) * fc.a1b[l](i, j);
                            jet2 += std::conj(t.L1[a][b][k][l]) * std::conj(fc.a1b[l](i, j)) +
                                    std::conj(t.L1b[a][b][k][l]) * fc.a1[l](i, j);
                        }
                        const cd tail = std::conj(fc.a1[b](i, j)) * std::conj(fc.a1b[k](i, j));
                        w1 += jet1 * tail + std::conj(t.L[a][b][k]) *
                                                (std::conj(sf.a11[b](i, j)) *
                                                     std::conj(fc.a1b[k](i, j)) +
                                                 std::conj(fc.a1[b](i, j)) *
                                                     std::conj(sf.a1b1[k](i, j)));
                        w2 += jet2 * tail + std::conj(t.L[a][b][k]) *
                                                (std::conj(sf.a11b[b](i, j)) *
                                                     std::conj(fc.a1b[k](i, j)) +
                                                 std::conj(fc.a1[b](i, j)) *
                                                     std::conj(sf.a1b1b[k](i, j)));
                    }
                l1 += fc.a1[a](i, j) * w1;
                l2 += fc.a1b[a](i, j) * w2;
            }
            rep.rhs(i, j) = 2.0 * A2 + 2.0 * Ks * e(i, j) - 2.0 * om1.real() +
                            2.0 * om2.real() - 4.0 * l1.real() + 4.0 * l2.real();
        }

    const int mrg = interior_margin_nodes(c, margin);
    for (int i = mrg; i < n - mrg; ++i)
        for (int j = mrg; j < n - mrg; ++j)
            rep.defect = std::max(rep.defect, std::abs(rep.lhs(i, j) - rep.rhs(i, j)));
    return rep;
}

DiffIneqFit fit_differential_inequality(const std::vector<const MapState*>& suite) {
    if (suite.empty()) fail("EmptySuite", "no maps supplied");
    DiffIneqFit fit;
    for (const MapState* mp : suite) {
        for (int k = 0; k < mp->domain->num_charts(); ++k) {
            const DomainChart& c = mp->domain->chart(k);
            double worstK = 0.0;
            for (int i = 0; i < c.n; ++i)
                for (int j = 0; j < c.n; ++j)
                    worstK = std::max(worstK, std::max(-0.5 * c.gauss_K(c.point(i, j)), 0.0));
            fit.C1 = std::max(fit.C1, 2.0 * worstK);
        }
    }
    for (const MapState* mp : suite) {
        for (int k = 0; k < mp->domain->num_charts(); ++k) {
            const DomainChart& c = mp->domain->chart(k);
            const Grid2D<double> e = energy_density(*mp, k);
            const Grid2D<double> lap = scalar_laplacian(c, e);
            const int mrg = interior_margin_nodes(c, 4);
            double emax = 0.0;
            for (const auto& x : e.v) emax = std::max(emax, x);
            for (int i = mrg; i < c.n - mrg; ++i)
                for (int j = mrg; j < c.n - mrg; ++j) {
                    const double need = -lap(i, j) - fit.C1 * e(i, j) - fit.slack;
                    if (need <= 0.0) continue;
                    const double e2 = sqr(e(i, j));
                    if (e2 < 1e-10 * std::max(emax, 1.0)) continue;
                    fit.C2 = std::max(fit.C2, need / e2);
                }
        }
    }
    return fit;
}

std::vector<EpsRegRow> epsilon_regularity_check(const MapState& m, int chart,
                                                const std::vector<cd>& centers, double r,
                                                double eps1) {
    const DomainChart& c = m.domain->chart(chart);
    const Grid2D<double> e = energy_density(m, chart);
    std::vector<EpsRegRow> rows;
    for (cd ctr : centers) {
        EpsRegRow row;
        row.center = ctr;
        row.r = r;
        RegionMask m2r, mr;
        try {
            m2r = geodesic_disk_mask(c, ctr, 2.0 * r);
            mr = geodesic_disk_mask(c, ctr, r);
        } catch (const Error&) {
            continue;  // disk does not fit inside the chart; skip this center
        }
        row.energy_2r = integrate(c, e, &m2r);
        if (row.energy_2r < 1e-12) continue;  // degenerate row skipped
        for (int i = 0; i < c.n; ++i)
            for (int j = 0; j < c.n; ++j)
                if (mr.w(i, j) > 0.5) row.sup_e = std::max(row.sup_e, e(i, j));
        row.admissible = row.energy_2r <= eps1;
        row.ratio = row.sup_e * r * r / row.energy_2r;
        rows.push_back(row);
    }
    return rows;
}

double empirical_c3(const std::vector<EpsRegRow>& rows) {
    double c3 = 0.0;
    for (const auto& r : rows)
        if (r.admissible) c3 = std::max(c3, r.ratio);
    return c3;
}

double loop_length(const MapState& m, int chart, cd center, double radius, int samples) {
    const DomainChart& c = m.domain->chart(chart);
    if (samples <= 0)
        samples = std::max(128, static_cast<int>(std::ceil(6.0 * PI * radius / c.h)));
    double L = 0.0;
    TargetPoint prev = m.eval(chart, center + radius);
    for (int s = 1; s <= samples; ++s) {
        const double th = 2.0 * PI * s / samples;
        const TargetPoint cur = m.eval(chart, center + radius * std::exp(I * th));
        L += m.target->chord_distance(prev, cur);
        prev = cur;
    }
    return L;
}

IsoperimetricRow isoperimetric_check(const MapState& m, int chart, cd center,
                                     double geodesic_r) {
    const DomainChart& c = m.domain->chart(chart);
    IsoperimetricRow row;
    const RegionMask mask = geodesic_disk_mask(c, center, geodesic_r);
    const Grid2D<double> e = energy_density(m, chart);
    row.area = integrate(c, e, &mask);
    const ChartCircle circ = geodesic_circle(c, center, geodesic_r);
    row.length = loop_length(m, chart, circ.center, circ.radius);
    row.conformality_defect = mean_curvature(m, chart).conformality_defect;
    if (row.area < 1e-12 && row.length < 1e-6) {
        row.degenerate = true;
        return row;
    }
    row.nonconformal = row.conformality_defect > 1e-2;
    row.ratio = row.area / sqr(std::max(row.length, 1e-300));
    return row;
}

MonotonicityCurve monotonicity_check(const MapState& m, int chart, const TargetPoint& x,
                                     const std::vector<double>& radii) {
    const DomainChart& c = m.domain->chart(chart);
    const int n = c.n;
    const Grid2D<double> e = energy_density(m, chart);
    Grid2D<double> dist(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dist(i, j) = m.target->chord_distance(m.at(chart, i, j), x);
    MonotonicityCurve out;
    out.infimum = 1e300;
    for (double r : radii) {
        Grid2D<double> g(n), gn(n);
        for (size_t t = 0; t < g.v.size(); ++t) g.v[t] = dist.v[t] - r;
        // gradient magnitude of the distance field on the grid
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const int jm = std::max(j - 1, 0), jp = std::min(j + 1, n - 1);
                const int im = std::max(i - 1, 0), ip = std::min(i + 1, n - 1);
                const double gx = (dist(i, jp) - dist(i, jm)) / ((jp - jm) * c.h);
                const double gy = (dist(ip, j) - dist(im, j)) / ((ip - im) * c.h);
                gn(i, j) = std::max(std::hypot(gx, gy), 1e-10);
            }
        const RegionMask mask = mask_from_level(c, g, gn);
        if (!c.periodic()) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (c.on_boundary(i, j) && mask.w(i, j) > 0.0)
                        fail("BoundaryIntersected", "target ball preimage reaches chart edge");
        }
        const double A = integrate(c, e, &mask);
        out.r.push_back(r);
        out.area_over_r2.push_back(A / (r * r));
        out.infimum = std::min(out.infimum, A / (r * r));
    }
    return out;
}

MorreyFit morrey_decay_fit(const MapState& m, int chart, cd center,
                           const std::vector<double>& radii) {
    if (radii.size() < 4) fail("InsufficientRadii", "need >= 4 radii");
    const DomainChart& c = m.domain->chart(chart);
    const Grid2D<double> e = energy_density(m, chart);
    MorreyFit fit;
    for (double r : radii) {
        const RegionMask mask = geodesic_disk_mask(c, center, r);
        fit.r.push_back(r);
        fit.area.push_back(integrate(c, e, &mask));
    }
    if (*std::max_element(fit.area.begin(), fit.area.end()) < 1e-12) {
        fit.degenerate = true;
        return fit;
    }
    const auto [slope, res] = loglog_fit(fit.r, fit.area);
    fit.alpha = slope;
    fit.residual = res;
    return fit;
}

}  // namespace chernlab
