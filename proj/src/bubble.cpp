#include "chernlab/bubble.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace chernlab {

namespace {

struct FamilyDensities {
    // densities[j][chart]
    std::vector<std::vector<Grid2D<double>>> e;
};

FamilyDensities densities(const std::vector<MapState>& family) {
    FamilyDensities fd;
    for (const auto& m : family) {
        std::vector<Grid2D<double>> per;
        for (int k = 0; k < m.domain->num_charts(); ++k) per.push_back(energy_density(m, k));
        fd.e.push_back(std::move(per));
    }
    return fd;
}

double window_energy(const DomainChart& c, const Grid2D<double>& e, cd p, double r) {
    const RegionMask mask = euclidean_disk_mask(c, p, r);
    return integrate(c, e, &mask);
}

/// Bicubic sample of a scalar grid field (clamped windows at bounded edges).
double interp_scalar(const DomainChart& c, const Grid2D<double>& g, cd x) {
    const int n = c.n;
    const double fx = (x.real() - c.x0) / c.h, fy = (x.imag() - c.y0) / c.h;
    const int jf = std::clamp(static_cast<int>(std::floor(fx)), 1, n - 3);
    const int if_ = std::clamp(static_cast<int>(std::floor(fy)), 1, n - 3);
    const double tx = fx - jf, ty = fy - if_;
    auto w4 = [](double t, double w[4]) {
        const int off[4] = {-1, 0, 1, 2};
        for (int a = 0; a < 4; ++a) {
            double num = 1.0, den = 1.0;
            for (int b = 0; b < 4; ++b) {
                if (a == b) continue;
                num *= (t - off[b]);
                den *= (off[a] - off[b]);
            }
            w[a] = num / den;
        }
    };
    double wx[4], wy[4];
    w4(tx, wx);
    w4(ty, wy);
    double acc = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            const int ii = std::clamp(if_ + a - 1, 0, n - 1);
            const int jj = std::clamp(jf + b - 1, 0, n - 1);
            acc += wy[a] * wx[b] * g(ii, jj);
        }
    return acc;
}

struct WindowMoments {
    double mass = 0.0;
    cd moment;  // integral of (x - center) * density
};

/// Jet-exact polar quadrature of the (optionally base-subtracted) energy over
/// the coordinate disk B_r(center); radial grading resolves concentrated cores.
WindowMoments window_moments_polar(const MapState& m, int chart, cd center, double r,
                                   const Grid2D<double>* subtract,
                                   bool with_partition = false) {
    const DomainChart& c = m.domain->chart(chart);
    auto density = [&](cd x) {
        const MapJetSample js = m.jet(chart, x);
        const TargetPoint qn = m.target->normalize(js.q);
        const auto J = m.target->transition_jacobian(js.q, qn.chart);
        const MetricJet mj = m.target->metric(qn);
        double e = 0.0;
        for (int a = 0; a < 2; ++a)
            e += mj.h[a] * std::norm(J[a]) * (std::norm(js.d[a]) + std::norm(js.db[a]));
        if (subtract) {
            const double lam2 = sqr(c.lambda(x));
            e = std::max(e - interp_scalar(c, *subtract, x) * lam2, 0.0);
        }
        if (with_partition) e *= m.domain->partition_weight(chart, x);
        return e;  // already multiplied by lambda^2 relative to e0 dA0
    };
    const double k_hat = std::sqrt(std::max(density(center), 4.0)) / 2.0;
    const double split = std::min(0.5 * r, 6.0 / std::max(k_hat, 1.0));
    const int n_th = 96, n_r1 = 128, n_r2 = 128;
    WindowMoments out;
    auto simpson = [&](double a, double b, int steps) {
        if (b - a < 1e-14) return;
        const int nseg = steps + (steps % 2);
        const double hr = (b - a) / nseg;
        for (int i = 0; i <= nseg; ++i) {
            const double rho = a + i * hr;
            const double wr = ((i == 0 || i == nseg) ? 1.0 : (i % 2 ? 4.0 : 2.0)) * hr / 3.0;
            double ring = 0.0;
            cd ringm;
            for (int t = 0; t < n_th; ++t) {
                const cd dx = rho * std::exp(I * (2.0 * PI * t / n_th));
                const double d = density(center + dx);
                ring += d;
                ringm += d * dx;
            }
            const double wth = 2.0 * PI / n_th;
            out.mass += wr * rho * ring * wth;
            out.moment += wr * rho * ringm * wth;
        }
    };
    simpson(0.0, split, n_r1);
    simpson(split, r, n_r2);
    return out;
}

/// Window energy of a family member: polar jet quadrature when available,
/// masked grid quadrature otherwise.
double member_window_energy(const MapState& m, int chart, const Grid2D<double>& e_grid,
                            cd p, double r, const Grid2D<double>* subtract = nullptr) {
    if (m.jet) return window_moments_polar(m, chart, p, r, subtract).mass;
    const DomainChart& c = m.domain->chart(chart);
    if (!subtract) return window_energy(c, e_grid, p, r);
    Grid2D<double> diff(e_grid.n);
    for (size_t t = 0; t < diff.v.size(); ++t)
        diff.v[t] = std::max(e_grid.v[t] - subtract->v[t], 0.0);
    return window_energy(c, diff, p, r);
}

/// Mass extrapolation: fit M(r) = m + a r^2 + b r^-2 by least squares.
std::pair<double, double> extrapolate_mass(const std::vector<double>& r,
                                           const std::vector<double>& M) {
    const size_t n = r.size();
    double A[3][3] = {{0}}, rhs[3] = {0};
    for (size_t t = 0; t < n; ++t) {
        const double b0 = 1.0, b1 = r[t] * r[t], b2 = 1.0 / (r[t] * r[t]);
        const double base[3] = {b0, b1, b2};
        for (int i = 0; i < 3; ++i) {
            rhs[i] += base[i] * M[t];
            for (int j = 0; j < 3; ++j) A[i][j] += base[i] * base[j];
        }
    }
    // 3x3 solve (Cramer)
    auto det3 = [](const double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    const double d = det3(A);
    double sol[3] = {0, 0, 0};
    if (std::abs(d) > 1e-14) {
        for (int i = 0; i < 3; ++i) {
            double B[3][3];
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) B[a][b] = A[a][b];
            for (int a = 0; a < 3; ++a) B[a][i] = rhs[a];
            sol[i] = det3(B) / d;
        }
    } else {
        sol[0] = M.back();
    }
    double m_hat = sol[0];
    if (!(m_hat > 0.0) || m_hat > 2.0 * *std::max_element(M.begin(), M.end()))
        m_hat = M.front();
    double rss = 0.0;
    for (size_t t = 0; t < n; ++t)
        rss += sqr(M[t] - (sol[0] + sol[1] * r[t] * r[t] + sol[2] / (r[t] * r[t])));
    return {m_hat, std::sqrt(rss / n)};
}

Grid2D<double> clamp_subtract(const Grid2D<double>& a, const Grid2D<double>& b) {
    Grid2D<double> out(a.n);
    for (size_t t = 0; t < a.v.size(); ++t) out.v[t] = std::max(a.v[t] - b.v[t], 0.0);
    return out;
}

}  // namespace

double member_energy_refined(const MapState& m) {
    const int factor = 4;
    double total = energy_total_oversampled(m, factor);
    if (!m.jet) return total;
    const double eta = 0.15;
    for (int ch = 0; ch < m.domain->num_charts(); ++ch) {
        const DomainChart& c = m.domain->chart(ch);
        const double hf = c.periodic() ? c.size / (c.n * factor)
                                       : 2.0 * c.size / (c.n * factor - 1);
        const Grid2D<double> e = energy_density(m, ch);
        const double cut = sqr(1.5 / hf);  // feature width below ~the fine grid
        std::vector<cd> peaks;
        for (int i = 1; i < c.n - 1; ++i)
            for (int j = 1; j < c.n - 1; ++j) {
                if (e(i, j) < cut) continue;
                if (m.domain->partition_weight(ch, c.point(i, j)) <= 0.0) continue;
                bool is_max = true;
                for (int di = -1; di <= 1 && is_max; ++di)
                    for (int dj = -1; dj <= 1; ++dj)
                        if ((di || dj) && e(i + di, j + dj) > e(i, j)) is_max = false;
                if (!is_max) continue;
                bool dup = false;
                for (cd q : peaks)
                    if (std::abs(q - c.point(i, j)) < 2.0 * eta) dup = true;
                if (!dup) peaks.push_back(c.point(i, j));
            }
        for (cd p : peaks) {
            const double exact =
                window_moments_polar(m, ch, p, eta, nullptr, true).mass;
            // the same window as counted by the oversampled Cartesian sum
            double coarse = 0.0;
            const int nf = c.n * factor;
            for (int i = 0; i < nf; ++i)
                for (int j = 0; j < nf; ++j) {
                    const cd x = c.periodic() ? cd(j * hf, i * hf)
                                              : cd(c.x0 + j * hf, c.y0 + i * hf);
                    if (std::abs(x - p) > eta) continue;
                    const double chi = m.domain->partition_weight(ch, x);
                    if (chi <= 0.0) continue;
                    const MapJetSample js = m.jet(ch, x);
                    const TargetPoint qn = m.target->normalize(js.q);
                    const auto J = m.target->transition_jacobian(js.q, qn.chart);
                    const MetricJet mj = m.target->metric(qn);
                    double ev = 0.0;
                    for (int a = 0; a < 2; ++a)
                        ev += mj.h[a] * std::norm(J[a]) *
                              (std::norm(js.d[a]) + std::norm(js.db[a]));
                    coarse += chi * ev * hf * hf;
                }
            total += exact - coarse;
        }
    }
    return total;
}

ConcentrationReport detect_concentration(const std::vector<MapState>& family,
                                         const BubbleConfig& cfg) {
    if (family.size() < 3) fail("NoFamily", "need a family of >= 3 maps");
    const FamilyDensities fd = densities(family);
    const size_t L = family.size();
    const std::vector<size_t> tail = {L - 2, L - 1};
    const std::vector<double> ladder = cfg.ladder();
    const double r_min = *std::min_element(ladder.begin(), ladder.end());
    const double r_max = *std::max_element(ladder.begin(), ladder.end());

    ConcentrationReport rep;
    struct Cand {
        int chart;
        cd p;
        double peak;
    };
    std::vector<Cand> cands;
    const MapState& last = family.back();
    for (int ch = 0; ch < last.domain->num_charts(); ++ch) {
        const DomainChart& c = last.domain->chart(ch);
        const Grid2D<double>& e = fd.e[L - 1][ch];
        const Grid2D<double> chi = last.domain->partition_field(ch);
        const double peak_cut = cfg.epsilon1 / (PI * r_min * r_min) * 0.05;
        for (int i = 1; i < c.n - 1; ++i)
            for (int j = 1; j < c.n - 1; ++j) {
                if (chi(i, j) <= 0.5) continue;  // owned by the other chart
                const double v = e(i, j);
                if (v < peak_cut) continue;
                bool is_max = true;
                for (int di = -1; di <= 1 && is_max; ++di)
                    for (int dj = -1; dj <= 1; ++dj)
                        if ((di || dj) && e(i + di, j + dj) > v) {
                            is_max = false;
                            break;
                        }
                if (is_max) cands.push_back({ch, c.point(i, j), v});
            }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return a.peak > b.peak;
    });

    for (const Cand& cand : cands) {
        const DomainChart& c = family[0].domain->chart(cand.chart);
        bool merged = false;
        for (const auto& pt : rep.points)
            if (pt.chart == cand.chart && std::abs(pt.p - cand.p) < 2.0 * c.h) {
                merged = true;
                break;
            }
        if (merged) {
            ++rep.merged;
            continue;
        }
        bool inside = false;
        for (const auto& pt : rep.points)
            if (pt.chart == cand.chart && std::abs(pt.p - cand.p) < r_max) inside = true;
        if (inside) continue;

        // energy on shrinking disks must stay above epsilon1 across the tail
        bool persistent = true;
        std::vector<double> M(ladder.size(), 0.0);
        for (size_t ri = 0; ri < ladder.size(); ++ri) {
            double mr = 0.0;
            for (size_t j : tail) {
                try {
                    mr = std::max(mr, member_window_energy(family[j], cand.chart,
                                                           fd.e[j][cand.chart], cand.p,
                                                           ladder[ri]));
                } catch (const Error&) {
                    persistent = false;
                }
            }
            M[ri] = mr;
            if (mr < cfg.epsilon1) persistent = false;
        }
        if (!persistent) continue;

        // refine the point to sub-grid accuracy: energy centroid of the last
        // member over the smallest ladder window (the (D-6) center of mass)
        cd p_ref = cand.p;
        try {
            if (last.jet) {
                const WindowMoments wm =
                    window_moments_polar(last, cand.chart, cand.p, r_min, nullptr);
                if (wm.mass > 1e-12) p_ref = cand.p + wm.moment / wm.mass;
            } else {
                p_ref = center_of_mass(c, fd.e[L - 1][cand.chart], cand.p, r_min);
            }
        } catch (const Error&) {
        }
        if (std::abs(p_ref - cand.p) > 2.0 * c.h) p_ref = cand.p;

        const auto [mass, resid] = extrapolate_mass(ladder, M);
        rep.points.push_back({cand.chart, p_ref, mass, resid});
    }

    // background: tail density away from the accepted windows
    for (int ch = 0; ch < last.domain->num_charts(); ++ch) {
        const DomainChart& c = last.domain->chart(ch);
        const Grid2D<double>& e = fd.e[L - 1][ch];
        const Grid2D<double> chi = last.domain->partition_field(ch);
        for (int i = 0; i < c.n; ++i)
            for (int j = 0; j < c.n; ++j) {
                if (chi(i, j) <= 0.5) continue;
                bool in_window = false;
                for (const auto& pt : rep.points)
                    if (pt.chart == ch && std::abs(c.point(i, j) - pt.p) < r_max)
                        in_window = true;
                if (!in_window) rep.background_density = std::max(rep.background_density, e(i, j));
            }
    }
    return rep;
}

double scale_r_literal(const MapState& base, int chart, cd p, double mass, int k) {
    const DomainChart& c = base.domain->chart(chart);
    const Grid2D<double> e = energy_density(base, chart);
    const double bound = mass / (32.0 * k * k);
    auto feasible = [&](double r) {
        if (r <= 0.0) return true;
        try {
            return window_energy(c, e, p, 2.0 * r) <= bound;
        } catch (const Error&) {
            return false;
        }
    };
    double hi = 1.0 / k;
    if (feasible(hi)) return hi;
    double lo = 0.0;
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid)) lo = mid;
        else hi = mid;
    }
    return lo;
}

cd center_of_mass(const DomainChart& c, const Grid2D<double>& density, cd p, double R) {
    const RegionMask mask = euclidean_disk_mask(c, p, R);
    double tot = 0.0;
    cd mom = 0.0;
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) {
            const double w = mask.w(i, j);
            if (w == 0.0) continue;
            const cd x = c.point(i, j);
            const double dm = w * density(i, j) * sqr(c.lambda(x));
            tot += dm;
            mom += dm * x;
        }
    if (tot < 1e-14) fail("ZeroEnergyRegion", "no energy in the center-of-mass window");
    return mom / tot;
}

double scale_mu(const DomainChart& c, const Grid2D<double>& density, cd x_tilde, double R,
                double C0) {
    const double total = window_energy(c, density, x_tilde, R);
    if (total < C0) fail("EnergyBelowC0", "window energy below the renormalization constant");
    auto annulus = [&](double mu) {
        if (mu <= 0.0) return total;
        return total - window_energy(c, density, x_tilde, mu);
    };
    double lo = 0.0, hi = R;
    if (annulus(hi) >= C0) return hi;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (annulus(mid) >= C0) lo = mid;
        else hi = mid;
    }
    return lo;
}

MapState estimate_base_map(const std::vector<MapState>& family,
                           const std::vector<ConcentrationPoint>& points,
                           const BubbleConfig& cfg) {
    const MapState& fL = family.back();
    const MapState& fP = family[family.size() - 2];
    const double kL = cfg.k_values.empty() ? 2.0 : cfg.k_values.back();
    const double kP = cfg.k_values.size() < 2 ? kL / 2.0
                                              : cfg.k_values[cfg.k_values.size() - 2];
    const double w = (std::abs(kL - kP) > 1e-12) ? kP / (kL - kP) : 1.0;

    MapState base = fL;
    base.formula = nullptr;
    base.jet = nullptr;
    std::vector<Grid2D<double>> gap(base.domain->num_charts());
    for (int ch = 0; ch < base.domain->num_charts(); ++ch) {
        const DomainChart& c = base.domain->chart(ch);
        gap[ch] = Grid2D<double>(c.n, 0.0);
        for (int i = 0; i < c.n; ++i)
            for (int j = 0; j < c.n; ++j) {
                const TargetPoint a = fL.at(ch, i, j);
                TargetPoint b = fP.at(ch, i, j);
                const double g = fL.target->chord_distance(a, b);
                gap[ch](i, j) = g;
                if (g > 0.1) continue;  // unstable tail; the fill pass covers it
                try {
                    b = fL.target->transition(b, a.chart);
                } catch (const Error&) {
                    continue;
                }
                TargetPoint lim = a;
                lim.z1 = a.z1 + w * (a.z1 - b.z1);
                lim.z2 = a.z2 + w * (a.z2 - b.z2);
                base.set(ch, i, j, fL.target->normalize(lim));
            }
    }

    // Dirichlet fill on disks around the bubble points; the radius grows to
    // cover the region where the family tail has not settled
    for (const auto& pt : points) {
        const DomainChart& c = base.domain->chart(pt.chart);
        const double edge = std::min(c.size - std::abs(pt.p.real()),
                                     c.size - std::abs(pt.p.imag()));
        double r_fill = cfg.fill_radius;
        for (int i = 0; i < c.n; ++i)
            for (int j = 0; j < c.n; ++j) {
                const double d = std::abs(c.point(i, j) - pt.p);
                if (d < 0.8 && gap[pt.chart](i, j) > 0.1)
                    r_fill = std::max(r_fill, 1.25 * d + 3.0 * c.h);
            }
        r_fill = std::min(r_fill, std::max(0.9 * edge, cfg.fill_radius));
        RegionMask fill = euclidean_disk_mask(c, pt.p, r_fill);

        Domain view_dom;
        view_dom.charts = {c};
        MapState view;
        view.domain = std::make_shared<Domain>(view_dom);
        view.target = base.target;
        view.charts = {base.charts[pt.chart]};
        const int n = c.n;
        // ring chart just outside the fill disk
        int ring_chart = -1;
        for (int i = 0; i < n && ring_chart < 0; ++i)
            for (int j = 0; j < n; ++j) {
                const double d = std::abs(c.point(i, j) - pt.p);
                if (d > r_fill && d < r_fill + 4.0 * c.h) {
                    ring_chart = view.charts[0].tchart(i, j);
                    break;
                }
            }
        if (ring_chart < 0) ring_chart = 0;
        // the fill region plus a halo must live in one target chart
        bool tearable = false;
        for (int i = 0; i < n && !tearable; ++i)
            for (int j = 0; j < n; ++j) {
                const double d = std::abs(c.point(i, j) - pt.p);
                if (d > r_fill + 4.0 * c.h) continue;
                TargetPoint q = view.at(0, i, j);
                if (q.chart != ring_chart) {
                    try {
                        view.set(0, i, j, view.target->transition(q, ring_chart));
                    } catch (const Error&) {
                        tearable = true;
                        break;
                    }
                }
            }
        if (tearable) fail("ChartTear", "base fill region not single-chart representable");
        FlowConfig fc = cfg.fill_flow;
        if (fc.max_steps == 0) fc.max_steps = 1500;
        if (fc.tol <= 0.0) fc.tol = 1e-7;
        flow_to_harmonic(view, fc, &fill);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (fill.w(i, j) > 0.0)
                    base.set(pt.chart, i, j, base.target->normalize(view.at(0, i, j)));
    }
    base.normalize_charts();
    return base;
}

MapState renormalize(const MapState& member, int chart, cd x_tilde, double mu,
                     int resample_n) {
    if (mu <= 0.0) fail("EnergyBelowC0", "renormalization scale must be positive");
    const int n = resample_n > 0 ? resample_n : member.n();
    auto dom = std::make_shared<Domain>(Domain::sphere_pair(n));

    if (member.jet) {
        // exact composition: g = f o (x_tilde + mu y), holomorphic inner map
        const MapJetFormula src_jet = member.jet;
        MapJetFormula jet = [src_jet, x_tilde, mu](int ch, cd y) {
            cd s, sprime;
            if (ch == 0) {
                s = x_tilde + mu * y;
                sprime = mu;
            } else {
                if (std::abs(y) < 1e-300) y = cd(1e-300, 0.0);
                s = x_tilde + mu / y;
                sprime = -mu / (y * y);
            }
            MapJetSample js;
            if (std::abs(s) <= 2.0) {
                js = src_jet(0, s);
            } else {
                js = src_jet(1, 1.0 / s);
                sprime *= -1.0 / (s * s);
            }
            for (int f = 0; f < 2; ++f) {
                const cd d = js.d[f], db = js.db[f];
                js.d[f] = d * sprime;
                js.db[f] = db * std::conj(sprime);
            }
            return js;
        };
        MapFormula f = [jet](int ch, cd y) { return jet(ch, y).q; };
        MapState out = MapState::sample(dom, member.target, f, true);
        out.jet = jet;
        return out;
    }

    const bool exact = static_cast<bool>(member.formula);
    const MapState* src = &member;
    const int src_chart = chart;
    MapFormula f = [src, src_chart, x_tilde, mu, exact](int ch, cd y) {
        cd s;
        if (ch == 0) {
            s = x_tilde + mu * y;
        } else {
            // y = 1/w through the south chart
            if (std::abs(y) < 1e-300) y = cd(1e-300, 0.0);
            s = x_tilde + mu / y;
        }
        if (exact) {
            // the closed form of the source's chart-0 coordinate accepts any point;
            // near the source south pole use the source chart-1 expression
            if (std::abs(s) <= 2.0) return src->formula(0, s);
            return src->formula(1, 1.0 / s);
        }
        const DomainChart& sc = src->domain->chart(src_chart);
        if (std::abs(s.real()) <= sc.size && std::abs(s.imag()) <= sc.size)
            return src->interpolate(src_chart, s);
        if (src->domain->sphere) return src->interpolate(1 - src_chart, 1.0 / s);
        fail("ResampleOutOfDomain", "renormalized point leaves the source window");
    };
    MapState out = MapState::sample(dom, member.target, f, exact);
    if (!exact) out.formula = nullptr;
    return out;
}

NeckDiagnostics neck_diagnostics(const MapState& member, int chart, cd x_tilde, double mu,
                                 int rank, double outer, int t_samples) {
    const DomainChart& c = member.domain->chart(chart);
    const double inner = rank * mu;
    if (inner >= 0.95 * outer) fail("AnnulusTooThin", "neck annulus empty");
    if (outer - inner < 8.0 * c.h && std::log(outer / inner) < 0.05)
        fail("AnnulusTooThin", "neck annulus unresolved");
    NeckDiagnostics nd;
    const double T = std::log(outer / inner);

    const Grid2D<double> e = energy_density(member, chart);
    const RegionMask mo = euclidean_disk_mask(c, x_tilde, outer);
    const RegionMask mi = euclidean_disk_mask(c, x_tilde, inner);
    RegionMask ann;
    ann.w = Grid2D<double>(c.n);
    for (size_t t = 0; t < ann.w.v.size(); ++t)
        ann.w.v[t] = std::max(mo.w.v[t] - mi.w.v[t], 0.0);
    nd.energy = integrate(c, e, &ann);

    // loops gamma_{k,t} at radius outer * e^{-t}
    for (int s = 0; s < t_samples; ++s) {
        const double t = T * s / (t_samples - 1);
        const double r = outer * std::exp(-t);
        nd.loop_t.push_back(t);
        nd.loop_len.push_back(loop_length(member, chart, x_tilde, r));
    }
    nd.end_loop_max = std::max(nd.loop_len.front(), nd.loop_len.back());

    // image diameter over a log-polar sample of the annulus
    std::vector<TargetPoint> pts;
    const int nr = 16, nth = 24;
    for (int a = 0; a < nr; ++a) {
        const double r = outer * std::exp(-T * a / (nr - 1));
        for (int b = 0; b < nth; ++b)
            pts.push_back(member.eval(chart, x_tilde + r * std::exp(I * (2.0 * PI * b / nth))));
    }
    for (size_t a = 0; a < pts.size(); ++a)
        for (size_t b = a + 1; b < pts.size(); ++b)
            nd.diameter = std::max(nd.diameter, member.target->chord_distance(pts[a], pts[b]));
    return nd;
}

namespace {

TargetPoint south_pole_value(const MapState& sphere_map) {
    // average the map over a small cap around the south pole (chart 1, w near 0)
    const int ch = 1;
    const DomainChart& c = sphere_map.domain->chart(ch);
    const double cap = 0.12;
    cd z1 = 0.0, z2 = 0.0;
    double wsum = 0.0;
    int anchor = sphere_map.at(ch, c.n / 2, c.n / 2).chart;
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) {
            const cd w = c.point(i, j);
            if (std::abs(w) > cap || !sphere_map.charts[ch].valid(i, j)) continue;
            TargetPoint p = sphere_map.at(ch, i, j);
            if (p.chart != anchor) {
                try {
                    p = sphere_map.target->transition(p, anchor);
                } catch (const Error&) {
                    continue;
                }
            }
            z1 += p.z1;
            z2 += p.z2;
            wsum += 1.0;
        }
    if (wsum == 0.0) fail("EmptyRegion", "no valid samples near the south pole");
    return TargetPoint{z1 / wsum, z2 / wsum, anchor};
}

void build_subtree(BubbleTreeNode& node, const std::vector<MapState>& family,
                   const BubbleConfig& cfg, int depth, int max_depth, bool renorm_level) {
    ConcentrationReport rep;
    try {
        rep = detect_concentration(family, cfg);
    } catch (const Error&) {
        return;
    }
    if (rep.points.empty()) return;
    if (depth >= max_depth) {
        node.depth_cap_hit = true;
        return;
    }
    const double C0 = cfg.c0_value();

    // tail limit with every detected point filled away; on renormalized levels
    // this removes both removable sub-bubble singularities and the spurious
    // south-pole concentration carried in by the finite mass window
    const MapState base = estimate_base_map(family, rep.points, cfg);
    node.map = base;
    node.energy = energy(base).total;

    int child_idx = 0;
    for (const auto& pt : rep.points) {
        // bubble points of renormalized sphere families live away from the south
        // pole (the paper's (D-13)); southern detections are the imported base
        if (renorm_level && !(pt.chart == 0 && std::abs(pt.p) <= 1.0)) continue;
        ++child_idx;
        if (pt.mass < C0) continue;
        BubbleTreeNode child;
        child.index = node.index == "0" ? std::to_string(child_idx)
                                        : node.index + std::to_string(child_idx);
        child.attach_chart = pt.chart;
        child.attach_point = pt.p;
        child.mass_in = pt.mass;

        const DomainChart& c = family[0].domain->chart(pt.chart);
        const Grid2D<double> e_base = energy_density(base, pt.chart);
        // window radius: B_{2w} must fit the chart and respect bubble separation
        const double edge = std::min(c.size - std::abs(pt.p.real()),
                                     c.size - std::abs(pt.p.imag()));
        double window = std::min(cfg.window_radius, 0.49 * edge);
        for (const auto& other : rep.points)
            if (&other != &pt && other.chart == pt.chart)
                window = std::min(window, 0.45 * std::abs(other.p - pt.p));

        std::vector<MapState> renorm_family;
        for (size_t j = 0; j < family.size(); ++j) {
            const int rank = static_cast<int>(j) + 1;
            RenormalizationData rd;
            rd.k_family = j < cfg.k_values.size() ? cfg.k_values[j] : 0.0;
            rd.rank = rank;
            rd.r_window = window;
            try {
                if (family[j].jet) {
                    const WindowMoments wm = window_moments_polar(
                        family[j], pt.chart, pt.p, 2.0 * window, &e_base);
                    if (wm.mass < 1e-12) fail("ZeroEnergyRegion", "no concentrated mass");
                    rd.x_tilde = pt.p + wm.moment / wm.mass;
                    // (D-8) bisection on the concentrated annulus energy
                    const double total = window_moments_polar(family[j], pt.chart,
                                                              rd.x_tilde, 2.0 * window,
                                                              &e_base)
                                             .mass;
                    if (total < C0) fail("EnergyBelowC0", "window below C0");
                    double lo = 0.0, hi = 2.0 * window;
                    if (total - window_moments_polar(family[j], pt.chart, rd.x_tilde, hi,
                                                     &e_base)
                                    .mass >=
                        C0) {
                        rd.mu = hi;
                    } else {
                        for (int it = 0; it < 48; ++it) {
                            const double mid = 0.5 * (lo + hi);
                            const double ann =
                                total - window_moments_polar(family[j], pt.chart,
                                                             rd.x_tilde, mid, &e_base)
                                            .mass;
                            if (ann >= C0) lo = mid;
                            else hi = mid;
                        }
                        rd.mu = lo;
                    }
                } else {
                    const Grid2D<double> e_j = energy_density(family[j], pt.chart);
                    const Grid2D<double> ehat = clamp_subtract(e_j, e_base);
                    rd.x_tilde = center_of_mass(c, ehat, pt.p, 2.0 * window);
                    rd.mu = scale_mu(c, ehat, rd.x_tilde, 2.0 * window, C0);
                }
            } catch (const Error&) {
                continue;  // this member carries no bubble here yet
            }
            rd.neck_outer = std::min(window, cfg.neck_rho0 / rank);
            rd.T = std::log(rd.neck_outer / std::max(rank * rd.mu, 1e-300));
            rd.d7_lhs = std::abs(rd.x_tilde - pt.p);
            rd.d7_rhs = rd.r_window / (4.0 * rank * rank);
            rd.d7_ok = rd.d7_lhs <= rd.d7_rhs;
            rd.d9_lhs = rd.mu;
            rd.d9_rhs = rd.r_window / (rank * rank);
            rd.d9_ok = rd.d9_lhs <= rd.d9_rhs;
            child.renorms.push_back(rd);
            try {
                child.necks.push_back(neck_diagnostics(family[j], pt.chart, rd.x_tilde,
                                                       rd.mu, rank, rd.neck_outer));
            } catch (const Error&) {
                child.necks.push_back(NeckDiagnostics{});
            }
            renorm_family.push_back(
                renormalize(family[j], pt.chart, rd.x_tilde, rd.mu, family[j].n()));
        }
        if (renorm_family.size() < 3) continue;

        child.map = renorm_family.back();
        build_subtree(child, renorm_family, cfg, depth + 1, max_depth, true);
        if (child.children.empty() && child.map.jet) {
            // no further concentration: the bubble map is the tail limit of the
            // renormalized family with its spurious detections filled away
            ConcentrationReport sub;
            try {
                sub = detect_concentration(renorm_family, cfg);
            } catch (const Error&) {
            }
            child.map = estimate_base_map(renorm_family, sub.points, cfg);
        }
        child.energy = energy(child.map).total;
        try {
            child.south_value = south_pole_value(child.map);
            child.has_south = true;
        } catch (const Error&) {
        }
        node.children.push_back(std::move(child));
    }
}

}  // namespace

BubbleTreeNode build_tree(const std::vector<MapState>& family, const BubbleConfig& cfg) {
    BubbleTreeNode root;
    root.index = "0";
    root.map = family.back();
    const double A0 = member_energy_refined(family.back());
    root.mass_in = A0;
    int max_depth = cfg.max_depth;
    if (max_depth <= 0)
        max_depth = static_cast<int>(std::ceil(A0 / cfg.c0_value())) + 1;
    build_subtree(root, family, cfg, 0, max_depth, false);
    if (root.children.empty()) {
        // no bubbles: the root map is the family tail limit
        root.map = estimate_base_map(family, {}, cfg);
        root.energy = energy(root.map).total;
    }
    return root;
}

EnergyIdentityReport energy_identity_check(const BubbleTreeNode& tree,
                                           const std::vector<MapState>& family) {
    EnergyIdentityReport rep;
    std::vector<double> Es;
    for (const auto& m : family) Es.push_back(member_energy_refined(m));
    rep.family_limit = Es.back();
    if (Es.size() >= 2 && std::abs(Es.back() - Es[Es.size() - 2]) > 1e-12) {
        // geometric-tail Richardson (ratio 1/2 families)
        rep.family_limit = Es.back() + (Es.back() - Es[Es.size() - 2]);
    }
    rep.base_energy = tree.energy;
    std::function<void(const BubbleTreeNode&)> walk = [&](const BubbleTreeNode& n) {
        for (const auto& ch : n.children) {
            rep.bubble_sum += ch.energy;
            walk(ch);
        }
    };
    walk(tree);
    rep.abs_err = std::abs(rep.family_limit - rep.base_energy - rep.bubble_sum);
    rep.rel_err = rep.abs_err / std::max(rep.family_limit, 1e-300);
    return rep;
}

double distance_bubbling_check(const BubbleTreeNode& tree) {
    double worst = 0.0;
    std::function<void(const BubbleTreeNode&)> walk = [&](const BubbleTreeNode& n) {
        for (const auto& ch : n.children) {
            if (ch.has_south) {
                const TargetPoint parent_at = n.map.eval(ch.attach_chart, ch.attach_point);
                worst = std::max(worst,
                                 n.map.target->chord_distance(ch.south_value, parent_at));
            }
            walk(ch);
        }
    };
    walk(tree);
    return worst;
}

std::vector<MassAccountRow> mass_accounting(const BubbleTreeNode& tree) {
    std::vector<MassAccountRow> rows;
    std::function<void(const BubbleTreeNode&)> walk = [&](const BubbleTreeNode& n) {
        if (n.index != "0") {
            MassAccountRow row;
            row.index = n.index;
            row.mass_in = n.mass_in;
            row.node_energy = n.energy;
            for (const auto& ch : n.children) row.children_mass += ch.mass_in;
            row.rel_err = std::abs(n.mass_in - n.energy - row.children_mass) /
                          std::max(n.mass_in, 1e-300);
            rows.push_back(row);
        }
        for (const auto& ch : n.children) walk(ch);
    };
    walk(tree);
    return rows;
}

}  // namespace chernlab
