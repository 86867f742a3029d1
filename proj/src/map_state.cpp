#include "chernlab/map_state.hpp"

#include <cmath>

namespace chernlab {

namespace {

// 4-point Lagrange cubic weights at local coordinate t relative to node offsets off[0..3].
void cubic_weights(double t, const int off[4], double w[4]) {
    for (int a = 0; a < 4; ++a) {
        double num = 1.0, den = 1.0;
        for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            num *= (t - off[b]);
            den *= (off[a] - off[b]);
        }
        w[a] = num / den;
    }
}

}  // namespace

MapState MapState::sample(std::shared_ptr<const Domain> dom,
                          std::shared_ptr<const HermitianTarget> tgt,
                          const MapFormula& f, bool keep_formula) {
    MapState m;
    m.domain = std::move(dom);
    m.target = std::move(tgt);
    m.charts.resize(m.domain->num_charts());
    for (int k = 0; k < m.domain->num_charts(); ++k) {
        const DomainChart& c = m.domain->chart(k);
        ChartData& d = m.charts[k];
        d.z1 = GridC(c.n);
        d.z2 = GridC(c.n);
        d.tchart = Grid2D<int16_t>(c.n, 0);
        d.valid = Grid2D<uint8_t>(c.n, 1);
        for (int i = 0; i < c.n; ++i)
            for (int j = 0; j < c.n; ++j) {
                const TargetPoint p = m.target->normalize(f(k, c.point(i, j)));
                d.z1(i, j) = p.z1;
                d.z2(i, j) = p.z2;
                d.tchart(i, j) = static_cast<int16_t>(p.chart);
            }
    }
    if (keep_formula) m.formula = f;
    return m;
}

bool MapState::single_target_chart(int chart) const {
    const auto& t = charts[chart].tchart;
    for (const auto& v : t.v)
        if (v != t.v[0]) return false;
    return true;
}

void MapState::normalize_charts() {
    for (auto& d : charts)
        for (int i = 0; i < d.z1.n; ++i)
            for (int j = 0; j < d.z1.n; ++j) {
                TargetPoint p{d.z1(i, j), d.z2(i, j), d.tchart(i, j)};
                p = target->normalize(p);
                d.z1(i, j) = p.z1;
                d.z2(i, j) = p.z2;
                d.tchart(i, j) = static_cast<int16_t>(p.chart);
            }
}

void MapState::check_finite() const {
    for (const auto& d : charts)
        for (size_t t = 0; t < d.z1.v.size(); ++t) {
            if (!d.valid.v[t]) continue;
            if (!std::isfinite(d.z1.v[t].real()) || !std::isfinite(d.z1.v[t].imag()) ||
                !std::isfinite(d.z2.v[t].real()) || !std::isfinite(d.z2.v[t].imag()))
                fail("NonFinite", "map contains non-finite values");
        }
}

TargetPoint MapState::interpolate(int chart, cd x) const {
    const DomainChart& c = domain->chart(chart);
    const ChartData& d = charts[chart];
    const int n = c.n;
    const double fx = (x.real() - c.x0) / c.h;
    const double fy = (x.imag() - c.y0) / c.h;

    int jf, if_;
    double tx, ty;
    int offj[4], offi[4];
    if (c.periodic()) {
        jf = static_cast<int>(std::floor(fx));
        if_ = static_cast<int>(std::floor(fy));
        tx = fx - jf;
        ty = fy - if_;
        for (int a = 0; a < 4; ++a) { offj[a] = a - 1; offi[a] = a - 1; }
    } else {
        if (fx < -0.5 || fy < -0.5 || fx > n - 0.5 || fy > n - 0.5)
            fail("ResampleOutOfDomain", "interpolation point outside chart");
        jf = std::clamp(static_cast<int>(std::floor(fx)), 1, n - 3);
        if_ = std::clamp(static_cast<int>(std::floor(fy)), 1, n - 3);
        tx = fx - jf;
        ty = fy - if_;
        for (int a = 0; a < 4; ++a) { offj[a] = a - 1; offi[a] = a - 1; }
    }
    double wx[4], wy[4];
    cubic_weights(tx, offj, wx);
    cubic_weights(ty, offi, wy);

    // anchor chart = chart of the nearest node
    auto wrap = [&](int k) { return ((k % n) + n) % n; };
    const int ja = c.periodic() ? wrap(jf + (tx > 0.5 ? 1 : 0))
                                : std::clamp(jf + (tx > 0.5 ? 1 : 0), 0, n - 1);
    const int ia = c.periodic() ? wrap(if_ + (ty > 0.5 ? 1 : 0))
                                : std::clamp(if_ + (ty > 0.5 ? 1 : 0), 0, n - 1);
    const int anchor_chart = d.tchart(ia, ja);

    cd acc1 = 0.0, acc2 = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            int ii = if_ + offi[a], jj = jf + offj[b];
            if (c.periodic()) { ii = wrap(ii); jj = wrap(jj); }
            if (!d.valid(ii, jj)) fail("ResampleOutOfDomain", "interpolation patch invalid");
            TargetPoint p = at(chart, ii, jj);
            if (p.chart != anchor_chart) p = target->transition(p, anchor_chart);
            acc1 += wy[a] * wx[b] * p.z1;
            acc2 += wy[a] * wx[b] * p.z2;
        }
    return TargetPoint{acc1, acc2, anchor_chart};
}

TargetPoint MapState::eval(int chart, cd x) const {
    if (formula) return target->normalize(formula(chart, x));
    return interpolate(chart, x);
}

namespace {

struct Row {
    int first;
    double w[5];
};

Row stencil_row(int idx, int n, bool periodic) {
    // 4th-order 5-point first-derivative row (unit spacing), one-sided at edges
    static const double c5[5] = {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
    Row r;
    if (periodic || (idx >= 2 && idx <= n - 3)) {
        r.first = -2;
        for (int k = 0; k < 5; ++k) r.w[k] = c5[k];
        return r;
    }
    // biased rows: offsets first..first+4 relative to idx
    const int first = (idx < 2) ? -idx : (n - 5 - idx);
    r.first = first;
    // Fornberg weights for nodes first..first+4 at 0 (hard-coded by symmetry)
    auto set = [&](std::initializer_list<double> l) {
        int k = 0;
        for (double x : l) r.w[k++] = x;
    };
    switch (first) {
        case 0: set({-25.0 / 12, 4.0, -3.0, 4.0 / 3, -1.0 / 4}); break;
        case -1: set({-1.0 / 4, -5.0 / 6, 3.0 / 2, -1.0 / 2, 1.0 / 12}); break;
        case -3: set({-1.0 / 12, 1.0 / 2, -3.0 / 2, 5.0 / 6, 1.0 / 4}); break;
        case -4: set({1.0 / 4, -4.0 / 3, 3.0, -4.0, 25.0 / 12}); break;
        default: set({1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12}); break;
    }
    return r;
}

}  // namespace

MapDerivs map_derivatives(const MapState& m, int chart) {
    const DomainChart& c = m.domain->chart(chart);
    const MapState::ChartData& d = m.charts[chart];
    const int n = c.n;
    MapDerivs out;
    out.d = Vec2Field(n);
    out.db = Vec2Field(n);

    if (m.jet) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const MapJetSample js = m.jet(chart, c.point(i, j));
                const int sp = d.tchart(i, j);
                const auto J = m.target->transition_jacobian(js.q, sp);
                for (int f = 0; f < 2; ++f) {
                    out.d[f](i, j) = J[f] * js.d[f];
                    out.db[f](i, j) = J[f] * js.db[f];
                }
            }
        return out;
    }

    if (m.single_target_chart(chart)) {
        const DPair d1 = d_complex(c, d.z1);
        const DPair d2 = d_complex(c, d.z2);
        out.d[0] = d1.d; out.db[0] = d1.db;
        out.d[1] = d2.d; out.db[1] = d2.db;
        return out;
    }

    const double invh = 1.0 / c.h;
    auto wrap = [&](int k) { return ((k % n) + n) % n; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int center_chart = d.tchart(i, j);
            cd dx[2] = {0.0, 0.0}, dy[2] = {0.0, 0.0};
            for (int axis = 0; axis < 2; ++axis) {
                const int idx = axis == 0 ? j : i;
                const Row row = stencil_row(idx, n, c.periodic());
                for (int k = 0; k < 5; ++k) {
                    int ii = i, jj = j;
                    const int off = row.first + k;
                    if (axis == 0) jj = c.periodic() ? wrap(j + off) : j + off;
                    else ii = c.periodic() ? wrap(i + off) : i + off;
                    TargetPoint p = m.at(chart, ii, jj);
                    if (p.chart != center_chart) {
                        if (m.target->id() == TargetId::FSProduct) {
                            // guard against differentiating across a chart pole
                            for (int f = 0; f < 2; ++f)
                                if ((((p.chart ^ center_chart) >> f) & 1) &&
                                    std::abs(p[f]) < 1e-8)
                                    fail("ChartTear",
                                         "neighbor outside declared chart overlap");
                        }
                        p = m.target->transition(p, center_chart);
                    }
                    for (int f = 0; f < 2; ++f) {
                        if (axis == 0) dx[f] += row.w[k] * p[f];
                        else dy[f] += row.w[k] * p[f];
                    }
                }
            }
            for (int f = 0; f < 2; ++f) {
                out.d[f](i, j) = 0.5 * (dx[f] - I * dy[f]) * invh;
                out.db[f](i, j) = 0.5 * (dx[f] + I * dy[f]) * invh;
            }
        }
    return out;
}

Vec2Field map_mixed_derivative(const MapState& m, int chart, const MapDerivs& md) {
    const DomainChart& c = m.domain->chart(chart);
    const MapState::ChartData& dta = m.charts[chart];
    const int n = c.n;
    Vec2Field out(n);

    if (m.jet) {
        // exact first derivatives; one micro-stencil level for the mixed part
        const double del = c.h / 8.0;
        static const double w5[5] = {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const cd x = c.point(i, j);
                const int sp = dta.tchart(i, j);
                cd gx[2] = {0.0, 0.0}, gy[2] = {0.0, 0.0};
                for (int k = -2; k <= 2; ++k) {
                    if (k == 0) continue;
                    const MapJetSample a = m.jet(chart, x + del * static_cast<double>(k));
                    const MapJetSample b = m.jet(chart, x + del * static_cast<double>(k) * I);
                    const auto Ja = m.target->transition_jacobian(a.q, sp);
                    const auto Jb = m.target->transition_jacobian(b.q, sp);
                    for (int f = 0; f < 2; ++f) {
                        gx[f] += w5[k + 2] * Ja[f] * a.db[f];
                        gy[f] += w5[k + 2] * Jb[f] * b.db[f];
                    }
                }
                for (int f = 0; f < 2; ++f)
                    out[f](i, j) = 0.5 * (gx[f] - I * gy[f]) / del;
            }
        return out;
    }
    (void)md;

    if (m.single_target_chart(chart)) {
        out[0] = ddbar(c, dta.z1);
        out[1] = ddbar(c, dta.z2);
        return out;
    }

    // chartwise: second-derivative stencils on values transitioned to the
    // center chart; d dbar = (d_xx + d_yy)/4 of the local representation
    static const double c5[5] = {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12};
    // one-sided 6-node rows for bounded-chart edges, index 0..3 => offset idx 0..1, n-2..n-1
    static const double e0[6] = {45.0 / 12, -154.0 / 12, 214.0 / 12, -156.0 / 12,
                                 61.0 / 12, -10.0 / 12};
    static const double e1[6] = {10.0 / 12, -15.0 / 12, -4.0 / 12, 14.0 / 12,
                                 -6.0 / 12, 1.0 / 12};
    const double invh2 = 1.0 / (c.h * c.h);
    auto wrap = [&](int k) { return ((k % n) + n) % n; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int center_chart = dta.tchart(i, j);
            cd acc[2] = {0.0, 0.0};
            for (int axis = 0; axis < 2; ++axis) {
                const int idx = axis == 0 ? j : i;
                const double* w = c5;
                int first = -2, len = 5;
                bool reversed = false;
                if (!c.periodic()) {
                    if (idx == 0) { w = e0; first = 0; len = 6; }
                    else if (idx == 1) { w = e1; first = -1; len = 6; }
                    else if (idx == n - 2) { w = e1; first = 1; len = 6; reversed = true; }
                    else if (idx == n - 1) { w = e0; first = 0; len = 6; reversed = true; }
                }
                for (int k = 0; k < len; ++k) {
                    const int off = reversed ? -(first + k) : first + k;
                    int ii = i, jj = j;
                    if (axis == 0) jj = c.periodic() ? wrap(j + off) : j + off;
                    else ii = c.periodic() ? wrap(i + off) : i + off;
                    TargetPoint p = m.at(chart, ii, jj);
                    if (p.chart != center_chart) p = m.target->transition(p, center_chart);
                    acc[0] += w[k] * p.z1;
                    acc[1] += w[k] * p.z2;
                }
            }
            for (int f = 0; f < 2; ++f) out[f](i, j) = 0.25 * acc[f] * invh2;
        }
    return out;
}


MapDerivs field_derivatives_framed(const MapState& m, int chart, const Vec2Field& v) {
    const DomainChart& c = m.domain->chart(chart);
    const MapState::ChartData& d = m.charts[chart];
    const int n = c.n;
    MapDerivs out;
    out.d = Vec2Field(n);
    out.db = Vec2Field(n);

    if (m.single_target_chart(chart)) {
        for (int f = 0; f < 2; ++f) {
            const DPair df = d_complex(c, v[f]);
            out.d[f] = df.d;
            out.db[f] = df.db;
        }
        return out;
    }

    const double invh = 1.0 / c.h;
    auto wrap = [&](int k) { return ((k % n) + n) % n; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int center_chart = d.tchart(i, j);
            cd dx[2] = {0.0, 0.0}, dy[2] = {0.0, 0.0};
            for (int axis = 0; axis < 2; ++axis) {
                const int idx = axis == 0 ? j : i;
                const Row row = stencil_row(idx, n, c.periodic());
                for (int k = 0; k < 5; ++k) {
                    int ii = i, jj = j;
                    const int off = row.first + k;
                    if (axis == 0) jj = c.periodic() ? wrap(j + off) : j + off;
                    else ii = c.periodic() ? wrap(i + off) : i + off;
                    std::array<cd, 2> val = {v[0](ii, jj), v[1](ii, jj)};
                    const TargetPoint q = m.at(chart, ii, jj);
                    if (q.chart != center_chart)
                        val = m.target->rotate_frame_vector(q, center_chart, val);
                    for (int f = 0; f < 2; ++f) {
                        if (axis == 0) dx[f] += row.w[k] * val[f];
                        else dy[f] += row.w[k] * val[f];
                    }
                }
            }
            for (int f = 0; f < 2; ++f) {
                out.d[f](i, j) = 0.5 * (dx[f] - I * dy[f]) * invh;
                out.db[f](i, j) = 0.5 * (dx[f] + I * dy[f]) * invh;
            }
        }
    return out;
}

}  // namespace chernlab
