#include "chernlab/domain.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace chernlab {

namespace {

// ---------------------------------------------------------------- stencils

/// Fornberg weights for the m-th derivative at x0 over the given nodes.
std::vector<double> fornberg(double x0, const std::vector<double>& nodes, int m) {
    const int nd = static_cast<int>(nodes.size());
    std::vector<std::vector<std::vector<double>>> d(
        m + 1, std::vector<std::vector<double>>(nd, std::vector<double>(nd, 0.0)));
    d[0][0][0] = 1.0;
    double c1 = 1.0;
    for (int i = 1; i < nd; ++i) {
        double c2 = 1.0;
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            for (int k = 0; k <= std::min(i, m); ++k) {
                d[k][i][j] = ((nodes[i] - x0) * d[k][i - 1][j] -
                              (k ? k * d[k - 1][i - 1][j] : 0.0)) / c3;
            }
        }
        for (int k = 0; k <= std::min(i, m); ++k) {
            d[k][i][i] = c1 / c2 *
                         ((k ? k * d[k - 1][i - 1][i - 1] : 0.0) -
                          (nodes[i - 1] - x0) * d[k][i - 1][i - 1]);
        }
        c1 = c2;
    }
    std::vector<double> w(nd);
    for (int j = 0; j < nd; ++j) w[j] = d[m][nd - 1][j];
    return w;
}

struct StencilRow {
    int first;                 // offset of first node relative to the row index
    std::vector<double> w;
};

/// 4th-order first-derivative rows for an n-point non-periodic line, unit spacing.
std::vector<StencilRow> line_rows(int n) {
    std::vector<StencilRow> rows(n);
    for (int i = 0; i < n; ++i) {
        int first = std::clamp(i - 2, 0, n - 5);
        rows[i].first = first - i;
        std::vector<double> nd;
        for (int k = 0; k < 5; ++k) nd.push_back(first + k - i);
        rows[i].w = fornberg(0.0, nd, 1);
    }
    return rows;
}

const std::vector<double>& central5() {
    static const std::vector<double> w = fornberg(0.0, {-2, -1, 0, 1, 2}, 1);
    return w;
}

/// 4th-order second-derivative rows: central 5-node interior, 6-node one-sided
/// closures (order 4 = nodes - derivative order).
std::vector<StencilRow> line_rows_d2(int n) {
    std::vector<StencilRow> rows(n);
    for (int i = 0; i < n; ++i) {
        if (i >= 2 && i <= n - 3) {
            rows[i].first = -2;
            rows[i].w = fornberg(0.0, {-2, -1, 0, 1, 2}, 2);
        } else {
            const int first = std::clamp(i - 2, 0, n - 6);
            rows[i].first = first - i;
            std::vector<double> nd;
            for (int k = 0; k < 6; ++k) nd.push_back(first + k - i);
            rows[i].w = fornberg(0.0, nd, 2);
        }
    }
    return rows;
}

// ---------------------------------------------------------------- FFT cache

struct FftPlans {
    fftw_plan fwd = nullptr, bwd = nullptr;
    std::vector<cd> buf_in, buf_out;
    int n = 0;
    ~FftPlans() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

FftPlans& plans_for(int n) {
    static std::map<int, std::unique_ptr<FftPlans>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lk(mu);
    auto& p = cache[n];
    if (!p) {
        p = std::make_unique<FftPlans>();
        p->n = n;
        p->buf_in.resize(static_cast<size_t>(n) * n);
        p->buf_out.resize(static_cast<size_t>(n) * n);
        auto* in = reinterpret_cast<fftw_complex*>(p->buf_in.data());
        auto* out = reinterpret_cast<fftw_complex*>(p->buf_out.data());
        p->fwd = fftw_plan_dft_2d(n, n, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
        p->bwd = fftw_plan_dft_2d(n, n, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    return *p;
}

void spectral_derivatives(const DomainChart& c, const GridC& f, GridC& dx, GridC& dy) {
    const int n = c.n;
    auto& pl = plans_for(n);
    std::copy(f.v.begin(), f.v.end(), pl.buf_in.begin());
    fftw_execute_dft(pl.fwd, reinterpret_cast<fftw_complex*>(pl.buf_in.data()),
                     reinterpret_cast<fftw_complex*>(pl.buf_out.data()));
    std::vector<cd> fhat = pl.buf_out;

    const double L = c.size;
    auto freq = [&](int k) {
        int kk = (k <= n / 2) ? k : k - n;
        if (2 * k == n) kk = 0;  // drop Nyquist in first derivatives
        return 2.0 * PI * kk / L;
    };
    const double inv = 1.0 / (static_cast<double>(n) * n);

    // d/dx: multiply by i*kx (column index), d/dy: by i*ky (row index)
    for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double k = pass == 0 ? freq(j) : freq(i);
                pl.buf_in[static_cast<size_t>(i) * n + j] =
                    I * k * fhat[static_cast<size_t>(i) * n + j];
            }
        fftw_execute_dft(pl.bwd, reinterpret_cast<fftw_complex*>(pl.buf_in.data()),
                         reinterpret_cast<fftw_complex*>(pl.buf_out.data()));
        GridC& out = pass == 0 ? dx : dy;
        out = GridC(n);
        for (size_t t = 0; t < out.v.size(); ++t) out.v[t] = pl.buf_out[t] * inv;
    }
}

void stencil_axis(const DomainChart& c, const GridC& f, int axis, GridC& out) {
    const int n = c.n;
    out = GridC(n);
    const double invh = 1.0 / c.h;
    if (c.periodic()) {
        const auto& w = central5();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cd acc = 0.0;
                for (int k = -2; k <= 2; ++k) {
                    int ii = i, jj = j;
                    if (axis == 0) jj = (j + k + n) % n;
                    else ii = (i + k + n) % n;
                    acc += w[k + 2] * f(ii, jj);
                }
                out(i, j) = acc * invh;
            }
        return;
    }
    static std::map<int, std::vector<StencilRow>> row_cache;
    static std::mutex mu;
    const std::vector<StencilRow>* rows;
    {
        std::lock_guard<std::mutex> lk(mu);
        auto& r = row_cache[n];
        if (r.empty()) r = line_rows(n);
        rows = &r;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int idx = axis == 0 ? j : i;
            const StencilRow& row = (*rows)[idx];
            cd acc = 0.0;
            for (size_t k = 0; k < row.w.size(); ++k) {
                const int off = row.first + static_cast<int>(k);
                acc += row.w[k] * (axis == 0 ? f(i, idx + off) : f(idx + off, j));
            }
            out(i, j) = acc * invh;
        }
}

double smoothstep_inf(double t) {
    // C^inf step: 0 for t<=0, 1 for t>=1, symmetric S(t)+S(1-t)=1.
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

/// Coverage of the unit cell [-1/2,1/2]^2 by the half-plane {x*nx + y*ny + d <= 0}.
double halfplane_cell_coverage(double d, double nx, double ny) {
    nx = std::abs(nx); ny = std::abs(ny);
    if (nx < ny) std::swap(nx, ny);
    const double nrm = std::hypot(nx, ny);
    if (nrm < 1e-30) return d <= 0.0 ? 1.0 : 0.0;
    nx /= nrm; ny /= nrm;
    const double t = -d / nrm;  // signed distance of cell center to the line, >0 inside
    // corners project to +-(nx+ny)/2
    const double c1 = 0.5 * (nx + ny), c2 = 0.5 * (nx - ny);
    if (t <= -c1) return 0.0;
    if (t >= c1) return 1.0;
    if (ny < 1e-14) return std::clamp(t / nx + 0.5, 0.0, 1.0);
    auto tri = [&](double s) {  // area cut beyond distance s toward the corner
        const double u = c1 - s;
        return u * u / (2.0 * nx * ny);
    };
    if (t < -c2) return tri(-t);
    if (t <= c2) return 0.5 + t / nx;
    return 1.0 - tri(t);
}

}  // namespace

// ---------------------------------------------------------------- charts

DomainChart DomainChart::torus(int n, double size, DiffScheme s) {
    if (n < 8) fail("ResolutionTooSmall", "need n >= 8");
    DomainChart c;
    c.kind = ChartKind::Torus;
    c.lam = LambdaKind::Flat;
    c.scheme = s;
    c.n = n;
    c.size = size;
    c.h = size / n;
    return c;
}

DomainChart DomainChart::disk(int n, double half_side, LambdaKind lam) {
    if (n < 8) fail("ResolutionTooSmall", "need n >= 8");
    DomainChart c;
    c.kind = ChartKind::Disk;
    c.lam = lam;
    c.scheme = DiffScheme::Stencil4;
    c.n = n;
    c.size = half_side;
    c.x0 = -half_side;
    c.y0 = -half_side;
    c.h = 2.0 * half_side / (n - 1);
    if (lam == LambdaKind::Hyperbolic && half_side * std::sqrt(2.0) >= 1.0)
        fail("OutOfChart", "hyperbolic disk chart requires |x| < 1");
    return c;
}

DomainChart DomainChart::sphere_chart(int n) {
    DomainChart c = disk(n, 2.0, LambdaKind::Sphere);
    c.kind = ChartKind::Sphere;
    return c;
}

double DomainChart::lambda(cd x) const {
    switch (lam) {
        case LambdaKind::Flat: return 1.0;
        case LambdaKind::Sphere: return 2.0 / (1.0 + std::norm(x));
        case LambdaKind::Hyperbolic: return 2.0 / (1.0 - std::norm(x));
    }
    return 1.0;
}

cd DomainChart::dlog_lambda(cd x) const {
    switch (lam) {
        case LambdaKind::Flat: return 0.0;
        case LambdaKind::Sphere: return -std::conj(x) / (1.0 + std::norm(x));
        case LambdaKind::Hyperbolic: return std::conj(x) / (1.0 - std::norm(x));
    }
    return 0.0;
}

double DomainChart::gauss_K(cd x) const {
    (void)x;
    switch (lam) {
        case LambdaKind::Flat: return 0.0;
        case LambdaKind::Sphere: return 1.0;
        case LambdaKind::Hyperbolic: return -1.0;
    }
    return 0.0;
}

Grid2D<double> DomainChart::lambda_field() const {
    Grid2D<double> g(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = lambda(point(i, j));
    return g;
}

Grid2D<double> DomainChart::gauss_curvature_field() const {
    GridC loglam(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) loglam(i, j) = std::log(lambda(point(i, j)));
    const DPair d = d_complex(*this, loglam);
    const DPair dd = d_complex(*this, d.d);
    Grid2D<double> K(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double l2 = sqr(lambda(point(i, j)));
            K(i, j) = -4.0 / l2 * dd.db(i, j).real();
        }
    return K;
}

// ---------------------------------------------------------------- derivatives

GridC d_axis(const DomainChart& c, const GridC& f, int axis) {
    GridC out;
    if (c.scheme == DiffScheme::Spectral && c.periodic()) {
        GridC dx, dy;
        spectral_derivatives(c, f, dx, dy);
        return axis == 0 ? dx : dy;
    }
    stencil_axis(c, f, axis, out);
    return out;
}

GridC ddbar(const DomainChart& c, const GridC& f) {
    const int n = c.n;
    GridC out(n);
    if (c.scheme == DiffScheme::Spectral && c.periodic()) {
        auto& pl = plans_for(n);
        std::copy(f.v.begin(), f.v.end(), pl.buf_in.begin());
        fftw_execute_dft(pl.fwd, reinterpret_cast<fftw_complex*>(pl.buf_in.data()),
                         reinterpret_cast<fftw_complex*>(pl.buf_out.data()));
        const double L = c.size;
        auto freq2 = [&](int k) {
            const int kk = (k <= n / 2) ? k : k - n;  // Nyquist kept for -k^2
            return sqr(2.0 * PI * kk / L);
        };
        const double inv = 1.0 / (static_cast<double>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                pl.buf_in[static_cast<size_t>(i) * n + j] =
                    -0.25 * (freq2(i) + freq2(j)) *
                    pl.buf_out[static_cast<size_t>(i) * n + j];
        fftw_execute_dft(pl.bwd, reinterpret_cast<fftw_complex*>(pl.buf_in.data()),
                         reinterpret_cast<fftw_complex*>(pl.buf_out.data()));
        for (size_t t = 0; t < out.v.size(); ++t) out.v[t] = pl.buf_out[t] * inv;
        return out;
    }
    static std::map<int, std::vector<StencilRow>> cache;
    static std::mutex mu;
    const std::vector<StencilRow>* rows;
    {
        std::lock_guard<std::mutex> lk(mu);
        auto& r = cache[n];
        if (r.empty()) r = line_rows_d2(n);
        rows = &r;
    }
    const double invh2 = 1.0 / (c.h * c.h);
    static const std::vector<double> c5 = fornberg(0.0, {-2, -1, 0, 1, 2}, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cd acc = 0.0;
            for (int axis = 0; axis < 2; ++axis) {
                const int idx = axis == 0 ? j : i;
                if (c.periodic()) {
                    for (int k = -2; k <= 2; ++k) {
                        const int w = ((idx + k) % n + n) % n;
                        acc += c5[k + 2] * (axis == 0 ? f(i, w) : f(w, j));
                    }
                } else {
                    const StencilRow& row = (*rows)[idx];
                    for (size_t k = 0; k < row.w.size(); ++k) {
                        const int off = idx + row.first + static_cast<int>(k);
                        acc += row.w[k] * (axis == 0 ? f(i, off) : f(off, j));
                    }
                }
            }
            out(i, j) = 0.25 * acc * invh2;
        }
    return out;
}

DPair d_complex(const DomainChart& c, const GridC& f) {
    if (c.n < 8) fail("ResolutionTooSmall", "need n >= 8");
    GridC dx, dy;
    if (c.scheme == DiffScheme::Spectral && c.periodic()) {
        spectral_derivatives(c, f, dx, dy);
    } else {
        stencil_axis(c, f, 0, dx);
        stencil_axis(c, f, 1, dy);
    }
    DPair out;
    out.d = GridC(c.n);
    out.db = GridC(c.n);
    for (size_t t = 0; t < f.v.size(); ++t) {
        out.d.v[t] = 0.5 * (dx.v[t] - I * dy.v[t]);
        out.db.v[t] = 0.5 * (dx.v[t] + I * dy.v[t]);
    }
    return out;
}

// ---------------------------------------------------------------- masks

RegionMask full_mask(const DomainChart& c) {
    RegionMask m;
    m.w = Grid2D<double>(c.n, 1.0);
    if (!c.periodic()) {
        // trapezoid closure on bounded charts
        for (int i = 0; i < c.n; ++i)
            for (int j = 0; j < c.n; ++j) {
                double w = 1.0;
                if (i == 0 || i == c.n - 1) w *= 0.5;
                if (j == 0 || j == c.n - 1) w *= 0.5;
                m.w(i, j) = w;
            }
    }
    return m;
}

RegionMask mask_from_level(const DomainChart& c, const Grid2D<double>& g,
                           const Grid2D<double>& grad_norm) {
    RegionMask m;
    m.w = Grid2D<double>(c.n, 0.0);
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) {
            const double gn = std::max(grad_norm(i, j), 1e-14);
            const double d = g(i, j) / (gn * c.h);  // in cell units
            if (d <= -1.0) { m.w(i, j) = 1.0; continue; }
            if (d >= 1.0) { m.w(i, j) = 0.0; continue; }
            // local normal from one-sided differences
            double nx = 0.0, ny = 0.0;
            if (j + 1 < c.n && j > 0) nx = (g(i, j + 1) - g(i, j - 1)) * 0.5;
            if (i + 1 < c.n && i > 0) ny = (g(i + 1, j) - g(i - 1, j)) * 0.5;
            const double nn = std::hypot(nx, ny);
            if (nn < 1e-14) { nx = 1.0; ny = 0.0; }
            else { nx /= nn; ny /= nn; }
            m.w(i, j) = halfplane_cell_coverage(d, nx, ny);
        }
    return m;
}

ChartCircle geodesic_circle(const DomainChart& c, cd center, double r) {
    if (r <= 0.0) fail("RadiusTooLarge", "radius must be positive");
    switch (c.lam) {
        case LambdaKind::Flat: {
            if (r > 4.0 * c.size) fail("RadiusTooLarge", "disk exceeds chart");
            return {center, r};
        }
        case LambdaKind::Sphere: {
            if (r >= PI) fail("RadiusTooLarge", "radius beyond sphere diameter");
            const double t = std::tan(0.5 * r);
            // Moebius image of |y| = t under y -> (y + c)/(1 - conj(c) y)
            const double a2 = std::norm(center), t2 = t * t;
            const double den = 1.0 - t2 * a2;
            if (std::abs(den) < 1e-12) fail("RadiusTooLarge", "disk touches chart pole");
            const cd cc = center * (1.0 + t2) / den;
            const double rr = t * (1.0 + a2) / std::abs(den);
            return {cc, rr};
        }
        case LambdaKind::Hyperbolic: {
            // isometry y -> (y + c)/(1 + conj(c) y): image of |y| = tanh(r/2)
            const double t = std::tanh(0.5 * r);
            const double a2 = std::norm(center), t2 = t * t;
            const double d2 = 1.0 - t2 * a2;
            if (d2 <= 0.0) fail("RadiusTooLarge", "disk leaves the hyperbolic chart");
            const cd cc = center * (1.0 - t2) / d2;
            const double rr = t * (1.0 - a2) / d2;
            if (rr <= 0.0) fail("RadiusTooLarge", "numerically degenerate disk");
            return {cc, rr};
        }
    }
    fail("RadiusTooLarge", "unreachable");
}

RegionMask euclidean_disk_mask(const DomainChart& c, cd center, double r) {
    if (r <= 0.0) fail("RadiusTooLarge", "radius must be positive");
    if (!c.periodic()) {
        const double margin = 1e-9;
        if (std::abs(center.real()) + r > c.size + c.h + margin ||
            std::abs(center.imag()) + r > c.size + c.h + margin)
            fail("RadiusTooLarge", "coordinate disk exceeds chart");
    } else if (2.0 * r >= c.size) {
        fail("RadiusTooLarge", "coordinate disk exceeds torus chart");
    }
    Grid2D<double> g(c.n), gn(c.n, 1.0);
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) {
            cd x = c.point(i, j);
            if (c.periodic()) {
                double dx = x.real() - center.real(), dy = x.imag() - center.imag();
                dx -= c.size * std::round(dx / c.size);
                dy -= c.size * std::round(dy / c.size);
                g(i, j) = std::hypot(dx, dy) - r;
            } else {
                g(i, j) = std::abs(x - center) - r;
            }
        }
    return mask_from_level(c, g, gn);
}

RegionMask geodesic_disk_mask(const DomainChart& c, cd center, double r) {
    const ChartCircle circ = geodesic_circle(c, center, r);
    // require the disk to fit inside the chart square (allow touching the edge)
    const double margin = 1e-9;
    if (!c.periodic()) {
        if (std::abs(circ.center.real()) + circ.radius > c.size + c.h + margin ||
            std::abs(circ.center.imag()) + circ.radius > c.size + c.h + margin)
            fail("RadiusTooLarge", "geodesic disk exceeds chart");
    } else if (2.0 * circ.radius >= c.size) {
        fail("RadiusTooLarge", "geodesic disk exceeds torus chart");
    }
    Grid2D<double> g(c.n), gn(c.n, 1.0);
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) {
            cd x = c.point(i, j);
            if (c.periodic()) {
                // nearest periodic representative
                double dx = x.real() - circ.center.real();
                double dy = x.imag() - circ.center.imag();
                dx -= c.size * std::round(dx / c.size);
                dy -= c.size * std::round(dy / c.size);
                g(i, j) = std::hypot(dx, dy) - circ.radius;
            } else {
                g(i, j) = std::abs(x - circ.center) - circ.radius;
            }
        }
    return mask_from_level(c, g, gn);
}

double integrate(const DomainChart& c, const Grid2D<double>& field, const RegionMask* mask) {
    if (field.n != c.n) fail("ShapeMismatch", "field resolution differs from chart");
    RegionMask def;
    if (!mask) {
        def = full_mask(c);
        mask = &def;
    }
    double s = 0.0, wtot = 0.0;
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) {
            const double w = mask->w(i, j);
            if (w == 0.0) continue;
            const double l2 = sqr(c.lambda(c.point(i, j)));
            s += w * field(i, j) * l2;
            wtot += w;
        }
    if (wtot == 0.0) fail("EmptyRegion", "mask has zero weight");
    return s * c.h * c.h;
}

double chart_area(const DomainChart& c, const RegionMask* mask) {
    Grid2D<double> one(c.n, 1.0);
    return integrate(c, one, mask);
}

// ---------------------------------------------------------------- domain

Domain Domain::torus(int n, double size, DiffScheme s) {
    Domain d;
    d.charts = {DomainChart::torus(n, size, s)};
    return d;
}

Domain Domain::disk(int n, double half_side, LambdaKind lam) {
    Domain d;
    d.charts = {DomainChart::disk(n, half_side, lam)};
    return d;
}

Domain Domain::sphere_pair(int n) {
    Domain d;
    d.charts = {DomainChart::sphere_chart(n), DomainChart::sphere_chart(n)};
    d.sphere = true;
    return d;
}

cd sphere_transition(cd x) {
    if (std::abs(x) < 1e-300) fail("NotInOverlap", "chart pole");
    return 1.0 / x;
}

double Domain::partition_weight(int k, cd x) const {
    (void)k;  // same profile in each chart's own coordinates (log-symmetric)
    if (!sphere) return 1.0;
    const double u = std::log2(std::max(std::abs(x), 1e-300));
    return 1.0 - smoothstep_inf(0.5 * (u + 1.0));  // 1 for |x|<=1/2, 0 for |x|>=2
}

Grid2D<double> Domain::partition_field(int k) const {
    const DomainChart& c = charts[k];
    Grid2D<double> w(c.n, 1.0);
    if (!sphere) return w;
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) w(i, j) = partition_weight(k, c.point(i, j));
    return w;
}

double Domain::integrate_total(const std::vector<Grid2D<double>>& per_chart) const {
    double s = 0.0;
    for (int k = 0; k < num_charts(); ++k) {
        const DomainChart& c = charts[k];
        const Grid2D<double> chi = partition_field(k);
        Grid2D<double> weighted(c.n);
        for (size_t t = 0; t < weighted.v.size(); ++t)
            weighted.v[t] = per_chart[k].v[t] * chi.v[t];
        RegionMask full;
        full.w = Grid2D<double>(c.n, 1.0);  // chi vanishes before the edge; plain weights
        s += integrate(c, weighted, &full);
    }
    return s;
}

}  // namespace chernlab
