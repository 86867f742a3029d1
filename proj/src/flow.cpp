#include "chernlab/flow.hpp"

#include <fftw3.h>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <random>

namespace chernlab {

namespace {

/// Solves (I - dt*kappa*Lap5) delta = rhs on one chart, Dirichlet outside `free`.
class ImplicitSolver {
public:
    ImplicitSolver(const DomainChart& c, double dt_kappa, const Grid2D<uint8_t>& free)
        : c_(c), free_(free) {
        bool all_free = true;
        for (const auto& f : free_.v) all_free &= (f != 0);
        fft_ = c.periodic() && all_free;
        if (fft_) build_symbol(dt_kappa);
        else build_lu(dt_kappa);
    }

    GridC solve(const GridC& rhs) { return fft_ ? solve_fft(rhs) : solve_lu(rhs); }

private:
    const DomainChart& c_;
    Grid2D<uint8_t> free_;
    bool fft_ = false;
    std::vector<double> symbol_;
    Eigen::SparseMatrix<double> A_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;

    void build_symbol(double dtk) {
        const int n = c_.n;
        symbol_.resize(static_cast<size_t>(n) * n);
        const double h2 = c_.h * c_.h;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double sy = sqr(std::sin(PI * i / n));
                const double sx = sqr(std::sin(PI * j / n));
                const double lam5 = -4.0 / h2 * (sx + sy);  // 5-point symbol
                symbol_[static_cast<size_t>(i) * n + j] = 1.0 - dtk * lam5;
            }
    }

    GridC solve_fft(const GridC& rhs) {
        const int n = c_.n;
        static thread_local std::vector<cd> buf1, buf2;
        buf1.assign(rhs.v.begin(), rhs.v.end());
        buf2.resize(buf1.size());
        fftw_plan p1 = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(buf1.data()),
                                        reinterpret_cast<fftw_complex*>(buf2.data()),
                                        FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_execute(p1);
        fftw_destroy_plan(p1);
        for (size_t t = 0; t < buf2.size(); ++t) buf2[t] /= symbol_[t];
        fftw_plan p2 = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(buf2.data()),
                                        reinterpret_cast<fftw_complex*>(buf1.data()),
                                        FFTW_BACKWARD, FFTW_ESTIMATE);
        fftw_execute(p2);
        fftw_destroy_plan(p2);
        GridC out(n);
        const double inv = 1.0 / (static_cast<double>(n) * n);
        for (size_t t = 0; t < out.v.size(); ++t) out.v[t] = buf1[t] * inv;
        return out;
    }

    void build_lu(double dtk) {
        const int n = c_.n;
        const double s = dtk / (c_.h * c_.h);
        std::vector<Eigen::Triplet<double>> trip;
        auto id = [&](int i, int j) {
            if (c_.periodic()) {
                i = (i + n) % n;
                j = (j + n) % n;
            }
            return i * n + j;
        };
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (!free_(i, j)) {
                    trip.emplace_back(id(i, j), id(i, j), 1.0);
                    continue;
                }
                trip.emplace_back(id(i, j), id(i, j), 1.0 + 4.0 * s);
                trip.emplace_back(id(i, j), id(i - 1, j), -s);
                trip.emplace_back(id(i, j), id(i + 1, j), -s);
                trip.emplace_back(id(i, j), id(i, j - 1), -s);
                trip.emplace_back(id(i, j), id(i, j + 1), -s);
            }
        A_.resize(n * n, n * n);
        A_.setFromTriplets(trip.begin(), trip.end());
        lu_.compute(A_);
        if (lu_.info() != Eigen::Success) fail("SolverError", "sparse LU factorization failed");
    }

    GridC solve_lu(const GridC& rhs) {
        const int n = c_.n;
        Eigen::VectorXd re(n * n), im(n * n);
        for (int t = 0; t < n * n; ++t) {
            re[t] = rhs.v[t].real();
            im[t] = rhs.v[t].imag();
        }
        Eigen::VectorXd xr = lu_.solve(re), xi = lu_.solve(im);
        GridC out(n);
        for (int t = 0; t < n * n; ++t) out.v[t] = cd(xr[t], xi[t]);
        return out;
    }
};

Grid2D<uint8_t> free_nodes(const DomainChart& c, const RegionMask* region) {
    Grid2D<uint8_t> free(c.n, 1);
    if (region) {
        for (size_t t = 0; t < free.v.size(); ++t) free.v[t] = region->w.v[t] >= 0.999 ? 1 : 0;
    }
    if (!c.periodic()) {
        for (int i = 0; i < c.n; ++i)
            for (int j = 0; j < c.n; ++j)
                if (c.on_boundary(i, j)) free(i, j) = 0;
    }
    return free;
}

void hopf_global_normalize(MapState& m) {
    // rescale by a single power of two so the mean log-radius sits in [0, 1)
    if (m.target->id() != TargetId::Hopf) return;
    for (auto& d : m.charts) {
        double mean = 0.0;
        for (size_t t = 0; t < d.z1.v.size(); ++t)
            mean += std::log2(std::sqrt(std::norm(d.z1.v[t]) + std::norm(d.z2.v[t])));
        mean /= static_cast<double>(d.z1.v.size());
        const int s = static_cast<int>(std::floor(mean));
        if (s == 0) continue;
        const double f = std::ldexp(1.0, -s);
        for (size_t t = 0; t < d.z1.v.size(); ++t) {
            d.z1.v[t] *= f;
            d.z2.v[t] *= f;
            d.tchart.v[t] = static_cast<int16_t>(d.tchart.v[t] + s);
        }
    }
}

}  // namespace

SolveReport flow_to_harmonic(MapState& m, const FlowConfig& cfg, const RegionMask* region) {
    if (m.domain->sphere) fail("ConfigError", "flow supports single-chart domains");
    const DomainChart& c = m.domain->chart(0);
    m.check_finite();

    double lam_min = 1e300, lam_max = 0.0;
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) {
            const double l = c.lambda(c.point(i, j));
            lam_min = std::min(lam_min, l);
            lam_max = std::max(lam_max, l);
        }

    double dt = cfg.dt;
    if (dt <= 0.0) {
        if (cfg.scheme == FlowScheme::Explicit)
            dt = cfg.cfl_safety * c.h * c.h * lam_min * lam_min / 4.0;
        else
            dt = 0.5 * c.h;
    }

    const Grid2D<uint8_t> free = free_nodes(c, region);
    {
        // the update is linear in chart coordinates: every evolving node and its
        // stencil halo must agree on the target chart
        int halo_chart = -1;
        bool ok = true;
        const int n = c.n;
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n; ++j) {
                bool near_free = false;
                for (int di = -2; di <= 2 && !near_free; ++di)
                    for (int dj = -2; dj <= 2; ++dj) {
                        int ii = i + di, jj = j + dj;
                        if (c.periodic()) {
                            ii = (ii + n) % n;
                            jj = (jj + n) % n;
                        } else if (ii < 0 || jj < 0 || ii >= n || jj >= n) {
                            continue;
                        }
                        if (free(ii, jj)) {
                            near_free = true;
                            break;
                        }
                    }
                if (!near_free) continue;
                const int tc = m.charts[0].tchart(i, j);
                if (halo_chart < 0) halo_chart = tc;
                else if (tc != halo_chart) {
                    ok = false;
                    break;
                }
            }
        if (!ok)
            fail("ChartTear", "flow requires one target chart across the evolving region");
    }
    std::unique_ptr<ImplicitSolver> solver;
    if (cfg.scheme == FlowScheme::SemiImplicit) {
        const double kappa = 1.5 / (2.0 * lam_min * lam_min);
        solver = std::make_unique<ImplicitSolver>(c, dt * kappa, free);
    }

    SolveReport rep;
    rep.dt_used = dt;
    int energy_up_streak = 0;
    double last_energy = 0.0;
    for (int step = 0; step <= cfg.max_steps; ++step) {
        const Vec2Field tau = tension_field(m, 0);
        double rmax = 0.0;
        for (int a = 0; a < 2; ++a)
            for (size_t t = 0; t < tau[a].v.size(); ++t)
                if (free.v[t]) rmax = std::max(rmax, std::abs(tau[a].v[t]));
        const EnergyField ef = energy(m);
        rep.residual_history.push_back(rmax);
        rep.energy_history.push_back(ef.total);
        rep.steps_taken = step;

        if (!std::isfinite(rmax) || rmax > 1e6) fail("Diverged", "tension blew up");
        double fmax = 0.0;
        for (const auto& dch : m.charts)
            for (const auto& z : dch.z1.v) fmax = std::max(fmax, std::abs(z));
        if (fmax > 1e6) fail("Diverged", "map values blew up");

        if (rmax <= cfg.tol) {
            rep.converged = true;
            break;
        }
        if (step == cfg.max_steps) break;

        if (cfg.scheme == FlowScheme::Explicit && step > 0) {
            if (ef.total > last_energy + 1e-10 * (1.0 + std::abs(last_energy))) {
                if (++energy_up_streak >= 10)
                    fail("StepTooLarge", "energy increased for 10 consecutive explicit steps");
            } else {
                energy_up_streak = 0;
            }
        }
        last_energy = ef.total;

        GridC rhs[2] = {GridC(c.n), GridC(c.n)};
        for (int a = 0; a < 2; ++a)
            for (size_t t = 0; t < rhs[a].v.size(); ++t)
                rhs[a].v[t] = free.v[t] ? dt * tau[a].v[t] : cd(0.0);

        MapState::ChartData& d = m.charts[0];
        if (cfg.scheme == FlowScheme::Explicit) {
            for (size_t t = 0; t < d.z1.v.size(); ++t) {
                d.z1.v[t] += rhs[0].v[t];
                d.z2.v[t] += rhs[1].v[t];
            }
        } else {
            const GridC d1 = solver->solve(rhs[0]);
            const GridC d2 = solver->solve(rhs[1]);
            for (size_t t = 0; t < d.z1.v.size(); ++t) {
                d.z1.v[t] += d1.v[t];
                d.z2.v[t] += d2.v[t];
            }
        }
        hopf_global_normalize(m);
        m.formula = nullptr;  // evolved away from any closed form
        m.jet = nullptr;
    }
    return rep;
}

double image_diameter(const MapState& m) {
    std::vector<TargetPoint> pts;
    for (int k = 0; k < m.domain->num_charts(); ++k) {
        const int n = m.domain->chart(k).n;
        const int stride = std::max(1, n / 24);
        const Grid2D<double> chi = m.domain->partition_field(k);
        for (int i = 0; i < n; i += stride)
            for (int j = 0; j < n; j += stride)
                if (chi(i, j) > 0.4 && m.charts[k].valid(i, j)) pts.push_back(m.at(k, i, j));
    }
    double d = 0.0;
    for (size_t a = 0; a < pts.size(); ++a)
        for (size_t b = a + 1; b < pts.size(); ++b)
            d = std::max(d, m.target->chord_distance(pts[a], pts[b]));
    return d;
}

GapProbeResult energy_gap_probe(std::shared_ptr<const Domain> dom,
                                std::shared_ptr<const HermitianTarget> tgt,
                                double energy_budget, const FlowConfig& cfg, uint64_t seed) {
    if (dom->chart(0).kind == ChartKind::Disk)
        fail("ConfigError", "gap probe needs a closed domain");
    GapProbeResult out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const TargetPoint base = tgt->id() == TargetId::Hopf
                                 ? TargetPoint{cd(1.2, 0.0), cd(0.3, 0.2), 0}
                                 : TargetPoint{cd(0.1, 0.0), cd(-0.2, 0.1), 0};
    const int levels = 6;
    for (int lev = 0; lev < levels; ++lev) {
        const double frac = (lev + 1) / static_cast<double>(levels);
        const cd c1(0.35 * U(rng), 0.35 * U(rng)), c2(0.35 * U(rng), 0.35 * U(rng));
        // smooth bump with one Fourier mode per component; amplitude set below
        auto shape = [&](int, cd x) {
            const double s1 = std::sin(2.0 * PI * x.real() / dom->chart(0).size);
            const double s2 = std::sin(2.0 * PI * x.imag() / dom->chart(0).size);
            TargetPoint p = base;
            p.z1 += c1 * s1 * s2;
            p.z2 += c2 * s1 * s2;
            return p;
        };
        MapState probe = MapState::sample(dom, tgt, shape, false);
        const double e0 = energy(probe).total;
        if (e0 <= 0.0) continue;
        const double scale = std::sqrt(frac * energy_budget / e0);
        auto scaled = [&](int k, cd x) {
            TargetPoint p = shape(k, x);
            p.z1 = base.z1 + (p.z1 - base.z1) * scale;
            p.z2 = base.z2 + (p.z2 - base.z2) * scale;
            return p;
        };
        MapState mp = MapState::sample(dom, tgt, scaled, false);
        const double einit = energy(mp).total;
        FlowConfig fc = cfg;
        flow_to_harmonic(mp, fc);
        const bool collapsed = image_diameter(mp) < 1e-3;
        out.runs.emplace_back(einit, collapsed);
        if (collapsed) out.collapse_threshold = std::max(out.collapse_threshold, einit);
        else if (out.first_survivor < 0.0 || einit < out.first_survivor)
            out.first_survivor = einit;
    }
    return out;
}

FamilyKind family_from_string(const std::string& s) {
    if (s == "fs_bubble") return FamilyKind::FSProductBubble;
    if (s == "two_scale") return FamilyKind::TwoScale;
    if (s == "two_center") return FamilyKind::TwoCenter;
    if (s == "moebius_constant") return FamilyKind::MoebiusConstant;
    fail("ConfigError", "unknown family kind '" + s + "'");
}

std::vector<MapState> concentrating_family(FamilyKind kind, const std::vector<double>& ks,
                                           int n) {
    auto dom = std::make_shared<Domain>(Domain::sphere_pair(n));
    auto tgt = std::make_shared<HermitianTarget>(TargetId::FSProduct);
    std::vector<MapState> fam;
    for (double k : ks) {
        MapJetFormula jet;
        switch (kind) {
            case FamilyKind::FSProductBubble:
                jet = [k](int chart, cd x) {
                    MapJetSample js{};
                    if (chart == 0) {
                        js.q = TargetPoint{x, k * x, 0};
                        js.d[0] = 1.0;
                        js.d[1] = k;
                    } else {
                        js.q = TargetPoint{x, x / k, 3};
                        js.d[0] = 1.0;
                        js.d[1] = 1.0 / k;
                    }
                    return js;
                };
                break;
            case FamilyKind::TwoScale:
                jet = [k](int chart, cd x) {
                    MapJetSample js{};
                    if (chart == 0) {
                        js.q = TargetPoint{k * x, k * k * x, 0};
                        js.d[0] = k;
                        js.d[1] = k * k;
                    } else {
                        js.q = TargetPoint{x / k, x / (k * k), 3};
                        js.d[0] = 1.0 / k;
                        js.d[1] = 1.0 / (k * k);
                    }
                    return js;
                };
                break;
            case FamilyKind::TwoCenter:
                jet = [k](int chart, cd x) {
                    const double c = 0.5;
                    MapJetSample js{};
                    if (chart == 0) {
                        js.q = TargetPoint{x, k * (x - c) * (x + c), 0};
                        js.d[0] = 1.0;
                        js.d[1] = 2.0 * k * x;
                        return js;
                    }
                    const cd den = 1.0 - c * c * x * x;
                    if (std::abs(x) <= 1.5) {
                        js.q = TargetPoint{x, x * x / (k * den), 3};
                        js.d[0] = 1.0;
                        js.d[1] = 2.0 * x / (k * den * den);
                    } else {
                        js.q = TargetPoint{x, k * den / (x * x), 1};
                        js.d[0] = 1.0;
                        js.d[1] = -2.0 * k / (x * x * x);
                    }
                    return js;
                };
                break;
            case FamilyKind::MoebiusConstant:
                jet = [](int, cd) {
                    MapJetSample js{};
                    js.q = TargetPoint{cd(0.2, 0.1), cd(-0.3, 0.0), 0};
                    return js;
                };
                break;
        }
        MapFormula f = [jet](int chart, cd x) { return jet(chart, x).q; };
        MapState m = MapState::sample(dom, tgt, f, true);
        m.jet = jet;
        fam.push_back(std::move(m));
    }
    return fam;
}


MapState random_trig_map(std::shared_ptr<const Domain> dom,
                         std::shared_ptr<const HermitianTarget> tgt, uint64_t seed,
                         double amplitude) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    struct Mode {
        int m, n;
        cd c1, c2;
    };
    std::vector<Mode> modes;
    for (int mm = -2; mm <= 2; ++mm)
        for (int nn = -2; nn <= 2; ++nn) {
            if (mm == 0 && nn == 0) continue;
            const double decay = 1.0 / (1.0 + mm * mm + nn * nn);
            modes.push_back({mm, nn, amplitude * decay * cd(U(rng), U(rng)),
                             amplitude * decay * cd(U(rng), U(rng))});
        }
    const bool hopf = tgt->id() == TargetId::Hopf;
    const TargetPoint base =
        hopf ? TargetPoint{cd(1.25, 0.0), cd(0.35, 0.1), 0} : TargetPoint{cd(0.1, -0.1), cd(0.2, 0.05), 0};
    const double L = dom->chart(0).size;
    auto f = [=](int, cd x) {
        TargetPoint p = base;
        for (const auto& md : modes) {
            const double ph = 2.0 * PI * (md.m * x.real() + md.n * x.imag()) / L;
            p.z1 += md.c1 * std::cos(ph);
            p.z2 += md.c2 * std::sin(ph);
        }
        return p;
    };
    return MapState::sample(dom, tgt, f, true);
}

}  // namespace chernlab
