#include "chernlab/target.hpp"

#include <cmath>

namespace chernlab {

namespace {

constexpr double kPosDefTol = 1e-12;

// Per-factor scalar metric jets. Diagonal targets only: every shipped metric is
// diag(h_0, h_1) with real positive h_i.

void jet_flat(MetricJet& j) {
    for (int i = 0; i < 2; ++i) {
        j.h[i] = 1.0;
        for (int k = 0; k < 2; ++k) {
            j.dh[i][k] = 0.0;
            for (int l = 0; l < 2; ++l) {
                j.ddh[i][k][l] = 0.0;
                j.dmh[i][k][l] = 0.0;
            }
        }
    }
}

// Fubini-Study factor: h(z) = 4 / (1+|z|^2)^2, area 4*pi. Factor i depends only on z_i.
void jet_fs(MetricJet& j, const TargetPoint& p) {
    for (int i = 0; i < 2; ++i) {
        const cd z = p[i];
        const cd zb = std::conj(z);
        const double s = 1.0 + std::norm(z);
        j.h[i] = 4.0 / (s * s);
        for (int k = 0; k < 2; ++k) {
            j.dh[i][k] = 0.0;
            for (int l = 0; l < 2; ++l) { j.ddh[i][k][l] = 0.0; j.dmh[i][k][l] = 0.0; }
        }
        j.dh[i][i] = -8.0 * zb / (s * s * s);
        j.ddh[i][i][i] = 24.0 * zb * zb / (s * s * s * s);
        j.dmh[i][i][i] = (16.0 * std::norm(z) - 8.0) / (s * s * s * s);
    }
}

// Hopf: h_i(z) = 1/|z|^2 with |z|^2 = |z1|^2 + |z2|^2, invariant under z -> 2z.
void jet_hopf(MetricJet& j, const TargetPoint& p) {
    const cd z[2] = {p.z1, p.z2};
    const double r2 = std::norm(z[0]) + std::norm(z[1]);
    if (r2 < kPosDefTol) fail("OutOfChart", "Hopf chart requires z != 0");
    const double r4 = r2 * r2, r6 = r4 * r2;
    for (int i = 0; i < 2; ++i) {
        j.h[i] = 1.0 / r2;
        for (int k = 0; k < 2; ++k) {
            j.dh[i][k] = -std::conj(z[k]) / r4;
            for (int l = 0; l < 2; ++l) {
                j.ddh[i][k][l] = 2.0 * std::conj(z[k]) * std::conj(z[l]) / r6;
                j.dmh[i][k][l] = -((k == l) ? 1.0 : 0.0) / r4 +
                                 2.0 * std::conj(z[k]) * z[l] / r6;
            }
        }
    }
}

cd dlog(const MetricJet& j, int i, int k) { return j.dh[i][k] / j.h[i]; }

// d_k d_p log h_i and d_p dbar_k log h_i
cd ddlog(const MetricJet& j, int i, int k, int p) {
    return j.ddh[i][k][p] / j.h[i] - j.dh[i][k] * j.dh[i][p] / (j.h[i] * j.h[i]);
}
cd dmlog(const MetricJet& j, int i, int p, int k) {  // d_p dbar_k log h_i
    return j.dmh[i][p][k] / j.h[i] - j.dh[i][p] * std::conj(j.dh[i][k]) / (j.h[i] * j.h[i]);
}

}  // namespace

TargetId target_from_string(const std::string& s) {
    if (s == "flat_c2") return TargetId::FlatC2;
    if (s == "fs_product") return TargetId::FSProduct;
    if (s == "hopf") return TargetId::Hopf;
    fail("ConfigError", "unknown target id '" + s + "'");
}

std::string to_string(TargetId id) {
    switch (id) {
        case TargetId::FlatC2: return "flat_c2";
        case TargetId::FSProduct: return "fs_product";
        case TargetId::Hopf: return "hopf";
    }
    return "?";
}

HermitianTarget::HermitianTarget(TargetId id, bool self_test) : id_(id) {
    if (self_test) validate_jets();
}

MetricJet HermitianTarget::metric_raw(const TargetPoint& p) const {
    MetricJet j;
    switch (id_) {
        case TargetId::FlatC2: jet_flat(j); break;
        case TargetId::FSProduct: jet_fs(j, p); break;
        case TargetId::Hopf:
            // z -> 2z is an isometry of delta_ij/|z|^2, so the jet in the stored
            // chart-m coordinate has the same closed form at every level.
            jet_hopf(j, p);
            break;
    }
    if (j.h[0] < kPosDefTol || j.h[1] < kPosDefTol)
        fail("SingularMetric", "metric not positive definite at evaluation point");
    return j;
}

MetricJet HermitianTarget::metric(const TargetPoint& p) const { return metric_raw(p); }

ConnectionData HermitianTarget::chern_connection(const TargetPoint& p) const {
    const MetricJet j = metric_raw(p);
    ConnectionData cn{};
    for (int i = 0; i < 2; ++i) cn.c[i] = std::sqrt(j.h[i]);
    // Gamma^i_{jk} = delta_ij d_k log h_j ; omega^a_b diagonal with
    // omega^a_a = (1/2) d log h_a - (1/2) dbar log h_a.
    for (int i = 0; i < 2; ++i)
        for (int jj = 0; jj < 2; ++jj)
            for (int k = 0; k < 2; ++k) {
                cn.gamma[i][jj][k] = (i == jj) ? dlog(j, jj, k) : cd(0.0);
                cn.w10[i][jj][k] = 0.0;
                cn.w01[i][jj][k] = 0.0;
            }
    for (int a = 0; a < 2; ++a)
        for (int k = 0; k < 2; ++k) {
            cn.w10[a][a][k] = 0.5 * dlog(j, a, k);
            cn.w01[a][a][k] = -0.5 * std::conj(dlog(j, a, k));
        }
    return cn;
}

TorsionJet HermitianTarget::torsion(const TargetPoint& p) const {
    const MetricJet j = metric_raw(p);
    TorsionJet t{};
    for (int a = 0; a < 2; ++a) {
        const double ca = std::sqrt(j.h[a]);
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
                const double cb = std::sqrt(j.h[b]), cc = std::sqrt(j.h[c]);
                cd v = 0.0;
                if (a == c) v += dlog(j, a, b);
                if (a == b) v -= dlog(j, a, c);
                t.L[a][b][c] = ca / (2.0 * cb * cc) * v;
            }
    }
    return t;
}

TorsionJet HermitianTarget::torsion_jet(const TargetPoint& p) const {
    const MetricJet j = metric_raw(p);
    TorsionJet t = torsion(p);
    // Covariant derivative with the diagonal unitary connection:
    //   L^a_{bc;d} omega^d + L^a_{bc;dbar} omegabar^d
    //     = dL^a_{bc} + L^a_{bc} (omega_a - omega_b - omega_c)
    double c[2];
    for (int i = 0; i < 2; ++i) c[i] = std::sqrt(j.h[i]);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int cc = 0; cc < 2; ++cc) {
                for (int k = 0; k < 2; ++k) {
                    // coordinate derivatives of L^a_{b cc}
                    // L = c_a/(2 c_b c_cc) * (delta_{a cc} g_{a,b-dir} - delta_{ab} g_{a,cc-dir})
                    // with g_{i,k} = d_k log h_i; differentiate the product.
                    cd g = 0.0, dg = 0.0, dbg = 0.0;
                    if (a == cc) { g += dlog(j, a, b); dg += ddlog(j, a, k, b); dbg += dmlog(j, a, b, k); }
                    if (a == b) { g -= dlog(j, a, cc); dg -= ddlog(j, a, k, cc); dbg -= dmlog(j, a, cc, k); }
                    const double pref = c[a] / (2.0 * c[b] * c[cc]);
                    const cd dpref_over_pref = 0.5 * (dlog(j, a, k) - dlog(j, b, k) - dlog(j, cc, k));
                    const cd dL = pref * (dpref_over_pref * g + dg);
                    const cd dbL = pref * (std::conj(dpref_over_pref) * g + dbg);
                    // connection correction, diagonal omega
                    const cd w10 = 0.5 * (dlog(j, a, k) - dlog(j, b, k) - dlog(j, cc, k));
                    const cd w01 = -std::conj(w10);
                    const cd v10 = dL + t.L[a][b][cc] * w10;
                    const cd v01 = dbL + t.L[a][b][cc] * w01;
                    t.L1[a][b][cc][k] = v10 / c[k];
                    t.L1b[a][b][cc][k] = v01 / c[k];
                }
            }
    return t;
}

CurvatureTensor HermitianTarget::curvature(const TargetPoint& p) const {
    const MetricJet j = metric_raw(p);
    CurvatureTensor R{};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int q = 0; q < 2; ++q)
                for (int s = 0; s < 2; ++s) {
                    R.Rhol[a][b][q][s] = 0.0;
                    R.Ranti[a][b][q][s] = 0.0;
                    if (a != b) { R.Rm[a][b][q][s] = 0.0; continue; }
                    const cd pq = -dmlog(j, a, q, s);  // P_{q sbar} diagonal entry
                    R.Rm[a][b][q][s] = pq / (std::sqrt(j.h[q]) * std::sqrt(j.h[s]));
                }
    return R;
}

TargetPoint HermitianTarget::transition(const TargetPoint& p, int to_chart) const {
    TargetPoint q = p;
    switch (id_) {
        case TargetId::FlatC2:
            if (to_chart != 0) fail("NotInOverlap", "flat C^2 has a single chart");
            return q;
        case TargetId::FSProduct: {
            for (int i = 0; i < 2; ++i) {
                const int from = (p.chart >> i) & 1, to = (to_chart >> i) & 1;
                if (from != to) {
                    if (std::abs(p[i]) < 1e-300) fail("NotInOverlap", "factor value at chart pole");
                    q[i] = 1.0 / p[i];
                }
            }
            q.chart = to_chart;
            return q;
        }
        case TargetId::Hopf: {
            const double s = std::ldexp(1.0, p.chart - to_chart);
            q.z1 = p.z1 * s; q.z2 = p.z2 * s; q.chart = to_chart;
            return q;
        }
    }
    return q;
}

TargetPoint HermitianTarget::normalize(const TargetPoint& p) const {
    switch (id_) {
        case TargetId::FlatC2: return p;
        case TargetId::FSProduct: {
            int chart = 0;
            for (int i = 0; i < 2; ++i) {
                const int bit = (p.chart >> i) & 1;
                const bool flip = std::abs(p[i]) > 1.0;
                chart |= ((bit ^ (flip ? 1 : 0)) & 1) << i;
            }
            return transition(p, chart);
        }
        case TargetId::Hopf: {
            const double r = std::sqrt(std::norm(p.z1) + std::norm(p.z2));
            if (r <= 0.0) fail("OutOfChart", "Hopf chart requires z != 0");
            const int m = static_cast<int>(std::floor(std::log2(r)));
            return transition(p, p.chart + m);  // stored norm lands in [1,2)
        }
    }
    return p;
}

std::array<cd, 2> HermitianTarget::rotate_frame_vector(const TargetPoint& from, int to_chart,
                                                       const std::array<cd, 2>& v) const {
    // v_B = C_B^T J F_A^T v_A ; all diagonal here.
    const TargetPoint to = transition(from, to_chart);
    const MetricJet ja = metric_raw(from), jb = metric_raw(to);
    std::array<cd, 2> out{};
    switch (id_) {
        case TargetId::FlatC2: return v;
        case TargetId::FSProduct: {
            for (int i = 0; i < 2; ++i) {
                const int fb = (from.chart >> i) & 1, tb = (to_chart >> i) & 1;
                cd Jii = 1.0;
                if (fb != tb) Jii = -1.0 / (from[i] * from[i]);
                out[i] = std::sqrt(jb.h[i]) * Jii * v[i] / std::sqrt(ja.h[i]);
            }
            return out;
        }
        case TargetId::Hopf: {
            const double s = std::ldexp(1.0, from.chart - to_chart);
            for (int i = 0; i < 2; ++i)
                out[i] = std::sqrt(jb.h[i]) * s * v[i] / std::sqrt(ja.h[i]);
            return out;
        }
    }
    return out;
}

std::array<cd, 2> HermitianTarget::transition_jacobian(const TargetPoint& p,
                                                       int to_chart) const {
    std::array<cd, 2> J = {1.0, 1.0};
    switch (id_) {
        case TargetId::FlatC2: return J;
        case TargetId::FSProduct:
            for (int i = 0; i < 2; ++i) {
                const int fb = (p.chart >> i) & 1, tb = (to_chart >> i) & 1;
                if (fb != tb) {
                    if (std::abs(p[i]) < 1e-300)
                        fail("NotInOverlap", "Jacobian at a chart pole");
                    J[i] = -1.0 / (p[i] * p[i]);
                }
            }
            return J;
        case TargetId::Hopf: {
            const double s = std::ldexp(1.0, p.chart - to_chart);
            J = {s, s};
            return J;
        }
    }
    return J;
}

double HermitianTarget::chord_distance(const TargetPoint& a, const TargetPoint& b) const {
    TargetPoint bb = b;
    if (b.chart != a.chart) bb = transition(b, a.chart);
    TargetPoint mid = a;
    mid.z1 = 0.5 * (a.z1 + bb.z1);
    mid.z2 = 0.5 * (a.z2 + bb.z2);
    if (id_ == TargetId::Hopf && std::norm(mid.z1) + std::norm(mid.z2) < 1e-12) {
        // antipodal-ish representatives; fall back to endpoint metric
        mid = a;
    }
    const MetricJet j = metric_raw(mid);
    return std::sqrt(j.h[0] * std::norm(a.z1 - bb.z1) + j.h[1] * std::norm(a.z2 - bb.z2));
}

void HermitianTarget::validate_jets() const {
    const double eps = 1e-5;
    std::vector<TargetPoint> pts;
    switch (id_) {
        case TargetId::FlatC2: pts = {{cd(0.3, -0.2), cd(1.0, 0.4), 0}}; break;
        case TargetId::FSProduct:
            pts = {{cd(0.3, -0.2), cd(-0.5, 0.4), 0}, {cd(0.9, 0.1), cd(0.0, 0.0), 0}};
            break;
        case TargetId::Hopf:
            pts = {{cd(1.1, 0.2), cd(-0.4, 0.8), 0}, {cd(1.0, 0.0), cd(0.0, 0.0), 0}};
            break;
    }
    auto step = [&](const TargetPoint& p, int k, cd dz) {
        TargetPoint q = p;
        q[k] += dz;
        return q;
    };
    for (const auto& p : pts) {
        const MetricJet j0 = metric_raw(p);
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k) {
                const double hpr = metric_raw(step(p, k, eps)).h[i];
                const double hmr = metric_raw(step(p, k, -eps)).h[i];
                const double hpi = metric_raw(step(p, k, I * eps)).h[i];
                const double hmi = metric_raw(step(p, k, -I * eps)).h[i];
                const cd dx((hpr - hmr) / (2 * eps), 0.0), dy((hpi - hmi) / (2 * eps), 0.0);
                const cd fd = 0.5 * (dx - I * dy);
                if (std::abs(fd - j0.dh[i][k]) > 2e-6 * (1.0 + std::abs(j0.dh[i][k])))
                    fail("SelfTest", "metric first-derivative jet mismatch for " + to_string(id_));
            }
    }
}

}  // namespace chernlab
