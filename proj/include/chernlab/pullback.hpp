#ifndef CHERNLAB_PULLBACK_HPP
#define CHERNLAB_PULLBACK_HPP

#include "chernlab/map_state.hpp"

namespace chernlab {

/// Conformal gauge used when decomposing against phi = lambda dx: the exact
/// chart gauge by default, or a rescaled one for conformal-change experiments.
struct ChartGauge {
    Grid2D<double> lambda;
    GridC rho_x;  // dx-coefficient of the real connection 1-form rho
};

ChartGauge default_gauge(const DomainChart& c);
/// Gauge of the metric (lambda/mu)^2 dx dxb; mu > 0 (ZeroConformalFactor otherwise).
/// d log mu is taken with d_complex on log(mu).
ChartGauge scaled_gauge(const DomainChart& c, const Grid2D<double>& mu);

/// Frame coefficients a^i_1, a^i_{1bar} on one domain chart (unitary target frame),
/// plus the coordinate-frame map derivatives they were built from.
struct FrameCoefficients {
    Vec2Field a1, a1b;
    MapDerivs md;
};

struct SecondForm {
    Vec2Field a11, a11b, a1b1, a1b1b;
};

FrameCoefficients frame_coefficients(const MapState& m, int chart);
FrameCoefficients frame_coefficients_g(const MapState& m, int chart, const ChartGauge& g);

SecondForm second_form(const MapState& m, int chart, const FrameCoefficients& fc);
SecondForm second_form_g(const MapState& m, int chart, const FrameCoefficients& fc,
                         const ChartGauge& g);

/// Pointwise max_i |  -a^i_{1 1b} + a^i_{1b 1} - 2 L^i_{jk} a^j_1 a^k_{1b} |.
/// Vanishes (to scheme order) for every smooth map.
Grid2D<double> torsion_identity_residual(const MapState& m, int chart);

/// r^i = a^i_{1 1b} + a^i_{1b 1}; returns the two complex fields.
Vec2Field harmonic_residual_field(const MapState& m, int chart);
double harmonic_residual_max(const MapState& m);

struct EnergyField {
    std::vector<Grid2D<double>> density;  // per domain chart
    double total = 0.0;
};
/// Density sum_i (|a^i_1|^2 + |a^i_1b|^2); total integrates over the whole domain
/// (partition of unity on the sphere) or over `mask` (single-chart domains).
EnergyField energy(const MapState& m, const RegionMask* mask = nullptr);
Grid2D<double> energy_density(const MapState& m, int chart);

/// Total energy with an oversampled quadrature (jet-backed maps only): resolves
/// concentrations finer than the stored grid. Falls back to energy() otherwise.
double energy_total_oversampled(const MapState& m, int factor = 4);

struct MeanCurvature {
    Vec2Field H;                 // unitary-frame components of the e_i part
    double sup_norm = 0.0;       // sup |H| in the target metric
    double conformality_defect = 0.0;
};
MeanCurvature mean_curvature(const MapState& m, int chart);

/// Max relative deviation of the rescaled mixed blocks from the |mu|^2 law
/// b^i_{1 1b} = mu^2 a^i_{1 1b}, b^i_{1b 1} = mu^2 a^i_{1b 1}.
double conformal_change_check(const MapState& m, int chart, const Grid2D<double>& mu);

/// Curvature contraction Omega^i_j/(phi ^ phib) of the pulled-back curvature (A-20 form).
struct CurvatureContraction {
    GridC G[2][2];
};
CurvatureContraction curvature_contraction(const MapState& m, int chart,
                                           const FrameCoefficients& fc);

/// First-order operator identity ((d^nabla)* + d^nabla) df = p(df,df):
/// max pointwise defect of the 2-form part against 2 L^i_{jk} a^j_1 a^k_{1b}.
/// Throws NotHarmonic when max|r| exceeds `harmonic_tol`.
double first_order_operator_check(const MapState& m, int chart, double harmonic_tol);

/// Second-order operator identity: covariant derivative of the pulled-back
/// torsion contraction vs the assembled q-expression. One derivative order lost.
double second_order_operator_check(const MapState& m, int chart, double harmonic_tol);

/// Tension field tau^i in target-chart coordinates: rotate (a^i_{1 1b} + a^i_{1b 1})
/// out of the unitary frame. Zero iff Chern-harmonic at grid resolution.
Vec2Field tension_field(const MapState& m, int chart);
double tension_max(const MapState& m);

/// Classical harmonic-map tension in complex coordinates for Kaehler targets:
/// tau^i = (2/lambda^2)(d dbar f^i + Gamma^i_{jk}(f) d f^j dbar f^k). Independent
/// oracle route; only meaningful for FlatC2 / FSProduct.
Vec2Field kaehler_tension_oracle(const MapState& m, int chart);

}  // namespace chernlab

#endif
