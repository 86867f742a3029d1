#ifndef CHERNLAB_ANALYSIS_HPP
#define CHERNLAB_ANALYSIS_HPP

#include "chernlab/pullback.hpp"

namespace chernlab {

/// Laplacian in the structure-equation normalization: Delta u = 2 u_{1 1bar}
/// (half the Laplace-Beltrami operator; flat chart: 2 d dbar u).
Grid2D<double> scalar_laplacian(const DomainChart& c, const Grid2D<double>& u);

/// Third covariant derivatives of the frame coefficients (A-12)-(A-15) route.
struct ThirdDerivs {
    Vec2Field a111, a111b;    // of a11
    Vec2Field a11b1, a11b1b;  // of a11b
    Vec2Field a1b11, a1b11b;  // of a1b1
    Vec2Field a1b1b1, a1b1b1b;
};
ThirdDerivs third_derivatives(const MapState& m, int chart, const FrameCoefficients& fc,
                              const SecondForm& sf);

struct BochnerReport {
    Grid2D<double> lhs;      // Delta e
    Grid2D<double> rhs;      // assembled right side
    double defect = 0.0;     // max |lhs - rhs| over the interior
    double order = 0.0;      // fitted order when computed across resolutions
    double order_residual = 0.0;
};

/// Bochner identity on one (approximately) Chern-harmonic map. `margin` trims a
/// boundary frame of that many nodes from the sup on bounded charts.
/// Throws NotHarmonic when max|r| > harmonic_tol.
BochnerReport bochner_check(const MapState& m, int chart, double harmonic_tol,
                            int margin = 4);

/// Bochner right side via the direct third-derivative route (A-32); the
/// assembly-independent oracle for the identity.
Grid2D<double> bochner_rhs_direct(const MapState& m, int chart);

struct DiffIneqFit {
    double C1 = 0.0, C2 = 0.0;
    double slack = 1e-10;
};
/// Least constants with Delta e >= -C1 e - C2 e^2 across the suite.
/// C1 = 2 sup(-K_struct)_+ (the theory constant from the 2Ke term); C2 fitted.
DiffIneqFit fit_differential_inequality(const std::vector<const MapState*>& suite);

struct EpsRegRow {
    cd center;
    double r = 0.0, energy_2r = 0.0, sup_e = 0.0, ratio = 0.0;
    bool admissible = false;
};
/// For each center: sup_{D_r} e vs E(2r)/r^2 (rows with E(2r) <= eps1 only).
std::vector<EpsRegRow> epsilon_regularity_check(const MapState& m, int chart,
                                                const std::vector<cd>& centers, double r,
                                                double eps1);
double empirical_c3(const std::vector<EpsRegRow>& rows);

/// Length of the image of a chart circle under the map (metric-weighted chords).
double loop_length(const MapState& m, int chart, cd center, double radius,
                   int samples = 0);

struct IsoperimetricRow {
    double area = 0.0, length = 0.0, ratio = 0.0;
    double conformality_defect = 0.0;
    bool degenerate = false;   // near-zero area and length
    bool nonconformal = false; // defect beyond 1e-2, reported not fatal
};
IsoperimetricRow isoperimetric_check(const MapState& m, int chart, cd center,
                                     double geodesic_r);

struct MonotonicityCurve {
    std::vector<double> r, area_over_r2;
    double infimum = 0.0;
};
/// A(f(.) cap B_r(x))/r^2 for target balls around image point x.
MonotonicityCurve monotonicity_check(const MapState& m, int chart, const TargetPoint& x,
                                     const std::vector<double>& radii);

struct MorreyFit {
    double alpha = 0.0;
    double residual = 0.0;
    std::vector<double> r, area;
    bool degenerate = false;
};
MorreyFit morrey_decay_fit(const MapState& m, int chart, cd center,
                           const std::vector<double>& radii);

}  // namespace chernlab

#endif
