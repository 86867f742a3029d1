#ifndef CHERNLAB_DOMAIN_HPP
#define CHERNLAB_DOMAIN_HPP

#include "chernlab/core.hpp"

#include <memory>
#include <optional>

namespace chernlab {

enum class ChartKind { Torus, Disk, Sphere };
enum class LambdaKind { Flat, Sphere, Hyperbolic };
enum class DiffScheme { Spectral, Stencil4 };

/// One conformal coordinate chart on a uniform square grid.
///
/// Torus : [0, size)^2 periodic, node spacing size/n, lambda == 1.
/// Disk  : square patch [-size, size]^2 (a simply connected chart with
///         boundary), lambda from `lam`; boundary = outermost node frame.
/// Sphere: stereographic chart [-2, 2]^2, lambda = 2/(1+|x|^2); two of these
///         form the SpherePair atlas (see Domain).
struct DomainChart {
    ChartKind kind = ChartKind::Torus;
    LambdaKind lam = LambdaKind::Flat;
    DiffScheme scheme = DiffScheme::Spectral;
    int n = 0;
    double size = 1.0;
    double x0 = 0.0, y0 = 0.0, h = 0.0;

    static DomainChart torus(int n, double size = 1.0, DiffScheme s = DiffScheme::Spectral);
    static DomainChart disk(int n, double half_side = 1.0, LambdaKind lam = LambdaKind::Flat);
    static DomainChart sphere_chart(int n);

    cd point(int i, int j) const { return cd(x0 + j * h, y0 + i * h); }
    bool periodic() const { return kind == ChartKind::Torus; }
    bool on_boundary(int i, int j) const {
        return !periodic() && (i == 0 || j == 0 || i == n - 1 || j == n - 1);
    }

    double lambda(cd x) const;
    cd dlog_lambda(cd x) const;       // d/dx of log(lambda), closed form
    double gauss_K(cd x) const;       // Gaussian curvature: -(4/lambda^2) d dbar log lambda
    cd rho_x(cd x) const { return -I * dlog_lambda(x); }  // dx-coefficient of rho

    Grid2D<double> lambda_field() const;
    Grid2D<double> gauss_curvature_field() const;  // evaluated with d_complex on log lambda
};

/// Wirtinger derivatives of a complex field against dx, dxb.
struct DPair {
    GridC d, db;
};

/// d_complex: spectral on periodic charts (scheme Spectral), otherwise 4th-order
/// centered stencils with one-sided closures at chart edges.
DPair d_complex(const DomainChart& c, const GridC& f);

/// Real directional derivative tables (Fornberg-generated), exposed for reuse.
/// Applies d/dx (axis=0) or d/dy (axis=1) with the chart's scheme.
GridC d_axis(const DomainChart& c, const GridC& f, int axis);

/// Mixed Wirtinger second derivative d dbar f = (d_xx + d_yy)/4 via genuine
/// second-derivative stencils (or the spectral -|k|^2/4 symbol): unlike a
/// composition of first-derivative stencils, this has no checkerboard null modes.
GridC ddbar(const DomainChart& c, const GridC& f);

/// Region weights in [0,1]; boundary cells carry fractional coverage.
struct RegionMask {
    Grid2D<double> w;
    bool empty() const { return w.empty(); }
};

RegionMask full_mask(const DomainChart& c);

/// Fractional-coverage mask of {g <= 0} for a level field with |grad g| given.
RegionMask mask_from_level(const DomainChart& c, const Grid2D<double>& g,
                           const Grid2D<double>& grad_norm);

/// Geodesic disk of radius r around `center` (chart point). Closed forms for the
/// three constant-curvature lambdas; throws RadiusTooLarge when the disk is not
/// representable inside the chart.
RegionMask geodesic_disk_mask(const DomainChart& c, cd center, double r);

/// Plain coordinate ball {|x - center| <= r} (the conformal-coordinate balls of
/// the renormalization procedure); measure weights still carry lambda^2.
RegionMask euclidean_disk_mask(const DomainChart& c, cd center, double r);

/// Chart circle (center, radius) realizing the geodesic disk boundary.
struct ChartCircle {
    cd center;
    double radius;
};
ChartCircle geodesic_circle(const DomainChart& c, cd center, double r);

/// Quadrature of `field` against lambda^2 dx1 dx2 over the (masked) chart.
double integrate(const DomainChart& c, const Grid2D<double>& field,
                 const RegionMask* mask = nullptr);
double chart_area(const DomainChart& c, const RegionMask* mask = nullptr);

/// Domain = one chart (torus, disk) or the two-chart sphere atlas with a
/// smooth partition of unity on the overlap annulus 1/2 < |x| < 2.
struct Domain {
    std::vector<DomainChart> charts;
    bool sphere = false;

    static Domain torus(int n, double size = 1.0, DiffScheme s = DiffScheme::Spectral);
    static Domain disk(int n, double half_side = 1.0, LambdaKind lam = LambdaKind::Flat);
    static Domain sphere_pair(int n);

    int n() const { return charts[0].n; }
    const DomainChart& chart(int k) const { return charts[k]; }
    int num_charts() const { return static_cast<int>(charts.size()); }

    /// Partition-of-unity weight of chart k at chart point x (1 for single charts).
    double partition_weight(int k, cd x) const;
    Grid2D<double> partition_field(int k) const;

    /// Integral over the whole domain of per-chart scalar fields.
    double integrate_total(const std::vector<Grid2D<double>>& per_chart) const;
};

/// Sphere-atlas chart transition x -> 1/x.
cd sphere_transition(cd x);

}  // namespace chernlab

#endif
