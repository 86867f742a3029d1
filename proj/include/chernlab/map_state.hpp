#ifndef CHERNLAB_MAP_STATE_HPP
#define CHERNLAB_MAP_STATE_HPP

#include "chernlab/domain.hpp"
#include "chernlab/target.hpp"

#include <functional>
#include <memory>

namespace chernlab {

/// Closed-form generator: domain chart index and chart point -> target point.
using MapFormula = std::function<TargetPoint(int, cd)>;

/// Closed-form first-derivative jet: value plus Wirtinger derivatives of the
/// components, all expressed in q.chart.
struct MapJetSample {
    TargetPoint q;
    cd d[2];   // d f^i / dx
    cd db[2];  // d f^i / dxb
};
using MapJetFormula = std::function<MapJetSample(int, cd)>;

/// A discretized map from a Domain into a HermitianTarget. Values are stored
/// per domain chart as raw target-chart coordinates plus a per-point target
/// chart id. An optional closed form enables exact resampling.
struct MapState {
    std::shared_ptr<const Domain> domain;
    std::shared_ptr<const HermitianTarget> target;

    struct ChartData {
        GridC z1, z2;
        Grid2D<int16_t> tchart;
        Grid2D<uint8_t> valid;  // 0 = point not backed by data (outside source window)
    };
    std::vector<ChartData> charts;
    MapFormula formula;   // optional
    MapJetFormula jet;    // optional: exact derivatives for unresolved concentrations

    static MapState sample(std::shared_ptr<const Domain> dom,
                           std::shared_ptr<const HermitianTarget> tgt,
                           const MapFormula& f, bool keep_formula = true);

    TargetPoint at(int chart, int i, int j) const {
        const ChartData& cdta = charts[chart];
        return TargetPoint{cdta.z1(i, j), cdta.z2(i, j), cdta.tchart(i, j)};
    }
    void set(int chart, int i, int j, const TargetPoint& p) {
        ChartData& cdta = charts[chart];
        cdta.z1(i, j) = p.z1;
        cdta.z2(i, j) = p.z2;
        cdta.tchart(i, j) = static_cast<int16_t>(p.chart);
    }
    bool single_target_chart(int chart) const;
    int n() const { return domain->n(); }

    /// Map all stored points to canonical target charts (FSProduct |v|<=1 bits,
    /// Hopf fundamental annulus); keeps adjacent points overlap-compatible.
    void normalize_charts();

    /// Finite map values everywhere (valid points); throws otherwise.
    void check_finite() const;

    /// Bicubic (Catmull-Rom) interpolation of the map at chart point x,
    /// expressed in the target chart of the nearest grid node.
    TargetPoint interpolate(int chart, cd x) const;

    /// Evaluate through the closed form when present, else interpolate.
    TargetPoint eval(int chart, cd x) const;
};

/// Coordinate-frame Wirtinger derivatives of the map components on one domain
/// chart, honoring per-point target charts (neighbors are transitioned into the
/// center point's chart before the stencil is applied). Exact when the map
/// carries an analytic jet.
struct MapDerivs {
    Vec2Field d;   // d f^i   (dx coefficient)
    Vec2Field db;  // dbar f^i
};
MapDerivs map_derivatives(const MapState& m, int chart);

/// Mixed second derivative d dbar f^i (chartwise; exact-in-first-derivative when
/// an analytic jet is present, one stencil level otherwise).
Vec2Field map_mixed_derivative(const MapState& m, int chart, const MapDerivs& md);

/// Derivative of a frame-indexed 2-vector field along the map (stencil with
/// frame rotation of neighbors into the center target chart).
MapDerivs field_derivatives_framed(const MapState& m, int chart, const Vec2Field& v);

}  // namespace chernlab

#endif
