#ifndef CHERNLAB_FLOW_HPP
#define CHERNLAB_FLOW_HPP

#include "chernlab/pullback.hpp"

namespace chernlab {

enum class FlowScheme { Explicit, SemiImplicit };

struct FlowConfig {
    double dt = 0.0;  // <= 0: pick from scheme defaults (explicit CFL / h-scaled)
    FlowScheme scheme = FlowScheme::SemiImplicit;
    double tol = 1e-8;
    int max_steps = 4000;
    double cfl_safety = 0.5;
};

struct SolveReport {
    std::vector<double> residual_history;
    std::vector<double> energy_history;
    bool converged = false;
    int steps_taken = 0;
    double dt_used = 0.0;
};

/// Pseudo-gradient flow f <- f + dt * tau toward Chern-harmonic maps.
/// Bounded charts impose Dirichlet data on the outer node frame; an optional
/// `region` freezes every node outside it instead (masked Dirichlet fill).
/// Single-chart-valued maps only. Throws Diverged / StepTooLarge per spec.
SolveReport flow_to_harmonic(MapState& m, const FlowConfig& cfg,
                             const RegionMask* region = nullptr);

struct GapProbeResult {
    double collapse_threshold = 0.0;   // largest initial energy that collapsed
    double first_survivor = -1.0;      // smallest initial energy that did not
    std::vector<std::pair<double, bool>> runs;  // (initial energy, collapsed)
};

/// Flows a family of small-energy bump maps on a closed domain and reports the
/// empirical lower bound for the energy gap (image diameter < 1e-3 counts as
/// collapsed to a constant).
GapProbeResult energy_gap_probe(std::shared_ptr<const Domain> dom,
                                std::shared_ptr<const HermitianTarget> tgt,
                                double energy_budget, const FlowConfig& cfg,
                                uint64_t seed);

/// Image diameter measured by target chord distance over a grid subsample.
double image_diameter(const MapState& m);

enum class FamilyKind { FSProductBubble, TwoScale, TwoCenter, MoebiusConstant };

FamilyKind family_from_string(const std::string& s);

/// Closed-form concentrating families on the two-chart sphere domain into
/// FSProduct; each member is holomorphic, hence Chern-harmonic.
std::vector<MapState> concentrating_family(FamilyKind kind, const std::vector<double>& ks,
                                           int n);

/// Smooth random trigonometric map into the given target, values kept inside a
/// safe chart region. Periodic; usable on any chart kind.
MapState random_trig_map(std::shared_ptr<const Domain> dom,
                         std::shared_ptr<const HermitianTarget> tgt, uint64_t seed,
                         double amplitude = 0.25);

}  // namespace chernlab

#endif
