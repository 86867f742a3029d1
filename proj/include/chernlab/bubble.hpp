#ifndef CHERNLAB_BUBBLE_HPP
#define CHERNLAB_BUBBLE_HPP

#include "chernlab/analysis.hpp"
#include "chernlab/flow.hpp"

namespace chernlab {

struct BubbleConfig {
    std::vector<double> k_values;      // family concentration parameters (rank = position+1)
    double epsilon1 = 8.0;             // detection threshold
    double c0 = 2.0;                   // renormalization constant, 0 -> 0.25*epsilon1
    std::vector<double> radii_ladder;  // mass/detection radii; empty -> default ladder
    double window_radius = 0.95;       // mass window around a bubble point
    double neck_rho0 = 0.8;            // neck outer radius rho_j = min(window, rho0/rank)
    double fill_radius = 0.12;         // base-map fill disks around bubble points
    int max_depth = 0;                 // 0 -> ceil(limit energy / c0)
    FlowConfig fill_flow;              // solver used for base-map fills

    double c0_value() const { return c0 > 0.0 ? c0 : 0.25 * epsilon1; }
    std::vector<double> ladder() const {
        return radii_ladder.empty() ? std::vector<double>{0.08, 0.12, 0.18, 0.27, 0.40}
                                    : radii_ladder;
    }
};

struct ConcentrationPoint {
    int chart = 0;
    cd p;
    double mass = 0.0;
    double fit_residual = 0.0;
};

struct ConcentrationReport {
    std::vector<ConcentrationPoint> points;
    double background_density = 0.0;  // tail density estimate away from the points
    int merged = 0;                   // candidates merged for being < 2 cells apart
};

/// Concentration detection over a family ordered by increasing parameter.
/// Throws NoFamily for families with fewer than 3 members.
ConcentrationReport detect_concentration(const std::vector<MapState>& family,
                                         const BubbleConfig& cfg);

/// Total energy of a family member with sub-grid concentrations resolved
/// (oversampled quadrature plus exact polar corrections at density peaks).
double member_energy_refined(const MapState& m);

/// Literal (D-1) scale: sup { r <= 1/k : int_{B_2r(p)} e0(base) <= mass/(32 k^2) }.
double scale_r_literal(const MapState& base, int chart, cd p, double mass, int k);

/// Energy center of mass over B_R(p) of a nonnegative density. ZeroEnergyRegion
/// when the window carries no energy.
cd center_of_mass(const DomainChart& c, const Grid2D<double>& density, cd p, double R);

/// (D-8) bisection: largest mu with annulus energy >= C0 inside B_R(x_tilde).
/// Throws EnergyBelowC0 when even mu = 0 fails.
double scale_mu(const DomainChart& c, const Grid2D<double>& density, cd x_tilde, double R,
                double C0);

/// Tail-limit base map: Richardson extrapolation of the last two members plus a
/// Dirichlet-flow fill on disks around the bubble points.
MapState estimate_base_map(const std::vector<MapState>& family,
                           const std::vector<ConcentrationPoint>& points,
                           const BubbleConfig& cfg);

/// Renormalized sphere map y -> f(x_tilde + mu y) (southern stereographic chart),
/// exact when the member carries a closed form, high-order interpolation otherwise.
MapState renormalize(const MapState& member, int chart, cd x_tilde, double mu,
                     int resample_n = 0);

struct RenormalizationData {
    double k_family = 0.0;
    int rank = 0;            // paper index k: position in the selected family
    cd x_tilde;
    double mu = 0.0;
    double r_window = 0.0;   // mass window radius
    double neck_outer = 0.0; // rho_j, the finite realization of r_k -> 0
    double T = 0.0;          // log(neck_outer / (rank*mu))
    bool d7_ok = false, d9_ok = false;
    double d7_lhs = 0.0, d7_rhs = 0.0, d9_lhs = 0.0, d9_rhs = 0.0;
};

struct NeckDiagnostics {
    double energy = 0.0;      // member energy over the annulus A_k
    double diameter = 0.0;    // image diameter over the annulus
    std::vector<double> loop_t, loop_len;  // gamma_{k,t} ladder, t in [0, T]
    double end_loop_max = 0.0;
};

/// Neck annulus A = B_outer \ B_{rank*mu}(x_tilde); AnnulusTooThin when empty.
NeckDiagnostics neck_diagnostics(const MapState& member, int chart, cd x_tilde, double mu,
                                 int rank, double outer, int t_samples = 9);

struct BubbleTreeNode {
    std::string index;  // "0" for the root, then "1", "11", ...
    MapState map;       // base map (root) or bubble sphere map
    double energy = 0.0;
    double mass_in = 0.0;  // concentrated mass attributed from the parent
    int attach_chart = 0;
    cd attach_point;            // p_I in the parent's domain chart
    TargetPoint south_value;    // bubbles: averaged value near the south pole
    bool has_south = false;
    bool depth_cap_hit = false;
    std::vector<RenormalizationData> renorms;   // per family member (bubbles)
    std::vector<NeckDiagnostics> necks;         // per family member (bubbles)
    std::vector<BubbleTreeNode> children;

    int count_nodes() const {
        int c = 1;
        for (const auto& ch : children) c += ch.count_nodes();
        return c;
    }
    int depth() const {
        int d = 0;
        for (const auto& ch : children) d = std::max(d, 1 + ch.depth());
        return d;
    }
};

BubbleTreeNode build_tree(const std::vector<MapState>& family, const BubbleConfig& cfg);

struct EnergyIdentityReport {
    double family_limit = 0.0;
    double base_energy = 0.0;
    double bubble_sum = 0.0;
    double abs_err = 0.0, rel_err = 0.0;
};
EnergyIdentityReport energy_identity_check(const BubbleTreeNode& tree,
                                           const std::vector<MapState>& family);

/// Max over tree edges of dist(f_{p_I}(s), f_{p_{I'}}(p_I)).
double distance_bubbling_check(const BubbleTreeNode& tree);

struct MassAccountRow {
    std::string index;
    double mass_in = 0.0, node_energy = 0.0, children_mass = 0.0;
    double rel_err = 0.0;
};
std::vector<MassAccountRow> mass_accounting(const BubbleTreeNode& tree);

}  // namespace chernlab

#endif
