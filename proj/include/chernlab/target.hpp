#ifndef CHERNLAB_TARGET_HPP
#define CHERNLAB_TARGET_HPP

#include "chernlab/core.hpp"

#include <array>

namespace chernlab {

enum class TargetId { FlatC2, FSProduct, Hopf };

TargetId target_from_string(const std::string& s);
std::string to_string(TargetId id);

/// A point of the target together with the chart it is expressed in.
///
/// Chart conventions:
///   FlatC2    : single chart 0, coordinates = the point.
///   FSProduct : chart = bit0 + 2*bit1; bit_i set means factor i stored in the
///               inverted chart (true projective value w = 1/v).
///   Hopf      : chart = signed scale level m; the point of C^2\{0} is v * 2^m.
///               The quotient by z ~ 2z makes all levels equivalent.
struct TargetPoint {
    cd z1{}, z2{};
    int chart = 0;
    cd operator[](int i) const { return i == 0 ? z1 : z2; }
    cd& operator[](int i) { return i == 0 ? z1 : z2; }
};

/// Jet of the (diagonal) Hermitian metric h = diag(h_0, h_1) at a point.
struct MetricJet {
    double h[2];      // h_i > 0
    cd dh[2][2];      // dh[i][k]      = d_k h_i
    cd ddh[2][2][2];  // ddh[i][k][l]  = d_k d_l h_i      (symmetric in k,l)
    cd dmh[2][2][2];  // dmh[i][k][l]  = d_k dbar_l h_i   (Hermitian in k,l)
};

/// Chern connection data at a point, in coordinates and in the unitary frame.
/// The unitary coframe is omega^a = c_a dz^a with c_a = sqrt(h_a) (diagonal metrics).
struct ConnectionData {
    cd gamma[2][2][2];  // gamma[i][j][k] = Gamma^i_{jk}  (nabla_k dz_j direction dz_i)
    double c[2];        // coframe diagonal c_a
    cd w10[2][2][2];    // w10[b][a][k]: dz^k  coefficient of omega^a_b
    cd w01[2][2][2];    // w01[b][a][k]: dzb^k coefficient of omega^a_b
};

/// Torsion coefficients L^a_{bc} in the unitary frame plus covariant derivatives.
struct TorsionJet {
    cd L[2][2][2];       // L[a][b][c] = L^a_{bc}, antisymmetric in (b,c)
    cd L1[2][2][2][2];   // L1[a][b][c][d]  = L^a_{bc;d}
    cd L1b[2][2][2][2];  // L1b[a][b][c][d] = L^a_{bc;dbar}
};

/// Curvature of the Chern connection in the unitary frame.
/// R_hol (omega^k ^ omega^l) and R_anti blocks vanish identically for Chern
/// connections (curvature is (1,1)); they are kept so contractions can be
/// written against the full decomposition.
struct CurvatureTensor {
    cd Rm[2][2][2][2];    // Rm[a][b][p][q] = R^a_{b p qbar}
    cd Rhol[2][2][2][2];  // R^a_{bpq},  zero
    cd Ranti[2][2][2][2]; // R^a_{b pbar qbar}, zero
};

class HermitianTarget {
public:
    explicit HermitianTarget(TargetId id, bool self_test = false);

    TargetId id() const { return id_; }
    bool kaehler() const { return id_ != TargetId::Hopf; }

    /// Diagonal metric jet. Throws SingularMetric / OutOfChart on bad points.
    MetricJet metric(const TargetPoint& p) const;

    ConnectionData chern_connection(const TargetPoint& p) const;
    TorsionJet torsion(const TargetPoint& p) const;        // L only, jets zeroed
    TorsionJet torsion_jet(const TargetPoint& p) const;    // L, L1, L1b
    CurvatureTensor curvature(const TargetPoint& p) const;

    /// Re-express p in chart `to_chart`. Throws NotInOverlap when impossible.
    TargetPoint transition(const TargetPoint& p, int to_chart) const;

    /// Canonical chart for a point (FSProduct: |v_i| <= 1 charts; Hopf: 1 <= |z| < 2).
    TargetPoint normalize(const TargetPoint& p) const;

    /// Components of a tangent vector change under chart transition A -> B
    /// (unitary-frame components). Returns the rotated vector at the same point.
    std::array<cd, 2> rotate_frame_vector(const TargetPoint& from, int to_chart,
                                          const std::array<cd, 2>& v_unitary) const;

    /// Diagonal Jacobian factors of the holomorphic transition from p.chart to
    /// to_chart, evaluated at p (coordinate-frame components).
    std::array<cd, 2> transition_jacobian(const TargetPoint& p, int to_chart) const;

    /// Chord distance between two points, weighted by the metric at the segment
    /// midpoint; points are brought into a common chart first.
    double chord_distance(const TargetPoint& a, const TargetPoint& b) const;

    /// Checks closed-form jets against centered finite differences; throws on failure.
    void validate_jets() const;

private:
    TargetId id_;
    MetricJet metric_raw(const TargetPoint& p) const;
};

}  // namespace chernlab

#endif
