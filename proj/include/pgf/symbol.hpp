#pragma once

#include <span>
#include <vector>

#include "pgf/field.hpp"

namespace pgf {

/// Isotropic complex frequency zeta in C^n (zeta . zeta = 0) together with
/// s = |zeta|/sqrt(2) and the rotation R taking it to the canonical form
/// s e1 - i s e2. All symbol-geometry evaluators work in the canonical
/// (rotated) coordinates.
struct ZetaVector {
    std::vector<cd> raw;
    double s = 0.0;
    std::vector<double> rotation;  // row-major n x n, R * raw = s e1 - i s e2
    int n = 0;

    std::vector<double> to_canonical(std::span<const double> xi_raw) const;
    std::vector<double> from_canonical(std::span<const double> xi_can) const;
    bool rotation_is_identity(double tol = 1e-14) const;
};

/// Validates zeta . zeta = 0 (to tol * |zeta|^2) and builds the rotation by
/// orthonormalizing (Re zeta, -Im zeta) into the first two axes and
/// completing the frame with smallest-index coordinate vectors.
ZetaVector canonicalize(std::span<const cd> zeta_raw, double tol = 1e-12);

/// Convenience: the canonical zeta = s e1 - i s e2 in dimension n.
ZetaVector canonical_zeta(double s, int n);

/// p_zeta in canonical coordinates: |xi - s e2|^2 - s^2 - 2 i s xi_1.
cd eval_symbol(const ZetaVector& zeta, std::span<const double> xi);

/// Exact Euclidean distance to the characteristic sphere
/// Sigma_zeta = {xi_1 = 0, |xi' - s e2| = s}: sqrt(xi_1^2 + (|xi'-s e2|-s)^2).
double dist_to_char_set(const ZetaVector& zeta, std::span<const double> xi);

struct SymbolBoundsReport {
    int checked_far = 0;       // samples with |xi| >= 4 |zeta|
    int checked_near = 0;      // samples with |xi| <= M |zeta|
    int skipped = 0;           // degenerate (on Sigma) samples
    int violations = 0;        // hard 1/2, 3/2 bound failures
    double ratio_min = 0.0;    // empirical range of |p| / (s d)
    double ratio_max = 0.0;
    std::vector<double> first_violation;  // offending xi, empty if none
};

/// Far regime: asserts |xi|^2/2 <= |p_zeta(xi)| <= 3|xi|^2/2 for
/// |xi| >= 4|zeta|. Near regime (|xi| <= M|zeta|): records the empirical
/// bracket of |p_zeta| / (s * dist).
SymbolBoundsReport check_symbol_bounds(const ZetaVector& zeta,
                                       const std::vector<std::vector<double>>& samples,
                                       double M = 4.0);

/// Smooth partition of unity subordinate to the cover {far zone} and
/// {V_{j,+-}(s)}: chi_1 + sum_{j,+-} chi_{j,+-} = 1 exactly, chi_1 = 0 on the
/// s/(2n)-neighborhood of Sigma. Built at s = 1 from smoothstep-mollified
/// indicators with transition width 1/(8n) and rescaled via xi -> xi/s.
struct PartitionOfUnity {
    double s = 1.0;
    int n = 0;

    double chi1(std::span<const double> xi) const;
    /// j in 2..n, sign = +1 or -1; xi in canonical coordinates.
    double chi(int j, int sign, std::span<const double> xi) const;
    /// Sum over all chart pieces (1 - chi1).
    double chi_charts(std::span<const double> xi) const;

    /// Evaluate chi1 and every chart piece in one pass; pieces has size
    /// 2(n-1), indexed (j-2)*2 + (sign < 0 ? 1 : 0).
    void eval_all(std::span<const double> xi, double& chi1_out,
                  std::span<double> pieces) const;
};

PartitionOfUnity build_partition(const ZetaVector& zeta, int n);

/// Chart coordinates Phi^{(j,+-)}(s): eta_1 = -2 xi_1,
/// eta_j = (|xi - s e2|^2 - s^2)/s, eta_l = xi_l otherwise; defined on
/// V_{j,+-}(s) = {+-(xi_j - s delta_{j2}) > s/(2n)}.
struct Diffeo {
    int j = 2;      // 2..n
    int sign = +1;  // +1 or -1
    double s = 1.0;
    int n = 0;

    /// The chart-defining coordinate xi_j - s delta_{j2}.
    double chart_coord(std::span<const double> xi) const;
    bool in_domain(std::span<const double> xi) const;

    std::vector<double> forward(std::span<const double> xi) const;
    std::vector<double> inverse(std::span<const double> eta) const;
    double jacobian(std::span<const double> xi) const;
};

Diffeo make_diffeo(int j, int sign, double s, int n);

} // namespace pgf
