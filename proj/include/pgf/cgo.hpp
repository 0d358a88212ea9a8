#pragma once

#include <span>
#include <vector>

#include "pgf/green.hpp"

namespace pgf {

/// A compactly supported potential with the cached symmetric factorization
/// q = d1 d2, d1 = |q|^{1/2}, d2 = q/|q|^{1/2} (both zero where q vanishes).
struct Potential {
    ComplexField q;
    ComplexField d1;
    ComplexField d2;

    /// Validates the support margin (q must vanish within `margin_cells`
    /// cells of the box boundary) and builds the factorization.
    explicit Potential(ComplexField q_in, int margin_cells = 4);
};

/// Pointwise truncation d_{j,tau} = d_j where |d_j| <= tau, else 0.
struct TruncationScheme {
    double tau = 0.0;
    ComplexField d1_tau;
    ComplexField d2_tau;
};

TruncationScheme make_truncation(const Potential& pot, double tau);

/// Smallest tau (over the grid's attained |d1| levels) with
/// ||d_j - d_{j,tau}||_{n/m} <= 0.05 ||d_j||_{n/m}.
double default_tau(const Potential& pot, int m);

struct CGOSolution {
    ZetaVector zeta;
    ComplexField v;  // Neumann-series solution of (I + d2 G d1) v = -d2
    ComplexField r;  // remainder, r = G(d1 v)
    int iterations = 0;
    std::vector<double> update_history;  // relative L2 update per iteration
    double contraction_factor = 0.0;     // last ratio of successive updates
    double eq_residual = 0.0;   // ||P^m r + q(1+r)||_{2n/(n+2m)} / ||q||_{2n/(n+2m)}
    double r_norm_lp = 0.0;     // ||r||_{2n/(n-2m)}
    double r_norm_l2K = 0.0;    // ||r||_{L2(K)}, K the central half-width box
    bool low_s_flagged = false;  // |zeta|/sqrt(2) below s_min
};

/// Fixed-point construction of the CGO remainder: v <- -d2 - d2 G(d1 v)
/// until the relative L2 update drops below tol. Throws SeriesDiverged
/// (carrying the observed factor) after 5 consecutive non-contracting
/// iterations.
CGOSolution build_cgo(const Potential& pot, const ZetaVector& zeta,
                      const GreenOperator& G, double tol = 1e-8,
                      int max_iter = 200, double s_min = 2.0);

struct OperatorNormSweep {
    std::vector<double> s_values;
    std::vector<double> norms;  // ||d2 G d1||_{L2->L2} estimates
    double slope = 0.0;         // log-log least-squares slope
};

/// Power iteration on (d2 G d1)^* (d2 G d1), deterministic start.
OperatorNormSweep probe_operator_norm(const Potential& pot,
                                      std::span<const double> s_list, int m,
                                      GreenBackend backend,
                                      bool allow_unsafe = false,
                                      int iterations = 30);

struct RegularityReport {
    double hm_seminorm = 0.0;  // discrete H^m seminorm of u on the sub-box
    double qu_norm = 0.0;      // ||q u||_{2n/(n+2m)}
};

/// H^m regularity probe for u = e^{x.zeta}(1+r) on the centered sub-box of
/// the given half-width: derivatives act on r spectrally and on the
/// exponential analytically, so no periodicity error enters.
RegularityReport check_regularity(const Potential& pot, const CGOSolution& sol,
                                  int m, double box_half_width);

} // namespace pgf
