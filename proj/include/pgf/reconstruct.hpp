#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "pgf/cgo.hpp"
#include "pgf/forward.hpp"

namespace pgf {

/// Frequency-splitting frame: zeta1 = s eta1 + i(xi/2 + r eta2),
/// zeta2 = -s eta1 - i(xi/2 - r eta2) with |xi|^2/4 + r^2 = s^2, so that
/// zeta_j . zeta_j = 0, zeta1 + conj(zeta2) = i xi and |zeta_j| = sqrt(2) s.
struct ZetaFrame {
    std::vector<double> xi;
    double s = 0.0;
    double r = 0.0;
    std::vector<double> eta1;  // unit, orthogonal to xi and eta2
    std::vector<double> eta2;
    ZetaVector zeta1;
    ZetaVector zeta2;
};

/// Deterministic frame construction: eta1, eta2 are produced by Gram-Schmidt
/// of the smallest-index coordinate vectors against xi/|xi| (for xi = 0, the
/// first two coordinate vectors). Throws FrameInfeasible when s < |xi|/2 and
/// ContractViolation for n < 3 or s <= 0.
ZetaFrame build_frame(std::span<const double> xi, double s, int n);

/// One Fourier coefficient of q_a - q_b probed through the frame's CGO pair:
/// u1 = e^{x.zeta1}(1 + r1) built under q_a, u2 = e^{x.zeta2}(1 + r2) built
/// under conj(q_b), so u1 conj(u2) = e^{i xi.x}(1 + r1)(1 + conj(r2)).
struct Extraction {
    cd qhat_born;       // int (q_a - q_b) u1 conj(u2) dx (Born value)
    cd correction;      // int (q_a - q_b) e^{i xi.x}(r1 + conj(r2) + r1 conj(r2)) dx
    cd qhat_corrected;  // born - correction = exact grid Fourier integral
    double r1_norm = 0.0;  // ||r1||_{2n/(n-2m)}
    double r2_norm = 0.0;
    double s = 0.0;
};

/// Oracle-mode extraction by volume integrals on the shared grid of the two
/// potentials (q_b is typically the zero reference). Requires n > 2m.
Extraction extract_fourier_coefficient(const Potential& q_a, const Potential& q_b,
                                       const ZetaFrame& frame, int m,
                                       GreenBackend backend, double tol = 1e-8);

/// Lift-basis coefficients projecting the traces of e^{x.zeta} on the
/// Galerkin box (L^2 projection per face and derivative order; the
/// tangential profile family is orthonormal).
Eigen::VectorXcd project_exponential_trace(const GalerkinBasis& basis,
                                           const ZetaVector& zeta);

/// Boundary-mode Born value: beta^H (Lambda_q - Lambda_0) alpha with alpha,
/// beta the projected traces of e^{x.zeta1} and e^{x.zeta2}.
cd born_pairing(const DNMap& dn, const DNMap& dn0, const GalerkinBasis& basis,
                const ZetaFrame& frame);

/// Per-frequency diagnostics of a reconstruction run.
struct ReconstructionRow {
    std::vector<double> xi;
    double s_used = 0.0;     // largest feasible schedule entry (0 if none)
    bool feasible = true;
    double correction_mag = 0.0;  // |correction| (oracle mode)
    double r1_norm = 0.0;
};

struct ReconstructionResult {
    GridSpec grid;                 // sampling grid (frequencies and output)
    std::vector<cd> qhat;          // Born q-hat per grid mode, 0 outside band
    std::vector<cd> qhat_truth;    // oracle mode: exact grid Fourier integrals
    std::vector<unsigned char> in_band;  // band-mask per grid mode
    ComplexField q_rec;            // band-limited synthesis of qhat
    std::vector<ReconstructionRow> rows;
    double max_imag = 0.0;  // max |Im q_rec| after synthesis
    bool symmetry_enforced = false;
};

/// Oracle-mode reconstruction on the grid of q_true: samples the Born q-hat
/// at every grid frequency with |xi| <= xi_cutoff using the largest feasible
/// s in the schedule, optionally enforces conjugate symmetry (real q), and
/// synthesizes the band-limited field. FrameInfeasible frequencies are
/// marked missing, not fatal. Requires n > 2m.
ReconstructionResult reconstruct(const Potential& q_true, double xi_cutoff,
                                 std::span<const double> s_schedule, int m,
                                 GreenBackend backend,
                                 bool conjugate_symmetry = true,
                                 double tol = 1e-8);

/// Boundary-mode reconstruction from two DN maps sharing the basis: Born
/// values from born_pairing on the frequency lattice of out_grid.
ReconstructionResult reconstruct(const DNMap& dn, const DNMap& dn0,
                                 const GalerkinBasis& basis,
                                 const GridSpec& out_grid, double xi_cutoff,
                                 std::span<const double> s_schedule,
                                 bool conjugate_symmetry = true);

/// Relative l2 error of the Born band against the oracle truth band.
double band_relative_error(const ReconstructionResult& result);

} // namespace pgf
