#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "pgf/field.hpp"

namespace pgf {

/// H^m_0-conforming tensor Galerkin basis on the box [-a,a]^n.
///
/// Interior functions are tensor products of (1-t^2)^m T_k(t) (Chebyshev
/// polynomials damped to vanish to order m at both endpoints). Lift
/// functions realize one normal-derivative order d in 0..m-1 on one face
/// (with the complementary orders zero on that face, and vanishing to order
/// m on the opposite face) times a tangential product of damped Chebyshev
/// profiles; the tangential damping keeps the lifts on different faces
/// linearly independent (boundary data is supported away from edges). Every
/// basis function is a pure tensor product, so principal-form Gram matrices
/// reduce to 1-D integrals.
struct GalerkinBasis {
    int n = 3;
    int m = 1;
    double a = 1.0;  // box half-width
    int K = 4;       // interior modes per axis
    int Kt = 3;      // tangential trace modes per axis
    int nq = 0;      // quadrature nodes per axis

    // 1-D quadrature on [-a, a].
    std::vector<double> qnodes;
    std::vector<double> qweights;

    // Profile catalog: every 1-D factor used by any basis function.
    // values[p][d][i] = d-th derivative of profile p at qnodes[i], d <= m.
    std::vector<std::vector<std::vector<double>>> profiles;

    // Basis table: function b has per-axis profile indices axis_profile[b].
    std::vector<std::vector<int>> axis_profile;

    // Triangular coefficients orthonormalizing the damped Chebyshev family
    // in L^2(-a, a); row k holds the combination over raw profiles 0..k.
    // Keeps the interior mass matrix near identity so conditioning reflects
    // the operator, not the basis.
    std::vector<std::vector<double>> interior_mix;

    int interior_size = 0;  // K^n, listed first
    int trace_size = 0;     // 2n * m * Kt^(n-1)
    int total_size() const { return interior_size + trace_size; }

    /// Value of basis function b at a point (for diagnostics/tests); uses
    /// the analytic profile definitions, not the tables.
    double eval(int b, std::span<const double> x, std::span<const int> deriv) const;

    // Analytic 1-D profile evaluation (profile index p, derivative d).
    double eval_profile(int p, int d, double t) const;
};

/// Builds the basis; nq defaults (nq = 0) to 2(max(K, Kt) + 2m) + 4 nodes
/// per axis.
GalerkinBasis make_basis(int n, int m, double a, int K, int Kt, int nq = 0);

/// Gram matrices of the sesquilinear form over [interior | lift] ordering:
/// a(u, v) = u^* (A_principal + A_potential) v with
/// A_principal = sum_{|alpha|=m} (m!/alpha!) <D^alpha u, D^alpha v> and
/// A_potential = <q u, v>.
struct FormMatrices {
    Eigen::MatrixXcd principal;
    Eigen::MatrixXcd potential;
    int interior_size = 0;
    int trace_size = 0;
};

using PotentialFn = std::function<cd(std::span<const double>)>;

/// q may be empty (zero potential). Throws on quadrature underresolution
/// detected by a non-positive-definite interior mass matrix.
FormMatrices assemble_form(const GalerkinBasis& basis, const PotentialFn& q);

/// Multilinear interpolant of a grid-sampled potential, for use as a
/// PotentialFn in the forward solver.
PotentialFn field_interpolant(const ComplexField& f);

/// Smallest singular value of the interior block of principal + potential;
/// near-singularity (< 1e-8 relative to the largest singular value) is the
/// assumption-(A) failure regime.
struct AssumptionAReport {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    bool flagged = false;
};
AssumptionAReport check_assumption_A(const FormMatrices& mats);

/// Interior coefficients of the Dirichlet solution u = v + w for the lift
/// w given by trace coefficients (over the lift basis). Throws
/// AssumptionAViolated when the interior block is numerically singular.
Eigen::VectorXcd solve_dirichlet(const FormMatrices& mats,
                                 const Eigen::VectorXcd& trace);

struct DNMap {
    Eigen::MatrixXcd lambda;  // trace_size x trace_size
    int n = 0;
    int m = 0;
    double a = 0.0;
    int Kt = 0;
};

/// Schur complement Lambda = A_LL - A_LI A_II^{-1} A_IL of the full form
/// matrix; <Lambda f, h-bar> = a(u_f, w_h) for any lift w_h of h.
DNMap assemble_dn_map(const FormMatrices& mats, const GalerkinBasis& basis);

/// Max deviation of a(u_f, w_h + z) from a(u_f, w_h) over random interior
/// perturbations z of the lift (extension independence; analytically zero).
double verify_extension_independence(const FormMatrices& mats, int trials = 4,
                                     unsigned seed = 7);

/// Both sides of the DN-difference integral identity: given traces alpha
/// (for u1, potential
/// q1) and beta (for u2, potential conj(q2)), compares
/// <(Lambda_{q1} - Lambda_{q2}) alpha, beta-bar> with
/// int (q1 - q2) u1 conj(u2). Returns the relative residual.
struct IdentityCheck {
    cd pairing;   // DN-difference side
    cd integral;  // volume side
    double residual = 0.0;
};
IdentityCheck integral_identity_check(const GalerkinBasis& basis,
                                      const PotentialFn& q1, const PotentialFn& q2,
                                      const Eigen::VectorXcd& alpha,
                                      const Eigen::VectorXcd& beta);

} // namespace pgf
