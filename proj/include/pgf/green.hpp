#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pgf/field.hpp"
#include "pgf/symbol.hpp"

namespace pgf {

enum class GreenBackend { naive, paper };

/// The convolution operator G_zeta^{(m)} realized as a Fourier multiplier,
/// immutable after assembly.
///
/// naive: 1/p_zeta^m tabulated on the Sigma_zeta-avoiding half-offset
/// frequency grid (offset_axis >= 0). Valid for m = 1; an unsafe reference
/// for m >= 2 where 1/p^m is not locally integrable.
///
/// paper: chi_1/p^m plus, per chart (j,+-), the regularized kernel
/// 1/(s^m (eta_j + i eta_1)^m) realized as an exact cell average over the
/// local image cell of the chart map (the finite-part regularization of the
/// chart kernel), weighted by chi_{j,+-}. Tabulated on the standard grid.
struct GreenOperator {
    ZetaVector zeta;
    int m = 1;
    GridSpec grid;
    GreenBackend backend = GreenBackend::naive;
    int offset_axis = -1;        // naive only; -1 for the paper backend
    double mollify = 1.0;        // chart cell-size factor (paper backend)
    std::vector<cd> multiplier;  // flat slot order
};

GreenOperator assemble_green(const ZetaVector& zeta, int m, const GridSpec& grid,
                             GreenBackend backend, bool allow_unsafe = false,
                             double mollify = 1.0);

/// w = G f (physical in, physical out).
ComplexField apply_green(const GreenOperator& G, const ComplexField& f);

/// Adjoint in the discrete L^2 inner product (conjugated multiplier).
ComplexField apply_green_adjoint(const GreenOperator& G, const ComplexField& f);

/// || (-Delta - 2 zeta.grad)^m (G f) - f ||_2 / ||f||_2.
double verify_fundamental(const GreenOperator& G, const ComplexField& f);

struct DecaySweep {
    std::vector<double> s_values;
    std::vector<double> norms;  // ||G_{zeta(s)} f||_{L^2_sigma}
    double slope = 0.0;         // least-squares slope of log norm vs log s
};

/// Weighted-decay sweep of ||G_{zeta(s)} f||_{L^2_sigma} along the s-list;
/// requires -m < sigma < 1-m.
DecaySweep probe_weighted_decay(std::span<const double> s_list, const ComplexField& f,
                                double sigma, int m, GreenBackend backend,
                                bool allow_unsafe = false);

struct LpSweep {
    std::vector<double> s_values;
    std::vector<double> ratios;  // ||G f||_{2n/(n-2m)} / ||f||_{2n/(n+2m)}
    double max_over_min = 0.0;
    bool skipped_zero_input = false;
};

/// L^p uniformity sweep; requires n > 2m. The exponent
/// pair (2n/(n+2m), 2n/(n-2m)) is exactly invariant under f -> f(lambda x),
/// zeta -> lambda zeta, so uniformity in zeta is probed with an input family
/// that follows that scaling; for a FIXED f the ratio legitimately decays
/// (the estimate is an upper bound only).
LpSweep probe_lp_bound(std::span<const double> s_list,
                       const std::function<ComplexField(double)>& input_family,
                       int n, int m, GreenBackend backend,
                       bool allow_unsafe = false);

/// Fixed-input convenience overload (reporting; the uniformity contract
/// applies to the scaled-family form).
LpSweep probe_lp_bound(std::span<const double> s_list, const ComplexField& f, int m,
                       GreenBackend backend, bool allow_unsafe = false);

/// Exact integral of (x + i y)^{-m} over the rectangle [x0,x1] x [y0,y1]
/// (iterated improper integral; principal branch, cells split at the
/// negative-real-axis cut). The rectangle must not have the origin on its
/// boundary.
cd rect_integral_inv_zm(int m, double x0, double x1, double y0, double y1);

/// Average of 1/(s (eta_j + i eta_1))^m over a cell of widths (hj, h1)
/// centered at the chart point.
cd chart_cell_average(int m, double s, double eta1, double etaj, double h1, double hj);

/// Action of the chart kernel E_zeta^{(m,j)} on a test function phi(eta_1,
/// eta_j) via the derivative-transfer quadrature: cell-averaged 1/(eta_j +
/// i eta_1) against the (m-1)-fold finite-difference eta_j derivative of phi,
/// scaled by 1/(s^m (m-1)!).
cd chart_kernel_action(int m, double s,
                       const std::function<cd(double, double)>& phi,
                       int npts = 256, double extent = 4.0);

/// Checks s^m (eta_j + i eta_1)^m E_zeta^{(m,j)} = 1 against the direct
/// quadrature of each phi; returns the max relative error.
double verify_chart_kernel(int m, int j, double s,
                           const std::vector<std::function<cd(double, double)>>& phis,
                           int npts = 256, double extent = 4.0);

} // namespace pgf
