#include "pgf/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pgf {

namespace {

/// Principal log with an explicit branch side for points on the cut
/// (y = 0, x < 0): side = +-1 selects log|x| +- i pi.
cd lg(double x, double y, int side) {
    if (y == 0.0) {
        if (x < 0.0) return cd(std::log(-x), side * std::numbers::pi);
        return cd(std::log(x), 0.0);
    }
    return std::log(cd(x, y));
}

/// Corner antiderivatives of the iterated integral of z^{-m}, z = x + i y.
cd corner_term(int m, double x, double y, int side) {
    const cd z(x, y);
    if (m == 1) return -cd(0, 1) * z * (lg(x, y, side) - 1.0);
    if (m == 2) return cd(0, 1) * lg(x, y, side);
    const double denom = static_cast<double>((1 - m) * (2 - m));
    return -cd(0, 1) * std::pow(z, 2 - m) / denom;
}

cd rect_no_split(int m, double x0, double x1, double y0, double y1) {
    auto C = [&](double x, double y, int side) { return corner_term(m, x, y, side); };
    // Sides matter only on the cut; an edge at y = 0 is approached from the
    // interior of the rectangle.
    const int side_bottom = (y1 > 0.0) ? +1 : -1;
    const int side_top = (y0 < 0.0) ? -1 : +1;
    return C(x1, y1, side_top) - C(x0, y1, side_top) - C(x1, y0, side_bottom) +
           C(x0, y0, side_bottom);
}

} // namespace

cd rect_integral_inv_zm(int m, double x0, double x1, double y0, double y1) {
    if (m < 1) throw ContractViolation("rect_integral_inv_zm: m must be >= 1");
    if (!(x0 < x1 && y0 < y1))
        throw ContractViolation("rect_integral_inv_zm: empty rectangle");
    const bool x_hits = (x0 <= 0.0 && 0.0 <= x1);
    const bool y_hits = (y0 <= 0.0 && 0.0 <= y1);
    if ((x0 == 0.0 || x1 == 0.0) && y_hits)
        throw ContractViolation("rect_integral_inv_zm: origin on the boundary");
    if ((y0 == 0.0 || y1 == 0.0) && x_hits)
        throw ContractViolation("rect_integral_inv_zm: origin on the boundary");
    if (m <= 2 && x0 < 0.0 && y0 < 0.0 && y1 > 0.0) {
        // The vertical antiderivative paths cross the branch cut; split at
        // y = 0 and use one-sided limits of the log there.
        return rect_no_split(m, x0, x1, y0, 0.0) + rect_no_split(m, x0, x1, 0.0, y1);
    }
    return rect_no_split(m, x0, x1, y0, y1);
}

cd chart_cell_average(int m, double s, double eta1, double etaj, double h1, double hj) {
    if (!(h1 > 0.0 && hj > 0.0))
        throw ContractViolation("chart_cell_average: cell widths must be positive");
    double x0 = etaj - 0.5 * hj, x1 = etaj + 0.5 * hj;
    double y0 = eta1 - 0.5 * h1, y1 = eta1 + 0.5 * h1;
    // Nudge edges that land exactly on the origin's coordinate lines.
    const double ex = 1e-3 * hj, ey = 1e-3 * h1;
    if (x0 == 0.0) x0 -= ex;
    if (x1 == 0.0) x1 += ex;
    if (y0 == 0.0) y0 -= ey;
    if (y1 == 0.0) y1 += ey;
    const cd I = rect_integral_inv_zm(m, x0, x1, y0, y1);
    return I / ((x1 - x0) * (y1 - y0) * std::pow(s, m));
}

namespace {

/// Assemble the naive multiplier 1/p^m on the half-offset grid, choosing the
/// offset axis that keeps |p| farthest from zero.
void assemble_naive(GreenOperator& G) {
    const GridSpec& g = G.grid;
    const int N = g.points_per_axis;
    int best_axis = -1;
    double best_min = -1.0;
    std::vector<double> xi(g.n);
    for (int axis = 0; axis < g.n; ++axis) {
        std::vector<std::vector<double>> freq(g.n, std::vector<double>(N));
        for (int a = 0; a < g.n; ++a)
            for (int k = 0; k < N; ++k) freq[a][k] = g.frequency(k, a == axis);
        double mn = std::numeric_limits<double>::infinity();
        for_each_index(g, [&](std::span<const int> idx, std::size_t) {
            for (int a = 0; a < g.n; ++a) xi[a] = freq[a][idx[a]];
            mn = std::min(mn, std::abs(symbol_p(G.zeta.raw, xi)));
        });
        if (mn > best_min) {
            best_min = mn;
            best_axis = axis;
        }
    }
    if (!(best_min > 0.0))
        throw NumericalFailure(
            "assemble_green: symbol vanishes on every offset grid");
    G.offset_axis = best_axis;

    std::vector<std::vector<double>> freq(g.n, std::vector<double>(N));
    for (int a = 0; a < g.n; ++a)
        for (int k = 0; k < N; ++k) freq[a][k] = g.frequency(k, a == G.offset_axis);
    G.multiplier.resize(g.total_points());
    for_each_index(g, [&](std::span<const int> idx, std::size_t flat) {
        for (int a = 0; a < g.n; ++a) xi[a] = freq[a][idx[a]];
        const cd p = symbol_p(G.zeta.raw, xi);
        cd pm(1.0, 0.0);
        for (int k = 0; k < G.m; ++k) pm *= p;
        G.multiplier[flat] = 1.0 / pm;
        if (!std::isfinite(G.multiplier[flat].real()) ||
            !std::isfinite(G.multiplier[flat].imag()))
            throw NumericalFailure("assemble_green: non-finite naive multiplier");
    });
}

/// Assemble the paper multiplier chi_1/p^m + sum of chart-kernel terms on the
/// standard grid.
void assemble_paper(GreenOperator& G) {
    const GridSpec& g = G.grid;
    const int N = g.points_per_axis;
    const int n = g.n;
    const double s = G.zeta.s;
    const double dxi = g.freq_spacing();
    const PartitionOfUnity part = build_partition(G.zeta, n);
    const bool rotate = !G.zeta.rotation_is_identity();

    std::vector<std::vector<double>> freq(n, std::vector<double>(N));
    for (int a = 0; a < n; ++a)
        for (int k = 0; k < N; ++k) freq[a][k] = g.frequency(k, false);

    G.offset_axis = -1;
    G.multiplier.resize(g.total_points());
    std::vector<double> xi_raw(n), xic(n);
    std::vector<double> pieces(2 * (n - 1));
    for_each_index(g, [&](std::span<const int> idx, std::size_t flat) {
        for (int a = 0; a < n; ++a) xi_raw[a] = freq[a][idx[a]];
        if (rotate) {
            auto rot = G.zeta.to_canonical(xi_raw);
            std::copy(rot.begin(), rot.end(), xic.begin());
        } else {
            std::copy(xi_raw.begin(), xi_raw.end(), xic.begin());
        }
        double chi1 = 0.0;
        part.eval_all(xic, chi1, pieces);
        cd value(0.0, 0.0);
        if (chi1 > 0.0) {
            const cd p = eval_symbol(G.zeta, xic);
            cd pm(1.0, 0.0);
            for (int k = 0; k < G.m; ++k) pm *= p;
            value += chi1 / pm;
        }
        // Chart contributions: the pulled-back kernel is a function of
        // (eta_1, eta_j) only, mollified over the local image cell of the
        // chart map so the near-characteristic finite part is resolved.
        double shifted2 = xic[0] * xic[0];
        for (int a = 1; a < n; ++a) {
            const double c = (a == 1) ? xic[a] - s : xic[a];
            shifted2 += c * c;
        }
        const double eta1 = -2.0 * xic[0];
        const double etaj_common = (shifted2 - s * s) / s;
        const double h1 = G.mollify * 2.0 * dxi;
        for (int j = 2; j <= n; ++j) {
            for (int sg : {+1, -1}) {
                const double chi = pieces[(j - 2) * 2 + (sg < 0 ? 1 : 0)];
                if (chi <= 0.0) continue;
                const double cj = (j == 2) ? xic[1] - s : xic[j - 1];
                const double hj = G.mollify * (2.0 * std::abs(cj) / s) * dxi;
                value += chi * chart_cell_average(G.m, s, eta1, etaj_common, h1, hj);
            }
        }
        if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
            throw NumericalFailure("assemble_green: non-finite paper multiplier");
        G.multiplier[flat] = value;
    });
}

} // namespace

GreenOperator assemble_green(const ZetaVector& zeta, int m, const GridSpec& grid,
                             GreenBackend backend, bool allow_unsafe, double mollify) {
    if (zeta.n != grid.n)
        throw ContractViolation("assemble_green: zeta/grid dimension mismatch");
    if (m < 1) throw ContractViolation("assemble_green: m must be >= 1");
    if (backend == GreenBackend::naive && m >= 2 && !allow_unsafe)
        throw NotLocallyIntegrable(
            "assemble_green: 1/p_zeta^m is not locally integrable for m >= 2; "
            "use the paper backend or pass allow_unsafe");
    GreenOperator G;
    G.zeta = zeta;
    G.m = m;
    G.grid = grid;
    G.backend = backend;
    G.mollify = mollify;
    if (backend == GreenBackend::naive)
        assemble_naive(G);
    else
        assemble_paper(G);
    return G;
}

ComplexField apply_green(const GreenOperator& G, const ComplexField& f) {
    if (!(f.grid == G.grid))
        throw ContractViolation("apply_green: grid mismatch");
    return apply_tabulated_multiplier(f, G.multiplier, G.offset_axis);
}

ComplexField apply_green_adjoint(const GreenOperator& G, const ComplexField& f) {
    if (!(f.grid == G.grid))
        throw ContractViolation("apply_green_adjoint: grid mismatch");
    std::vector<cd> conj_mult(G.multiplier.size());
    for (std::size_t i = 0; i < conj_mult.size(); ++i)
        conj_mult[i] = std::conj(G.multiplier[i]);
    return apply_tabulated_multiplier(f, conj_mult, G.offset_axis);
}

double verify_fundamental(const GreenOperator& G, const ComplexField& f) {
    double fn = 0.0;
    for (const auto& v : f.data) fn += std::norm(v);
    if (fn == 0.0) return 0.0;
    ComplexField w = apply_green(G, f);
    ComplexField back = apply_conjugated_op(w, G.zeta.raw, G.m, G.offset_axis);
    return rel_l2_error(back, f);
}

namespace {

double fit_slope(const std::vector<double>& s, const std::vector<double>& vals) {
    const std::size_t k = s.size();
    double mx = 0.0, my = 0.0;
    std::vector<double> x(k), y(k);
    for (std::size_t i = 0; i < k; ++i) {
        x[i] = std::log(s[i]);
        y[i] = std::log(vals[i]);
        mx += x[i];
        my += y[i];
    }
    mx /= k;
    my /= k;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

} // namespace

DecaySweep probe_weighted_decay(std::span<const double> s_list, const ComplexField& f,
                                double sigma, int m, GreenBackend backend,
                                bool allow_unsafe) {
    if (!(-m < sigma && sigma < 1.0 - m))
        throw InvalidSigma("probe_weighted_decay: sigma must lie in (-m, 1-m)");
    if (s_list.size() < 2)
        throw ContractViolation("probe_weighted_decay: need at least two s values");
    DecaySweep sweep;
    for (double s : s_list) {
        const GreenOperator G = assemble_green(canonical_zeta(s, f.grid.n), m, f.grid,
                                               backend, allow_unsafe);
        ComplexField w = apply_green(G, f);
        sweep.s_values.push_back(s);
        sweep.norms.push_back(norm(w, {sigma, 2.0}));
    }
    sweep.slope = fit_slope(sweep.s_values, sweep.norms);
    return sweep;
}

LpSweep probe_lp_bound(std::span<const double> s_list,
                       const std::function<ComplexField(double)>& input_family,
                       int n, int m, GreenBackend backend, bool allow_unsafe) {
    if (n <= 2 * m)
        throw InvalidExponent("probe_lp_bound: requires n > 2m");
    LpSweep sweep;
    const double p_in = 2.0 * n / (n + 2.0 * m);
    const double p_out = 2.0 * n / (n - 2.0 * m);
    for (double s : s_list) {
        const ComplexField f = input_family(s);
        if (f.grid.n != n)
            throw ContractViolation("probe_lp_bound: input dimension mismatch");
        const double fnorm = lp_norm(f, p_in);
        if (fnorm == 0.0) {
            sweep.skipped_zero_input = true;
            return sweep;
        }
        const GreenOperator G = assemble_green(canonical_zeta(s, n), m, f.grid,
                                               backend, allow_unsafe);
        ComplexField w = apply_green(G, f);
        sweep.s_values.push_back(s);
        sweep.ratios.push_back(lp_norm(w, p_out) / fnorm);
    }
    const auto [mn, mx] = std::minmax_element(sweep.ratios.begin(), sweep.ratios.end());
    sweep.max_over_min = *mx / *mn;
    return sweep;
}

LpSweep probe_lp_bound(std::span<const double> s_list, const ComplexField& f, int m,
                       GreenBackend backend, bool allow_unsafe) {
    ComplexField base = f;
    return probe_lp_bound(
        s_list, [&base](double) { return base; }, f.grid.n, m, backend, allow_unsafe);
}

cd chart_kernel_action(int m, double s, const std::function<cd(double, double)>& phi,
                       int npts, double extent) {
    if (m < 1 || npts < 16 || !(extent > 0.0) || !(s > 0.0))
        throw ContractViolation("chart_kernel_action: bad parameters");
    const double h = 2.0 * extent / npts;
    // Cell centers carry an irrational-ish offset so no cell edge passes
    // through the origin of the (eta_1, eta_j) plane.
    auto coord = [&](int i) { return -extent + (i + 0.37) * h; };

    // psi[i1][ij] = phi(eta1_i1, etaj_ij); the kernel acts along eta_j.
    std::vector<std::vector<cd>> psi(npts, std::vector<cd>(npts));
    for (int i1 = 0; i1 < npts; ++i1)
        for (int ij = 0; ij < npts; ++ij) psi[i1][ij] = phi(coord(i1), coord(ij));

    // (m-1)-fold fourth-order central difference along eta_j; test functions
    // are compactly supported inside the box so out-of-range samples are 0.
    for (int rep = 0; rep < m - 1; ++rep) {
        std::vector<std::vector<cd>> d(npts, std::vector<cd>(npts, cd(0, 0)));
        for (int i1 = 0; i1 < npts; ++i1) {
            auto at = [&](int ij) -> cd {
                return (ij < 0 || ij >= npts) ? cd(0, 0) : psi[i1][ij];
            };
            for (int ij = 0; ij < npts; ++ij)
                d[i1][ij] = (-at(ij + 2) + 8.0 * at(ij + 1) - 8.0 * at(ij - 1) +
                             at(ij - 2)) /
                            (12.0 * h);
        }
        psi.swap(d);
    }

    double fact = 1.0;
    for (int k = 2; k < m; ++k) fact *= k;  // (m-1)!
    cd acc(0.0, 0.0);
    for (int i1 = 0; i1 < npts; ++i1) {
        const double y0 = coord(i1) - 0.5 * h, y1 = coord(i1) + 0.5 * h;
        for (int ij = 0; ij < npts; ++ij) {
            const double x0 = coord(ij) - 0.5 * h, x1 = coord(ij) + 0.5 * h;
            // Cell average of 1/(eta_j + i eta_1) times the cell area equals
            // the exact rectangle integral.
            acc += rect_integral_inv_zm(1, x0, x1, y0, y1) * psi[i1][ij];
        }
    }
    return acc / (std::pow(s, m) * fact);
}

double verify_chart_kernel(int m, int j, double s,
                           const std::vector<std::function<cd(double, double)>>& phis,
                           int npts, double extent) {
    if (j < 2) throw ContractViolation("verify_chart_kernel: j must be >= 2");
    const double h = 2.0 * extent / npts;
    auto coord = [&](int i) { return -extent + (i + 0.37) * h; };
    double worst = 0.0;
    for (const auto& phi : phis) {
        // Test function for the identity: s^m (eta_j + i eta_1)^m phi.
        auto scaled = [&](double e1, double ej) {
            cd zm(1.0, 0.0);
            const cd z(ej, e1);
            for (int k = 0; k < m; ++k) zm *= s * z;
            return zm * phi(e1, ej);
        };
        const cd lhs = chart_kernel_action(m, s, scaled, npts, extent);
        cd rhs(0.0, 0.0);
        for (int i1 = 0; i1 < npts; ++i1)
            for (int ij = 0; ij < npts; ++ij) rhs += phi(coord(i1), coord(ij));
        rhs *= h * h;
        if (std::abs(rhs) == 0.0) {
            if (std::abs(lhs) > 1e-12)
                worst = std::max(worst, std::abs(lhs));
            continue;
        }
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    }
    return worst;
}

} // namespace pgf
