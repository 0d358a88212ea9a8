#include "pgf/cgo.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pgf/errors.hpp"

namespace pgf {

namespace {

double l2(const ComplexField& f) { return norm(f, {0.0, 2.0}); }

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Enumerate multi-indices alpha with |alpha| = total in n slots.
void enumerate_multi(int n, int total, std::vector<int>& cur,
                     const std::function<void(std::span<const int>)>& visit) {
    if (static_cast<int>(cur.size()) == n - 1) {
        cur.push_back(total);
        visit(cur);
        cur.pop_back();
        return;
    }
    for (int k = 0; k <= total; ++k) {
        cur.push_back(k);
        enumerate_multi(n, total - k, cur, visit);
        cur.pop_back();
    }
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

} // namespace

Potential::Potential(ComplexField q_in, int margin_cells) : q(std::move(q_in)) {
    if (q.rep != Representation::physical)
        throw ContractViolation("Potential: q must be in physical representation");
    const GridSpec& g = q.grid;
    double maxmag = 0.0;
    for (const cd& value : q.data) maxmag = std::max(maxmag, std::abs(value));
    double margin_mag = 0.0;
    for_each_index(g, [&](std::span<const int> idx, std::size_t flat) {
        for (int a = 0; a < g.n; ++a) {
            if (idx[a] < margin_cells ||
                idx[a] >= g.points_per_axis - margin_cells) {
                margin_mag = std::max(margin_mag, std::abs(q.data[flat]));
                return;
            }
        }
    });
    if (maxmag > 0.0 && margin_mag > 1e-14 * maxmag)
        throw ContractViolation(
            "Potential: q must vanish within the boundary margin");

    d1 = ComplexField(g);
    d2 = ComplexField(g);
    for (std::size_t i = 0; i < q.data.size(); ++i) {
        const double mag = std::abs(q.data[i]);
        if (mag == 0.0) continue;
        const double root = std::sqrt(mag);
        d1.data[i] = cd(root, 0.0);
        d2.data[i] = q.data[i] / root;
    }
}

TruncationScheme make_truncation(const Potential& pot, double tau) {
    if (!(tau > 0.0)) throw ContractViolation("make_truncation: tau must be > 0");
    TruncationScheme t;
    t.tau = tau;
    t.d1_tau = pot.d1;
    t.d2_tau = pot.d2;
    for (std::size_t i = 0; i < pot.d1.data.size(); ++i) {
        if (std::abs(pot.d1.data[i]) > tau) t.d1_tau.data[i] = cd(0.0, 0.0);
        if (std::abs(pot.d2.data[i]) > tau) t.d2_tau.data[i] = cd(0.0, 0.0);
    }
    return t;
}

double default_tau(const Potential& pot, int m) {
    const int n = pot.q.grid.n;
    const double e = static_cast<double>(n) / m;
    std::vector<double> mags;
    mags.reserve(pot.d1.data.size());
    for (const cd& value : pot.d1.data) {
        const double mag = std::abs(value);
        if (mag > 0.0) mags.push_back(mag);
    }
    if (mags.empty()) return 1.0;
    std::sort(mags.begin(), mags.end());
    // Suffix sums of |d1|^{n/m}: tail(i) = sum over magnitudes > mags[i].
    double total = 0.0;
    for (double mag : mags) total += std::pow(mag, e);
    const double target = std::pow(0.05, e) * total;  // (0.05 ||d||)^{n/m}
    double tail = total;
    for (double mag : mags) {
        // tau = mag keeps everything <= mag; removed mass is the strict tail.
        tail -= std::pow(mag, e);
        if (tail <= target) return mag;
    }
    return mags.back();
}

CGOSolution build_cgo(const Potential& pot, const ZetaVector& zeta,
                      const GreenOperator& G, double tol, int max_iter,
                      double s_min) {
    const GridSpec& g = pot.q.grid;
    if (!(g == G.grid))
        throw ContractViolation("build_cgo: potential and operator grids differ");
    if (g.n <= 2 * G.m) throw InvalidExponent("build_cgo: requires n > 2m");

    CGOSolution sol;
    sol.zeta = zeta;
    sol.low_s_flagged = zeta.s < s_min;
    const double d2_norm = l2(pot.d2);

    ComplexField v = axpby(cd(-1.0, 0.0), pot.d2, cd(0.0, 0.0), pot.d2);
    int bad_streak = 0;
    double prev_update = -1.0;
    for (int it = 1; it <= max_iter; ++it) {
        ComplexField gv = apply_green(G, multiply(pot.d1, v));
        ComplexField v_new =
            axpby(cd(-1.0, 0.0), pot.d2, cd(-1.0, 0.0), multiply(pot.d2, gv));
        const double update = l2(axpby(cd(1.0, 0.0), v_new, cd(-1.0, 0.0), v));
        const double scale = std::max(l2(v_new), 1e-300);
        sol.update_history.push_back(update / scale);
        sol.iterations = it;
        if (prev_update > 0.0) {
            sol.contraction_factor = update / prev_update;
            if (sol.contraction_factor >= 1.0) {
                if (++bad_streak >= 5)
                    throw SeriesDiverged(
                        "build_cgo: Neumann series not contracting (|zeta| too "
                        "small)",
                        sol.contraction_factor);
            } else {
                bad_streak = 0;
            }
        }
        prev_update = update;
        v = std::move(v_new);
        if (update / scale < tol) break;
    }
    sol.v = v;
    sol.r = apply_green(G, multiply(pot.d1, v));

    const int n = g.n;
    const double p_dual = 2.0 * n / (n + 2.0 * G.m);
    const double p_out = 2.0 * n / (n - 2.0 * G.m);
    // Remainder-equation residual: P^m r + q (1 + r), relative to ||q|| in
    // the same norm.
    ComplexField pmr = apply_conjugated_op(sol.r, zeta.raw, G.m, G.offset_axis);
    ComplexField one_plus_r = sol.r;
    for (auto& value : one_plus_r.data) value += 1.0;
    ComplexField resid =
        axpby(cd(1.0, 0.0), pmr, cd(1.0, 0.0), multiply(pot.q, one_plus_r));
    const double qn = lp_norm(pot.q, p_dual);
    sol.eq_residual = (qn == 0.0) ? lp_norm(resid, p_dual) : lp_norm(resid, p_dual) / qn;
    sol.r_norm_lp = lp_norm(sol.r, p_out);

    // K: central box of half the domain's half-width.
    const double k_half = 0.5 * g.half_width;
    double acc = 0.0;
    for_each_index(g, [&](std::span<const int> idx, std::size_t flat) {
        for (int a = 0; a < g.n; ++a)
            if (std::abs(g.coordinate(idx[a])) > k_half) return;
        acc += std::norm(sol.r.data[flat]);
    });
    sol.r_norm_l2K = std::sqrt(acc * g.cell_volume());
    return sol;
}

OperatorNormSweep probe_operator_norm(const Potential& pot,
                                      std::span<const double> s_list, int m,
                                      GreenBackend backend, bool allow_unsafe,
                                      int iterations) {
    const GridSpec& g = pot.q.grid;
    OperatorNormSweep sweep;
    ComplexField d1c = pot.d1, d2c = pot.d2;
    for (auto& value : d1c.data) value = std::conj(value);
    for (auto& value : d2c.data) value = std::conj(value);
    for (double s : s_list) {
        const GreenOperator G =
            assemble_green(canonical_zeta(s, g.n), m, g, backend, allow_unsafe);
        std::mt19937 rng(12345);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        ComplexField f(g);
        for (auto& value : f.data) value = cd(uni(rng), uni(rng));
        double fnorm = l2(f);
        double sigma = 0.0;
        for (int it = 0; it < iterations; ++it) {
            for (auto& value : f.data) value /= fnorm;
            ComplexField tf = multiply(pot.d2, apply_green(G, multiply(pot.d1, f)));
            ComplexField ttf =
                multiply(d1c, apply_green_adjoint(G, multiply(d2c, tf)));
            const double gnorm = l2(ttf);
            if (gnorm == 0.0) {
                sigma = 0.0;
                break;
            }
            sigma = std::sqrt(gnorm);
            f = std::move(ttf);
            fnorm = gnorm;
        }
        sweep.s_values.push_back(s);
        sweep.norms.push_back(sigma);
    }
    bool positive = true;
    for (double v : sweep.norms) positive = positive && v > 0.0;
    if (sweep.norms.size() >= 2 && positive)
        sweep.slope = fit_loglog_slope(sweep.s_values, sweep.norms);
    return sweep;
}

RegularityReport check_regularity(const Potential& pot, const CGOSolution& sol,
                                  int m, double box_half_width) {
    const GridSpec& g = sol.r.grid;
    if (!(box_half_width > 0.0) || box_half_width > g.half_width)
        throw ContractViolation("check_regularity: bad sub-box half-width");
    const int n = g.n;

    // Precompute e^{x.zeta} on the grid.
    std::vector<cd> expz(g.total_points());
    for_each_index(g, [&](std::span<const int> idx, std::size_t flat) {
        cd dot(0.0, 0.0);
        for (int a = 0; a < n; ++a) dot += sol.zeta.raw[a] * g.coordinate(idx[a]);
        expz[flat] = std::exp(dot);
    });

    // D^beta r via spectral multipliers, for all beta <= m componentwise
    // needed below; computed lazily per alpha.
    auto spectral_derivative = [&](const ComplexField& f,
                                   std::span<const int> beta) {
        return apply_multiplier(f, [&](std::span<const double> xi) {
            cd factor(1.0, 0.0);
            for (int a = 0; a < n; ++a)
                for (int k = 0; k < beta[a]; ++k) factor *= cd(0.0, xi[a]);
            return factor;
        });
    };

    double acc = 0.0;
    bool nan_seen = false;
    std::vector<int> scratch;
    enumerate_multi(n, m, scratch, [&](std::span<const int> alpha) {
        double coeff = factorial(m);
        for (int a = 0; a < n; ++a) coeff /= factorial(alpha[a]);

        // D^alpha u = e^{x.zeta} [ zeta^alpha + sum_{beta<=alpha} C(alpha,beta)
        //             zeta^{alpha-beta} D^beta r ].
        std::vector<cd> field(g.total_points(), cd(0.0, 0.0));
        // Enumerate beta <= alpha componentwise.
        std::vector<int> beta(n, 0);
        auto advance = [&]() {
            for (int a = 0; a < n; ++a) {
                if (beta[a] < alpha[a]) {
                    ++beta[a];
                    return true;
                }
                beta[a] = 0;
            }
            return false;
        };
        cd zeta_alpha(1.0, 0.0);
        for (int a = 0; a < n; ++a)
            for (int k = 0; k < alpha[a]; ++k) zeta_alpha *= sol.zeta.raw[a];
        for (auto& value : field) value = zeta_alpha;
        while (advance()) {
            cd c(1.0, 0.0);
            for (int a = 0; a < n; ++a) {
                c *= factorial(alpha[a]) /
                     (factorial(beta[a]) * factorial(alpha[a] - beta[a]));
                for (int k = 0; k < alpha[a] - beta[a]; ++k)
                    c *= sol.zeta.raw[a];
            }
            ComplexField dr = spectral_derivative(sol.r, beta);
            for (std::size_t i = 0; i < field.size(); ++i)
                field[i] += c * dr.data[i];
        }
        for_each_index(g, [&](std::span<const int> idx, std::size_t flat) {
            for (int a = 0; a < n; ++a)
                if (std::abs(g.coordinate(idx[a])) > box_half_width) return;
            const cd du = expz[flat] * field[flat];
            if (!std::isfinite(du.real()) || !std::isfinite(du.imag()))
                nan_seen = true;
            acc += coeff * std::norm(du);
        });
    });
    if (nan_seen || !std::isfinite(acc))
        throw NumericalFailure("check_regularity: non-finite derivative values");

    RegularityReport rep;
    rep.hm_seminorm = std::sqrt(acc * g.cell_volume());

    ComplexField u(g);
    for (std::size_t i = 0; i < u.data.size(); ++i)
        u.data[i] = expz[i] * (cd(1.0, 0.0) + sol.r.data[i]);
    rep.qu_norm = lp_norm(multiply(pot.q, u), 2.0 * n / (n + 2.0 * m));
    if (!std::isfinite(rep.qu_norm))
        throw NumericalFailure("check_regularity: non-finite ||qu||");
    return rep;
}

} // namespace pgf
