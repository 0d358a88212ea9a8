#include "pgf/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "pgf/errors.hpp"

namespace pgf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log || w * f ||_p with w given by its pointwise log, evaluated with
/// max-subtraction: log norm = A + (1/p) log( sum e^{p (a_i - A)} h^n ),
/// a_i = log w_i + log |f_i|. Returns -inf for identically zero input.
double log_weighted_lp(const ComplexField& f,
                       const std::vector<double>& log_weight, double p) {
    double A = kNegInf;
    std::vector<double> a(f.data.size(), kNegInf);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        const double mag = std::abs(f.data[i]);
        if (mag == 0.0 || !std::isfinite(log_weight[i])) continue;
        a[i] = log_weight[i] + std::log(mag);
        A = std::max(A, a[i]);
    }
    if (A == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double ai : a)
        if (ai != kNegInf) acc += std::exp(p * (ai - A));
    return A + std::log(acc * f.grid.cell_volume()) / p;
}

/// (-Delta)^m u computed spectrally on a factor-2 enlarged box, then
/// truncated back to the (dilated) support of u where it lives analytically.
ComplexField polyharmonic_on_support(const CarlemanSample& sample, int m) {
    const ComplexField& u = sample.u;
    if (!sample.support_center.empty() &&
        static_cast<int>(sample.support_center.size()) != u.grid.n)
        throw ContractViolation("CarlemanSample: support_center dimension");
    ComplexField big = embed(u, 2);
    const std::vector<cd> zeta_zero(u.grid.n, cd(0.0, 0.0));
    ComplexField v = apply_conjugated_op(big, zeta_zero, m);
    const double margin = 4.0 * u.grid.spacing();
    const double lo = std::max(0.0, sample.support_inner - margin);
    const double hi = sample.support_outer + margin;
    for_each_index(v.grid, [&](std::span<const int> idx, std::size_t flat) {
        double r2 = 0.0;
        for (int a = 0; a < v.grid.n; ++a) {
            const double c =
                sample.support_center.empty() ? 0.0 : sample.support_center[a];
            const double x = v.grid.coordinate(idx[a]) - c;
            r2 += x * x;
        }
        const double r = std::sqrt(r2);
        if (r < lo || r > hi) v.data[flat] = cd(0.0, 0.0);
    });
    return v;
}

std::vector<double> linear_log_weight(const GridSpec& g,
                                      std::span<const double> k) {
    std::vector<double> w(g.total_points());
    for_each_index(g, [&](std::span<const int> idx, std::size_t flat) {
        double dot = 0.0;
        for (int a = 0; a < g.n; ++a) dot += k[a] * g.coordinate(idx[a]);
        w[flat] = dot;
    });
    return w;
}

std::vector<double> log_log_weight(const GridSpec& g, double t) {
    std::vector<double> w(g.total_points());
    for_each_index(g, [&](std::span<const int> idx, std::size_t flat) {
        double r2 = 0.0;
        for (int a = 0; a < g.n; ++a) {
            const double x = g.coordinate(idx[a]);
            r2 += x * x;
        }
        w[flat] = (r2 == 0.0) ? std::numeric_limits<double>::infinity()
                              : -0.5 * t * std::log(r2);
    });
    return w;
}

void finalize(CarlemanReport& rep) {
    rep.empirical_constant = 0.0;
    rep.skipped = 0;
    for (const ProbeRow& row : rep.rows) {
        if (row.skipped)
            ++rep.skipped;
        else
            rep.empirical_constant = std::max(rep.empirical_constant, row.ratio);
    }
}

} // namespace

CarlemanConfig::CarlemanConfig(int m_, int n_) : m(m_), n(n_) {
    if (!(1 <= m && 2 * m < n))
        throw ContractViolation("CarlemanConfig: requires 1 <= m < n/2");
}

double CarlemanConfig::p() const { return 2.0 * n / (n + 2.0 * m); }
double CarlemanConfig::q() const { return 2.0 * n / (n - 2.0 * m); }

bool CarlemanConfig::exponent_identity_exact() const {
    // 1/p - 1/q = (n+2m)/(2n) - (n-2m)/(2n) = 4m/(2n); compare with 2m/n by
    // cross-multiplication in integers.
    const long long lhs_num = 4LL * m, lhs_den = 2LL * n;
    const long long rhs_num = 2LL * m, rhs_den = n;
    return lhs_num * rhs_den == rhs_num * lhs_den;
}

double CarlemanConfig::delta(double t) const {
    const double shifted = t - 0.5 * (n - 2.0 * m);  // t - n/q
    return std::abs(shifted - std::round(shifted));
}

CarlemanReport probe_linear(const CarlemanConfig& cfg,
                            std::span<const CarlemanSample> test_set,
                            const std::vector<std::vector<double>>& k_list) {
    CarlemanReport rep;
    for (const auto& k : k_list)
        if (static_cast<int>(k.size()) != cfg.n)
            throw ContractViolation("probe_linear: k dimension mismatch");
    for (const CarlemanSample& sample : test_set) {
        if (sample.u.grid.n != cfg.n)
            throw ContractViolation("probe_linear: sample dimension mismatch");
        const bool zero = lp_norm(sample.u, 2.0) == 0.0;
        if (zero) {
            for (const auto& k : k_list) {
                double kmag = 0.0;
                for (double ki : k) kmag += ki * ki;
                rep.rows.push_back(
                    {"linear", std::sqrt(kmag), sample.id, 0.0, true});
            }
            continue;
        }
        const ComplexField v = polyharmonic_on_support(sample, cfg.m);
        const ComplexField ubig = embed(sample.u, 2);
        for (const auto& k : k_list) {
            double kmag = 0.0;
            for (double ki : k) kmag += ki * ki;
            kmag = std::sqrt(kmag);
            ProbeRow row{"linear", kmag, sample.id, 0.0, false};
            const std::vector<double> lw = linear_log_weight(ubig.grid, k);
            const double log_num = log_weighted_lp(ubig, lw, cfg.q());
            const double log_den = log_weighted_lp(v, lw, cfg.p());
            if (log_den == kNegInf) {
                row.skipped = true;
            } else {
                row.ratio = std::exp(log_num - log_den);
            }
            rep.rows.push_back(row);
        }
    }
    finalize(rep);
    return rep;
}

CarlemanReport probe_log(const CarlemanConfig& cfg,
                         std::span<const CarlemanSample> test_set, double t) {
    CarlemanReport rep;
    rep.delta = cfg.delta(t);
    rep.delta_flagged = rep.delta < 1e-3;
    for (const CarlemanSample& sample : test_set) {
        const GridSpec& g = sample.u.grid;
        if (g.n != cfg.n)
            throw ContractViolation("probe_log: sample dimension mismatch");
        // Precondition: u vanishes on a ball of radius >= 4 cells.
        const double hole = 4.0 * g.spacing();
        double maxmag = 0.0;
        for (const cd& value : sample.u.data)
            maxmag = std::max(maxmag, std::abs(value));
        double near_origin = 0.0;
        for_each_index(g, [&](std::span<const int> idx, std::size_t flat) {
            double r2 = 0.0;
            for (int a = 0; a < g.n; ++a) {
                const double x = g.coordinate(idx[a]);
                r2 += x * x;
            }
            if (r2 < hole * hole)
                near_origin = std::max(near_origin, std::abs(sample.u.data[flat]));
        });
        if (maxmag > 0.0 && near_origin > 1e-13 * maxmag)
            throw ContractViolation(
                "probe_log: sample does not vanish near the origin");

        ProbeRow row{"log", t, sample.id, 0.0, false};
        if (maxmag == 0.0) {
            row.skipped = true;
        } else {
            ComplexField v = polyharmonic_on_support(sample, cfg.m);
            const ComplexField ubig = embed(sample.u, 2);
            const std::vector<double> lw = log_log_weight(ubig.grid, t);
            const double log_num = log_weighted_lp(ubig, lw, cfg.q());
            const double log_den = log_weighted_lp(v, lw, cfg.p());
            if (log_den == kNegInf) {
                row.skipped = true;
            } else {
                row.ratio = std::exp(log_num - log_den);
            }
        }
        rep.rows.push_back(row);
    }
    finalize(rep);
    return rep;
}

ComplexField make_annular_bump(const GridSpec& grid, double r0, double w) {
    if (!(w > 0.0 && r0 > w))
        throw ContractViolation("make_annular_bump: requires r0 > w > 0");
    ComplexField f(grid);
    for_each_index(grid, [&](std::span<const int> idx, std::size_t flat) {
        double r2 = 0.0;
        for (int a = 0; a < grid.n; ++a) {
            const double x = grid.coordinate(idx[a]);
            r2 += x * x;
        }
        const double s = (std::sqrt(r2) - r0) / w;
        f.data[flat] = (s * s < 1.0)
                           ? cd(std::exp(1.0 - 1.0 / (1.0 - s * s)), 0.0)
                           : cd(0.0, 0.0);
    });
    return f;
}

void write_probe_csv(std::ostream& os, const CarlemanReport& report) {
    os << "weight-type,parameter,sample-id,ratio\n";
    for (const ProbeRow& row : report.rows) {
        os << row.weight_type << ',' << row.parameter << ',' << row.sample_id
           << ',';
        if (row.skipped)
            os << "skipped";
        else
            os << row.ratio;
        os << '\n';
    }
}

} // namespace pgf
