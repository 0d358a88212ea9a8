#include "pgf/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pgf {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
    return r;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Quintic smoothstep profile on [0,1], C^2-flat at both ends.
double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

/// 0 below x0, 1 above x1.
double step_up(double x, double x0, double x1) {
    return smoothstep((x - x0) / (x1 - x0));
}

/// Distance at s = 1 to Sigma(1) = {y_1 = 0, |y' - e2| = 1}.
double dist_unit(std::span<const double> y) {
    double radial2 = 0.0;
    for (std::size_t a = 1; a < y.size(); ++a) {
        const double c = (a == 1) ? y[a] - 1.0 : y[a];
        radial2 += c * c;
    }
    const double dr = std::sqrt(radial2) - 1.0;
    return std::sqrt(y[0] * y[0] + dr * dr);
}

/// Chart coordinate at s = 1: y_2 - 1 for j = 2, y_j for j >= 3.
double coord_unit(int j, std::span<const double> y) {
    return (j == 2) ? y[1] - 1.0 : y[j - 1];
}

/// Mollified indicator of {sign * c_j beyond 1/(2n)}: rises over
/// [1/(2n) + w/4, 1/(2n) + w], w = 1/(8n), so its support stays strictly
/// inside V_{j,+-}(1).
double bump_piece(int j, int sign, int n, std::span<const double> y) {
    const double w = 1.0 / (8.0 * n);
    const double lo = 1.0 / (2.0 * n) + 0.25 * w;
    const double hi = 1.0 / (2.0 * n) + w;
    return step_up(sign * coord_unit(j, y), lo, hi);
}

/// Near-Sigma localizer: 1 on N_{1/(2n)}(Sigma(1)), 0 beyond 1/(2n) + w.
double rho_piece(int n, std::span<const double> y) {
    const double w = 1.0 / (8.0 * n);
    const double lo = 1.0 / (2.0 * n);
    return 1.0 - step_up(dist_unit(y), lo, lo + w);
}

} // namespace

std::vector<double> ZetaVector::to_canonical(std::span<const double> xi_raw) const {
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) out[i] += rotation[i * n + k] * xi_raw[k];
    return out;
}

std::vector<double> ZetaVector::from_canonical(std::span<const double> xi_can) const {
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) out[i] += rotation[k * n + i] * xi_can[k];
    return out;
}

bool ZetaVector::rotation_is_identity(double tol) const {
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double want = (i == k) ? 1.0 : 0.0;
            if (std::abs(rotation[i * n + k] - want) > tol) return false;
        }
    return true;
}

ZetaVector canonicalize(std::span<const cd> zeta_raw, double tol) {
    const int n = static_cast<int>(zeta_raw.size());
    if (n < 2) throw ContractViolation("canonicalize: need dimension >= 2");

    double mag2 = 0.0;
    cd self(0.0, 0.0);
    for (const cd& z : zeta_raw) {
        mag2 += std::norm(z);
        self += z * z;
    }
    if (mag2 == 0.0) throw ZeroVector("canonicalize: zeta = 0");
    if (std::abs(self) > tol * mag2)
        throw NotIsotropic("canonicalize: zeta . zeta != 0 beyond tolerance");

    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        a[i] = zeta_raw[i].real();
        b[i] = zeta_raw[i].imag();
    }
    const double na = norm2(a), nb = norm2(b);
    if (na == 0.0 || nb == 0.0)
        throw NotIsotropic("canonicalize: Re zeta or Im zeta vanishes");

    ZetaVector zv;
    zv.n = n;
    zv.raw.assign(zeta_raw.begin(), zeta_raw.end());
    zv.s = std::sqrt(mag2 / 2.0);

    // Rows of R: a/|a|, -b/|b|, then smallest-index coordinate completion.
    std::vector<std::vector<double>> rows;
    rows.reserve(n);
    std::vector<double> r1(n), r2(n);
    for (int i = 0; i < n; ++i) {
        r1[i] = a[i] / na;
        r2[i] = -b[i] / nb;
    }
    rows.push_back(r1);
    rows.push_back(r2);
    for (int e = 0; e < n && static_cast<int>(rows.size()) < n; ++e) {
        std::vector<double> v(n, 0.0);
        v[e] = 1.0;
        for (const auto& r : rows) {
            const double c = dot(v, r);
            for (int i = 0; i < n; ++i) v[i] -= c * r[i];
        }
        const double nv = norm2(v);
        if (nv > 1e-6) {
            for (int i = 0; i < n; ++i) v[i] /= nv;
            rows.push_back(v);
        }
    }
    if (static_cast<int>(rows.size()) != n)
        throw NumericalFailure("canonicalize: frame completion failed");

    zv.rotation.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) zv.rotation[i * n + k] = rows[i][k];

    // Verify R * zeta = s e1 - i s e2.
    for (int i = 0; i < n; ++i) {
        cd v(0.0, 0.0);
        for (int k = 0; k < n; ++k) v += zv.rotation[i * n + k] * zeta_raw[k];
        cd want(0.0, 0.0);
        if (i == 0) want = cd(zv.s, 0.0);
        if (i == 1) want = cd(0.0, -zv.s);
        if (std::abs(v - want) > 1e-10 * zv.s)
            throw NumericalFailure("canonicalize: rotation does not canonicalize zeta");
    }
    return zv;
}

ZetaVector canonical_zeta(double s, int n) {
    if (!(s > 0.0)) throw ContractViolation("canonical_zeta: s must be positive");
    std::vector<cd> raw(n, cd(0.0, 0.0));
    raw[0] = cd(s, 0.0);
    raw[1] = cd(0.0, -s);
    return canonicalize(raw);
}

cd eval_symbol(const ZetaVector& zeta, std::span<const double> xi) {
    const double s = zeta.s;
    double shifted2 = xi[0] * xi[0];
    for (int a = 1; a < zeta.n; ++a) {
        const double c = (a == 1) ? xi[a] - s : xi[a];
        shifted2 += c * c;
    }
    return cd(shifted2 - s * s, -2.0 * s * xi[0]);
}

double dist_to_char_set(const ZetaVector& zeta, std::span<const double> xi) {
    const double s = zeta.s;
    double radial2 = 0.0;
    for (int a = 1; a < zeta.n; ++a) {
        const double c = (a == 1) ? xi[a] - s : xi[a];
        radial2 += c * c;
    }
    const double dr = std::sqrt(radial2) - s;
    return std::sqrt(xi[0] * xi[0] + dr * dr);
}

SymbolBoundsReport check_symbol_bounds(const ZetaVector& zeta,
                                       const std::vector<std::vector<double>>& samples,
                                       double M) {
    SymbolBoundsReport rep;
    rep.ratio_min = std::numeric_limits<double>::infinity();
    rep.ratio_max = 0.0;
    const double zeta_mag = std::sqrt(2.0) * zeta.s;
    for (const auto& xi : samples) {
        const double r = norm2(xi);
        const double p_abs = std::abs(eval_symbol(zeta, xi));
        if (r >= 4.0 * zeta_mag) {
            ++rep.checked_far;
            if (!(0.5 * r * r <= p_abs && p_abs <= 1.5 * r * r)) {
                ++rep.violations;
                if (rep.first_violation.empty()) rep.first_violation = xi;
            }
        }
        if (r <= M * zeta_mag) {
            const double d = dist_to_char_set(zeta, xi);
            if (zeta.s * d < 1e-12) {
                ++rep.skipped;
                continue;
            }
            ++rep.checked_near;
            const double ratio = p_abs / (zeta.s * d);
            rep.ratio_min = std::min(rep.ratio_min, ratio);
            rep.ratio_max = std::max(rep.ratio_max, ratio);
        }
    }
    if (rep.checked_near == 0) rep.ratio_min = 0.0;
    return rep;
}

double PartitionOfUnity::chi1(std::span<const double> xi) const {
    std::vector<double> y(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) y[i] = xi[i] / s;
    return 1.0 - rho_piece(n, y);
}

double PartitionOfUnity::chi(int j, int sign, std::span<const double> xi) const {
    if (j < 2 || j > n || (sign != 1 && sign != -1))
        throw ContractViolation("PartitionOfUnity::chi: bad piece index");
    std::vector<double> y(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) y[i] = xi[i] / s;
    const double rho = rho_piece(n, y);
    if (rho == 0.0) return 0.0;
    double total = 0.0;
    for (int jj = 2; jj <= n; ++jj)
        for (int sg : {+1, -1}) total += bump_piece(jj, sg, n, y);
    // total >= 1 on supp rho: some |coordinate| exceeds 1/(2n) + 1/(8n) near
    // the unit sphere of the (n-1) trailing coordinates.
    return rho * bump_piece(j, sign, n, y) / total;
}

double PartitionOfUnity::chi_charts(std::span<const double> xi) const {
    return 1.0 - chi1(xi);
}

void PartitionOfUnity::eval_all(std::span<const double> xi, double& chi1_out,
                                std::span<double> pieces) const {
    if (pieces.size() != static_cast<std::size_t>(2 * (n - 1)))
        throw ContractViolation("PartitionOfUnity::eval_all: bad buffer size");
    std::vector<double> y(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) y[i] = xi[i] / s;
    const double rho = rho_piece(n, y);
    chi1_out = 1.0 - rho;
    if (rho == 0.0) {
        std::fill(pieces.begin(), pieces.end(), 0.0);
        return;
    }
    double total = 0.0;
    for (int j = 2; j <= n; ++j)
        for (int sg : {+1, -1}) {
            const double b = bump_piece(j, sg, n, y);
            pieces[(j - 2) * 2 + (sg < 0 ? 1 : 0)] = b;
            total += b;
        }
    for (auto& b : pieces) b *= rho / total;
}

PartitionOfUnity build_partition(const ZetaVector& zeta, int n) {
    if (n < 2) throw ContractViolation("build_partition: need n >= 2");
    if (n != zeta.n) throw ContractViolation("build_partition: dimension mismatch");
    PartitionOfUnity p;
    p.s = zeta.s;
    p.n = n;
    return p;
}

double Diffeo::chart_coord(std::span<const double> xi) const {
    return (j == 2) ? xi[1] - s : xi[j - 1];
}

bool Diffeo::in_domain(std::span<const double> xi) const {
    if (!(sign * chart_coord(xi) > s / (2.0 * n))) return false;
    // V_{j,+-}(s) also lies inside N_s(Sigma(s))^0; this is what bounds the
    // Jacobian 4|c_j|/s above by 8.
    double radial2 = 0.0;
    for (int a = 1; a < n; ++a) {
        const double c = (a == 1) ? xi[a] - s : xi[a];
        radial2 += c * c;
    }
    const double dr = std::sqrt(radial2) - s;
    return std::sqrt(xi[0] * xi[0] + dr * dr) < s;
}

std::vector<double> Diffeo::forward(std::span<const double> xi) const {
    if (!in_domain(xi))
        throw OutOfChart("Diffeo::forward: xi outside V_{j,+-}(s)");
    std::vector<double> eta(xi.begin(), xi.end());
    eta[0] = -2.0 * xi[0];
    double shifted2 = xi[0] * xi[0];
    for (int a = 1; a < n; ++a) {
        const double c = (a == 1) ? xi[a] - s : xi[a];
        shifted2 += c * c;
    }
    eta[j - 1] = (shifted2 - s * s) / s;
    return eta;
}

std::vector<double> Diffeo::inverse(std::span<const double> eta) const {
    std::vector<double> xi(eta.begin(), eta.end());
    xi[0] = -eta[0] / 2.0;
    // Solve |xi - s e2|^2 - s^2 = s eta_j for the j-th coordinate.
    double rest = xi[0] * xi[0];
    for (int a = 1; a < n; ++a) {
        if (a == j - 1) continue;
        const double c = (a == 1) ? xi[a] - s : xi[a];
        rest += c * c;
    }
    const double disc = s * eta[j - 1] + s * s - rest;
    if (disc < 0.0)
        throw OutOfChart("Diffeo::inverse: eta not in the chart image");
    const double cj = std::sqrt(disc);
    if (cj <= s / (2.0 * n))
        throw OutOfChart("Diffeo::inverse: branch-ambiguous point (|c_j| <= s/(2n))");
    xi[j - 1] = sign * cj + ((j == 2) ? s : 0.0);
    if (!in_domain(xi))
        throw OutOfChart("Diffeo::inverse: eta not in the chart image");
    return xi;
}

double Diffeo::jacobian(std::span<const double> xi) const {
    if (!in_domain(xi))
        throw OutOfChart("Diffeo::jacobian: xi outside V_{j,+-}(s)");
    return 4.0 * std::abs(chart_coord(xi)) / s;
}

Diffeo make_diffeo(int j, int sign, double s, int n) {
    if (n < 2 || j < 2 || j > n || (sign != 1 && sign != -1) || !(s > 0.0))
        throw ContractViolation("make_diffeo: bad parameters");
    Diffeo d;
    d.j = j;
    d.sign = sign;
    d.s = s;
    d.n = n;
    return d;
}

} // namespace pgf
