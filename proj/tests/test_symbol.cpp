#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "pgf/symbol.hpp"

using namespace pgf;

namespace {

std::vector<double> random_xi(std::mt19937& rng, int n, double radius) {
    std::uniform_real_distribution<double> uni(-radius, radius);
    std::vector<double> xi(n);
    for (auto& v : xi) v = uni(rng);
    return xi;
}

double vnorm(std::span<const double> v) {
    double r = 0.0;
    for (double x : v) r += x * x;
    return std::sqrt(r);
}

} // namespace

TEST_CASE("canonicalize: canonical input, permuted input, errors") {
    std::vector<cd> z1{cd(1, 0), cd(0, -1), cd(0, 0)};
    ZetaVector a = canonicalize(z1);
    CHECK(a.s == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(a.rotation_is_identity());

    // Cyclic permutation: zeta = (0, 1, -i).
    std::vector<cd> z2{cd(0, 0), cd(1, 0), cd(0, -1)};
    ZetaVector b = canonicalize(z2);
    CHECK(b.s == doctest::Approx(1.0));
    // R maps (0,1,0) -> e1 and (0,0,1) -> e2.
    std::vector<double> e2{0.0, 1.0, 0.0}, e3{0.0, 0.0, 1.0};
    auto r2 = b.to_canonical(e2);
    auto r3 = b.to_canonical(e3);
    CHECK(r2[0] == doctest::Approx(1.0));
    CHECK(r3[1] == doctest::Approx(1.0));

    std::vector<cd> bad{cd(1, 0), cd(0, -2), cd(0, 0)};
    CHECK_THROWS_AS(canonicalize(bad), NotIsotropic);
    std::vector<cd> zero(3, cd(0, 0));
    CHECK_THROWS_AS(canonicalize(zero), ZeroVector);
}

TEST_CASE("canonicalize handles generic rotated isotropic vectors") {
    std::mt19937 rng(11);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + (trial % 3);
        // Random orthonormal a, b by Gram-Schmidt, scale s.
        std::vector<double> a(n), b(n);
        for (auto& v : a) v = gauss(rng);
        for (auto& v : b) v = gauss(rng);
        double na = vnorm(a);
        for (auto& v : a) v /= na;
        double ab = 0.0;
        for (int i = 0; i < n; ++i) ab += a[i] * b[i];
        for (int i = 0; i < n; ++i) b[i] -= ab * a[i];
        double nb = vnorm(b);
        for (auto& v : b) v /= nb;
        const double s = 0.5 + 3.0 * std::abs(gauss(rng));
        std::vector<cd> zeta(n);
        for (int i = 0; i < n; ++i) zeta[i] = cd(s * a[i], s * b[i]);
        ZetaVector zv = canonicalize(zeta);
        CHECK(zv.s == doctest::Approx(s).epsilon(1e-12));
        // Symbol computed in canonical coordinates agrees with the raw form.
        for (int k = 0; k < 5; ++k) {
            auto xi = random_xi(rng, n, 3.0 * s);
            auto xic = zv.to_canonical(xi);
            const cd via_canonical = eval_symbol(zv, xic);
            const cd via_raw = symbol_p(zeta, xi);
            CHECK(std::abs(via_canonical - via_raw) <= 1e-9 * (1.0 + std::abs(via_raw)));
            // Rotation round trip.
            auto back = zv.from_canonical(xic);
            for (int i = 0; i < n; ++i) CHECK(back[i] == doctest::Approx(xi[i]).epsilon(1e-10));
        }
    }
}

TEST_CASE("eval_symbol hand values") {
    ZetaVector z = canonical_zeta(1.0, 3);
    std::vector<double> p1{0.0, 2.0, 0.0};
    CHECK(std::abs(eval_symbol(z, p1)) <= 1e-14);
    std::vector<double> p2{0.0, 0.0, 0.0};
    CHECK(std::abs(eval_symbol(z, p2)) <= 1e-14);
    std::vector<double> p3{1.0, 0.0, 0.0};
    const cd v = eval_symbol(z, p3);
    CHECK(v.real() == doctest::Approx(1.0));
    CHECK(v.imag() == doctest::Approx(-2.0));
}

TEST_CASE("distance to the characteristic set") {
    ZetaVector z = canonical_zeta(2.0, 3);
    std::vector<double> on{0.0, 4.0, 0.0};
    CHECK(dist_to_char_set(z, on) <= 1e-14);

    ZetaVector z1 = canonical_zeta(1.0, 3);
    std::vector<double> p{1.0, 0.0, 0.0};
    CHECK(dist_to_char_set(z1, p) == doctest::Approx(1.0));

    // Lower bound d >= (|xi_1| + ||xi'-s e2| - s|)/2 on random samples.
    std::mt19937 rng(5);
    for (int k = 0; k < 2000; ++k) {
        auto xi = random_xi(rng, 3, 5.0);
        double radial = std::sqrt((xi[1] - 1.0) * (xi[1] - 1.0) + xi[2] * xi[2]);
        const double comparable = 0.5 * (std::abs(xi[0]) + std::abs(radial - 1.0));
        CHECK(dist_to_char_set(z1, xi) >= comparable - 1e-12);
    }
}

TEST_CASE("symbol bounds: far regime hard bracket, near regime ratio range") {
    ZetaVector z = canonical_zeta(1.0, 3);
    std::vector<std::vector<double>> far{{8.0, 0.0, 0.0}};
    SymbolBoundsReport rep = check_symbol_bounds(z, far);
    CHECK(rep.checked_far == 1);
    CHECK(rep.violations == 0);
    CHECK(std::abs(eval_symbol(z, far[0])) == doctest::Approx(std::sqrt(4352.0)));

    std::mt19937 rng(17);
    std::vector<std::vector<double>> samples;
    for (int k = 0; k < 10000; ++k) samples.push_back(random_xi(rng, 3, 4.0));
    rep = check_symbol_bounds(z, samples);
    CHECK(rep.violations == 0);
    CHECK(rep.checked_near > 0);
    CHECK(rep.ratio_min > 0.0);
    CHECK(std::isfinite(rep.ratio_max));

    // A point exactly on Sigma is skipped, not a failure.
    std::vector<std::vector<double>> deg{{0.0, 2.0, 0.0}};
    rep = check_symbol_bounds(z, deg);
    CHECK(rep.skipped == 1);
}

TEST_CASE("partition of unity: range, unit sum, vanishing near Sigma, scaling") {
    std::mt19937 rng(23);
    for (double s : {1.0, 3.5}) {
        for (int n : {2, 3, 5}) {
            ZetaVector z = canonical_zeta(s, n);
            PartitionOfUnity part = build_partition(z, n);
            PartitionOfUnity unit = build_partition(canonical_zeta(1.0, n), n);
            for (int k = 0; k < 1500; ++k) {
                auto xi = random_xi(rng, n, 3.0 * s);
                double sum = part.chi1(xi);
                CHECK(sum >= 0.0);
                CHECK(sum <= 1.0);
                for (int j = 2; j <= n; ++j)
                    for (int sg : {+1, -1}) {
                        const double c = part.chi(j, sg, xi);
                        CHECK(c >= 0.0);
                        CHECK(c <= 1.0);
                        sum += c;
                        // Support inside V_{j,+-}(s).
                        if (c > 0.0) {
                            const double coord = (j == 2) ? xi[1] - s : xi[j - 1];
                            CHECK(sg * coord > s / (2.0 * n));
                            CHECK(dist_to_char_set(z, xi) < s);
                        }
                        // Scaling relation chi(s)(xi) = chi(1)(xi/s).
                        std::vector<double> y(xi.begin(), xi.end());
                        for (auto& v : y) v /= s;
                        CHECK(std::abs(c - unit.chi(j, sg, y)) <= 1e-14);
                    }
                CHECK(std::abs(sum - 1.0) <= 1e-12);
                // chi1 vanishes on the s/(2n) neighborhood of Sigma.
                if (dist_to_char_set(z, xi) <= s / (2.0 * n))
                    CHECK(part.chi1(xi) == 0.0);
            }
            // Points of Sigma itself.
            std::vector<double> on(n, 0.0);
            on[1] = 2.0 * s;
            CHECK(part.chi1(on) == 0.0);
        }
    }
}

TEST_CASE("diffeo: hand values, round trips, symbol factorization, scaling") {
    Diffeo d2 = make_diffeo(2, +1, 1.0, 3);
    std::vector<double> sig{0.0, 2.0, 0.0};
    auto eta = d2.forward(sig);
    CHECK(std::abs(eta[0]) <= 1e-14);
    CHECK(std::abs(eta[1]) <= 1e-14);
    // |Jacobian| = 4 |xi_2 - s| / s = 1 when xi_2 - s = s/4.
    std::vector<double> q{0.05, 1.25, 0.1};
    CHECK(d2.jacobian(q) == doctest::Approx(1.0));

    std::mt19937 rng(31);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    int accepted = 0;
    for (double s : {1.0, 4.0}) {
        ZetaVector z = canonical_zeta(s, 3);
        for (int j : {2, 3}) {
            for (int sg : {+1, -1}) {
                Diffeo d = make_diffeo(j, sg, s, 3);
                Diffeo d1 = make_diffeo(j, sg, 1.0, 3);
                for (int k = 0; k < 1000; ++k) {
                    std::vector<double> xi{s * uni(rng), s * (1.0 + 1.5 * uni(rng)),
                                           1.5 * s * uni(rng)};
                    if (!d.in_domain(xi)) continue;
                    ++accepted;
                    auto e = d.forward(xi);
                    auto back = d.inverse(e);
                    for (int i = 0; i < 3; ++i)
                        CHECK(std::abs(back[i] - xi[i]) <= 1e-10 * (1.0 + std::abs(xi[i])));
                    // p_zeta(Phi^{-1}(eta)) = s (eta_j + i eta_1).
                    const cd p = eval_symbol(z, xi);
                    const cd factor = s * cd(e[j - 1], e[0]);
                    double escale = 0.0;
                    for (double v : e) escale += v * v;
                    CHECK(std::abs(p - factor) <= 1e-10 * s * (1.0 + std::sqrt(escale)));
                    // Jacobian bounds on V_{j,+-}(s).
                    const double jac = d.jacobian(xi);
                    CHECK(jac > 2.0 / 3.0);
                    CHECK(jac < 8.0);
                    // Scaling Phi(s)(xi) = s Phi(1)(xi/s).
                    std::vector<double> y(xi.begin(), xi.end());
                    for (auto& v : y) v /= s;
                    auto e1 = d1.forward(y);
                    for (int i = 0; i < 3; ++i)
                        CHECK(std::abs(e[i] - s * e1[i]) <= 1e-12 * s * (1.0 + std::abs(e1[i])));
                }
            }
        }
    }
    CHECK(accepted > 500);

    // Out-of-chart requests throw.
    Diffeo d = make_diffeo(3, +1, 1.0, 3);
    std::vector<double> outside{0.0, 1.0, -0.5};
    CHECK_THROWS_AS(d.forward(outside), OutOfChart);
    std::vector<double> ambiguous{0.0, 1.0, 0.0};  // maps to |c_j| = 0
    CHECK_THROWS_AS(d.forward(ambiguous), OutOfChart);
}
