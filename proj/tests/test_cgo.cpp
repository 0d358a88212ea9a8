#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pgf/cgo.hpp"

using namespace pgf;

namespace {
Potential bump_potential(const GridSpec& g, double radius, double height) {
    std::vector<double> c0(g.n, 0.0);
    return Potential(make_bump(g, c0, radius, cd(height, 0.0)));
}
} // namespace

TEST_CASE("potential factorization invariants") {
    GridSpec g(3, 1, 32, 2.0);
    Potential pot = bump_potential(g, 1.0, 3.0);

    double worst = 0.0;
    for (std::size_t i = 0; i < pot.q.data.size(); ++i)
        worst = std::max(worst, std::abs(pot.d1.data[i] * pot.d2.data[i] -
                                         pot.q.data[i]));
    CHECK(worst <= 1e-14 * 3.0);

    // ||d_j||_{n/m} = ||q||_{n/(2m)}^{1/2}
    const double lhs1 = lp_norm(pot.d1, 3.0);
    const double lhs2 = lp_norm(pot.d2, 3.0);
    const double rhs = std::sqrt(lp_norm(pot.q, 1.5));
    CHECK(std::abs(lhs1 - rhs) <= 1e-10 * rhs);
    CHECK(std::abs(lhs2 - rhs) <= 1e-10 * rhs);

    // Support reaching into the 4-cell boundary margin is rejected.
    std::vector<double> c0(3, 0.0);
    ComplexField wide = make_bump(g, c0, 1.95, cd(1.0, 0.0));
    CHECK_THROWS_AS(Potential(std::move(wide)), ContractViolation);
}

TEST_CASE("truncation scheme invariants and default tau") {
    GridSpec g(3, 1, 32, 2.0);
    Potential pot = bump_potential(g, 1.0, 5.0);

    const double dmax = std::sqrt(5.0);
    TruncationScheme half = make_truncation(pot, 0.5 * dmax);
    for (std::size_t i = 0; i < pot.d1.data.size(); ++i) {
        CHECK(std::abs(half.d1_tau.data[i]) <= std::abs(pot.d1.data[i]) + 0.0);
        const double mag = std::abs(pot.d1.data[i]);
        if (mag <= half.tau) {
            CHECK(half.d1_tau.data[i] == pot.d1.data[i]);
        } else {
            CHECK(half.d1_tau.data[i] == cd(0.0, 0.0));
        }
    }

    // ||d - d_tau||_{n/m} nonincreasing in tau, zero above max|d|.
    auto removed = [&](double tau) {
        TruncationScheme t = make_truncation(pot, tau);
        ComplexField diff = axpby(cd(1, 0), pot.d1, cd(-1, 0), t.d1_tau);
        return lp_norm(diff, 3.0);
    };
    double prev = removed(0.1 * dmax);
    for (double frac : {0.3, 0.5, 0.8, 1.01}) {
        const double cur = removed(frac * dmax);
        CHECK(cur <= prev + 1e-14);
        prev = cur;
    }
    CHECK(removed(1.01 * dmax) == 0.0);

    const double tau = default_tau(pot, 1);
    CHECK(removed(tau) <= 0.05 * lp_norm(pot.d1, 3.0));
    CHECK(removed(0.97 * tau) > 0.05 * lp_norm(pot.d1, 3.0));
}

TEST_CASE("zero potential: v = 0, r = 0, u is the pure exponential") {
    GridSpec g(3, 1, 16, 2.0);
    Potential pot{ComplexField(g)};
    ZetaVector z = canonical_zeta(4.0, 3);
    GreenOperator G = assemble_green(z, 1, g, GreenBackend::naive);
    CGOSolution sol = build_cgo(pot, z, G);
    CHECK(norm(sol.v, {0.0, 2.0}) == 0.0);
    CHECK(norm(sol.r, {0.0, 2.0}) == 0.0);
    CHECK(sol.eq_residual == 0.0);
}

TEST_CASE("bump potential: convergence, a-priori bound, remainder decay") {
    GridSpec g(3, 1, 32, 2.0);
    Potential pot = bump_potential(g, 0.9, 5.0);
    const double tol = 1e-8;

    CGOSolution at8, at16;
    for (double s : {8.0, 16.0}) {
        ZetaVector z = canonical_zeta(s, 3);
        GreenOperator G = assemble_green(z, 1, g, GreenBackend::naive);
        CGOSolution sol = build_cgo(pot, z, G, tol);
        if (s == 8.0)
            at8 = sol;
        else
            at16 = sol;
    }
    CHECK(at16.contraction_factor <= 0.5);
    CHECK(at16.update_history.back() <= tol);
    CHECK(at16.eq_residual <= 1e-6);
    CHECK(at8.eq_residual <= 1e-6);
    // ||r||_{L2(K)} strictly smaller at s=16 (10% slack direction).
    CHECK(at16.r_norm_l2K <= 1.1 * at8.r_norm_l2K);
    CHECK(at16.r_norm_l2K < at8.r_norm_l2K);
    // A-priori bound ||v|| <= 2 ||d2|| under contraction <= 1/2.
    CHECK(norm(at16.v, {0.0, 2.0}) <= 2.0 * norm(pot.d2, {0.0, 2.0}));
    CHECK(!at16.low_s_flagged);

    // Fixed-point identity of the returned v.
    ZetaVector z = canonical_zeta(16.0, 3);
    GreenOperator G = assemble_green(z, 1, g, GreenBackend::naive);
    ComplexField gv = apply_green(G, multiply(pot.d1, at16.v));
    ComplexField res = axpby(cd(1, 0), at16.v, cd(1, 0),
                             axpby(cd(1, 0), pot.d2, cd(1, 0),
                                   multiply(pot.d2, gv)));
    CHECK(norm(res, {0.0, 2.0}) <=
          10.0 * tol * norm(pot.d2, {0.0, 2.0}));
}

TEST_CASE("small |zeta|: divergence error or flagged regime") {
    GridSpec g(3, 1, 32, 2.0);

    // A strong potential at small s drives the series divergent.
    Potential strong = bump_potential(g, 0.9, 400.0);
    ZetaVector z2 = canonical_zeta(2.0, 3);
    GreenOperator G2 = assemble_green(z2, 1, g, GreenBackend::naive);
    bool diverged = false;
    try {
        build_cgo(strong, z2, G2);
    } catch (const SeriesDiverged& e) {
        diverged = true;
        CHECK(e.contraction_factor >= 1.0);
    }
    CHECK(diverged);

    // A mild potential at s = 0.1 may still contract, but the regime is
    // flagged as below s_min.
    Potential mild = bump_potential(g, 0.9, 5.0);
    ZetaVector zs = canonical_zeta(0.1, 3);
    GreenOperator Gs = assemble_green(zs, 1, g, GreenBackend::naive);
    try {
        CGOSolution sol = build_cgo(mild, zs, Gs);
        CHECK(sol.low_s_flagged);
    } catch (const SeriesDiverged&) {
        // Equally acceptable small-|zeta| outcome.
    }
}

TEST_CASE("operator norm sweep: decay slope, zero case, q-homogeneity") {
    GridSpec g(3, 1, 32, 2.0);
    Potential pot = bump_potential(g, 0.9, 5.0);
    std::vector<double> s_list{4.0, 8.0, 16.0, 32.0};
    OperatorNormSweep sweep =
        probe_operator_norm(pot, s_list, 1, GreenBackend::naive);
    for (std::size_t i = 1; i < sweep.norms.size(); ++i)
        CHECK(sweep.norms[i] < sweep.norms[i - 1]);
    CHECK(sweep.slope <= -0.75);

    Potential zero{ComplexField(g)};
    OperatorNormSweep zs = probe_operator_norm(zero, s_list, 1,
                                               GreenBackend::naive);
    for (double v : zs.norms) CHECK(v == 0.0);

    // q -> 4q scales d1 and d2 by 2 each, hence the norm by 4.
    Potential scaled = bump_potential(g, 0.9, 20.0);
    std::vector<double> one_s{8.0};
    const double n1 =
        probe_operator_norm(pot, one_s, 1, GreenBackend::naive).norms[0];
    const double n4 =
        probe_operator_norm(scaled, one_s, 1, GreenBackend::naive).norms[0];
    CHECK(std::abs(n4 - 4.0 * n1) <= 1e-8 * n4);
}

TEST_CASE("regularity probe: closed form at q = 0, finiteness, degenerate box") {
    GridSpec g(3, 1, 32, 2.0);
    ZetaVector z = canonical_zeta(4.0, 3);
    GreenOperator G = assemble_green(z, 1, g, GreenBackend::naive);

    Potential zero{ComplexField(g)};
    CGOSolution sol0 = build_cgo(zero, z, G);
    RegularityReport rep0 = check_regularity(zero, sol0, 1, 1.0);
    // Oracle: grad e^{x.zeta} = zeta e^{x.zeta}, |zeta|^2 = 2 s^2, summed on
    // the same sub-box nodes.
    double oracle = 0.0;
    for_each_index(g, [&](std::span<const int> idx, std::size_t) {
        for (int a = 0; a < 3; ++a)
            if (std::abs(g.coordinate(idx[a])) > 1.0) return;
        oracle += 2.0 * z.s * z.s * std::exp(2.0 * z.s * g.coordinate(idx[0]));
    });
    oracle = std::sqrt(oracle * g.cell_volume());
    CHECK(std::abs(rep0.hm_seminorm - oracle) <= 1e-8 * oracle);
    CHECK(rep0.qu_norm == 0.0);

    Potential pot = bump_potential(g, 0.9, 5.0);
    CGOSolution sol = build_cgo(pot, z, G);
    RegularityReport rep = check_regularity(pot, sol, 1, 1.0);
    CHECK(std::isfinite(rep.hm_seminorm));
    CHECK(rep.hm_seminorm > 0.0);
    CHECK(rep.qu_norm > 0.0);

    CHECK_THROWS_AS(check_regularity(pot, sol, 1, 0.0), ContractViolation);
    CHECK_THROWS_AS(check_regularity(pot, sol, 1, 3.0), ContractViolation);
}
