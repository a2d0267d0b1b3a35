#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sdlab/errors.hpp"
#include "sdlab/hardy.hpp"

using namespace sdlab;
using testing::power_operator;

TEST_CASE("alpha = 0: a = 1, b = (x - 0.5)^2 at N = 4096, grading 4") {
    const auto rep = best_constant(power_operator(0.0, 2.0, 4096, 0.0, 4.0));
    REQUIRE(rep.analytic_bound.has_value());
    CHECK(*rep.analytic_bound == 4.0);
    CHECK(rep.cstar_h >= 3.6);
    CHECK(rep.cstar_h <= 4.0);
    CHECK(rep.mesh_n == 4096);
    CHECK(rep.cstar_h * rep.mu_min == doctest::Approx(1.0));
}

TEST_CASE("alpha = 0.5 stays below 16") {
    const auto rep = best_constant(power_operator(0.5, 1.5, 512, 0.0, 4.0));
    REQUIRE(rep.analytic_bound.has_value());
    CHECK(*rep.analytic_bound == doctest::Approx(16.0));
    CHECK(rep.cstar_h <= 16.0 * (1 + 1e-6));
}

TEST_CASE("alpha = 1 has no analytic bound") {
    CHECK_FALSE(conjugate_hardy_bound(make_power_pair(0.5, 1.0, 1.0)).has_value());
    CHECK_FALSE(conjugate_hardy_bound(make_power_pair(0.5, 0.5, 0.5)).has_value());
}

TEST_CASE("inverse iteration agrees with a dense generalized eigensolve") {
    for (auto [k1, k2] : {std::pair{0.5, 0.5}, {0.5, 1.2}, {1.2, 0.8}, {0.0, 2.0}}) {
        const auto op = power_operator(k1, k2, 128);
        const double cstar = best_constant(op).cstar_h;
        CHECK(cstar == doctest::Approx(oracle::largest_generalized(op.singular_mass, op.stiffness)).epsilon(1e-8));
    }
}

TEST_CASE("nestedness: C*_h nondecreasing under refinement") {
    for (auto [k1, k2] : {std::pair{0.5, 0.5}, {0.0, 2.0}, {0.5, 1.5}, {1.0, 1.0}}) {
        double prev = 0.0;
        for (int n : {64, 128, 256, 512}) {
            const double c = best_constant(power_operator(k1, k2, n, 0.0, 4.0)).cstar_h;
            CHECK(prev <= c + 1e-12);
            prev = c;
        }
    }
}

TEST_CASE("conjugate upper-bound law at every resolution") {
    for (double alpha : {0.0, 0.3, 0.5, 1.4}) {
        for (int n : {64, 256, 1024}) {
            const auto rep = best_constant(power_operator(alpha, 2.0 - alpha, n, 0.0, 4.0));
            REQUIRE(rep.analytic_bound.has_value());
            CHECK(rep.cstar_h <= *rep.analytic_bound * (1 + 1e-6));
        }
    }
}

TEST_CASE("extremal function changes sign at most once on each side of x0") {
    const auto op = power_operator(0.5, 0.5, 256);
    const auto rep = best_constant(op);
    const std::size_t m = op.mesh.x0_index;
    auto sign_changes = [&](std::size_t lo, std::size_t hi) {
        int changes = 0;
        double last = 0.0;
        for (std::size_t i = lo; i <= hi; ++i) {
            const double v = rep.eigvec[i];
            if (std::abs(v) < 1e-14) continue;
            if (last != 0.0 && (v > 0) != (last > 0)) ++changes;
            last = v;
        }
        return changes;
    };
    CHECK(sign_changes(1, m) <= 1);
    CHECK(sign_changes(m, op.mesh.nodes.size() - 2) <= 1);
}

TEST_CASE("best_constant errors") {
    auto op = power_operator(0.5, 0.5, 64);
    CHECK_THROWS_AS(best_constant(op, 1), ConvergenceError);
    op.singular_mass = SymTridiagonal(op.n_dof());
    CHECK_THROWS_AS(best_constant(op), DomainError);
}

TEST_CASE("coercivity threshold on the WWD benchmark") {
    const auto base = power_operator(0.5, 0.5, 256);
    const double cstar = best_constant(base).cstar_h;

    const auto neg = coercivity(base.with_lambda(-1.0), cstar);
    CHECK(neg.Lambda_h == 1.0);
    CHECK(neg.admissible);

    const auto half = coercivity(base.with_lambda(0.5 / cstar), cstar);
    CHECK(half.Lambda_h == doctest::Approx(0.5));
    CHECK(half.admissible);
    CHECK(half.min_eig_shifted > 0.0);
    CHECK(half.min_eig_shifted >= half.Lambda_h - 1e-10);

    const auto over = coercivity(base.with_lambda(1.5 / cstar), cstar);
    CHECK(over.min_eig_shifted < 0.0);
    CHECK_FALSE(over.admissible);

    CHECK_THROWS_AS(coercivity(base, 0.0), PreconditionError);
}

TEST_CASE("shifted minimum eigenvalue matches the dense pencil") {
    const auto base = power_operator(0.5, 0.5, 96);
    const double nu = oracle::largest_generalized(base.singular_mass, base.stiffness);
    for (double lambda : {0.3 / nu, 0.9 / nu, 1.5 / nu}) {
        CHECK(shifted_min_eigenvalue(base, lambda) == doctest::Approx(1.0 - lambda * nu).epsilon(1e-9));
    }
    const double lneg = -2.0;
    const auto shifted = base.stiffness.combine(1.0, base.singular_mass, -lneg);
    CHECK(shifted_min_eigenvalue(base, lneg) ==
          doctest::Approx(oracle::smallest_generalized(shifted, base.stiffness)).epsilon(1e-9));
}

TEST_CASE("coercivity consistency on random vectors") {
    const auto base = power_operator(0.5, 0.5, 128);
    const double cstar = best_constant(base).cstar_h;
    std::mt19937_64 rng(5);
    for (double lambda : {-1.0, 0.5 / cstar, 0.9 / cstar}) {
        const auto op = base.with_lambda(lambda);
        const auto rep = coercivity(op, cstar);
        REQUIRE(rep.admissible);
        const auto a = op.generator();
        for (int trial = 0; trial < 100; ++trial) {
            const auto u = testing::random_vector(op.n_dof(), rng);
            CHECK(a.quadratic(u) >= rep.Lambda_h * op.stiffness.quadratic(u) - 1e-9 * testing::dot(u, u));
        }
    }
}

TEST_CASE("verify_hp_weight") {
    const auto mesh = build_mesh(256, 0.5, 2.0);
    CHECK(verify_hp_weight(make_power_pair(0.5, 0.5, 0.5), 1.5, mesh).b_weight);
    const auto strong_a = verify_hp_weight(make_power_pair(0.5, 1.6, 0.4), 1.5, mesh);
    CHECK(strong_a.a_weight);
    CHECK(strong_a.passed());
    CHECK_THROWS_AS(verify_hp_weight(make_power_pair(0.5, 0.5, 1.5), 0.5, mesh), PreconditionError);
    // p / |x - x0|^q = |x - x0|^(1.5 - 3) grows toward x0.
    CHECK_FALSE(verify_hp_weight(make_power_pair(0.5, 0.5, 0.5), 3.0, mesh).b_weight);
}
