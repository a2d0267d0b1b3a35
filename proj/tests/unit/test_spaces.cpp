#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sdlab/errors.hpp"
#include "sdlab/spaces.hpp"

using namespace sdlab;

namespace {

struct Full {
    std::vector<double> kd, ko, bd, bo;
};

// Assembles K_a and M_b over all mesh nodes with tanh-sinh quadrature, skipping
// the x0 hat when it is eliminated.
Full oracle_full(const CoefficientPair& pair, const Mesh& mesh, bool constrained) {
    const std::size_t n = mesh.nodes.size();
    Full f{std::vector<double>(n), std::vector<double>(n - 1), std::vector<double>(n), std::vector<double>(n - 1)};
    for (std::size_t c = 0; c + 1 < n; ++c) {
        const double xl = mesh.nodes[c];
        const double xr = mesh.nodes[c + 1];
        const double h = xr - xl;
        const double ia = oracle::integral([&](double x) { return pair.a.value(x); }, xl, xr,
                                         pair.a.breakpoints(xl, xr)) /
                        (h * h);
        f.kd[c] += ia;
        f.kd[c + 1] += ia;
        f.ko[c] -= ia;
        const bool left_is_x0 = c == mesh.x0_index;
        const bool right_is_x0 = c + 1 == mesh.x0_index;
        const auto kb = pair.b.exponent();
        std::array<double, 3> p{};
        if (kb && (left_is_x0 || right_is_x0)) {
            std::array<double, 3> o{};
            if (constrained) {
                // Only the far hat survives; its product vanishes quadratically at x0.
                o[2] = oracle::integral([&](double t) { return std::pow(t, 2.0 - *kb) / (h * h); }, 0.0, h);
            } else {
                o = oracle::offset_products([&](double t) { return std::pow(t, -*kb); }, h);
            }
            p = left_is_x0 ? o : std::array<double, 3>{o[2], o[1], o[0]};
        } else {
            p = oracle::cell_products([&](double x) { return 1.0 / pair.b.value(x); }, xl, xr,
                                      pair.b.breakpoints(xl, xr));
        }
        if (!(constrained && left_is_x0)) f.bd[c] += p[0];
        if (!(constrained && (left_is_x0 || right_is_x0))) f.bo[c] += p[1];
        if (!(constrained && right_is_x0)) f.bd[c + 1] += p[2];
    }
    return f;
}

void compare_with_oracle(const CoefficientPair& pair, const Mesh& mesh) {
    const DiscreteOperator op = assemble(pair, mesh);
    const Full f = oracle_full(pair, mesh, op.constrained_x0);
    for (std::size_t k = 0; k < op.n_dof(); ++k) {
        const std::size_t i = op.dofs[k];
        CHECK(op.stiffness.diag()[k] == doctest::Approx(f.kd[i]).epsilon(1e-10));
        CHECK(op.singular_mass.diag()[k] == doctest::Approx(f.bd[i]).epsilon(1e-10));
        if (k + 1 < op.n_dof() && op.dofs[k + 1] == i + 1) {
            CHECK(op.stiffness.off()[k] == doctest::Approx(f.ko[i]).epsilon(1e-10));
            CHECK(op.singular_mass.off()[k] == doctest::Approx(f.bo[i]).epsilon(1e-10));
        }
    }
}

}  // namespace

TEST_CASE("build_mesh: grading 1 is uniform and contains x0") {
    const Mesh m = build_mesh(16, 0.5, 1.0);
    REQUIRE(m.nodes.size() == 17);
    for (std::size_t c = 0; c < m.n_cells(); ++c) CHECK(m.width(c) == doctest::Approx(1.0 / 16));
    CHECK(m.nodes[m.x0_index] == 0.5);
}

TEST_CASE("build_mesh: grading 2 gives x0-adjacent width 0.5 / 8^2") {
    const Mesh m = build_mesh(16, 0.5, 2.0);
    CHECK(m.width(m.x0_index) == doctest::Approx(0.0078125).epsilon(1e-14));
    CHECK(m.width(m.x0_index - 1) == doctest::Approx(0.0078125).epsilon(1e-14));
}

TEST_CASE("build_mesh: x0-adjacent cells are the smallest") {
    for (double g : {1.0, 1.5, 2.0, 4.0}) {
        const Mesh m = build_mesh(64, 0.3, g);
        double wmin = 1.0;
        for (std::size_t c = 0; c < m.n_cells(); ++c) wmin = std::min(wmin, m.width(c));
        CHECK(std::min(m.width(m.x0_index), m.width(m.x0_index - 1)) <= wmin * (1.0 + 1e-12));
        CHECK(std::is_sorted(m.nodes.begin(), m.nodes.end()));
        CHECK(m.nodes.front() == 0.0);
        CHECK(m.nodes.back() == 1.0);
    }
}

TEST_CASE("build_mesh rejects bad inputs") {
    CHECK_THROWS_AS(build_mesh(15, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(build_mesh(14, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(build_mesh(16, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(build_mesh(16, 0.5, 0.5), DomainError);
}

TEST_CASE("default_grading") {
    CHECK(default_grading(0.5, 0.5) == doctest::Approx(4.0 / 3.0));
    CHECK(default_grading(1.0, 1.0) == doctest::Approx(2.0));
    CHECK(default_grading(1.9, 0.1) == 4.0);
    CHECK(default_grading(0.0, 0.0) == 1.0);
}

TEST_CASE("a = 1 on a uniform mesh gives the classical stiffness matrix") {
    const auto op = testing::heat_operator(32);
    const double h = 1.0 / 32;
    for (std::size_t k = 0; k < op.n_dof(); ++k) CHECK(op.stiffness.diag()[k] == doctest::Approx(2.0 / h));
    for (std::size_t k = 0; k + 1 < op.n_dof(); ++k) CHECK(op.stiffness.off()[k] == doctest::Approx(-1.0 / h));
}

TEST_CASE("a = |x - 0.5|: each x0 cell contributes 1/2 to the stiffness") {
    const auto op = testing::power_operator(1.0, 0.5, 16, 0.0, 1.0);
    REQUIRE_FALSE(op.constrained_x0);
    const std::size_t k0 = op.mesh.x0_index - 1;
    CHECK(op.dofs[k0] == op.mesh.x0_index);
    CHECK(op.stiffness.diag()[k0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(op.stiffness.off()[k0] == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("M_b is finite for K2 < 1 and x0 is eliminated for K2 >= 1") {
    const auto weak = testing::power_operator(0.5, 0.5, 64);
    for (double v : weak.singular_mass.diag()) CHECK(std::isfinite(v));
    CHECK(weak.n_dof() == 63);
    const auto strong = testing::power_operator(0.5, 1.2, 64);
    CHECK(strong.constrained_x0);
    CHECK(strong.n_dof() == 62);
    CHECK(std::find(strong.dofs.begin(), strong.dofs.end(), strong.mesh.x0_index) == strong.dofs.end());
    for (double v : strong.singular_mass.diag()) CHECK(std::isfinite(v));
}

TEST_CASE("assembly matches adaptive quadrature") {
    SUBCASE("power WWD") { compare_with_oracle(make_power_pair(0.5, 0.5, 0.5), build_mesh(48, 0.5, 4.0 / 3.0)); }
    SUBCASE("power SSD, off-center") { compare_with_oracle(make_power_pair(0.4, 1.3, 1.4), build_mesh(40, 0.4, 2.5)); }
    SUBCASE("power K2 = 1") { compare_with_oracle(make_power_pair(0.5, 1.0, 1.0), build_mesh(32, 0.5, 2.0)); }
    SUBCASE("tabulated a, power b") {
        const double x0 = 0.5;
        const CoefficientPair pair{
            x0, CoefficientFunction::tabulated({0.0, 0.2, 0.5, 0.7, 1.0}, {0.9, 0.4, 0.0, 0.3, 1.1}, x0),
            CoefficientFunction::power(0.7, x0), 0.0, 1.0};
        compare_with_oracle(pair, build_mesh(36, x0, 1.5));
    }
    SUBCASE("smooth tabulated b away from zero") {
        const double x0 = 0.5;
        std::vector<double> xs, bs;
        for (int i = 0; i <= 20; ++i) {
            xs.push_back(i / 20.0);
            bs.push_back(1.0 + std::sin(i / 20.0));
        }
        const CoefficientPair pair{x0, CoefficientFunction::power(0.3, x0),
                                   CoefficientFunction::tabulated(xs, bs, x0), 0.0, 1.0};
        compare_with_oracle(pair, build_mesh(30, x0, 1.2));
    }
}

TEST_CASE("matrices: M and K_a positive definite, M_b positive semidefinite") {
    for (auto [k1, k2] : {std::pair{0.5, 0.5}, {0.5, 1.2}, {1.2, 0.5}, {1.0, 1.0}, {1.5, 1.5}}) {
        const auto op = testing::power_operator(k1, k2, 128);
        CHECK(op.mass.negative_count() == 0);
        CHECK(op.singular_mass.negative_count() == 0);
        CHECK_NOTHROW(BandedCholesky(op.stiffness));
        CHECK_NOTHROW(BandedCholesky(op.mass));
    }
}

TEST_CASE("solve_banded") {
    SUBCASE("identity") {
        SymTridiagonal id(std::vector<double>(5, 1.0), std::vector<double>(4, 0.0));
        const std::vector<double> e1{1, 0, 0, 0, 0};
        CHECK(solve_banded(id, e1) == e1);
    }
    SUBCASE("residual below 1e-12") {
        const auto op = testing::power_operator(0.5, 0.5, 256);
        std::mt19937_64 rng(3);
        const auto rhs = testing::random_vector(op.n_dof(), rng);
        const auto x = solve_banded(op.stiffness, rhs);
        const auto r = op.stiffness * x;
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            num += (r[i] - rhs[i]) * (r[i] - rhs[i]);
            den += rhs[i] * rhs[i];
        }
        CHECK(std::sqrt(num / den) <= 1e-12);
    }
    SUBCASE("-u'' = 1 at the nodes") {
        const auto op = testing::heat_operator(64);
        const auto one = op.sample([](double) { return 1.0; });
        const auto u = solve_banded(op.stiffness, op.mass * one);
        for (std::size_t k = 0; k < op.n_dof(); ++k) {
            const double x = op.dof_x(k);
            CHECK(u[k] == doctest::Approx(x * (1 - x) / 2).epsilon(1e-3));
        }
    }
    SUBCASE("indefinite input names the pivot") {
        SymTridiagonal a({1.0, -1.0, 1.0}, {0.0, 0.0});
        try {
            solve_banded(a, std::vector<double>{1, 1, 1});
            FAIL("expected NotSpdError");
        } catch (const NotSpdError& e) {
            CHECK(e.pivot_index() == 1);
        }
    }
}

TEST_CASE("refinement: order 2 for -u'' = pi^2 sin(pi x)") {
    auto err = [](int n) {
        const auto op = testing::heat_operator(n);
        const double pi = std::numbers::pi;
        const auto f = op.sample([&](double x) { return pi * pi * std::sin(pi * x); });
        const auto u = solve_banded(op.stiffness, op.mass * f);
        double e = 0.0;
        for (std::size_t k = 0; k < op.n_dof(); ++k) e = std::max(e, std::abs(u[k] - std::sin(pi * op.dof_x(k))));
        return e;
    };
    const double e1 = err(64);
    const double e2 = err(128);
    CHECK(std::log2(e1 / e2) >= 1.9);
}

TEST_CASE("rayleigh") {
    const auto op = testing::heat_operator(32);
    const std::vector<double> zero(op.n_dof(), 0.0);
    const auto z = rayleigh(op, zero);
    CHECK(z.stiffness == 0.0);
    CHECK(z.mass == 0.0);
    CHECK(z.singular == 0.0);

    std::vector<double> hat(op.n_dof(), 0.0);
    hat[3] = 1.0;
    CHECK(rayleigh(op, hat).stiffness == doctest::Approx(2.0 * 32));

    const auto wwd = testing::power_operator(0.5, 0.5, 64);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto r = rayleigh(wwd, testing::random_vector(wwd.n_dof(), rng));
        CHECK(r.stiffness >= 0.0);
        CHECK(r.mass >= 0.0);
        CHECK(r.singular >= 0.0);
    }
    CHECK_THROWS_AS(rayleigh(op, std::vector<double>(3)), DimensionError);
}

TEST_CASE("restricted mass over (0,1) is M; support mask") {
    const auto op = testing::power_operator(0.5, 0.5, 64);
    const auto mw = restricted_mass(op, 0.0, 1.0);
    for (std::size_t k = 0; k < op.n_dof(); ++k) CHECK(mw.diag()[k] == doctest::Approx(op.mass.diag()[k]));
    const auto part = restricted_mass(op, 0.6, 0.9);
    const auto mask = support_mask(op, 0.6, 0.9);
    for (std::size_t k = 0; k < op.n_dof(); ++k) {
        const double x = op.dof_x(k);
        if (x > 0.62 && x < 0.88) CHECK(mask[k]);
        if (x < 0.55 || x > 0.95) {
            CHECK_FALSE(mask[k]);
            CHECK(part.diag()[k] == 0.0);
        }
    }
}

TEST_CASE("expand and sample") {
    const auto op = testing::power_operator(0.5, 1.2, 32);
    const auto u = op.sample([](double x) { return x; });
    const auto full = op.expand(u);
    CHECK(full.size() == op.mesh.nodes.size());
    CHECK(full.front() == 0.0);
    CHECK(full[op.mesh.x0_index] == 0.0);
    CHECK(full[op.dofs[0]] == doctest::Approx(op.mesh.nodes[op.dofs[0]]));
}
