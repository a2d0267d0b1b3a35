#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sdlab/errors.hpp"
#include "sdlab/evolution.hpp"

using namespace sdlab;

namespace {

const double kPi = std::numbers::pi;

double decay_error(int n, TimeScheme scheme, double T = 0.1) {
    const auto op = testing::heat_operator(n);
    const auto u0 = op.sample([](double x) { return std::sin(kPi * x); });
    const auto traj = solve_forward(op, TimeGrid::make(T, n), u0, scheme);
    const auto norms = mass_norms(op, traj);
    const double exact = std::exp(-kPi * kPi * T);
    return std::abs(norms.back() / norms.front() - exact) / exact;
}

Trajectory random_source(const DiscreteOperator& op, int n_steps, std::mt19937_64& rng) {
    Trajectory h(TrajectoryKind::Source, n_steps, op.n_dof());
    std::normal_distribution<double> nd;
    for (int n = 1; n <= n_steps; ++n) {
        for (double& v : h.row(n)) v = nd(rng);
    }
    return h;
}

}  // namespace

TEST_CASE("zero data gives the zero trajectory") {
    const auto op = testing::wwd_benchmark(64);
    const auto tg = TimeGrid::make(0.5, 16);
    const std::vector<double> zero(op.n_dof(), 0.0);
    for (double v : solve_forward(op, tg, zero).values()) CHECK(v == 0.0);
    for (double v : solve_adjoint(op, tg, zero).values()) CHECK(v == 0.0);
    for (double e : energy(op, solve_adjoint(op, tg, zero))) CHECK(e == 0.0);
}

TEST_CASE("implicit Euler contracts in the M-norm") {
    const auto wwd = testing::power_operator(0.5, 0.5, 128);
    const double c = testing::cstar_of(wwd);
    std::vector<DiscreteOperator> ops{wwd.with_lambda(0.5 / c), wwd.with_lambda(-0.5 / c),
                                      testing::power_operator(1.5, 1.5, 128, -1.0)};
    for (auto [k1, k2] : {std::pair{0.5, 1.2}, {1.2, 0.5}}) {
        const auto base = testing::power_operator(k1, k2, 128);
        ops.push_back(base.with_lambda(0.5 / testing::cstar_of(base)));
    }
    std::mt19937_64 rng(7);
    for (const auto& op : ops) {
        const auto norms = mass_norms(op, solve_forward(op, TimeGrid::make(0.2, 64), testing::random_smooth(op, rng)));
        for (std::size_t n = 0; n + 1 < norms.size(); ++n) CHECK(norms[n + 1] <= norms[n] * (1 + 1e-12));
    }
}

TEST_CASE("one step equals the dense step map") {
    const auto op = testing::wwd_benchmark(48);
    const auto tg = TimeGrid::make(0.3, 10);
    std::mt19937_64 rng(9);
    const auto u = testing::random_vector(op.n_dof(), rng);
    for (auto scheme : {TimeScheme::ImplicitEuler, TimeScheme::CrankNicolson}) {
        const Eigen::MatrixXd s = oracle::step_map(op.mass, op.generator(), tg.dt(), theta_of(scheme));
        const Eigen::VectorXd expect = s * Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
        const auto traj = solve_forward(op, tg, u, scheme);
        for (std::size_t i = 0; i < u.size(); ++i) {
            CHECK(traj.row(1)[i] == doctest::Approx(expect(static_cast<Eigen::Index>(i))).epsilon(1e-10));
        }
    }
}

TEST_CASE("heat eigenmode decay with implicit Euler") {
    CHECK(decay_error(256, TimeScheme::ImplicitEuler) < 1e-2);
}

TEST_CASE("Crank-Nicolson decay error is second order") {
    const double e1 = decay_error(128, TimeScheme::CrankNicolson);
    const double e2 = decay_error(256, TimeScheme::CrankNicolson);
    CHECK(std::log2(e1 / e2) >= 1.8);
}

TEST_CASE("adjoint is the forward solve under time reversal, step by step") {
    const auto op = testing::wwd_benchmark(64);
    const auto tg = TimeGrid::make(0.4, 20);
    std::mt19937_64 rng(13);
    const auto vT = testing::random_vector(op.n_dof(), rng);
    for (auto scheme : {TimeScheme::ImplicitEuler, TimeScheme::CrankNicolson}) {
        const auto adj = solve_adjoint(op, tg, vT, scheme);
        const auto fwd = solve_forward(op, tg, vT, scheme);
        for (int n = 0; n <= tg.n_steps; ++n) {
            const auto a = adj.row(n);
            const auto f = fwd.row(tg.n_steps - n);
            for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == f[i]);
        }
    }
}

TEST_CASE("adjoint heat mode decays backward") {
    const auto op = testing::heat_operator(256);
    const double T = 0.1;
    const auto vT = op.sample([](double x) { return std::sin(kPi * x); });
    const auto adj = solve_adjoint(op, TimeGrid::make(T, 256), vT);
    const double ratio = std::sqrt(op.mass.quadratic(adj.row(0)) / op.mass.quadratic(vT));
    CHECK(ratio == doctest::Approx(std::exp(-kPi * kPi * T)).epsilon(1e-2));
}

TEST_CASE("duality identity for implicit Euler and Crank-Nicolson") {
    std::mt19937_64 rng(17);
    for (auto scheme : {TimeScheme::ImplicitEuler, TimeScheme::CrankNicolson}) {
        for (auto omega_ab : {std::pair{0.6, 0.9}, {0.3, 0.7}, {0.0, 1.0}}) {
            const auto op = testing::wwd_benchmark(96);
            const auto tg = TimeGrid::make(0.5, 40);
            const auto omega = ControlPattern::make(omega_ab.first, omega_ab.second, op.mesh.x0);
            const auto u0 = testing::random_vector(op.n_dof(), rng);
            const auto vT = testing::random_vector(op.n_dof(), rng);
            const auto h = random_source(op, tg.n_steps, rng);
            const auto u = solve_forward(op, tg, u0, h, omega, scheme);
            const auto v = solve_adjoint(op, tg, vT, scheme);
            const double lhs = op.mass.bilinear(u.row(tg.n_steps), vT) - op.mass.bilinear(u0, v.row(0));
            const double rhs = control_pairing(op, tg, h, v, omega, scheme);
            const double scale = std::abs(op.mass.bilinear(u.row(tg.n_steps), vT)) + std::abs(rhs);
            CHECK(std::abs(lhs - rhs) <= 1e-9 * scale);
        }
    }
}

TEST_CASE("adjoint energy is nondecreasing in n") {
    const auto op = testing::wwd_benchmark(128);
    const auto tg = TimeGrid::make(0.5, 64);
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 5; ++trial) {
        const auto e = energy(op, solve_adjoint(op, tg, testing::random_vector(op.n_dof(), rng)));
        double emax = 0.0;
        for (double x : e) emax = std::max(emax, std::abs(x));
        for (std::size_t n = 0; n + 1 < e.size(); ++n) CHECK(e[n + 1] >= e[n] - 1e-9 * emax);
    }
}

TEST_CASE("negative lambda: energy dominates the stiffness energy") {
    const auto op = testing::power_operator(0.5, 0.5, 64, -1.0);
    std::mt19937_64 rng(23);
    const auto adj = solve_adjoint(op, TimeGrid::make(0.2, 16), testing::random_vector(op.n_dof(), rng));
    const auto e = energy(op, adj);
    for (int n = 0; n <= adj.n_steps(); ++n) CHECK(e[static_cast<std::size_t>(n)] >= op.stiffness.quadratic(adj.row(n)));
}

TEST_CASE("inadmissible lambda is refused with the shifted eigenvalue") {
    const auto op = testing::wwd_benchmark(64, 1.5);
    const std::vector<double> u0(op.n_dof(), 1.0);
    try {
        solve_forward(op, TimeGrid::make(0.1, 8), u0);
        FAIL("expected InadmissibleLambdaError");
    } catch (const InadmissibleLambdaError& e) {
        CHECK(e.min_eig_shifted() < 0.0);
        CHECK(e.lambda() == op.lambda);
    }
}

TEST_CASE("argument checks") {
    const auto op = testing::heat_operator(32);
    CHECK_THROWS_AS(TimeGrid::make(1.0, 7), DomainError);
    CHECK_THROWS_AS(TimeGrid::make(0.0, 8), DomainError);
    CHECK_THROWS_AS(solve_forward(op, TimeGrid::make(1.0, 8), std::vector<double>(3)), DimensionError);
    CHECK_THROWS_AS(solve_adjoint(op, TimeGrid::make(1.0, 8), std::vector<double>(3)), DimensionError);
    std::vector<double> bad(op.n_dof(), 0.0);
    bad[2] = std::nan("");
    CHECK_THROWS_AS(solve_forward(op, TimeGrid::make(1.0, 8), bad), InstabilityError);
}

TEST_CASE("time grid and control pattern") {
    const auto tg = TimeGrid::make(0.5, 10);
    CHECK(tg.dt() == doctest::Approx(0.05));
    CHECK(tg.times().size() == 11);
    CHECK(tg.time(10) == 0.5);
    CHECK(ControlPattern::make(0.3, 0.7, 0.5).contains_x0);
    CHECK_FALSE(ControlPattern::make(0.6, 0.9, 0.5).contains_x0);
    CHECK_THROWS_AS(ControlPattern::make(0.7, 0.3, 0.5), DomainError);
    CHECK_THROWS_AS(ControlPattern::make(-0.1, 0.3, 0.5), DomainError);
}
