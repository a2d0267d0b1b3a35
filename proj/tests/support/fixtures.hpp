#pragma once

// Benchmark configurations and random data shared by the unit and acceptance tests.

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "sdlab/hardy.hpp"
#include "sdlab/spaces.hpp"

namespace sdlab::testing {

inline DiscreteOperator power_operator(double k1, double k2, int n_cells, double lambda = 0.0,
                                       std::optional<double> grading = std::nullopt, double x0 = 0.5) {
    const CoefficientPair pair = make_power_pair(x0, k1, k2, lambda);
    const double g = grading ? *grading : default_grading(k1, k2);
    return assemble(pair, build_mesh(n_cells, x0, g));
}

inline double cstar_of(const DiscreteOperator& op) { return best_constant(op).cstar_h; }

/// K1 = K2 = 0.5 at x0 = 0.5 with lambda = factor / C*_h on the same mesh.
inline DiscreteOperator wwd_benchmark(int n_cells, double factor = 0.5) {
    DiscreteOperator op = power_operator(0.5, 0.5, n_cells);
    return op.with_lambda(factor / cstar_of(op));
}

/// a = b = 1, lambda = 0.
inline DiscreteOperator heat_operator(int n_cells) { return power_operator(0.0, 0.0, n_cells, 0.0, 1.0); }

/// sum_{k=1}^{8} xi_k sin(k pi x) / k^2 with xi_k standard normal.
inline std::vector<double> random_smooth(const DiscreteOperator& op, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    std::vector<double> xi(8);
    for (double& c : xi) c = nd(rng);
    return op.sample([&](double x) {
        double s = 0.0;
        for (int k = 1; k <= 8; ++k) s += xi[k - 1] * std::sin(k * std::numbers::pi * x) / (k * k);
        return s;
    });
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    std::vector<double> v(n);
    for (double& c : v) c = nd(rng);
    return v;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double m_norm(const DiscreteOperator& op, const std::vector<double>& u) {
    return std::sqrt(op.mass.quadratic(u));
}

}  // namespace sdlab::testing
