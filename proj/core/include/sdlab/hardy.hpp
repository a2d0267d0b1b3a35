#pragma once

// Discrete Hardy-Poincare constants  int u^2/b <= C int a (u')^2  and the
// coercivity of the form  int a (u')^2 - lambda int u^2/b.

#include <cstddef>
#include <optional>
#include <vector>

#include "sdlab/coefficients.hpp"
#include "sdlab/spaces.hpp"

namespace sdlab {

struct HardyReport {
    /// Best discrete constant C*_h = 1 / mu_min.
    double cstar_h = 0.0;
    /// Smallest eigenvalue of K_a u = mu M_b u.
    double mu_min = 0.0;
    /// 4 / (1 - alpha)^2 for a = |x-x0|^alpha, b = |x-x0|^(2-alpha), alpha != 1.
    std::optional<double> analytic_bound;
    /// Extremal function on all mesh nodes, M_b-normalized.
    std::vector<double> eigvec;
    std::size_t mesh_n = 0;
    int iterations = 0;
};

/// Inverse iteration with the K_a Cholesky factor, seeded with exp(-|x-x0|/0.1).
/// Throws DomainError when M_b vanishes and ConvergenceError after `max_iter` steps.
HardyReport best_constant(const DiscreteOperator& op, int max_iter = 500, double rel_tol = 1e-10);

std::optional<double> conjugate_hardy_bound(const CoefficientPair& pair);

/// Largest lambda used for admissibility decisions: 0.95 / C*_h.
inline double safe_lambda_max(double cstar_h) { return 0.95 / cstar_h; }

struct CoercivityReport {
    double lambda = 0.0;
    double Lambda_h = 1.0;
    double min_eig_shifted = 1.0;
    bool admissible = true;
};

/// Uses op.lambda. min_eig_shifted comes from inertia bisection, independent of cstar_h.
CoercivityReport coercivity(const DiscreteOperator& op, double cstar_h);

/// Smallest eigenvalue sigma of (K_a - lambda M_b) u = sigma K_a u, located by
/// bisection on the Sylvester inertia of (1 - sigma) K_a - lambda M_b.
double shifted_min_eigenvalue(const DiscreteOperator& op, double lambda);

struct HardyWeightCheck {
    /// p = (x - x0)^2 / b.
    bool b_weight = false;
    /// p = (a |x - x0|^4)^(1/3).
    bool a_weight = false;
    bool passed() const noexcept { return b_weight && a_weight; }
};

/// Discrete check that p / |x - x0|^q is nonincreasing left of x0 and
/// nondecreasing right of it, on the mesh nodes. Requires q > 1.
HardyWeightCheck verify_hp_weight(const CoefficientPair& pair, double q, const Mesh& mesh);

}  // namespace sdlab
