#pragma once

// Observability constant estimation and penalized HUM null control.
//
// With S the adjoint map vT -> v and q_n the adjoint state paired with step n,
// the control-to-terminal map from a zero state is  G pT = u(T)  for the source
// h_{n+1} = q_n(pT) on omega. G is M-self-adjoint and
//   <pT, G pT>_M = sum_n dt q_n' M_omega q_n,
// the discrete int_0^T int_omega v^2.

#include <span>
#include <vector>

#include "sdlab/evolution.hpp"

namespace sdlab {

/// Shared machinery: one factorized propagator plus the restricted mass on omega.
class ControlSystem {
public:
    ControlSystem(const DiscreteOperator& op, const TimeGrid& tg, const ControlPattern& omega,
                  TimeScheme scheme = TimeScheme::ImplicitEuler);

    const DiscreteOperator& op() const noexcept { return *op_; }
    const TimeGrid& grid() const noexcept { return prop_.grid(); }
    const ControlPattern& omega() const noexcept { return omega_; }
    const SymTridiagonal& restricted_mass() const noexcept { return m_omega_; }
    std::size_t n_dof() const noexcept { return op_->n_dof(); }

    /// Control trajectory of terminal adjoint data: row n+1 holds q_n, zeroed
    /// at dofs whose support misses omega; row 0 is zero.
    Trajectory control_of(std::span<const double> pT) const;
    /// Terminal state from u0 under source h.
    std::vector<double> terminal(std::span<const double> u0, const Trajectory& h) const;
    /// Terminal state from u0 without control.
    std::vector<double> free_terminal(std::span<const double> u0) const;
    /// G pT.
    std::vector<double> gramian(std::span<const double> pT) const;
    /// sum_n dt h_{n+1}' M_omega h_{n+1}.
    double cost(const Trajectory& h) const;
    /// v(0) of the adjoint problem with v(T) = vT.
    std::vector<double> adjoint_initial(std::span<const double> vT) const;

private:
    const DiscreteOperator* op_;
    Propagator prop_;
    ControlPattern omega_;
    SymTridiagonal m_omega_;
    std::vector<bool> support_;
};

struct ObservabilityReport {
    /// Largest ||v(0)||^2 / int int_omega v^2 found; +inf when omega misses part of the dynamics.
    double c_T = 0.0;
    int iterations = 0;
    std::vector<double> extremal_vT;
    bool converged = false;
    /// False when the observation form is numerically singular.
    bool observable = true;
    /// Rayleigh quotient after each ascent step.
    std::vector<double> history;
};

/// Power iteration vT <- G^{-1} N vT on the pencil (N, G), N = S' M S, with
/// M-normalization; stops when successive quotients differ by < tol relative.
/// A singular G is reported through `observable`, not raised.
ObservabilityReport observability_constant(const DiscreteOperator& op, const TimeGrid& tg,
                                           const ControlPattern& omega, std::span<const double> seed_vT,
                                           int max_iters = 200, double tol = 1e-6,
                                           TimeScheme scheme = TimeScheme::ImplicitEuler);

struct HUMProblem {
    std::vector<double> u0;
    ControlPattern omega;
    double epsilon = 1e-8;
    double cg_tol = 1e-10;
    int cg_max = 2000;

    /// Throws PreconditionError unless epsilon in (0, 1] and cg_tol in (1e-14, 1e-2).
    void validate() const;
};

struct ControlResult {
    Trajectory h;
    std::vector<double> pT;
    std::vector<double> uT;
    double terminal_norm = 0.0;
    double cost = 0.0;
    double cost_ratio = 0.0;
    int cg_iters = 0;
    bool converged = false;
    double epsilon = 0.0;
    /// J_eps at the returned pT.
    double functional = 0.0;
    /// J_eps after each CG iteration.
    std::vector<double> functional_history;
};

/// Minimizes J_eps(pT) = 1/2 int int_omega p^2 + eps/2 ||pT||_M^2 + <u_free(T), pT>_M
/// by CG preconditioned with M^{-1}.
ControlResult hum_control(const DiscreteOperator& op, const TimeGrid& tg, const HUMProblem& problem,
                          TimeScheme scheme = TimeScheme::ImplicitEuler);

/// J_eps evaluated from the adjoint trajectory of pT alone.
double hum_functional(const ControlSystem& sys, std::span<const double> u_free_T, double epsilon,
                      std::span<const double> pT);

/// M (u_free(T) + G pT + eps pT): M times the terminal state under the control of pT, plus the penalty.
std::vector<double> hum_gradient(const ControlSystem& sys, std::span<const double> u_free_T, double epsilon,
                                 std::span<const double> pT);

/// cost / int u0^2.
double verify_cost_bound(const ControlResult& result, const DiscreteOperator& op, std::span<const double> u0);

}  // namespace sdlab
