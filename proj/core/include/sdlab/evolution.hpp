#pragma once

// theta-scheme time stepping of
//   forward:  u_t - (a u_x)_x - lambda u / b = h chi_omega,  u(0) = u0
//   adjoint:  v_t + (a v_x)_x + lambda v / b = 0,             v(T) = vT
// on the Dirichlet-eliminated P1 space.

#include <cstddef>
#include <span>
#include <vector>

#include "sdlab/banded.hpp"
#include "sdlab/spaces.hpp"

namespace sdlab {

struct TimeGrid {
    double T = 1.0;
    int n_steps = 8;

    /// Throws DomainError unless T > 0 and n_steps >= 8.
    static TimeGrid make(double T, int n_steps);

    double dt() const noexcept { return T / n_steps; }
    double time(int n) const noexcept { return n == n_steps ? T : n * dt(); }
    std::vector<double> times() const;
};

enum class TimeScheme { ImplicitEuler, CrankNicolson };

constexpr double theta_of(TimeScheme s) noexcept { return s == TimeScheme::ImplicitEuler ? 1.0 : 0.5; }

enum class TrajectoryKind { Forward, Adjoint, Source };

/// (n_steps + 1) x n_dof nodal coefficients, row-major. Row n is time t_n.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(TrajectoryKind kind, int n_steps, std::size_t n_dof)
        : kind_(kind), n_steps_(n_steps), n_dof_(n_dof),
          values_(static_cast<std::size_t>(n_steps + 1) * n_dof, 0.0) {}

    TrajectoryKind kind() const noexcept { return kind_; }
    int n_steps() const noexcept { return n_steps_; }
    std::size_t n_dof() const noexcept { return n_dof_; }

    std::span<double> row(int n) { return {values_.data() + static_cast<std::size_t>(n) * n_dof_, n_dof_}; }
    std::span<const double> row(int n) const {
        return {values_.data() + static_cast<std::size_t>(n) * n_dof_, n_dof_};
    }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

private:
    TrajectoryKind kind_ = TrajectoryKind::Forward;
    int n_steps_ = 0;
    std::size_t n_dof_ = 0;
    std::vector<double> values_;
};

/// Control region omega = (alpha, beta) with 0 <= alpha < beta <= 1.
struct ControlPattern {
    double alpha = 0.0;
    double beta = 1.0;
    bool contains_x0 = false;

    static ControlPattern make(double alpha, double beta, double x0);
    double length() const noexcept { return beta - alpha; }
};

/// Factorized theta-scheme step  (M + theta dt A) u+ = (M - (1-theta) dt A) u + load.
/// Construction refuses (InadmissibleLambdaError) when A = K_a - lambda M_b is not
/// positive definite.
class Propagator {
public:
    Propagator(const DiscreteOperator& op, const TimeGrid& tg, TimeScheme scheme = TimeScheme::ImplicitEuler);

    const DiscreteOperator& op() const noexcept { return *op_; }
    const TimeGrid& grid() const noexcept { return tg_; }
    TimeScheme scheme() const noexcept { return scheme_; }
    std::size_t n_dof() const noexcept { return op_->n_dof(); }

    /// out = step map applied to u, plus (M + theta dt A)^{-1} load when load is nonempty.
    void step(std::span<const double> u, std::span<const double> load, std::span<double> out) const;
    /// (M + theta dt A)^{-1} M p: the adjoint state paired with the control of one step.
    void pairing_state(std::span<const double> p_next, std::span<double> out) const;

private:
    const DiscreteOperator* op_;
    TimeGrid tg_;
    TimeScheme scheme_;
    SymTridiagonal explicit_part_;
    BandedCholesky implicit_part_;
};

/// Uncontrolled forward solve.
Trajectory solve_forward(const DiscreteOperator& op, const TimeGrid& tg, std::span<const double> u0,
                         TimeScheme scheme = TimeScheme::ImplicitEuler);

/// Forward solve with source h chi_omega. Row n+1 of `h` holds h at t_n + theta dt;
/// row 0 is ignored. Values at dofs whose support misses omega are ignored.
Trajectory solve_forward(const DiscreteOperator& op, const TimeGrid& tg, std::span<const double> u0,
                         const Trajectory& h, const ControlPattern& omega,
                         TimeScheme scheme = TimeScheme::ImplicitEuler);

/// Backward solve from v(T) = vT; the time-reversed forward step map.
Trajectory solve_adjoint(const DiscreteOperator& op, const TimeGrid& tg, std::span<const double> vT,
                         TimeScheme scheme = TimeScheme::ImplicitEuler);

/// E(t_n) = v_n' K_a v_n - lambda v_n' M_b v_n.
std::vector<double> energy(const DiscreteOperator& op, const Trajectory& traj);

/// ||u_n||_M for every row.
std::vector<double> mass_norms(const DiscreteOperator& op, const Trajectory& traj);

/// Discrete int int_omega h v:  sum_n dt h_{n+1}' M_omega q_n  with
/// q_n = (M + theta dt A)^{-1} M v_{n+1}  (q_n = v_n for implicit Euler).
/// Satisfies <u(T), vT>_M - <u0, v(0)>_M = control_pairing(...) exactly.
double control_pairing(const DiscreteOperator& op, const TimeGrid& tg, const Trajectory& h,
                       const Trajectory& adjoint, const ControlPattern& omega,
                       TimeScheme scheme = TimeScheme::ImplicitEuler);

}  // namespace sdlab
