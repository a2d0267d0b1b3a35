#include "sdlab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sdlab/errors.hpp"
#include "sdlab/hardy.hpp"

namespace sdlab {

namespace {

SymTridiagonal checked_generator(const DiscreteOperator& op) {
    SymTridiagonal a = op.generator();
    if (a.negative_count() > 0) {
        throw InadmissibleLambdaError(op.lambda, shifted_min_eigenvalue(op, op.lambda));
    }
    return a;
}

void check_finite(std::span<const double> v, int step) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw InstabilityError("non-finite state", static_cast<std::size_t>(step));
        }
    }
}

void check_size(std::span<const double> v, std::size_t n, const char* what) {
    if (v.size() != n) {
        std::ostringstream os;
        os << what << ": expected " << n << " dofs, got " << v.size();
        throw DimensionError(os.str());
    }
}

}  // namespace

TimeGrid TimeGrid::make(double T, int n_steps) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("time grid: T must be positive");
    if (n_steps < 8) throw DomainError("time grid: n_steps must be >= 8, got " + std::to_string(n_steps));
    return {T, n_steps};
}

std::vector<double> TimeGrid::times() const {
    std::vector<double> t(static_cast<std::size_t>(n_steps) + 1);
    for (int n = 0; n <= n_steps; ++n) t[static_cast<std::size_t>(n)] = time(n);
    return t;
}

ControlPattern ControlPattern::make(double alpha, double beta, double x0) {
    if (!(alpha >= 0.0 && alpha < beta && beta <= 1.0)) {
        std::ostringstream os;
        os << "control region (" << alpha << ", " << beta << ") must satisfy 0 <= alpha < beta <= 1";
        throw DomainError(os.str());
    }
    return {alpha, beta, alpha < x0 && x0 < beta};
}

Propagator::Propagator(const DiscreteOperator& op, const TimeGrid& tg, TimeScheme scheme)
    : op_(&op), tg_(tg), scheme_(scheme),
      explicit_part_(op.mass.combine(1.0, checked_generator(op), -(1.0 - theta_of(scheme)) * tg.dt())),
      implicit_part_(op.mass.combine(1.0, op.generator(), theta_of(scheme) * tg.dt())) {}

void Propagator::step(std::span<const double> u, std::span<const double> load, std::span<double> out) const {
    explicit_part_.multiply(u, out);
    if (!load.empty()) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += load[i];
    }
    implicit_part_.solve_in_place(out);
}

void Propagator::pairing_state(std::span<const double> p_next, std::span<double> out) const {
    op_->mass.multiply(p_next, out);
    implicit_part_.solve_in_place(out);
}

Trajectory solve_forward(const DiscreteOperator& op, const TimeGrid& tg, std::span<const double> u0,
                         TimeScheme scheme) {
    check_size(u0, op.n_dof(), "solve_forward");
    const Propagator prop(op, tg, scheme);
    Trajectory traj(TrajectoryKind::Forward, tg.n_steps, op.n_dof());
    std::copy(u0.begin(), u0.end(), traj.row(0).begin());
    check_finite(traj.row(0), 0);
    for (int n = 0; n < tg.n_steps; ++n) {
        prop.step(traj.row(n), {}, traj.row(n + 1));
        check_finite(traj.row(n + 1), n + 1);
    }
    return traj;
}

Trajectory solve_forward(const DiscreteOperator& op, const TimeGrid& tg, std::span<const double> u0,
                         const Trajectory& h, const ControlPattern& omega, TimeScheme scheme) {
    check_size(u0, op.n_dof(), "solve_forward");
    if (h.n_dof() != op.n_dof() || h.n_steps() != tg.n_steps) {
        throw DimensionError("solve_forward: source trajectory does not conform");
    }
    const Propagator prop(op, tg, scheme);
    const SymTridiagonal m_omega = restricted_mass(op, omega.alpha, omega.beta);
    Trajectory traj(TrajectoryKind::Forward, tg.n_steps, op.n_dof());
    std::copy(u0.begin(), u0.end(), traj.row(0).begin());
    check_finite(traj.row(0), 0);
    std::vector<double> load(op.n_dof());
    for (int n = 0; n < tg.n_steps; ++n) {
        m_omega.multiply(h.row(n + 1), load);
        for (double& l : load) l *= tg.dt();
        prop.step(traj.row(n), load, traj.row(n + 1));
        check_finite(traj.row(n + 1), n + 1);
    }
    return traj;
}

Trajectory solve_adjoint(const DiscreteOperator& op, const TimeGrid& tg, std::span<const double> vT,
                         TimeScheme scheme) {
    check_size(vT, op.n_dof(), "solve_adjoint");
    const Propagator prop(op, tg, scheme);
    Trajectory traj(TrajectoryKind::Adjoint, tg.n_steps, op.n_dof());
    std::copy(vT.begin(), vT.end(), traj.row(tg.n_steps).begin());
    check_finite(traj.row(tg.n_steps), tg.n_steps);
    for (int n = tg.n_steps; n > 0; --n) {
        prop.step(traj.row(n), {}, traj.row(n - 1));
        check_finite(traj.row(n - 1), n - 1);
    }
    return traj;
}

std::vector<double> energy(const DiscreteOperator& op, const Trajectory& traj) {
    if (traj.n_dof() != op.n_dof()) throw DimensionError("energy: trajectory does not conform");
    std::vector<double> e(static_cast<std::size_t>(traj.n_steps()) + 1);
    for (int n = 0; n <= traj.n_steps(); ++n) {
        const auto v = traj.row(n);
        e[static_cast<std::size_t>(n)] = op.stiffness.quadratic(v) - op.lambda * op.singular_mass.quadratic(v);
    }
    return e;
}

std::vector<double> mass_norms(const DiscreteOperator& op, const Trajectory& traj) {
    if (traj.n_dof() != op.n_dof()) throw DimensionError("mass_norms: trajectory does not conform");
    std::vector<double> out(static_cast<std::size_t>(traj.n_steps()) + 1);
    for (int n = 0; n <= traj.n_steps(); ++n) {
        out[static_cast<std::size_t>(n)] = std::sqrt(std::max(0.0, op.mass.quadratic(traj.row(n))));
    }
    return out;
}

double control_pairing(const DiscreteOperator& op, const TimeGrid& tg, const Trajectory& h,
                       const Trajectory& adjoint, const ControlPattern& omega, TimeScheme scheme) {
    if (h.n_dof() != op.n_dof() || adjoint.n_dof() != op.n_dof() || h.n_steps() != tg.n_steps ||
        adjoint.n_steps() != tg.n_steps) {
        throw DimensionError("control_pairing: trajectories do not conform");
    }
    const Propagator prop(op, tg, scheme);
    const SymTridiagonal m_omega = restricted_mass(op, omega.alpha, omega.beta);
    std::vector<double> q(op.n_dof());
    double sum = 0.0;
    for (int n = 0; n < tg.n_steps; ++n) {
        prop.pairing_state(adjoint.row(n + 1), q);
        sum += tg.dt() * m_omega.bilinear(h.row(n + 1), q);
    }
    return sum;
}

}  // namespace sdlab
