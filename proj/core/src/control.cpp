#include "sdlab/control.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "sdlab/errors.hpp"

namespace sdlab {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Shift of the observation form relative to its largest diagonal entry.
constexpr double kRelativeShift = 1e-12;
/// Relative change of the quotient under a tenfold shift that marks singularity.
constexpr double kShiftSensitivity = 0.5;
/// Relative size and generator state of the seed perturbation.
constexpr double kSeedMix = 1e-2;
constexpr std::uint64_t kSeedMixState = 0x5d1ab;

using Dense = Eigen::MatrixXd;

/// M-weighted Gram matrices of the pencil, built one column per basis vector.
/// g(i, j) = e_i' M G e_j and n(i, j) = (S e_i)' M (S e_j).
struct Pencil {
    Dense g;
    Dense n;
};

Dense dense_mass(const SymTridiagonal& m) {
    const auto dim = static_cast<Eigen::Index>(m.order());
    Dense md = Dense::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        md(i, i) = m.diag()[static_cast<std::size_t>(i)];
        if (i + 1 < dim) md(i, i + 1) = md(i + 1, i) = m.off()[static_cast<std::size_t>(i)];
    }
    return md;
}

Pencil assemble_pencil(const ControlSystem& sys) {
    const auto& m = sys.op().mass;
    const std::size_t n = sys.n_dof();
    const auto dim = static_cast<Eigen::Index>(n);
    Pencil p{Dense(dim, dim), Dense(dim, dim)};
    Dense s(dim, dim);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const auto gj = sys.gramian(e);
        const auto mgj = m * std::span<const double>(gj);
        const auto sj = sys.adjoint_initial(e);
        e[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            p.g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = mgj[i];
            s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sj[i];
        }
    }
    const Dense md = dense_mass(m);
    p.g = 0.5 * (p.g + p.g.transpose()).eval();
    p.n = s.transpose() * md * s;
    p.n = 0.5 * (p.n + p.n.transpose()).eval();
    return p;
}

struct Ascent {
    double quotient = 0.0;
    Eigen::VectorXd x;
    std::vector<double> history;
    int iterations = 0;
    bool converged = false;
    bool factored = true;
};

/// Power iteration x <- (G + delta M)^{-1} N x with M-normalization.
Ascent power_ascent(const Pencil& p, const Dense& md, double delta, Eigen::VectorXd x, int max_iters, double tol) {
    Ascent out;
    const Dense shifted = p.g + delta * md;
    const Eigen::LLT<Dense> llt(shifted);
    if (llt.info() != Eigen::Success) {
        out.factored = false;
        return out;
    }
    double prev = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        x /= std::sqrt(x.dot(md * x));
        const Eigen::VectorXd nx = p.n * x;
        const double q = x.dot(nx) / x.dot(shifted * x);
        out.history.push_back(q);
        out.iterations = it + 1;
        out.quotient = std::max(out.quotient, q);
        out.x = x;
        if (it > 0 && std::abs(q - prev) < tol * q) {
            out.converged = true;
            return out;
        }
        prev = q;
        x = llt.solve(nx);
    }
    return out;
}

}  // namespace

ControlSystem::ControlSystem(const DiscreteOperator& op, const TimeGrid& tg, const ControlPattern& omega,
                             TimeScheme scheme)
    : op_(&op), prop_(op, tg, scheme), omega_(omega), m_omega_(sdlab::restricted_mass(op, omega.alpha, omega.beta)),
      support_(support_mask(op, omega.alpha, omega.beta)) {}

Trajectory ControlSystem::control_of(std::span<const double> pT) const {
    if (pT.size() != n_dof()) throw DimensionError("control_of: terminal data does not conform");
    const int n_steps = grid().n_steps;
    Trajectory h(TrajectoryKind::Source, n_steps, n_dof());
    std::vector<double> p(pT.begin(), pT.end());
    std::vector<double> prev(n_dof());
    for (int n = n_steps - 1; n >= 0; --n) {
        auto row = h.row(n + 1);
        prop_.pairing_state(p, row);
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (!support_[k]) row[k] = 0.0;
        }
        prop_.step(p, {}, prev);
        std::swap(p, prev);
    }
    return h;
}

std::vector<double> ControlSystem::terminal(std::span<const double> u0, const Trajectory& h) const {
    if (u0.size() != n_dof() || h.n_dof() != n_dof() || h.n_steps() != grid().n_steps) {
        throw DimensionError("terminal: inputs do not conform");
    }
    const double dt = grid().dt();
    std::vector<double> u(u0.begin(), u0.end());
    std::vector<double> next(n_dof());
    std::vector<double> load(n_dof());
    for (int n = 0; n < grid().n_steps; ++n) {
        m_omega_.multiply(h.row(n + 1), load);
        for (double& l : load) l *= dt;
        prop_.step(u, load, next);
        std::swap(u, next);
    }
    for (double x : u) {
        if (!std::isfinite(x)) throw InstabilityError("terminal: non-finite state", static_cast<std::size_t>(grid().n_steps));
    }
    return u;
}

std::vector<double> ControlSystem::free_terminal(std::span<const double> u0) const {
    if (u0.size() != n_dof()) throw DimensionError("free_terminal: initial data does not conform");
    std::vector<double> u(u0.begin(), u0.end());
    std::vector<double> next(n_dof());
    for (int n = 0; n < grid().n_steps; ++n) {
        prop_.step(u, {}, next);
        std::swap(u, next);
    }
    return u;
}

std::vector<double> ControlSystem::gramian(std::span<const double> pT) const {
    const std::vector<double> zero(n_dof(), 0.0);
    return terminal(zero, control_of(pT));
}

double ControlSystem::cost(const Trajectory& h) const {
    double c = 0.0;
    for (int n = 0; n < grid().n_steps; ++n) c += grid().dt() * m_omega_.quadratic(h.row(n + 1));
    return c;
}

std::vector<double> ControlSystem::adjoint_initial(std::span<const double> vT) const {
    // The adjoint is the time-reversed forward map.
    return free_terminal(vT);
}

ObservabilityReport observability_constant(const DiscreteOperator& op, const TimeGrid& tg,
                                           const ControlPattern& omega, std::span<const double> seed_vT,
                                           int max_iters, double tol, TimeScheme scheme) {
    if (seed_vT.size() != op.n_dof()) throw DimensionError("observability: seed does not conform");
    if (max_iters < 1) throw PreconditionError("observability: max_iters must be positive");
    if (!(op.mass.quadratic(seed_vT) > 0.0)) throw PreconditionError("observability: seed has zero norm");
    const ControlSystem sys(op, tg, omega, scheme);
    const Pencil pencil = assemble_pencil(sys);
    const Dense md = dense_mass(op.mass);

    // G is only semidefinite numerically (data far from omega is barely observed),
    // so the pencil is shifted by delta M. A quotient that follows delta instead of
    // settling marks the observation form as singular.
    const double scale = pencil.g.diagonal().maxCoeff() / md.diagonal().maxCoeff();
    const double delta = kRelativeShift * scale;
    // A symmetric seed spans an invariant subspace when omega is symmetric too; a
    // fixed pseudo-random admixture lets the ascent leave it, deterministically.
    Eigen::VectorXd seed = Eigen::Map<const Eigen::VectorXd>(seed_vT.data(), static_cast<Eigen::Index>(seed_vT.size()));
    {
        std::mt19937_64 rng(kSeedMixState);
        std::uniform_real_distribution<double> ud(-1.0, 1.0);
        Eigen::VectorXd mix(seed.size());
        for (Eigen::Index i = 0; i < mix.size(); ++i) mix(i) = ud(rng);
        mix *= kSeedMix * std::sqrt(seed.dot(md * seed) / mix.dot(md * mix));
        seed += mix;
    }

    ObservabilityReport rep;
    const Ascent main = power_ascent(pencil, md, delta, seed, max_iters, tol);
    if (!main.factored) {
        rep.observable = false;
        rep.c_T = std::numeric_limits<double>::infinity();
        return rep;
    }
    rep.iterations = main.iterations;
    rep.converged = main.converged;
    rep.history = main.history;
    rep.extremal_vT.assign(main.x.data(), main.x.data() + main.x.size());
    rep.c_T = main.quotient;

    const Ascent check = power_ascent(pencil, md, 10.0 * delta, main.x, max_iters, tol);
    if (!check.factored || std::abs(main.quotient - check.quotient) > kShiftSensitivity * main.quotient) {
        rep.observable = false;
        rep.c_T = std::numeric_limits<double>::infinity();
    }
    return rep;
}

void HUMProblem::validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw PreconditionError("hum: epsilon must lie in (0, 1]");
    if (!(cg_tol > 1e-14 && cg_tol < 1e-2)) throw PreconditionError("hum: cg_tol must lie in (1e-14, 1e-2)");
    if (cg_max < 1) throw PreconditionError("hum: cg_max must be positive");
}

double hum_functional(const ControlSystem& sys, std::span<const double> u_free_T, double epsilon,
                      std::span<const double> pT) {
    const auto& m = sys.op().mass;
    return 0.5 * sys.cost(sys.control_of(pT)) + 0.5 * epsilon * m.quadratic(pT) + m.bilinear(u_free_T, pT);
}

std::vector<double> hum_gradient(const ControlSystem& sys, std::span<const double> u_free_T, double epsilon,
                                 std::span<const double> pT) {
    auto u = sys.gramian(pT);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += u_free_T[i] + epsilon * pT[i];
    return sys.op().mass * std::span<const double>(u);
}

ControlResult hum_control(const DiscreteOperator& op, const TimeGrid& tg, const HUMProblem& problem,
                          TimeScheme scheme) {
    problem.validate();
    if (problem.u0.size() != op.n_dof()) throw DimensionError("hum: u0 does not conform");
    const ControlSystem sys(op, tg, problem.omega, scheme);
    const BandedCholesky mass(op.mass);
    const auto& m = op.mass;
    const std::size_t n = op.n_dof();
    const double eps = problem.epsilon;

    const auto u_free = sys.free_terminal(problem.u0);
    const auto b = m * std::span<const double>(u_free);
    const double b_norm = std::sqrt(std::max(0.0, dot(b, u_free)));

    // Solve (G_M + eps M) p = -b with G_M = M G; r = -b - H p.
    std::vector<double> p(n, 0.0);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = -b[i];
    std::vector<double> z = mass.solve(r);
    std::vector<double> d = z;
    double rz = dot(r, z);

    ControlResult res;
    res.epsilon = eps;
    auto functional = [&] {
        // J = 1/2 p'(H p) + p'b = 1/2 p'(b - r).
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += p[i] * (b[i] - r[i]);
        return 0.5 * s;
    };
    int it = 0;
    bool converged = b_norm == 0.0 || std::sqrt(std::max(0.0, rz)) <= problem.cg_tol * b_norm;
    while (!converged && it < problem.cg_max) {
        auto hd = sys.gramian(d);
        for (std::size_t i = 0; i < n; ++i) hd[i] += eps * d[i];
        hd = m * std::span<const double>(hd);
        const double curv = dot(d, hd);
        if (!(curv > 0.0)) break;
        const double alpha = rz / curv;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] += alpha * d[i];
            r[i] -= alpha * hd[i];
        }
        ++it;
        res.functional_history.push_back(functional());
        z = mass.solve(r);
        const double rz_new = dot(r, z);
        converged = std::sqrt(std::max(0.0, rz_new)) <= problem.cg_tol * b_norm;
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) d[i] = z[i] + beta * d[i];
    }

    res.pT = p;
    res.h = sys.control_of(p);
    res.uT = sys.terminal(problem.u0, res.h);
    res.terminal_norm = std::sqrt(std::max(0.0, m.quadratic(res.uT)));
    res.cost = sys.cost(res.h);
    res.cost_ratio = verify_cost_bound(res, op, problem.u0);
    res.cg_iters = it;
    res.converged = converged;
    res.functional = functional();
    return res;
}

double verify_cost_bound(const ControlResult& result, const DiscreteOperator& op, std::span<const double> u0) {
    const double norm2 = op.mass.quadratic(u0);
    if (norm2 == 0.0) return 0.0;
    return result.cost / norm2;
}

}  // namespace sdlab
