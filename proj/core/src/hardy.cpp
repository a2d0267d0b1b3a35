#include "sdlab/hardy.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "sdlab/errors.hpp"

namespace sdlab {

std::optional<double> conjugate_hardy_bound(const CoefficientPair& pair) {
    const auto ea = pair.a.exponent();
    const auto eb = pair.b.exponent();
    if (!ea || !eb) return std::nullopt;
    if (std::abs(*ea + *eb - 2.0) > 1e-12) return std::nullopt;
    const double alpha = *ea;
    if (alpha == 1.0) return std::nullopt;
    return 4.0 / ((1.0 - alpha) * (1.0 - alpha));
}

HardyReport best_constant(const DiscreteOperator& op, int max_iter, double rel_tol) {
    if (op.singular_mass.all_zero()) {
        throw DomainError("M_b vanishes identically: no singularity to measure");
    }
    const std::size_t n = op.n_dof();
    const BandedCholesky chol(op.stiffness);

    std::vector<double> x = op.sample([&](double s) { return std::exp(-std::abs(s - op.mesh.x0) / 0.1); });
    auto normalize = [&](std::vector<double>& v) {
        const double nb = std::sqrt(op.singular_mass.quadratic(v));
        for (double& c : v) c /= nb;
    };
    normalize(x);

    std::vector<double> y(n);
    double mu = std::numeric_limits<double>::infinity();
    int it = 0;
    bool converged = false;
    for (; it < max_iter; ++it) {
        op.singular_mass.multiply(x, y);
        chol.solve_in_place(y);
        // Rayleigh quotient of y: (y' K y) / (y' M_b y) with K y = M_b x.
        const double num = op.singular_mass.bilinear(x, y);
        const double den = op.singular_mass.quadratic(y);
        const double next = num / den;
        x.swap(y);
        normalize(x);
        if (std::abs(next - mu) < rel_tol * std::abs(next)) {
            mu = next;
            converged = true;
            ++it;
            break;
        }
        mu = next;
    }
    if (!converged) {
        const auto kx = op.stiffness * x;
        const auto bx = op.singular_mass * x;
        double r = 0.0;
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            r += (kx[i] - mu * bx[i]) * (kx[i] - mu * bx[i]);
            s += kx[i] * kx[i];
        }
        throw ConvergenceError("Hardy inverse iteration stagnated", std::sqrt(r / s));
    }

    HardyReport rep;
    rep.mu_min = mu;
    rep.cstar_h = 1.0 / mu;
    rep.analytic_bound = conjugate_hardy_bound(op.pair);
    rep.eigvec = op.expand(x);
    rep.mesh_n = op.mesh.n_cells();
    rep.iterations = it;
    return rep;
}

double shifted_min_eigenvalue(const DiscreteOperator& op, double lambda) {
    if (lambda == 0.0) return 1.0;
    // Number of pencil eigenvalues below sigma.
    auto below = [&](double sigma) {
        return op.stiffness.combine(1.0 - sigma, op.singular_mass, -lambda).negative_count();
    };
    double lo = 0.0;
    double hi = 0.0;
    if (lambda > 0.0) {
        hi = 1.0;
        double step = 1.0;
        lo = 1.0 - step;
        while (below(lo) > 0) {
            step *= 2.0;
            lo = 1.0 - step;
            if (!std::isfinite(lo)) throw ConvergenceError("shifted pencil bisection: no lower bracket", step);
        }
    } else {
        lo = 1.0;
        double step = 1.0;
        hi = 1.0 + step;
        while (below(hi) == 0) {
            step *= 2.0;
            hi = 1.0 + step;
            if (!std::isfinite(hi)) throw ConvergenceError("shifted pencil bisection: no upper bracket", step);
        }
    }
    for (int k = 0; k < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++k) {
        const double mid = 0.5 * (lo + hi);
        if (below(mid) > 0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

CoercivityReport coercivity(const DiscreteOperator& op, double cstar_h) {
    if (!(cstar_h > 0.0)) throw PreconditionError("coercivity: cstar_h must be positive");
    CoercivityReport rep;
    rep.lambda = op.lambda;
    rep.Lambda_h = op.lambda <= 0.0 ? 1.0 : 1.0 - op.lambda * cstar_h;
    rep.min_eig_shifted = shifted_min_eigenvalue(op, op.lambda);
    rep.admissible = rep.min_eig_shifted > 0.0;
    return rep;
}

HardyWeightCheck verify_hp_weight(const CoefficientPair& pair, double q, const Mesh& mesh) {
    if (!(q > 1.0)) throw PreconditionError("verify_hp_weight: q must exceed 1");
    const double x0 = pair.x0;
    auto monotone = [&](const std::function<double(double)>& p) {
        std::size_t fails = 0;
        std::size_t checks = 0;
        for (std::size_t i = 0; i + 1 < mesh.nodes.size(); ++i) {
            const double xl = mesh.nodes[i];
            const double xr = mesh.nodes[i + 1];
            if (xl == x0 || xr == x0) continue;
            const double fl = p(xl) / std::pow(std::abs(xl - x0), q);
            const double fr = p(xr) / std::pow(std::abs(xr - x0), q);
            const double scale = 1e-8 * std::max(std::abs(fl), std::abs(fr));
            ++checks;
            const bool bad = xr < x0 ? fr > fl + scale : fr < fl - scale;
            if (bad || !std::isfinite(fl) || !std::isfinite(fr)) ++fails;
        }
        return static_cast<double>(fails) <= 1e-3 * static_cast<double>(checks);
    };
    HardyWeightCheck out;
    out.b_weight = monotone([&](double x) { return (x - x0) * (x - x0) / pair.b.value(x); });
    out.a_weight = monotone([&](double x) {
        const double y = std::abs(x - x0);
        return std::cbrt(pair.a.value(x) * y * y * y * y);
    });
    return out;
}

}  // namespace sdlab
