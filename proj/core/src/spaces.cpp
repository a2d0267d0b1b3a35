#include "sdlab/spaces.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "sdlab/errors.hpp"
#include "sdlab/quadrature.hpp"

namespace sdlab {

namespace {

/// int_{d_near}^{d_near + h} t^p dt without cancellation for small cells far from 0.
double power_cell_integral(double d_near, double h, double p) {
    const double q = p + 1.0;
    if (d_near == 0.0) return std::pow(h, q) / q;
    if (q == 0.0) return std::log1p(h / d_near);
    return std::pow(d_near, q) * std::expm1(q * std::log1p(h / d_near)) / q;
}

/// Local 2x2 matrix on a cell: {left-left, left-right, right-right}.
using Local = std::array<double, 3>;

Local hat_products(const std::function<double(double)>& w, const CoefficientFunction& coef, double xl,
                   double xr, double x0) {
    const double h = xr - xl;
    auto integrand = [&](int which) {
        return [&, which](double x) {
            const double pl = (xr - x) / h;
            const double pr = (x - xl) / h;
            const double prod = which == 0 ? pl * pl : which == 1 ? pl * pr : pr * pr;
            return prod * w(x);
        };
    };
    std::vector<double> cuts{xl};
    for (double bp : coef.breakpoints(xl, xr)) cuts.push_back(bp);
    cuts.push_back(xr);
    Local out{0.0, 0.0, 0.0};
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double lo = cuts[k];
        const double hi = cuts[k + 1];
        for (int which = 0; which < 3; ++which) {
            out[static_cast<std::size_t>(which)] += quad::graded(integrand(which), lo, hi, x0);
        }
    }
    return out;
}

double coefficient_integral(const CoefficientFunction& a, double xl, double xr, double x0) {
    if (auto e = a.exponent()) {
        if (*e == 0.0) return xr - xl;
        const double dl = std::abs(xl - x0);
        const double dr = std::abs(xr - x0);
        return power_cell_integral(std::min(dl, dr), xr - xl, *e);
    }
    std::vector<double> cuts{xl};
    for (double bp : a.breakpoints(xl, xr)) cuts.push_back(bp);
    cuts.push_back(xr);
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        s += quad::gauss5([&](double x) { return a.value(x); }, cuts[k], cuts[k + 1]);
    }
    return s;
}

/// Hat products against |x - x0|^-K on a cell with x0 at one end. Returns
/// {near-near, near-far, far-far} where "near" is the x0 hat.
Local singular_cell_closed_form(double h, double k, bool constrained) {
    const double base = std::pow(h, 1.0 - k);
    Local out{};
    out[2] = base / (3.0 - k);
    if (!constrained) {
        out[1] = base * (1.0 / (2.0 - k) - 1.0 / (3.0 - k));
        out[0] = base * (1.0 / (1.0 - k) - 2.0 / (2.0 - k) + 1.0 / (3.0 - k));
    }
    return out;
}

}  // namespace

std::size_t Mesh::locate(double x) const {
    if (x <= nodes.front()) return 0;
    if (x >= nodes.back()) return n_cells() - 1;
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), x);
    const auto idx = static_cast<std::size_t>(it - nodes.begin());
    return idx == 0 ? 0 : idx - 1;
}

Mesh build_mesh(int n_cells, double x0, double grading) {
    if (!(x0 > 0.0 && x0 < 1.0)) {
        std::ostringstream os;
        os << "mesh: x0 = " << x0 << " must lie in (0,1)";
        throw DomainError(os.str());
    }
    if (n_cells < 16 || n_cells % 2 != 0) {
        throw DomainError("mesh: n_cells must be an even integer >= 16, got " + std::to_string(n_cells));
    }
    if (!(grading >= 1.0) || !std::isfinite(grading)) throw DomainError("mesh: grading must be >= 1");

    const auto m = static_cast<std::size_t>(n_cells / 2);
    Mesh mesh;
    mesh.x0 = x0;
    mesh.grading = grading;
    mesh.x0_index = m;
    mesh.nodes.resize(2 * m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        const double xi = std::pow(static_cast<double>(i) / static_cast<double>(m), grading);
        mesh.nodes[m - i] = x0 - x0 * xi;
        mesh.nodes[m + i] = x0 + (1.0 - x0) * xi;
    }
    mesh.nodes.front() = 0.0;
    mesh.nodes.back() = 1.0;
    mesh.nodes[m] = x0;
    return mesh;
}

double default_grading(double k1, double k2) {
    const double k = std::max(k1, k2);
    if (k >= 2.0) return 4.0;
    return std::clamp(2.0 / (2.0 - k), 1.0, 4.0);
}

std::vector<double> DiscreteOperator::expand(std::span<const double> dof_values) const {
    if (dof_values.size() != n_dof()) throw DimensionError("expand: dof vector size mismatch");
    std::vector<double> full(mesh.nodes.size(), 0.0);
    for (std::size_t k = 0; k < dofs.size(); ++k) full[dofs[k]] = dof_values[k];
    return full;
}

std::vector<double> DiscreteOperator::sample(const std::function<double(double)>& f) const {
    std::vector<double> out(n_dof());
    for (std::size_t k = 0; k < dofs.size(); ++k) out[k] = f(mesh.nodes[dofs[k]]);
    return out;
}

DiscreteOperator DiscreteOperator::with_lambda(double new_lambda) const {
    DiscreteOperator out = *this;
    out.lambda = new_lambda;
    out.pair.lambda = new_lambda;
    return out;
}

DiscreteOperator assemble(const CoefficientPair& pair, const Mesh& mesh) {
    pair.validate();
    if (std::abs(mesh.x0 - pair.x0) > 0.0) throw DomainError("assemble: mesh and coefficients disagree on x0");

    const std::size_t n_nodes = mesh.nodes.size();
    const std::size_t n_cells = mesh.n_cells();
    const double x0 = pair.x0;
    const double k2 = effective_exponent(pair.b);
    const bool constrained = k2 >= 1.0;

    SymTridiagonal kf(n_nodes);
    SymTridiagonal mf(n_nodes);
    SymTridiagonal bf(n_nodes);

    const auto inv_b = [&](double x) { return 1.0 / pair.b.value(x); };

    for (std::size_t c = 0; c < n_cells; ++c) {
        const double xl = mesh.nodes[c];
        const double xr = mesh.nodes[c + 1];
        const double h = xr - xl;

        const double ia = coefficient_integral(pair.a, xl, xr, x0) / (h * h);
        kf.diag(c) += ia;
        kf.diag(c + 1) += ia;
        kf.off(c) -= ia;

        mf.diag(c) += h / 3.0;
        mf.diag(c + 1) += h / 3.0;
        mf.off(c) += h / 6.0;

        Local lb{};
        const bool touches = c + 1 == mesh.x0_index || c == mesh.x0_index;
        const auto bexp = pair.b.exponent();
        if (bexp && *bexp == 0.0) {
            lb = {h / 3.0, h / 6.0, h / 3.0};
        } else if (bexp && touches) {
            const Local nf = singular_cell_closed_form(h, *bexp, constrained);
            // near = x0 hat: the right node of the left cell, the left node of the right cell.
            lb = c + 1 == mesh.x0_index ? Local{nf[2], nf[1], nf[0]} : nf;
        } else {
            lb = hat_products(inv_b, pair.b, xl, xr, x0);
            if (touches && constrained) {
                if (c + 1 == mesh.x0_index) {
                    lb[1] = lb[2] = 0.0;
                } else {
                    lb[0] = lb[1] = 0.0;
                }
            }
        }
        for (double v : lb) {
            if (!std::isfinite(v) || !std::isfinite(ia)) throw AssemblyError("non-integrable matrix entry", c);
        }
        bf.diag(c) += lb[0];
        bf.off(c) += lb[1];
        bf.diag(c + 1) += lb[2];
    }

    DiscreteOperator op{mesh, pair, {}, {}, {}, {}, pair.lambda, constrained};
    for (std::size_t i = 1; i + 1 < n_nodes; ++i) {
        if (constrained && i == mesh.x0_index) continue;
        op.dofs.push_back(i);
    }
    auto extract = [&](const SymTridiagonal& full) {
        SymTridiagonal out(op.dofs.size());
        for (std::size_t k = 0; k < op.dofs.size(); ++k) {
            const std::size_t i = op.dofs[k];
            out.diag(k) = full.diag()[i];
            if (k + 1 < op.dofs.size()) out.off(k) = op.dofs[k + 1] == i + 1 ? full.off()[i] : 0.0;
        }
        return out;
    };
    op.stiffness = extract(kf);
    op.mass = extract(mf);
    op.singular_mass = extract(bf);
    return op;
}

RayleighParts rayleigh(const DiscreteOperator& op, std::span<const double> u) {
    if (u.size() != op.n_dof()) throw DimensionError("rayleigh: vector does not conform to the operator");
    return {op.stiffness.quadratic(u), op.mass.quadratic(u), op.singular_mass.quadratic(u)};
}

SymTridiagonal restricted_mass(const DiscreteOperator& op, double alpha, double beta) {
    const auto& nodes = op.mesh.nodes;
    SymTridiagonal full(nodes.size());
    for (std::size_t c = 0; c + 1 < nodes.size(); ++c) {
        const double xl = nodes[c];
        const double xr = nodes[c + 1];
        const double lo = std::max(xl, alpha);
        const double hi = std::min(xr, beta);
        if (hi <= lo) continue;
        const double h = xr - xl;
        auto pl = [&](double x) { return (xr - x) / h; };
        auto pr = [&](double x) { return (x - xl) / h; };
        full.diag(c) += quad::gauss5([&](double x) { return pl(x) * pl(x); }, lo, hi);
        full.off(c) += quad::gauss5([&](double x) { return pl(x) * pr(x); }, lo, hi);
        full.diag(c + 1) += quad::gauss5([&](double x) { return pr(x) * pr(x); }, lo, hi);
    }
    SymTridiagonal out(op.n_dof());
    for (std::size_t k = 0; k < op.n_dof(); ++k) {
        const std::size_t i = op.dofs[k];
        out.diag(k) = full.diag()[i];
        if (k + 1 < op.n_dof()) out.off(k) = op.dofs[k + 1] == i + 1 ? full.off()[i] : 0.0;
    }
    return out;
}

std::vector<bool> support_mask(const DiscreteOperator& op, double alpha, double beta) {
    std::vector<bool> mask(op.n_dof(), false);
    const auto& nodes = op.mesh.nodes;
    for (std::size_t k = 0; k < op.n_dof(); ++k) {
        const std::size_t i = op.dofs[k];
        mask[k] = nodes[i - 1] < beta && nodes[i + 1] > alpha;
    }
    return mask;
}

}  // namespace sdlab
