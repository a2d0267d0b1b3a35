#include "sdlab/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sdlab/errors.hpp"
#include "sdlab/parallel.hpp"
#include "sdlab/quadrature.hpp"

namespace sdlab {

namespace {

constexpr std::size_t kGauss = quad::kGaussNodes.size();

double gauss_point(double xl, double xr, std::size_t q) {
    return 0.5 * (xl + xr) + 0.5 * (xr - xl) * quad::kGaussNodes[q];
}

/// Antiderivative I(x) = int_{x0}^x (y - x0)/a(y) dy.
std::function<double(double)> psi_integral(const CoefficientPair& pair, const Mesh& mesh) {
    const double x0 = pair.x0;
    if (auto k = pair.a.exponent()) {
        const double p = 2.0 - *k;
        return [x0, p](double x) { return std::pow(std::abs(x - x0), p) / p; };
    }
    const CoefficientFunction a = pair.a;
    auto integrand = [a, x0](double y) { return (y - x0) / a.value(y); };
    auto piece = [a, x0, integrand](double lo, double hi) {
        std::vector<double> cuts{lo};
        for (double bp : a.breakpoints(lo, hi)) cuts.push_back(bp);
        cuts.push_back(hi);
        double s = 0.0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double l = cuts[k];
            const double r = cuts[k + 1];
            s += (l == x0 || r == x0) ? quad::graded(integrand, l, r, x0) : quad::gauss5(integrand, l, r);
        }
        return s;
    };
    // Node values, accumulated outward from x0.
    const auto& nodes = mesh.nodes;
    const std::size_t m = mesh.x0_index;
    std::vector<double> at_node(nodes.size(), 0.0);
    for (std::size_t i = m + 1; i < nodes.size(); ++i) at_node[i] = at_node[i - 1] + piece(nodes[i - 1], nodes[i]);
    for (std::size_t i = m; i-- > 0;) at_node[i] = at_node[i + 1] - piece(nodes[i], nodes[i + 1]);
    return [mesh, at_node, piece, x0](double x) {
        const std::size_t c = mesh.locate(x);
        // Integrate from the cell end nearer to x0 so the sign stays consistent.
        if (x >= x0) return at_node[c] + piece(mesh.nodes[c], x);
        return at_node[c + 1] - piece(x, mesh.nodes[c + 1]);
    };
}

double boundary_slope(double f1, double f2, double h1, double h2) {
    // One-sided second-order derivative at a node with value 0.
    return (h1 + h2) / (h1 * h2) * f1 - h1 / (h2 * (h1 + h2)) * f2;
}

void check_conforming(const DiscreteOperator& op, const Trajectory& v, const char* what) {
    if (v.n_dof() != op.n_dof()) {
        std::ostringstream os;
        os << what << ": trajectory has " << v.n_dof() << " dofs, operator has " << op.n_dof();
        throw DimensionError(os.str());
    }
}

}  // namespace

double carleman_theta(double t, double T) {
    const double p = t * (T - t);
    return 1.0 / (p * p * p * p);
}

double CarlemanWeight::weight(double t, double psi_value) const {
    if (t <= 0.0 || t >= T) return 0.0;
    const double lw = 2.0 * s * theta(t) * psi_value;
    return lw < kLogWeightFloor ? 0.0 : std::exp(lw);
}

CarlemanWeight CarlemanWeight::with_s(double new_s) const {
    CarlemanWeight out = *this;
    out.s = new_s;
    return out;
}

double CarlemanWeight::psi_max() const { return *std::max_element(psi.begin(), psi.end()); }

CarlemanWeight make_weight(const CoefficientPair& pair, const Mesh& mesh, double c1, double c2_margin, double s) {
    if (!(c1 > 0.0) || !(c2_margin > 0.0) || !(s > 0.0)) {
        throw PreconditionError("carleman weight: c1, c2_margin and s must be positive");
    }
    const double k1 = effective_exponent(pair.a);
    if (k1 >= 2.0) throw DomainError("carleman weight: K1 >= 2 makes the psi integral diverge");

    const auto integral = psi_integral(pair, mesh);
    std::vector<double> node_integral(mesh.nodes.size());
    std::transform(mesh.nodes.begin(), mesh.nodes.end(), node_integral.begin(), integral);
    const double sup = *std::max_element(node_integral.begin(), node_integral.end());

    CarlemanWeight w;
    w.c1 = c1;
    w.c2 = sup + c2_margin;
    w.s = s;
    w.T = pair.T;
    w.psi.resize(node_integral.size());
    for (std::size_t i = 0; i < node_integral.size(); ++i) w.psi[i] = c1 * (node_integral[i] - w.c2);
    w.psi_gauss.resize(mesh.n_cells() * kGauss);
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
        for (std::size_t q = 0; q < kGauss; ++q) {
            const double x = gauss_point(mesh.nodes[c], mesh.nodes[c + 1], q);
            w.psi_gauss[c * kGauss + q] = c1 * (integral(x) - w.c2);
        }
    }
    for (double p : w.psi) {
        if (!(p < 0.0) || p < -c1 * w.c2 * (1.0 + 1e-12)) {
            throw DomainError("carleman weight: psi violates -c1 c2 <= psi < 0");
        }
    }
    return w;
}

double default_s0(const CarlemanWeight& w) {
    return std::log(100.0) / (2.0 * w.theta(0.5 * w.T) * -w.psi_max());
}

CarlemanReport evaluate(const DiscreteOperator& op, const CarlemanWeight& w, const Trajectory& v,
                        const Trajectory& h) {
    check_conforming(op, v, "carleman evaluate");
    check_conforming(op, h, "carleman evaluate (source)");
    if (h.n_steps() != v.n_steps()) throw DimensionError("carleman evaluate: v and h time grids differ");
    if (w.psi.size() != op.mesh.nodes.size()) throw DimensionError("carleman evaluate: weight built on another mesh");

    const auto& nodes = op.mesh.nodes;
    const double x0 = op.mesh.x0;
    const int n_steps = v.n_steps();
    const double dt = w.T / n_steps;
    const double s = w.s;

    // Time-independent per-Gauss-point data.
    const std::size_t n_cells = op.mesh.n_cells();
    std::vector<double> a_q(n_cells * kGauss);
    std::vector<double> y2a_q(n_cells * kGauss);
    std::vector<double> hw_q(n_cells * kGauss);
    for (std::size_t c = 0; c < n_cells; ++c) {
        const double half = 0.5 * (nodes[c + 1] - nodes[c]);
        for (std::size_t q = 0; q < kGauss; ++q) {
            const double x = gauss_point(nodes[c], nodes[c + 1], q);
            const double a = op.pair.a.value(x);
            a_q[c * kGauss + q] = a;
            y2a_q[c * kGauss + q] = (x - x0) * (x - x0) / a;
            hw_q[c * kGauss + q] = half * quad::kGaussWeights[q];
        }
    }

    const std::size_t last = nodes.size() - 1;
    const double a0 = op.pair.a.value(0.0);
    const double a1 = op.pair.a.value(1.0);

    CarlemanReport rep;
    rep.s = s;
    for (int n = 1; n < n_steps; ++n) {
        const double t = n * dt;
        const double th = w.theta(t);
        const auto vf = op.expand(v.row(n));
        const auto hf = op.expand(h.row(n));
        double lhs = 0.0;
        double src = 0.0;
        for (std::size_t c = 0; c < n_cells; ++c) {
            const double hc = nodes[c + 1] - nodes[c];
            const double vx = (vf[c + 1] - vf[c]) / hc;
            for (std::size_t q = 0; q < kGauss; ++q) {
                const std::size_t k = c * kGauss + q;
                const double wt = w.weight(t, w.psi_gauss[k]);
                if (wt == 0.0) continue;
                const double xi = 0.5 * (1.0 + quad::kGaussNodes[q]);
                const double vq = (1.0 - xi) * vf[c] + xi * vf[c + 1];
                const double hq = (1.0 - xi) * hf[c] + xi * hf[c + 1];
                lhs += hw_q[k] * (s * th * a_q[k] * vx * vx + s * s * s * th * th * th * y2a_q[k] * vq * vq) * wt;
                src += hw_q[k] * hq * hq * wt;
            }
        }
        const double vx0 = boundary_slope(vf[1], vf[2], nodes[1] - nodes[0], nodes[2] - nodes[1]);
        const double vx1 = -boundary_slope(vf[last - 1], vf[last - 2], nodes[last] - nodes[last - 1],
                                           nodes[last - 1] - nodes[last - 2]);
        // [a Theta e^{2 s phi} (x - x0) v_x^2] evaluated from x = 0 to x = 1.
        const double bracket = a1 * (1.0 - x0) * vx1 * vx1 * w.weight(t, w.psi[last]) -
                               a0 * (0.0 - x0) * vx0 * vx0 * w.weight(t, w.psi[0]);
        rep.lhs += dt * lhs;
        rep.rhs_source += dt * src;
        rep.rhs_boundary += dt * s * w.c1 * th * bracket;
    }
    const double rhs = rep.rhs_source + rep.rhs_boundary;
    if (rhs != 0.0) {
        rep.ratio = rep.lhs / rhs;
    } else {
        rep.ratio = rep.lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return rep;
}

std::vector<double> default_s_values(double s0, int n) {
    if (n < 2) throw PreconditionError("default_s_values: need at least two points");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = s0 * (1.0 + 7.0 * k / (n - 1));
    return out;
}

std::vector<CarlemanReport> s_scan(const DiscreteOperator& op, const CarlemanWeight& w, const Trajectory& v,
                                   const Trajectory& h, const std::vector<double>& s_values) {
    for (std::size_t i = 0; i < s_values.size(); ++i) {
        if (!(s_values[i] > 0.0) || (i > 0 && !(s_values[i] > s_values[i - 1]))) {
            throw PreconditionError("s_scan: s values must be positive and strictly increasing");
        }
    }
    std::vector<CarlemanReport> out(s_values.size());
    parallel_for(s_values.size(), [&](std::size_t i) { out[i] = evaluate(op, w.with_s(s_values[i]), v, h); });
    return out;
}

double CaccioppoliValues::ratio() const {
    if (l2_omega > 0.0) return weighted_gradient / l2_omega;
    return weighted_gradient == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

CaccioppoliValues caccioppoli(const DiscreteOperator& op, const CarlemanWeight& w, const Trajectory& v,
                              const ControlPattern& omega, const ControlPattern& omega_prime) {
    check_conforming(op, v, "caccioppoli");
    const double x0 = op.mesh.x0;
    if (!(omega.alpha < omega_prime.alpha && omega_prime.beta < omega.beta)) {
        throw PreconditionError("caccioppoli: omega' must be compactly contained in omega");
    }
    if (omega_prime.alpha <= x0 && x0 <= omega_prime.beta) {
        throw PreconditionError("caccioppoli: x0 must lie outside the closure of omega'");
    }
    const auto integral = psi_integral(op.pair, op.mesh);
    const auto& nodes = op.mesh.nodes;
    const int n_steps = v.n_steps();
    const double dt = w.T / n_steps;

    struct Point {
        std::size_t cell;
        double xi;
        double weight;
        double psi;
    };
    auto points_in = [&](double lo, double hi) {
        std::vector<Point> pts;
        for (std::size_t c = 0; c + 1 < nodes.size(); ++c) {
            const double l = std::max(nodes[c], lo);
            const double r = std::min(nodes[c + 1], hi);
            if (r <= l) continue;
            const double hc = nodes[c + 1] - nodes[c];
            for (std::size_t q = 0; q < kGauss; ++q) {
                const double x = gauss_point(l, r, q);
                pts.push_back({c, (x - nodes[c]) / hc, 0.5 * (r - l) * quad::kGaussWeights[q],
                               w.c1 * (integral(x) - w.c2)});
            }
        }
        return pts;
    };
    const auto inner = points_in(omega_prime.alpha, omega_prime.beta);
    const auto outer = points_in(omega.alpha, omega.beta);

    CaccioppoliValues out;
    for (int n = 0; n <= n_steps; ++n) {
        const double t = n == n_steps ? w.T : n * dt;
        const double tw = (n == 0 || n == n_steps) ? 0.5 * dt : dt;
        const auto vf = op.expand(v.row(n));
        double grad = 0.0;
        for (const auto& p : inner) {
            const double wt = w.weight(t, p.psi);
            if (wt == 0.0) continue;
            const double vx = (vf[p.cell + 1] - vf[p.cell]) / (nodes[p.cell + 1] - nodes[p.cell]);
            grad += p.weight * vx * vx * wt;
        }
        double l2 = 0.0;
        for (const auto& p : outer) {
            const double vq = (1.0 - p.xi) * vf[p.cell] + p.xi * vf[p.cell + 1];
            l2 += p.weight * vq * vq;
        }
        out.weighted_gradient += tw * grad;
        out.l2_omega += tw * l2;
    }
    return out;
}

ManufacturedSolution manufactured_solution(const DiscreteOperator& op, const TimeGrid& tg) {
    const double T = tg.T;
    const double x0 = op.mesh.x0;
    const auto space = [x0](double x) { return x * (1.0 - x) * std::abs(x - x0); };
    const auto profile = op.sample(space);
    const BandedCholesky mass(op.mass);

    ManufacturedSolution out{Trajectory(TrajectoryKind::Adjoint, tg.n_steps, op.n_dof()),
                             Trajectory(TrajectoryKind::Source, tg.n_steps, op.n_dof())};
    // v_t + (a v_x)_x + lambda v/b  ->  M^{-1} (-K_a + lambda M_b) v  in space.
    const SymTridiagonal spatial = op.stiffness.combine(-1.0, op.singular_mass, op.lambda);
    const auto applied = mass.solve(spatial * std::span<const double>(profile));
    for (int n = 0; n <= tg.n_steps; ++n) {
        const double t = tg.time(n);
        const double g = t * (T - t);
        const double dg = T - 2.0 * t;
        auto vrow = out.v.row(n);
        auto hrow = out.h.row(n);
        for (std::size_t k = 0; k < op.n_dof(); ++k) {
            vrow[k] = g * profile[k];
            hrow[k] = dg * profile[k] + g * applied[k];
        }
    }
    return out;
}

double NondegWeight::rho_at(double xx) const {
    if (xx <= x.front()) return rho.front();
    if (xx >= x.back()) return rho.back();
    const auto it = std::upper_bound(x.begin(), x.end(), xx);
    const std::size_t j = static_cast<std::size_t>(it - x.begin());
    const double f = (xx - x[j - 1]) / (x[j] - x[j - 1]);
    return (1.0 - f) * rho[j - 1] + f * rho[j];
}

NondegWeight make_nondeg_weight(const CoefficientPair& pair, double A, double B, NondegVariant variant, double r,
                                double margin, int n_points) {
    if (!(0.0 <= A && A < B && B <= 1.0)) throw DomainError("nondeg weight: need 0 <= A < B <= 1");
    if (A <= pair.x0 && pair.x0 <= B) throw DomainError("nondeg weight: [A, B] must not contain x0");
    if (!(r > 0.0) || !(margin > 0.0)) throw PreconditionError("nondeg weight: r and margin must be positive");
    if (n_points < 2) throw PreconditionError("nondeg weight: need at least two points");

    const auto& a = pair.a;
    NondegWeight w;
    w.variant = variant;
    w.A = A;
    w.B = B;
    w.r = r;
    const auto n = static_cast<std::size_t>(n_points);
    w.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) w.x[i] = A + (B - A) * static_cast<double>(i) / static_cast<double>(n - 1);
    w.x.back() = B;

    double d = 0.0;
    for (double xx : w.x) d = std::max(d, std::abs(a.derivative(xx)));
    if (!a.is_power()) {
        for (double bp : a.breakpoints(A, B)) {
            d = std::max(d, std::abs(a.derivative(std::nextafter(bp, A))));
        }
    }
    w.frak_d = d;

    w.zeta.assign(n, 0.0);
    for (std::size_t i = n - 1; i-- > 0;) {
        w.zeta[i] = w.zeta[i + 1] + d * quad::gauss5([&](double t) { return 1.0 / a.value(t); }, w.x[i], w.x[i + 1]);
    }

    w.rho.assign(n, 0.0);
    if (variant == NondegVariant::A1) {
        w.frak_c = margin;
        double acc = 0.0;
        w.rho[0] = -w.frak_c;
        for (std::size_t i = 1; i < n; ++i) {
            acc += quad::gauss5(
                [&](double t) { return (w.frak_g * (B - t) + w.frak_h0) / std::sqrt(a.value(t)); }, w.x[i - 1],
                w.x[i]);
            w.rho[i] = -r * acc - w.frak_c;
        }
    } else {
        double top = 0.0;
        for (double z : w.zeta) top = std::max(top, std::exp(r * z));
        w.frak_c = top + margin;
        for (std::size_t i = 0; i < n; ++i) w.rho[i] = std::exp(r * w.zeta[i]) - w.frak_c;
    }
    return w;
}

double nondeg_lhs(const DiscreteOperator& op, const NondegWeight& w, double s, double T, const Trajectory& v) {
    check_conforming(op, v, "nondeg_lhs");
    const auto& nodes = op.mesh.nodes;
    const int n_steps = v.n_steps();
    const double dt = T / n_steps;
    double total = 0.0;
    for (int n = 1; n < n_steps; ++n) {
        const double t = n * dt;
        const double th = carleman_theta(t, T);
        const auto vf = op.expand(v.row(n));
        double acc = 0.0;
        for (std::size_t c = 0; c + 1 < nodes.size(); ++c) {
            const double l = std::max(nodes[c], w.A);
            const double r = std::min(nodes[c + 1], w.B);
            if (r <= l) continue;
            const double hc = nodes[c + 1] - nodes[c];
            const double vx = (vf[c + 1] - vf[c]) / hc;
            acc += quad::gauss5(
                [&](double x) {
                    const double lw = 2.0 * s * th * w.rho_at(x);
                    if (lw < kLogWeightFloor) return 0.0;
                    const double xi = (x - nodes[c]) / hc;
                    const double vq = (1.0 - xi) * vf[c] + xi * vf[c + 1];
                    return (s * th * vx * vx + s * s * s * th * th * th * vq * vq) * std::exp(lw);
                },
                l, r);
        }
        total += dt * acc;
    }
    return total;
}

}  // namespace sdlab
