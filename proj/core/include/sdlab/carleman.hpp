#pragma once

// Carleman weights  phi = Theta(t) psi(x),  Theta = 1/[t(T-t)]^4,
//   psi = c1 [ int_{x0}^x (y - x0)/a(y) dy - c2 ],
// and empirical evaluation of both sides of the degenerate/singular Carleman
// and Caccioppoli inequalities on discrete trajectories.

#include <functional>
#include <vector>

#include "sdlab/evolution.hpp"
#include "sdlab/spaces.hpp"

namespace sdlab {

/// Log-weights below this are treated as exact zeros.
inline constexpr double kLogWeightFloor = -700.0;

double carleman_theta(double t, double T);

class CarlemanWeight {
public:
    double c1 = 1.0;
    double c2 = 0.0;
    double s = 1.0;
    double T = 1.0;
    /// psi at every mesh node.
    std::vector<double> psi;
    /// psi at the 5 Gauss points of every cell, row-major by cell.
    std::vector<double> psi_gauss;

    double theta(double t) const { return carleman_theta(t, T); }
    /// e^{2 s Theta(t) psi}: exactly 0 at t in {0, T} and below the log floor.
    double weight(double t, double psi_value) const;
    CarlemanWeight with_s(double new_s) const;
    /// max over x of psi, attained where the psi integral is largest.
    double psi_max() const;
};

/// Throws DomainError for K1 >= 2, PreconditionError unless c1, c2_margin, s > 0.
CarlemanWeight make_weight(const CoefficientPair& pair, const Mesh& mesh, double c1, double c2_margin, double s);

/// s such that max_x e^{2 s phi(T/2, x)} = 1e-2.
double default_s0(const CarlemanWeight& w);

struct CarlemanReport {
    double s = 0.0;
    double lhs = 0.0;
    double rhs_source = 0.0;
    double rhs_boundary = 0.0;
    /// lhs / (rhs_source + rhs_boundary); +inf when the right side vanishes and lhs does not.
    double ratio = 0.0;
};

/// `v` and `h` share the time grid of `w.T` with v.n_steps() steps; both are nodal
/// and h is interpolated piecewise linearly.
CarlemanReport evaluate(const DiscreteOperator& op, const CarlemanWeight& w, const Trajectory& v,
                        const Trajectory& h);

/// One report per s; evaluations run in parallel. Throws PreconditionError unless
/// s_values is positive and strictly increasing.
std::vector<CarlemanReport> s_scan(const DiscreteOperator& op, const CarlemanWeight& w, const Trajectory& v,
                                   const Trajectory& h, const std::vector<double>& s_values);

/// s0 * (1 + 7 k / (n - 1)) for k < n: n equispaced points on [s0, 8 s0].
std::vector<double> default_s_values(double s0, int n = 8);

struct CaccioppoliValues {
    /// int_0^T int_{omega'} v_x^2 e^{2 s phi}
    double weighted_gradient = 0.0;
    /// int_0^T int_omega v^2
    double l2_omega = 0.0;
    double ratio() const;
};

/// Requires omega' compactly inside omega and x0 outside the closure of omega'.
CaccioppoliValues caccioppoli(const DiscreteOperator& op, const CarlemanWeight& w, const Trajectory& v,
                              const ControlPattern& omega, const ControlPattern& omega_prime);

struct ManufacturedSolution {
    Trajectory v;
    /// h = v_t + (a v_x)_x + lambda v / b with the spatial operator applied discretely.
    Trajectory h;
};

/// v(t, x) = t (T - t) x (1 - x) |x - x0| at the dof nodes.
ManufacturedSolution manufactured_solution(const DiscreteOperator& op, const TimeGrid& tg);

enum class NondegVariant { A1, A2 };

/// Weight rho on [A, B] away from x0 for the nondegenerate nonsingular estimate.
struct NondegWeight {
    NondegVariant variant = NondegVariant::A2;
    double A = 0.0;
    double B = 1.0;
    double r = 1.0;
    double frak_c = 1.0;
    /// sup |a'| on [A, B].
    double frak_d = 0.0;
    /// (a1) data: frak_g = 1, frak_h0 = 1.
    double frak_g = 1.0;
    double frak_h0 = 1.0;
    std::vector<double> x;
    std::vector<double> rho;
    std::vector<double> zeta;

    /// Piecewise linear interpolation of rho.
    double rho_at(double xx) const;
};

/// (a1): rho = -r int_A^x (B - t + 1)/sqrt(a) dt - c with c = margin.
/// (a2): rho = e^{r zeta} - c, zeta = d int_x^B 1/a, c = max e^{r zeta} + margin.
/// Throws DomainError when [A, B] touches x0 or leaves [0, 1].
NondegWeight make_nondeg_weight(const CoefficientPair& pair, double A, double B, NondegVariant variant, double r,
                                double margin, int n_points = 257);

/// int_0^T int_A^B (s Theta v_x^2 + s^3 Theta^3 v^2) e^{2 s Theta rho}, trapezoid in time.
double nondeg_lhs(const DiscreteOperator& op, const NondegWeight& w, double s, double T, const Trajectory& v);

}  // namespace sdlab
