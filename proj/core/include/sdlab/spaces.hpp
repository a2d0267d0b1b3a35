#pragma once

// Graded P1 meshes with x0 as a node and the weighted tridiagonal matrices of
//   K_a = (a phi_i', phi_j'),  M = (phi_i, phi_j),  M_b = (phi_i phi_j / b)
// on the Dirichlet-eliminated space.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sdlab/banded.hpp"
#include "sdlab/coefficients.hpp"

namespace sdlab {

struct Mesh {
    std::vector<double> nodes;
    double x0 = 0.5;
    double grading = 1.0;
    std::size_t x0_index = 0;

    std::size_t n_cells() const noexcept { return nodes.empty() ? 0 : nodes.size() - 1; }
    double width(std::size_t cell) const { return nodes[cell + 1] - nodes[cell]; }
    /// Index of the cell containing x (the left cell at interior nodes).
    std::size_t locate(double x) const;
};

/// n_cells/2 cells on each side of x0 with offsets |xi|^grading of a uniform
/// parameter xi. Requires an even n_cells >= 16, x0 in (0,1) and grading >= 1.
Mesh build_mesh(int n_cells, double x0, double grading);

/// 2 / (2 - max(K1, K2)) clamped to [1, 4].
double default_grading(double k1, double k2);

struct DiscreteOperator {
    Mesh mesh;
    CoefficientPair pair;
    /// Mesh node index of every degree of freedom, increasing.
    std::vector<std::size_t> dofs;
    SymTridiagonal stiffness;      ///< K_a
    SymTridiagonal mass;           ///< M
    SymTridiagonal singular_mass;  ///< M_b
    double lambda = 0.0;
    /// True iff K2 >= 1, in which case u(x0) = 0 and x0 carries no dof.
    bool constrained_x0 = false;

    std::size_t n_dof() const noexcept { return dofs.size(); }

    /// A_h = K_a - lambda M_b.
    SymTridiagonal generator() const { return stiffness.combine(1.0, singular_mass, -lambda); }

    /// Nodal vector on all mesh nodes with zeros at eliminated nodes.
    std::vector<double> expand(std::span<const double> dof_values) const;
    /// Samples f at the dof nodes.
    std::vector<double> sample(const std::function<double(double)>& f) const;
    double dof_x(std::size_t k) const { return mesh.nodes[dofs[k]]; }

    DiscreteOperator with_lambda(double new_lambda) const;
};

/// Throws AssemblyError naming the cell when an entry is not finite.
DiscreteOperator assemble(const CoefficientPair& pair, const Mesh& mesh);

struct RayleighParts {
    double stiffness;
    double mass;
    double singular;
};

RayleighParts rayleigh(const DiscreteOperator& op, std::span<const double> u);

/// Mass matrix restricted to (alpha, beta): entries int_(alpha,beta) phi_i phi_j.
SymTridiagonal restricted_mass(const DiscreteOperator& op, double alpha, double beta);

/// True for the dofs whose hat support meets (alpha, beta).
std::vector<bool> support_mask(const DiscreteOperator& op, double alpha, double beta);

}  // namespace sdlab
