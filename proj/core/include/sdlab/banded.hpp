#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sdlab {

/// Symmetric tridiagonal matrix: diagonal plus the coupling between i and i+1.
class SymTridiagonal {
public:
    SymTridiagonal() = default;
    explicit SymTridiagonal(std::size_t n) : diag_(n, 0.0), off_(n > 0 ? n - 1 : 0, 0.0) {}
    SymTridiagonal(std::vector<double> diag, std::vector<double> off);

    std::size_t order() const noexcept { return diag_.size(); }

    std::span<const double> diag() const noexcept { return diag_; }
    std::span<const double> off() const noexcept { return off_; }
    double& diag(std::size_t i) { return diag_[i]; }
    double& off(std::size_t i) { return off_[i]; }

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> operator*(std::span<const double> x) const;
    double bilinear(std::span<const double> x, std::span<const double> y) const;
    double quadratic(std::span<const double> x) const { return bilinear(x, x); }

    /// alpha * this + beta * other.
    SymTridiagonal combine(double alpha, const SymTridiagonal& other, double beta) const;

    /// Number of negative eigenvalues (Sylvester inertia of the LDL^T factorization).
    std::size_t negative_count() const;

    bool all_zero() const noexcept;

private:
    std::vector<double> diag_;
    std::vector<double> off_;
};

/// Cholesky factor of a positive definite tridiagonal matrix.
class BandedCholesky {
public:
    explicit BandedCholesky(const SymTridiagonal& a);

    std::size_t order() const noexcept { return l_diag_.size(); }
    void solve_in_place(std::span<double> rhs) const;
    std::vector<double> solve(std::span<const double> rhs) const;

private:
    std::vector<double> l_diag_;
    std::vector<double> l_sub_;
};

/// Solves A x = rhs for positive definite A; throws NotSpdError with the pivot index.
std::vector<double> solve_banded(const SymTridiagonal& a, std::span<const double> rhs);

}  // namespace sdlab
