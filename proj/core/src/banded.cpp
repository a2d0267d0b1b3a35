#include "sdlab/banded.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdlab/errors.hpp"

namespace sdlab {

SymTridiagonal::SymTridiagonal(std::vector<double> diag, std::vector<double> off)
    : diag_(std::move(diag)), off_(std::move(off)) {
    if (off_.size() + 1 != diag_.size() && !(diag_.empty() && off_.empty())) {
        throw DimensionError("tridiagonal off-diagonal must have order-1 entries");
    }
}

void SymTridiagonal::multiply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = order();
    if (x.size() != n || y.size() != n) throw DimensionError("tridiagonal multiply: size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag_[i] * x[i];
        if (i > 0) s += off_[i - 1] * x[i - 1];
        if (i + 1 < n) s += off_[i] * x[i + 1];
        y[i] = s;
    }
}

std::vector<double> SymTridiagonal::operator*(std::span<const double> x) const {
    std::vector<double> y(order());
    multiply(x, y);
    return y;
}

double SymTridiagonal::bilinear(std::span<const double> x, std::span<const double> y) const {
    const std::size_t n = order();
    if (x.size() != n || y.size() != n) throw DimensionError("tridiagonal bilinear form: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += diag_[i] * x[i] * y[i];
        if (i + 1 < n) s += off_[i] * (x[i] * y[i + 1] + x[i + 1] * y[i]);
    }
    return s;
}

SymTridiagonal SymTridiagonal::combine(double alpha, const SymTridiagonal& other, double beta) const {
    if (other.order() != order()) throw DimensionError("tridiagonal combine: order mismatch");
    SymTridiagonal out(order());
    for (std::size_t i = 0; i < order(); ++i) out.diag_[i] = alpha * diag_[i] + beta * other.diag_[i];
    for (std::size_t i = 0; i < off_.size(); ++i) out.off_[i] = alpha * off_[i] + beta * other.off_[i];
    return out;
}

std::size_t SymTridiagonal::negative_count() const {
    const std::size_t n = order();
    double scale = 0.0;
    for (double v : diag_) scale = std::max(scale, std::abs(v));
    for (double v : off_) scale = std::max(scale, std::abs(v));
    const double tiny = std::numeric_limits<double>::epsilon() * (scale > 0.0 ? scale : 1.0);
    std::size_t count = 0;
    double prev = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = diag_[i];
        if (i > 0) d -= off_[i - 1] * off_[i - 1] / prev;
        if (d == 0.0) d = -tiny;
        if (d < 0.0) ++count;
        prev = d;
    }
    return count;
}

bool SymTridiagonal::all_zero() const noexcept {
    for (double v : diag_) if (v != 0.0) return false;
    for (double v : off_) if (v != 0.0) return false;
    return true;
}

BandedCholesky::BandedCholesky(const SymTridiagonal& a)
    : l_diag_(a.order()), l_sub_(a.order() > 0 ? a.order() - 1 : 0) {
    const auto d = a.diag();
    const auto e = a.off();
    for (std::size_t i = 0; i < a.order(); ++i) {
        double pivot = d[i];
        if (i > 0) pivot -= l_sub_[i - 1] * l_sub_[i - 1];
        if (!(pivot > 0.0)) throw NotSpdError(i, pivot);
        l_diag_[i] = std::sqrt(pivot);
        if (i < l_sub_.size()) l_sub_[i] = e[i] / l_diag_[i];
    }
}

void BandedCholesky::solve_in_place(std::span<double> rhs) const {
    const std::size_t n = order();
    if (rhs.size() != n) throw DimensionError("banded solve: right-hand side size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) rhs[i] -= l_sub_[i - 1] * rhs[i - 1];
        rhs[i] /= l_diag_[i];
    }
    for (std::size_t k = n; k-- > 0;) {
        if (k + 1 < n) rhs[k] -= l_sub_[k] * rhs[k + 1];
        rhs[k] /= l_diag_[k];
    }
}

std::vector<double> BandedCholesky::solve(std::span<const double> rhs) const {
    std::vector<double> x(rhs.begin(), rhs.end());
    solve_in_place(x);
    return x;
}

std::vector<double> solve_banded(const SymTridiagonal& a, std::span<const double> rhs) {
    return BandedCholesky(a).solve(rhs);
}

}  // namespace sdlab
