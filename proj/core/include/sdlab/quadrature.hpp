#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace sdlab::quad {

/// 5-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 5> kGaussNodes{
    -0.9061798459386639927976269, -0.5384693101056830910363144, 0.0,
    0.5384693101056830910363144,  0.9061798459386639927976269};
inline constexpr std::array<double, 5> kGaussWeights{
    0.2369268850561890875142640, 0.4786286704993664680412915, 0.5688888888888888888888889,
    0.4786286704993664680412915, 0.2369268850561890875142640};

template <class F>
double gauss5(F&& f, double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t q = 0; q < kGaussNodes.size(); ++q) s += kGaussWeights[q] * f(mid + half * kGaussNodes[q]);
    return s * half;
}

/// Integral over [lo, hi] of a function that is steep or singular at `center`,
/// which must lie outside (lo, hi). The interval is cut into pieces whose distances
/// to `center` grow geometrically by at most `ratio`, each integrated with gauss5.
/// If `center` is an endpoint, pieces stop at a floor still resolvable next to
/// `center` and the remainder is dropped; the integrands used here are bounded there.
template <class F>
double graded(F&& f, double lo, double hi, double center, double ratio = 1.2) {
    const bool right = center <= lo;
    const double near = right ? lo - center : center - hi;
    const double far = right ? hi - center : center - lo;
    auto at = [&](double d) { return right ? center + d : center - d; };
    auto piece = [&](double d0, double d1) {
        const double x0 = at(d0);
        const double x1 = at(d1);
        return gauss5(f, std::min(x0, x1), std::max(x0, x1));
    };
    if (far <= 0.0) return 0.0;
    const double floor = near > 0.0 ? near : std::min(far / ratio, std::max(far * 1e-14, std::abs(center) * 1e-13));
    double s = 0.0;
    double d = far;
    while (d > floor * ratio) {
        const double next = d / ratio;
        s += piece(next, d);
        d = next;
    }
    s += piece(floor, d);
    return s;
}

}  // namespace sdlab::quad
