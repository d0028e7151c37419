#pragma once

// Self-contained special-function and quadrature helpers.

#include <cmath>
#include <stdexcept>

namespace focifit {

/// Rational approximation of erf (Abramowitz & Stegun 7.1.26), absolute
/// error below 1.5e-7. Kept self-contained so the quadratures below can be
/// replicated exactly elsewhere.
inline double erf_approx(double x) {
    constexpr double p = 0.3275911;
    constexpr double a1 = 0.254829592;
    constexpr double a2 = -0.284496736;
    constexpr double a3 = 1.421413741;
    constexpr double a4 = -1.453152027;
    constexpr double a5 = 1.061405429;

    const double ax = std::abs(x);
    const double t = 1.0 / (1.0 + p * ax);
    const double poly = t * (a1 + t * (a2 + t * (a3 + t * (a4 + t * a5))));
    const double y = 1.0 - poly * std::exp(-ax * ax);
    return x < 0.0 ? -y : y;
}

/// Composite Simpson rule over [lo, hi] with an odd number of equally
/// spaced nodes.
template <typename F>
double simpson(F&& f, double lo, double hi, int nodes = 1025) {
    if (nodes < 3 || nodes % 2 == 0)
        throw std::invalid_argument("simpson needs an odd node count >= 3");
    const int n = nodes - 1;
    const double h = (hi - lo) / n;
    double sum = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    return sum * h / 3.0;
}

}  // namespace focifit
