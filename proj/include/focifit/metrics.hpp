#pragma once

// Benchmark error metrics. The headline error rate is the normalized area
// difference (union minus intersection over twice the true area), computed by
// midpoint-rule membership counting on a shared padded grid. Counting integer
// cells keeps the metric deterministic and permutation-safe.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "focifit/geometry.hpp"

namespace focifit {

struct ErrorRateConfig {
    int grid_resolution = 2000;  // cells per axis
    double padding = 0.05;       // bounding-box padding fraction
};

struct OverlapAreas {
    double first = 0.0;
    double second = 0.0;
    double union_area = 0.0;
    double intersection = 0.0;
};

namespace detail {

struct EllipseMembership {
    double xc, yc, cp, sp, inv_a2, inv_b2;

    explicit EllipseMembership(const CanonicalEllipse& e)
        : xc(e.center[0]),
          yc(e.center[1]),
          cp(std::cos(e.phi)),
          sp(std::sin(e.phi)),
          inv_a2(1.0 / (e.a * e.a)),
          inv_b2(1.0 / (e.b * e.b)) {}

    bool contains(double x, double y) const {
        const double dx = x - xc, dy = y - yc;
        const double u = cp * dx + sp * dy;
        const double v = -sp * dx + cp * dy;
        return u * u * inv_a2 + v * v * inv_b2 <= 1.0;
    }
};

struct Box {
    double xmin, xmax, ymin, ymax;
};

inline Box bounding_box(const CanonicalEllipse& e) {
    const double cp = std::cos(e.phi), sp = std::sin(e.phi);
    const double ex = std::sqrt(e.a * e.a * cp * cp + e.b * e.b * sp * sp);
    const double ey = std::sqrt(e.a * e.a * sp * sp + e.b * e.b * cp * cp);
    return {e.center[0] - ex, e.center[0] + ex, e.center[1] - ey,
            e.center[1] + ey};
}

}  // namespace detail

/// Grid-measured areas of two ellipses and of their union/intersection over
/// a shared padded bounding box. Swapping the arguments swaps `first` and
/// `second` and leaves the union and intersection bit-identical.
inline OverlapAreas overlap_areas(const CanonicalEllipse& e1,
                                  const CanonicalEllipse& e2,
                                  const ErrorRateConfig& cfg = {}) {
    validate(e1);
    validate(e2);
    if (cfg.grid_resolution < 100)
        throw std::invalid_argument("grid_resolution must be >= 100");
    if (cfg.padding < 0.0) throw std::invalid_argument("padding must be >= 0");

    const auto b1 = detail::bounding_box(e1);
    const auto b2 = detail::bounding_box(e2);
    detail::Box box{std::min(b1.xmin, b2.xmin), std::max(b1.xmax, b2.xmax),
                    std::min(b1.ymin, b2.ymin), std::max(b1.ymax, b2.ymax)};
    const double padx = cfg.padding * (box.xmax - box.xmin);
    const double pady = cfg.padding * (box.ymax - box.ymin);
    box.xmin -= padx;
    box.xmax += padx;
    box.ymin -= pady;
    box.ymax += pady;

    const int res = cfg.grid_resolution;
    const double hx = (box.xmax - box.xmin) / res;
    const double hy = (box.ymax - box.ymin) / res;
    const detail::EllipseMembership m1(e1), m2(e2);

    std::int64_t n1 = 0, n2 = 0, nboth = 0;
    for (int iy = 0; iy < res; ++iy) {
        const double y = box.ymin + (iy + 0.5) * hy;
        for (int ix = 0; ix < res; ++ix) {
            const double x = box.xmin + (ix + 0.5) * hx;
            const bool in1 = m1.contains(x, y);
            const bool in2 = m2.contains(x, y);
            n1 += in1;
            n2 += in2;
            nboth += in1 && in2;
        }
    }
    const double cell = hx * hy;
    return {n1 * cell, n2 * cell, (n1 + n2 - nboth) * cell, nboth * cell};
}

/// Normalized area difference (S_union − S_intersection) / (2 S_true);
/// `true_e` supplies the denominator.
inline double error_rate(const CanonicalEllipse& true_e,
                         const CanonicalEllipse& fitted_e,
                         const ErrorRateConfig& cfg = {}) {
    const auto areas = overlap_areas(true_e, fitted_e, cfg);
    return (areas.union_area - areas.intersection) / (2.0 * areas.first);
}

/// Unsigned angle between two axis directions in degrees, in [0, 90].
template <int N>
double axis_direction_error(const Vec<N>& u, const Vec<N>& v) {
    const double nu = norm(u), nv = norm(v);
    if (nu < 1e-12 || nv < 1e-12)
        throw std::invalid_argument("axis direction must be a nonzero vector");
    double c = std::abs(dot(u, v)) / (nu * nv);
    if (c > 1.0) c = 1.0;
    return std::acos(c) * 180.0 / kPi;
}

/// Nearest-rank quantiles: the ⌈p·n⌉-th smallest value (p = 0 gives the
/// minimum). The tiny epsilon keeps exact ranks like 0.2·100 from rounding
/// up through floating-point excess.
inline std::vector<double> quantile_summary(std::span<const double> values,
                                            std::span<const double> probs) {
    if (values.empty())
        throw std::invalid_argument("quantile_summary needs at least one value");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());

    std::vector<double> out;
    out.reserve(probs.size());
    for (double p : probs) {
        if (p < 0.0 || p > 1.0)
            throw std::invalid_argument("quantile probability outside [0, 1]");
        auto k = static_cast<std::int64_t>(std::ceil(p * n - 1e-9));
        k = std::clamp<std::int64_t>(k, 1, sorted.size());
        out.push_back(sorted[static_cast<std::size_t>(k - 1)]);
    }
    return out;
}

}  // namespace focifit
