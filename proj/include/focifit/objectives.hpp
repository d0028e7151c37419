#pragma once

// The foci-based objective functions and their analytic gradients with
// respect to (c1, c2, a), in two and three dimensions:
//   geometric:  (1/n) Σ (‖z−c1‖ + ‖z−c2‖ − 2a)²
//   penalized:  geometric + λ·â_max·σ̂·exp((a/â_max)⁴)
//   weighted:   (1/n) Σ w_i (‖z−c1‖ + ‖z−c2‖ − 2a)²,  w_i = 1/(1+β·cos ζ_i)
// Weights are treated as constants during differentiation; they are computed
// once per annealing stage and frozen.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "focifit/geometry.hpp"
#include "focifit/vec.hpp"

namespace focifit {

/// cos ζ is clamped to [−1+kCosZetaClamp, 1] inside compute_weights so that
/// β = 1 weights stay finite for points collinear between the foci.
inline constexpr double kCosZetaClamp = 1e-9;

/// Objective value, exact gradients, and per-point diagnostics. The value
/// satisfies value = mean(diagnostics contribution · weight) + penalty,
/// where weights are 1 and penalty is 0 except for the weighted and
/// penalized objectives respectively.
template <int N>
struct ObjectiveEval {
    double value = 0.0;
    Vec<N> grad_c1;
    Vec<N> grad_c2;
    double grad_a = 0.0;
    double penalty = 0.0;
    std::vector<PointDiagnostics> diagnostics;
};

/// Frozen per-point weights 1/(1+β·cos ζ_i) together with the β they were
/// computed for.
struct WeightSet {
    std::vector<double> weights;
    double beta = 0.0;
};

namespace detail {

// Shared accumulation kernel; `weights` may be null (unit weights). Passing
// unit weights reproduces the geometric objective bit-for-bit.
template <int N>
ObjectiveEval<N> eval_residual_objective(std::span<const Vec<N>> points,
                                         const Vec<N>& c1, const Vec<N>& c2,
                                         double a, const double* weights) {
    if (points.empty()) throw std::invalid_argument("objective needs >= 1 point");

    ObjectiveEval<N> out;
    out.diagnostics.reserve(points.size());
    const double n = static_cast<double>(points.size());

    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec<N>& z = points[i];
        const Vec<N> u1 = c1 - z;
        const Vec<N> u2 = c2 - z;
        const double d1 = norm(u1);
        const double d2 = norm(u2);
        if (d1 < kFocusEps || d2 < kFocusEps)
            throw std::domain_error(
                "singular gradient: data point coincides with a focus");

        const double r = d1 + d2 - 2.0 * a;
        const double w = weights ? weights[i] : 1.0;
        double cz = dot(u1, u2) / (d1 * d2);
        cz = cz < -1.0 ? -1.0 : (cz > 1.0 ? 1.0 : cz);

        out.value += w * r * r;
        out.grad_c1 += (2.0 * w * r / d1) * u1;
        out.grad_c2 += (2.0 * w * r / d2) * u2;
        out.grad_a += -4.0 * w * r;
        out.diagnostics.push_back({r, r * r, cz});
    }

    out.value /= n;
    out.grad_c1 *= 1.0 / n;
    out.grad_c2 *= 1.0 / n;
    out.grad_a /= n;
    return out;
}

}  // namespace detail

/// Mean squared foci-sum residual (the raw geometric objective).
template <int N>
ObjectiveEval<N> eval_geometric(std::span<const Vec<N>> points, const Vec<N>& c1,
                                const Vec<N>& c2, double a) {
    return detail::eval_residual_objective<N>(points, c1, c2, a, nullptr);
}

/// Geometric objective plus the semi-major-length penalty
/// λ·â_max·σ̂·exp((a/â_max)⁴), which removes the global minimum at infinity.
template <int N>
ObjectiveEval<N> eval_penalized(std::span<const Vec<N>> points, const Vec<N>& c1,
                                const Vec<N>& c2, double a, double lambda,
                                double a_max_hat, double sigma_hat) {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    if (!(a_max_hat > 0.0)) throw std::invalid_argument("a_max_hat must be > 0");
    if (sigma_hat < 0.0) throw std::invalid_argument("sigma_hat must be >= 0");

    ObjectiveEval<N> out = detail::eval_residual_objective<N>(points, c1, c2, a, nullptr);
    const double q = a / a_max_hat;
    const double p = lambda * a_max_hat * sigma_hat * std::exp(q * q * q * q);
    out.penalty = p;
    out.value += p;
    out.grad_a += p * 4.0 * a * a * a / (a_max_hat * a_max_hat * a_max_hat * a_max_hat);
    return out;
}

/// Weighted objective with the weights held fixed.
template <int N>
ObjectiveEval<N> eval_weighted(std::span<const Vec<N>> points, const Vec<N>& c1,
                               const Vec<N>& c2, double a, const WeightSet& ws) {
    if (ws.weights.size() != points.size())
        throw std::invalid_argument("weight count does not match point count");
    for (double w : ws.weights)
        if (!(w > 0.0) || !std::isfinite(w))
            throw std::invalid_argument("weights must be finite and positive");
    return detail::eval_residual_objective<N>(points, c1, c2, a, ws.weights.data());
}

/// Weights 1/(1+β·cos ζ_i) at the given parameters, cos ζ clamped away from
/// −1 so that β = 1 stays finite.
template <int N>
WeightSet compute_weights(std::span<const Vec<N>> points, const Vec<N>& c1,
                          const Vec<N>& c2, double a, double beta) {
    if (beta < 0.0 || beta > 1.0)
        throw std::invalid_argument("beta must lie in [0, 1]");
    (void)a;  // the weights depend on the foci only
    WeightSet ws;
    ws.beta = beta;
    ws.weights.reserve(points.size());
    for (const Vec<N>& z : points) {
        double cz = cos_zeta<N>(z, c1, c2);
        if (cz < -1.0 + kCosZetaClamp) cz = -1.0 + kCosZetaClamp;
        ws.weights.push_back(1.0 / (1.0 + beta * cz));
    }
    return ws;
}

}  // namespace focifit
