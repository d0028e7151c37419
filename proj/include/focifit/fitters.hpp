#pragma once

// The end-to-end fitting pipelines over the foci parameterization:
//
//   fit_raw           descend the geometric objective from the mean-based
//                     initialization (degrades under heavy noise: the foci
//                     slip away along the major axis)
//   fit_penalized     estimate â_max and σ̂ first, then descend the
//                     penalized objective
//   fit_axial_guided  orientation/center from the geometric fit, then sizes
//                     from order statistics calibrated by the P_a/P_b
//                     erf quadratures
//   fit_weighted      anneal β from 0 to 1, re-freezing the angle weights
//                     between descent stages
//
// All pipelines work in 2-D and 3-D (spheroids); thin wrappers provide the
// spheroid names.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "focifit/geometry.hpp"
#include "focifit/numeric.hpp"
#include "focifit/objectives.hpp"
#include "focifit/optimizer.hpp"

namespace focifit {

inline constexpr double kDefaultLambda = 0.1;  // tuned artifact constant
inline constexpr int kDefaultBetaSteps = 50;
inline constexpr int kDefaultInnerIterations = 20;

/// σ̂ below this fraction of â_max is treated as noise-free by the
/// axial-guided fitter, which then keeps the step-1 sizes.
inline constexpr double kAxialNoiseFloor = 1e-4;

enum class FitMethod { raw, penalized, axial_guided, weighted, algebraic_baseline };

inline const char* to_string(FitMethod m) {
    switch (m) {
        case FitMethod::raw: return "raw";
        case FitMethod::penalized: return "penalized";
        case FitMethod::axial_guided: return "axial_guided";
        case FitMethod::weighted: return "weighted";
        case FitMethod::algebraic_baseline: return "algebraic";
    }
    return "unknown";
}

/// How step 5 of the axial-guided fitter interprets the P_a/P_b fractions.
/// as_printed uses them directly; complement uses 1/2 + P (the fraction a
/// gaussian point ends up inside the slab, capped at 1).
enum class PaInterpretation { as_printed, complement };

template <int N>
struct ShapeTraits;
template <>
struct ShapeTraits<2> {
    using Canonical = CanonicalEllipse;
};
template <>
struct ShapeTraits<3> {
    using Canonical = CanonicalSpheroid;
};

/// Mean-based starting point: foci straddle the data mean along the
/// principal direction, a starts at the mean distance from the mean.
template <int N>
struct InitEstimate {
    Vec<N> z_mean;
    double a_init = 0.0;
    double a_max_hat = 0.0;
    std::pair<Vec<N>, Vec<N>> foci_init;
    std::optional<double> sigma_hat;
};

template <int N>
struct FitReport {
    typename ShapeTraits<N>::Canonical canonical;
    FociShape<N> foci_form;
    DescentTrace trace;
    std::optional<double> sigma_hat;
    std::optional<double> a_max_hat;
    FitMethod method = FitMethod::raw;
    /// Iterations across all descent stages; equals trace.iterations_used
    /// for the single-stage fitters.
    long total_iterations = 0;
};

using FitReport2 = FitReport<2>;
using FitReport3 = FitReport<3>;

namespace detail {

template <int N>
void require_min_points(std::span<const Vec<N>> pts) {
    const std::size_t need = (N == 2) ? 6 : 9;
    if (pts.size() < need)
        throw std::invalid_argument("fit requires at least " +
                                    std::to_string(need) + " points");
}

template <int N>
std::vector<double> pack_params(const Vec<N>& c1, const Vec<N>& c2, double a) {
    std::vector<double> p(2 * N + 1);
    for (int i = 0; i < N; ++i) {
        p[i] = c1[i];
        p[N + i] = c2[i];
    }
    p[2 * N] = a;
    return p;
}

template <int N>
void unpack_params(std::span<const double> p, Vec<N>& c1, Vec<N>& c2, double& a) {
    for (int i = 0; i < N; ++i) {
        c1[i] = p[i];
        c2[i] = p[N + i];
    }
    a = p[2 * N];
}

template <int N>
Evaluation to_evaluation(const ObjectiveEval<N>& e) {
    Evaluation out;
    out.value = e.value;
    out.gradient.resize(2 * N + 1);
    for (int i = 0; i < N; ++i) {
        out.gradient[i] = e.grad_c1[i];
        out.gradient[N + i] = e.grad_c2[i];
    }
    out.gradient[2 * N] = e.grad_a;
    return out;
}

template <int N>
ObjectiveFn geometric_objective(std::span<const Vec<N>> pts) {
    return [pts](std::span<const double> p) {
        Vec<N> c1, c2;
        double a;
        unpack_params<N>(p, c1, c2, a);
        return to_evaluation<N>(eval_geometric<N>(pts, c1, c2, a));
    };
}

template <int N>
ObjectiveFn penalized_objective(std::span<const Vec<N>> pts, double lambda,
                                double a_max_hat, double sigma_hat) {
    return [pts, lambda, a_max_hat, sigma_hat](std::span<const double> p) {
        Vec<N> c1, c2;
        double a;
        unpack_params<N>(p, c1, c2, a);
        return to_evaluation<N>(
            eval_penalized<N>(pts, c1, c2, a, lambda, a_max_hat, sigma_hat));
    };
}

template <int N>
ObjectiveFn weighted_objective(std::span<const Vec<N>> pts, WeightSet ws) {
    return [pts, ws = std::move(ws)](std::span<const double> p) {
        Vec<N> c1, c2;
        double a;
        unpack_params<N>(p, c1, c2, a);
        return to_evaluation<N>(eval_weighted<N>(pts, c1, c2, a, ws));
    };
}

template <int N>
Vec<N> principal_direction(std::span<const Vec<N>> pts, const Vec<N>& mean) {
    if constexpr (N == 2) {
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (const auto& z : pts) {
            const Vec2 d = z - mean;
            sxx += d[0] * d[0];
            sxy += d[0] * d[1];
            syy += d[1] * d[1];
        }
        const double ang = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
        return {std::cos(ang), std::sin(ang)};
    } else {
        double s[3][3] = {};
        for (const auto& z : pts) {
            const Vec3 d = z - mean;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) s[i][j] += d[i] * d[j];
        }
        int k = 0;
        if (s[1][1] > s[k][k]) k = 1;
        if (s[2][2] > s[k][k]) k = 2;
        Vec3 v{};
        v[k] = 1.0;
        for (int it = 0; it < 256; ++it) {
            Vec3 w{};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) w[i] += s[i][j] * v[j];
            const double n = norm(w);
            if (n < 1e-300) break;
            v = w / n;
        }
        return v;
    }
}

template <int N>
FitReport<N> make_report(FitMethod method, DescentTrace trace,
                         std::optional<double> sigma_hat,
                         std::optional<double> a_max_hat) {
    Vec<N> c1, c2;
    double a;
    unpack_params<N>(trace.final_params, c1, c2, a);
    const FociShape<N> foci{c1, c2, a};
    FitReport<N> rep;
    rep.canonical = foci_to_canonical(foci);
    rep.foci_form = foci;
    rep.total_iterations = trace.iterations_used;
    rep.trace = std::move(trace);
    rep.sigma_hat = sigma_hat;
    rep.a_max_hat = a_max_hat;
    rep.method = method;
    return rep;
}

}  // namespace detail

template <int N>
InitEstimate<N> initialize(std::span<const Vec<N>> points) {
    if (points.size() < 2)
        throw std::invalid_argument("initialization needs at least 2 points");

    InitEstimate<N> init;
    for (const auto& z : points) {
        if (!is_finite(z))
            throw std::invalid_argument("data contains non-finite coordinates");
        init.z_mean += z;
    }
    init.z_mean *= 1.0 / static_cast<double>(points.size());

    for (const auto& z : points) {
        const double d = norm(z - init.z_mean);
        init.a_init += d;
        init.a_max_hat = std::max(init.a_max_hat, d);
    }
    init.a_init /= static_cast<double>(points.size());
    if (init.a_max_hat < 1e-12 * (1.0 + norm(init.z_mean)))
        throw std::invalid_argument("degenerate data: all points coincide");

    const Vec<N> dir = detail::principal_direction<N>(points, init.z_mean);
    if constexpr (N == 3) {
        // A spheroid needs more than a line of points.
        double max_orth = 0.0;
        for (const auto& z : points) {
            const Vec3 d = z - init.z_mean;
            max_orth = std::max(max_orth, norm(d - dot(d, dir) * dir));
        }
        if (max_orth < 1e-10 * init.a_max_hat)
            throw std::invalid_argument("degenerate data: points are collinear");
    }
    init.foci_init = {init.z_mean - (0.5 * init.a_init) * dir,
                      init.z_mean + (0.5 * init.a_init) * dir};
    return init;
}

/// Noise level from the escape behaviour of the geometric objective: descend
/// until a exceeds â_max (or convergence, whichever comes first) and take
/// the square root of the final objective value.
template <int N>
double estimate_sigma_by_escape(std::span<const Vec<N>> points,
                                const InitEstimate<N>& init,
                                const DescentConfig& config = {}) {
    DescentConfig cfg = config;
    cfg.param_floor_last = 1e-9 * init.a_max_hat;
    const double a_max = init.a_max_hat;
    const auto trace = descend(
        detail::geometric_objective<N>(points),
        detail::pack_params<N>(init.foci_init.first, init.foci_init.second,
                               init.a_init),
        cfg, [a_max](std::span<const double> p) { return p.back() > a_max; });
    return std::sqrt(std::max(0.0, trace.objective.back()));
}

template <int N>
FitReport<N> fit_raw(std::span<const Vec<N>> points,
                     const DescentConfig& config = {}) {
    detail::require_min_points<N>(points);
    const auto init = initialize<N>(points);
    DescentConfig cfg = config;
    cfg.param_floor_last = 1e-9 * init.a_max_hat;
    auto trace = descend(
        detail::geometric_objective<N>(points),
        detail::pack_params<N>(init.foci_init.first, init.foci_init.second,
                               init.a_init),
        cfg);
    return detail::make_report<N>(FitMethod::raw, std::move(trace), std::nullopt,
                                  init.a_max_hat);
}

template <int N>
FitReport<N> fit_penalized(std::span<const Vec<N>> points,
                           double lambda = kDefaultLambda,
                           const DescentConfig& config = {}) {
    detail::require_min_points<N>(points);
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    const auto init = initialize<N>(points);
    const double sigma_hat = estimate_sigma_by_escape<N>(points, init, config);

    DescentConfig cfg = config;
    cfg.param_floor_last = 1e-9 * init.a_max_hat;
    auto trace = descend(
        detail::penalized_objective<N>(points, lambda, init.a_max_hat, sigma_hat),
        detail::pack_params<N>(init.foci_init.first, init.foci_init.second,
                               init.a_init),
        cfg);
    return detail::make_report<N>(FitMethod::penalized, std::move(trace),
                                  sigma_hat, init.a_max_hat);
}

/// P_a(γ) = (1/π) ∫₀^{π/2} erf(γ(1−cos θ)/√2) dθ by composite Simpson
/// quadrature with 1025 nodes.
inline double compute_Pa(double gamma) {
    if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
    const double s = simpson(
        [gamma](double th) {
            return erf_approx(gamma * (1.0 - std::cos(th)) / std::sqrt(2.0));
        },
        0.0, 0.5 * kPi, 1025);
    return s / kPi;
}

/// P_b(γ′): as compute_Pa with sin in place of cos.
inline double compute_Pb(double gamma_prime) {
    if (gamma_prime < 0.0) throw std::invalid_argument("gamma must be >= 0");
    const double s = simpson(
        [gamma_prime](double th) {
            return erf_approx(gamma_prime * (1.0 - std::sin(th)) / std::sqrt(2.0));
        },
        0.0, 0.5 * kPi, 1025);
    return s / kPi;
}

/// σ̂² = (1/n) Σ f_i / (2(1+cos ζ_i)), with cos ζ clamped away from −1; the
/// inversion of the expected per-point contribution 2σ²(1+cos ζ).
inline double estimate_sigma_from_fit(std::span<const PointDiagnostics> diags) {
    if (diags.empty())
        throw std::invalid_argument("noise estimation needs diagnostics");
    double s = 0.0;
    for (const auto& d : diags) {
        const double cz = std::max(d.cos_zeta, -1.0 + kCosZetaClamp);
        s += d.contribution / (2.0 * (1.0 + cz));
    }
    return std::sqrt(s / static_cast<double>(diags.size()));
}

/// Two-stage fit: orientation and center from the geometric descent, then
/// semi-axis lengths from nearest-rank order statistics of the rotated
/// coordinates at fractions P_a, P_b. With σ̂ ≈ 0 the step-1 sizes are kept.
inline FitReport2 fit_axial_guided(
    std::span<const Point2> points, const DescentConfig& config = {},
    PaInterpretation interp = PaInterpretation::as_printed) {
    detail::require_min_points<2>(points);
    const auto init = initialize<2>(points);
    DescentConfig cfg = config;
    cfg.param_floor_last = 1e-9 * init.a_max_hat;

    // Step 1: geometric fit for phi, center, and per-point diagnostics.
    auto trace = descend(detail::geometric_objective<2>(points),
                         detail::pack_params<2>(init.foci_init.first,
                                                init.foci_init.second, init.a_init),
                         cfg);
    Vec2 c1, c2;
    double a;
    detail::unpack_params<2>(trace.final_params, c1, c2, a);
    const CanonicalEllipse step1 = foci_to_canonical({c1, c2, a});
    const auto diags = eval_geometric<2>(points, c1, c2, a).diagnostics;

    // Step 3: noise level from the fit residuals.
    const double sigma_hat = estimate_sigma_from_fit(diags);

    FitReport2 rep;
    rep.trace = std::move(trace);
    rep.total_iterations = rep.trace.iterations_used;
    rep.sigma_hat = sigma_hat;
    rep.a_max_hat = init.a_max_hat;
    rep.method = FitMethod::axial_guided;

    if (sigma_hat <= kAxialNoiseFloor * init.a_max_hat) {
        rep.canonical = step1;
        rep.foci_form = canonical_to_foci(step1);
        return rep;
    }

    // Step 2: rotate the data into the standard position of the step-1 fit.
    const double cp = std::cos(step1.phi), sp = std::sin(step1.phi);
    std::vector<double> abs_x, abs_y;
    abs_x.reserve(points.size());
    abs_y.reserve(points.size());
    for (const auto& z : points) {
        const double dx = z[0] - step1.center[0];
        const double dy = z[1] - step1.center[1];
        abs_x.push_back(std::abs(cp * dx + sp * dy));
        abs_y.push_back(std::abs(-sp * dx + cp * dy));
    }
    std::sort(abs_x.begin(), abs_x.end());
    std::sort(abs_y.begin(), abs_y.end());

    // Steps 4-5: slab fractions from the erf quadratures, sizes as the
    // ceil(P*n)-th smallest absolute coordinate.
    double pa = compute_Pa(step1.a / sigma_hat);
    double pb = compute_Pb(step1.b / sigma_hat);
    if (interp == PaInterpretation::complement) {
        pa = std::min(0.5 + pa, 1.0);
        pb = std::min(0.5 + pb, 1.0);
    }
    const auto n = static_cast<double>(points.size());
    auto rank = [n](double p) {
        auto k = static_cast<std::ptrdiff_t>(std::ceil(p * n - 1e-9));
        return std::clamp<std::ptrdiff_t>(k, 1, static_cast<std::ptrdiff_t>(n));
    };
    double a_new = abs_x[static_cast<std::size_t>(rank(pa) - 1)];
    double b_new = abs_y[static_cast<std::size_t>(rank(pb) - 1)];

    double phi = step1.phi;
    if (a_new < b_new) {
        std::swap(a_new, b_new);
        phi = fold_phi(phi + 0.5 * kPi);
    }
    b_new = std::max(b_new, 1e-9 * a_new);

    rep.canonical = CanonicalEllipse{step1.center, a_new, b_new, phi};
    rep.foci_form = canonical_to_foci(rep.canonical);
    return rep;
}

/// Annealed weighted fit over an explicit β schedule; weights are frozen at
/// the current parameters before each stage.
template <int N>
FitReport<N> fit_weighted_schedule(std::span<const Vec<N>> points,
                                   std::span<const double> betas,
                                   int inner_iterations,
                                   const DescentConfig& config = {}) {
    detail::require_min_points<N>(points);
    if (betas.size() < 2)
        throw std::invalid_argument("beta schedule needs at least 2 stages");
    if (inner_iterations < 1)
        throw std::invalid_argument("inner_iterations must be >= 1");

    const auto init = initialize<N>(points);
    DescentConfig cfg = config;
    cfg.max_iterations = inner_iterations;
    cfg.param_floor_last = 1e-9 * init.a_max_hat;

    // The weighted objective keeps the minimum at infinity for every β < 1,
    // and annealing cannot outrun it at high noise. Stages therefore halt
    // once a exceeds the data bound â_max, the same escape signal the
    // σ̂ estimation procedure uses.
    const double a_bound = init.a_max_hat;
    const StopPredicate escape_guard = [a_bound](std::span<const double> p) {
        return p.back() > a_bound;
    };

    std::vector<double> params = detail::pack_params<N>(
        init.foci_init.first, init.foci_init.second, init.a_init);
    DescentTrace last;
    long total = 0;
    for (double beta : betas) {
        Vec<N> c1, c2;
        double a;
        detail::unpack_params<N>(params, c1, c2, a);
        auto ws = compute_weights<N>(points, c1, c2, a, beta);
        last = descend(detail::weighted_objective<N>(points, std::move(ws)),
                       params, cfg, escape_guard);
        params = last.final_params;
        total += last.iterations_used;
        if (last.stop_reason == StopReason::early_stop_predicate) break;
    }

    auto rep = detail::make_report<N>(FitMethod::weighted, std::move(last),
                                      std::nullopt, init.a_max_hat);
    rep.total_iterations = total;
    return rep;
}

/// β ramped linearly over beta_steps stages from 0 to 1.
template <int N>
FitReport<N> fit_weighted(std::span<const Vec<N>> points,
                          int beta_steps = kDefaultBetaSteps,
                          int inner_iterations = kDefaultInnerIterations,
                          const DescentConfig& config = {}) {
    if (beta_steps < 2)
        throw std::invalid_argument("beta_steps must be >= 2");
    std::vector<double> betas(beta_steps);
    for (int k = 0; k < beta_steps; ++k)
        betas[k] = static_cast<double>(k) / (beta_steps - 1);
    return fit_weighted_schedule<N>(points, betas, inner_iterations, config);
}

inline FitReport3 fit_spheroid_weighted(std::span<const Point3> points,
                                        int beta_steps = kDefaultBetaSteps,
                                        int inner_iterations = kDefaultInnerIterations,
                                        const DescentConfig& config = {}) {
    return fit_weighted<3>(points, beta_steps, inner_iterations, config);
}

inline FitReport3 fit_spheroid_penalized(std::span<const Point3> points,
                                         double lambda = kDefaultLambda,
                                         const DescentConfig& config = {}) {
    return fit_penalized<3>(points, lambda, config);
}

}  // namespace focifit
