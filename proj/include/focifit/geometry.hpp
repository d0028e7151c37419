#pragma once

// Ellipse and spheroid parameterizations (foci, canonical, conic forms),
// exact conversions among them, and per-point geometric diagnostics.

#include <cmath>
#include <stdexcept>
#include <string>

#include "focifit/vec.hpp"

namespace focifit {

/// Distance below which a data point counts as coincident with a focus.
inline constexpr double kFocusEps = 1e-12;

/// ‖c1−c2‖ < kCircleEps·a treats the shape as a circle (orientation fixed to 0).
inline constexpr double kCircleEps = 1e-12;

/// Ellipse/spheroid as the locus of points whose distances to the two foci
/// sum to 2a. Valid iff a > ‖c1−c2‖/2.
template <int N>
struct FociShape {
    Vec<N> c1;
    Vec<N> c2;
    double a = 0.0;
};

using FociEllipse = FociShape<2>;
using FociSpheroid = FociShape<3>;

/// Center / semi-axes / orientation form. Invariants: a ≥ b > 0, phi ∈ [0, π).
struct CanonicalEllipse {
    Point2 center;
    double a = 0.0;
    double b = 0.0;
    double phi = 0.0;
};

/// Spheroid with semi-major a along `axis` and two equal semi-minors b.
/// `axis` is unit length with its first nonzero component nonnegative.
struct CanonicalSpheroid {
    Point3 center;
    double a = 0.0;
    double b = 0.0;
    Vec3 axis{1.0, 0.0, 0.0};
};

/// Implicit conic Ax² + Bxy + Cy² + Dx + Ey + F = 0, ellipse-type (B²−4AC < 0).
struct ConicCoefficients {
    double A = 0.0, B = 0.0, C = 0.0, D = 0.0, E = 0.0, F = 0.0;
};

/// Per-point quantities shared by the objectives and the noise estimator:
/// residual r = ‖z−c1‖+‖z−c2‖−2a, contribution f = r², and cos of the
/// angle at the point subtended by the two foci.
struct PointDiagnostics {
    double residual = 0.0;
    double contribution = 0.0;
    double cos_zeta = 0.0;
};

/// Fold an orientation into [0, π); ellipse axes are unsigned directions.
inline double fold_phi(double phi) {
    double p = std::fmod(phi, kPi);
    if (p < 0.0) p += kPi;
    if (p >= kPi) p -= kPi;
    return p;
}

template <int N>
void validate(const FociShape<N>& e) {
    if (!is_finite(e.c1) || !is_finite(e.c2) || !std::isfinite(e.a))
        throw std::invalid_argument("foci shape has non-finite entries");
    const double c = 0.5 * norm(e.c2 - e.c1);
    if (!(e.a > 0.0) || !(e.a > c))
        throw std::invalid_argument(
            "degenerate foci shape: require a > ||c1-c2||/2 > 0 (a=" +
            std::to_string(e.a) + ", c=" + std::to_string(c) + ")");
}

inline void validate(const CanonicalEllipse& e) {
    if (!is_finite(e.center) || !std::isfinite(e.a) || !std::isfinite(e.b) ||
        !std::isfinite(e.phi))
        throw std::invalid_argument("canonical ellipse has non-finite entries");
    if (!(e.b > 0.0) || e.a < e.b)
        throw std::invalid_argument("canonical ellipse requires a >= b > 0");
}

inline void validate(const CanonicalSpheroid& s) {
    if (!is_finite(s.center) || !is_finite(s.axis) || !std::isfinite(s.a) ||
        !std::isfinite(s.b))
        throw std::invalid_argument("canonical spheroid has non-finite entries");
    if (!(s.b > 0.0) || s.a < s.b)
        throw std::invalid_argument("canonical spheroid requires a >= b > 0");
    if (norm(s.axis) < 1e-12)
        throw std::invalid_argument("canonical spheroid axis must be nonzero");
}

/// Flip `v` so that its first nonzero component is nonnegative.
inline Vec3 sign_normalized(Vec3 v) {
    for (int i = 0; i < 3; ++i) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0.0) v *= -1.0;
            break;
        }
    }
    return v;
}

inline CanonicalEllipse foci_to_canonical(const FociEllipse& e) {
    validate(e);
    const Vec2 d = e.c2 - e.c1;
    const double c = 0.5 * norm(d);
    const double b = std::sqrt(e.a * e.a - c * c);
    const double phi =
        (norm(d) < kCircleEps * e.a) ? 0.0 : fold_phi(std::atan2(d[1], d[0]));
    return {0.5 * (e.c1 + e.c2), e.a, b, phi};
}

inline CanonicalSpheroid foci_to_canonical(const FociSpheroid& e) {
    validate(e);
    const Vec3 d = e.c2 - e.c1;
    const double c = 0.5 * norm(d);
    const double b = std::sqrt(e.a * e.a - c * c);
    Vec3 axis{1.0, 0.0, 0.0};
    if (norm(d) >= kCircleEps * e.a) axis = sign_normalized(normalized(d));
    return {0.5 * (e.c1 + e.c2), e.a, b, axis};
}

inline FociEllipse canonical_to_foci(const CanonicalEllipse& e) {
    validate(e);
    const double c = std::sqrt(e.a * e.a - e.b * e.b);
    const Vec2 dir{std::cos(e.phi), std::sin(e.phi)};
    return {e.center - c * dir, e.center + c * dir, e.a};
}

inline FociSpheroid canonical_to_foci(const CanonicalSpheroid& s) {
    validate(s);
    const double c = std::sqrt(s.a * s.a - s.b * s.b);
    const Vec3 dir = normalized(s.axis);
    return {s.center - c * dir, s.center + c * dir, s.a};
}

/// Expand the canonical form into implicit coefficients, normalized so that
/// F = −1 when |F| is not negligible (otherwise to a unit coefficient vector
/// with A + C > 0). The normalization removes the free conic scaling.
inline ConicCoefficients canonical_to_conic(const CanonicalEllipse& e) {
    validate(e);
    const double cp = std::cos(e.phi), sp = std::sin(e.phi);
    const double ia2 = 1.0 / (e.a * e.a), ib2 = 1.0 / (e.b * e.b);
    const double A = cp * cp * ia2 + sp * sp * ib2;
    const double B = 2.0 * cp * sp * (ia2 - ib2);
    const double C = sp * sp * ia2 + cp * cp * ib2;
    const double xc = e.center[0], yc = e.center[1];
    const double D = -2.0 * A * xc - B * yc;
    const double E = -B * xc - 2.0 * C * yc;
    const double F = A * xc * xc + B * xc * yc + C * yc * yc - 1.0;

    ConicCoefficients k{A, B, C, D, E, F};
    if (std::abs(F) > 1e-12) {
        const double s = -1.0 / F;
        k = {A * s, B * s, C * s, D * s, E * s, -1.0};
    } else {
        double n = std::sqrt(A * A + B * B + C * C + D * D + E * E + F * F);
        if (A + C < 0.0) n = -n;
        k = {A / n, B / n, C / n, D / n, E / n, F / n};
    }
    return k;
}

/// Recover center, semi-axes and orientation from an ellipse-type conic.
/// Rejects non-ellipse conics (B²−4AC ≥ 0) and imaginary ellipses.
inline CanonicalEllipse conic_to_canonical(const ConicCoefficients& k) {
    double A = k.A, B = k.B, C = k.C, D = k.D, E = k.E, F = k.F;
    const double disc = B * B - 4.0 * A * C;
    if (!(disc < 0.0))
        throw std::domain_error("conic is not an ellipse (B^2-4AC >= 0)");

    // Fix the overall sign so the quadratic form is positive definite.
    if (A + C < 0.0) {
        A = -A; B = -B; C = -C; D = -D; E = -E; F = -F;
    }
    const double den = 4.0 * A * C - B * B;
    const double xc = (B * E - 2.0 * C * D) / den;
    const double yc = (B * D - 2.0 * A * E) / den;
    // Constant term after translating the center to the origin.
    const double Fc = F + 0.5 * (D * xc + E * yc);
    if (!(-Fc > 0.0))
        throw std::domain_error("conic has no real ellipse points");

    const double half_tr = 0.5 * (A + C);
    const double off = std::sqrt(0.25 * (A - C) * (A - C) + 0.25 * B * B);
    const double lam_min = half_tr - off;  // eigenvalue of the major axis
    const double lam_max = half_tr + off;
    const double a = std::sqrt(-Fc / lam_min);
    const double b = std::sqrt(-Fc / lam_max);

    double phi = 0.0;
    if (off > 1e-14 * half_tr) {
        // Eigenvector of lam_min; pick the better conditioned expression.
        const Vec2 w1{0.5 * B, lam_min - A};
        const Vec2 w2{lam_min - C, 0.5 * B};
        const Vec2 w = (norm_squared(w1) >= norm_squared(w2)) ? w1 : w2;
        if (norm(w) > 0.0) phi = fold_phi(std::atan2(w[1], w[0]));
    }
    return {{xc, yc}, a, b, phi};
}

/// Cosine of the angle at z subtended by c1 and c2, clamped to [−1, 1]
/// against round-off. Undefined (throws) when z coincides with a focus.
template <int N>
double cos_zeta(const Vec<N>& z, const Vec<N>& c1, const Vec<N>& c2) {
    const Vec<N> u = c1 - z;
    const Vec<N> w = c2 - z;
    const double n1 = norm(u), n2 = norm(w);
    if (n1 < kFocusEps || n2 < kFocusEps)
        throw std::domain_error("cos_zeta undefined: point coincides with a focus");
    const double c = dot(u, w) / (n1 * n2);
    return c < -1.0 ? -1.0 : (c > 1.0 ? 1.0 : c);
}

/// Signed residual of the foci definition at z, ‖z−c1‖+‖z−c2‖−2a.
template <int N>
double foci_residual(const Vec<N>& z, const Vec<N>& c1, const Vec<N>& c2,
                     double a) {
    return norm(z - c1) + norm(z - c2) - 2.0 * a;
}

template <int N>
PointDiagnostics point_diagnostics(const Vec<N>& z, const Vec<N>& c1,
                                   const Vec<N>& c2, double a) {
    const double r = foci_residual(z, c1, c2, a);
    return {r, r * r, cos_zeta(z, c1, c2)};
}

}  // namespace focifit
