#pragma once

// Seeded synthetic data: points drawn uniformly in angle on an ellipse or
// spheroid surface, corrupted with isotropic gaussian noise. Fixed seeds give
// identical datasets across runs. Datasets round-trip through a small CSV
// format (header x,y or x,y,z, one point per row, LF endings).

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "focifit/geometry.hpp"
#include "focifit/rng.hpp"

namespace focifit {

/// How the polar angle is drawn on a spheroid surface. uniform_cos picks
/// cos ψ uniformly (uniform on the sphere before scaling); uniform_angle
/// picks ψ itself uniformly on [0, π].
enum class PolarSampling { uniform_cos, uniform_angle };

struct EllipseGeneratorSpec {
    CanonicalEllipse shape;
    int n_points = 50;
    double noise_variance = 0.0;
    std::uint64_t seed = 0;
};

struct SpheroidGeneratorSpec {
    CanonicalSpheroid shape;
    int n_points = 50;
    double noise_variance = 0.0;
    std::uint64_t seed = 0;
    PolarSampling polar = PolarSampling::uniform_cos;
};

template <int N>
struct Dataset {
    std::vector<Vec<N>> observed;
    std::vector<Vec<N>> truth;
};

using Dataset2 = Dataset<2>;
using Dataset3 = Dataset<3>;

namespace detail {

inline void validate_generator(int n_points, double noise_variance) {
    if (n_points < 1) throw std::invalid_argument("n_points must be >= 1");
    if (noise_variance < 0.0)
        throw std::invalid_argument("noise variance must be >= 0");
}

/// Deterministic orthonormal complement of a unit axis.
inline std::pair<Vec3, Vec3> axis_frame(const Vec3& axis) {
    const Vec3 ref = std::abs(axis[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const Vec3 e1 = normalized(cross(axis, ref));
    return {e1, cross(axis, e1)};
}

}  // namespace detail

/// Per point: one uniform draw for the angle, then one gaussian per
/// coordinate. Returns observed and true points in matching order.
inline Dataset2 generate_ellipse_points(const EllipseGeneratorSpec& spec) {
    validate(spec.shape);
    detail::validate_generator(spec.n_points, spec.noise_variance);

    Xoshiro256pp rng(spec.seed);
    const double sigma = std::sqrt(spec.noise_variance);
    const double cp = std::cos(spec.shape.phi), sp = std::sin(spec.shape.phi);

    Dataset2 out;
    out.observed.reserve(spec.n_points);
    out.truth.reserve(spec.n_points);
    for (int i = 0; i < spec.n_points; ++i) {
        const double theta = rng.uniform(0.0, 2.0 * kPi);
        const double u = spec.shape.a * std::cos(theta);
        const double v = spec.shape.b * std::sin(theta);
        const Point2 t{spec.shape.center[0] + cp * u - sp * v,
                       spec.shape.center[1] + sp * u + cp * v};
        out.truth.push_back(t);
        out.observed.push_back(
            {t[0] + sigma * rng.gaussian(), t[1] + sigma * rng.gaussian()});
    }
    return out;
}

/// Per point: azimuth draw, polar draw, then three gaussians.
inline Dataset3 generate_spheroid_points(const SpheroidGeneratorSpec& spec) {
    validate(spec.shape);
    detail::validate_generator(spec.n_points, spec.noise_variance);

    Xoshiro256pp rng(spec.seed);
    const double sigma = std::sqrt(spec.noise_variance);
    const Vec3 axis = normalized(spec.shape.axis);
    const auto [e1, e2] = detail::axis_frame(axis);

    Dataset3 out;
    out.observed.reserve(spec.n_points);
    out.truth.reserve(spec.n_points);
    for (int i = 0; i < spec.n_points; ++i) {
        const double theta = rng.uniform(0.0, 2.0 * kPi);
        const double psi = spec.polar == PolarSampling::uniform_cos
                               ? std::acos(rng.uniform(-1.0, 1.0))
                               : rng.uniform(0.0, kPi);
        const Vec3 t = spec.shape.center + (spec.shape.a * std::cos(psi)) * axis +
                       (spec.shape.b * std::sin(psi)) *
                           (std::cos(theta) * e1 + std::sin(theta) * e2);
        out.truth.push_back(t);
        out.observed.push_back({t[0] + sigma * rng.gaussian(),
                                t[1] + sigma * rng.gaussian(),
                                t[2] + sigma * rng.gaussian()});
    }
    return out;
}

/// Full-precision decimal form that parses back to the same double.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <int N>
void write_points_csv(std::ostream& os, std::span<const Vec<N>> points) {
    os << (N == 2 ? "x,y" : "x,y,z") << '\n';
    for (const auto& p : points) {
        for (int i = 0; i < N; ++i)
            os << (i ? "," : "") << format_double(p[i]);
        os << '\n';
    }
}

template <int N>
void write_points_csv(const std::string& path, std::span<const Vec<N>> points) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_points_csv<N>(os, points);
}

/// A parsed dataset of runtime-determined dimension (2 or 3).
struct CsvPoints {
    int dim = 0;
    std::vector<Point2> points2;
    std::vector<Point3> points3;
};

inline CsvPoints read_points_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty CSV input");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    CsvPoints out;
    if (line == "x,y")
        out.dim = 2;
    else if (line == "x,y,z")
        out.dim = 3;
    else
        throw std::runtime_error("expected CSV header 'x,y' or 'x,y,z', got '" +
                                 line + "'");

    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) {
            std::size_t used = 0;
            const double v = std::stod(cell, &used);
            if (used != cell.size())
                throw std::runtime_error("bad number in CSV line " +
                                         std::to_string(lineno));
            vals.push_back(v);
        }
        if (static_cast<int>(vals.size()) != out.dim)
            throw std::runtime_error("wrong column count in CSV line " +
                                     std::to_string(lineno));
        if (out.dim == 2)
            out.points2.push_back({vals[0], vals[1]});
        else
            out.points3.push_back({vals[0], vals[1], vals[2]});
    }
    return out;
}

inline CsvPoints read_points_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return read_points_csv(is);
}

}  // namespace focifit
