#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "focifit/objectives.hpp"
#include "test_util.hpp"

using namespace focifit;
using Catch::Approx;

namespace {

// Central finite differences of the objective value over the packed
// parameter vector (c1, c2, a) — the independent gradient oracle.
template <int N, typename Eval>
std::vector<double> fd_gradient(const Eval& eval, Vec<N> c1, Vec<N> c2, double a,
                                double h = 1e-6) {
    std::vector<double> g;
    auto value_at = [&](int idx, double delta) {
        Vec<N> p1 = c1, p2 = c2;
        double pa = a;
        if (idx < N)
            p1[idx] += delta;
        else if (idx < 2 * N)
            p2[idx - N] += delta;
        else
            pa += delta;
        return eval(p1, p2, pa).value;
    };
    for (int i = 0; i < 2 * N + 1; ++i)
        g.push_back((value_at(i, h) - value_at(i, -h)) / (2.0 * h));
    return g;
}

template <int N>
std::vector<double> packed_gradient(const ObjectiveEval<N>& e) {
    std::vector<double> g;
    for (int i = 0; i < N; ++i) g.push_back(e.grad_c1[i]);
    for (int i = 0; i < N; ++i) g.push_back(e.grad_c2[i]);
    g.push_back(e.grad_a);
    return g;
}

double rel_vec_err(const std::vector<double>& x, const std::vector<double>& y) {
    double d2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        d2 += (x[i] - y[i]) * (x[i] - y[i]);
        n2 += y[i] * y[i];
    }
    return std::sqrt(d2) / std::max(1.0, std::sqrt(n2));
}

template <int N>
struct RandomConfig {
    std::vector<Vec<N>> points;
    Vec<N> c1, c2;
    double a = 1.0;
};

template <int N>
RandomConfig<N> random_config(std::mt19937_64& g, int n_points) {
    RandomConfig<N> cfg;
    auto coord = [&] { return testutil::uniform(g, -4.0, 4.0); };
    auto vec = [&] {
        Vec<N> v;
        for (int i = 0; i < N; ++i) v[i] = coord();
        return v;
    };
    cfg.c1 = vec();
    cfg.c2 = vec();
    cfg.a = testutil::uniform(g, 0.5, 5.0);
    while (static_cast<int>(cfg.points.size()) < n_points) {
        Vec<N> z = vec();
        if (norm(z - cfg.c1) > 1e-2 && norm(z - cfg.c2) > 1e-2)
            cfg.points.push_back(z);
    }
    return cfg;
}

}  // namespace

TEST_CASE("eval_geometric on worked examples", "[objectives]") {
    const std::vector<Vec2> on{{0, 1}};
    const auto e = eval_geometric<2>(on, {-1, 0}, {1, 0}, std::sqrt(2.0));
    CHECK(e.value == Approx(0.0).margin(1e-15));
    CHECK(e.grad_a == Approx(0.0).margin(1e-12));

    const std::vector<Vec2> origin{{0, 0}};
    const auto e2 = eval_geometric<2>(origin, {-1, 0}, {1, 0}, std::sqrt(2.0));
    CHECK(e2.value == Approx(0.68629150101524).epsilon(1e-10));
    CHECK(e2.diagnostics.size() == 1);
    CHECK(e2.diagnostics[0].residual == Approx(2.0 - 2.0 * std::sqrt(2.0)));
}

TEST_CASE("eval_geometric rejects focus-coincident points", "[objectives]") {
    const std::vector<Vec2> pts{{1, 0}};
    CHECK_THROWS_AS(eval_geometric<2>(pts, {-1, 0}, {1, 0}, 1.5), std::domain_error);
    CHECK_THROWS_AS(eval_geometric<2>({}, {-1, 0}, {1, 0}, 1.5),
                    std::invalid_argument);
}

TEST_CASE("geometric gradient matches finite differences", "[objectives]") {
    auto g = std::mt19937_64(11001);
    for (int trial = 0; trial < 100; ++trial) {
        auto cfg = random_config<2>(g, 10);
        const auto e = eval_geometric<2>(cfg.points, cfg.c1, cfg.c2, cfg.a);
        auto fd = fd_gradient<2>(
            [&](Vec2 a, Vec2 b, double s) {
                return eval_geometric<2>(cfg.points, a, b, s);
            },
            cfg.c1, cfg.c2, cfg.a);
        CHECK(rel_vec_err(packed_gradient(e), fd) < 1e-6);
    }
    for (int trial = 0; trial < 100; ++trial) {
        auto cfg = random_config<3>(g, 10);
        const auto e = eval_geometric<3>(cfg.points, cfg.c1, cfg.c2, cfg.a);
        auto fd = fd_gradient<3>(
            [&](Vec3 a, Vec3 b, double s) {
                return eval_geometric<3>(cfg.points, a, b, s);
            },
            cfg.c1, cfg.c2, cfg.a);
        CHECK(rel_vec_err(packed_gradient(e), fd) < 1e-6);
    }
}

TEST_CASE("eval_penalized on worked examples", "[objectives]") {
    auto g = std::mt19937_64(11002);
    auto cfg = random_config<2>(g, 8);

    const auto plain = eval_geometric<2>(cfg.points, cfg.c1, cfg.c2, cfg.a);
    const auto zero =
        eval_penalized<2>(cfg.points, cfg.c1, cfg.c2, cfg.a, 0.0, 3.0, 1.0);
    CHECK(zero.value == plain.value);
    CHECK(zero.grad_a == plain.grad_a);
    CHECK(zero.penalty == 0.0);

    // a = a_max_hat, sigma_hat = 1, lambda = 1: penalty term is a_max_hat * e.
    const double amax = cfg.a;
    const auto at_amax =
        eval_penalized<2>(cfg.points, cfg.c1, cfg.c2, cfg.a, 1.0, amax, 1.0);
    CHECK(at_amax.penalty == Approx(amax * std::exp(1.0)).epsilon(1e-12));
    CHECK(at_amax.value == Approx(plain.value + amax * std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("penalized gradient matches finite differences", "[objectives]") {
    auto g = std::mt19937_64(11003);
    for (int trial = 0; trial < 100; ++trial) {
        auto cfg = random_config<2>(g, 8);
        const double lambda = testutil::uniform(g, 0.0, 1.0);
        const double amax = testutil::uniform(g, 1.0, 5.0);
        const double sigma = testutil::uniform(g, 0.0, 2.0);
        const auto e = eval_penalized<2>(cfg.points, cfg.c1, cfg.c2, cfg.a, lambda,
                                         amax, sigma);
        auto fd = fd_gradient<2>(
            [&](Vec2 a, Vec2 b, double s) {
                return eval_penalized<2>(cfg.points, a, b, s, lambda, amax, sigma);
            },
            cfg.c1, cfg.c2, cfg.a);
        CHECK(rel_vec_err(packed_gradient(e), fd) < 1e-6);
    }
    for (int trial = 0; trial < 30; ++trial) {
        auto cfg = random_config<3>(g, 8);
        const double lambda = testutil::uniform(g, 0.0, 1.0);
        const double amax = testutil::uniform(g, 1.0, 5.0);
        const double sigma = testutil::uniform(g, 0.0, 2.0);
        const auto e = eval_penalized<3>(cfg.points, cfg.c1, cfg.c2, cfg.a, lambda,
                                         amax, sigma);
        auto fd = fd_gradient<3>(
            [&](Vec3 a, Vec3 b, double s) {
                return eval_penalized<3>(cfg.points, a, b, s, lambda, amax, sigma);
            },
            cfg.c1, cfg.c2, cfg.a);
        CHECK(rel_vec_err(packed_gradient(e), fd) < 1e-6);
    }
}

TEST_CASE("compute_weights on worked examples", "[objectives]") {
    const std::vector<Vec2> pts{{0, 1}, {0, -2}, {3, 3}};
    const auto unit = compute_weights<2>(pts, {-1, 0}, {1, 0}, 1.5, 0.0);
    for (double w : unit.weights) CHECK(w == 1.0);

    // cos zeta = 0 at (0,1) with foci (±1,0): weight 1 for any beta.
    const auto w1 = compute_weights<2>(pts, {-1, 0}, {1, 0}, 1.5, 1.0);
    CHECK(w1.weights[0] == Approx(1.0));

    // beta=0.5 with zero angle (coincident foci): w = 1/1.5.
    const auto w2 = compute_weights<2>(pts, {1, 1}, {1, 1}, 1.5, 0.5);
    CHECK(w2.weights[0] == Approx(2.0 / 3.0));

    // Collinear-between point has cos zeta -> -1; the clamp keeps beta=1 finite.
    const std::vector<Vec2> between{{0.0, 0.0}};
    const auto w3 = compute_weights<2>(between, {-1, 0}, {1, 0}, 1.0, 1.0);
    CHECK(std::isfinite(w3.weights[0]));
    CHECK(w3.weights[0] == Approx(1e9).epsilon(1e-6));

    CHECK_THROWS_AS(compute_weights<2>(pts, {-1, 0}, {1, 0}, 1.5, 1.5),
                    std::invalid_argument);
}

TEST_CASE("eval_weighted equals eval_geometric for unit weights", "[objectives]") {
    auto g = std::mt19937_64(11004);
    for (int trial = 0; trial < 20; ++trial) {
        auto cfg = random_config<2>(g, 12);
        const auto ws = compute_weights<2>(cfg.points, cfg.c1, cfg.c2, cfg.a, 0.0);
        const auto bw = eval_weighted<2>(cfg.points, cfg.c1, cfg.c2, cfg.a, ws);
        const auto bg = eval_geometric<2>(cfg.points, cfg.c1, cfg.c2, cfg.a);
        CHECK(bw.value == Approx(bg.value).epsilon(1e-14));
        CHECK(bw.grad_a == Approx(bg.grad_a).epsilon(1e-14).margin(1e-300));
        for (int i = 0; i < 2; ++i) {
            CHECK(bw.grad_c1[i] == bg.grad_c1[i]);
            CHECK(bw.grad_c2[i] == bg.grad_c2[i]);
        }
    }
}

TEST_CASE("weighted gradient matches finite differences", "[objectives]") {
    auto g = std::mt19937_64(11005);
    for (int trial = 0; trial < 100; ++trial) {
        auto cfg = random_config<2>(g, 10);
        const double beta = testutil::uniform(g, 0.0, 1.0);
        const auto ws = compute_weights<2>(cfg.points, cfg.c1, cfg.c2, cfg.a, beta);
        const auto e = eval_weighted<2>(cfg.points, cfg.c1, cfg.c2, cfg.a, ws);
        auto fd = fd_gradient<2>(
            [&](Vec2 a, Vec2 b, double s) {
                return eval_weighted<2>(cfg.points, a, b, s, ws);
            },
            cfg.c1, cfg.c2, cfg.a);
        CHECK(rel_vec_err(packed_gradient(e), fd) < 1e-6);
    }
    for (int trial = 0; trial < 30; ++trial) {
        auto cfg = random_config<3>(g, 10);
        const double beta = testutil::uniform(g, 0.0, 1.0);
        const auto ws = compute_weights<3>(cfg.points, cfg.c1, cfg.c2, cfg.a, beta);
        const auto e = eval_weighted<3>(cfg.points, cfg.c1, cfg.c2, cfg.a, ws);
        auto fd = fd_gradient<3>(
            [&](Vec3 a, Vec3 b, double s) {
                return eval_weighted<3>(cfg.points, a, b, s, ws);
            },
            cfg.c1, cfg.c2, cfg.a);
        CHECK(rel_vec_err(packed_gradient(e), fd) < 1e-6);
    }

    auto cfg = random_config<2>(g, 10);
    WeightSet bad{{1.0, 2.0}, 0.5};
    CHECK_THROWS_AS(eval_weighted<2>(cfg.points, cfg.c1, cfg.c2, cfg.a, bad),
                    std::invalid_argument);
}

TEST_CASE("objective value is rigid-motion invariant", "[objectives]") {
    auto g = std::mt19937_64(11006);
    for (int trial = 0; trial < 50; ++trial) {
        auto cfg = random_config<2>(g, 15);
        const auto m = testutil::random_rigid2(g);
        std::vector<Vec2> moved;
        for (const auto& z : cfg.points) moved.push_back(m.apply(z));
        const auto base = eval_geometric<2>(cfg.points, cfg.c1, cfg.c2, cfg.a);
        const auto after =
            eval_geometric<2>(moved, m.apply(cfg.c1), m.apply(cfg.c2), cfg.a);
        CHECK(std::abs(base.value - after.value) <
              1e-10 * std::max(1.0, base.value));
    }
}

TEST_CASE("objective vanishes exactly on the ellipse", "[objectives]") {
    auto g = std::mt19937_64(11007);
    const auto e = testutil::random_ellipse(g);
    const auto f = canonical_to_foci(e);
    std::vector<Vec2> pts;
    for (int i = 0; i < 40; ++i)
        pts.push_back(testutil::ellipse_point(e, testutil::uniform(g, 0, 2 * kPi)));
    const auto on = eval_geometric<2>(pts, f.c1, f.c2, f.a);
    CHECK(on.value < 1e-20);

    // Any off-curve point makes it strictly positive.
    pts.push_back(e.center);
    const auto off = eval_geometric<2>(pts, f.c1, f.c2, f.a);
    CHECK(off.value > 1e-6);

    // value equals the mean of the recorded per-point contributions.
    double mean = 0.0;
    for (const auto& d : off.diagnostics) mean += d.contribution;
    mean /= static_cast<double>(off.diagnostics.size());
    CHECK(off.value == Approx(mean).epsilon(1e-12));
}

TEST_CASE("geometric objective has a minimum escape route at infinity",
          "[objectives]") {
    // High-noise sample of the 5x3 ellipse: the objective at a huge,
    // far-foci configuration drops below its value at the true parameters.
    auto g = std::mt19937_64(11008);
    const CanonicalEllipse truth{{0, 0}, 5.0, 3.0, 0.0};
    const auto f = canonical_to_foci(truth);
    std::normal_distribution<double> noise(0.0, std::sqrt(0.5));
    std::vector<Vec2> pts;
    for (int i = 0; i < 50; ++i) {
        auto z = testutil::ellipse_point(truth, testutil::uniform(g, 0, 2 * kPi));
        pts.push_back({z[0] + noise(g), z[1] + noise(g)});
    }
    const double at_truth = eval_geometric<2>(pts, f.c1, f.c2, f.a).value;

    const double t = 1e4;
    const Vec2 far1{-t, 0.0}, far2{t, 0.0};
    double a_far = 0.0;
    for (const auto& z : pts) a_far += norm(z - far1) + norm(z - far2);
    a_far /= 2.0 * static_cast<double>(pts.size());
    const double at_infinity = eval_geometric<2>(pts, far1, far2, a_far).value;

    CHECK(at_infinity < at_truth);
    CHECK(at_infinity < 1e-4);
}
