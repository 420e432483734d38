#include "oracles.hpp"

#include "scicoe/error.hpp"
#include "scicoe/geometry.hpp"
#include "scicoe/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace scicoe;
using std::numbers::pi;

namespace {

std::vector<Vec> random_points(Rng& rng, std::size_t n, std::size_t d, double scale = 1.0) {
    std::vector<Vec> pts(n, Vec(d));
    for (auto& p : pts)
        for (auto& x : p) x = scale * rng.normal();
    return pts;
}

double wrap(double a) {
    return std::remainder(a, 2.0 * pi);
}

}  // namespace

TEST_CASE("kmeans examples") {
    const std::vector<Vec> two{{0, 0}, {2, 0}};
    auto c = kmeans(two, 1, 1);
    CHECK(c.centers[0] == Vec{1, 0});
    CHECK(c.distances == std::vector<double>{1, 1});

    const std::vector<Vec> four{{0, 0}, {0, 1}, {10, 0}, {10, 1}};
    c = kmeans(four, 2, 3);
    CHECK(c.assignment[0] == c.assignment[1]);
    CHECK(c.assignment[2] == c.assignment[3]);
    CHECK(c.assignment[0] != c.assignment[2]);
    CHECK(c.centers[c.assignment[0]] == Vec{0, 0.5});
    CHECK(c.centers[c.assignment[2]] == Vec{10, 0.5});

    const std::vector<Vec> one{{3, 4}};
    c = kmeans(one, 1, 0);
    CHECK(c.centers[0] == Vec{3, 4});
    CHECK(c.distances[0] == 0.0);
}

TEST_CASE("kmeans rejects too few distinct points") {
    const std::vector<Vec> same{{1, 1}, {1, 1}, {1, 1}};
    CHECK_THROWS_AS(kmeans(same, 2, 0), Error);
    try {
        kmeans(same, 2, 0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateClustering);
    }
    CHECK_NOTHROW(kmeans(same, 1, 0));
}

TEST_CASE("kmeans SSE trace is non-increasing and matches exhaustive search") {
    Rng rng(21);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t n = 2 + rng.below(7);
        const std::size_t k = 1 + rng.below(std::min<std::size_t>(3, n));
        const auto pts = random_points(rng, n, 2 + rng.below(3));
        const auto c = kmeans(pts, k, trial);
        for (std::size_t t = 1; t < c.sse_trace.size(); ++t) CHECK(c.sse_trace[t] <= c.sse_trace[t - 1] + 1e-12);
        const auto best = oracle::best_partition(pts, static_cast<int>(k));
        CHECK(clustering_sse(pts, c) == doctest::Approx(best.sse).epsilon(1e-9));
    }
}

TEST_CASE("kmeans is deterministic for a seed") {
    Rng rng(4);
    const auto pts = random_points(rng, 20, 5);
    const auto a = kmeans(pts, 3, 99), b = kmeans(pts, 3, 99);
    CHECK(a.assignment == b.assignment);
    CHECK(a.centers == b.centers);
}

TEST_CASE("pca hand example") {
    const std::vector<Vec> pts{{1, 0}, {-1, 0}, {0, 2}, {0, -2}};
    const auto p = pca_project_2d(pts);
    CHECK(p.lambda1 == doctest::Approx(2.0));
    CHECK(p.lambda2 == doctest::Approx(0.5));
    const std::vector<Point2> want{{0, 1}, {0, -1}, {2, 0}, {-2, 0}};
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(p.coords[j][0] == doctest::Approx(want[j][0]));
        CHECK(p.coords[j][1] == doctest::Approx(want[j][1]));
    }
}

TEST_CASE("pca of rank-one data zeroes the second coordinate") {
    const std::vector<Vec> pts{{1, 0, 0}, {-1, 0, 0}, {3, 0, 0}};
    const auto p = pca_project_2d(pts);
    for (const auto& c : p.coords) CHECK(c[1] == 0.0);
    CHECK(std::abs(p.coords[2][0]) == doctest::Approx(3.0));
}

TEST_CASE("pca of identical vectors is flagged") {
    const std::vector<Vec> pts{{0.5, 0.5}, {0.5, 0.5}};
    const auto p = pca_project_2d(pts);
    CHECK(p.zero_variance);
    for (const auto& c : p.coords) CHECK((c[0] == 0.0 && c[1] == 0.0));
}

TEST_CASE("pca preserves distances of 2D inputs") {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        auto pts = random_points(rng, 2 + rng.below(8), 2, 3.0);
        Vec mean(2, 0.0);
        for (const auto& p : pts)
            for (int t = 0; t < 2; ++t) mean[t] += p[t] / pts.size();
        for (auto& p : pts)
            for (int t = 0; t < 2; ++t) p[t] -= mean[t];
        const auto proj = pca_project_2d(pts);
        for (std::size_t a = 0; a < pts.size(); ++a)
            for (std::size_t b = 0; b < pts.size(); ++b) {
                const double want = std::sqrt(squared_distance(pts[a], pts[b]));
                const double got = std::hypot(proj.coords[a][0] - proj.coords[b][0], proj.coords[a][1] - proj.coords[b][1]);
                CHECK(std::abs(got - want) <= 1e-10);
            }
    }
}

TEST_CASE("polar angle examples") {
    const std::vector<Point2> pts{{1, 0}, {0, 1}, {-1, -1}, {0, 0}};
    std::vector<bool> origin;
    const auto th = polar_angles(pts, &origin);
    CHECK(th[0] == 0.0);
    CHECK(th[1] == doctest::Approx(pi / 2));
    CHECK(th[2] == doctest::Approx(-3 * pi / 4));
    CHECK(th[3] == 0.0);
    CHECK(origin == std::vector<bool>{false, false, false, true});
}

TEST_CASE("polar angles rotate with their points") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const double phi = 2 * pi * rng.uniform();
        std::vector<Point2> pts, rot;
        for (int j = 0; j < 6; ++j) {
            const Point2 p{rng.normal(), rng.normal()};
            pts.push_back(p);
            rot.push_back({std::cos(phi) * p[0] - std::sin(phi) * p[1], std::sin(phi) * p[0] + std::cos(phi) * p[1]});
        }
        const auto a = polar_angles(pts), b = polar_angles(rot);
        for (int j = 0; j < 6; ++j) CHECK(std::abs(wrap(b[j] - a[j] - phi)) <= 1e-10);
    }
}

TEST_CASE("circular dispersion examples") {
    const std::vector<double> same{0.3, 0.3, 0.3};
    CHECK(circular_dispersion(same) == doctest::Approx(0.0));
    const std::vector<double> opposite{0.0, pi};
    CHECK(circular_dispersion(opposite) == doctest::Approx(1.0));
    const std::vector<double> quarter{0.0, pi / 2};
    CHECK(circular_dispersion(quarter) == doctest::Approx(1.0 - std::sqrt(2.0) / 2));
    CHECK_THROWS_AS(circular_dispersion(std::vector<double>{}), Error);
}

TEST_CASE("polar projection per cluster and global") {
    Rng rng(30);
    const auto pts = random_points(rng, 9, 4);
    const auto c = kmeans(pts, 2, 5);
    for (bool per : {true, false}) {
        const auto p = polar_projection(pts, c, per);
        REQUIRE(p.theta.size() == pts.size());
        for (std::size_t j = 0; j < pts.size(); ++j) {
            for (std::size_t t = 0; t < 4; ++t) CHECK(p.centered[j][t] == pts[j][t] - c.centers[c.assignment[j]][t]);
            CHECK(std::abs(p.theta[j]) <= pi);
        }
    }
}

TEST_CASE("embedding validation") {
    const std::vector<Vec> ragged{{1, 2}, {1, 2, 3}};
    CHECK_THROWS_AS(validate_embeddings(ragged), Error);
    const std::vector<Vec> flat{{1}};
    CHECK_THROWS_AS(validate_embeddings(flat), Error);
    const std::vector<Vec> bad{{1, NAN}};
    CHECK_THROWS_AS(validate_embeddings(bad), Error);
}
