#pragma once
// Latent-space machinery for strategy embeddings: k-means, 2D PCA,
// polar angles and angular statistics.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace scicoe {

using Vec = std::vector<double>;
using Point2 = std::array<double, 2>;

struct StrategyEmbedding {
    std::size_t j = 0;
    Vec z;
};

struct Clustering {
    std::size_t k = 0;
    std::vector<Vec> centers;
    std::vector<std::size_t> assignment;
    std::vector<double> distances;
    /// Within-cluster SSE after each assignment step, for diagnostics.
    std::vector<double> sse_trace;
    std::size_t iterations = 0;
};

/// Checks shared dimension d >= 2 and finite coordinates.
void validate_embeddings(std::span<const Vec> points);

double squared_distance(const Vec& a, const Vec& b);

/// Within-cluster sum of squared distances to the given centers.
double clustering_sse(std::span<const Vec> points, const Clustering& c);

/// Lloyd iterations from seeded k-means++ starts; the restart with the
/// lowest final SSE is kept (a single start when k = 1).
Clustering kmeans(std::span<const Vec> points, std::size_t k, std::uint64_t seed,
                  std::size_t max_iters = 100, double tol = 1e-12, std::size_t n_init = 30);

struct Projection2D {
    std::vector<Point2> coords;
    Vec axis1;
    Vec axis2;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    bool zero_variance = false;
};

/// Coordinates of the given vectors along the top two principal axes of
/// their scatter matrix. The vectors are expected to be centered already
/// and are not re-centered.
Projection2D pca_project_2d(std::span<const Vec> centered);

/// atan2(y, x) per point; the origin maps to 0 and is flagged when
/// at_origin is given.
std::vector<double> polar_angles(std::span<const Point2> coords, std::vector<bool>* at_origin = nullptr);

/// 1 minus the length of the mean unit vector.
double circular_dispersion(std::span<const double> angles);

struct PolarProjection {
    std::vector<Vec> centered;
    std::vector<Point2> coords;
    std::vector<double> theta;
    std::vector<bool> at_origin;
    /// Per cluster: the cluster's centered vectors had no spread.
    std::vector<bool> zero_variance;
};

/// Centers each point on its cluster center, projects with PCA (fit per
/// cluster or once over all centered vectors) and takes polar angles.
PolarProjection polar_projection(std::span<const Vec> points, const Clustering& clustering, bool per_cluster = true);

}  // namespace scicoe
