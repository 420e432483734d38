#include "scicoe/geometry.hpp"

#include "scicoe/error.hpp"
#include "scicoe/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace scicoe {

void validate_embeddings(std::span<const Vec> points) {
    if (points.empty()) {
        throw Error(ErrorCode::EmptyBatch, "no embeddings");
    }
    const std::size_t d = points.front().size();
    if (d < 2) {
        throw Error(ErrorCode::DimensionMismatch, "embedding dimension must be at least 2");
    }
    for (const auto& p : points) {
        if (p.size() != d) {
            throw Error(ErrorCode::DimensionMismatch, "embeddings differ in dimension");
        }
        for (double x : p) {
            if (!std::isfinite(x)) {
                throw Error(ErrorCode::DomainError, "non-finite embedding coordinate");
            }
        }
    }
}

double squared_distance(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double diff = a[t] - b[t];
        s += diff * diff;
    }
    return s;
}

double clustering_sse(std::span<const Vec> points, const Clustering& c) {
    double s = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j) {
        s += squared_distance(points[j], c.centers[c.assignment[j]]);
    }
    return s;
}

namespace {

std::size_t count_distinct(std::span<const Vec> points, std::size_t stop_at) {
    std::vector<const Vec*> seen;
    for (const auto& p : points) {
        bool dup = false;
        for (const Vec* q : seen) {
            if (*q == p) {
                dup = true;
                break;
            }
        }
        if (!dup) {
            seen.push_back(&p);
            if (seen.size() >= stop_at) {
                break;
            }
        }
    }
    return seen.size();
}

std::size_t nearest_center(const Vec& p, const std::vector<Vec>& centers, double* best_d2) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d2 = squared_distance(p, centers[c]);
        if (d2 < bd) {
            bd = d2;
            best = c;
        }
    }
    if (best_d2) {
        *best_d2 = bd;
    }
    return best;
}

std::vector<Vec> kmeanspp_init(std::span<const Vec> points, std::size_t k, Rng& rng) {
    std::vector<Vec> centers;
    centers.push_back(points[rng.below(points.size())]);
    std::vector<double> d2(points.size());
    while (centers.size() < k) {
        for (std::size_t j = 0; j < points.size(); ++j) {
            nearest_center(points[j], centers, &d2[j]);
        }
        centers.push_back(points[rng.categorical(d2)]);
    }
    return centers;
}

// Mean of the members of cluster q, accumulated as offsets from the first
// member so that identical points average to exactly that point. Empty
// clusters give an empty vector.
Vec cluster_mean(std::span<const Vec> points, const std::vector<std::size_t>& assignment, std::size_t q) {
    const Vec* anchor = nullptr;
    Vec acc;
    std::size_t count = 0;
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (assignment[j] != q) {
            continue;
        }
        if (!anchor) {
            anchor = &points[j];
            acc.assign(anchor->size(), 0.0);
        }
        for (std::size_t t = 0; t < acc.size(); ++t) {
            acc[t] += points[j][t] - (*anchor)[t];
        }
        ++count;
    }
    if (!anchor) {
        return {};
    }
    for (std::size_t t = 0; t < acc.size(); ++t) {
        acc[t] = (*anchor)[t] + acc[t] / static_cast<double>(count);
    }
    return acc;
}

Clustering lloyd(std::span<const Vec> points, std::vector<Vec> centers, std::size_t max_iters, double tol) {
    const std::size_t n = points.size();
    Clustering c;
    c.k = centers.size();
    c.assignment.assign(n, 0);
    for (std::size_t it = 0; it < std::max<std::size_t>(max_iters, 1); ++it) {
        double sse = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double d2 = 0.0;
            c.assignment[j] = nearest_center(points[j], centers, &d2);
            sse += d2;
        }
        c.sse_trace.push_back(sse);
        ++c.iterations;

        std::vector<Vec> next(c.k);
        double shift = 0.0;
        for (std::size_t q = 0; q < c.k; ++q) {
            next[q] = cluster_mean(points, c.assignment, q);
            if (next[q].empty()) {
                next[q] = centers[q];  // empty cluster keeps its center
            }
            shift = std::max(shift, std::sqrt(squared_distance(next[q], centers[q])));
        }
        centers = std::move(next);
        if (shift < tol) {
            break;
        }
    }
    c.centers = std::move(centers);
    c.distances.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        c.distances[j] = std::sqrt(squared_distance(points[j], c.centers[c.assignment[j]]));
    }
    return c;
}

// Hartigan single-point transfers: move a point to another cluster whenever
// that strictly lowers the SSE, then continue until no move helps. Every
// Lloyd fixed point that admits such a move is left behind.
void transfer_refine(std::span<const Vec> points, Clustering& c) {
    const std::size_t n = points.size();
    std::vector<std::size_t> counts(c.k, 0);
    for (auto a : c.assignment) {
        ++counts[a];
    }
    auto recenter = [&](std::size_t q) {
        if (counts[q] > 0) {
            c.centers[q] = cluster_mean(points, c.assignment, q);
        }
    };
    for (std::size_t q = 0; q < c.k; ++q) {
        recenter(q);
    }
    for (std::size_t pass = 0; pass < 100; ++pass) {
        bool moved = false;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t from = c.assignment[j];
            if (counts[from] < 2) {
                continue;
            }
            const double nf = static_cast<double>(counts[from]);
            const double leave = nf / (nf - 1.0) * squared_distance(points[j], c.centers[from]);
            std::size_t to = from;
            double best_gain = 0.0;
            for (std::size_t q = 0; q < c.k; ++q) {
                if (q == from) {
                    continue;
                }
                const double nq = static_cast<double>(counts[q]);
                const double join = nq / (nq + 1.0) * squared_distance(points[j], c.centers[q]);
                const double gain = leave - join;
                if (gain > best_gain * (1.0 + 1e-12) + 1e-15 * leave) {
                    best_gain = gain;
                    to = q;
                }
            }
            if (to != from) {
                c.assignment[j] = to;
                --counts[from];
                ++counts[to];
                recenter(from);
                recenter(to);
                c.sse_trace.push_back(clustering_sse(points, c));
                moved = true;
            }
        }
        if (!moved) {
            break;
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        c.distances[j] = std::sqrt(squared_distance(points[j], c.centers[c.assignment[j]]));
    }
}

}  // namespace

Clustering kmeans(std::span<const Vec> points, std::size_t k, std::uint64_t seed, std::size_t max_iters, double tol,
                  std::size_t n_init) {
    validate_embeddings(points);
    if (k == 0) {
        throw Error(ErrorCode::ConfigError, "k must be at least 1");
    }
    if (count_distinct(points, k) < k) {
        throw Error(ErrorCode::DegenerateClustering,
                    "fewer than " + std::to_string(k) + " distinct points for k-means");
    }
    const std::size_t restarts = k == 1 ? 1 : std::max<std::size_t>(n_init, 1);
    Clustering best;
    double best_sse = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < restarts; ++r) {
        Rng rng(hash_keys({seed, r}));
        Clustering c = lloyd(points, kmeanspp_init(points, k, rng), max_iters, tol);
        if (k > 1) {
            transfer_refine(points, c);
        }
        const double sse = clustering_sse(points, c);
        if (sse < best_sse) {
            best_sse = sse;
            best = std::move(c);
        }
    }
    return best;
}

Projection2D pca_project_2d(std::span<const Vec> centered) {
    if (centered.empty()) {
        throw Error(ErrorCode::EmptyBatch, "PCA needs at least one vector");
    }
    const std::size_t d = centered.front().size();
    if (d < 2) {
        throw Error(ErrorCode::DimensionMismatch, "PCA needs dimension at least 2");
    }
    const std::size_t n = centered.size();
    Projection2D out;
    out.coords.assign(n, Point2{0.0, 0.0});
    out.axis1.assign(d, 0.0);
    out.axis2.assign(d, 0.0);

    bool identical = true;
    for (const auto& v : centered) {
        if (v.size() != d) {
            throw Error(ErrorCode::DimensionMismatch, "PCA vectors differ in dimension");
        }
        if (v != centered.front()) {
            identical = false;
        }
    }
    if (identical) {
        out.zero_variance = true;
        return out;
    }

    Eigen::MatrixXd x(n, d);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t t = 0; t < d; ++t) {
            x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t)) = centered[j][t];
        }
    }
    const Eigen::MatrixXd scatter = (x.transpose() * x) / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scatter);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorCode::DomainError, "eigen-decomposition failed");
    }
    // eigenvalues ascending
    const auto last = static_cast<Eigen::Index>(d) - 1;
    out.lambda1 = std::max(es.eigenvalues()(last), 0.0);
    out.lambda2 = std::max(es.eigenvalues()(last - 1), 0.0);
    if (out.lambda1 <= 0.0) {
        out.zero_variance = true;
        return out;
    }

    auto oriented = [&](Eigen::Index col) {
        Eigen::VectorXd v = es.eigenvectors().col(col);
        Eigen::Index arg = 0;
        for (Eigen::Index t = 1; t < v.size(); ++t) {
            if (std::abs(v(t)) > std::abs(v(arg))) {
                arg = t;
            }
        }
        if (v(arg) < 0.0) {
            v = -v;
        }
        return Vec(v.data(), v.data() + v.size());
    };
    out.axis1 = oriented(last);
    const bool rank_one = out.lambda2 <= 1e-12 * out.lambda1;
    if (!rank_one) {
        out.axis2 = oriented(last - 1);
    }
    for (std::size_t j = 0; j < n; ++j) {
        double a = 0.0;
        double b = 0.0;
        for (std::size_t t = 0; t < d; ++t) {
            a += centered[j][t] * out.axis1[t];
            b += centered[j][t] * out.axis2[t];
        }
        out.coords[j] = {a, rank_one ? 0.0 : b};
    }
    return out;
}

std::vector<double> polar_angles(std::span<const Point2> coords, std::vector<bool>* at_origin) {
    std::vector<double> theta(coords.size(), 0.0);
    if (at_origin) {
        at_origin->assign(coords.size(), false);
    }
    for (std::size_t j = 0; j < coords.size(); ++j) {
        const auto [x, y] = coords[j];
        if (x == 0.0 && y == 0.0) {
            if (at_origin) {
                (*at_origin)[j] = true;
            }
            continue;
        }
        theta[j] = std::atan2(y, x);
    }
    return theta;
}

double circular_dispersion(std::span<const double> angles) {
    if (angles.empty()) {
        throw Error(ErrorCode::EmptyBatch, "dispersion of an empty angle set");
    }
    double c = 0.0;
    double s = 0.0;
    for (double a : angles) {
        c += std::cos(a);
        s += std::sin(a);
    }
    const double n = static_cast<double>(angles.size());
    const double r = std::hypot(c / n, s / n);
    return std::clamp(1.0 - r, 0.0, 1.0);
}

PolarProjection polar_projection(std::span<const Vec> points, const Clustering& clustering, bool per_cluster) {
    const std::size_t n = points.size();
    if (clustering.assignment.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "clustering does not match the embedding batch");
    }
    PolarProjection out;
    out.centered.resize(n);
    out.coords.assign(n, Point2{0.0, 0.0});
    out.zero_variance.assign(clustering.k, false);
    for (std::size_t j = 0; j < n; ++j) {
        const Vec& mu = clustering.centers[clustering.assignment[j]];
        out.centered[j].resize(points[j].size());
        for (std::size_t t = 0; t < points[j].size(); ++t) {
            out.centered[j][t] = points[j][t] - mu[t];
        }
    }
    if (per_cluster) {
        for (std::size_t c = 0; c < clustering.k; ++c) {
            std::vector<std::size_t> members;
            std::vector<Vec> group;
            for (std::size_t j = 0; j < n; ++j) {
                if (clustering.assignment[j] == c) {
                    members.push_back(j);
                    group.push_back(out.centered[j]);
                }
            }
            if (group.empty()) {
                continue;
            }
            const auto proj = pca_project_2d(group);
            out.zero_variance[c] = proj.zero_variance;
            for (std::size_t t = 0; t < members.size(); ++t) {
                out.coords[members[t]] = proj.coords[t];
            }
        }
    } else {
        const auto proj = pca_project_2d(out.centered);
        out.coords = proj.coords;
        if (proj.zero_variance) {
            out.zero_variance.assign(clustering.k, true);
        }
    }
    out.theta = polar_angles(out.coords, &out.at_origin);
    return out;
}

}  // namespace scicoe
