#pragma once
// Independent reference evaluators used by the tests. They share no code
// with the library: sets are handled as bit masks, eigenvectors come from a
// cyclic Jacobi sweep, angular terms from normalized inner products, and
// clusterings from exhaustive enumeration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;  // row-major, rows = solutions
using Pts = std::vector<std::vector<double>>;

// Anchored verifier reward; an empty S+ or an empty S- gives 0.
inline double anchored(const std::vector<std::vector<int>>& e, const std::vector<int>& pos_mask, int j) {
    int n_pos = 0, n_neg = 0, pos_pass = 0, neg_reject = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (pos_mask[i]) {
            ++n_pos;
            pos_pass += e[i][j];
        } else {
            ++n_neg;
            neg_reject += e[i][j] == 0;
        }
    }
    if (n_pos == 0 || n_neg == 0) return 0.0;
    const double sign = pos_pass == n_pos ? 1.0 : -1.0;
    return sign * neg_reject / n_neg;
}

inline double pass_fraction(const std::vector<int>& row) {
    int s = 0;
    for (int x : row) s += x;
    return static_cast<double>(s) / row.size();
}

// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns
// eigenvalues and column eigenvectors (vecs[r][c] is component r of vector c).
inline void jacobi_eigen(Mat a, std::vector<double>& vals, Mat& vecs) {
    const std::size_t n = a.size();
    vecs.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) vecs[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-300) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = vecs[k][p], vkq = vecs[k][q];
                    vecs[k][p] = c * vkp - s * vkq;
                    vecs[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    vals.resize(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = a[i][i];
}

// Projection of each vector onto the span of the top two eigenvectors of
// the (uncentered) scatter matrix, expressed in the original coordinates.
inline Pts project_top2(const Pts& u) {
    const std::size_t d = u.front().size();
    Mat s(d, std::vector<double>(d, 0.0));
    for (const auto& v : u)
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) s[a][b] += v[a] * v[b] / u.size();
    std::vector<double> vals;
    Mat vecs;
    jacobi_eigen(s, vals, vecs);
    std::vector<std::size_t> idx(d);
    for (std::size_t i = 0; i < d; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return vals[x] > vals[y]; });
    const double l1 = std::max(vals[idx[0]], 0.0);
    const double l2 = std::max(vals[idx[1]], 0.0);
    const int keep = l2 <= 1e-12 * l1 ? 1 : 2;
    Pts out;
    for (const auto& v : u) {
        std::vector<double> p(d, 0.0);
        for (int c = 0; c < keep; ++c) {
            double dot = 0.0;
            for (std::size_t a = 0; a < d; ++a) dot += v[a] * vecs[a][idx[c]];
            for (std::size_t a = 0; a < d; ++a) p[a] += dot * vecs[a][idx[c]];
        }
        out.push_back(p);
    }
    return out;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) s += a[t] * b[t];
    return s;
}

// 1 - cos of the angle between two projected vectors. A vector at the
// origin has angle 0 by convention, i.e. it points along the first axis;
// callers avoid that case.
inline double one_minus_cos(const std::vector<double>& a, const std::vector<double>& b) {
    return 1.0 - dot(a, b) / std::sqrt(dot(a, a) * dot(b, b));
}

struct Partition {
    std::vector<int> label;
    double sse = std::numeric_limits<double>::infinity();
    Pts centers;
};

inline double sse_of(const Pts& z, const std::vector<int>& label, int k, Pts* centers = nullptr) {
    const std::size_t d = z.front().size();
    Pts c(k, std::vector<double>(d, 0.0));
    std::vector<int> cnt(k, 0);
    for (std::size_t j = 0; j < z.size(); ++j) {
        ++cnt[label[j]];
        for (std::size_t t = 0; t < d; ++t) c[label[j]][t] += z[j][t];
    }
    for (int q = 0; q < k; ++q)
        for (auto& x : c[q]) x /= std::max(cnt[q], 1);
    double s = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j)
        for (std::size_t t = 0; t < d; ++t) s += (z[j][t] - c[label[j]][t]) * (z[j][t] - c[label[j]][t]);
    if (centers) *centers = c;
    return s;
}

// Exhaustive search over all assignments into k nonempty clusters.
inline Partition best_partition(const Pts& z, int k) {
    Partition best;
    const std::size_t n = z.size();
    std::vector<int> label(n, 0);
    std::size_t total = 1;
    for (std::size_t j = 0; j < n; ++j) total *= k;
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        std::vector<int> cnt(k, 0);
        for (std::size_t j = 0; j < n; ++j) {
            label[j] = static_cast<int>(c % k);
            c /= k;
            ++cnt[label[j]];
        }
        if (std::count(cnt.begin(), cnt.end(), 0) > 0) continue;
        Pts centers;
        const double s = sse_of(z, label, k, &centers);
        if (s < best.sse) {
            best.sse = s;
            best.label = label;
            best.centers = centers;
        }
    }
    return best;
}

struct Geo {
    std::vector<double> r_rel;
    std::vector<double> r_div;
};

// Reliability and diversity terms for a given clustering.
inline Geo geometric_terms(const Pts& z, const std::vector<int>& label, const Pts& centers, double eps,
                           bool per_cluster = true) {
    const std::size_t m = z.size();
    const int k = static_cast<int>(centers.size());
    Geo g;
    g.r_rel.assign(m, 0.0);
    g.r_div.assign(m, 0.0);
    std::vector<double> dist(m);
    Pts u(m);
    for (std::size_t j = 0; j < m; ++j) {
        u[j].resize(z[j].size());
        for (std::size_t t = 0; t < z[j].size(); ++t) u[j][t] = z[j][t] - centers[label[j]][t];
        dist[j] = std::sqrt(dot(u[j], u[j]));
    }
    Pts global_proj;
    if (!per_cluster) global_proj = project_top2(u);
    for (int c = 0; c < k; ++c) {
        std::vector<std::size_t> mem;
        for (std::size_t j = 0; j < m; ++j)
            if (label[j] == c) mem.push_back(j);
        if (mem.empty()) continue;
        double dmax = 0.0;
        for (auto j : mem) dmax = std::max(dmax, dist[j]);
        for (auto j : mem) g.r_rel[j] = 1.0 - dist[j] / (dmax + eps);
        if (mem.size() < 2) continue;
        Pts group;
        for (auto j : mem) group.push_back(per_cluster ? u[j] : global_proj[j]);
        const Pts proj = per_cluster ? project_top2(group) : group;
        for (std::size_t a = 0; a < mem.size(); ++a) {
            double s = 0.0;
            for (std::size_t b = 0; b < mem.size(); ++b)
                if (a != b) s += one_minus_cos(proj[a], proj[b]);
            g.r_div[mem[a]] = s / (mem.size() - 1);
        }
    }
    return g;
}

}  // namespace oracle
