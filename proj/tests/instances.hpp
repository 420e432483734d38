#pragma once
// Random reward instances checked against the reference evaluators. Shared
// by the unit tests and the acceptance binary.

#include "oracles.hpp"

#include "scicoe/rewards.hpp"
#include "scicoe/rng.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

namespace oracle {

struct InstanceReport {
    double max_error = 0.0;
    std::string worst;  // name of the operation with the largest error
    std::size_t checks = 0;
};

inline void note(InstanceReport& r, const char* what, double got, double want) {
    const double err = std::abs(got - want);
    ++r.checks;
    if (!(err <= r.max_error)) {
        r.max_error = std::isnan(err) ? INFINITY : err;
        r.worst = what;
    }
}

// Builds one random instance from `rng` and compares every reward
// operation with its reference; errors accumulate into `report`.
inline void check_random_instance(scicoe::Rng& rng, std::uint64_t seed, InstanceReport& report) {
    using namespace scicoe;
    const std::size_t n = 1 + rng.below(8);
    const std::size_t m = 1 + rng.below(8);
    const double density = rng.uniform();
    std::vector<std::vector<int>> rows(n, std::vector<int>(m));
    std::vector<std::uint8_t> cells;
    for (auto& row : rows)
        for (auto& x : row) {
            x = rng.bernoulli(density);
            cells.push_back(static_cast<std::uint8_t>(x));
        }
    const EvalMatrix e(n, m, cells);

    // labeled stage
    std::vector<std::uint8_t> labels(n);
    std::vector<int> label_mask(n);
    const double p_correct = rng.uniform();
    for (std::size_t i = 0; i < n; ++i) label_mask[i] = labels[i] = rng.bernoulli(p_correct);
    const auto r_sol = solver_reward_anchored(labels);
    for (std::size_t i = 0; i < n; ++i) note(report, "solver_reward_anchored", r_sol[i], label_mask[i]);
    const auto part = partition_by_label(labels);
    const auto mask = part.positive_mask();
    for (std::size_t i = 0; i < n; ++i) note(report, "partition_by_label", mask[i], label_mask[i]);
    const auto r_anch = verifier_reward_anchored(e, part);
    const bool any_pos = std::count(label_mask.begin(), label_mask.end(), 1) > 0;
    for (std::size_t j = 0; j < m; ++j) {
        note(report, "verifier_reward_anchored", r_anch[j], anchored(rows, label_mask, static_cast<int>(j)));
        if (any_pos) {
            bool all = true;
            for (std::size_t i = 0; i < n; ++i)
                if (label_mask[i] && !rows[i][j]) all = false;
            note(report, "verifier_sign", verifier_sign(e, part, j), all ? 1.0 : -1.0);
        }
    }

    // consensus stage
    const double taus[] = {0.0, 0.25, 0.5, 0.8, 1.0, rng.uniform()};
    RewardConfig cfg;
    cfg.tau = taus[rng.below(6)];
    cfg.alpha = 2.0 * rng.uniform();
    cfg.beta = 2.0 * rng.uniform();
    cfg.gamma = 2.0 * rng.uniform();
    const auto r_cons = solver_reward_consensus(e);
    std::vector<int> cons_mask(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double rate = pass_fraction(rows[i]);
        note(report, "solver_reward_consensus", r_cons[i], rate);
        cons_mask[i] = rate >= cfg.tau;
    }
    const auto cons = high_consensus_partition(e, cfg.tau);
    const auto cmask = cons.positive_mask();
    for (std::size_t i = 0; i < n; ++i) note(report, "high_consensus_partition", cmask[i], cons_mask[i]);

    // embeddings and clustering
    const std::size_t d = 2 + rng.below(7);
    std::vector<Vec> z(m, Vec(d));
    for (auto& v : z)
        for (auto& x : v) x = rng.normal();
    cfg.k = 1 + rng.below(std::min<std::size_t>(3, m));
    const auto best = best_partition(z, static_cast<int>(cfg.k));
    const auto geo = geometric_terms(z, best.label, best.centers, cfg.epsilon);

    const auto res = verifier_reward_geometric(e, cons, z, cfg, seed);
    note(report, "kmeans_sse", clustering_sse(z, res.clustering), best.sse);
    for (std::size_t j = 0; j < m; ++j) {
        const double want_con = anchored(rows, cons_mask, static_cast<int>(j));
        const auto& b = res.per_strategy[j];
        note(report, "r_con", b.r_con, want_con);
        note(report, "r_rel", b.r_rel, geo.r_rel[j]);
        note(report, "r_div", b.r_div, geo.r_div[j]);
        note(report, "r_ver", b.r_ver, cfg.alpha * want_con + cfg.beta * geo.r_rel[j] + cfg.gamma * geo.r_div[j]);
    }

    // the standalone reliability and diversity operations
    const auto rel = reliability_rewards(res.clustering, cfg.epsilon);
    for (std::size_t j = 0; j < m; ++j) {
        double dmax = 0.0;
        for (std::size_t t = 0; t < m; ++t)
            if (res.clustering.assignment[t] == res.clustering.assignment[j])
                dmax = std::max(dmax, res.clustering.distances[t]);
        note(report, "reliability_rewards", rel[j], 1.0 - res.clustering.distances[j] / (dmax + cfg.epsilon));
    }
    std::vector<double> angles(m);
    std::vector<std::size_t> groups(m);
    for (std::size_t j = 0; j < m; ++j) {
        angles[j] = 8.0 * (rng.uniform() - 0.5);
        groups[j] = rng.below(3);
    }
    const auto div = diversity_rewards(angles, groups);
    for (std::size_t j = 0; j < m; ++j) {
        const auto uj = std::polar(1.0, angles[j]);
        double s = 0.0;
        int count = 0;
        for (std::size_t t = 0; t < m; ++t) {
            if (t == j || groups[t] != groups[j]) continue;
            s += 1.0 - (uj * std::conj(std::polar(1.0, angles[t]))).real();
            ++count;
        }
        note(report, "diversity_rewards", div[j], count ? s / count : 0.0);
    }
}

}  // namespace oracle
