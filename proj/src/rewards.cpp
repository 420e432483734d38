#include "scicoe/rewards.hpp"

#include "scicoe/error.hpp"

#include <algorithm>
#include <cmath>

namespace scicoe {

void RewardConfig::validate() const {
    auto bad = [](const char* what) { throw Error(ErrorCode::ConfigError, what); };
    if (!(tau >= 0.0 && tau <= 1.0)) bad("tau must lie in [0,1]");
    if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0)) bad("alpha, beta, gamma must be nonnegative");
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma)) bad("weights must be finite");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) bad("epsilon must be positive");
    if (k < 1) bad("k must be at least 1");
    if (kmeans_max_iters < 1) bad("kmeans_max_iters must be at least 1");
    if (!(kmeans_tol >= 0.0)) bad("kmeans_tol must be nonnegative");
}

std::vector<double> solver_reward_anchored(std::span<const std::uint8_t> labels) {
    std::vector<double> out;
    out.reserve(labels.size());
    for (auto b : labels) {
        if (b > 1) {
            throw Error(ErrorCode::DomainError, "labels must be 0 or 1");
        }
        out.push_back(b);
    }
    return out;
}

CorrectPartition partition_by_label(std::span<const std::uint8_t> labels) {
    CorrectPartition p;
    p.source = PartitionSource::GroundTruth;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 1) {
            throw Error(ErrorCode::DomainError, "labels must be 0 or 1");
        }
        (labels[i] ? p.positive : p.negative).push_back(i);
    }
    return p;
}

void validate_partition(const CorrectPartition& partition, std::size_t n) {
    if (partition.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "partition covers " + std::to_string(partition.size()) +
                                                      " solutions, matrix has " + std::to_string(n));
    }
    std::vector<bool> seen(n, false);
    for (const auto* set : {&partition.positive, &partition.negative}) {
        for (std::size_t i : *set) {
            if (i >= n || seen[i]) {
                throw Error(ErrorCode::DimensionMismatch, "partition is not a split of the solution indices");
            }
            seen[i] = true;
        }
    }
}

int verifier_sign(const EvalMatrix& matrix, const CorrectPartition& partition, std::size_t j) {
    validate_partition(partition, matrix.n_solutions());
    if (partition.positive.empty()) {
        throw Error(ErrorCode::EmptyPositiveSet, "no correct solutions to align with");
    }
    for (std::size_t i : partition.positive) {
        if (matrix.at(i, j) != 1) {
            return -1;
        }
    }
    return 1;
}

std::vector<double> verifier_reward_anchored(const EvalMatrix& matrix, const CorrectPartition& partition) {
    validate_partition(partition, matrix.n_solutions());
    const std::size_t m = matrix.n_strategies();
    std::vector<double> out(m, 0.0);
    if (partition.positive.empty() || partition.negative.empty()) {
        return out;
    }
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t rejected = 0;
        for (std::size_t i : partition.negative) {
            rejected += 1 - matrix.at(i, j);
        }
        const double mag = static_cast<double>(rejected) / static_cast<double>(partition.negative.size());
        out[j] = verifier_sign(matrix, partition, j) * mag;
    }
    return out;
}

std::vector<double> solver_reward_consensus(const EvalMatrix& matrix) { return pass_rates(matrix); }

CorrectPartition high_consensus_partition(const EvalMatrix& matrix, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) {
        throw Error(ErrorCode::ConfigError, "tau must lie in [0,1]");
    }
    CorrectPartition p;
    p.source = PartitionSource::Consensus;
    for (std::size_t i = 0; i < matrix.n_solutions(); ++i) {
        (pass_rate(matrix, i) >= tau ? p.positive : p.negative).push_back(i);
    }
    return p;
}

std::vector<double> reliability_rewards(const Clustering& clustering, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw Error(ErrorCode::ConfigError, "epsilon must be positive");
    }
    std::vector<double> max_d(clustering.k, 0.0);
    for (std::size_t j = 0; j < clustering.distances.size(); ++j) {
        auto& m = max_d.at(clustering.assignment[j]);
        m = std::max(m, clustering.distances[j]);
    }
    std::vector<double> out(clustering.distances.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = 1.0 - clustering.distances[j] / (max_d[clustering.assignment[j]] + epsilon);
    }
    return out;
}

std::vector<double> diversity_rewards(std::span<const double> angles, std::span<const std::size_t> assignment) {
    if (angles.size() != assignment.size()) {
        throw Error(ErrorCode::DimensionMismatch, "one cluster label per angle required");
    }
    const std::size_t m = angles.size();
    std::vector<double> out(m, 0.0);
    std::vector<std::size_t> sizes;
    for (std::size_t c : assignment) {
        if (c >= sizes.size()) {
            sizes.resize(c + 1, 0);
        }
        ++sizes[c];
    }
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t size = sizes[assignment[j]];
        if (size < 2) {
            continue;
        }
        double s = 0.0;
        for (std::size_t t = 0; t < m; ++t) {
            if (t != j && assignment[t] == assignment[j]) {
                s += 1.0 - std::cos(angles[j] - angles[t]);
            }
        }
        out[j] = s / static_cast<double>(size - 1);
    }
    return out;
}

GeoRewardResult verifier_reward_geometric(const EvalMatrix& matrix, const CorrectPartition& partition,
                                          std::span<const Vec> embeddings, const RewardConfig& config,
                                          std::uint64_t seed) {
    config.validate();
    const std::size_t m = matrix.n_strategies();
    if (embeddings.size() != m) {
        throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(m) + " embeddings, got " +
                                                      std::to_string(embeddings.size()));
    }
    GeoRewardResult res;
    const auto r_con = verifier_reward_anchored(matrix, partition);
    res.empty_positive = partition.positive.empty();

    res.clustering = kmeans(embeddings, config.k, seed, config.kmeans_max_iters, config.kmeans_tol);
    res.projection = polar_projection(embeddings, res.clustering, config.pca_per_cluster);
    const auto r_rel = reliability_rewards(res.clustering, config.epsilon);
    auto r_div = diversity_rewards(res.projection.theta, res.clustering.assignment);
    for (std::size_t j = 0; j < m; ++j) {
        if (res.projection.zero_variance[res.clustering.assignment[j]]) {
            r_div[j] = 0.0;
            res.zero_variance = true;
        }
    }

    res.per_strategy.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        auto& b = res.per_strategy[j];
        b.r_con = r_con[j];
        b.r_rel = r_rel[j];
        b.r_div = r_div[j];
        b.r_ver = config.alpha * b.r_con + config.beta * b.r_rel + config.gamma * b.r_div;
    }
    return res;
}

}  // namespace scicoe
