#pragma once
// Solver and verifier reward functions for the anchored (labeled) and the
// consensus (unlabeled) training stages.

#include "scicoe/core.hpp"
#include "scicoe/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace scicoe {

struct RewardConfig {
    double tau = 0.8;
    double alpha = 1.0;
    double beta = 0.5;
    double gamma = 0.5;
    std::size_t k = 1;
    double epsilon = 1e-8;
    bool pca_per_cluster = true;
    std::size_t kmeans_max_iters = 100;
    double kmeans_tol = 1e-12;

    void validate() const;
};

struct GeoRewardBreakdown {
    double r_con = 0.0;
    double r_rel = 0.0;
    double r_div = 0.0;
    double r_ver = 0.0;
};

std::vector<double> solver_reward_anchored(std::span<const std::uint8_t> labels);

CorrectPartition partition_by_label(std::span<const std::uint8_t> labels);

/// Throws DimensionMismatch unless S+ and S- split {0..n-1} exactly.
void validate_partition(const CorrectPartition& partition, std::size_t n);

/// +1 iff strategy j passes every member of S+. Throws EmptyPositiveSet when S+ is empty.
int verifier_sign(const EvalMatrix& matrix, const CorrectPartition& partition, std::size_t j);

/// sign * mean over S- of (1 - E). Empty S- gives 0; empty S+ gives 0 for every strategy.
std::vector<double> verifier_reward_anchored(const EvalMatrix& matrix, const CorrectPartition& partition);

std::vector<double> solver_reward_consensus(const EvalMatrix& matrix);

/// S+ = solutions with pass rate >= tau.
CorrectPartition high_consensus_partition(const EvalMatrix& matrix, double tau);

/// 1 - d_j / (max distance within the cluster of j + epsilon).
std::vector<double> reliability_rewards(const Clustering& clustering, double epsilon);

/// Mean of (1 - cos(theta_j - theta_j')) over the other members of j's cluster;
/// 0 for members of singleton clusters.
std::vector<double> diversity_rewards(std::span<const double> angles, std::span<const std::size_t> assignment);

struct GeoRewardResult {
    std::vector<GeoRewardBreakdown> per_strategy;
    Clustering clustering;
    PolarProjection projection;
    /// S+ was empty, so r_con is 0 for every strategy.
    bool empty_positive = false;
    /// Some cluster had no spread; its diversity terms are 0.
    bool zero_variance = false;
};

GeoRewardResult verifier_reward_geometric(const EvalMatrix& matrix, const CorrectPartition& partition,
                                          std::span<const Vec> embeddings, const RewardConfig& config,
                                          std::uint64_t seed);

}  // namespace scicoe
