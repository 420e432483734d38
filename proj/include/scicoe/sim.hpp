#pragma once
// Synthetic co-evolution environment: parametric solver and verifier
// policies, a PPO-clip objective with K3 KL regularization, and the two
// training schedules (sequential anchored updates, joint consensus updates).

#include "scicoe/core.hpp"
#include "scicoe/geometry.hpp"
#include "scicoe/judge.hpp"
#include "scicoe/rewards.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scicoe {

/// A family of verification strategies. Incorrect solutions carry one of
/// n_flaws flaw kinds; a focused archetype rejects its own flaw kind with
/// probability tnr_focus and other kinds with tnr_off. focus < 0 means the
/// archetype treats all flaw kinds alike (tnr_focus is used).
struct Archetype {
    double tpr = 1.0;
    double tnr_focus = 1.0;
    double tnr_off = 1.0;
    int focus = -1;
    double sigma = 0.1;  // isotropic embedding noise

    JudgeProfile profile_for(int flaw) const;
    /// tnr averaged over uniformly drawn flaw kinds.
    double mean_tnr(int n_flaws) const;
};

std::vector<Archetype> default_archetypes();

struct EnvConfig {
    std::size_t questions_per_step = 100;
    std::size_t n_solutions = 10;
    std::size_t n_strategies = 10;
    std::size_t pool_size = 2000;
    std::size_t labeled_count = 100;
    std::size_t topics = 4;
    std::size_t n_flaws = 4;
    std::size_t embedding_dim = 8;
    double difficulty_min = 0.0;
    double difficulty_max = 1.0;
    double difficulty_scale = 24.0;
    double archetype_radius = 1.0;
    double temperature = 1.0;
    bool oracle_judge = false;
    std::vector<Archetype> archetypes = default_archetypes();

    double labeled_fraction() const;
    void validate() const;
};

struct TrainConfig {
    double learning_rate = 1.5;
    double clip_eps = 0.2;
    double kl_coef = 0.01;
    std::size_t jobs = 1;

    void validate() const;
};

enum class Stage { Stage1, Stage2 };

const char* to_string(Stage stage) noexcept;

struct ScheduleEntry {
    Stage stage = Stage::Stage1;
    std::size_t steps = 0;
    friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

/// Parses "stage1:300,stage2:300".
std::vector<ScheduleEntry> parse_schedule(std::string_view text);
std::string format_schedule(std::span<const ScheduleEntry> schedule);

struct SimConfig {
    std::uint64_t seed = 1;
    EnvConfig env;
    RewardConfig reward;
    TrainConfig train;
    std::vector<ScheduleEntry> schedule{{Stage::Stage1, 300}, {Stage::Stage2, 300}};

    void validate() const;
};

struct SolverPolicy {
    std::vector<double> skill;  // logit per topic
    double temperature = 1.0;

    double logit(int topic, double difficulty_logit) const;
    double p_correct(int topic, double difficulty_logit) const;
    double log_prob(int topic, double difficulty_logit, bool correct) const;
};

struct VerifierPolicy {
    std::vector<double> logits;  // one per archetype

    std::vector<double> probs() const;
    std::vector<double> log_probs() const;
};

struct PolicyState {
    SolverPolicy solver;
    VerifierPolicy verifier;
};

class Environment {
public:
    Environment(const EnvConfig& config, std::uint64_t seed);

    const EnvConfig& config() const noexcept { return config_; }
    const std::vector<Question>& questions() const noexcept { return questions_; }
    const std::vector<Vec>& archetype_means() const noexcept { return means_; }
    double difficulty_logit(std::size_t q) const;
    std::optional<GroundTruth> ground_truth(std::size_t q) const;

private:
    EnvConfig config_;
    std::vector<Question> questions_;
    std::vector<Vec> means_;
};

struct QuestionRollout {
    std::size_t question = 0;
    std::vector<Solution> solutions;
    std::vector<std::uint8_t> correct;
    std::vector<int> flaw;  // -1 for correct solutions
    std::vector<double> solver_logp;
    std::vector<Strategy> strategies;
    std::vector<Vec> embeddings;
    std::vector<double> verifier_logp;
};

QuestionRollout sample_rollout(const Environment& env, const PolicyState& policy, std::size_t question, std::size_t n,
                               std::size_t m, std::uint64_t seed);

std::vector<QuestionRollout> sample_rollouts(const Environment& env, const PolicyState& policy,
                                             std::span<const std::size_t> questions, std::size_t n, std::size_t m,
                                             std::uint64_t seed);

/// (r - 1) - ln r for r = pi_ref / pi_theta.
double k3_kl(double ratio);

/// Mean of -min(r A, clip(r, 1 - eps, 1 + eps) A) plus kl_coef times the
/// mean K3 estimate over ref_ratios (skipped when ref_ratios is empty).
double ppo_clip_loss(std::span<const double> ratios, std::span<const double> advantages, double clip_eps,
                     std::span<const double> ref_ratios = {}, double kl_coef = 0.0);

/// Reward minus the group mean.
std::vector<double> advantage_baseline(std::span<const double> rewards);

struct SolverSample {
    int topic = 0;
    double difficulty_logit = 0.0;
    bool correct = false;
    double old_logp = 0.0;
    double advantage = 0.0;
};

struct VerifierSample {
    int archetype = 0;
    double old_logp = 0.0;
    double advantage = 0.0;
};

enum class Role { Solver, Verifier };

struct SampleRef {
    Role role = Role::Solver;
    std::size_t index = 0;
};

struct LossGrad {
    double loss_solver = 0.0;
    double loss_verifier = 0.0;
    double kl_sum = 0.0;
    std::size_t kl_count = 0;
    std::vector<double> grad_skill;
    std::vector<double> grad_logits;

    double loss() const noexcept { return loss_solver + loss_verifier; }
};

/// PPO loss over the listed samples, divided by `normalizer`, with its
/// gradient with respect to the policy parameters. Terms are accumulated in
/// the order given by `order`.
LossGrad policy_loss(const PolicyState& current, const PolicyState& reference, std::span<const SolverSample> solver,
                     std::span<const VerifierSample> verifier, std::span<const SampleRef> order,
                     const TrainConfig& config, double normalizer);

struct StepRecord {
    std::size_t step = 0;
    Stage stage = Stage::Stage1;
    double solver_reward = 0.0;
    double r_con = 0.0;
    double r_rel = 0.0;
    double r_div = 0.0;
    double solver_acc = 0.0;
    double verifier_tpr = 0.0;
    double verifier_tnr = 0.0;
    double dispersion = 0.0;
    double bon_acc = 0.0;
    double kl = 0.0;
    double loss_solver = 0.0;
    double loss_verifier = 0.0;
    double grad_norm = 0.0;
};

using TrainLog = std::vector<StepRecord>;

enum class UpdateKind { Solver, Verifier, Joint };

/// Called once per applied optimizer step.
using UpdateProbe = std::function<void(std::size_t step, UpdateKind kind)>;

class Trainer {
public:
    explicit Trainer(SimConfig config, UpdateProbe probe = {});

    /// Evaluates one batch and, when apply is true, updates the policy.
    /// Labeled questions only for stage 1.
    StepRecord step(Stage stage, bool apply = true);

    const PolicyState& policy() const noexcept { return policy_; }
    PolicyState& mutable_policy() noexcept { return policy_; }
    const PolicyState& reference() const noexcept { return reference_; }
    const Environment& environment() const noexcept { return env_; }
    const SimConfig& config() const noexcept { return config_; }
    std::size_t steps_taken() const noexcept { return step_; }

    /// Expected rates of the current verifier policy over archetypes.
    double verifier_tpr() const;
    double verifier_tnr() const;

    /// Stage 1 step on an explicit question list; throws NotLabeled for unlabeled ones.
    StepRecord stage1_step(std::span<const std::size_t> questions, bool apply = true);
    StepRecord stage2_step(std::span<const std::size_t> questions, bool apply = true);

private:
    std::vector<std::size_t> pick_questions(Stage stage);
    StepRecord run_step(Stage stage, std::span<const std::size_t> questions, bool apply);

    SimConfig config_;
    Environment env_;
    PolicyState policy_;
    PolicyState reference_;
    UpdateProbe probe_;
    std::size_t step_ = 0;
};

/// Record 0 holds the initial metrics (no update), then one record per step.
TrainLog run_training(const SimConfig& config, UpdateProbe probe = {}, PolicyState* final_policy = nullptr);

}  // namespace scicoe
