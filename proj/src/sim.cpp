#include "scicoe/sim.hpp"

#include "parallel.hpp"
#include "scicoe/error.hpp"
#include "scicoe/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace scicoe {

namespace {

// stream purposes, mixed into every derived seed
enum Purpose : std::uint64_t {
    kEnvStream = 1,
    kSelectStream = 2,
    kSolverStream = 3,
    kStrategyStream = 4,
    kJudgeStream = 5,
    kKmeansStream = 6,
    kShuffleStream = 7,
    kStepStream = 8,
};

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(sigmoid(x)) without overflow
double log_sigmoid(double x) {
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

JudgeProfile Archetype::profile_for(int flaw) const {
    const bool focused = focus < 0 || flaw == focus;
    return {tpr, focused ? tnr_focus : tnr_off};
}

double Archetype::mean_tnr(int n_flaws) const {
    if (focus < 0 || n_flaws <= 0) {
        return tnr_focus;
    }
    return (tnr_focus + (n_flaws - 1) * tnr_off) / n_flaws;
}

std::vector<Archetype> default_archetypes() {
    return {
        {0.99, 0.05, 0.05, -1, 0.1},  // lenient: passes almost everything
        {0.97, 0.95, 0.00, 0, 0.1},
        {0.97, 0.95, 0.00, 1, 0.1},
        {0.80, 0.30, 0.30, -1, 0.6},  // unfocused and noisy
        {0.97, 0.95, 0.00, 2, 0.1},
        {0.97, 0.95, 0.00, 3, 0.1},
    };
}

double EnvConfig::labeled_fraction() const {
    return pool_size == 0 ? 0.0 : static_cast<double>(labeled_count) / static_cast<double>(pool_size);
}

void EnvConfig::validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::ConfigError, what); };
    if (questions_per_step < 1 || n_solutions < 1 || n_strategies < 1 || topics < 1 || n_flaws < 1) {
        bad("counts must be at least 1");
    }
    if (labeled_count < 1 || labeled_count > pool_size) bad("labeled_count must lie in [1, pool_size]");
    if (embedding_dim < 2) bad("embedding_dim must be at least 2");
    if (!(difficulty_min >= 0.0 && difficulty_min <= difficulty_max && difficulty_max <= 1.0)) {
        bad("difficulty range must lie within [0,1]");
    }
    if (!std::isfinite(difficulty_scale)) bad("difficulty_scale must be finite");
    if (!(temperature > 0.0) || !std::isfinite(temperature)) bad("temperature must be positive");
    if (archetypes.empty()) bad("at least one archetype is required");
    if (archetypes.size() > 1 && !(archetype_radius > 0.0)) bad("archetype_radius must be positive");
    for (const auto& a : archetypes) {
        for (double p : {a.tpr, a.tnr_focus, a.tnr_off}) {
            if (!(p >= 0.0 && p <= 1.0)) bad("archetype rates must lie in [0,1]");
        }
        if (!(a.sigma >= 0.0) || !std::isfinite(a.sigma)) bad("archetype sigma must be nonnegative");
        if (a.focus >= static_cast<int>(n_flaws)) bad("archetype focus exceeds n_flaws");
    }
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw Error(ErrorCode::ConfigError, "learning_rate must be nonnegative");
    }
    if (!(clip_eps >= 0.0 && clip_eps < 1.0)) throw Error(ErrorCode::ConfigError, "clip_eps must lie in [0,1)");
    if (!(kl_coef >= 0.0) || !std::isfinite(kl_coef)) throw Error(ErrorCode::ConfigError, "kl_coef must be nonnegative");
    if (jobs < 1) throw Error(ErrorCode::ConfigError, "jobs must be at least 1");
}

const char* to_string(Stage stage) noexcept { return stage == Stage::Stage1 ? "stage1" : "stage2"; }

std::vector<ScheduleEntry> parse_schedule(std::string_view text) {
    std::vector<ScheduleEntry> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        std::string_view item = text.substr(pos, comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (item.empty()) {
            if (text.empty()) break;
            throw Error(ErrorCode::ConfigError, "empty schedule entry");
        }
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) throw Error(ErrorCode::ConfigError, "schedule entry needs stage:steps");
        const auto name = item.substr(0, colon);
        const auto count = std::string(item.substr(colon + 1));
        ScheduleEntry e;
        if (name == "stage1") {
            e.stage = Stage::Stage1;
        } else if (name == "stage2") {
            e.stage = Stage::Stage2;
        } else {
            throw Error(ErrorCode::ConfigError, "unknown stage '" + std::string(name) + "'");
        }
        if (count.empty() || count.find_first_not_of("0123456789") != std::string::npos || count.size() > 9) {
            throw Error(ErrorCode::ConfigError, "invalid step count '" + count + "'");
        }
        e.steps = std::stoul(count);
        out.push_back(e);
        pos = comma + 1;
    }
    return out;
}

std::string format_schedule(std::span<const ScheduleEntry> schedule) {
    std::string s;
    for (const auto& e : schedule) {
        if (!s.empty()) s += ',';
        s += to_string(e.stage);
        s += ':';
        s += std::to_string(e.steps);
    }
    return s;
}

void SimConfig::validate() const {
    env.validate();
    reward.validate();
    train.validate();
    for (const auto& e : schedule) {
        if (e.stage == Stage::Stage2 && e.steps > 0 && env.labeled_count >= env.pool_size) {
            throw Error(ErrorCode::ConfigError, "stage2 needs unlabeled questions (pool_size > labeled_count)");
        }
    }
}

double SolverPolicy::logit(int topic, double difficulty_logit) const {
    return (skill.at(static_cast<std::size_t>(topic)) - difficulty_logit) / temperature;
}

double SolverPolicy::p_correct(int topic, double difficulty_logit) const {
    return sigmoid(logit(topic, difficulty_logit));
}

double SolverPolicy::log_prob(int topic, double difficulty_logit, bool correct) const {
    const double x = logit(topic, difficulty_logit);
    return correct ? log_sigmoid(x) : log_sigmoid(-x);
}

std::vector<double> VerifierPolicy::log_probs() const {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double s = 0.0;
    for (double l : logits) s += std::exp(l - mx);
    const double lse = mx + std::log(s);
    std::vector<double> out(logits.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = logits[k] - lse;
    return out;
}

std::vector<double> VerifierPolicy::probs() const {
    auto lp = log_probs();
    for (double& x : lp) x = std::exp(x);
    return lp;
}

Environment::Environment(const EnvConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    Rng rng(hash_keys({seed, kEnvStream}));
    questions_.reserve(config_.pool_size);
    for (std::size_t q = 0; q < config_.pool_size; ++q) {
        Question question;
        question.id = "q" + std::to_string(q);
        QuestionLatent latent;
        latent.difficulty = config_.difficulty_min + (config_.difficulty_max - config_.difficulty_min) * rng.uniform();
        latent.topic = static_cast<int>(rng.below(config_.topics));
        latent.reference_answer = static_cast<int>(rng.below(1000));
        question.latent = latent;
        question.labeled = q < config_.labeled_count;
        questions_.push_back(std::move(question));
    }
    const std::size_t a = config_.archetypes.size();
    means_.assign(a, Vec(config_.embedding_dim, 0.0));
    for (std::size_t k = 0; k < a; ++k) {
        const double ang = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(a);
        means_[k][0] = config_.archetype_radius * std::cos(ang);
        means_[k][1] = config_.archetype_radius * std::sin(ang);
    }
}

double Environment::difficulty_logit(std::size_t q) const {
    return config_.difficulty_scale * (questions_.at(q).latent->difficulty - 0.5);
}

std::optional<GroundTruth> Environment::ground_truth(std::size_t q) const {
    const auto& question = questions_.at(q);
    if (!question.labeled) {
        return std::nullopt;
    }
    return GroundTruth{question.id, question.latent->reference_answer};
}

QuestionRollout sample_rollout(const Environment& env, const PolicyState& policy, std::size_t question, std::size_t n,
                               std::size_t m, std::uint64_t seed) {
    if (n < 1 || m < 1) {
        throw Error(ErrorCode::EmptyBatch, "rollouts need n >= 1 and m >= 1");
    }
    const auto& cfg = env.config();
    const auto& q = env.questions().at(question);
    const int topic = q.latent->topic;
    const double dl = env.difficulty_logit(question);
    QuestionRollout r;
    r.question = question;

    Rng srng(hash_keys({seed, question, kSolverStream}));
    const double p = policy.solver.p_correct(topic, dl);
    for (std::size_t i = 0; i < n; ++i) {
        const bool ok = srng.uniform() < p;
        const int flaw = ok ? -1 : static_cast<int>(srng.below(cfg.n_flaws));
        Solution s;
        s.question_id = q.id;
        s.index = i;
        s.answer = ok ? q.latent->reference_answer : q.latent->reference_answer + 1 + flaw;
        r.solutions.push_back(std::move(s));
        r.correct.push_back(ok ? 1 : 0);
        r.flaw.push_back(flaw);
        r.solver_logp.push_back(policy.solver.log_prob(topic, dl, ok));
    }

    Rng vrng(hash_keys({seed, question, kStrategyStream}));
    const auto probs = policy.verifier.probs();
    const auto logp = policy.verifier.log_probs();
    const auto& means = env.archetype_means();
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t a = vrng.categorical(probs);
        Strategy st;
        st.question_id = q.id;
        st.index = j;
        st.archetype = static_cast<int>(a);
        st.noise_seed = hash_keys({seed, question, j, kStrategyStream});
        st.text = "archetype:" + std::to_string(a);
        Rng erng(st.noise_seed);
        Vec z = means[a];
        for (double& x : z) {
            x += cfg.archetypes[a].sigma * erng.normal();
        }
        r.strategies.push_back(std::move(st));
        r.embeddings.push_back(std::move(z));
        r.verifier_logp.push_back(logp[a]);
    }
    return r;
}

std::vector<QuestionRollout> sample_rollouts(const Environment& env, const PolicyState& policy,
                                             std::span<const std::size_t> questions, std::size_t n, std::size_t m,
                                             std::uint64_t seed) {
    std::vector<QuestionRollout> out;
    out.reserve(questions.size());
    for (std::size_t q : questions) {
        out.push_back(sample_rollout(env, policy, q, n, m, seed));
    }
    return out;
}

double k3_kl(double ratio) {
    if (!(ratio > 0.0) || !std::isfinite(ratio)) {
        throw Error(ErrorCode::DomainError, "K3 estimator needs a positive finite ratio");
    }
    return (ratio - 1.0) - std::log(ratio);
}

double ppo_clip_loss(std::span<const double> ratios, std::span<const double> advantages, double clip_eps,
                     std::span<const double> ref_ratios, double kl_coef) {
    if (ratios.size() != advantages.size()) {
        throw Error(ErrorCode::DimensionMismatch, "one advantage per ratio required");
    }
    if (ratios.empty()) {
        throw Error(ErrorCode::EmptyBatch, "PPO loss over an empty batch");
    }
    double s = 0.0;
    for (std::size_t t = 0; t < ratios.size(); ++t) {
        const double r = ratios[t];
        if (!(r > 0.0)) {
            throw Error(ErrorCode::DomainError, "PPO ratio must be positive");
        }
        const double a = advantages[t];
        s -= std::min(r * a, std::clamp(r, 1.0 - clip_eps, 1.0 + clip_eps) * a);
    }
    double loss = s / static_cast<double>(ratios.size());
    if (!ref_ratios.empty()) {
        double kl = 0.0;
        for (double r : ref_ratios) {
            kl += k3_kl(r);
        }
        loss += kl_coef * kl / static_cast<double>(ref_ratios.size());
    }
    return loss;
}

std::vector<double> advantage_baseline(std::span<const double> rewards) {
    if (rewards.empty()) {
        throw Error(ErrorCode::EmptyBatch, "advantage over an empty group");
    }
    const double mu = mean_of(rewards);
    std::vector<double> out(rewards.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        out[t] = rewards[t] - mu;
    }
    return out;
}

LossGrad policy_loss(const PolicyState& current, const PolicyState& reference, std::span<const SolverSample> solver,
                     std::span<const VerifierSample> verifier, std::span<const SampleRef> order,
                     const TrainConfig& config, double normalizer) {
    if (!(normalizer > 0.0)) {
        throw Error(ErrorCode::EmptyBatch, "loss normalizer must be positive");
    }
    LossGrad out;
    out.grad_skill.assign(current.solver.skill.size(), 0.0);
    out.grad_logits.assign(current.verifier.logits.size(), 0.0);
    const auto lp_cur = current.verifier.log_probs();
    const auto lp_ref = reference.verifier.log_probs();
    const auto p_cur = current.verifier.probs();
    const double eps = config.clip_eps;
    const double c = config.kl_coef;

    // returns (loss term, dloss/dlogp)
    auto term = [&](double lp, double old_lp, double ref_lp, double adv) {
        const double r = std::exp(lp - old_lp);
        const double rho = std::exp(ref_lp - lp);
        const double unclipped = r * adv;
        const double clipped = std::clamp(r, 1.0 - eps, 1.0 + eps) * adv;
        const double kl = k3_kl(rho);
        out.kl_sum += kl;
        ++out.kl_count;
        const double loss = -std::min(unclipped, clipped) + c * kl;
        const double dlp = (unclipped <= clipped ? -unclipped : 0.0) + c * (1.0 - rho);
        return std::pair{loss / normalizer, dlp / normalizer};
    };

    for (const auto& ref : order) {
        if (ref.role == Role::Solver) {
            const auto& s = solver[ref.index];
            const double lp = current.solver.log_prob(s.topic, s.difficulty_logit, s.correct);
            const double lr = reference.solver.log_prob(s.topic, s.difficulty_logit, s.correct);
            const auto [loss, dlp] = term(lp, s.old_logp, lr, s.advantage);
            out.loss_solver += loss;
            const double p = current.solver.p_correct(s.topic, s.difficulty_logit);
            out.grad_skill[static_cast<std::size_t>(s.topic)] +=
                dlp * ((s.correct ? 1.0 : 0.0) - p) / current.solver.temperature;
        } else {
            const auto& v = verifier[ref.index];
            const auto a = static_cast<std::size_t>(v.archetype);
            const auto [loss, dlp] = term(lp_cur[a], v.old_logp, lp_ref[a], v.advantage);
            out.loss_verifier += loss;
            for (std::size_t k = 0; k < p_cur.size(); ++k) {
                out.grad_logits[k] += dlp * ((k == a ? 1.0 : 0.0) - p_cur[k]);
            }
        }
    }
    return out;
}

namespace {

struct QuestionOutcome {
    std::vector<double> solver_reward;
    std::vector<double> verifier_reward;
    bool skip_verifier = false;
    double r_con = 0.0;
    double r_rel = 0.0;
    double r_div = 0.0;
    std::uint8_t bon_correct = 0;
    std::vector<double> plane_angles;
};

double sq_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace

Trainer::Trainer(SimConfig config, UpdateProbe probe)
    : config_(std::move(config)), env_(config_.env, config_.seed), probe_(std::move(probe)) {
    config_.validate();
    policy_.solver.skill.assign(config_.env.topics, 0.0);
    policy_.solver.temperature = config_.env.temperature;
    policy_.verifier.logits.assign(config_.env.archetypes.size(), 0.0);
    reference_ = policy_;
}

double Trainer::verifier_tpr() const {
    if (config_.env.oracle_judge) return 1.0;
    const auto p = policy_.verifier.probs();
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) s += p[k] * config_.env.archetypes[k].tpr;
    return s;
}

double Trainer::verifier_tnr() const {
    if (config_.env.oracle_judge) return 1.0;
    const auto p = policy_.verifier.probs();
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        s += p[k] * config_.env.archetypes[k].mean_tnr(static_cast<int>(config_.env.n_flaws));
    }
    return s;
}

std::vector<std::size_t> Trainer::pick_questions(Stage stage) {
    const auto& env = config_.env;
    const std::size_t lo = stage == Stage::Stage1 ? 0 : env.labeled_count;
    const std::size_t hi = stage == Stage::Stage1 ? env.labeled_count : env.pool_size;
    std::vector<std::size_t> ids(hi - lo);
    for (std::size_t t = 0; t < ids.size(); ++t) ids[t] = lo + t;
    const std::size_t want = std::min(env.questions_per_step, ids.size());
    if (want == ids.size()) {
        return ids;
    }
    // partial Fisher-Yates
    Rng rng(hash_keys({config_.seed, step_, kSelectStream}));
    for (std::size_t t = 0; t < want; ++t) {
        std::swap(ids[t], ids[t + rng.below(ids.size() - t)]);
    }
    ids.resize(want);
    return ids;
}

StepRecord Trainer::step(Stage stage, bool apply) {
    const auto qs = pick_questions(stage);
    return stage == Stage::Stage1 ? stage1_step(qs, apply) : stage2_step(qs, apply);
}

StepRecord Trainer::stage1_step(std::span<const std::size_t> questions, bool apply) {
    for (std::size_t q : questions) {
        if (!env_.questions().at(q).labeled) {
            throw Error(ErrorCode::NotLabeled, "stage1 batch contains unlabeled question " + env_.questions()[q].id);
        }
    }
    return run_step(Stage::Stage1, questions, apply);
}

StepRecord Trainer::stage2_step(std::span<const std::size_t> questions, bool apply) {
    return run_step(Stage::Stage2, questions, apply);
}

StepRecord Trainer::run_step(Stage stage, std::span<const std::size_t> questions, bool apply) {
    if (questions.empty()) {
        throw Error(ErrorCode::EmptyBatch, "training step without questions");
    }
    const auto& env = config_.env;
    const std::size_t n = env.n_solutions;
    const std::size_t m = env.n_strategies;
    const std::uint64_t step_seed = hash_keys({config_.seed, step_, kStepStream});
    const std::uint64_t judge_seed = hash_keys({step_seed, kJudgeStream});

    std::vector<QuestionRollout> rollouts(questions.size());
    std::vector<QuestionOutcome> outcomes(questions.size());
    detail::parallel_for(questions.size(), config_.train.jobs, [&](std::size_t t) {
        const std::size_t q = questions[t];
        auto& ro = rollouts[t];
        ro = sample_rollout(env_, policy_, q, n, m, step_seed);
        const std::uint64_t qkey = fnv1a(env_.questions()[q].id);

        std::vector<std::uint8_t> cells(n * m);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                std::uint8_t bit = ro.correct[i];
                if (!env.oracle_judge) {
                    const auto& arch = env.archetypes[static_cast<std::size_t>(ro.strategies[j].archetype)];
                    bit = synthetic_verdict(qkey, i, j, ro.correct[i] == 1, arch.profile_for(ro.flaw[i]), judge_seed);
                }
                cells[i * m + j] = bit;
            }
        }
        const EvalMatrix matrix(n, m, std::move(cells));

        auto& out = outcomes[t];
        CorrectPartition partition;
        if (stage == Stage::Stage1) {
            std::vector<std::uint8_t> labels(n);
            const auto truth = env_.ground_truth(q);
            for (std::size_t i = 0; i < n; ++i) {
                labels[i] = ground_truth_grade(ro.solutions[i], truth);
            }
            out.solver_reward = solver_reward_anchored(labels);
            partition = partition_by_label(labels);
        } else {
            out.solver_reward = solver_reward_consensus(matrix);
            partition = high_consensus_partition(matrix, config_.reward.tau);
        }
        // geometry is evaluated in both stages so the log carries r_rel and r_div throughout
        const auto geo = verifier_reward_geometric(matrix, partition, ro.embeddings, config_.reward,
                                                   hash_keys({step_seed, q, kKmeansStream}));
        out.verifier_reward.resize(m);
        std::vector<double> con(m), rel(m), div(m);
        for (std::size_t j = 0; j < m; ++j) {
            const auto& b = geo.per_strategy[j];
            con[j] = b.r_con;
            rel[j] = b.r_rel;
            div[j] = b.r_div;
            out.verifier_reward[j] = stage == Stage::Stage1 ? b.r_con : b.r_ver;
        }
        // an empty correct set gives no anchored signal; such questions are left out of the verifier update
        out.skip_verifier = stage == Stage::Stage1 && partition.positive.empty();
        out.r_con = mean_of(con);
        out.r_rel = mean_of(rel);
        out.r_div = mean_of(div);
        out.bon_correct = ro.correct[select_best_of_n(matrix)];
        out.plane_angles.resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            out.plane_angles[j] = std::atan2(ro.embeddings[j][1], ro.embeddings[j][0]);
        }
    });

    StepRecord rec;
    rec.step = step_;
    rec.stage = stage;
    rec.verifier_tpr = verifier_tpr();
    rec.verifier_tnr = verifier_tnr();

    std::vector<SolverSample> ssamples;
    std::vector<VerifierSample> vsamples;
    std::vector<double> all_angles;
    double sum_reward = 0.0;
    double sum_correct = 0.0;
    double sum_bon = 0.0;
    for (std::size_t t = 0; t < questions.size(); ++t) {
        const auto& ro = rollouts[t];
        const auto& out = outcomes[t];
        const std::size_t q = questions[t];
        const auto& latent = *env_.questions()[q].latent;
        const double dl = env_.difficulty_logit(q);
        const auto sadv = advantage_baseline(out.solver_reward);
        for (std::size_t i = 0; i < n; ++i) {
            ssamples.push_back({latent.topic, dl, ro.correct[i] == 1, ro.solver_logp[i], sadv[i]});
            sum_reward += out.solver_reward[i];
            sum_correct += ro.correct[i];
        }
        if (!out.skip_verifier) {
            const auto vadv = advantage_baseline(out.verifier_reward);
            for (std::size_t j = 0; j < m; ++j) {
                vsamples.push_back({ro.strategies[j].archetype, ro.verifier_logp[j], vadv[j]});
            }
        }
        rec.r_con += out.r_con;
        rec.r_rel += out.r_rel;
        rec.r_div += out.r_div;
        sum_bon += out.bon_correct;
        all_angles.insert(all_angles.end(), out.plane_angles.begin(), out.plane_angles.end());
    }
    const double nq = static_cast<double>(questions.size());
    rec.solver_reward = sum_reward / (nq * static_cast<double>(n));
    rec.solver_acc = sum_correct / (nq * static_cast<double>(n));
    rec.r_con /= nq;
    rec.r_rel /= nq;
    rec.r_div /= nq;
    rec.bon_acc = sum_bon / nq;
    rec.dispersion = circular_dispersion(all_angles);

    std::vector<SampleRef> sref(ssamples.size());
    for (std::size_t t = 0; t < sref.size(); ++t) sref[t] = {Role::Solver, t};
    std::vector<SampleRef> vref(vsamples.size());
    for (std::size_t t = 0; t < vref.size(); ++t) vref[t] = {Role::Verifier, t};
    const double lr = config_.train.learning_rate;
    auto descend = [lr](std::vector<double>& params, const std::vector<double>& grad) {
        for (std::size_t k = 0; k < params.size(); ++k) params[k] -= lr * grad[k];
    };

    if (stage == Stage::Stage1) {
        // solution data first, then strategy data, each a separate optimizer step
        const auto gs = policy_loss(policy_, reference_, ssamples, vsamples, sref, config_.train,
                                    static_cast<double>(ssamples.size()));
        if (apply) {
            descend(policy_.solver.skill, gs.grad_skill);
            if (probe_) probe_(step_, UpdateKind::Solver);
        }
        LossGrad gv;
        if (!vsamples.empty()) {
            gv = policy_loss(policy_, reference_, ssamples, vsamples, vref, config_.train,
                             static_cast<double>(vsamples.size()));
            if (apply) {
                descend(policy_.verifier.logits, gv.grad_logits);
                if (probe_) probe_(step_, UpdateKind::Verifier);
            }
        } else {
            gv.grad_logits.assign(policy_.verifier.logits.size(), 0.0);
        }
        rec.loss_solver = gs.loss_solver;
        rec.loss_verifier = gv.loss_verifier;
        rec.kl = (gs.kl_sum + gv.kl_sum) / static_cast<double>(gs.kl_count + gv.kl_count);
        rec.grad_norm = std::sqrt(sq_norm(gs.grad_skill) + sq_norm(gv.grad_logits));
    } else {
        std::vector<SampleRef> mixed = sref;
        mixed.insert(mixed.end(), vref.begin(), vref.end());
        Rng shuffler(hash_keys({step_seed, kShuffleStream}));
        shuffler.shuffle(mixed);
        const auto g = policy_loss(policy_, reference_, ssamples, vsamples, mixed, config_.train,
                                   static_cast<double>(mixed.size()));
        if (apply) {
            descend(policy_.solver.skill, g.grad_skill);
            descend(policy_.verifier.logits, g.grad_logits);
            if (probe_) probe_(step_, UpdateKind::Joint);
        }
        rec.loss_solver = g.loss_solver;
        rec.loss_verifier = g.loss_verifier;
        rec.kl = g.kl_sum / static_cast<double>(g.kl_count);
        rec.grad_norm = std::sqrt(sq_norm(g.grad_skill) + sq_norm(g.grad_logits));
    }
    ++step_;
    return rec;
}

TrainLog run_training(const SimConfig& config, UpdateProbe probe, PolicyState* final_policy) {
    config.validate();
    Trainer trainer(config, std::move(probe));
    TrainLog log;
    const Stage first = config.schedule.empty() ? Stage::Stage1 : config.schedule.front().stage;
    log.push_back(trainer.step(first, false));
    for (const auto& entry : config.schedule) {
        for (std::size_t s = 0; s < entry.steps; ++s) {
            log.push_back(trainer.step(entry.stage, true));
        }
    }
    if (final_policy) {
        *final_policy = trainer.policy();
    }
    return log;
}

}  // namespace scicoe
