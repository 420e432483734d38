#pragma once
// Verdict backends: a seeded synthetic judge, a replay judge over recorded
// verdicts, and a remote adapter that renders the judging prompt template.

#include "scicoe/core.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace scicoe {

struct JudgeProfile {
    double tpr = 1.0;
    double tnr = 1.0;

    void validate() const;
};

struct GroundTruth {
    std::string question_id;
    int reference_answer = 0;
};

/// Exact token equality against the reference answer; NotLabeled without one.
std::uint8_t ground_truth_grade(const Solution& solution, const std::optional<GroundTruth>& truth);

/// Seeded Bernoulli verdict keyed by (question, i, j, seed); the same key
/// always yields the same bit regardless of call order.
std::uint8_t synthetic_verdict(std::uint64_t question_key, std::size_t i, std::size_t j, bool correct,
                               const JudgeProfile& profile, std::uint64_t seed);

/// Everything a backend may need to judge one (solution, strategy) pair.
struct PairContext {
    std::string question_id;
    std::size_t i = 0;
    std::size_t j = 0;
    bool solution_correct = false;
    JudgeProfile profile;
    std::string problem;
    std::string solution_text;
    std::string strategy_type;
    std::string strategy_details;
};

class JudgeBackend {
public:
    virtual ~JudgeBackend() = default;
    virtual std::uint8_t judge_pair(const PairContext& ctx, std::uint64_t seed) = 0;
};

class SyntheticJudge final : public JudgeBackend {
public:
    std::uint8_t judge_pair(const PairContext& ctx, std::uint64_t seed) override;
};

class ReplayJudge final : public JudgeBackend {
public:
    void record(const std::string& question_id, std::size_t i, std::size_t j, std::uint8_t bit);
    std::uint8_t judge_pair(const PairContext& ctx, std::uint64_t seed) override;
    std::size_t size() const noexcept { return verdicts_.size(); }

private:
    std::map<std::tuple<std::string, std::size_t, std::size_t>, std::uint8_t> verdicts_;
};

/// Replaces every {{name}} placeholder with vars[name]; unknown names are left as-is.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars);

/// Accepts a response whose trimmed text is exactly "True" or "False".
std::uint8_t parse_verdict(std::string_view response);

struct RemoteJudgeOptions {
    std::string endpoint;         // http://host[:port]/path
    std::string auth_token;       // sent as a bearer token when non-empty
    std::size_t max_in_flight = 4;
    double requests_per_second = 0.0;  // 0 disables rate limiting
    std::string template_text;    // judging prompt with {{...}} placeholders
};

/// Sends a rendered prompt, returns the raw response text; throws on transport failure.
using JudgeTransport = std::function<std::string(const std::string& prompt)>;

JudgeTransport make_http_transport(const RemoteJudgeOptions& options);

class RemoteJudge final : public JudgeBackend {
public:
    using Warn = std::function<void(const std::string&)>;

    RemoteJudge(RemoteJudgeOptions options, JudgeTransport transport, Warn warn = {});

    /// One retry on a malformed or failed response, then verdict 0 with a warning.
    std::uint8_t judge_pair(const PairContext& ctx, std::uint64_t seed) override;

    /// Judges every pair with at most max_in_flight concurrent requests; cell
    /// (i, j) of the result is the verdict for pairs[i * m + j].
    EvalMatrix judge_matrix(std::size_t n, std::size_t m, const std::vector<PairContext>& pairs);

private:
    void throttle();

    RemoteJudgeOptions options_;
    JudgeTransport transport_;
    Warn warn_;
    std::mutex mu_;
    double next_slot_ = 0.0;
};

}  // namespace scicoe
