#include "scicoe/judge.hpp"

#include "scicoe/error.hpp"
#include "scicoe/rng.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace scicoe {

void JudgeProfile::validate() const {
    if (!(tpr >= 0.0 && tpr <= 1.0) || !(tnr >= 0.0 && tnr <= 1.0)) {
        throw Error(ErrorCode::ConfigError, "judge tpr and tnr must lie in [0,1]");
    }
}

std::uint8_t ground_truth_grade(const Solution& solution, const std::optional<GroundTruth>& truth) {
    if (!truth) {
        throw Error(ErrorCode::NotLabeled, "question " + solution.question_id + " has no ground truth");
    }
    return solution.answer == truth->reference_answer ? 1 : 0;
}

std::uint8_t synthetic_verdict(std::uint64_t question_key, std::size_t i, std::size_t j, bool correct,
                               const JudgeProfile& profile, std::uint64_t seed) {
    const double u = to_unit(hash_keys({question_key, i, j, seed}));
    const double p_pass = correct ? profile.tpr : 1.0 - profile.tnr;
    return u < p_pass ? 1 : 0;
}

std::uint8_t SyntheticJudge::judge_pair(const PairContext& ctx, std::uint64_t seed) {
    return synthetic_verdict(fnv1a(ctx.question_id), ctx.i, ctx.j, ctx.solution_correct, ctx.profile, seed);
}

void ReplayJudge::record(const std::string& question_id, std::size_t i, std::size_t j, std::uint8_t bit) {
    if (bit > 1) {
        throw Error(ErrorCode::DomainError, "verdict bit must be 0 or 1");
    }
    if (!verdicts_.emplace(std::tuple{question_id, i, j}, bit).second) {
        throw Error(ErrorCode::DuplicateVerdict, "pair recorded twice for question " + question_id);
    }
}

std::uint8_t ReplayJudge::judge_pair(const PairContext& ctx, std::uint64_t) {
    auto it = verdicts_.find({ctx.question_id, ctx.i, ctx.j});
    if (it == verdicts_.end()) {
        throw Error(ErrorCode::MissingVerdict, "no recorded verdict for question " + ctx.question_id + " pair (" +
                                                   std::to_string(ctx.i) + "," + std::to_string(ctx.j) + ")");
    }
    return it->second;
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) {
            break;
        }
        const auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) {
            break;
        }
        out.append(tmpl.substr(pos, open - pos));
        const std::string name(tmpl.substr(open + 2, close - open - 2));
        auto it = vars.find(name);
        if (it != vars.end()) {
            out.append(it->second);
        } else {
            out.append(tmpl.substr(open, close + 2 - open));
        }
        pos = close + 2;
    }
    out.append(tmpl.substr(pos));
    return out;
}

std::uint8_t parse_verdict(std::string_view response) {
    const auto first = response.find_first_not_of(" \t\r\n");
    const auto last = response.find_last_not_of(" \t\r\n");
    const std::string_view t =
        first == std::string_view::npos ? std::string_view{} : response.substr(first, last - first + 1);
    if (t == "True") return 1;
    if (t == "False") return 0;
    throw Error(ErrorCode::JudgeProtocolError, "judge response is neither True nor False");
}

JudgeTransport make_http_transport(const RemoteJudgeOptions& options) {
    const std::string& url = options.endpoint;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::ConfigError, "judge endpoint must look like http://host[:port]/path");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string base = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    const std::string token = options.auth_token;
    return [base, path, token](const std::string& prompt) {
        httplib::Client client(base);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (!token.empty()) {
            headers.emplace("Authorization", "Bearer " + token);
        }
        const std::string body = nlohmann::json{{"prompt", prompt}}.dump();
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            throw Error(ErrorCode::JudgeProtocolError, "request failed: " + httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            throw Error(ErrorCode::JudgeProtocolError, "judge endpoint returned HTTP " + std::to_string(res->status));
        }
        return res->body;
    };
}

RemoteJudge::RemoteJudge(RemoteJudgeOptions options, JudgeTransport transport, Warn warn)
    : options_(std::move(options)), transport_(std::move(transport)), warn_(std::move(warn)) {
    if (options_.max_in_flight == 0) {
        throw Error(ErrorCode::ConfigError, "max_in_flight must be at least 1");
    }
    if (options_.template_text.empty()) {
        throw Error(ErrorCode::ConfigError, "remote judge needs a prompt template");
    }
}

void RemoteJudge::throttle() {
    if (options_.requests_per_second <= 0.0) {
        return;
    }
    using clock = std::chrono::steady_clock;
    const double interval = 1.0 / options_.requests_per_second;
    double wait = 0.0;
    {
        std::lock_guard lock(mu_);
        const double now = std::chrono::duration<double>(clock::now().time_since_epoch()).count();
        const double slot = std::max(now, next_slot_);
        next_slot_ = slot + interval;
        wait = slot - now;
    }
    if (wait > 0.0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    }
}

std::uint8_t RemoteJudge::judge_pair(const PairContext& ctx, std::uint64_t) {
    const std::string prompt = render_template(options_.template_text, {{"problem", ctx.problem},
                                                                        {"solution", ctx.solution_text},
                                                                        {"strategy_type", ctx.strategy_type},
                                                                        {"strategy_details", ctx.strategy_details}});
    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            throttle();
            return parse_verdict(transport_(prompt));
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    if (warn_) {
        std::lock_guard lock(mu_);
        warn_("question " + ctx.question_id + " pair (" + std::to_string(ctx.i) + "," + std::to_string(ctx.j) +
              "): " + last_error + "; verdict set to 0");
    }
    return 0;
}

EvalMatrix RemoteJudge::judge_matrix(std::size_t n, std::size_t m, const std::vector<PairContext>& pairs) {
    if (pairs.size() != n * m) {
        throw Error(ErrorCode::DimensionMismatch, "expected one pair per matrix cell");
    }
    std::vector<std::uint8_t> cells(pairs.size(), 0);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < pairs.size(); k = next++) {
            cells[k] = judge_pair(pairs[k], 0);
        }
    };
    const std::size_t workers = std::min(options_.max_in_flight, pairs.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    return EvalMatrix(n, m, std::move(cells));
}

}  // namespace scicoe
