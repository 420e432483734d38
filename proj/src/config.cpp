#include "scicoe/config.hpp"

#include "scicoe/error.hpp"
#include "scicoe/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <map>

namespace scicoe {

namespace {

std::string_view trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
    throw Error(ErrorCode::ConfigError, "invalid value '" + std::string(value) + "' for " + std::string(key));
}

double to_double(std::string_view key, std::string_view value) {
    value = trim(value);
    double x = 0.0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec != std::errc{} || p != value.data() + value.size() || !std::isfinite(x)) bad_value(key, value);
    return x;
}

template <class T>
T to_integer(std::string_view key, std::string_view value) {
    value = trim(value);
    T x{};
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec != std::errc{} || p != value.data() + value.size()) bad_value(key, value);
    return x;
}

bool to_bool(std::string_view key, std::string_view value) {
    value = trim(value);
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value);
}

Archetype to_archetype(std::string_view key, std::string_view value) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        const auto comma = value.find(',', pos);
        parts.push_back(trim(value.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (parts.size() != 5) bad_value(key, value);
    Archetype a;
    a.tpr = to_double(key, parts[0]);
    a.tnr_focus = to_double(key, parts[1]);
    a.tnr_off = to_double(key, parts[2]);
    a.focus = to_integer<int>(key, parts[3]);
    a.sigma = to_double(key, parts[4]);
    return a;
}

std::string format_archetype(const Archetype& a) {
    return format_double(a.tpr) + ", " + format_double(a.tnr_focus) + ", " + format_double(a.tnr_off) + ", " +
           std::to_string(a.focus) + ", " + format_double(a.sigma);
}

constexpr std::string_view kArchetypePrefix = "archetype.";

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) {
        throw Error(ErrorCode::DomainError, "cannot format number");
    }
    return std::string(buf, p);
}

void set_config_value(SimConfig& c, std::string_view key, std::string_view value) {
    auto& e = c.env;
    auto& r = c.reward;
    auto& t = c.train;
    value = trim(value);
    if (key == "seed") c.seed = to_integer<std::uint64_t>(key, value);
    else if (key == "schedule") c.schedule = parse_schedule(value);
    else if (key == "questions_per_step") e.questions_per_step = to_integer<std::size_t>(key, value);
    else if (key == "n_solutions") e.n_solutions = to_integer<std::size_t>(key, value);
    else if (key == "n_strategies") e.n_strategies = to_integer<std::size_t>(key, value);
    else if (key == "pool_size") e.pool_size = to_integer<std::size_t>(key, value);
    else if (key == "labeled_count") e.labeled_count = to_integer<std::size_t>(key, value);
    else if (key == "topics") e.topics = to_integer<std::size_t>(key, value);
    else if (key == "n_flaws") e.n_flaws = to_integer<std::size_t>(key, value);
    else if (key == "embedding_dim") e.embedding_dim = to_integer<std::size_t>(key, value);
    else if (key == "difficulty_min") e.difficulty_min = to_double(key, value);
    else if (key == "difficulty_max") e.difficulty_max = to_double(key, value);
    else if (key == "difficulty_scale") e.difficulty_scale = to_double(key, value);
    else if (key == "archetype_radius") e.archetype_radius = to_double(key, value);
    else if (key == "temperature") e.temperature = to_double(key, value);
    else if (key == "oracle_judge") e.oracle_judge = to_bool(key, value);
    else if (key == "tau") r.tau = to_double(key, value);
    else if (key == "alpha") r.alpha = to_double(key, value);
    else if (key == "beta") r.beta = to_double(key, value);
    else if (key == "gamma") r.gamma = to_double(key, value);
    else if (key == "k") r.k = to_integer<std::size_t>(key, value);
    else if (key == "epsilon") r.epsilon = to_double(key, value);
    else if (key == "pca_per_cluster") r.pca_per_cluster = to_bool(key, value);
    else if (key == "kmeans_max_iters") r.kmeans_max_iters = to_integer<std::size_t>(key, value);
    else if (key == "kmeans_tol") r.kmeans_tol = to_double(key, value);
    else if (key == "learning_rate") t.learning_rate = to_double(key, value);
    else if (key == "clip_eps") t.clip_eps = to_double(key, value);
    else if (key == "kl_coef") t.kl_coef = to_double(key, value);
    else if (key.starts_with(kArchetypePrefix)) {
        const auto idx = to_integer<std::size_t>(key, key.substr(kArchetypePrefix.size()));
        const Archetype a = to_archetype(key, value);
        if (idx < e.archetypes.size()) {
            e.archetypes[idx] = a;
        } else if (idx == e.archetypes.size()) {
            e.archetypes.push_back(a);
        } else {
            throw Error(ErrorCode::ConfigError, "archetype indices must be contiguous from 0");
        }
    } else {
        throw Error(ErrorCode::ConfigError, "unknown config key '" + std::string(key) + "'");
    }
}

SimConfig parse_config(std::string_view text) {
    SimConfig c;
    std::map<std::size_t, std::pair<std::string, std::string>> archetypes;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string_view raw = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        const auto line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        try {
            if (key.starts_with(kArchetypePrefix)) {
                const auto idx = to_integer<std::size_t>(key, std::string_view(key).substr(kArchetypePrefix.size()));
                if (!archetypes.emplace(idx, std::pair{key, value}).second) {
                    throw Error(ErrorCode::ConfigError, "duplicate key " + key);
                }
            } else {
                set_config_value(c, key, value);
            }
        } catch (const Error& err) {
            throw Error(err.code(), "line " + std::to_string(line_no) + ": " + err.what());
        }
    }
    if (!archetypes.empty()) {
        c.env.archetypes.clear();
        for (const auto& [idx, kv] : archetypes) {
            set_config_value(c, kv.first, kv.second);
        }
    }
    c.validate();
    return c;
}

SimConfig load_config_file(const std::string& path) {
    const std::string text = read_file(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ParseError, path + ": " + e.what());
        }
        if (!j.contains("config") || !j["config"].is_object()) {
            throw Error(ErrorCode::ParseError, path + ": manifest has no config object");
        }
        std::string flat;
        for (const auto& [k, v] : j["config"].items()) {
            if (!v.is_string()) throw Error(ErrorCode::ParseError, path + ": config values must be strings");
            flat += k + " = " + v.get<std::string>() + "\n";
        }
        return parse_config(flat);
    }
    return parse_config(text);
}

ConfigEntries config_entries(const SimConfig& c) {
    const auto& e = c.env;
    const auto& r = c.reward;
    const auto& t = c.train;
    ConfigEntries out{
        {"seed", std::to_string(c.seed)},
        {"schedule", format_schedule(c.schedule)},
        {"questions_per_step", std::to_string(e.questions_per_step)},
        {"n_solutions", std::to_string(e.n_solutions)},
        {"n_strategies", std::to_string(e.n_strategies)},
        {"pool_size", std::to_string(e.pool_size)},
        {"labeled_count", std::to_string(e.labeled_count)},
        {"topics", std::to_string(e.topics)},
        {"n_flaws", std::to_string(e.n_flaws)},
        {"embedding_dim", std::to_string(e.embedding_dim)},
        {"difficulty_min", format_double(e.difficulty_min)},
        {"difficulty_max", format_double(e.difficulty_max)},
        {"difficulty_scale", format_double(e.difficulty_scale)},
        {"archetype_radius", format_double(e.archetype_radius)},
        {"temperature", format_double(e.temperature)},
        {"oracle_judge", e.oracle_judge ? "true" : "false"},
        {"tau", format_double(r.tau)},
        {"alpha", format_double(r.alpha)},
        {"beta", format_double(r.beta)},
        {"gamma", format_double(r.gamma)},
        {"k", std::to_string(r.k)},
        {"epsilon", format_double(r.epsilon)},
        {"pca_per_cluster", r.pca_per_cluster ? "true" : "false"},
        {"kmeans_max_iters", std::to_string(r.kmeans_max_iters)},
        {"kmeans_tol", format_double(r.kmeans_tol)},
        {"learning_rate", format_double(t.learning_rate)},
        {"clip_eps", format_double(t.clip_eps)},
        {"kl_coef", format_double(t.kl_coef)},
    };
    for (std::size_t k = 0; k < e.archetypes.size(); ++k) {
        out.emplace_back(std::string(kArchetypePrefix) + std::to_string(k), format_archetype(e.archetypes[k]));
    }
    return out;
}

std::string format_config(const SimConfig& config) {
    std::string s;
    for (const auto& [k, v] : config_entries(config)) {
        s += k + " = " + v + "\n";
    }
    return s;
}

}  // namespace scicoe
