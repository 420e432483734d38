#include "scicoe/io.hpp"

#include "scicoe/config.hpp"
#include "scicoe/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace scicoe {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::IoError, "cannot write " + tmp);
        }
        out << content;
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw Error(ErrorCode::IoError, "write failed for " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw Error(ErrorCode::IoError, "cannot move output into place at " + path);
    }
}

namespace {

template <class Fn>
void for_each_json_line(const std::string& text, const std::string& source, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        const std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fail = [&](const std::string& why) -> Error {
            return Error(ErrorCode::ParseError, source + ":" + std::to_string(line_no) + ": " + why);
        };
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception&) {
            throw fail("malformed JSON");
        }
        if (!j.is_object()) throw fail("expected a JSON object");
        fn(j, fail);
    }
}

template <class Fail>
std::size_t get_index(const json& j, const char* key, Fail& fail) {
    if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 0) {
        throw fail(std::string("field \"") + key + "\" must be a nonnegative integer");
    }
    return j[key].get<std::size_t>();
}

template <class Fail>
std::uint8_t get_bit(const json& j, const char* key, Fail& fail) {
    if (j.contains(key)) {
        const auto& v = j[key];
        if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
        if (v.is_number_integer() && (v.get<long long>() == 0 || v.get<long long>() == 1)) {
            return static_cast<std::uint8_t>(v.get<long long>());
        }
    }
    throw fail(std::string("field \"") + key + "\" must be 0 or 1");
}

template <class Fail>
std::string get_qid(const json& j, Fail& fail, bool required) {
    if (!j.contains("q")) {
        if (required) throw fail("field \"q\" is required");
        return {};
    }
    const auto& v = j["q"];
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return v.dump();
    throw fail("field \"q\" must be a string or integer");
}

}  // namespace

VerdictBatch parse_verdicts_jsonl(const std::string& text, const std::string& source) {
    std::map<std::string, std::vector<Verdict>> rows;
    std::map<std::string, std::pair<std::size_t, std::size_t>> dims;
    VerdictBatch batch;
    for_each_json_line(text, source, [&](const json& j, auto& fail) {
        const std::string q = get_qid(j, fail, true);
        const Verdict v{get_index(j, "i", fail), get_index(j, "j", fail), get_bit(j, "pass", fail)};
        if (!rows.count(q)) batch.order.push_back(q);
        rows[q].push_back(v);
        auto& d = dims[q];
        d.first = std::max(d.first, v.solution + 1);
        d.second = std::max(d.second, v.strategy + 1);
    });
    if (batch.order.empty()) {
        throw Error(ErrorCode::EmptyBatch, source + ": no verdicts");
    }
    for (const auto& q : batch.order) {
        try {
            batch.matrices.emplace(q, build_eval_matrix(dims[q].first, dims[q].second, rows[q]));
        } catch (const Error& e) {
            throw Error(e.code(), "question " + q + ": " + e.what());
        }
    }
    return batch;
}

std::map<std::string, std::vector<std::uint8_t>> parse_labels_jsonl(const std::string& text, const std::string& source) {
    std::map<std::string, std::map<std::size_t, std::uint8_t>> rows;
    for_each_json_line(text, source, [&](const json& j, auto& fail) {
        const std::string q = get_qid(j, fail, true);
        const std::size_t i = get_index(j, "i", fail);
        if (!rows[q].emplace(i, get_bit(j, "correct", fail)).second) {
            throw Error(ErrorCode::DuplicateVerdict, source + ": label for question " + q + " solution " +
                                                         std::to_string(i) + " given twice");
        }
    });
    std::map<std::string, std::vector<std::uint8_t>> out;
    for (auto& [q, m] : rows) {
        std::vector<std::uint8_t> bits;
        for (const auto& [i, b] : m) {
            if (i != bits.size()) {
                throw Error(ErrorCode::DimensionMismatch, source + ": labels for question " + q +
                                                              " skip solution " + std::to_string(bits.size()));
            }
            bits.push_back(b);
        }
        out.emplace(q, std::move(bits));
    }
    return out;
}

std::map<std::string, std::vector<Vec>> parse_embeddings_jsonl(const std::string& text, const std::string& source) {
    std::map<std::string, std::map<std::size_t, Vec>> rows;
    for_each_json_line(text, source, [&](const json& j, auto& fail) {
        const std::string q = get_qid(j, fail, false);
        const std::size_t idx = get_index(j, "j", fail);
        if (!j.contains("z") || !j["z"].is_array()) throw fail("field \"z\" must be an array");
        Vec z;
        for (const auto& x : j["z"]) {
            if (!x.is_number()) throw fail("embedding coordinates must be numbers");
            z.push_back(x.get<double>());
        }
        if (!rows[q].emplace(idx, std::move(z)).second) {
            throw Error(ErrorCode::DuplicateVerdict, source + ": embedding " + std::to_string(idx) + " given twice");
        }
    });
    std::map<std::string, std::vector<Vec>> out;
    for (auto& [q, m] : rows) {
        std::vector<Vec> zs;
        for (auto& [idx, z] : m) {
            if (idx != zs.size()) {
                throw Error(ErrorCode::DimensionMismatch,
                            source + ": embeddings skip strategy index " + std::to_string(zs.size()));
            }
            zs.push_back(std::move(z));
        }
        out.emplace(q, std::move(zs));
    }
    return out;
}

const std::vector<std::string> kTrainLogColumns = {
    "step",         "stage",        "solver_reward", "r_con", "r_rel",       "r_div",         "solver_acc", "verifier_tpr",
    "verifier_tnr", "dispersion",   "bon_acc",       "kl",    "loss_solver", "loss_verifier", "grad_norm",
};

std::string format_train_log(const TrainLog& log) {
    std::string s;
    for (std::size_t c = 0; c < kTrainLogColumns.size(); ++c) {
        s += (c ? "," : "") + kTrainLogColumns[c];
    }
    s += '\n';
    for (const auto& r : log) {
        s += std::to_string(r.step) + ',' + to_string(r.stage);
        for (double x : {r.solver_reward, r.r_con, r.r_rel, r.r_div, r.solver_acc, r.verifier_tpr, r.verifier_tnr,
                         r.dispersion, r.bon_acc, r.kl, r.loss_solver, r.loss_verifier, r.grad_norm}) {
            s += ',' + format_double(x);
        }
        s += '\n';
    }
    return s;
}

TrainLog parse_train_log(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::SchemaMismatch, source + ": empty log");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string expected;
    for (std::size_t c = 0; c < kTrainLogColumns.size(); ++c) {
        expected += (c ? "," : "") + kTrainLogColumns[c];
    }
    if (line != expected) {
        throw Error(ErrorCode::SchemaMismatch, source + ": header does not match the TrainLog schema");
    }
    TrainLog log;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        auto fail = [&](const std::string& why) {
            return Error(ErrorCode::ParseError, source + ":" + std::to_string(line_no) + ": " + why);
        };
        if (cells.size() != kTrainLogColumns.size()) throw fail("wrong number of columns");
        StepRecord r;
        auto num = [&](const std::string& s) {
            double x = 0.0;
            const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
            if (ec != std::errc{} || p != s.data() + s.size()) throw fail("bad number '" + s + "'");
            return x;
        };
        r.step = static_cast<std::size_t>(num(cells[0]));
        if (cells[1] == "stage1") r.stage = Stage::Stage1;
        else if (cells[1] == "stage2") r.stage = Stage::Stage2;
        else throw fail("unknown stage '" + cells[1] + "'");
        double* fields[] = {&r.solver_reward, &r.r_con,    &r.r_rel,     &r.r_div,         &r.solver_acc,
                            &r.verifier_tpr,  &r.verifier_tnr, &r.dispersion, &r.bon_acc,   &r.kl,
                            &r.loss_solver,   &r.loss_verifier, &r.grad_norm};
        for (std::size_t c = 0; c < std::size(fields); ++c) {
            *fields[c] = num(cells[c + 2]);
        }
        log.push_back(r);
    }
    return log;
}

}  // namespace scicoe
