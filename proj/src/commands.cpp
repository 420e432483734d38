#include "scicoe/commands.hpp"

#include "parallel.hpp"
#include "scicoe/config.hpp"
#include "scicoe/io.hpp"
#include "scicoe/rewards.hpp"
#include "scicoe/rng.hpp"

#include <json.hpp>

#include <filesystem>

namespace scicoe {

const char* const kArtifactVersion = "1.0.0";

using ojson = nlohmann::ordered_json;

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ParseError:
        case ErrorCode::ConfigError:
        case ErrorCode::IoError:
            return 2;
        case ErrorCode::DegenerateClustering:
        case ErrorCode::DomainError:
            return 4;
        default:
            return 3;
    }
}

namespace {

ojson config_json(const SimConfig& config) {
    ojson j = ojson::object();
    for (const auto& [k, v] : config_entries(config)) {
        j[k] = v;
    }
    return j;
}

ojson reward_config_json(const SimConfig& config) {
    const auto all = config_json(config);
    ojson j = ojson::object();
    for (const char* k : {"seed", "tau", "alpha", "beta", "gamma", "k", "epsilon", "pca_per_cluster",
                          "kmeans_max_iters", "kmeans_tol"}) {
        j[k] = all[k];
    }
    return j;
}

void write_manifest(const std::string& path, const std::string& command, const ojson& config, std::uint64_t seed,
                    std::size_t jobs, const ojson& inputs, const ojson& outputs) {
    ojson m;
    m["command"] = command;
    m["artifact_version"] = kArtifactVersion;
    m["seed"] = seed;
    m["jobs"] = jobs;
    m["config"] = config;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    write_file_atomic(path, m.dump(2) + "\n");
}

std::string jsonl(const ojson& j) { return j.dump() + "\n"; }

}  // namespace

void cmd_reward_stage1(const std::string& matrix_path, const std::string& labels_path, const std::string& out_path,
                       std::size_t jobs) {
    const auto batch = parse_verdicts_jsonl(read_file(matrix_path), matrix_path);
    const auto labels = parse_labels_jsonl(read_file(labels_path), labels_path);
    if (labels.empty()) {
        throw Error(ErrorCode::DimensionMismatch, labels_path + ": no labels");
    }
    for (const auto& [q, bits] : labels) {
        if (!batch.matrices.count(q)) {
            throw Error(ErrorCode::DimensionMismatch, "labels given for unknown question " + q);
        }
    }
    for (const auto& q : batch.order) {
        auto it = labels.find(q);
        const std::size_t n = batch.matrices.at(q).n_solutions();
        if (it == labels.end() || it->second.size() != n) {
            throw Error(ErrorCode::DimensionMismatch, "question " + q + " needs exactly " + std::to_string(n) +
                                                          " labels");
        }
    }

    write_manifest(out_path + ".manifest.json", "reward-stage1", ojson::object(), 0, jobs,
                   ojson{{"matrix", matrix_path}, {"labels", labels_path}}, ojson{{"report", out_path}});

    std::vector<std::string> chunks(batch.order.size());
    detail::parallel_for(batch.order.size(), jobs, [&](std::size_t t) {
        const auto& q = batch.order[t];
        const auto& matrix = batch.matrices.at(q);
        const auto& bits = labels.at(q);
        const auto r_sol = solver_reward_anchored(bits);
        const auto r_ver = verifier_reward_anchored(matrix, partition_by_label(bits));
        std::string s;
        for (std::size_t i = 0; i < r_sol.size(); ++i) {
            s += jsonl(ojson{{"q", q}, {"i", i}, {"r_sol", r_sol[i]}});
        }
        for (std::size_t j = 0; j < r_ver.size(); ++j) {
            s += jsonl(ojson{{"q", q}, {"j", j}, {"r_con", r_ver[j]}, {"r_rel", nullptr}, {"r_div", nullptr},
                             {"r_ver", r_ver[j]}});
        }
        chunks[t] = std::move(s);
    });
    std::string report;
    for (const auto& c : chunks) report += c;
    write_file_atomic(out_path, report);
}

void cmd_reward_stage2(const std::string& matrix_path, const std::string& embeddings_path, const SimConfig& config,
                       const std::string& out_path, const std::string& geometry_csv_path, std::size_t jobs) {
    config.reward.validate();
    const auto batch = parse_verdicts_jsonl(read_file(matrix_path), matrix_path);
    auto emb = parse_embeddings_jsonl(read_file(embeddings_path), embeddings_path);
    if (emb.size() == 1 && emb.count("") && batch.order.size() == 1) {
        auto node = emb.extract("");
        node.key() = batch.order.front();
        emb.insert(std::move(node));
    }
    for (const auto& [q, zs] : emb) {
        if (!batch.matrices.count(q)) {
            throw Error(ErrorCode::DimensionMismatch,
                        q.empty() ? std::string("embeddings need a \"q\" field for multi-question inputs")
                                  : "embeddings given for unknown question " + q);
        }
    }
    for (const auto& q : batch.order) {
        auto it = emb.find(q);
        const std::size_t m = batch.matrices.at(q).n_strategies();
        if (it == emb.end() || it->second.size() != m) {
            throw Error(ErrorCode::DimensionMismatch, "question " + q + " needs exactly " + std::to_string(m) +
                                                          " embeddings");
        }
    }

    ojson outputs{{"report", out_path}};
    if (!geometry_csv_path.empty()) outputs["geometry"] = geometry_csv_path;
    write_manifest(out_path + ".manifest.json", "reward-stage2", reward_config_json(config), config.seed, jobs,
                   ojson{{"matrix", matrix_path}, {"embeddings", embeddings_path}}, outputs);

    const bool multi = batch.order.size() > 1;
    std::vector<std::string> report_chunks(batch.order.size());
    std::vector<std::string> csv_chunks(batch.order.size());
    detail::parallel_for(batch.order.size(), jobs, [&](std::size_t t) {
        const auto& q = batch.order[t];
        const auto& matrix = batch.matrices.at(q);
        const auto& zs = emb.at(q);
        const auto r_sol = solver_reward_consensus(matrix);
        const auto partition = high_consensus_partition(matrix, config.reward.tau);
        const auto geo =
            verifier_reward_geometric(matrix, partition, zs, config.reward, hash_keys({config.seed, fnv1a(q)}));
        std::string s;
        for (std::size_t i = 0; i < r_sol.size(); ++i) {
            s += jsonl(ojson{{"q", q}, {"i", i}, {"r_sol", r_sol[i]}});
        }
        std::string csv;
        for (std::size_t j = 0; j < geo.per_strategy.size(); ++j) {
            const auto& b = geo.per_strategy[j];
            s += jsonl(ojson{{"q", q}, {"j", j}, {"r_con", b.r_con}, {"r_rel", b.r_rel}, {"r_div", b.r_div},
                             {"r_ver", b.r_ver}});
            const auto& xy = geo.projection.coords[j];
            if (multi) csv += q + ',';
            csv += std::to_string(j) + ',' + std::to_string(geo.clustering.assignment[j]) + ',' +
                   format_double(xy[0]) + ',' + format_double(xy[1]) + ',' + format_double(geo.projection.theta[j]) +
                   ',' + format_double(geo.clustering.distances[j]) + '\n';
        }
        report_chunks[t] = std::move(s);
        csv_chunks[t] = std::move(csv);
    });
    std::string report;
    for (const auto& c : report_chunks) report += c;
    write_file_atomic(out_path, report);
    if (!geometry_csv_path.empty()) {
        std::string csv = multi ? "q,j,cluster,x,y,theta,d\n" : "j,cluster,x,y,theta,d\n";
        for (const auto& c : csv_chunks) csv += c;
        write_file_atomic(geometry_csv_path, csv);
    }
}

void cmd_simulate(const SimConfig& config, const std::string& out_dir) {
    config.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, "cannot create " + out_dir + ": " + ec.message());
    }
    const auto path = [&](const char* name) { return (std::filesystem::path(out_dir) / name).string(); };
    write_manifest(path("manifest.json"), "simulate", config_json(config), config.seed, config.train.jobs,
                   ojson::object(),
                   ojson{{"train_log", path("train_log.csv")},
                         {"config", path("config.resolved")},
                         {"policy", path("policy.json")}});
    PolicyState final_policy;
    const auto log = run_training(config, {}, &final_policy);
    write_file_atomic(path("train_log.csv"), format_train_log(log));
    write_file_atomic(path("config.resolved"), format_config(config));
    ojson policy;
    policy["solver_skill"] = final_policy.solver.skill;
    policy["solver_temperature"] = final_policy.solver.temperature;
    policy["verifier_logits"] = final_policy.verifier.logits;
    policy["verifier_probs"] = final_policy.verifier.probs();
    write_file_atomic(path("policy.json"), policy.dump(2) + "\n");
}

std::string cmd_analyze(const std::vector<std::string>& log_paths, const std::string& out_path) {
    if (log_paths.empty()) {
        throw Error(ErrorCode::EmptyBatch, "no logs to analyze");
    }
    std::vector<TrainLog> logs;
    for (const auto& p : log_paths) {
        logs.push_back(parse_train_log(read_file(p), p));
        if (logs.back().empty()) {
            throw Error(ErrorCode::SchemaMismatch, p + ": log has no records");
        }
    }
    std::string csv = "run,steps,final_r_con,final_r_rel,final_r_div,dispersion,solver_acc,bon_acc\n";
    for (std::size_t t = 0; t < logs.size(); ++t) {
        const auto& r = logs[t].back();
        csv += log_paths[t] + ',' + std::to_string(r.step) + ',' + format_double(r.r_con) + ',' +
               format_double(r.r_rel) + ',' + format_double(r.r_div) + ',' + format_double(r.dispersion) + ',' +
               format_double(r.solver_acc) + ',' + format_double(r.bon_acc) + '\n';
    }
    if (!out_path.empty()) {
        ojson inputs = ojson::array();
        for (const auto& p : log_paths) inputs.push_back(p);
        write_manifest(out_path + ".manifest.json", "analyze", ojson::object(), 0, 1, ojson{{"logs", inputs}},
                       ojson{{"table", out_path}});
        write_file_atomic(out_path, csv);
    }
    return csv;
}

void cmd_rerun(const std::string& manifest_path, const std::string& out_dir) {
    ojson m;
    try {
        m = ojson::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, manifest_path + ": " + e.what());
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, "cannot create " + out_dir + ": " + ec.message());
    }
    try {
        const std::string command = m.at("command").get<std::string>();
        const std::size_t jobs = m.at("jobs").get<std::size_t>();
        const auto& in = m.at("inputs");
        const auto& out = m.at("outputs");
        auto relocate = [&](const char* key) {
            return (std::filesystem::path(out_dir) /
                    std::filesystem::path(out.at(key).get<std::string>()).filename())
                .string();
        };
        SimConfig config;
        for (const auto& [k, v] : m.at("config").items()) {
            set_config_value(config, k, v.get<std::string>());
        }
        if (command == "reward-stage1") {
            cmd_reward_stage1(in.at("matrix"), in.at("labels"), relocate("report"), jobs);
        } else if (command == "reward-stage2") {
            cmd_reward_stage2(in.at("matrix"), in.at("embeddings"), config, relocate("report"),
                              out.contains("geometry") ? relocate("geometry") : std::string{}, jobs);
        } else if (command == "simulate") {
            config.train.jobs = jobs;
            cmd_simulate(config, out_dir);
        } else if (command == "analyze") {
            cmd_analyze(in.at("logs").get<std::vector<std::string>>(), relocate("table"));
        } else {
            throw Error(ErrorCode::ParseError, manifest_path + ": unknown command " + command);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, manifest_path + ": " + e.what());
    }
}

}  // namespace scicoe
