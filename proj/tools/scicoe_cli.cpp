// Command-line front end. Talks to the library only through the C API.

#include "scicoe/scicoe.h"

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

namespace {

struct Overrides {
    std::vector<std::pair<std::string, std::string>> values;
    bool ablate_naive = false;
};

int report(scicoe_status status) {
    if (status != SCICOE_OK) {
        std::fprintf(stderr, "error: %s\n", scicoe_last_error());
    }
    return static_cast<int>(status);
}

// Registers a string-valued override flag that maps to a config key.
void add_override(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key,
                  const std::string& help) {
    app->add_option_function<std::string>(
        flag, [&ov, key](const std::string& v) { ov.values.emplace_back(key, v); }, help);
}

int build_config(const std::string& path, const Overrides& ov, scicoe_config** out) {
    scicoe_status st = path.empty() ? scicoe_config_create(out) : scicoe_config_load(path.c_str(), out);
    if (st != SCICOE_OK) return report(st);
    for (const auto& [k, v] : ov.values) {
        st = scicoe_config_set(*out, k.c_str(), v.c_str());
        if (st != SCICOE_OK) return report(st);
    }
    if (ov.ablate_naive) {
        scicoe_config_set(*out, "beta", "0");
        scicoe_config_set(*out, "gamma", "0");
    }
    return report(scicoe_config_validate(*out));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver/verifier co-evolution rewards and simulation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(scicoe_version()));

    std::size_t jobs = 1;
    Overrides ov;
    std::string config_path;
    std::string matrix, labels, embeddings, out, geometry;

    auto* s1 = app.add_subcommand("reward-stage1", "Anchored rewards from verdicts and ground-truth labels");
    s1->add_option("--matrix", matrix, "Verdict JSONL")->required();
    s1->add_option("--labels", labels, "Label JSONL")->required();
    s1->add_option("--out", out, "Reward report JSONL")->required();
    s1->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);

    auto* s2 = app.add_subcommand("reward-stage2", "Consensus and geometric rewards from verdicts and embeddings");
    s2->add_option("--matrix", matrix, "Verdict JSONL")->required();
    s2->add_option("--embeddings", embeddings, "Embedding JSONL")->required();
    s2->add_option("--config", config_path, "Config file or run manifest");
    s2->add_option("--out", out, "Reward report JSONL")->required();
    s2->add_option("--geometry", geometry, "Polar geometry CSV");
    s2->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);

    auto* sim = app.add_subcommand("simulate", "Run the synthetic co-evolution trainer");
    sim->add_option("--config", config_path, "Config file or run manifest");
    sim->add_option("--out", out, "Output directory")->required();
    sim->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);
    add_override(sim, ov, "--clip-eps", "clip_eps", "PPO clip range");
    add_override(sim, ov, "--kl-coef", "kl_coef", "KL coefficient");
    add_override(sim, ov, "--schedule", "schedule", "e.g. stage1:300,stage2:300");
    sim->add_flag("--ablate-naive", ov.ablate_naive, "Set beta = gamma = 0");

    for (auto* sub : {s2, sim}) {
        add_override(sub, ov, "--seed", "seed", "Random seed");
        add_override(sub, ov, "--tau", "tau", "Consensus threshold");
        add_override(sub, ov, "--alpha", "alpha", "Consistency weight");
        add_override(sub, ov, "--beta", "beta", "Reliability weight");
        add_override(sub, ov, "--gamma", "gamma", "Diversity weight");
        add_override(sub, ov, "--k", "k", "Cluster count");
    }

    std::vector<std::string> logs;
    auto* an = app.add_subcommand("analyze", "Summarize one or more TrainLogs");
    an->add_option("logs", logs, "TrainLog CSV files");
    an->add_option("--out", out, "Summary CSV (stdout when omitted)");

    std::string manifest;
    auto* rr = app.add_subcommand("rerun", "Re-execute the command recorded in a manifest");
    rr->add_option("manifest", manifest, "Run manifest")->required();
    rr->add_option("--out-dir", out, "Directory for the regenerated outputs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return SCICOE_ERR_INPUT;
    }

    if (s1->parsed()) {
        return report(scicoe_cmd_reward_stage1(matrix.c_str(), labels.c_str(), out.c_str(), jobs));
    }
    if (an->parsed()) {
        std::vector<const char*> paths;
        for (const auto& p : logs) paths.push_back(p.c_str());
        return report(scicoe_cmd_analyze(paths.data(), paths.size(), out.empty() ? nullptr : out.c_str()));
    }
    if (rr->parsed()) {
        return report(scicoe_cmd_rerun(manifest.c_str(), out.c_str()));
    }

    scicoe_config* cfg = nullptr;
    int rc = build_config(config_path, ov, &cfg);
    if (rc == 0) {
        if (s2->parsed()) {
            rc = report(scicoe_cmd_reward_stage2(matrix.c_str(), embeddings.c_str(), cfg, out.c_str(),
                                                 geometry.empty() ? nullptr : geometry.c_str(), jobs));
        } else {
            scicoe_config_set_jobs(cfg, jobs);
            rc = report(scicoe_cmd_simulate(cfg, out.c_str()));
        }
    }
    scicoe_config_destroy(cfg);
    return rc;
}
