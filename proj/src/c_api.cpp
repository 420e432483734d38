#include "scicoe/scicoe.h"

#include "scicoe/commands.hpp"
#include "scicoe/config.hpp"
#include "scicoe/core.hpp"
#include "scicoe/error.hpp"
#include "scicoe/io.hpp"
#include "scicoe/rewards.hpp"
#include "scicoe/sim.hpp"

#include <cstdio>
#include <cstring>
#include <new>
#include <string>

struct scicoe_matrix {
    scicoe::EvalMatrix matrix;
};

struct scicoe_config {
    scicoe::SimConfig config;
};

struct scicoe_train_log {
    scicoe::TrainLog log;
};

namespace {

thread_local std::string g_last_error;

template <class Fn>
scicoe_status guarded(Fn&& fn) noexcept {
    try {
        g_last_error.clear();
        fn();
        return SCICOE_OK;
    } catch (const scicoe::Error& e) {
        g_last_error = e.what();
        return static_cast<scicoe_status>(scicoe::exit_code_for(e.code()));
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
    } catch (const std::exception& e) {
        g_last_error = e.what();
    } catch (...) {
        g_last_error = "unknown error";
    }
    return SCICOE_ERR_INTERNAL;
}

void require(const void* p, const char* what) {
    if (!p) {
        throw scicoe::Error(scicoe::ErrorCode::ConfigError, std::string(what) + " must not be NULL");
    }
}

}  // namespace

extern "C" {

const char* scicoe_version(void) { return scicoe::kArtifactVersion; }

const char* scicoe_last_error(void) { return g_last_error.c_str(); }

scicoe_status scicoe_matrix_create(size_t n, size_t m, const size_t* rows, const size_t* cols, const uint8_t* bits,
                                   size_t count, scicoe_matrix** out) {
    return guarded([&] {
        require(out, "out");
        if (count) {
            require(rows, "rows");
            require(cols, "cols");
            require(bits, "bits");
        }
        std::vector<scicoe::Verdict> v(count);
        for (size_t t = 0; t < count; ++t) {
            v[t] = {rows[t], cols[t], bits[t]};
        }
        *out = new scicoe_matrix{scicoe::build_eval_matrix(n, m, v)};
    });
}

void scicoe_matrix_destroy(scicoe_matrix* matrix) { delete matrix; }

scicoe_status scicoe_matrix_dims(const scicoe_matrix* matrix, size_t* n, size_t* m) {
    return guarded([&] {
        require(matrix, "matrix");
        if (n) *n = matrix->matrix.n_solutions();
        if (m) *m = matrix->matrix.n_strategies();
    });
}

scicoe_status scicoe_matrix_pass_rate(const scicoe_matrix* matrix, size_t i, double* out) {
    return guarded([&] {
        require(matrix, "matrix");
        require(out, "out");
        *out = scicoe::pass_rate(matrix->matrix, i);
    });
}

scicoe_status scicoe_matrix_best_of_n(const scicoe_matrix* matrix, size_t* out) {
    return guarded([&] {
        require(matrix, "matrix");
        require(out, "out");
        *out = scicoe::select_best_of_n(matrix->matrix);
    });
}

scicoe_status scicoe_reward_anchored(const scicoe_matrix* matrix, const uint8_t* labels, size_t n_labels,
                                     double* out) {
    return guarded([&] {
        require(matrix, "matrix");
        require(labels, "labels");
        require(out, "out");
        if (n_labels != matrix->matrix.n_solutions()) {
            throw scicoe::Error(scicoe::ErrorCode::DimensionMismatch, "one label per solution required");
        }
        const auto r = scicoe::verifier_reward_anchored(
            matrix->matrix, scicoe::partition_by_label(std::span<const uint8_t>(labels, n_labels)));
        std::copy(r.begin(), r.end(), out);
    });
}

scicoe_status scicoe_config_create(scicoe_config** out) {
    return guarded([&] {
        require(out, "out");
        *out = new scicoe_config{};
    });
}

scicoe_status scicoe_config_load(const char* path, scicoe_config** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new scicoe_config{scicoe::load_config_file(path)};
    });
}

void scicoe_config_destroy(scicoe_config* config) { delete config; }

scicoe_status scicoe_config_set(scicoe_config* config, const char* key, const char* value) {
    return guarded([&] {
        require(config, "config");
        require(key, "key");
        require(value, "value");
        scicoe::set_config_value(config->config, key, value);
    });
}

scicoe_status scicoe_config_get(const scicoe_config* config, const char* key, char* buf, size_t buf_size,
                                size_t* needed) {
    return guarded([&] {
        require(config, "config");
        require(key, "key");
        for (const auto& [k, v] : scicoe::config_entries(config->config)) {
            if (k == key) {
                if (needed) *needed = v.size() + 1;
                if (buf && buf_size) {
                    const size_t len = std::min(v.size(), buf_size - 1);
                    std::memcpy(buf, v.data(), len);
                    buf[len] = '\0';
                }
                return;
            }
        }
        throw scicoe::Error(scicoe::ErrorCode::ConfigError, std::string("unknown config key '") + key + "'");
    });
}

scicoe_status scicoe_config_set_jobs(scicoe_config* config, size_t jobs) {
    return guarded([&] {
        require(config, "config");
        if (jobs < 1) throw scicoe::Error(scicoe::ErrorCode::ConfigError, "jobs must be at least 1");
        config->config.train.jobs = jobs;
    });
}

scicoe_status scicoe_config_validate(const scicoe_config* config) {
    return guarded([&] {
        require(config, "config");
        config->config.validate();
    });
}

scicoe_status scicoe_train(const scicoe_config* config, scicoe_train_log** out) {
    return guarded([&] {
        require(config, "config");
        require(out, "out");
        *out = new scicoe_train_log{scicoe::run_training(config->config)};
    });
}

void scicoe_train_log_destroy(scicoe_train_log* log) { delete log; }

size_t scicoe_train_log_size(const scicoe_train_log* log) { return log ? log->log.size() : 0; }

scicoe_status scicoe_train_log_value(const scicoe_train_log* log, size_t row, const char* column, double* out) {
    return guarded([&] {
        require(log, "log");
        require(column, "column");
        require(out, "out");
        if (row >= log->log.size()) {
            throw scicoe::Error(scicoe::ErrorCode::IndexError, "row out of range");
        }
        const auto& r = log->log[row];
        const std::string c = column;
        if (c == "step") *out = static_cast<double>(r.step);
        else if (c == "stage") *out = r.stage == scicoe::Stage::Stage1 ? 1.0 : 2.0;
        else if (c == "solver_reward") *out = r.solver_reward;
        else if (c == "r_con") *out = r.r_con;
        else if (c == "r_rel") *out = r.r_rel;
        else if (c == "r_div") *out = r.r_div;
        else if (c == "solver_acc") *out = r.solver_acc;
        else if (c == "verifier_tpr") *out = r.verifier_tpr;
        else if (c == "verifier_tnr") *out = r.verifier_tnr;
        else if (c == "dispersion") *out = r.dispersion;
        else if (c == "bon_acc") *out = r.bon_acc;
        else if (c == "kl") *out = r.kl;
        else if (c == "loss_solver") *out = r.loss_solver;
        else if (c == "loss_verifier") *out = r.loss_verifier;
        else if (c == "grad_norm") *out = r.grad_norm;
        else throw scicoe::Error(scicoe::ErrorCode::SchemaMismatch, "unknown column " + c);
    });
}

scicoe_status scicoe_cmd_reward_stage1(const char* matrix_path, const char* labels_path, const char* out_path,
                                       size_t jobs) {
    return guarded([&] {
        require(matrix_path, "matrix_path");
        require(labels_path, "labels_path");
        require(out_path, "out_path");
        scicoe::cmd_reward_stage1(matrix_path, labels_path, out_path, jobs ? jobs : 1);
    });
}

scicoe_status scicoe_cmd_reward_stage2(const char* matrix_path, const char* embeddings_path,
                                       const scicoe_config* config, const char* out_path,
                                       const char* geometry_csv_path, size_t jobs) {
    return guarded([&] {
        require(matrix_path, "matrix_path");
        require(embeddings_path, "embeddings_path");
        require(out_path, "out_path");
        const scicoe::SimConfig defaults;
        scicoe::cmd_reward_stage2(matrix_path, embeddings_path, config ? config->config : defaults, out_path,
                                  geometry_csv_path ? geometry_csv_path : "", jobs ? jobs : 1);
    });
}

scicoe_status scicoe_cmd_simulate(const scicoe_config* config, const char* out_dir) {
    return guarded([&] {
        require(config, "config");
        require(out_dir, "out_dir");
        scicoe::cmd_simulate(config->config, out_dir);
    });
}

scicoe_status scicoe_cmd_analyze(const char* const* log_paths, size_t count, const char* out_path) {
    return guarded([&] {
        std::vector<std::string> paths;
        for (size_t t = 0; t < count; ++t) {
            require(log_paths[t], "log path");
            paths.emplace_back(log_paths[t]);
        }
        const auto csv = scicoe::cmd_analyze(paths, out_path ? out_path : "");
        if (!out_path) {
            std::fwrite(csv.data(), 1, csv.size(), stdout);
            std::fflush(stdout);
        }
    });
}

scicoe_status scicoe_cmd_rerun(const char* manifest_path, const char* out_dir) {
    return guarded([&] {
        require(manifest_path, "manifest_path");
        require(out_dir, "out_dir");
        scicoe::cmd_rerun(manifest_path, out_dir);
    });
}

}  // extern "C"
