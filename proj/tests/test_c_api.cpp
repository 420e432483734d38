#include "scicoe/scicoe.h"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string data(const char* name) {
    return std::string(SCICOE_TEST_DATA) + "/" + name;
}

std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("version string") {
    CHECK(std::strcmp(scicoe_version(), "1.0.0") == 0);
}

TEST_CASE("matrix handle lifecycle") {
    const size_t rows[] = {0, 0, 1, 1}, cols[] = {0, 1, 0, 1};
    const uint8_t bits[] = {1, 0, 1, 1};
    scicoe_matrix* m = nullptr;
    REQUIRE(scicoe_matrix_create(2, 2, rows, cols, bits, 4, &m) == SCICOE_OK);
    size_t n = 0, k = 0;
    CHECK(scicoe_matrix_dims(m, &n, &k) == SCICOE_OK);
    CHECK((n == 2 && k == 2));
    double rate = 0;
    CHECK(scicoe_matrix_pass_rate(m, 0, &rate) == SCICOE_OK);
    CHECK(rate == 0.5);
    size_t best = 9;
    CHECK(scicoe_matrix_best_of_n(m, &best) == SCICOE_OK);
    CHECK(best == 1);
    CHECK(scicoe_matrix_pass_rate(m, 5, &rate) == SCICOE_ERR_CONSISTENCY);
    CHECK(std::strlen(scicoe_last_error()) > 0);
    scicoe_matrix_destroy(m);

    scicoe_matrix* bad = nullptr;
    CHECK(scicoe_matrix_create(2, 2, rows, cols, bits, 3, &bad) == SCICOE_ERR_CONSISTENCY);
    CHECK(bad == nullptr);
    CHECK(scicoe_matrix_dims(nullptr, &n, &k) != SCICOE_OK);
}

TEST_CASE("anchored rewards through the C API") {
    const size_t rows[] = {0, 1, 2, 3}, cols[] = {0, 0, 0, 0};
    const uint8_t bits[] = {1, 1, 0, 1}, labels[] = {1, 1, 0, 0};
    scicoe_matrix* m = nullptr;
    REQUIRE(scicoe_matrix_create(4, 1, rows, cols, bits, 4, &m) == SCICOE_OK);
    double r = 0;
    CHECK(scicoe_reward_anchored(m, labels, 4, &r) == SCICOE_OK);
    CHECK(r == 0.5);
    CHECK(scicoe_reward_anchored(m, labels, 3, &r) == SCICOE_ERR_CONSISTENCY);
    scicoe_matrix_destroy(m);
}

TEST_CASE("config get and set") {
    scicoe_config* c = nullptr;
    REQUIRE(scicoe_config_create(&c) == SCICOE_OK);
    CHECK(scicoe_config_set(c, "tau", "0.6") == SCICOE_OK);
    char buf[8];
    size_t needed = 0;
    CHECK(scicoe_config_get(c, "tau", buf, sizeof buf, &needed) == SCICOE_OK);
    CHECK(std::string(buf) == "0.6");
    CHECK(needed == 4);
    CHECK(scicoe_config_get(c, "schedule", buf, sizeof buf, &needed) == SCICOE_OK);
    CHECK(needed == std::strlen("stage1:300,stage2:300") + 1);
    CHECK(std::strlen(buf) == sizeof buf - 1);
    CHECK(scicoe_config_set(c, "bogus", "1") == SCICOE_ERR_INPUT);
    CHECK(scicoe_config_set(c, "tau", "x") == SCICOE_ERR_INPUT);
    CHECK(scicoe_config_set(c, "tau", "3") == SCICOE_OK);
    CHECK(scicoe_config_validate(c) == SCICOE_ERR_INPUT);
    scicoe_config_destroy(c);

    scicoe_config* missing = nullptr;
    CHECK(scicoe_config_load("/nonexistent.conf", &missing) == SCICOE_ERR_INPUT);
}

TEST_CASE("in-memory training") {
    scicoe_config* c = nullptr;
    REQUIRE(scicoe_config_load(data("small.conf").c_str(), &c) == SCICOE_OK);
    CHECK(scicoe_config_set_jobs(c, 2) == SCICOE_OK);
    scicoe_train_log* log = nullptr;
    REQUIRE(scicoe_train(c, &log) == SCICOE_OK);
    CHECK(scicoe_train_log_size(log) == 9);
    double v = -1;
    CHECK(scicoe_train_log_value(log, 8, "step", &v) == SCICOE_OK);
    CHECK(v == 8);
    CHECK(scicoe_train_log_value(log, 0, "bon_acc", &v) == SCICOE_OK);
    CHECK((v >= 0 && v <= 1));
    CHECK(scicoe_train_log_value(log, 9, "step", &v) != SCICOE_OK);
    CHECK(scicoe_train_log_value(log, 0, "nope", &v) != SCICOE_OK);
    scicoe_train_log_destroy(log);
    scicoe_config_destroy(c);
}

TEST_CASE("file commands through the C API") {
    namespace fs = std::filesystem;
    const auto dir = fs::path(SCICOE_TEST_TMP) / "c_api";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto out = (dir / "r.jsonl").string();
    CHECK(scicoe_cmd_reward_stage1(data("anchored_matrix.jsonl").c_str(), data("anchored_labels.jsonl").c_str(),
                                   out.c_str(), 1) == SCICOE_OK);
    CHECK(slurp(out).find("\"r_ver\":0.5") != std::string::npos);
    CHECK(scicoe_cmd_reward_stage1(data("anchored_matrix.jsonl").c_str(), data("empty.jsonl").c_str(), out.c_str(),
                                   1) == SCICOE_ERR_CONSISTENCY);

    scicoe_config* c = nullptr;
    REQUIRE(scicoe_config_create(&c) == SCICOE_OK);
    scicoe_config_set(c, "k", "2");
    CHECK(scicoe_cmd_reward_stage2(data("planted_matrix.jsonl").c_str(), data("identical_embeddings.jsonl").c_str(),
                                   c, out.c_str(), nullptr, 1) == SCICOE_ERR_DEGENERATE);
    scicoe_config_destroy(c);

    REQUIRE(scicoe_config_load(data("small.conf").c_str(), &c) == SCICOE_OK);
    CHECK(scicoe_cmd_simulate(c, (dir / "sim").string().c_str()) == SCICOE_OK);
    scicoe_config_destroy(c);
    const std::string log = (dir / "sim" / "train_log.csv").string();
    const char* logs[] = {log.c_str()};
    const auto table = (dir / "t.csv").string();
    CHECK(scicoe_cmd_analyze(logs, 1, table.c_str()) == SCICOE_OK);
    CHECK(scicoe_cmd_analyze(logs, 0, table.c_str()) == SCICOE_ERR_CONSISTENCY);
    CHECK(scicoe_cmd_rerun((dir / "sim" / "manifest.json").string().c_str(), (dir / "again").string().c_str()) ==
          SCICOE_OK);
    CHECK(slurp(log) == slurp((dir / "again" / "train_log.csv").string()));
}
