#include "scicoe/config.hpp"
#include "scicoe/error.hpp"
#include "scicoe/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace scicoe;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("config text round-trips") {
    SimConfig c;
    c.seed = 99;
    c.reward.tau = 0.65;
    c.reward.k = 2;
    c.env.oracle_judge = true;
    c.train.kl_coef = 0.1 / 3;
    c.schedule = parse_schedule("stage2:7");
    c.env.archetypes.pop_back();
    const auto text = format_config(c);
    const auto back = parse_config(text);
    CHECK(format_config(back) == text);
    CHECK(back.train.kl_coef == c.train.kl_coef);
    CHECK(back.env.archetypes.size() == c.env.archetypes.size());
}

TEST_CASE("config parsing handles comments and reports line numbers") {
    const auto c = parse_config("# heading\nseed = 5  # trailing\n\n tau=0.5\n");
    CHECK(c.seed == 5);
    CHECK(c.reward.tau == 0.5);
    try {
        parse_config("seed = 1\nbroken line\n");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK(code_of([] { parse_config("nope = 1\n"); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { parse_config("tau = abc\n"); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { parse_config("tau = 2\n"); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { parse_config("oracle_judge = maybe\n"); }) == ErrorCode::ConfigError);
}

TEST_CASE("archetype keys replace the built-in table") {
    const auto c = parse_config("archetype.1 = 0.9, 0.8, 0.1, 2, 0.2\narchetype.0 = 1, 1, 1, -1, 0.1\n");
    REQUIRE(c.env.archetypes.size() == 2);
    CHECK(c.env.archetypes[1].focus == 2);
    CHECK(c.env.archetypes[1].tnr_off == 0.1);
    CHECK(code_of([] { parse_config("archetype.0 = 1, 1, 1\n"); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { parse_config("archetype.2 = 1, 1, 1, -1, 0.1\n"); }) == ErrorCode::ConfigError);
}

TEST_CASE("config loads from a file and from a manifest") {
    const auto c = load_config_file(std::string(SCICOE_TEST_DATA) + "/small.conf");
    CHECK(c.seed == 3);
    CHECK(c.env.pool_size == 200);
    const auto dir = std::filesystem::path(SCICOE_TEST_TMP) / "config_io";
    std::filesystem::create_directories(dir);
    write_file_atomic((dir / "m.json").string(), R"({"command": "simulate", "config": {"seed": "11", "tau": "0.7"}})");
    const auto m = load_config_file((dir / "m.json").string());
    CHECK(m.seed == 11);
    CHECK(m.reward.tau == 0.7);
    CHECK(code_of([] { load_config_file("/nonexistent/x.conf"); }) == ErrorCode::IoError);
}

TEST_CASE("format_double is shortest round-trip") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.5) == "1.5");
    CHECK(format_double(1e-8) == "1e-08");
    const double x = 1.0 / 3;
    CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("verdict JSONL parsing") {
    const auto b = parse_verdicts_jsonl(R"({"q": "a", "i": 0, "j": 0, "pass": 1}
{"q": "a", "i": 0, "j": 1, "pass": false}

{"q": 7, "i": 0, "j": 0, "pass": true}
)");
    CHECK(b.order == std::vector<std::string>{"a", "7"});
    CHECK(b.matrices.at("a").n_strategies() == 2);
    CHECK(b.matrices.at("a").at(0, 1) == 0);
    CHECK(b.matrices.at("7").at(0, 0) == 1);

    CHECK(code_of([] { parse_verdicts_jsonl("{\"q\": \"a\", \"i\": 0, \"j\": 0, \"pass\": 1}\nnot json\n"); }) ==
          ErrorCode::ParseError);
    CHECK(code_of([] { parse_verdicts_jsonl("{\"q\": \"a\", \"i\": -1, \"j\": 0, \"pass\": 1}\n"); }) ==
          ErrorCode::ParseError);
    CHECK(code_of([] { parse_verdicts_jsonl("{\"q\": \"a\", \"i\": 0, \"j\": 0, \"pass\": 2}\n"); }) ==
          ErrorCode::ParseError);
    CHECK(code_of([] { parse_verdicts_jsonl(""); }) == ErrorCode::EmptyBatch);
    CHECK(code_of([] {
              parse_verdicts_jsonl("{\"q\": \"a\", \"i\": 0, \"j\": 0, \"pass\": 1}\n"
                                   "{\"q\": \"a\", \"i\": 1, \"j\": 1, \"pass\": 1}\n");
          }) == ErrorCode::IncompleteMatrix);
    try {
        parse_verdicts_jsonl("{\"q\": \"a\", \"i\": 0, \"j\": 0, \"pass\": 1}\n[1]\n", "v.jsonl");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("v.jsonl:2") != std::string::npos);
    }
}

TEST_CASE("label and embedding JSONL parsing") {
    const auto l = parse_labels_jsonl("{\"q\": \"a\", \"i\": 1, \"correct\": 0}\n{\"q\": \"a\", \"i\": 0, \"correct\": 1}\n");
    CHECK(l.at("a") == std::vector<std::uint8_t>{1, 0});
    CHECK(code_of([] { parse_labels_jsonl("{\"q\": \"a\", \"i\": 1, \"correct\": 0}\n"); }) ==
          ErrorCode::DimensionMismatch);
    const auto e = parse_embeddings_jsonl("{\"j\": 1, \"z\": [1, 2]}\n{\"j\": 0, \"z\": [3.5, 4]}\n");
    CHECK(e.at("").at(0) == Vec{3.5, 4});
    CHECK(code_of([] { parse_embeddings_jsonl("{\"j\": 0, \"z\": [\"x\"]}\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_embeddings_jsonl("{\"j\": 0, \"z\": [1]}\n{\"j\": 0, \"z\": [1]}\n"); }) ==
          ErrorCode::DuplicateVerdict);
}

TEST_CASE("train log CSV round-trips") {
    TrainLog log(2);
    log[1].step = 1;
    log[1].stage = Stage::Stage2;
    log[1].r_div = 1.0 / 7;
    log[1].grad_norm = 3e-300;
    const auto text = format_train_log(log);
    const auto back = parse_train_log(text);
    REQUIRE(back.size() == 2);
    CHECK(back[1].stage == Stage::Stage2);
    CHECK(back[1].r_div == log[1].r_div);
    CHECK(format_train_log(back) == text);
    CHECK(code_of([] { parse_train_log("a,b\n1,2\n"); }) == ErrorCode::SchemaMismatch);
    CHECK(code_of([&] { parse_train_log(text + "1,stage1,0\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("atomic writes leave no temporary files") {
    const auto dir = std::filesystem::path(SCICOE_TEST_TMP) / "atomic";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write_file_atomic((dir / "a.txt").string(), "one");
    write_file_atomic((dir / "a.txt").string(), "two");
    CHECK(read_file((dir / "a.txt").string()) == "two");
    CHECK(std::distance(std::filesystem::directory_iterator(dir), {}) == 1);
    CHECK(code_of([&] { write_file_atomic((dir / "missing" / "a.txt").string(), "x"); }) == ErrorCode::IoError);
}
