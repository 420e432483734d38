#pragma once
// File formats: JSONL verdicts, labels and embeddings, the reward report,
// the geometry CSV and the TrainLog CSV. Writes go through a temporary file
// and a rename so readers never see partial output.

#include "scicoe/core.hpp"
#include "scicoe/geometry.hpp"
#include "scicoe/sim.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace scicoe {

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);

/// Matrices keyed by question id, with ids kept in order of first appearance.
struct VerdictBatch {
    std::vector<std::string> order;
    std::map<std::string, EvalMatrix> matrices;
};

/// Lines {"q": id, "i": int, "j": int, "pass": 0|1}. Dimensions per question
/// are one past the largest index seen.
VerdictBatch parse_verdicts_jsonl(const std::string& text, const std::string& source = "<input>");

/// Lines {"q": id, "i": int, "correct": 0|1}; returns one bit vector per question.
std::map<std::string, std::vector<std::uint8_t>> parse_labels_jsonl(const std::string& text,
                                                                  const std::string& source = "<input>");

/// Lines {"j": int, "z": [reals]} with an optional "q". Lines without "q"
/// are stored under the empty id.
std::map<std::string, std::vector<Vec>> parse_embeddings_jsonl(const std::string& text,
                                                              const std::string& source = "<input>");

extern const std::vector<std::string> kTrainLogColumns;

std::string format_train_log(const TrainLog& log);
TrainLog parse_train_log(const std::string& text, const std::string& source = "<input>");

}  // namespace scicoe
