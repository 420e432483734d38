#pragma once
// Rollout-level domain types and the N x M verification matrix.
//
// Cell (i, j) holds the judge verdict for solution i under verification
// strategy j. Matrices are dense and immutable once built.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scicoe {

/// Latent description of a question used by the synthetic environment.
struct QuestionLatent {
    double difficulty = 0.5;    // in [0, 1]
    int topic = 0;
    int reference_answer = 0;   // hidden answer token
};

struct Question {
    std::string id;
    std::optional<QuestionLatent> latent;
    std::string text;           // free text payload; empty for synthetic questions
    bool labeled = false;

    /// Throws ConfigError if the invariants on difficulty/labels do not hold.
    void validate() const;
};

struct Solution {
    std::string question_id;
    std::size_t index = 0;
    int answer = 0;             // synthetic answer token
    std::string text;
};

struct Strategy {
    std::string question_id;
    std::size_t index = 0;
    int archetype = 0;
    std::uint64_t noise_seed = 0;
    std::string text;
};

enum class PartitionSource { GroundTruth, Consensus };

/// Split of solution indices into S+ and S-.
struct CorrectPartition {
    std::vector<std::size_t> positive;
    std::vector<std::size_t> negative;
    PartitionSource source = PartitionSource::GroundTruth;

    std::size_t size() const noexcept { return positive.size() + negative.size(); }
    /// Membership mask of length size(); true for members of S+.
    std::vector<bool> positive_mask() const;
};

struct Verdict {
    std::size_t solution = 0;
    std::size_t strategy = 0;
    std::uint8_t pass = 0;
};

class EvalMatrix {
public:
    /// cells are row-major, n_solutions * n_strategies entries, each 0 or 1.
    EvalMatrix(std::size_t n_solutions, std::size_t n_strategies, std::vector<std::uint8_t> cells);

    std::size_t n_solutions() const noexcept { return n_; }
    std::size_t n_strategies() const noexcept { return m_; }

    std::uint8_t at(std::size_t i, std::size_t j) const;
    std::span<const std::uint8_t> row(std::size_t i) const;
    std::span<const std::uint8_t> cells() const noexcept { return cells_; }

    /// Inverse of build_eval_matrix: one verdict per cell in row-major order.
    std::vector<Verdict> flatten() const;

    friend bool operator==(const EvalMatrix&, const EvalMatrix&) = default;

private:
    std::size_t n_;
    std::size_t m_;
    std::vector<std::uint8_t> cells_;
};

EvalMatrix build_eval_matrix(std::size_t n, std::size_t m, std::span<const Verdict> verdicts);

/// Fraction of strategies that pass solution i.
double pass_rate(const EvalMatrix& matrix, std::size_t solution_index);

std::vector<double> pass_rates(const EvalMatrix& matrix);

/// Solution with the highest pass rate; ties go to the lowest index.
std::size_t select_best_of_n(const EvalMatrix& matrix);

}  // namespace scicoe
