#include "scicoe/core.hpp"

#include "scicoe/error.hpp"

#include <cmath>

namespace scicoe {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DuplicateVerdict: return "DuplicateVerdict";
        case ErrorCode::IncompleteMatrix: return "IncompleteMatrix";
        case ErrorCode::IndexError: return "IndexError";
        case ErrorCode::EmptyBatch: return "EmptyBatch";
        case ErrorCode::DegenerateClustering: return "DegenerateClustering";
        case ErrorCode::EmptyPositiveSet: return "EmptyPositiveSet";
        case ErrorCode::MissingVerdict: return "MissingVerdict";
        case ErrorCode::JudgeProtocolError: return "JudgeProtocolError";
        case ErrorCode::NotLabeled: return "NotLabeled";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

void Question::validate() const {
    if (latent) {
        const double d = latent->difficulty;
        if (!std::isfinite(d) || d < 0.0 || d > 1.0) {
            throw Error(ErrorCode::ConfigError, "question " + id + ": difficulty outside [0,1]");
        }
    }
    if (labeled && !latent && text.empty()) {
        throw Error(ErrorCode::ConfigError, "question " + id + ": labeled without a reference answer");
    }
}

std::vector<bool> CorrectPartition::positive_mask() const {
    std::vector<bool> mask(size(), false);
    for (std::size_t i : positive) {
        mask.at(i) = true;
    }
    return mask;
}

EvalMatrix::EvalMatrix(std::size_t n_solutions, std::size_t n_strategies, std::vector<std::uint8_t> cells)
    : n_(n_solutions), m_(n_strategies), cells_(std::move(cells)) {
    if (n_ == 0 || m_ == 0) {
        throw Error(ErrorCode::EmptyBatch, "verification matrix needs N >= 1 and M >= 1");
    }
    if (cells_.size() != n_ * m_) {
        throw Error(ErrorCode::DimensionMismatch, "cell count does not match N*M");
    }
    for (auto c : cells_) {
        if (c > 1) {
            throw Error(ErrorCode::DomainError, "verification cells must be 0 or 1");
        }
    }
}

std::uint8_t EvalMatrix::at(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= m_) {
        throw Error(ErrorCode::IndexError, "cell (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
    }
    return cells_[i * m_ + j];
}

std::span<const std::uint8_t> EvalMatrix::row(std::size_t i) const {
    if (i >= n_) {
        throw Error(ErrorCode::IndexError, "solution index " + std::to_string(i) + " out of range");
    }
    return std::span<const std::uint8_t>(cells_).subspan(i * m_, m_);
}

std::vector<Verdict> EvalMatrix::flatten() const {
    std::vector<Verdict> out;
    out.reserve(cells_.size());
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < m_; ++j) {
            out.push_back({i, j, cells_[i * m_ + j]});
        }
    }
    return out;
}

EvalMatrix build_eval_matrix(std::size_t n, std::size_t m, std::span<const Verdict> verdicts) {
    if (n == 0 || m == 0) {
        throw Error(ErrorCode::EmptyBatch, "verification matrix needs N >= 1 and M >= 1");
    }
    std::vector<std::uint8_t> cells(n * m, 0);
    std::vector<bool> seen(n * m, false);
    for (const auto& v : verdicts) {
        if (v.solution >= n || v.strategy >= m) {
            throw Error(ErrorCode::IndexError, "verdict (" + std::to_string(v.solution) + "," +
                                                   std::to_string(v.strategy) + ") out of range");
        }
        if (v.pass > 1) {
            throw Error(ErrorCode::DomainError, "verdict bit must be 0 or 1");
        }
        const std::size_t k = v.solution * m + v.strategy;
        if (seen[k]) {
            throw Error(ErrorCode::DuplicateVerdict, "pair (" + std::to_string(v.solution) + "," +
                                                         std::to_string(v.strategy) + ") given twice");
        }
        seen[k] = true;
        cells[k] = v.pass;
    }
    for (std::size_t k = 0; k < seen.size(); ++k) {
        if (!seen[k]) {
            throw Error(ErrorCode::IncompleteMatrix, "missing verdict for pair (" + std::to_string(k / m) + "," +
                                                         std::to_string(k % m) + ")");
        }
    }
    return EvalMatrix(n, m, std::move(cells));
}

double pass_rate(const EvalMatrix& matrix, std::size_t solution_index) {
    const auto r = matrix.row(solution_index);
    std::size_t hits = 0;
    for (auto c : r) {
        hits += c;
    }
    return static_cast<double>(hits) / static_cast<double>(matrix.n_strategies());
}

std::vector<double> pass_rates(const EvalMatrix& matrix) {
    std::vector<double> out(matrix.n_solutions());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = pass_rate(matrix, i);
    }
    return out;
}

std::size_t select_best_of_n(const EvalMatrix& matrix) {
    // compare integer hit counts so ties are exact
    std::size_t best = 0;
    std::size_t best_hits = 0;
    for (std::size_t i = 0; i < matrix.n_solutions(); ++i) {
        std::size_t hits = 0;
        for (auto c : matrix.row(i)) {
            hits += c;
        }
        if (i == 0 || hits > best_hits) {
            best = i;
            best_hits = hits;
        }
    }
    return best;
}

}  // namespace scicoe
