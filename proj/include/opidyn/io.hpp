#pragma once

#include "opidyn/analysis.hpp"
#include "opidyn/dynamics.hpp"
#include "opidyn/matrix.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace opidyn {

class ParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Canonical network document (JSON). The weight matrix may be given either
// as a row-major "matrix" or as an "arcs" list of {from, to, weight} with
// 1-based indices; an arc from j to i sets w_ij, so weights line up with the
// influence convention. Matrices whose rows all sum to 1 within 1e-6 are
// renormalized on load (silently up to 1e-9 drift, with a warning beyond).
struct NetworkDocument {
    int n = 0;
    int d = 1;
    Matrix matrix;          // n x n, nonnegative; renormalized iff stochastic
    bool from_arcs = false; // which representation the source text used
    bool stochastic = false;
    std::optional<Vector> lambda;
    std::optional<Vector> gamma;
    std::optional<Matrix> u;          // n x d
    std::optional<Matrix> c;          // d x d, stochastic
    std::optional<Matrix> sources_b;  // n x m
    std::optional<Matrix> sources_s;  // m x d
    std::optional<Matrix> x0;         // n x d
    std::vector<std::string> warnings;

    // The matrix as a validated stochastic type; throws ParseError with the
    // offending row when the rows do not sum to 1 within 1e-6.
    StochasticMatrix require_stochastic() const;
    SquareNonnegativeMatrix nonnegative() const { return SquareNonnegativeMatrix(matrix); }
};

NetworkDocument load_network(const std::string& text);
std::string save_network(const NetworkDocument& doc);

std::string render_report(const AnalysisReport& report);
std::string render_centrality(const CentralityResult& result, const std::string& seed_note = "");
std::string render_containment(const ContainmentReport& report, const Matrix& final_opinions,
                               const Matrix& leaders, const std::string& seed_note = "");

// CSV with header t,agent_1_topic_1,...,agent_n_topic_d and 17 significant
// digits per value.
std::string save_trajectory(const Trajectory& traj);

// Write-to-temp-then-rename; either the full content lands or nothing does.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace opidyn
