#include "opidyn/io.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

namespace opidyn {

using nlohmann::json;

namespace {

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

double require_number(const json& value, const std::string& where) {
    if (!value.is_number()) {
        throw ParseError(where + ": expected a number, got " + std::string(value.type_name()));
    }
    const double d = value.get<double>();
    if (!std::isfinite(d)) throw ParseError(where + ": non-finite value");
    return d;
}

Matrix parse_matrix(const json& value, Eigen::Index rows, Eigen::Index cols,
                    const std::string& where, bool require_nonnegative) {
    if (!value.is_array() || static_cast<Eigen::Index>(value.size()) != rows) {
        throw ParseError(where + ": expected " + std::to_string(rows) + " rows");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = value[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ParseError(where + ": row " + std::to_string(i + 1) + " must have " +
                             std::to_string(cols) + " entries");
        }
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double v = require_number(row[static_cast<std::size_t>(j)],
                                            where + "[" + std::to_string(i + 1) + "][" +
                                                std::to_string(j + 1) + "]");
            if (require_nonnegative && v < 0.0) {
                throw ParseError(where + ": negative entry at (" + std::to_string(i + 1) + "," +
                                 std::to_string(j + 1) + ")");
            }
            m(i, j) = v;
        }
    }
    return m;
}

Vector parse_vector(const json& value, Eigen::Index size, const std::string& where) {
    if (!value.is_array() || static_cast<Eigen::Index>(value.size()) != size) {
        throw ParseError(where + ": expected an array of length " + std::to_string(size));
    }
    Vector v(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        v(i) = require_number(value[static_cast<std::size_t>(i)],
                              where + "[" + std::to_string(i + 1) + "]");
    }
    return v;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json nodes_to_json(const std::vector<int>& nodes) {
    json out = json::array();
    for (int v : nodes) out.push_back(v + 1);  // 1-based in documents
    return out;
}

// Renormalize rows that were meant to be stochastic. Drift up to 1e-9 is
// silent, up to 1e-6 warned, beyond that the matrix is treated as a general
// nonnegative matrix (stochastic consumers reject it later).
void apply_stochastic_intent(NetworkDocument& doc) {
    double max_drift = 0.0;
    for (Eigen::Index i = 0; i < doc.matrix.rows(); ++i) {
        max_drift = std::max(max_drift, std::abs(doc.matrix.row(i).sum() - 1.0));
    }
    if (max_drift > 1e-6) return;
    if (max_drift > 1e-9) {
        doc.warnings.push_back("matrix row sums drift from 1 by up to " +
                               format_double(max_drift) + "; renormalized");
    }
    renormalize_rows(doc.matrix);
    doc.stochastic = true;
}

}  // namespace

StochasticMatrix NetworkDocument::require_stochastic() const {
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        const double sum = matrix.row(i).sum();
        if (std::abs(sum - 1.0) > 1e-6) {
            throw ParseError("matrix is not stochastic: row " + std::to_string(i + 1) +
                             " sums to " + format_double(sum));
        }
    }
    Matrix normalized = matrix;
    renormalize_rows(normalized);
    return StochasticMatrix(std::move(normalized));
}

NetworkDocument load_network(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("document must be a JSON object");

    if (!doc.contains("schema_version") || doc["schema_version"] != "1") {
        throw ParseError("schema_version must be \"1\"");
    }
    if (!doc.contains("n") || !doc["n"].is_number_integer() || doc["n"].get<int>() <= 0) {
        throw ParseError("n must be a positive integer");
    }
    NetworkDocument out;
    out.n = doc["n"].get<int>();
    if (doc.contains("d")) {
        if (!doc["d"].is_number_integer() || doc["d"].get<int>() < 1) {
            throw ParseError("d must be an integer >= 1");
        }
        out.d = doc["d"].get<int>();
    }

    const bool has_matrix = doc.contains("matrix");
    const bool has_arcs = doc.contains("arcs");
    if (has_matrix == has_arcs) {
        throw ParseError("exactly one of \"matrix\" or \"arcs\" is required");
    }
    if (has_matrix) {
        out.matrix = parse_matrix(doc["matrix"], out.n, out.n, "matrix", true);
    } else {
        out.from_arcs = true;
        out.matrix = Matrix::Zero(out.n, out.n);
        if (!doc["arcs"].is_array()) throw ParseError("arcs must be an array");
        std::set<std::pair<int, int>> seen;
        std::size_t index = 0;
        for (const json& arc : doc["arcs"]) {
            ++index;
            const std::string where = "arcs[" + std::to_string(index) + "]";
            if (!arc.is_object() || !arc.contains("from") || !arc.contains("to") ||
                !arc.contains("weight")) {
                throw ParseError(where + ": expected {from, to, weight}");
            }
            if (!arc["from"].is_number_integer() || !arc["to"].is_number_integer()) {
                throw ParseError(where + ": from/to must be integers");
            }
            const int from = arc["from"].get<int>();
            const int to = arc["to"].get<int>();
            if (from < 1 || from > out.n || to < 1 || to > out.n) {
                throw ParseError(where + ": node index outside 1.." + std::to_string(out.n));
            }
            const double weight = require_number(arc["weight"], where + ".weight");
            if (!(weight > 0.0)) throw ParseError(where + ": weight must be positive");
            if (!seen.insert({from, to}).second) {
                throw ParseError(where + ": duplicate arc (" + std::to_string(from) + "," +
                                 std::to_string(to) + ")");
            }
            out.matrix(to - 1, from - 1) = weight;  // arc j -> i sets w_ij
        }
    }
    apply_stochastic_intent(out);

    if (doc.contains("lambda")) {
        Vector lambda = parse_vector(doc["lambda"], out.n, "lambda");
        for (Eigen::Index i = 0; i < lambda.size(); ++i) {
            if (lambda(i) < 0.0 || lambda(i) > 1.0) {
                throw ParseError("lambda out of [0,1] at entry " + std::to_string(i + 1));
            }
        }
        out.lambda = std::move(lambda);
    }
    if (doc.contains("gamma")) {
        Vector gamma = parse_vector(doc["gamma"], out.n, "gamma");
        for (Eigen::Index i = 0; i < gamma.size(); ++i) {
            if (gamma(i) < 0.0) {
                throw ParseError("gamma must be nonnegative at entry " + std::to_string(i + 1));
            }
        }
        out.gamma = std::move(gamma);
    }
    if (doc.contains("u")) out.u = parse_matrix(doc["u"], out.n, out.d, "u", false);
    if (doc.contains("x0")) out.x0 = parse_matrix(doc["x0"], out.n, out.d, "x0", false);
    if (doc.contains("C")) {
        Matrix c = parse_matrix(doc["C"], out.d, out.d, "C", true);
        for (Eigen::Index i = 0; i < c.rows(); ++i) {
            const double drift = std::abs(c.row(i).sum() - 1.0);
            if (drift > 1e-6) {
                throw ParseError("C is not stochastic: row " + std::to_string(i + 1) +
                                 " sums to " + format_double(c.row(i).sum()));
            }
            if (drift > 1e-9) {
                out.warnings.push_back("C row " + std::to_string(i + 1) +
                                       " renormalized (drift " + format_double(drift) + ")");
            }
        }
        renormalize_rows(c);
        out.c = std::move(c);
    }
    if (doc.contains("sources")) {
        const json& sources = doc["sources"];
        if (!sources.is_object() || !sources.contains("B") || !sources.contains("s")) {
            throw ParseError("sources must be an object {B, s}");
        }
        if (!sources["B"].is_array() || sources["B"].empty() ||
            !sources["B"][0].is_array()) {
            throw ParseError("sources.B must be an n x m array");
        }
        const auto m = static_cast<Eigen::Index>(sources["B"][0].size());
        if (m < 1) throw ParseError("sources.B must have at least one column");
        out.sources_b = parse_matrix(sources["B"], out.n, m, "sources.B", true);
        out.sources_s = parse_matrix(sources["s"], m, out.d, "sources.s", false);
    }
    return out;
}

std::string save_network(const NetworkDocument& doc) {
    json out;
    out["schema_version"] = "1";
    out["n"] = doc.n;
    out["d"] = doc.d;
    if (doc.from_arcs) {
        json arcs = json::array();
        for (Eigen::Index from = 0; from < doc.matrix.cols(); ++from) {
            for (Eigen::Index to = 0; to < doc.matrix.rows(); ++to) {
                const double w = doc.matrix(to, from);
                if (w > 0.0) {
                    arcs.push_back({{"from", from + 1}, {"to", to + 1}, {"weight", w}});
                }
            }
        }
        out["arcs"] = std::move(arcs);
    } else {
        out["matrix"] = matrix_to_json(doc.matrix);
    }
    if (doc.lambda) out["lambda"] = vector_to_json(*doc.lambda);
    if (doc.gamma) out["gamma"] = vector_to_json(*doc.gamma);
    if (doc.u) out["u"] = matrix_to_json(*doc.u);
    if (doc.x0) out["x0"] = matrix_to_json(*doc.x0);
    if (doc.c) out["C"] = matrix_to_json(*doc.c);
    if (doc.sources_b) {
        out["sources"] = {{"B", matrix_to_json(*doc.sources_b)},
                          {"s", matrix_to_json(*doc.sources_s)}};
    }
    return out.dump(2) + "\n";
}

std::string render_report(const AnalysisReport& report) {
    json out;
    out["n"] = report.n;
    out["model"] = report.model;
    json components = json::array();
    for (std::size_t c = 0; c < report.components.size(); ++c) {
        json entry;
        entry["nodes"] = nodes_to_json(report.components[c]);
        entry["closed"] = static_cast<bool>(report.closed[c]);
        if (c < report.periods.size()) {
            entry["period"] = report.periods[c].period;
            entry["has_cycle"] = report.periods[c].has_cycle;
        }
        components.push_back(std::move(entry));
    }
    out["components"] = std::move(components);
    out["roots"] = nodes_to_json(report.roots);
    out["quasi_strong"] = report.quasi_strong;
    out["sources"] = nodes_to_json(report.sources);
    if (report.verdict) {
        out["convergent"] = report.verdict->convergent;
        out["consensus"] = report.verdict->consensus;
        out["reason"] = report.verdict->reason;
    }
    if (report.social_power) {
        out["social_power"] = vector_to_json(report.social_power->weights);
    }
    if (report.partition) {
        out["prejudiced"] = nodes_to_json(report.partition->prejudiced);
        out["p_dependent"] = nodes_to_json(report.partition->p_dependent);
        out["p_independent"] = nodes_to_json(report.partition->p_independent);
    }
    if (report.stable) out["stable"] = *report.stable;
    if (report.final_opinions) out["final_opinions"] = matrix_to_json(*report.final_opinions);
    if (!report.seed_note.empty()) out["seed_note"] = report.seed_note;
    return out.dump(2) + "\n";
}

std::string render_centrality(const CentralityResult& result, const std::string& seed_note) {
    json out;
    out["method"] = result.method;
    out["weights"] = vector_to_json(result.weights);
    if (result.parameter) out["parameter"] = *result.parameter;
    if (!seed_note.empty()) out["seed_note"] = seed_note;
    return out.dump(2) + "\n";
}

std::string render_containment(const ContainmentReport& report, const Matrix& final_opinions,
                               const Matrix& leaders, const std::string& seed_note) {
    json out;
    out["status"] = to_string(report.status);
    out["detail"] = report.detail;
    if (report.witness.size() > 0) out["witness_direction"] = vector_to_json(report.witness);
    out["final_opinions"] = matrix_to_json(final_opinions);
    out["leaders"] = matrix_to_json(leaders);
    if (!seed_note.empty()) out["seed_note"] = seed_note;
    return out.dump(2) + "\n";
}

std::string save_trajectory(const Trajectory& traj) {
    if (traj.states.empty()) throw std::invalid_argument("save_trajectory: empty trajectory");
    const Eigen::Index n = traj.states.front().rows();
    const Eigen::Index d = traj.states.front().cols();
    std::string out = "t";
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < d; ++k) {
            out += ",agent_" + std::to_string(i + 1) + "_topic_" + std::to_string(k + 1);
        }
    }
    out += "\n";
    for (std::size_t row = 0; row < traj.states.size(); ++row) {
        out += format_double(traj.times[row]);
        const Matrix& state = traj.states[row];
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index k = 0; k < d; ++k) {
                out += ",";
                out += format_double(state(i, k));
            }
        }
        out += "\n";
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::random_device rd;
    fs::path temp;
    do {
        temp = parent / (path.filename().string() + ".tmp" + std::to_string(rd()));
    } while (fs::exists(temp));
    {
        std::ofstream stream(temp, std::ios::binary | std::ios::trunc);
        if (!stream) throw std::runtime_error("cannot open " + temp.string() + " for writing");
        stream << content;
        stream.flush();
        if (!stream) {
            std::error_code ec;
            fs::remove(temp, ec);
            throw std::runtime_error("write failed for " + temp.string());
        }
    }
    std::error_code ec;
    fs::rename(temp, path, ec);
    if (ec) {
        fs::remove(temp);
        throw std::runtime_error("cannot move " + temp.string() + " to " + path.string() + ": " +
                                 ec.message());
    }
}

}  // namespace opidyn
