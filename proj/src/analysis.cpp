#include "opidyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace opidyn {

namespace {

std::string node_set_tag(const std::vector<int>& nodes) {
    std::ostringstream out;
    out << '{';
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i > 0) out << ',';
        out << nodes[i] + 1;  // 1-based in human-facing tags
    }
    out << '}';
    return out.str();
}

struct ClosedComponents {
    std::vector<ClosedComponentInfo> infos;
    const ClosedComponentInfo* first_periodic = nullptr;
};

ClosedComponents closed_components_of(const DirectedWeightedGraph& g,
                                      const StrongComponentDecomposition& scc) {
    ClosedComponents result;
    for (std::size_t c = 0; c < scc.components.size(); ++c) {
        if (!scc.closed[c]) continue;
        const ComponentPeriod period = component_period(g, scc.components[c]);
        result.infos.push_back({scc.components[c], period.period, period.has_cycle});
    }
    for (const auto& info : result.infos) {
        if (info.period > 1) {
            result.first_periodic = &info;
            break;
        }
    }
    return result;
}

// Index helpers for block decompositions: positions[i] = rank of agent i
// within its block.
std::vector<int> block_positions(const std::vector<int>& block, int n) {
    std::vector<int> pos(n, -1);
    for (std::size_t r = 0; r < block.size(); ++r) pos[block[r]] = static_cast<int>(r);
    return pos;
}

Matrix submatrix(const Matrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
    Matrix out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
    }
    return out;
}

Matrix subrows(const Matrix& m, const std::vector<int>& rows) {
    Matrix out(rows.size(), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
    return out;
}

}  // namespace

ConvergenceVerdict degroot_verdict(const StochasticMatrix& w) {
    const DirectedWeightedGraph g = graph_from_matrix(w.values());
    const StrongComponentDecomposition scc = strong_components(g);
    const ClosedComponents closed = closed_components_of(g, scc);

    ConvergenceVerdict verdict;
    verdict.closed_components = closed.infos;
    if (closed.first_periodic != nullptr) {
        verdict.convergent = false;
        verdict.consensus = false;
        verdict.reason = "closed-component-periodic:" + node_set_tag(closed.first_periodic->nodes);
        return verdict;
    }
    verdict.convergent = true;
    if (closed.infos.size() == 1) {
        verdict.consensus = true;
        verdict.reason = "quasi-strong-aperiodic";
    } else {
        verdict.consensus = false;
        std::string tag = "multiple-closed-components-aperiodic:";
        for (const auto& info : closed.infos) tag += node_set_tag(info.nodes);
        verdict.reason = tag;
    }
    return verdict;
}

ConvergenceVerdict abelson_verdict(const SquareNonnegativeMatrix& a) {
    const DirectedWeightedGraph g = graph_from_matrix(a.values());
    const StrongComponentDecomposition scc = strong_components(g);
    const ClosedComponents closed = closed_components_of(g, scc);

    ConvergenceVerdict verdict;
    verdict.convergent = true;  // the Laplacian flow always converges
    verdict.closed_components = closed.infos;
    if (closed.infos.size() == 1) {
        verdict.consensus = true;
        verdict.reason = "quasi-strong";
    } else {
        verdict.consensus = false;
        std::string tag = "multiple-closed-components:";
        for (const auto& info : closed.infos) tag += node_set_tag(info.nodes);
        verdict.reason = tag;
    }
    return verdict;
}

CentralityResult french_social_power(const StochasticMatrix& w) {
    const ConvergenceVerdict verdict = degroot_verdict(w);
    if (!verdict.consensus) {
        throw AnalyticalRefusal("social power undefined: consensus not guaranteed (" +
                                verdict.reason + ")");
    }
    return {"french-social-power", left_fixed_vector(w).weights, std::nullopt};
}

CentralityResult abelson_social_power(const SquareNonnegativeMatrix& a) {
    const RootReport roots = roots_and_quasi_strong(graph_from_matrix(a.values()));
    if (!roots.quasi_strong) {
        throw AnalyticalRefusal("social power undefined: graph is not quasi-strongly connected");
    }
    return {"french-social-power", laplacian_left_null(laplacian_of(a)).weights, std::nullopt};
}

PDependencePartition classify_p_dependence(const DirectedWeightedGraph& g,
                                           const std::vector<int>& prejudiced) {
    PDependencePartition partition;
    partition.prejudiced = prejudiced;
    std::sort(partition.prejudiced.begin(), partition.prejudiced.end());
    partition.p_dependent = reachable_from(g, partition.prejudiced);
    std::vector<char> dependent(g.node_count(), 0);
    for (int v : partition.p_dependent) dependent[v] = 1;
    for (int v = 0; v < g.node_count(); ++v) {
        if (!dependent[v]) partition.p_independent.push_back(v);
    }
    return partition;
}

std::vector<int> prejudiced_from_gamma(const Vector& gamma) {
    std::vector<int> prejudiced;
    for (Eigen::Index i = 0; i < gamma.size(); ++i) {
        if (gamma(i) > 0.0) prejudiced.push_back(static_cast<int>(i));
    }
    return prejudiced;
}

std::vector<int> prejudiced_from_lambda(const Vector& lambda) {
    std::vector<int> prejudiced;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) < 1.0 - 1e-12) prejudiced.push_back(static_cast<int>(i));
    }
    return prejudiced;
}

TaylorOutcome taylor_stability_and_final(const SquareNonnegativeMatrix& a, const Vector& gamma,
                                         const Matrix& u, const Matrix* x2_limit) {
    const int n = a.size();
    if (gamma.size() != n || u.rows() != n) {
        throw std::invalid_argument("taylor_stability_and_final: dimension mismatch");
    }
    const DirectedWeightedGraph g = graph_from_matrix(a.values());
    TaylorOutcome outcome;
    outcome.partition = classify_p_dependence(g, prejudiced_from_gamma(gamma));
    const auto& dep = outcome.partition.p_dependent;
    const auto& indep = outcome.partition.p_independent;
    outcome.stable = indep.empty() && !dep.empty();
    if (dep.empty()) return outcome;  // Gamma = 0: plain Abelson, no mixing matrix

    if (!indep.empty()) {
        if (x2_limit == nullptr) {
            outcome.final_available = false;
        } else if (x2_limit->rows() != static_cast<Eigen::Index>(indep.size()) ||
                   x2_limit->cols() != u.cols()) {
            throw std::invalid_argument("taylor_stability_and_final: x2_limit must be " +
                                        std::to_string(indep.size()) + " x " +
                                        std::to_string(u.cols()));
        }
    }

    const Matrix l = laplacian_of(a).values();
    Matrix z = submatrix(l, dep, dep);
    for (std::size_t r = 0; r < dep.size(); ++r) z(r, r) += gamma(dep[r]);

    // rhs blocks: Gamma^11 for the prejudices, -L^12 (the nonnegative block)
    // for the P-independent limits. Stochasticity of the result is asserted
    // by the tests.
    Matrix rhs = Matrix::Zero(dep.size(), n);
    for (std::size_t r = 0; r < dep.size(); ++r) rhs(r, r) = gamma(dep[r]);
    const Matrix l12 = submatrix(l, dep, indep);
    rhs.rightCols(indep.size()) = -l12;

    try {
        outcome.mixing = m_matrix_solve(z, rhs).x;
    } catch (const std::runtime_error& e) {
        throw std::logic_error(std::string("taylor_stability_and_final: L11+Gamma11 singular, "
                                           "which contradicts the stability theorem: ") +
                               e.what());
    }

    Matrix anchor(n, u.cols());
    anchor.topRows(dep.size()) = subrows(u, dep);
    if (!indep.empty()) {
        if (x2_limit == nullptr) return outcome;  // mixing computed, final not available
        anchor.bottomRows(indep.size()) = *x2_limit;
    }
    const Matrix x1 = outcome.mixing * anchor;
    outcome.final_opinions = Matrix::Zero(n, u.cols());
    for (std::size_t r = 0; r < dep.size(); ++r) outcome.final_opinions.row(dep[r]) = x1.row(r);
    for (std::size_t r = 0; r < indep.size(); ++r) {
        outcome.final_opinions.row(indep[r]) = x2_limit->row(r);
    }
    outcome.final_available = true;
    return outcome;
}

FjOutcome fj_stability_and_final(const StochasticMatrix& w, const Vector& lambda, const Matrix& u,
                                 const Matrix* c, const Matrix* x2_limit) {
    const int n = w.size();
    if (lambda.size() != n || u.rows() != n) {
        throw std::invalid_argument("fj_stability_and_final: dimension mismatch");
    }
    if ((lambda.array() == 1.0).all()) {
        throw AnalyticalRefusal("Lambda = I reduces the model to DeGroot; use degroot_verdict");
    }
    if (c != nullptr && !is_stochastic(*c)) {
        throw std::domain_error("fj_stability_and_final: C must be stochastic");
    }

    const DirectedWeightedGraph g = graph_from_matrix(w.values());
    FjOutcome outcome;
    outcome.partition = classify_p_dependence(g, prejudiced_from_lambda(lambda));
    const auto& dep = outcome.partition.p_dependent;
    const auto& indep = outcome.partition.p_independent;
    outcome.stable = indep.empty();

    const bool coupled = (c != nullptr && !c->isIdentity(0.0));
    if (coupled && !outcome.stable) {
        throw AnalyticalRefusal("topic-coupled fixed point requires asymptotic stability "
                                "(P-independent agents: " + node_set_tag(indep) + ")");
    }

    if (outcome.stable) {
        outcome.convergent = true;
    } else {
        const StochasticMatrix w22(submatrix(w.values(), indep, indep));
        const ConvergenceVerdict sub = degroot_verdict(w22);
        outcome.convergent = sub.convergent;
        if (!outcome.convergent) {
            outcome.reason = "p-independent-block-not-regular:" + sub.reason;
        }
    }

    if (dep.empty()) {
        // No agent is within 1e-12 of susceptibility < 1: the model behaves
        // like DeGroot and there is no control matrix.
        outcome.control = Matrix::Zero(0, n);
        return outcome;
    }

    // Control matrix V = (I - Lambda11 W11)^{-1} [I - Lambda11 | Lambda11 W12].
    Matrix z = -submatrix(w.values(), dep, dep);
    for (std::size_t r = 0; r < dep.size(); ++r) z.row(r) *= lambda(dep[r]);
    z += Matrix::Identity(dep.size(), dep.size());
    Matrix rhs = Matrix::Zero(dep.size(), n);
    for (std::size_t r = 0; r < dep.size(); ++r) rhs(r, r) = 1.0 - lambda(dep[r]);
    Matrix w12 = submatrix(w.values(), dep, indep);
    for (std::size_t r = 0; r < dep.size(); ++r) w12.row(r) *= lambda(dep[r]);
    rhs.rightCols(indep.size()) = w12;
    outcome.control = m_matrix_solve(z, rhs).x;

    if (!outcome.convergent) return outcome;

    if (!indep.empty()) {
        if (x2_limit == nullptr) return outcome;  // control computed, final unavailable
        if (x2_limit->rows() != static_cast<Eigen::Index>(indep.size()) ||
            x2_limit->cols() != u.cols()) {
            throw std::invalid_argument("fj_stability_and_final: x2_limit must be " +
                                        std::to_string(indep.size()) + " x " +
                                        std::to_string(u.cols()));
        }
    }

    if (coupled) {
        // X = Lambda W X C^T + (I - Lambda) U; contraction with factor
        // rho(Lambda W) < 1 in the stable case.
        const Matrix& wm = w.values();
        const Matrix anchored = (Vector::Ones(n) - lambda).asDiagonal() * u;
        Matrix x = u;
        for (long iter = 0; iter < 1000000; ++iter) {
            Matrix next = lambda.asDiagonal() * (wm * x) * c->transpose() + anchored;
            const double diff = (next - x).lpNorm<Eigen::Infinity>();
            x = std::move(next);
            if (diff < 1e-12) break;
        }
        outcome.final_opinions = std::move(x);
        outcome.final_available = true;
        return outcome;
    }

    Matrix anchor(n, u.cols());
    anchor.topRows(dep.size()) = subrows(u, dep);
    if (!indep.empty()) anchor.bottomRows(indep.size()) = *x2_limit;
    const Matrix x1 = outcome.control * anchor;
    outcome.final_opinions = Matrix::Zero(n, u.cols());
    for (std::size_t r = 0; r < dep.size(); ++r) outcome.final_opinions.row(dep[r]) = x1.row(r);
    for (std::size_t r = 0; r < indep.size(); ++r) {
        outcome.final_opinions.row(indep[r]) = x2_limit->row(r);
    }
    outcome.final_available = true;
    return outcome;
}

CentralityResult influence_centrality(const StochasticMatrix& w, const Vector& lambda) {
    const int n = w.size();
    if (lambda.size() != n) {
        throw std::invalid_argument("influence_centrality: lambda length mismatch");
    }
    const DirectedWeightedGraph g = graph_from_matrix(w.values());
    const PDependencePartition partition =
        classify_p_dependence(g, prejudiced_from_lambda(lambda));
    if (!partition.p_independent.empty()) {
        throw AnalyticalRefusal("influence centrality undefined: model is not asymptotically "
                                "stable (P-independent agents: " +
                                node_set_tag(partition.p_independent) + ")");
    }
    // c = n^{-1} V^T 1 with V = (I - Lambda W)^{-1} (I - Lambda); solve the
    // transposed M-matrix system instead of forming V.
    const Matrix z = Matrix::Identity(n, n) - Matrix(lambda.asDiagonal()) * w.values();
    const Vector y = m_matrix_solve(z.transpose(), Vector::Ones(n)).x;
    Vector weights = (Vector::Ones(n) - lambda).cwiseProduct(y) / static_cast<double>(n);

    std::optional<double> parameter;
    if (n > 0 && (lambda.array() == lambda(0)).all()) parameter = lambda(0);
    return {"influence-centrality", std::move(weights), parameter};
}

CentralityResult pagerank(const StochasticMatrix& w, double damping, PageRankMode mode) {
    if (!(damping > 0.0) || !(damping < 1.0)) {
        throw std::domain_error("pagerank: damping must lie in (0,1), got " +
                                std::to_string(damping));
    }
    const int n = w.size();
    Vector weights;
    if (mode == PageRankMode::kClosedForm) {
        const Matrix z = Matrix::Identity(n, n) - (1.0 - damping) * w.values();
        weights = m_matrix_solve(z.transpose(),
                                 Vector::Constant(n, damping / static_cast<double>(n))).x;
    } else {
        const Matrix wt = w.values().transpose();
        const Vector teleport = Vector::Constant(n, damping / static_cast<double>(n));
        weights = Vector::Constant(n, 1.0 / static_cast<double>(n));
        for (long iter = 0; iter < 1000000; ++iter) {
            Vector next = (1.0 - damping) * (wt * weights) + teleport;
            const double diff = (next - weights).lpNorm<Eigen::Infinity>();
            weights = std::move(next);
            if (diff < 1e-12) break;
        }
    }
    return {"pagerank", std::move(weights), damping};
}

const char* to_string(ContainmentStatus status) {
    switch (status) {
        case ContainmentStatus::kCertified: return "certified";
        case ContainmentStatus::kSupportTestPassed: return "support-test-passed";
        case ContainmentStatus::kViolated: return "violated";
    }
    return "unknown";
}

ContainmentReport containment_check(const Matrix& x_final, const Matrix& leaders,
                                    const Matrix* certificate) {
    if (x_final.cols() != leaders.cols()) {
        throw std::invalid_argument("containment_check: dimension mismatch between agents and leaders");
    }
    const Eigen::Index d = x_final.cols();
    ContainmentReport report;

    if (certificate != nullptr) {
        const Matrix& m = *certificate;
        const bool shape_ok = (m.rows() == x_final.rows() && m.cols() == leaders.rows());
        bool stochastic_ok = shape_ok && (m.array() >= -1e-9).all();
        if (stochastic_ok) {
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                if (std::abs(m.row(i).sum() - 1.0) > kRowSumTol) stochastic_ok = false;
            }
        }
        if (stochastic_ok &&
            (x_final - m * leaders).lpNorm<Eigen::Infinity>() <= 1e-8) {
            report.status = ContainmentStatus::kCertified;
            report.detail = "algebraic certificate: x = M s with row-stochastic M";
            return report;
        }
    }

    if (d == 1) {
        const double lo = leaders.col(0).minCoeff();
        const double hi = leaders.col(0).maxCoeff();
        for (Eigen::Index i = 0; i < x_final.rows(); ++i) {
            const double v = x_final(i, 0);
            if (v < lo - 1e-8 || v > hi + 1e-8) {
                report.status = ContainmentStatus::kViolated;
                report.detail = "agent " + std::to_string(i + 1) + " at " + std::to_string(v) +
                                " outside [" + std::to_string(lo) + "," + std::to_string(hi) + "]";
                return report;
            }
        }
        report.status = ContainmentStatus::kCertified;
        report.detail = "interval check";
        return report;
    }

    // Directional support test: necessary condition, fixed seed for
    // reproducible reports.
    std::mt19937 rng(0xC0FFEE);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 256; ++trial) {
        Vector direction(d);
        do {
            for (Eigen::Index k = 0; k < d; ++k) direction(k) = gauss(rng);
        } while (direction.norm() == 0.0);
        direction.normalize();
        const double hull_support = (leaders * direction).maxCoeff();
        const Vector projected = x_final * direction;
        for (Eigen::Index i = 0; i < projected.size(); ++i) {
            if (projected(i) - hull_support > 1e-8) {
                report.status = ContainmentStatus::kViolated;
                report.detail = "agent " + std::to_string(i + 1) +
                                " exceeds the hull support in the witness direction";
                report.witness = direction;
                return report;
            }
        }
    }
    report.status = ContainmentStatus::kSupportTestPassed;
    report.detail = "256-direction support test";
    return report;
}

double nash_residual(const StochasticMatrix& w, const Vector& lambda, const Vector& u,
                     const Vector& x) {
    const int n = w.size();
    if (lambda.size() != n || u.size() != n || x.size() != n) {
        throw std::invalid_argument("nash_residual: dimension mismatch");
    }
    const Vector best_response = lambda.cwiseProduct(w.values() * x) +
                                 (Vector::Ones(n) - lambda).cwiseProduct(u);
    return (x - best_response).lpNorm<Eigen::Infinity>();
}

}  // namespace opidyn
