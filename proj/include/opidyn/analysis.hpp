#pragma once

#include "opidyn/graph.hpp"
#include "opidyn/matrix.hpp"

#include <optional>
#include <string>
#include <vector>

namespace opidyn {

// Raised when a requested quantity is undefined for the given network
// (social power without consensus, influence centrality of an unstable
// system, ...). The message cites the structural reason.
class AnalyticalRefusal : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ClosedComponentInfo {
    std::vector<int> nodes;
    int period = 1;
    bool has_cycle = true;
};

struct ConvergenceVerdict {
    bool convergent = false;
    bool consensus = false;
    std::string reason;  // machine-readable tag citing the deciding components
    std::vector<ClosedComponentInfo> closed_components;
};

// Discrete-time criterion: convergent iff every closed strong component of
// G[W] is aperiodic; consensus iff the closed component is unique and
// aperiodic. Purely graph-theoretic.
ConvergenceVerdict degroot_verdict(const StochasticMatrix& w);

// Continuous-time criterion: always convergent; consensus iff G[A] is
// quasi-strongly connected.
ConvergenceVerdict abelson_verdict(const SquareNonnegativeMatrix& a);

struct CentralityResult {
    std::string method;  // "french-social-power" | "influence-centrality" | "pagerank"
    Vector weights;      // probability vector over agents
    std::optional<double> parameter;  // alpha or damping, when applicable
};

CentralityResult french_social_power(const StochasticMatrix& w);
CentralityResult abelson_social_power(const SquareNonnegativeMatrix& a);

struct PDependencePartition {
    std::vector<int> prejudiced;
    std::vector<int> p_dependent;    // prejudiced plus everything they reach
    std::vector<int> p_independent;  // complement
};

PDependencePartition classify_p_dependence(const DirectedWeightedGraph& g,
                                           const std::vector<int>& prejudiced);

std::vector<int> prejudiced_from_gamma(const Vector& gamma);    // gamma_i > 0
std::vector<int> prejudiced_from_lambda(const Vector& lambda);  // lambda_i < 1 - 1e-12

struct TaylorOutcome {
    bool stable = false;  // all agents P-dependent
    PDependencePartition partition;
    // Stochastic map from [u^1; x^2(inf)] to x^1(inf); rows are P-dependent
    // agents (ascending), columns P-dependent then P-independent agents.
    Matrix mixing;
    Matrix final_opinions;  // n x d, rows in original agent order
    bool final_available = false;
};

// Hurwitz verdict and fixed point of dx = -(L+Gamma)x + Gamma u. When
// P-independent agents exist their limit x^2(inf) must be supplied.
TaylorOutcome taylor_stability_and_final(const SquareNonnegativeMatrix& a, const Vector& gamma,
                                         const Matrix& u, const Matrix* x2_limit = nullptr);

struct FjOutcome {
    bool stable = false;      // all agents P-dependent
    bool convergent = false;  // stable, or the P-independent block is regular
    PDependencePartition partition;
    // Stochastic control map from [u^1; x^2(inf)] to x^1(inf); same row and
    // column convention as TaylorOutcome::mixing.
    Matrix control;
    Matrix final_opinions;
    bool final_available = false;
    std::string reason;  // cited when not convergent
};

// Schur verdict and fixed point of x(k+1) = Lambda W x(k) C^T + (I-Lambda)u.
// Refuses Lambda = I (that is the DeGroot model). Topic coupling C != I is
// supported in the stable case via fixed-point iteration.
FjOutcome fj_stability_and_final(const StochasticMatrix& w, const Vector& lambda, const Matrix& u,
                                 const Matrix* c = nullptr, const Matrix* x2_limit = nullptr);

// c = n^{-1} V^T 1 with V = (I - Lambda W)^{-1} (I - Lambda); requires the
// model asymptotically stable (all agents P-dependent).
CentralityResult influence_centrality(const StochasticMatrix& w, const Vector& lambda);

enum class PageRankMode { kClosedForm, kIterate };

CentralityResult pagerank(const StochasticMatrix& w, double damping,
                          PageRankMode mode = PageRankMode::kClosedForm);

enum class ContainmentStatus { kCertified, kSupportTestPassed, kViolated };

struct ContainmentReport {
    ContainmentStatus status = ContainmentStatus::kViolated;
    std::string detail;
    Vector witness;  // separating direction when violated (d > 1)
};

const char* to_string(ContainmentStatus status);

// Certifies that the rows of x_final lie in the convex hull of the leader
// rows. A supplied row-stochastic certificate with x_final = certificate *
// leaders proves containment exactly; otherwise d = 1 uses the interval
// check and d > 1 a 256-direction support test (necessary condition only).
ContainmentReport containment_check(const Matrix& x_final, const Matrix& leaders,
                                    const Matrix* certificate = nullptr);

// Max best-response residual of the quadratic opinion game at x:
// max_i |x_i - (lambda_i sum_j w_ij x_j + (1-lambda_i) u_i)|.
double nash_residual(const StochasticMatrix& w, const Vector& lambda, const Vector& u,
                     const Vector& x);

// Aggregated structural facts for reports.
struct AnalysisReport {
    int n = 0;
    std::string model;
    std::vector<std::vector<int>> components;
    std::vector<bool> closed;
    std::vector<ComponentPeriod> periods;
    std::vector<int> roots;
    bool quasi_strong = false;
    std::vector<int> sources;
    std::optional<ConvergenceVerdict> verdict;
    std::optional<CentralityResult> social_power;
    std::optional<PDependencePartition> partition;
    std::optional<bool> stable;
    std::optional<Matrix> final_opinions;
    std::string seed_note;
};

}  // namespace opidyn
