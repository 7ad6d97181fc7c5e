#pragma once

#include "opidyn/matrix.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace opidyn {

inline constexpr double kDefaultEarlyStopTol = 1e-10;
inline constexpr double kDefaultDt = 0.01;

enum class StopReason {
    kConverged,
    kStepLimit,
    kPeriodicOrbitSuspected,
    kHorizonReached,
    kNonFiniteAbort,
};

const char* to_string(StopReason reason);

enum class OdeMethod { kExactExpm, kRk4 };

// Time-indexed opinion states. Rows of each state are agents, columns topics.
struct Trajectory {
    std::string model;
    std::vector<double> times;
    std::vector<Matrix> states;
    double dt = 0.0;  // 0 for discrete-time runs
    StopReason stop_reason = StopReason::kStepLimit;
    bool used_rk4_fallback = false;

    const Matrix& final_state() const { return states.back(); }
};

// --- model specifications ---------------------------------------------------

struct DeGrootModel {
    StochasticMatrix w;
};

struct AbelsonModel {
    SquareNonnegativeMatrix a;
    std::string coupling;  // empty = linear; otherwise a registry name
};

struct TaylorModel {
    SquareNonnegativeMatrix a;
    Vector gamma;  // diagonal of the prejudice-attachment matrix, >= 0
    Matrix u;      // n x d prejudices; rows with gamma_i = 0 are zero

    TaylorModel(SquareNonnegativeMatrix a_, Vector gamma_, Matrix u_);
    // Reduction of the communication-sources form: gamma_i = sum_m b_im,
    // u_i = (1/gamma_i) sum_m b_im s_m (u_i = 0 when gamma_i = 0).
    static TaylorModel from_sources(SquareNonnegativeMatrix a, const Matrix& b, const Matrix& s);
};

struct FriedkinJohnsenModel {
    StochasticMatrix w;
    Vector lambda;  // susceptibilities in [0,1]
    Matrix u;       // n x d prejudices
    std::optional<Matrix> c;  // d x d topic coupling, stochastic

    FriedkinJohnsenModel(StochasticMatrix w_, Vector lambda_, Matrix u_,
                         std::optional<Matrix> c_ = std::nullopt);
};

using ModelSpec = std::variant<DeGrootModel, AbelsonModel, TaylorModel, FriedkinJohnsenModel>;

// --- simulators ---------------------------------------------------------------

Matrix degroot_step(const StochasticMatrix& w, const Matrix& x);

Trajectory degroot_simulate(const StochasticMatrix& w, const Matrix& x0, int k_max,
                            double early_stop_tol = kDefaultEarlyStopTol);

Trajectory abelson_simulate_linear(const SquareNonnegativeMatrix& a, const Matrix& x0,
                                   double horizon, double dt = kDefaultDt,
                                   OdeMethod method = OdeMethod::kExactExpm);

using CouplingFunction = std::function<double(double, double)>;

// Built-in couplings: "constant-1", "inverse-quadratic" (1/(1+(a-b)^2)).
CouplingFunction coupling_by_name(const std::string& name);

Trajectory abelson_simulate_nonlinear(const SquareNonnegativeMatrix& a, const CouplingFunction& g,
                                      const Vector& x0, double horizon, double dt = kDefaultDt);

Trajectory taylor_simulate(const SquareNonnegativeMatrix& a, const Vector& gamma, const Matrix& u,
                           const Matrix& x0, double horizon, double dt = kDefaultDt,
                           OdeMethod method = OdeMethod::kExactExpm);

Matrix fj_step(const StochasticMatrix& w, const Vector& lambda, const Matrix& u, const Matrix& x,
               const Matrix* c = nullptr);

Trajectory fj_simulate(const StochasticMatrix& w, const Vector& lambda, const Matrix& u,
                       const Matrix& x0, int k_max, double early_stop_tol = kDefaultEarlyStopTol,
                       const Matrix* c = nullptr);

}  // namespace opidyn
