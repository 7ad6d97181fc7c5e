#include "opidyn/dynamics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace opidyn {

namespace {

void check_state(const Matrix& x, int n, const char* what) {
    if (x.rows() != n) {
        throw std::invalid_argument(std::string(what) + ": state has " + std::to_string(x.rows()) +
                                    " rows, expected " + std::to_string(n));
    }
    if (x.cols() < 1) {
        throw std::invalid_argument(std::string(what) + ": state needs at least one topic column");
    }
    if (!x.allFinite()) {
        throw std::invalid_argument(std::string(what) + ": non-finite entries in state");
    }
}

void check_diagonal(const Vector& diag, int n, const char* what, double lo, double hi) {
    if (diag.size() != n) {
        throw std::invalid_argument(std::string(what) + ": diagonal has length " +
                                    std::to_string(diag.size()) + ", expected " + std::to_string(n));
    }
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        if (!(diag(i) >= lo) || !(diag(i) <= hi)) {
            throw std::domain_error(std::string(what) + ": entry " + std::to_string(i + 1) +
                                    " = " + std::to_string(diag(i)) + " outside [" +
                                    std::to_string(lo) + "," + std::to_string(hi) + "]");
        }
    }
}

int step_count(double horizon, double dt) {
    if (horizon < 0.0) throw std::invalid_argument("simulate: horizon must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("simulate: dt must be positive");
    return static_cast<int>(std::floor(horizon / dt + 1e-9));
}

// Shared discrete loop: early stop on small steps, periodic-orbit detection
// on small two-step differences.
Trajectory discrete_simulate(std::string model, const Matrix& x0, int k_max, double tol,
                             const std::function<Matrix(const Matrix&)>& step) {
    if (k_max < 0) throw std::invalid_argument("simulate: k_max must be >= 0");
    Trajectory traj;
    traj.model = std::move(model);
    traj.times.push_back(0.0);
    traj.states.push_back(x0);
    traj.stop_reason = StopReason::kStepLimit;
    for (int k = 0; k < k_max; ++k) {
        Matrix next = step(traj.states.back());
        traj.times.push_back(static_cast<double>(k + 1));
        traj.states.push_back(std::move(next));
        const auto& x2 = traj.states[k + 1];
        const auto& x1 = traj.states[k];
        if ((x2 - x1).lpNorm<Eigen::Infinity>() < tol) {
            traj.stop_reason = StopReason::kConverged;
            break;
        }
        if (k >= 1 && (x2 - traj.states[k - 1]).lpNorm<Eigen::Infinity>() < tol) {
            traj.stop_reason = StopReason::kPeriodicOrbitSuspected;
            break;
        }
    }
    return traj;
}

// Classical RK4 on dX/dt = f(X); aborts on non-finite states.
Trajectory rk4_simulate(std::string model, const Matrix& x0, double horizon, double dt,
                        const std::function<Matrix(const Matrix&)>& f) {
    const int steps = step_count(horizon, dt);
    Trajectory traj;
    traj.model = std::move(model);
    traj.dt = dt;
    traj.times.push_back(0.0);
    traj.states.push_back(x0);
    traj.stop_reason = StopReason::kHorizonReached;
    for (int k = 0; k < steps; ++k) {
        const Matrix& x = traj.states.back();
        const Matrix k1 = f(x);
        const Matrix k2 = f(x + 0.5 * dt * k1);
        const Matrix k3 = f(x + 0.5 * dt * k2);
        const Matrix k4 = f(x + dt * k3);
        Matrix next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!next.allFinite()) {
            traj.stop_reason = StopReason::kNonFiniteAbort;
            break;
        }
        traj.times.push_back(static_cast<double>(k + 1) * dt);
        traj.states.push_back(std::move(next));
    }
    return traj;
}

}  // namespace

const char* to_string(StopReason reason) {
    switch (reason) {
        case StopReason::kConverged: return "converged";
        case StopReason::kStepLimit: return "step-limit";
        case StopReason::kPeriodicOrbitSuspected: return "periodic-orbit-suspected";
        case StopReason::kHorizonReached: return "horizon-reached";
        case StopReason::kNonFiniteAbort: return "non-finite-abort";
    }
    return "unknown";
}

TaylorModel::TaylorModel(SquareNonnegativeMatrix a_, Vector gamma_, Matrix u_)
    : a(std::move(a_)), gamma(std::move(gamma_)), u(std::move(u_)) {
    check_diagonal(gamma, a.size(), "TaylorModel gamma", 0.0,
                   std::numeric_limits<double>::infinity());
    check_state(u, a.size(), "TaylorModel u");
}

TaylorModel TaylorModel::from_sources(SquareNonnegativeMatrix a, const Matrix& b, const Matrix& s) {
    const int n = a.size();
    if (b.rows() != n) {
        throw std::invalid_argument("TaylorModel: B has " + std::to_string(b.rows()) +
                                    " rows, expected " + std::to_string(n));
    }
    if (b.cols() != s.rows()) {
        throw std::invalid_argument("TaylorModel: B has " + std::to_string(b.cols()) +
                                    " sources but s has " + std::to_string(s.rows()) + " rows");
    }
    if ((b.array() < 0.0).any()) {
        throw std::domain_error("TaylorModel: persuasibility matrix B must be nonnegative");
    }
    Vector gamma = b.rowwise().sum();
    Matrix u = Matrix::Zero(n, s.cols());
    for (int i = 0; i < n; ++i) {
        if (gamma(i) > 0.0) u.row(i) = (b.row(i) * s) / gamma(i);
    }
    return TaylorModel(std::move(a), std::move(gamma), std::move(u));
}

FriedkinJohnsenModel::FriedkinJohnsenModel(StochasticMatrix w_, Vector lambda_, Matrix u_,
                                           std::optional<Matrix> c_)
    : w(std::move(w_)), lambda(std::move(lambda_)), u(std::move(u_)), c(std::move(c_)) {
    check_diagonal(lambda, w.size(), "FriedkinJohnsenModel lambda", 0.0, 1.0);
    check_state(u, w.size(), "FriedkinJohnsenModel u");
    if (c && !is_stochastic(*c, kRowSumTol)) {
        throw std::domain_error("FriedkinJohnsenModel: topic coupling C must be stochastic");
    }
    if (c && (c->rows() != u.cols() || c->cols() != u.cols())) {
        throw std::invalid_argument("FriedkinJohnsenModel: C must be d x d with d = " +
                                    std::to_string(u.cols()));
    }
}

Matrix degroot_step(const StochasticMatrix& w, const Matrix& x) {
    check_state(x, w.size(), "degroot_step");
    return w.values() * x;
}

Trajectory degroot_simulate(const StochasticMatrix& w, const Matrix& x0, int k_max,
                            double early_stop_tol) {
    check_state(x0, w.size(), "degroot_simulate");
    const Matrix& m = w.values();
    return discrete_simulate("degroot", x0, k_max, early_stop_tol,
                             [&m](const Matrix& x) { return m * x; });
}

Trajectory abelson_simulate_linear(const SquareNonnegativeMatrix& a, const Matrix& x0,
                                   double horizon, double dt, OdeMethod method) {
    check_state(x0, a.size(), "abelson_simulate_linear");
    const Matrix l = laplacian_of(a).values();
    if (method == OdeMethod::kRk4) {
        return rk4_simulate("abelson", x0, horizon, dt,
                            [&l](const Matrix& x) { return Matrix(-l * x); });
    }
    const Matrix propagator = matrix_exponential(-l, dt);
    const int steps = step_count(horizon, dt);
    Trajectory traj;
    traj.model = "abelson";
    traj.dt = dt;
    traj.times.push_back(0.0);
    traj.states.push_back(x0);
    traj.stop_reason = StopReason::kHorizonReached;
    for (int k = 0; k < steps; ++k) {
        traj.times.push_back(static_cast<double>(k + 1) * dt);
        traj.states.push_back(propagator * traj.states.back());
    }
    return traj;
}

CouplingFunction coupling_by_name(const std::string& name) {
    if (name == "constant-1") {
        return [](double, double) { return 1.0; };
    }
    if (name == "inverse-quadratic") {
        return [](double a, double b) { return 1.0 / (1.0 + (a - b) * (a - b)); };
    }
    throw std::invalid_argument("unknown coupling function '" + name +
                                "' (built-ins: constant-1, inverse-quadratic)");
}

Trajectory abelson_simulate_nonlinear(const SquareNonnegativeMatrix& a, const CouplingFunction& g,
                                      const Vector& x0, double horizon, double dt) {
    const int n = a.size();
    check_state(x0, n, "abelson_simulate_nonlinear");
    const Matrix& m = a.values();
    auto f = [&m, &g, n](const Matrix& x) {
        Matrix dx = Matrix::Zero(n, 1);
        for (int i = 0; i < n; ++i) {
            double sum = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i || m(i, j) == 0.0) continue;
                sum += m(i, j) * g(x(i, 0), x(j, 0)) * (x(j, 0) - x(i, 0));
            }
            dx(i, 0) = sum;
        }
        return dx;
    };
    return rk4_simulate("abelson-nonlinear", x0, horizon, dt, f);
}

Trajectory taylor_simulate(const SquareNonnegativeMatrix& a, const Vector& gamma, const Matrix& u,
                           const Matrix& x0, double horizon, double dt, OdeMethod method) {
    const int n = a.size();
    check_state(x0, n, "taylor_simulate");
    check_state(u, n, "taylor_simulate u");
    check_diagonal(gamma, n, "taylor_simulate gamma", 0.0,
                   std::numeric_limits<double>::infinity());
    if (u.cols() != x0.cols()) {
        throw std::invalid_argument("taylor_simulate: u and x0 topic dimensions differ");
    }
    Matrix k = laplacian_of(a).values();
    k.diagonal() += gamma;
    const Matrix forcing = gamma.asDiagonal() * u;

    auto rk4 = [&](bool fallback) {
        Trajectory traj = rk4_simulate("taylor", x0, horizon, dt, [&](const Matrix& x) {
            return Matrix(-k * x + forcing);
        });
        traj.used_rk4_fallback = fallback;
        return traj;
    };
    if (method == OdeMethod::kRk4) return rk4(false);

    // Affine exact step X(t+dt) = E X(t) + (I - E) xbar needs (L + Gamma)
    // nonsingular; singularity means P-independent agents exist.
    Matrix xbar;
    try {
        xbar = m_matrix_solve(k, forcing).x;
    } catch (const std::runtime_error&) {
        return rk4(true);
    }
    const Matrix propagator = matrix_exponential(-k, dt);
    const int steps = step_count(horizon, dt);
    Trajectory traj;
    traj.model = "taylor";
    traj.dt = dt;
    traj.times.push_back(0.0);
    traj.states.push_back(x0);
    traj.stop_reason = StopReason::kHorizonReached;
    for (int s = 0; s < steps; ++s) {
        traj.times.push_back(static_cast<double>(s + 1) * dt);
        traj.states.push_back(propagator * traj.states.back() + xbar - propagator * xbar);
    }
    return traj;
}

Matrix fj_step(const StochasticMatrix& w, const Vector& lambda, const Matrix& u, const Matrix& x,
               const Matrix* c) {
    const int n = w.size();
    check_state(x, n, "fj_step");
    check_state(u, n, "fj_step u");
    check_diagonal(lambda, n, "fj_step lambda", 0.0, 1.0);
    if (u.cols() != x.cols()) {
        throw std::invalid_argument("fj_step: u and x topic dimensions differ");
    }
    if (c != nullptr && (c->rows() != x.cols() || c->cols() != x.cols())) {
        throw std::invalid_argument("fj_step: C must be d x d with d = " +
                                    std::to_string(x.cols()));
    }
    Matrix mixed = w.values() * x;
    if (c != nullptr) mixed = mixed * c->transpose();
    return lambda.asDiagonal() * mixed + (Vector::Ones(n) - lambda).asDiagonal() * u;
}

Trajectory fj_simulate(const StochasticMatrix& w, const Vector& lambda, const Matrix& u,
                       const Matrix& x0, int k_max, double early_stop_tol, const Matrix* c) {
    check_state(x0, w.size(), "fj_simulate");
    return discrete_simulate("friedkin-johnsen", x0, k_max, early_stop_tol,
                             [&](const Matrix& x) { return fj_step(w, lambda, u, x, c); });
}

}  // namespace opidyn
