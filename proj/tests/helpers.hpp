#pragma once

#include "opidyn/matrix.hpp"

#include <Eigen/Eigenvalues>

#include <numeric>
#include <random>

namespace opidyn::test {

// --- worked matrices from the tutorial models --------------------------------

// French's 3-agent example: center node 2 is the most influential.
inline Matrix french_example() {
    Matrix w(3, 3);
    w << 0.5, 0.5, 0.0,
         1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0,
         0.0, 0.5, 0.5;
    return w;
}

// Two stubborn agents (source nodes) 1 and 3.
inline Matrix stubborn_example() {
    Matrix w(3, 3);
    w << 1.0, 0.0, 0.0,
         1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0,
         0.0, 0.0, 1.0;
    return w;
}

// The 4-agent Friedkin-Johnsen influence matrix; agent 3 is stubborn.
inline Matrix fj_example() {
    Matrix w(4, 4);
    w << 0.220, 0.120, 0.360, 0.300,
         0.147, 0.215, 0.344, 0.294,
         0.0, 0.0, 1.0, 0.0,
         0.090, 0.178, 0.446, 0.286;
    return w;
}

inline Vector fj_example_u() {
    Vector u(4);
    u << -1.0, -0.2, 0.6, 1.0;
    return u;
}

// --- random instance generators -----------------------------------------------

inline Matrix random_stochastic(std::mt19937& rng, int n, double keep_prob,
                                bool zero_diagonal = false) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix w = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            if (zero_diagonal && i == j) continue;
            if (unit(rng) < keep_prob) {
                w(i, j) = 0.05 + unit(rng);
                sum += w(i, j);
            }
        }
        if (sum == 0.0) {
            const int j = (zero_diagonal && n > 1) ? (i + 1) % n : i;
            w(i, j) = 1.0;
            sum = 1.0;
        }
        w.row(i) /= sum;
    }
    return w;
}

inline Matrix random_nonnegative(std::mt19937& rng, int n, double keep_prob) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (unit(rng) < keep_prob) a(i, j) = 0.05 + unit(rng);
        }
    }
    return a;
}

inline Matrix random_state(std::mt19937& rng, int n, int d, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> range(lo, hi);
    Matrix x(n, d);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) x(i, k) = range(rng);
    }
    return x;
}

// --- independent oracles --------------------------------------------------------

// Spectral radius through Eigen's dense eigensolver; used only as a test
// oracle, independent of the library's power iteration.
inline double eig_spectral_radius(const Matrix& m) {
    return Eigen::EigenSolver<Matrix>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

struct PowerClassification {
    bool convergent = false;
    bool consensus = false;
};

// Brute-force power-sequence probe: P_k = W^k is iterated plainly for a
// while and then by repeated squaring out to k > 1e5. Numeric convergence
// requires both Cauchy differences and ||P W - P|| to fall below tol (the
// latter rules out even-period aliasing under squaring).
inline PowerClassification classify_by_powers(const Matrix& w, double tol = 1e-9,
                                              double row_tol = 1e-7) {
    const auto consensus_of = [&](const Matrix& limit) {
        double spread = 0.0;
        for (Eigen::Index j = 0; j < limit.cols(); ++j) {
            spread = std::max(spread, limit.col(j).maxCoeff() - limit.col(j).minCoeff());
        }
        return spread <= row_tol;
    };

    Matrix p = w;
    for (int k = 1; k <= 2000; ++k) {
        Matrix next = p * w;
        if ((next - p).lpNorm<Eigen::Infinity>() < tol) {
            return {true, consensus_of(next)};
        }
        p = std::move(next);
    }
    for (int j = 0; j < 17; ++j) {  // exponents 2000 * 2^j, past 1e5
        Matrix next = p * p;
        if ((next - p).lpNorm<Eigen::Infinity>() < tol &&
            (next * w - next).lpNorm<Eigen::Infinity>() < tol) {
            return {true, consensus_of(next)};
        }
        p = std::move(next);
    }
    return {false, false};
}

// gcd of closed-walk lengths within a node set, by boolean matrix powers up
// to the component size; 0 when no closed walk exists.
inline long long closed_walk_gcd(const Matrix& adjacency, const std::vector<int>& component) {
    const int m = static_cast<int>(component.size());
    // restricted boolean adjacency: step[i][j] = arc component[i] -> component[j]
    std::vector<std::vector<char>> step(m, std::vector<char>(m, 0));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            if (adjacency(component[j], component[i]) > 0.0) step[i][j] = 1;
        }
    }
    std::vector<std::vector<char>> walk = step;
    long long gcd = 0;
    for (int length = 1; length <= m; ++length) {
        if (length > 1) {
            std::vector<std::vector<char>> next(m, std::vector<char>(m, 0));
            for (int i = 0; i < m; ++i) {
                for (int k = 0; k < m; ++k) {
                    if (!walk[i][k]) continue;
                    for (int j = 0; j < m; ++j) {
                        if (step[k][j]) next[i][j] = 1;
                    }
                }
            }
            walk = std::move(next);
        }
        for (int v = 0; v < m; ++v) {
            if (walk[v][v]) gcd = std::gcd(gcd, static_cast<long long>(length));
        }
    }
    return gcd;
}

}  // namespace opidyn::test
