#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace opidyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Row-sum tolerance used by every stochasticity check in the library.
inline constexpr double kRowSumTol = 1e-9;

// Raised when a quantity is only defined up to a one-dimensional eigenspace
// and the input has a larger one (e.g. several essential classes).
class AmbiguityError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Square matrix with entries >= 0, checked exactly at construction.
class SquareNonnegativeMatrix {
public:
    explicit SquareNonnegativeMatrix(Matrix values);

    int size() const { return static_cast<int>(values_.rows()); }
    const Matrix& values() const { return values_; }

private:
    Matrix values_;
};

// Row-stochastic matrix. Rows must sum to 1 within kRowSumTol; after
// validation they are renormalized so that the stored row sums are 1
// exactly (idempotent: an already-normalized matrix is left untouched).
class StochasticMatrix {
public:
    explicit StochasticMatrix(Matrix values);

    int size() const { return static_cast<int>(values_.rows()); }
    const Matrix& values() const { return values_; }
    SquareNonnegativeMatrix as_nonnegative() const { return SquareNonnegativeMatrix(values_); }

private:
    Matrix values_;
};

// Row sums <= 1 + kRowSumTol. No renormalization.
class SubstochasticMatrix {
public:
    explicit SubstochasticMatrix(Matrix values);

    int size() const { return static_cast<int>(values_.rows()); }
    const Matrix& values() const { return values_; }

private:
    Matrix values_;
};

// Laplacian of a weighted graph: l_ij = -a_ij off-diagonal, diagonal is the
// negated off-diagonal row sum, so L*1 = 0 by construction. Built only
// through laplacian_of.
class LaplacianMatrix {
public:
    int size() const { return static_cast<int>(values_.rows()); }
    const Matrix& values() const { return values_; }

private:
    explicit LaplacianMatrix(Matrix values) : values_(std::move(values)) {}
    friend LaplacianMatrix laplacian_of(const SquareNonnegativeMatrix& a);
    Matrix values_;
};

struct SpectralEstimate {
    double value = 0.0;
    double residual = 0.0;  // achieved ||A v - rho v||_inf
    int iterations = 0;
    bool converged = false;
};

struct ProbabilityVector {
    Vector weights;
    double residual = 0.0;
};

struct MMatrixSolution {
    Matrix x;
    int clamped_entries = 0;  // negatives below 1e-9 magnitude zeroed (B >= 0 only)
};

LaplacianMatrix laplacian_of(const SquareNonnegativeMatrix& a);

// Dominant-modulus estimate by power iteration with a positive start vector.
// If the plain iteration stalls (imprimitive graphs make it oscillate), the
// matrix is shifted by +0.5*I and the iteration restarted; rho(A) is
// recovered from rho(A + 0.5 I) - 0.5. A non-converged estimate is returned
// with converged=false rather than thrown; the caller decides.
SpectralEstimate spectral_radius(const SquareNonnegativeMatrix& a,
                                 double tol = 1e-10, int max_iter = 20000);

// p with p^T W = p^T, p >= 0, sum 1. Solved exactly via the bordered system
// [(W^T - I) with last row replaced by 1^T] p = e_last. Throws AmbiguityError
// when the eigenvalue-1 eigenspace is not one-dimensional.
ProbabilityVector left_fixed_vector(const StochasticMatrix& w);

// p with p^T L = 0, p >= 0, sum 1; AmbiguityError when dim ker L > 1.
ProbabilityVector laplacian_left_null(const LaplacianMatrix& l);

// e^{M t} by scaling-and-squaring with the degree-13 Pade approximant.
Matrix matrix_exponential(const Matrix& m, double t);

// X = Z^{-1} B via LU with partial pivoting; Z is expected to be a
// nonsingular M-matrix, so for B >= 0 the solution is nonnegative up to
// roundoff (tiny negatives are clamped and counted).
MMatrixSolution m_matrix_solve(const Matrix& z, const Matrix& b);

bool is_stochastic(const Matrix& a, double tol = kRowSumTol);
bool is_substochastic(const Matrix& a, double tol = kRowSumTol);

// Dimension of ker(M) by singular values below n * eps * sigma_max.
int null_space_dimension(const Matrix& m);

// Rescale rows to sum to 1, nudging the largest entry so the stored sum is
// exactly 1.0. Rows already summing to 1 within 1e-15 are left bit-identical,
// which makes the operation idempotent.
void renormalize_rows(Matrix& m);

}  // namespace opidyn
