#include "opidyn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace opidyn {

namespace {

constexpr double kEps = 2.220446049250313e-16;  // 2^-52

void check_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument(std::string(what) + ": matrix must be square, got " +
                                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    if (m.rows() == 0) {
        throw std::invalid_argument(std::string(what) + ": matrix must be non-empty");
    }
}

void check_nonnegative(const Matrix& m, const char* what) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (!(m(i, j) >= 0.0)) {
                throw std::domain_error(std::string(what) + ": negative entry at (" +
                                        std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                        ") = " + std::to_string(m(i, j)));
            }
        }
    }
}

// Operator 1-norm (max column abs sum).
double one_norm(const Matrix& m) {
    return m.cwiseAbs().colwise().sum().maxCoeff();
}

SpectralEstimate power_iterate(const Matrix& a, double tol, int max_iter) {
    const Eigen::Index n = a.rows();
    Vector v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    SpectralEstimate best;
    best.residual = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= max_iter; ++k) {
        Vector w = a * v;
        const double rho = v.dot(w);  // Rayleigh quotient, v has unit 2-norm
        const double residual = (w - rho * v).lpNorm<Eigen::Infinity>();
        if (residual < best.residual) {
            best.value = rho;
            best.residual = residual;
            best.iterations = k;
        }
        if (residual <= tol) {
            best.converged = true;
            return best;
        }
        const double norm = w.norm();
        if (norm == 0.0) {
            // A^k v = 0 with a positive start forces nilpotency, so rho = 0.
            return {0.0, 0.0, k, true};
        }
        v = w / norm;
    }
    return best;
}

}  // namespace

SquareNonnegativeMatrix::SquareNonnegativeMatrix(Matrix values) : values_(std::move(values)) {
    check_square(values_, "SquareNonnegativeMatrix");
    check_nonnegative(values_, "SquareNonnegativeMatrix");
}

void renormalize_rows(Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        double sum = m.row(i).sum();
        if (std::abs(sum - 1.0) <= 1e-15) continue;
        m.row(i) /= sum;
        for (int pass = 0; pass < 4; ++pass) {
            const double drift = m.row(i).sum() - 1.0;
            if (drift == 0.0) break;
            Eigen::Index jmax;
            m.row(i).maxCoeff(&jmax);
            m(i, jmax) -= drift;
        }
    }
}

StochasticMatrix::StochasticMatrix(Matrix values) : values_(std::move(values)) {
    check_square(values_, "StochasticMatrix");
    check_nonnegative(values_, "StochasticMatrix");
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        const double sum = values_.row(i).sum();
        if (std::abs(sum - 1.0) > kRowSumTol) {
            throw std::domain_error("StochasticMatrix: row " + std::to_string(i + 1) +
                                    " sums to " + std::to_string(sum) + ", expected 1");
        }
    }
    renormalize_rows(values_);
}

SubstochasticMatrix::SubstochasticMatrix(Matrix values) : values_(std::move(values)) {
    check_square(values_, "SubstochasticMatrix");
    check_nonnegative(values_, "SubstochasticMatrix");
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        const double sum = values_.row(i).sum();
        if (sum > 1.0 + kRowSumTol) {
            throw std::domain_error("SubstochasticMatrix: row " + std::to_string(i + 1) +
                                    " sums to " + std::to_string(sum) + " > 1");
        }
    }
}

LaplacianMatrix laplacian_of(const SquareNonnegativeMatrix& a) {
    const Matrix& m = a.values();
    const Eigen::Index n = m.rows();
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double degree = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;  // self-weights do not enter the Laplacian
            l(i, j) = -m(i, j);
            degree += m(i, j);
        }
        l(i, i) = degree;
    }
    return LaplacianMatrix(std::move(l));
}

SpectralEstimate spectral_radius(const SquareNonnegativeMatrix& a, double tol, int max_iter) {
    if (tol <= 0.0) throw std::invalid_argument("spectral_radius: tol must be positive");
    SpectralEstimate plain = power_iterate(a.values(), tol, max_iter);
    if (plain.converged) return plain;

    // Oscillating estimates: the peripheral spectrum has several roots.
    // A + 0.5 I has the same eigenvectors and a unique dominant eigenvalue
    // rho(A) + 0.5, and the residual w.r.t. A equals the shifted residual.
    Matrix shifted = a.values();
    shifted.diagonal().array() += 0.5;
    SpectralEstimate retry = power_iterate(shifted, tol, max_iter);
    retry.value -= 0.5;
    retry.iterations += plain.iterations;
    if (retry.converged || retry.residual <= plain.residual) return retry;
    return plain;
}

int null_space_dimension(const Matrix& m) {
    Eigen::BDCSVD<Matrix> svd(m);
    const Vector& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double threshold = static_cast<double>(m.rows()) * kEps * sv(0);
    int dim = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) <= threshold) ++dim;
    }
    return dim;
}

namespace {

// Solve B^T-style left problems: find p >= 0 with p^T M_left = 0 where
// b = M_left^T, via the bordered system (last row of b replaced by 1^T).
ProbabilityVector bordered_left_solve(const Matrix& b, const Matrix& residual_against,
                                      bool residual_is_fixed_vector) {
    const Eigen::Index n = b.rows();
    Matrix bordered = b;
    bordered.row(n - 1).setOnes();
    Vector rhs = Vector::Zero(n);
    rhs(n - 1) = 1.0;
    Vector p = Eigen::PartialPivLU<Matrix>(bordered).solve(rhs);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (p(i) < 0.0 && p(i) > -1e-12) p(i) = 0.0;
    }
    p /= p.sum();
    double residual;
    if (residual_is_fixed_vector) {
        residual = (residual_against.transpose() * p - p).lpNorm<Eigen::Infinity>();
    } else {
        residual = (residual_against.transpose() * p).lpNorm<Eigen::Infinity>();
    }
    return {std::move(p), residual};
}

}  // namespace

ProbabilityVector left_fixed_vector(const StochasticMatrix& w) {
    const Matrix& m = w.values();
    const Eigen::Index n = m.rows();
    Matrix b = m.transpose() - Matrix::Identity(n, n);
    const int dim = null_space_dimension(b);
    if (dim > 1) {
        throw AmbiguityError("left_fixed_vector: eigenvalue-1 eigenspace has dimension " +
                             std::to_string(dim) + "; the fixed vector is not unique");
    }
    return bordered_left_solve(b, m, /*residual_is_fixed_vector=*/true);
}

ProbabilityVector laplacian_left_null(const LaplacianMatrix& l) {
    const Matrix& m = l.values();
    const int dim = null_space_dimension(m);
    if (dim > 1) {
        throw AmbiguityError("laplacian_left_null: ker L has dimension " + std::to_string(dim) +
                             "; the null vector is not unique");
    }
    return bordered_left_solve(m.transpose(), m, /*residual_is_fixed_vector=*/false);
}

Matrix matrix_exponential(const Matrix& m, double t) {
    check_square(m, "matrix_exponential");
    if (!m.allFinite() || !std::isfinite(t)) {
        throw std::invalid_argument("matrix_exponential: non-finite input");
    }
    const Eigen::Index n = m.rows();
    Matrix a = m * t;
    if (!a.allFinite()) {
        throw std::overflow_error(
            "matrix_exponential: ||M||*t overflows; subdivide the time interval");
    }

    const double norm = one_norm(a);
    if (norm == 0.0) return Matrix::Identity(n, n);
    int squarings = 0;
    if (norm > 0.5) {
        const double scale = std::ceil(std::log2(norm / 0.5));
        if (scale > 60.0) {
            throw std::overflow_error(
                "matrix_exponential: ||M||*t is too large for scaling-and-squaring; "
                "subdivide the time interval");
        }
        squarings = static_cast<int>(scale);
        a /= std::ldexp(1.0, squarings);
    }

    // Degree-13 Pade approximant.
    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    const Matrix identity = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) +
                          b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * identity);
    const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) +
                     b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * identity;
    Matrix result = Eigen::PartialPivLU<Matrix>(v - u).solve(v + u);

    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

MMatrixSolution m_matrix_solve(const Matrix& z, const Matrix& b) {
    check_square(z, "m_matrix_solve");
    if (z.rows() != b.rows()) {
        throw std::invalid_argument("m_matrix_solve: dimension mismatch, Z is " +
                                    std::to_string(z.rows()) + "x" + std::to_string(z.cols()) +
                                    " but B has " + std::to_string(b.rows()) + " rows");
    }
    Eigen::PartialPivLU<Matrix> lu(z);
    const Vector pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double min_pivot = pivots.minCoeff();
    const double max_pivot = pivots.maxCoeff();
    if (min_pivot <= static_cast<double>(z.rows()) * kEps * max_pivot) {
        throw std::runtime_error("m_matrix_solve: matrix is singular to working precision "
                                 "(min |pivot| = " + std::to_string(min_pivot) + ")");
    }

    MMatrixSolution solution{lu.solve(b), 0};
    if ((b.array() >= 0.0).all()) {
        for (Eigen::Index i = 0; i < solution.x.rows(); ++i) {
            for (Eigen::Index j = 0; j < solution.x.cols(); ++j) {
                double& value = solution.x(i, j);
                if (value < 0.0 && value > -1e-9) {
                    value = 0.0;
                    ++solution.clamped_entries;
                }
            }
        }
    }
    return solution;
}

bool is_stochastic(const Matrix& a, double tol) {
    if ((a.array() < 0.0).any()) return false;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (std::abs(a.row(i).sum() - 1.0) > tol) return false;
    }
    return true;
}

bool is_substochastic(const Matrix& a, double tol) {
    if ((a.array() < 0.0).any()) return false;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (a.row(i).sum() > 1.0 + tol) return false;
    }
    return true;
}

}  // namespace opidyn
