#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "opidyn/matrix.hpp"

#include "helpers.hpp"

#include <cmath>
#include <random>

using namespace opidyn;
using test::eig_spectral_radius;
using test::french_example;
using test::random_nonnegative;
using test::random_stochastic;

namespace {

// Analytic oracle for exp(-L t) with L = [[1,-1],[-1,1]]: eigenvalues 0 and
// 2, so the entries are (1 +- e^{-2t}) / 2.
Matrix symmetric_pair_expm(double t) {
    Matrix e(2, 2);
    const double decay = std::exp(-2.0 * t);
    e << (1.0 + decay) / 2.0, (1.0 - decay) / 2.0,
         (1.0 - decay) / 2.0, (1.0 + decay) / 2.0;
    return e;
}

}  // namespace

TEST_CASE("type constructors validate and renormalize") {
    Matrix bad(2, 2);
    bad << 1.0, -0.25, 0.0, 1.0;
    CHECK_THROWS_AS(SquareNonnegativeMatrix{bad}, std::domain_error);
    CHECK_THROWS_AS(StochasticMatrix{bad}, std::domain_error);

    Matrix drifted(2, 2);
    drifted << 0.5, 0.5 + 4e-10, 0.25, 0.75;
    StochasticMatrix w(drifted);
    CHECK(w.values().row(0).sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(is_stochastic(w.values()));

    Matrix heavy(2, 2);
    heavy << 0.9, 0.7, 0.1, 0.2;
    CHECK_THROWS_AS(StochasticMatrix{heavy}, std::domain_error);
    CHECK_THROWS_AS(SubstochasticMatrix{heavy}, std::domain_error);
    CHECK(SubstochasticMatrix{Matrix::Zero(3, 3)}.size() == 3);
}

TEST_CASE("laplacian_of matches the defining formula") {
    Matrix a(2, 2);
    a << 0.0, 1.0, 1.0, 0.0;
    Matrix expected(2, 2);
    expected << 1.0, -1.0, -1.0, 1.0;
    CHECK(laplacian_of(SquareNonnegativeMatrix(a)).values() == expected);

    CHECK(laplacian_of(SquareNonnegativeMatrix(Matrix::Zero(3, 3))).values() ==
          Matrix::Zero(3, 3));

    Matrix b(3, 3);
    b << 0.0, 2.0, 0.0,
         0.0, 0.0, 3.0,
         1.0, 0.0, 0.0;
    Matrix lb(3, 3);
    lb << 2.0, -2.0, 0.0,
          0.0, 3.0, -3.0,
          -1.0, 0.0, 1.0;
    CHECK(laplacian_of(SquareNonnegativeMatrix(b)).values() == lb);

    // the diagonal of A never enters
    Matrix c = b;
    c.diagonal().setConstant(7.0);
    CHECK(laplacian_of(SquareNonnegativeMatrix(c)).values() == lb);
    CHECK((laplacian_of(SquareNonnegativeMatrix(b)).values() * Vector::Ones(3))
              .lpNorm<Eigen::Infinity>() <= 1e-15);
}

TEST_CASE("spectral_radius on worked instances") {
    SUBCASE("stochastic matrices have rho = 1") {
        const SpectralEstimate est =
            spectral_radius(SquareNonnegativeMatrix(french_example()));
        CHECK(est.converged);
        CHECK(est.value == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("scaled identity") {
        const SpectralEstimate est =
            spectral_radius(SquareNonnegativeMatrix(0.5 * Matrix::Identity(3, 3)));
        CHECK(est.converged);
        CHECK(est.value == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("imprimitive 2-cycle needs the shift restart") {
        // characteristic polynomial lambda^2 = 2 by hand
        Matrix a(2, 2);
        a << 0.0, 1.0, 2.0, 0.0;
        const SpectralEstimate est = spectral_radius(SquareNonnegativeMatrix(a));
        CHECK(est.converged);
        CHECK(est.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    }
    SUBCASE("nilpotent matrix") {
        Matrix a(2, 2);
        a << 0.0, 1.0, 0.0, 0.0;
        const SpectralEstimate est = spectral_radius(SquareNonnegativeMatrix(a));
        CHECK(est.converged);
        CHECK(est.value == doctest::Approx(0.0));
    }
}

TEST_CASE("spectral_radius of random substochastic matrices stays below 1") {
    std::mt19937 rng(61001);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 7);
        Matrix w = random_stochastic(rng, n, 0.6);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int i = 0; i < n; ++i) w.row(i) *= unit(rng);
        const SpectralEstimate est = spectral_radius(SquareNonnegativeMatrix(w));
        CHECK(est.value <= 1.0 + 1e-9);
    }
}

TEST_CASE("left_fixed_vector on worked instances") {
    SUBCASE("french example") {
        const ProbabilityVector p = left_fixed_vector(StochasticMatrix(french_example()));
        CHECK(p.weights(0) == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
        CHECK(p.weights(1) == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
        CHECK(p.weights(2) == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
        CHECK(p.residual <= 1e-12);
    }
    SUBCASE("one agent") {
        const ProbabilityVector p = left_fixed_vector(StochasticMatrix(Matrix::Identity(1, 1)));
        CHECK(p.weights(0) == doctest::Approx(1.0));
    }
    SUBCASE("2x2 balance equation") {
        // p1 * 0.1 = p2 * 0.5 by hand -> (5/6, 1/6)
        Matrix w(2, 2);
        w << 0.9, 0.1, 0.5, 0.5;
        const ProbabilityVector p = left_fixed_vector(StochasticMatrix(w));
        CHECK(p.weights(0) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
        CHECK(p.weights(1) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
        CHECK(p.residual <= 1e-12);
    }
    SUBCASE("two essential classes are ambiguous") {
        CHECK_THROWS_AS(left_fixed_vector(StochasticMatrix(Matrix::Identity(2, 2))),
                        AmbiguityError);
    }
}

TEST_CASE("left_fixed_vector agrees with the dual-chain power iteration") {
    std::mt19937 rng(61002);
    int verified = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 6);
        Matrix w = random_stochastic(rng, n, 0.7);
        w.diagonal().array() += 0.05;  // keep the chain aperiodic
        Matrix normalized = w;
        renormalize_rows(normalized);
        const StochasticMatrix stochastic(normalized);

        Vector p = Vector::Constant(n, 1.0 / n);
        bool converged = false;
        for (int k = 0; k < 200000; ++k) {
            Vector next = stochastic.values().transpose() * p;
            const double diff = (next - p).lpNorm<Eigen::Infinity>();
            p = std::move(next);
            if (diff < 1e-14) {
                converged = true;
                break;
            }
        }
        if (!converged) continue;
        ProbabilityVector direct;
        try {
            direct = left_fixed_vector(stochastic);
        } catch (const AmbiguityError&) {
            continue;  // several essential classes: no unique fixed vector
        }
        CHECK((direct.weights - p).lpNorm<Eigen::Infinity>() <= 1e-8);
        ++verified;
    }
    CHECK(verified >= 30);
}

TEST_CASE("laplacian_left_null on worked instances") {
    SUBCASE("symmetric pair") {
        Matrix a(2, 2);
        a << 0.0, 1.0, 1.0, 0.0;
        const ProbabilityVector p = laplacian_left_null(laplacian_of(SquareNonnegativeMatrix(a)));
        CHECK(p.weights(0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(p.weights(1) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("single closed node") {
        Matrix a(2, 2);
        a << 0.0, 0.0, 1.0, 0.0;  // arc 1 -> 2 only
        const ProbabilityVector p = laplacian_left_null(laplacian_of(SquareNonnegativeMatrix(a)));
        CHECK(p.weights(0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(p.weights(1) == doctest::Approx(0.0));
    }
    SUBCASE("symmetric path solves p^T L = 0 uniformly") {
        // Hand oracle: L = [[1,-1,0],[-1,2,-1],[0,-1,1]] is symmetric with
        // null space span(1), so the probability-normalized solution is
        // uniform.
        Matrix a(3, 3);
        a << 0.0, 1.0, 0.0,
             1.0, 0.0, 1.0,
             0.0, 1.0, 0.0;
        const LaplacianMatrix l = laplacian_of(SquareNonnegativeMatrix(a));
        const ProbabilityVector p = laplacian_left_null(l);
        for (int i = 0; i < 3; ++i) {
            CHECK(p.weights(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        }
        CHECK((l.values().transpose() * p.weights).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
    SUBCASE("two closed components are ambiguous") {
        CHECK_THROWS_AS(laplacian_left_null(laplacian_of(SquareNonnegativeMatrix(Matrix::Zero(2, 2)))),
                        AmbiguityError);
    }
}

TEST_CASE("matrix_exponential against the analytic 2x2 oracle") {
    Matrix l(2, 2);
    l << 1.0, -1.0, -1.0, 1.0;
    for (const double t : {0.0, 0.1, 0.5, 1.0, 3.0, 10.0}) {
        const Matrix e = matrix_exponential(-l, t);
        CHECK((e - symmetric_pair_expm(t)).lpNorm<Eigen::Infinity>() <= 1e-13);
    }
    CHECK(matrix_exponential(Matrix::Zero(3, 3), 2.0) == Matrix::Identity(3, 3));
    Matrix m(2, 2);
    m << 0.3, -0.7, 1.1, 0.2;
    CHECK((matrix_exponential(m, 0.0) - Matrix::Identity(2, 2)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK_THROWS_AS(matrix_exponential(Matrix::Constant(2, 2, 1e300), 1e300),
                    std::overflow_error);
}

TEST_CASE("matrix_exponential has the semigroup property") {
    std::mt19937 rng(61003);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);
        std::uniform_real_distribution<double> range(-1.0, 1.0);
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) m(i, j) = range(rng);
        }
        const double s = 0.4, t = 1.3;
        const Matrix combined = matrix_exponential(m, s + t);
        const Matrix split = matrix_exponential(m, s) * matrix_exponential(m, t);
        CHECK((combined - split).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
}

TEST_CASE("exp(-L tau) of random graphs is stochastic with positive diagonal") {
    std::mt19937 rng(61004);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 11);
        const Matrix a = random_nonnegative(rng, n, 0.4);
        const LaplacianMatrix l = laplacian_of(SquareNonnegativeMatrix(a));
        for (const double tau : {0.1, 1.0, 10.0}) {
            const Matrix w = matrix_exponential(-l.values(), tau);
            for (int i = 0; i < n; ++i) {
                CHECK(std::abs(w.row(i).sum() - 1.0) <= 1e-9);
                CHECK(w(i, i) > 0.0);
            }
            CHECK(w.minCoeff() >= -1e-9);
        }
    }
}

TEST_CASE("m_matrix_solve on worked instances") {
    SUBCASE("identity") {
        Matrix b(2, 3);
        b << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
        CHECK(m_matrix_solve(Matrix::Identity(2, 2), b).x == b);
    }
    SUBCASE("hand-solved 2x2") {
        Matrix j(2, 2);
        j << 0.0, 1.0, 1.0, 0.0;
        const Matrix z = Matrix::Identity(2, 2) - 0.5 * j;
        const Matrix x = m_matrix_solve(z, Vector::Ones(2)).x;
        CHECK(x(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(x(1, 0) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("singular matrix is reported with the pivot") {
        Matrix z(2, 2);
        z << 1.0, -1.0, -1.0, 1.0;
        CHECK_THROWS_WITH_AS(m_matrix_solve(z, Vector::Ones(2)),
                             doctest::Contains("singular"), std::runtime_error);
    }
}

TEST_CASE("m_matrix_solve keeps nonnegative right-hand sides nonnegative") {
    std::mt19937 rng(61005);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 6);
        const Matrix a = random_nonnegative(rng, n, 0.6);
        const double s = eig_spectral_radius(a) * (1.05 + unit(rng));
        const Matrix z = s * Matrix::Identity(n, n) - a;
        Matrix b(n, 2);
        for (int i = 0; i < n; ++i) {
            b(i, 0) = unit(rng);
            b(i, 1) = 2.0 * unit(rng);
        }
        const MMatrixSolution solution = m_matrix_solve(z, b);
        CHECK(solution.x.minCoeff() >= -1e-9);
        CHECK((solution.x.array() >= 0.0).all());  // clamping removed the noise
    }
}

TEST_CASE("row-sum predicates") {
    CHECK(is_stochastic(test::fj_example()));
    Matrix scaled = 0.5 * test::fj_example();
    CHECK(is_substochastic(scaled));
    CHECK_FALSE(is_stochastic(scaled));
    Matrix heavy(2, 2);
    heavy << 1.0, 0.5, 0.2, 0.3;
    CHECK_FALSE(is_stochastic(heavy));
    CHECK_FALSE(is_substochastic(heavy));
    Matrix negative(1, 1);
    negative << -0.5;
    CHECK_FALSE(is_stochastic(negative));
    CHECK_FALSE(is_substochastic(negative));
}

TEST_CASE("renormalize_rows is idempotent at the bit level") {
    std::mt19937 rng(61006);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 8);
        Matrix w = random_stochastic(rng, n, 0.8);
        std::uniform_real_distribution<double> drift(-5e-7, 5e-7);
        for (int i = 0; i < n; ++i) w.row(i) *= (1.0 + drift(rng));
        renormalize_rows(w);
        for (int i = 0; i < n; ++i) CHECK(std::abs(w.row(i).sum() - 1.0) <= 1e-14);
        Matrix again = w;
        renormalize_rows(again);
        CHECK(again == w);
    }
}
