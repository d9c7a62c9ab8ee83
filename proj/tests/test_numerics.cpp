// SPDX-License-Identifier: Apache-2.0
#include "wiener/numerics.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <random>

using namespace wiener;
using numerics::GevProblem;
using numerics::Select;

namespace {

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal;
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

Matrix random_spd(Index n, std::mt19937_64& rng)
{
    const Matrix a = random_matrix(n, n, rng);
    return a * a.transpose() + 0.1 * Matrix::Identity(n, n);
}

double contract_residual(const GevProblem& p, const numerics::GevSolution& s)
{
    const Vector& v = s.eigenvector;
    return (p.a * v - s.eigenvalue * p.b * v).norm() / ((p.a.norm() + std::abs(s.eigenvalue) * p.b.norm()) * v.norm());
}

} // namespace

TEST_SUITE("numerics") {

TEST_CASE("solve_gev on a diagonal pencil picks the largest eigenvalue")
{
    GevProblem p{Eigen::Vector2d(1, 3).asDiagonal().toDenseMatrix(), Matrix::Identity(2, 2), Select::largest};
    const auto s = numerics::solve_gev(p);
    CHECK(s.eigenvalue == doctest::Approx(3.0));
    CHECK(s.eigenvector[0] == doctest::Approx(0.0));
    CHECK(s.eigenvector[1] == doctest::Approx(1.0));
}

TEST_CASE("solve_gev with a == b satisfies the residual contract")
{
    const Matrix d = Eigen::Vector2d(1, 3).asDiagonal();
    GevProblem p{d, d, Select::largest};
    const auto s = numerics::solve_gev(p);
    CHECK(s.eigenvalue == doctest::Approx(1.0));
    CHECK(s.eigenvector.norm() == doctest::Approx(1.0));
    CHECK(contract_residual(p, s) <= 1e-8);
}

TEST_CASE("solve_gev smallest eigenpair of the exchange matrix")
{
    Matrix a(2, 2);
    a << 0, 1, 1, 0;
    GevProblem p{a, Matrix::Identity(2, 2), Select::smallest};
    const auto s = numerics::solve_gev(p);
    CHECK(s.eigenvalue == doctest::Approx(-1.0));
    CHECK(s.eigenvector[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(s.eigenvector[1] == doctest::Approx(-1.0 / std::sqrt(2.0)));
}

TEST_CASE("solve_gev residual and scale invariance on random pencils")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 3 + trial % 6;
        Matrix a = random_matrix(n, n, rng);
        a = (a + a.transpose()).eval();
        GevProblem p{a, random_spd(n, rng), trial % 2 ? Select::largest : Select::smallest};
        const auto s = numerics::solve_gev(p);
        CHECK(contract_residual(p, s) <= 1e-8);
        CHECK(numerics::gev_relative_residual(p, s) == doctest::Approx(contract_residual(p, s)));

        // Dense oracle: eigenvalues of B^{-1}A.
        Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> oracle(p.a, p.b);
        const double expected = p.select == Select::largest ? oracle.eigenvalues()[n - 1] : oracle.eigenvalues()[0];
        CHECK(s.eigenvalue == doctest::Approx(expected).epsilon(1e-9));

        const GevProblem scaled{7.5 * p.a, 7.5 * p.b, p.select};
        const auto t = numerics::solve_gev(scaled);
        CHECK(t.eigenvalue == doctest::Approx(s.eigenvalue).epsilon(1e-10));
        CHECK((t.eigenvector - s.eigenvector).norm() <= 1e-8);
    }
}

TEST_CASE("solve_gev jitters a singular b and rejects malformed input")
{
    Matrix b = Matrix::Zero(3, 3);
    b(0, 0) = 1.0;
    b(1, 1) = 2.0;
    GevProblem p{Matrix::Identity(3, 3), b, Select::smallest};
    const auto s = numerics::solve_gev(p);
    CHECK(s.jittered);
    CHECK(std::isfinite(s.eigenvalue));

    CHECK_THROWS_AS(numerics::solve_gev({Matrix::Identity(2, 2), Matrix::Identity(3, 3), Select::largest}),
                    std::invalid_argument);
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = NAN;
    CHECK_THROWS_AS(numerics::solve_gev({bad, Matrix::Identity(2, 2), Select::largest}), std::invalid_argument);
    Matrix asym = Matrix::Identity(2, 2);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(numerics::solve_gev({asym, Matrix::Identity(2, 2), Select::largest}), std::invalid_argument);
    CHECK_THROWS_AS(numerics::solve_gev({Matrix::Identity(2, 2), Matrix::Zero(2, 2), Select::largest}),
                    NumericalError);
}

TEST_CASE("canonicalize_sign makes the first significant entry positive")
{
    Vector v(3);
    v << 1e-20, -2.0, 1.0;
    numerics::canonicalize_sign(v);
    CHECK(v[1] == 2.0);
    CHECK(v[2] == -1.0);
}

TEST_CASE("nearest_kronecker_rank1 recovers an exact product")
{
    Vector h(2);
    h << 1.0, 2.0;
    h /= std::sqrt(5.0);
    Vector alpha(3);
    alpha << 3.0, 0.0, 4.0;
    Vector v(6);
    for (Index l = 0; l < 2; ++l)
        for (Index m = 0; m < 3; ++m) v[l * 3 + m] = h[l] * alpha[m];
    const auto pair = numerics::nearest_kronecker_rank1(v, 2, 3);
    CHECK(pair.h.norm() == doctest::Approx(1.0));
    CHECK((pair.h - h).norm() <= 1e-12);
    CHECK((pair.alpha - alpha).norm() <= 1e-12);

    const auto again = numerics::nearest_kronecker_rank1(v, 2, 3);
    Vector rebuilt(6);
    for (Index l = 0; l < 2; ++l)
        for (Index m = 0; m < 3; ++m) rebuilt[l * 3 + m] = again.h[l] * again.alpha[m];
    const auto idem = numerics::nearest_kronecker_rank1(rebuilt, 2, 3);
    CHECK((idem.h - again.h).norm() <= 1e-12);
    CHECK((idem.alpha - again.alpha).norm() <= 1e-12);
}

TEST_CASE("nearest_kronecker_rank1 of an elementary vector")
{
    Vector v = Vector::Zero(4);
    v[0] = 1.0;
    const auto pair = numerics::nearest_kronecker_rank1(v, 2, 2);
    CHECK(std::abs(pair.h[0]) == doctest::Approx(1.0));
    CHECK(pair.h[1] == doctest::Approx(0.0));
    CHECK(std::abs(pair.alpha[0]) == doctest::Approx(1.0));
    CHECK(pair.alpha[1] == doctest::Approx(0.0));
}

TEST_CASE("nearest_kronecker_rank1 residual equals the second singular value")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix r = random_matrix(2, 3, rng);
        Vector v(6);
        for (Index l = 0; l < 2; ++l)
            for (Index m = 0; m < 3; ++m) v[l * 3 + m] = r(l, m);
        const auto pair = numerics::nearest_kronecker_rank1(v, 2, 3);
        const double residual = (r - pair.h * pair.alpha.transpose()).norm();
        Eigen::BDCSVD<Matrix> oracle(r);
        CHECK(residual == doctest::Approx(oracle.singularValues()[1]).epsilon(1e-10));
    }
}

TEST_CASE("nearest_kronecker_rank1 errors")
{
    CHECK_THROWS_AS(numerics::nearest_kronecker_rank1(Vector::Ones(5), 2, 3), std::invalid_argument);
    CHECK_THROWS_WITH_AS(numerics::nearest_kronecker_rank1(Vector::Zero(6), 2, 3),
                         "degenerate rank-1 factorization", NumericalError);
}

TEST_CASE("incomplete_cholesky on a rank-one kernel")
{
    const auto g = numerics::incomplete_cholesky([](Index, Index) { return 1.0; }, 4, 1e-8);
    REQUIRE(g.g.cols() == 1);
    CHECK(g.g.cwiseAbs().isApprox(Matrix::Ones(4, 1)));
}

TEST_CASE("incomplete_cholesky on the identity reaches full rank")
{
    const auto g = numerics::incomplete_cholesky([](Index i, Index j) { return i == j ? 1.0 : 0.0; }, 3, 1e-8);
    REQUIRE(g.g.cols() == 3);
    CHECK((g.g * g.g.transpose() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("incomplete_cholesky matches a dense kernel matrix")
{
    const Vector x = Eigen::Vector3d(0.0, 0.1, 5.0);
    const auto kernel = [&](Index i, Index j) { return std::exp(-0.5 * (x[i] - x[j]) * (x[i] - x[j])); };
    const auto g = numerics::incomplete_cholesky(kernel, 3, 1e-8);
    Matrix k(3, 3);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j) k(i, j) = kernel(i, j);
    const double trace_residual = k.trace() - (g.g * g.g.transpose()).trace();
    CHECK(trace_residual <= 1e-8);
    CHECK(trace_residual >= -1e-14);
    CHECK(g.residual_trace == doctest::Approx(trace_residual).epsilon(1e-6));
    // Dense Cholesky oracle: K is positive definite here, so GGᵀ must equal LLᵀ.
    const Matrix dense_l = k.llt().matrixL();
    CHECK((g.g * g.g.transpose() - dense_l * dense_l.transpose()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("incomplete_cholesky residual bounds on random Gaussian kernels")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 5; ++trial) {
        Vector x(10);
        for (Index i = 0; i < 10; ++i) x[i] = normal(rng);
        const auto kernel = [&](Index i, Index j) { return std::exp(-0.5 * (x[i] - x[j]) * (x[i] - x[j]) / 0.25); };
        const double precision = 1e-6;
        const auto g = numerics::incomplete_cholesky(kernel, 10, precision);
        Matrix k(10, 10);
        for (Index i = 0; i < 10; ++i)
            for (Index j = 0; j < 10; ++j) k(i, j) = kernel(i, j);
        const double trace_residual = k.trace() - (g.g * g.g.transpose()).trace();
        CHECK(trace_residual <= precision);
        CHECK(trace_residual >= -1e-12);
        CHECK((k - g.g * g.g.transpose()).cwiseAbs().maxCoeff() <= std::sqrt(precision * k.diagonal().maxCoeff()));
    }
}

TEST_CASE("incomplete_cholesky rejects indefinite kernels")
{
    const auto kernel = [](Index i, Index j) { return i == j ? 1.0 : 2.0; };
    CHECK_THROWS_WITH_AS(numerics::incomplete_cholesky(kernel, 2, 1e-8), "not PSD", NumericalError);
}

} // TEST_SUITE
