#include <doctest.h>

#include <random>

#include "memmap/kernel.hpp"

using memmap::KernelConfig;
using memmap::Matrix;
using memmap::Vector;

namespace {

Matrix random_points(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

KernelConfig make_cfg(double sigma2, double sigma_x2,
                      std::initializer_list<double> ws) {
    KernelConfig cfg;
    cfg.sigma2 = sigma2;
    cfg.sigma_x2 = sigma_x2;
    cfg.w = Vector(static_cast<Eigen::Index>(ws.size()));
    Eigen::Index k = 0;
    for (double v : ws) cfg.w[k++] = v;
    return cfg;
}

} // namespace

TEST_CASE("eval_kernel basics") {
    auto cfg = make_cfg(2.5, 0.0, {1.0, 3.0});
    Vector x(2), y(2);
    x << 0.3, -0.7;
    y << 1.1, 0.4;

    SUBCASE("same point gives sigma2") {
        CHECK(memmap::eval_kernel(x, x, cfg) == 2.5);
    }
    SUBCASE("zero widths give sigma2") {
        auto flat = make_cfg(2.5, 0.0, {0.0, 0.0});
        CHECK(memmap::eval_kernel(x, y, flat) == 2.5);
    }
    SUBCASE("scalar evaluation") {
        // n=1, sigma2=1, w=2, |0-1|^2 -> e^{-1}
        auto c1 = make_cfg(1.0, 0.0, {2.0});
        Vector a(1), b(1);
        a << 0.0;
        b << 1.0;
        CHECK(memmap::eval_kernel(a, b, c1) ==
              doctest::Approx(0.36787944117144233).epsilon(1e-14));
    }
    SUBCASE("symmetry is exact") {
        CHECK(memmap::eval_kernel(x, y, cfg) == memmap::eval_kernel(y, x, cfg));
    }
    SUBCASE("range (0, sigma2]") {
        const double v = memmap::eval_kernel(x, y, cfg);
        CHECK(v > 0.0);
        CHECK(v < cfg.sigma2);
    }
    SUBCASE("dimension mismatch") {
        Vector z(3);
        z.setZero();
        CHECK_THROWS_AS(memmap::eval_kernel(x, z, cfg), std::invalid_argument);
    }
}

TEST_CASE("gram_matrix") {
    auto cfg = make_cfg(1.0, 0.0, {1.0, 1.0});

    SUBCASE("single point") {
        Matrix A = random_points(1, 2, 1);
        Matrix K = memmap::gram_matrix(A, A, cfg);
        CHECK(K(0, 0) == 1.0);
    }
    SUBCASE("identical rows give all ones") {
        Matrix A(2, 2);
        A.row(0) << 0.5, 0.5;
        A.row(1) << 0.5, 0.5;
        Matrix K = memmap::gram_matrix(A, A, cfg);
        CHECK((K.array() - 1.0).abs().maxCoeff() == 0.0);
    }
    SUBCASE("positive semidefinite for random points") {
        // eigendecomposition oracle
        Matrix A = random_points(5, 2, 7);
        Matrix K = memmap::gram_matrix(A, A, cfg);
        Eigen::SelfAdjointEigenSolver<Matrix> es(K);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
    SUBCASE("psd for larger random sets") {
        Matrix A = random_points(64, 3, 11);
        auto cfg3 = make_cfg(1.7, 0.0, {0.5, 2.0, 1.0});
        Matrix K = memmap::gram_matrix(A, A, cfg3);
        Eigen::SelfAdjointEigenSolver<Matrix> es(K);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10 * cfg3.sigma2);
    }
}

TEST_CASE("compute_xi") {
    CHECK(memmap::compute_xi(1, 1.0) == 1.0);
    CHECK(memmap::compute_xi(100, 2.0) == 200.0);
    CHECK(memmap::compute_xi(200, 1.0) == 200.0);
    CHECK_THROWS_AS(memmap::compute_xi(0, 1.0), std::invalid_argument);
}

TEST_CASE("compute_psi") {
    SUBCASE("degenerates to the Gram matrix at sigma_x2 = 0") {
        auto cfg = make_cfg(1.3, 0.0, {1.0, 2.5});
        Matrix X = random_points(10, 2, 3);
        Matrix a = random_points(4, 2, 4);
        Matrix Psi = memmap::compute_psi(X, a, cfg);
        Matrix K = memmap::gram_matrix(X, a, cfg);
        CHECK((Psi - K).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("coincident point at sigma_x2 = 0") {
        auto cfg = make_cfg(1.0, 0.0, {1.0});
        Matrix X(1, 1), a(1, 1);
        X << 0.42;
        a << 0.42;
        CHECK(memmap::compute_psi(X, a, cfg)(0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("scalar formula with input noise") {
        // n=1, w=1, sigma2=1, sigma_x2=0.01, a = x -> 1/sqrt(1.01)
        auto cfg = make_cfg(1.0, 0.01, {1.0});
        Matrix X(1, 1), a(1, 1);
        X << 0.3;
        a << 0.3;
        CHECK(memmap::compute_psi(X, a, cfg)(0, 0) ==
              doctest::Approx(0.99503719020998915).epsilon(1e-12));
    }
    SUBCASE("entries finite and strictly positive") {
        auto cfg = make_cfg(0.7, 0.01, {1.0, 8.0});
        Matrix X = random_points(20, 2, 9);
        Matrix a = random_points(6, 2, 10);
        Matrix Psi = memmap::compute_psi(X, a, cfg);
        CHECK(Psi.allFinite());
        CHECK(Psi.minCoeff() > 0.0);
        CHECK(Psi.maxCoeff() <= cfg.sigma2);
    }
}

TEST_CASE("compute_phi") {
    SUBCASE("degenerates to Psi^T Psi at sigma_x2 = 0") {
        auto cfg = make_cfg(1.4, 0.0, {1.0, 3.0});
        Matrix X = random_points(12, 2, 5);
        Matrix a = random_points(5, 2, 6);
        Matrix Phi = memmap::compute_phi(X, a, cfg);
        Matrix Psi = memmap::compute_psi(X, a, cfg);
        Matrix prod = Psi.transpose() * Psi;
        CHECK((Phi - prod).norm() / Phi.norm() <= 1e-10);
    }
    SUBCASE("coincident single point") {
        auto cfg = make_cfg(1.0, 0.0, {1.0});
        Matrix X(1, 1), a(1, 1);
        X << 0.2;
        a << 0.2;
        CHECK(memmap::compute_phi(X, a, cfg)(0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("symmetric") {
        auto cfg = make_cfg(2.0, 0.01, {1.0, 0.5});
        Matrix X = random_points(8, 2, 12);
        Matrix a = random_points(6, 2, 13);
        Matrix Phi = memmap::compute_phi(X, a, cfg);
        CHECK((Phi - Phi.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("zero widths give N sigma^4 everywhere") {
        auto cfg = make_cfg(1.5, 0.01, {0.0, 0.0});
        Matrix X = random_points(7, 2, 14);
        Matrix a = random_points(3, 2, 15);
        Matrix Phi = memmap::compute_phi(X, a, cfg);
        const double expect = 7.0 * 1.5 * 1.5;
        CHECK((Phi.array() - expect).abs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("feature_row") {
    auto cfg = make_cfg(1.0, 0.01, {1.0, 2.0});
    Matrix a = random_points(5, 2, 21);
    Vector x = random_points(1, 2, 22).row(0);

    SUBCASE("matches the Psi row") {
        Vector g = memmap::feature_row(x, a, cfg);
        Matrix X(1, 2);
        X.row(0) = x;
        Matrix Psi = memmap::compute_psi(X, a, cfg);
        CHECK((g.transpose() - Psi.row(0)).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("inducing point with sigma_x2 = 0 gives 1") {
        auto c0 = make_cfg(1.0, 0.0, {1.0, 2.0});
        Vector g = memmap::feature_row(a.row(2), a, c0);
        CHECK(g[2] == doctest::Approx(1.0));
    }
    SUBCASE("zero widths give all ones") {
        auto cz = make_cfg(1.0, 0.01, {0.0, 0.0});
        Vector g = memmap::feature_row(x, a, cz);
        CHECK((g.array() - 1.0).abs().maxCoeff() <= 1e-15);
    }
}

TEST_CASE("build_design invariants") {
    auto cfg = make_cfg(1.0, 0.01, {1.0, 1.0});
    Matrix X = random_points(15, 2, 30);
    Matrix a = random_points(4, 2, 31);
    auto d = memmap::build_design(X, a, cfg);
    CHECK(d.xi == 15.0);
    CHECK((d.K_aa - d.K_aa.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((d.Phi - d.Phi.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(d.Psi.minCoeff() > 0.0);
}
