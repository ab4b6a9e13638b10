#include <doctest.h>

#include "memmap/oracle.hpp"

TEST_CASE("interpolation identity holds for random small configurations") {
    auto rep = memmap::oracle::check_interpolation_identity(3, 3, 25, 0);
    CHECK(rep.pass);
    CHECK(rep.max_rel_err <= 1e-9);
}

TEST_CASE("interpolation identity with zero inducing outputs") {
    // u = 0 exercised directly against the naive joint evaluation
    memmap::Matrix x(2, 1), a(2, 1);
    x << 0.2, 0.8;
    a << 0.4, 0.6;
    memmap::Vector u = memmap::Vector::Zero(2);
    memmap::KernelConfig cfg{1.0, 0.0, memmap::Vector::Constant(1, 2.0)};
    const double nu = 5.0;

    auto cond = memmap::conditional_membership(x, a, u, cfg, nu);
    memmap::Vector f(2);
    f << 0.5, -0.4;
    const double rhs = memmap::conditional_eval(cond, f);

    memmap::Matrix joint(4, 1);
    joint << 0.2, 0.8, 0.4, 0.6;
    memmap::Matrix K = memmap::gram_matrix(joint, joint, cfg);
    K.diagonal().array() += memmap::kSpdJitter * cfg.sigma2;
    memmap::Vector fu(4);
    fu << 0.5, -0.4, 0.0, 0.0;
    const double q = fu.dot(K.llt().solve(fu));
    const double lhs = std::pow(1.0 + q / (nu - 2.0), -0.5 * (nu + 4.0));
    // zeta_a(0) = 1, so no denominator correction
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("interpolation identity equals one at the interpolated mean") {
    memmap::Matrix x(2, 1), a(2, 1);
    x << 0.1, 0.9;
    a << 0.3, 0.7;
    memmap::Vector u(2);
    u << 1.0, -1.0;
    memmap::KernelConfig cfg{1.0, 0.0, memmap::Vector::Constant(1, 2.0)};
    auto cond = memmap::conditional_membership(x, a, u, cfg, 5.0);
    CHECK(memmap::conditional_eval(cond, cond.mean) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("consistency marginalization") {
    SUBCASE("random seed 0") {
        auto rep = memmap::oracle::check_consistency(0);
        CHECK(rep.pass);
        CHECK(rep.max_rel_err <= 1e-3);
    }
    SUBCASE("near-duplicated point") {
        auto rep = memmap::oracle::check_consistency_points(0.5, 0.6, 1.0, 2.0,
                                                            5.0);
        CHECK(rep.pass);
    }
    SUBCASE("large nu approaches the Gaussian regime") {
        auto rep = memmap::oracle::check_consistency_points(0.2, 0.8, 1.0, 2.0,
                                                            1e4);
        CHECK(rep.pass);
    }
}

TEST_CASE("phi limit") {
    SUBCASE("random N=20 M=5") {
        auto rep = memmap::oracle::check_phi_limit(20, 5, 0);
        CHECK(rep.pass);
        CHECK(rep.max_rel_err <= 1e-10);
    }
    SUBCASE("scalar M=1") {
        auto rep = memmap::oracle::check_phi_limit(10, 1, 1);
        CHECK(rep.pass);
    }
}
