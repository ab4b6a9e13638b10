#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "memmap/kernel.hpp"
#include "memmap/kmeans.hpp"
#include "memmap/membership.hpp"

// Numerical oracles for the identities behind the membership machinery.
// Each check evaluates its reference side with naive, self-contained code
// so agreement with the library path is evidence rather than tautology.

namespace memmap::oracle {

struct Report {
    std::string check;
    double max_rel_err = 0.0;
    double tolerance = 0.0;
    int trials = 0;
    int skipped = 0;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * memmap::detail::unit_uniform(rng);
}

inline double gaussian(std::mt19937_64& rng) {
    // Box-Muller; fixed algorithm keeps results platform-stable
    const double u1 = std::max(memmap::detail::unit_uniform(rng), 1e-300);
    const double u2 = memmap::detail::unit_uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

// naive kr, written out independently of kernel.hpp
inline double naive_kr(const Vector& xi, const Vector& xj, double sigma2,
                       const Vector& w) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < xi.size(); ++k) {
        s += w[k] * (xi[k] - xj[k]) * (xi[k] - xj[k]);
    }
    return sigma2 * std::exp(-0.5 * s);
}

inline Matrix naive_gram(const Matrix& A, const Matrix& B, double sigma2,
                         const Vector& w) {
    Matrix K(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            K(i, j) = naive_kr(A.row(i), B.row(j), sigma2, w);
        }
    }
    return K;
}

} // namespace detail

/// Marginalization consistency at n = 1 with one appended coordinate:
/// the quadrature marginal of the normalized 2-D joint membership must
/// match the normalized 1-D base membership on a 101-point grid.
inline Report check_consistency_points(double x, double a, double sigma2,
                                       double w, double nu) {
    Report rep;
    rep.check = "consistency";
    rep.tolerance = 1e-3;
    rep.trials = 1;

    const double k11 = sigma2;
    const double k22 = sigma2;
    const double k12 = sigma2 * std::exp(-0.5 * w * (x - a) * (x - a));
    const double det = k11 * k22 - k12 * k12;
    if (det <= 1e-4 * sigma2 * sigma2) {
        throw NumericError("consistency oracle: joint Gram nearly singular");
    }
    // inverse of the 2x2 joint covariance
    const double iA = k22 / det, iB = -k12 / det, iC = k11 / det;
    const double joint_expo = -0.5 * (nu + 2.0);
    const auto zeta2 = [&](double y, double u) {
        const double q = iA * y * y + 2.0 * iB * y * u + iC * u * u;
        return std::exp(joint_expo * std::log1p(q / (nu - 2.0)));
    };
    const double base_expo = -0.5 * (nu + 1.0);
    const auto zeta1 = [&](double y) {
        return std::exp(base_expo * std::log1p(y * y / (k11 * (nu - 2.0))));
    };

    const double half_y = 50.0 * std::sqrt(k11);
    const double half_u = 50.0 * std::sqrt(k22);
    const int Qu = 8192;
    const int Qy = 2048;
    const double hu = 2.0 * half_u / (Qu - 1);
    const double hy = 2.0 * half_y / (Qy - 1);

    const auto marginal = [&](double y) {
        double s = 0.0;
        for (int i = 0; i < Qu; ++i) {
            const double u = -half_u + hu * i;
            const double wgt = (i == 0 || i == Qu - 1) ? 0.5 : 1.0;
            s += wgt * zeta2(y, u);
        }
        return s * hu;
    };

    double Z2 = 0.0;
    for (int i = 0; i < Qy; ++i) {
        const double y = -half_y + hy * i;
        const double wgt = (i == 0 || i == Qy - 1) ? 0.5 : 1.0;
        Z2 += wgt * marginal(y);
    }
    Z2 *= hy;

    double Z1 = 0.0;
    const int Q1 = 8192;
    const double h1 = 2.0 * half_y / (Q1 - 1);
    for (int i = 0; i < Q1; ++i) {
        const double y = -half_y + h1 * i;
        const double wgt = (i == 0 || i == Q1 - 1) ? 0.5 : 1.0;
        Z1 += wgt * zeta1(y);
    }
    Z1 *= h1;

    // polynomial-tail mass estimate outside the box; the grid is
    // inconclusive if too much mass is truncated
    const double edge_density = zeta1(half_y) / Z1;
    const double tail = 2.0 * edge_density * half_y / nu;
    if (tail > 1e-6) {
        throw NumericError("consistency oracle: quadrature box too small "
                           "(estimated tail mass " + std::to_string(tail) + ")");
    }

    const double cmp_half = 5.0 * std::sqrt(k11);
    for (int i = 0; i <= 100; ++i) {
        const double y = -cmp_half + 2.0 * cmp_half * i / 100.0;
        const double lhs = marginal(y) / Z2;
        const double rhs = zeta1(y) / Z1;
        rep.max_rel_err = std::max(rep.max_rel_err, std::abs(lhs - rhs) / rhs);
    }
    rep.pass = rep.max_rel_err <= rep.tolerance;
    return rep;
}

inline Report check_consistency(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double x = detail::uniform(rng, 0.0, 1.0);
    double a = detail::uniform(rng, 0.0, 1.0);
    const double sigma2 = detail::uniform(rng, 0.5, 2.0);
    const double w = detail::uniform(rng, 0.5, 4.0);
    const double nu = detail::uniform(rng, 4.0, 12.0);
    // keep the joint Gram away from singularity
    while (w * (x - a) * (x - a) < 0.02) a += 0.2;
    return check_consistency_points(x, a, sigma2, w, nu);
}

inline Report check_consistency_suite(int seeds, std::uint64_t seed0) {
    Report rep;
    rep.check = "consistency";
    rep.tolerance = 1e-3;
    for (int i = 0; i < seeds; ++i) {
        const Report one = check_consistency(seed0 + static_cast<std::uint64_t>(i));
        rep.max_rel_err = std::max(rep.max_rel_err, one.max_rel_err);
        rep.trials += 1;
    }
    rep.pass = rep.max_rel_err <= rep.tolerance;
    return rep;
}

/// Both-sides evaluation of the partitioned-matrix identity:
///   zeta_{x^a}((f,u)) / zeta_a(u)^{(nu+N+M)/(nu+M)}  ==  mu_{f;u}(f)
/// The left side is computed from the raw joint Gram matrix; the right
/// side goes through conditional_membership / conditional_eval.
inline Report check_interpolation_identity(int N, int M, int trials,
                                           std::uint64_t seed) {
    Report rep;
    rep.check = "interpolation";
    rep.tolerance = 1e-9;
    std::mt19937_64 rng(seed);
    const int n = 2;

    int done = 0;
    while (done < trials) {
        Matrix x_pts(N, n), a_pts(M, n);
        for (Eigen::Index i = 0; i < N; ++i)
            for (int k = 0; k < n; ++k)
                x_pts(i, k) = detail::uniform(rng, 0.0, 1.0);
        for (Eigen::Index m = 0; m < M; ++m)
            for (int k = 0; k < n; ++k)
                a_pts(m, k) = detail::uniform(rng, 0.0, 1.0);
        const double sigma2 = detail::uniform(rng, 0.5, 2.0);
        Vector w(n);
        for (int k = 0; k < n; ++k) w[k] = detail::uniform(rng, 0.5, 4.0);
        const double nu = detail::uniform(rng, 3.0, 12.0);
        Vector u(M), f_tilde(N);
        for (Eigen::Index m = 0; m < M; ++m) u[m] = detail::gaussian(rng);
        for (Eigen::Index i = 0; i < N; ++i) f_tilde[i] = detail::gaussian(rng);

        const double jitter = kSpdJitter * sigma2;
        Matrix joint(N + M, n);
        joint.topRows(N) = x_pts;
        joint.bottomRows(M) = a_pts;
        Matrix Kj = detail::naive_gram(joint, joint, sigma2, w);
        Kj.diagonal().array() += jitter;
        Eigen::SelfAdjointEigenSolver<Matrix> es(Kj);
        if (es.eigenvalues().minCoeff() <
            1e-7 * es.eigenvalues().maxCoeff()) {
            ++rep.skipped;
            continue;
        }
        Matrix K_aa = detail::naive_gram(a_pts, a_pts, sigma2, w);
        K_aa.diagonal().array() += jitter;

        Vector fu(N + M);
        fu.head(N) = f_tilde;
        fu.tail(M) = u;
        const double q_joint = fu.dot(Kj.llt().solve(fu));
        const double q_a = u.dot(K_aa.llt().solve(u));
        const double log_joint =
            -0.5 * (nu + N + M) * std::log1p(q_joint / (nu - 2.0));
        const double log_a = -0.5 * (nu + M) * std::log1p(q_a / (nu - 2.0));
        const double log_lhs = log_joint - (nu + N + M) / (nu + M) * log_a;

        const KernelConfig cfg{sigma2, 0.0, w};
        const auto cond = conditional_membership(x_pts, a_pts, u, cfg, nu);
        const double log_rhs = log_conditional_eval(cond, f_tilde);

        const double rel = std::abs(std::expm1(log_lhs - log_rhs));
        rep.max_rel_err = std::max(rep.max_rel_err, rel);
        ++done;
    }
    rep.trials = trials;
    rep.pass = rep.max_rel_err <= rep.tolerance;
    return rep;
}

/// sigma_x^2 = 0 limit: Phi must degenerate to Psi^T Psi. The reference
/// side is the brute-force product of naive Psi entries.
inline Report check_phi_limit(int N, int M, std::uint64_t seed) {
    Report rep;
    rep.check = "phi-limit";
    rep.tolerance = 1e-10;
    rep.trials = 1;
    std::mt19937_64 rng(seed);
    const int n = 2;
    Matrix X(N, n), a(M, n);
    for (Eigen::Index i = 0; i < N; ++i)
        for (int k = 0; k < n; ++k) X(i, k) = detail::uniform(rng, 0.0, 1.0);
    for (Eigen::Index m = 0; m < M; ++m)
        for (int k = 0; k < n; ++k) a(m, k) = detail::uniform(rng, 0.0, 1.0);
    const double sigma2 = detail::uniform(rng, 0.5, 2.0);
    Vector w(n);
    for (int k = 0; k < n; ++k) w[k] = detail::uniform(rng, 0.5, 4.0);

    const KernelConfig cfg{sigma2, 0.0, w};
    const Matrix Phi = compute_phi(X, a, cfg);
    // at sigma_x^2 = 0, Psi entries are plain kernel values
    const Matrix Psi_naive = detail::naive_gram(X, a, sigma2, w);
    const Matrix prod = Psi_naive.transpose() * Psi_naive;
    rep.max_rel_err = (Phi - prod).norm() / Phi.norm();
    rep.pass = rep.max_rel_err <= rep.tolerance;
    return rep;
}

} // namespace memmap::oracle
