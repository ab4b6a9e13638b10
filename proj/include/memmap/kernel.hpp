#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "memmap/linalg.hpp"

namespace memmap {

/// Squared-exponential kernel parameters: variance sigma^2, input noise
/// variance sigma_x^2, and per-dimension widths w.
struct KernelConfig {
    double sigma2 = 1.0;
    double sigma_x2 = 0.01;
    Vector w;

    void validate(Eigen::Index n) const {
        if (!(sigma2 > 0.0)) {
            throw std::invalid_argument("KernelConfig: sigma2 must be > 0");
        }
        if (!(sigma_x2 >= 0.0)) {
            throw std::invalid_argument("KernelConfig: sigma_x2 must be >= 0");
        }
        if (w.size() != n) {
            throw std::invalid_argument("KernelConfig: width vector length " +
                                        std::to_string(w.size()) +
                                        " does not match dimension " +
                                        std::to_string(n));
        }
        for (Eigen::Index k = 0; k < w.size(); ++k) {
            if (!(w[k] >= 0.0)) {
                throw std::invalid_argument("KernelConfig: widths must be >= 0");
            }
        }
    }
};

/// kr(xi, xj) = sigma^2 exp(-0.5 sum_k w_k |xi_k - xj_k|^2).
/// Summation runs over k ascending so results are bitwise reproducible.
inline double eval_kernel(const Vector& xi, const Vector& xj,
                          const KernelConfig& cfg) {
    if (xi.size() != xj.size()) {
        throw std::invalid_argument("eval_kernel: point dimensions differ");
    }
    cfg.validate(xi.size());
    double s = 0.0;
    for (Eigen::Index k = 0; k < xi.size(); ++k) {
        const double d = xi[k] - xj[k];
        s += cfg.w[k] * d * d;
    }
    return cfg.sigma2 * std::exp(-0.5 * s);
}

/// Gram matrix of pairwise kernel values; rows of A and B are points.
inline Matrix gram_matrix(const Matrix& A, const Matrix& B,
                          const KernelConfig& cfg) {
    if (A.cols() != B.cols()) {
        throw std::invalid_argument("gram_matrix: point dimensions differ");
    }
    cfg.validate(A.cols());
    Matrix K(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < A.cols(); ++k) {
                const double d = A(i, k) - B(j, k);
                s += cfg.w[k] * d * d;
            }
            K(i, j) = cfg.sigma2 * std::exp(-0.5 * s);
        }
    }
    return K;
}

/// xi = N * sigma^2.
inline double compute_xi(std::int64_t N, double sigma2) {
    if (N < 1) {
        throw std::invalid_argument("compute_xi: N must be >= 1");
    }
    if (!(sigma2 > 0.0)) {
        throw std::invalid_argument("compute_xi: sigma2 must be > 0");
    }
    return static_cast<double>(N) * sigma2;
}

/// Psi_{i,m}, the expected cross-feature matrix between data X and inducing
/// points a. Degenerates to gram_matrix(X, a) at sigma_x^2 = 0.
inline Matrix compute_psi(const Matrix& X, const Matrix& a,
                          const KernelConfig& cfg) {
    if (X.cols() != a.cols()) {
        throw std::invalid_argument("compute_psi: point dimensions differ");
    }
    cfg.validate(X.cols());
    const Eigen::Index n = X.cols();
    Vector denom(n);
    double front = cfg.sigma2;
    for (Eigen::Index k = 0; k < n; ++k) {
        denom[k] = 1.0 + cfg.w[k] * cfg.sigma_x2;
        front /= std::sqrt(denom[k]);
    }
    Matrix Psi(X.rows(), a.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index m = 0; m < a.rows(); ++m) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) {
                const double d = a(m, k) - X(i, k);
                s += cfg.w[k] * d * d / denom[k];
            }
            Psi(i, m) = front * std::exp(-0.5 * s);
        }
    }
    return Psi;
}

/// Phi_{m,m'}, the expected feature outer-product matrix. Symmetric; equals
/// Psi^T Psi at sigma_x^2 = 0.
inline Matrix compute_phi(const Matrix& X, const Matrix& a,
                          const KernelConfig& cfg) {
    if (X.cols() != a.cols()) {
        throw std::invalid_argument("compute_phi: point dimensions differ");
    }
    cfg.validate(X.cols());
    const Eigen::Index n = X.cols();
    Vector denom(n);
    double front = cfg.sigma2 * cfg.sigma2;
    for (Eigen::Index k = 0; k < n; ++k) {
        denom[k] = 1.0 + 2.0 * cfg.w[k] * cfg.sigma_x2;
        front /= std::sqrt(denom[k]);
    }
    const Eigen::Index M = a.rows();
    Matrix Phi(M, M);
    for (Eigen::Index m = 0; m < M; ++m) {
        for (Eigen::Index mp = m; mp < M; ++mp) {
            double sep = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) {
                const double d = a(m, k) - a(mp, k);
                sep += cfg.w[k] * d * d;
            }
            double acc = 0.0;
            for (Eigen::Index i = 0; i < X.rows(); ++i) {
                double s = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double d = 0.5 * (a(m, k) + a(mp, k)) - X(i, k);
                    s += cfg.w[k] * d * d / denom[k];
                }
                acc += std::exp(-0.25 * sep - s);
            }
            Phi(m, mp) = front * acc;
            Phi(mp, m) = Phi(m, mp);
        }
    }
    return Phi;
}

/// Feature row G(x): the Psi formula evaluated at a single input point.
inline Vector feature_row(const Vector& x, const Matrix& a,
                          const KernelConfig& cfg) {
    Matrix X(1, x.size());
    X.row(0) = x;
    return compute_psi(X, a, cfg).row(0);
}

/// Design quantities entering the variational updates.
struct DesignMatrices {
    Matrix K_aa;  // M x M inducing-point Gram matrix
    Matrix Psi;   // N x M
    Matrix Phi;   // M x M
    double xi = 0.0;
};

inline DesignMatrices build_design(const Matrix& X, const Matrix& a,
                                   const KernelConfig& cfg) {
    DesignMatrices d;
    d.K_aa = gram_matrix(a, a, cfg);
    d.Psi = compute_psi(X, a, cfg);
    d.Phi = compute_phi(X, a, cfg);
    d.xi = compute_xi(X.rows(), cfg.sigma2);
    return d;
}

} // namespace memmap
