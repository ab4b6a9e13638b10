#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "memmap/digamma.hpp"
#include "memmap/kernel.hpp"
#include "memmap/kmeans.hpp"
#include "memmap/linalg.hpp"

namespace memmap {

struct HyperParams {
    Eigen::Index M = 0;     // 0 means min(N, 50)
    double nu = 5.0;
    double sigma2 = 1.0;
    double sigma_x2 = 0.01;
    double a_tau = 1.0, b_tau = 1.0;
    double a_r = 1.0, b_r = 1.0;
    double a_s = 1.0, b_s = 1.0;
    double beta_rel_tol = 1e-6;
    int min_outer_iters = 3;
    int max_outer_iters = 1000;
    std::uint64_t seed = 0;
    int kmeans_max_iters = 100;
    std::optional<Vector> w_override;

    void validate() const {
        if (!(nu > 2.0)) {
            throw std::invalid_argument("HyperParams: nu must exceed 2");
        }
        if (!(sigma2 > 0.0) || !(sigma_x2 >= 0.0)) {
            throw std::invalid_argument("HyperParams: bad variance parameters");
        }
        if (!(a_tau > 0.0 && b_tau > 0.0 && a_r > 0.0 && b_r > 0.0 &&
              a_s > 0.0 && b_s > 0.0)) {
            throw std::invalid_argument("HyperParams: priors must be positive");
        }
        if (!(beta_rel_tol > 0.0) || max_outer_iters < 1) {
            throw std::invalid_argument("HyperParams: bad stopping parameters");
        }
    }
};

/// Gamma-style hyperposterior parameters plus the derived quantities
/// tracked across coordinate updates.
struct VariationalState {
    double a_tau_hat = 1.0, b_tau_hat = 1.0;
    double a_z_hat = 1.0, b_z_hat = 1.0;
    double a_r_hat = 1.0, b_r_hat = 1.0;
    double a_s_hat = 1.0, b_s_hat = 1.0;
    double E_O = 0.0;
    Matrix E_m_u; // M x p, column j = E(m_hat_{u_j}(y_j))
    double beta = 1.0;
    int iter = 0;

    void check_positive() const {
        const double vals[] = {a_tau_hat, b_tau_hat, a_z_hat, b_z_hat,
                               a_r_hat,   b_r_hat,   a_s_hat, b_s_hat};
        for (double v : vals) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw NumericError(
                    "variational update produced a nonpositive hyperposterior "
                    "parameter");
            }
        }
    }
};

/// Learned model: everything needed for prediction plus the matrix B
/// returned alongside it.
struct ModelParams {
    Matrix alpha;  // M x p
    Vector w;      // n
    Matrix a;      // M x n inducing points
    double sigma2 = 1.0;
    double sigma_x2 = 0.01;
    Matrix B;      // M x N (empty if not persisted)
    double nu = 5.0;
    Eigen::Index n = 0, p = 0, M = 0, N = 0;

    [[nodiscard]] KernelConfig kernel_config() const {
        return KernelConfig{sigma2, sigma_x2, w};
    }

    void validate() const {
        if (!(nu > 2.0)) {
            throw std::invalid_argument("ModelParams: nu must exceed 2");
        }
        if (!(sigma2 > 0.0) || !(sigma_x2 >= 0.0)) {
            throw std::invalid_argument("ModelParams: bad variance parameters");
        }
        if (alpha.rows() != M || alpha.cols() != p || a.rows() != M ||
            a.cols() != n || w.size() != n) {
            throw std::invalid_argument("ModelParams: inconsistent dimensions");
        }
        if (B.size() > 0 && (B.rows() != M || B.cols() != N)) {
            throw std::invalid_argument("ModelParams: B has wrong shape");
        }
        if (!alpha.allFinite() || !a.allFinite() || !w.allFinite() ||
            (B.size() > 0 && !B.allFinite())) {
            throw std::invalid_argument("ModelParams: non-finite entries");
        }
    }
};

struct FitReport {
    std::vector<double> beta_trace;
    int iterations = 0;
    bool converged = false;
    int clamp_activations = 0;
    std::string note =
        "predictions decay to zero far from the inducing points; no "
        "extrapolation guard is applied";
};

/// Precomputed pieces shared by the coordinate updates. K_aa carries the
/// diagonal jitter used by every solve against it.
struct LearnerWorkspace {
    DesignMatrices design;
    Matrix K_aa_j;                 // K_aa + jitter*I
    Eigen::LLT<Matrix> llt_K;      // factor of K_aa_j
    double trace_term = 0.0;       // (xi - Tr(K_aa^-1 Phi)) / (nu + M - 2)
    double nu = 5.0;

    LearnerWorkspace(const DesignMatrices& d, double nu_in)
        : design(d), nu(nu_in) {
        K_aa_j = d.K_aa;
        K_aa_j.diagonal().array() += kSpdJitter * d.K_aa.diagonal().maxCoeff();
        Eigen::LLT<Matrix> llt(K_aa_j);
        if (llt.info() != Eigen::Success) {
            throw NumericError("K_aa is not positive-definite after jitter");
        }
        llt_K = llt;
        const double M = static_cast<double>(d.K_aa.rows());
        trace_term = (d.xi - llt_K.solve(d.Phi).trace()) / (nu + M - 2.0);
    }

    /// Phi + trace_term*K_aa + (b_tau b_z)/(a_tau a_z) * K_aa, the system
    /// matrix shared by the mean update, B, and alpha.
    [[nodiscard]] Matrix system_matrix(const VariationalState& s) const {
        const double c = (s.b_tau_hat / s.a_tau_hat) * (s.b_z_hat / s.a_z_hat);
        return design.Phi + (trace_term + c) * K_aa_j;
    }
};

/// Solves S * X = RHS for the shared system matrix. S is positive
/// semi-definite up to roundoff; at desk scale Phi carries eigenvalues a few
/// ulps below zero, which LDLT tolerates where a Cholesky factor would not.
inline Matrix solve_system(const Matrix& S, const Matrix& RHS,
                           const char* what = "system") {
    Eigen::LDLT<Matrix> ldlt(S);
    if (ldlt.info() != Eigen::Success) {
        throw NumericError(std::string(what) + ": factorization failed");
    }
    Matrix X = ldlt.solve(RHS);
    if (!X.allFinite()) {
        throw NumericError(std::string(what) +
                           ": solve produced non-finite values");
    }
    return X;
}

/// E(m_hat_{u_j}(y_j)) for all output columns at once.
inline Matrix update_mean_u(const LearnerWorkspace& ws,
                            const VariationalState& s, const Matrix& Y) {
    return ws.K_aa_j * solve_system(ws.system_matrix(s),
                                    ws.design.Psi.transpose() * Y,
                                    "mean-update system");
}

inline constexpr double kExpectedOFloor = 1e-12;

/// E(O), the expected residual objective, clamped below at 1e-12 so the
/// Gamma-style parameters it feeds stay positive. Returns the clamped value
/// and reports whether the clamp fired.
inline double update_expected_O(const LearnerWorkspace& ws, const Matrix& E_m_u,
                                const Matrix& Y, bool* clamped = nullptr) {
    const Matrix PsiTY = ws.design.Psi.transpose() * Y;
    double total = 0.0;
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
        const Vector m_j = E_m_u.col(j);
        const Vector s_j = ws.llt_K.solve(m_j);
        total += Y.col(j).squaredNorm() - 2.0 * s_j.dot(PsiTY.col(j)) +
                 s_j.dot(ws.design.Phi * s_j) + ws.trace_term * m_j.dot(s_j);
    }
    if (clamped != nullptr) *clamped = total < kExpectedOFloor;
    return std::max(total, kExpectedOFloor);
}

/// The eight hatted updates applied in equation order, then beta.
inline VariationalState update_hyperposteriors(VariationalState s, double E_O,
                                               const HyperParams& hp,
                                               Eigen::Index N, Eigen::Index p) {
    if (!(E_O >= 0.0)) {
        throw std::invalid_argument("update_hyperposteriors: E_O must be >= 0");
    }
    const double Np = 0.5 * static_cast<double>(N) * static_cast<double>(p);
    s.a_tau_hat = hp.a_tau + Np;
    s.b_tau_hat = hp.b_tau + 0.5 * (s.a_z_hat / s.b_z_hat) * E_O;
    s.a_z_hat = 1.0 + Np + s.a_r_hat / s.b_r_hat;
    s.b_z_hat = (s.a_r_hat / s.b_r_hat) * (s.a_s_hat / s.b_s_hat) +
                0.5 * (s.a_tau_hat / s.b_tau_hat) * E_O;
    s.a_r_hat = hp.a_r;
    s.b_r_hat = hp.b_r + (s.a_s_hat / s.b_s_hat) * (s.a_z_hat / s.b_z_hat) -
                digamma(s.a_s_hat) + std::log(s.b_s_hat) - 1.0 -
                digamma(s.a_z_hat) + std::log(s.b_z_hat);
    s.a_s_hat = hp.a_s + s.a_r_hat / s.b_r_hat;
    s.b_s_hat = hp.b_s + (s.a_r_hat / s.b_r_hat) * (s.a_z_hat / s.b_z_hat);
    s.beta = (s.a_tau_hat / s.b_tau_hat) * (s.a_z_hat / s.b_z_hat);
    s.E_O = E_O;
    s.check_positive();
    return s;
}

/// Runs the full variational loop: widths, inducing points, design
/// matrices, hyperposterior initialization, coordinate updates until beta
/// converges, then B and alpha.
inline std::pair<ModelParams, FitReport>
fit(const Matrix& X, const Matrix& Y, HyperParams hp,
    const std::optional<Matrix>& aux_override = std::nullopt) {
    hp.validate();
    if (X.rows() != Y.rows() || X.rows() < 1) {
        throw std::invalid_argument("fit: X and Y must share a positive row count");
    }
    if (!X.allFinite() || !Y.allFinite()) {
        throw std::invalid_argument("fit: non-finite values in data");
    }
    const Eigen::Index N = X.rows();
    if (hp.M == 0) hp.M = std::min<Eigen::Index>(N, 50);
    if (hp.M < 1 || hp.M > N) {
        throw std::invalid_argument("fit: require 1 <= M <= N");
    }

    const Vector w = hp.w_override ? *hp.w_override : width_heuristic(X);
    Matrix a;
    if (aux_override) {
        if (aux_override->cols() != X.cols()) {
            throw std::invalid_argument("fit: aux points have wrong dimension");
        }
        a = *aux_override;
        hp.M = a.rows();
    } else {
        a = kmeans_centroids(X, {hp.M, hp.seed, hp.kmeans_max_iters, 0.0});
    }

    const KernelConfig cfg{hp.sigma2, hp.sigma_x2, w};
    LearnerWorkspace ws(build_design(X, a, cfg), hp.nu);

    VariationalState s;
    s.a_s_hat = hp.a_s + s.a_r_hat / s.b_r_hat;
    s.b_s_hat = hp.b_s + (s.a_r_hat / s.b_r_hat) * (s.a_z_hat / s.b_z_hat);
    s.beta = (s.a_tau_hat / s.b_tau_hat) * (s.a_z_hat / s.b_z_hat);

    FitReport report;
    for (int t = 1; t <= hp.max_outer_iters; ++t) {
        const double beta_prev = s.beta;
        s.E_m_u = update_mean_u(ws, s, Y);
        bool clamped = false;
        const double E_O = update_expected_O(ws, s.E_m_u, Y, &clamped);
        if (clamped) ++report.clamp_activations;
        s = update_hyperposteriors(s, E_O, hp, N, Y.cols());
        s.iter = t;
        report.beta_trace.push_back(s.beta);
        report.iterations = t;
        if (clamped) {
            // residual at the floor: beta grows without bound from here on
            // while alpha no longer changes, so further iterations only
            // drive the hyperposteriors toward underflow
            report.note = "expected residual hit the clamp floor; noise "
                          "precision is unbounded and the loop was stopped";
            break;
        }
        if (t >= hp.min_outer_iters &&
            std::abs(s.beta - beta_prev) / beta_prev < hp.beta_rel_tol) {
            report.converged = true;
            break;
        }
    }

    ModelParams model;
    model.B = solve_system(ws.system_matrix(s),
                           Matrix(ws.design.Psi.transpose()), "B system");
    model.alpha = model.B * Y;
    model.w = w;
    model.a = a;
    model.sigma2 = hp.sigma2;
    model.sigma_x2 = hp.sigma_x2;
    model.nu = hp.nu;
    model.n = X.cols();
    model.p = Y.cols();
    model.M = a.rows();
    model.N = N;
    model.validate();
    return {std::move(model), std::move(report)};
}

} // namespace memmap
