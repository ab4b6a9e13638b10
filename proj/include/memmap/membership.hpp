#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "memmap/kernel.hpp"
#include "memmap/linalg.hpp"

namespace memmap {

/// Student-t shaped membership function zeta with mean m_y, covariance
/// matrix K and degrees of freedom nu > 2.
struct StudentTMembership {
    Vector mean;
    Matrix cov;
    double nu = 5.0;

    [[nodiscard]] Eigen::Index dim() const { return mean.size(); }

    void validate() const {
        if (!(nu > 2.0)) {
            throw std::invalid_argument("StudentTMembership: nu must exceed 2");
        }
        if (cov.rows() != cov.cols() || cov.rows() != mean.size()) {
            throw std::invalid_argument(
                "StudentTMembership: covariance shape does not match mean");
        }
        if (!cov.isApprox(cov.transpose(), 1e-12)) {
            throw std::invalid_argument(
                "StudentTMembership: covariance is not symmetric");
        }
    }
};

namespace detail {

inline Eigen::LLT<Matrix> membership_llt(const StudentTMembership& m) {
    const double jitter = kSpdJitter * m.cov.diagonal().maxCoeff();
    return factorize_spd(m.cov, jitter, "membership covariance");
}

} // namespace detail

/// log zeta(y); computed in log space so large exponents do not underflow.
inline double log_membership_eval(const StudentTMembership& m, const Vector& y) {
    m.validate();
    if (y.size() != m.dim()) {
        throw std::invalid_argument("membership_eval: point dimension mismatch");
    }
    const auto llt = detail::membership_llt(m);
    const Vector r = y - m.mean;
    const double q = r.dot(llt.solve(r));
    const double d = static_cast<double>(m.dim());
    return -0.5 * (m.nu + d) * std::log1p(q / (m.nu - 2.0));
}

/// zeta(y) in (0, 1]; equals 1 exactly at y = mean.
inline double membership_eval(const StudentTMembership& m, const Vector& y) {
    return std::exp(log_membership_eval(m, y));
}

/// Z such that zeta / Z is the multivariate-t density with mean m_y,
/// covariance K and dof nu (scale matrix ((nu-2)/nu) K):
///   Z = Gamma(nu/2)/Gamma((nu+d)/2) * (nu*pi)^{d/2} * ((nu-2)/nu)^{d/2} * |K|^{1/2}
inline double normalization_constant(const StudentTMembership& m) {
    m.validate();
    const auto llt = detail::membership_llt(m);
    const double d = static_cast<double>(m.dim());
    const double log_z = std::lgamma(0.5 * m.nu) - std::lgamma(0.5 * (m.nu + d)) +
                         0.5 * d * std::log(m.nu * std::numbers::pi) +
                         0.5 * d * std::log((m.nu - 2.0) / m.nu) +
                         0.5 * log_det_from_llt(llt);
    return std::exp(log_z);
}

/// Interpolated membership mu_{f;u} describing mapping outputs at data
/// points x given outputs u at inducing points a.
struct ConditionalMembership {
    Vector mean;             // m_bar_f = K_xa K_aa^-1 u
    Matrix base_scale;       // K_bar_xx = K_xx - K_xa K_aa^-1 K_ax
    double scale_multiplier; // (nu + u^T K_aa^-1 u - 2) / (nu + M - 2)
    double nu_eff_exponent;  // (nu + M + N) / 2
    double dof_shift;        // nu + M - 2
};

/// Builds mu_{f;u}. The same jitter is applied to the K_aa and K_xx
/// diagonals so the partitioned-inverse identity holds exactly for the
/// jittered Gram blocks.
inline ConditionalMembership conditional_membership(const Matrix& x_pts,
                                                    const Matrix& a_pts,
                                                    const Vector& u,
                                                    const KernelConfig& cfg,
                                                    double nu) {
    if (!(nu > 2.0)) {
        throw std::invalid_argument("conditional_membership: nu must exceed 2");
    }
    if (u.size() != a_pts.rows()) {
        throw std::invalid_argument(
            "conditional_membership: u length does not match inducing points");
    }
    const double N = static_cast<double>(x_pts.rows());
    const double M = static_cast<double>(a_pts.rows());
    const double jitter = kSpdJitter * cfg.sigma2;

    const Matrix K_xa = gram_matrix(x_pts, a_pts, cfg);
    Matrix K_xx = gram_matrix(x_pts, x_pts, cfg);
    K_xx.diagonal().array() += jitter;
    const auto llt_aa = factorize_spd(gram_matrix(a_pts, a_pts, cfg), jitter,
                                      "K_aa");

    ConditionalMembership c;
    c.mean = K_xa * llt_aa.solve(u);
    c.base_scale = K_xx - K_xa * llt_aa.solve(K_xa.transpose());
    c.scale_multiplier = (nu + u.dot(llt_aa.solve(u)) - 2.0) / (nu + M - 2.0);
    c.nu_eff_exponent = 0.5 * (nu + M + N);
    c.dof_shift = nu + M - 2.0;
    if (!(c.scale_multiplier > 0.0)) {
        throw NumericError("conditional_membership: nonpositive scale multiplier");
    }
    return c;
}

inline double log_conditional_eval(const ConditionalMembership& c,
                                   const Vector& f_tilde) {
    if (f_tilde.size() != c.mean.size()) {
        throw std::invalid_argument("conditional_eval: dimension mismatch");
    }
    Eigen::LLT<Matrix> llt(c.base_scale);
    if (llt.info() != Eigen::Success) {
        llt = factorize_spd(c.base_scale,
                            kSpdJitter * c.base_scale.diagonal().maxCoeff(),
                            "conditional scale");
    }
    const Vector r = f_tilde - c.mean;
    const double q = r.dot(llt.solve(r)) / c.scale_multiplier;
    return -c.nu_eff_exponent * std::log1p(q / c.dof_shift);
}

/// mu_{f;u}(f_tilde) in (0, 1]; equals 1 at the interpolated mean.
inline double conditional_eval(const ConditionalMembership& c,
                               const Vector& f_tilde) {
    return std::exp(log_conditional_eval(c, f_tilde));
}

/// Callable form of zeta with the factorization hoisted out, for use as a
/// quadrature weight.
inline std::function<double(const Vector&)>
membership_evaluator(const StudentTMembership& m) {
    m.validate();
    const auto llt = detail::membership_llt(m);
    const Vector mean = m.mean;
    const double nu = m.nu;
    const double expo = -0.5 * (nu + static_cast<double>(m.dim()));
    return [llt, mean, nu, expo](const Vector& y) {
        const Vector r = y - mean;
        const double q = r.dot(llt.solve(r));
        return std::exp(expo * std::log1p(q / (nu - 2.0)));
    };
}

/// Tensor-grid trapezoid quadrature domain, d <= 3.
struct QuadratureGrid {
    Vector lo;
    Vector hi;
    int nodes_per_axis = 4096;
};

/// Default box for a membership function: half-width 50 * sqrt(max
/// diagonal of the covariance), 4096 nodes per axis up to d = 2 and 256
/// for d = 3.
inline QuadratureGrid default_grid(const StudentTMembership& m) {
    const double half = 50.0 * std::sqrt(m.cov.diagonal().maxCoeff());
    QuadratureGrid g;
    g.lo = m.mean.array() - half;
    g.hi = m.mean.array() + half;
    g.nodes_per_axis = m.dim() <= 2 ? 4096 : 256;
    return g;
}

/// <g>_mu = (int g mu) / (int mu) over the box. Weight mu must be strictly
/// positive on the box.
inline double weighted_average(const std::function<double(const Vector&)>& g,
                               const std::function<double(const Vector&)>& mu,
                               const QuadratureGrid& grid) {
    const Eigen::Index d = grid.lo.size();
    if (d < 1 || d > 3) {
        throw std::invalid_argument("weighted_average: only d <= 3 supported");
    }
    if (grid.hi.size() != d || grid.nodes_per_axis < 2) {
        throw std::invalid_argument("weighted_average: malformed grid");
    }
    const int Q = grid.nodes_per_axis;
    Vector step(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        step[k] = (grid.hi[k] - grid.lo[k]) / static_cast<double>(Q - 1);
    }
    double num = 0.0;
    double den = 0.0;
    Vector y(d);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    const auto axis_weight = [Q](int i) { return (i == 0 || i == Q - 1) ? 0.5 : 1.0; };
    while (true) {
        double wgt = 1.0;
        for (Eigen::Index k = 0; k < d; ++k) {
            y[k] = grid.lo[k] + step[k] * idx[static_cast<std::size_t>(k)];
            wgt *= axis_weight(idx[static_cast<std::size_t>(k)]);
        }
        const double mv = mu(y);
        den += wgt * mv;
        num += wgt * g(y) * mv;
        Eigen::Index k = 0;
        for (; k < d; ++k) {
            if (++idx[static_cast<std::size_t>(k)] < Q) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
        if (k == d) break;
    }
    if (!(den > 0.0)) {
        throw NumericError("weighted_average: weight integrated to zero");
    }
    return num / den;
}

} // namespace memmap
