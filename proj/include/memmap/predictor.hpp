#pragma once

#include "memmap/kernel.hpp"
#include "memmap/learner.hpp"

namespace memmap {

/// G(x*) against the model's inducing points.
inline Vector feature_row_G(const Vector& x, const ModelParams& model) {
    if (x.size() != model.n) {
        throw std::invalid_argument("feature_row_G: input dimension mismatch");
    }
    return feature_row(x, model.a, model.kernel_config());
}

/// y_hat(x*) = alpha^T G(x*)^T.
inline Vector predict(const Vector& x_star, const ModelParams& model) {
    return model.alpha.transpose() * feature_row_G(x_star, model);
}

inline Matrix predict_batch(const Matrix& X_star, const ModelParams& model) {
    if (X_star.cols() != model.n) {
        throw std::invalid_argument("predict_batch: input dimension mismatch");
    }
    Matrix out(X_star.rows(), model.p);
    for (Eigen::Index q = 0; q < X_star.rows(); ++q) {
        out.row(q) = predict(X_star.row(q), model);
    }
    return out;
}

/// Analytic Jacobian d y_hat / d x, p x n. Each feature differentiates as
///   dG_m/dx_k = -G_m * w_k (x_k - a^m_k) / (1 + w_k sigma_x^2).
inline Matrix predict_jacobian(const Vector& x_star, const ModelParams& model) {
    const Vector G = feature_row_G(x_star, model);
    Matrix dG(model.M, model.n);
    for (Eigen::Index m = 0; m < model.M; ++m) {
        for (Eigen::Index k = 0; k < model.n; ++k) {
            const double denom = 1.0 + model.w[k] * model.sigma_x2;
            dG(m, k) = -G[m] * model.w[k] * (x_star[k] - model.a(m, k)) / denom;
        }
    }
    return model.alpha.transpose() * dG;
}

} // namespace memmap
