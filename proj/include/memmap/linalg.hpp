#pragma once

#include <Eigen/Dense>

#include "memmap/errors.hpp"

namespace memmap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Diagonal jitter added (scaled by sigma^2) before any SPD factorization.
inline constexpr double kSpdJitter = 1e-8;

/// Cholesky of A + jitter*I. Throws NumericError when the factorization
/// fails even after jittering.
inline Eigen::LLT<Matrix> factorize_spd(const Matrix& A, double jitter,
                                        const char* what = "matrix") {
    Matrix Aj = A;
    Aj.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(Aj);
    if (llt.info() != Eigen::Success) {
        throw NumericError(std::string(what) +
                           " is not positive-definite after jitter");
    }
    return llt;
}

/// log(det(A)) from an existing Cholesky factor.
inline double log_det_from_llt(const Eigen::LLT<Matrix>& llt) {
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

} // namespace memmap
