#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "memmap/linalg.hpp"

namespace memmap {

struct KMeansConfig {
    Eigen::Index clusters = 1;
    std::uint64_t seed = 0;
    int max_iters = 100;
    double tol = 0.0;
};

struct KMeansResult {
    Matrix centroids;                  // M x n
    std::vector<double> inertia_trace; // per Lloyd iteration
    int iterations = 0;
};

namespace detail {

inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double sq_dist_row(const Matrix& X, Eigen::Index i, const Matrix& C,
                          Eigen::Index m) {
    return (X.row(i) - C.row(m)).squaredNorm();
}

} // namespace detail

/// Lloyd's algorithm with k-means++ seeding. Deterministic for a fixed
/// (row order, seed). Empty clusters are reseeded to the point farthest
/// from its assigned centroid.
inline KMeansResult kmeans_run(const Matrix& X, const KMeansConfig& cfg) {
    const Eigen::Index N = X.rows();
    const Eigen::Index M = cfg.clusters;
    if (M < 1 || M > N) {
        throw std::invalid_argument("kmeans: require 1 <= clusters <= N");
    }
    if (cfg.max_iters < 1) {
        throw std::invalid_argument("kmeans: max_iters must be >= 1");
    }
    std::mt19937_64 rng(cfg.seed);

    // k-means++ seeding
    Matrix C(M, X.cols());
    std::vector<double> d2(N, std::numeric_limits<double>::infinity());
    {
        const auto first = static_cast<Eigen::Index>(detail::unit_uniform(rng) *
                                                     static_cast<double>(N));
        C.row(0) = X.row(std::min(first, N - 1));
    }
    for (Eigen::Index m = 1; m < M; ++m) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < N; ++i) {
            d2[i] = std::min(d2[i], detail::sq_dist_row(X, i, C, m - 1));
            total += d2[i];
        }
        Eigen::Index pick = -1;
        if (total > 0.0) {
            const double r = detail::unit_uniform(rng) * total;
            double run = 0.0;
            for (Eigen::Index i = 0; i < N; ++i) {
                run += d2[i];
                if (run >= r) { pick = i; break; }
            }
            if (pick < 0) pick = N - 1;
        } else {
            // all mass on already-chosen points; take the first unchosen row
            for (Eigen::Index i = 0; i < N; ++i) {
                bool chosen = false;
                for (Eigen::Index q = 0; q < m; ++q) {
                    if ((X.row(i) - C.row(q)).squaredNorm() == 0.0) {
                        chosen = true;
                        break;
                    }
                }
                if (!chosen) { pick = i; break; }
            }
            if (pick < 0) pick = 0;
        }
        C.row(m) = X.row(pick);
    }

    // Lloyd iterations
    KMeansResult res;
    std::vector<Eigen::Index> assign(N, -1);
    for (int it = 0; it < cfg.max_iters; ++it) {
        bool changed = false;
        double inertia = 0.0;
        for (Eigen::Index i = 0; i < N; ++i) {
            double best = std::numeric_limits<double>::infinity();
            Eigen::Index arg = 0;
            for (Eigen::Index m = 0; m < M; ++m) {
                const double d = detail::sq_dist_row(X, i, C, m);
                if (d < best) { best = d; arg = m; }
            }
            if (assign[i] != arg) { assign[i] = arg; changed = true; }
            inertia += best;
        }
        res.inertia_trace.push_back(inertia);
        res.iterations = it + 1;
        if (!changed && it > 0) break;

        Matrix sums = Matrix::Zero(M, X.cols());
        std::vector<Eigen::Index> counts(M, 0);
        for (Eigen::Index i = 0; i < N; ++i) {
            sums.row(assign[i]) += X.row(i);
            ++counts[assign[i]];
        }
        for (Eigen::Index m = 0; m < M; ++m) {
            if (counts[m] > 0) {
                C.row(m) = sums.row(m) / static_cast<double>(counts[m]);
            } else {
                // reseed to the point farthest from its assigned centroid
                double worst = -1.0;
                Eigen::Index far_i = 0;
                for (Eigen::Index i = 0; i < N; ++i) {
                    const double d = detail::sq_dist_row(X, i, C, assign[i]);
                    if (d > worst) { worst = d; far_i = i; }
                }
                C.row(m) = X.row(far_i);
            }
        }
        if (!changed) break;
    }
    res.centroids = C;
    return res;
}

inline Matrix kmeans_centroids(const Matrix& X, const KMeansConfig& cfg) {
    return kmeans_run(X, cfg).centroids;
}

/// w_k = 1 / (max_i x_k - min_i x_k)^2, with w_k = 0 for constant features.
inline Vector width_heuristic(const Matrix& X) {
    if (X.rows() < 1) {
        throw std::invalid_argument("width_heuristic: empty data");
    }
    Vector w(X.cols());
    for (Eigen::Index k = 0; k < X.cols(); ++k) {
        const double range = X.col(k).maxCoeff() - X.col(k).minCoeff();
        w[k] = range > 0.0 ? 1.0 / (range * range) : 0.0;
    }
    return w;
}

} // namespace memmap
