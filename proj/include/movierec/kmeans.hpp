#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "movierec/matrix.hpp"
#include "movierec/parallel.hpp"
#include "movierec/rng.hpp"

namespace movierec {

struct KmeansResult {
    std::vector<std::uint32_t> assignments;  // row -> cluster id
    DenseMatrix centroids;                   // k x dim
    double inertia = 0.0;
    std::vector<double> inertia_history;     // one entry per Lloyd iteration
    std::size_t iterations = 0;
};

namespace kmdetail {

inline double sq_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

// k-means++ seeding: first centroid uniform, then D^2-weighted picks.
inline DenseMatrix seed_centroids(const DenseMatrix& pts, std::size_t k, Rng& rng) {
    const std::size_t n = pts.rows();
    DenseMatrix centroids(k, pts.cols());
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::size_t pick = rng.uniform_index(n);
    for (std::size_t c = 0; c < k; ++c) {
        auto dst = centroids.row(c);
        auto src = pts.row(pick);
        std::copy(src.begin(), src.end(), dst.begin());
        if (c + 1 == k) break;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = sq_distance(pts.row(i), dst);
            if (d < d2[i]) d2[i] = d;
            total += d2[i];
        }
        if (total <= 0.0) {
            pick = rng.uniform_index(n);  // all points on existing centroids
            continue;
        }
        double target = rng.uniform() * total;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            target -= d2[i];
            if (target <= 0.0) {
                pick = i;
                break;
            }
        }
    }
    return centroids;
}

}  // namespace kmdetail

/// Lloyd iterations from the given starting centroids until assignments
/// stabilize or max_iter. Empty clusters are re-seeded with the point
/// farthest from its current centroid (lowest row index on ties).
inline KmeansResult lloyd(const DenseMatrix& pts, DenseMatrix centroids,
                          std::size_t max_iter) {
    const std::size_t n = pts.rows();
    const std::size_t dim = pts.cols();
    const std::size_t k = centroids.rows();
    if (max_iter < 1) throw std::invalid_argument("kmeans: max_iter must be >= 1");
    KmeansResult res;
    res.assignments.assign(n, 0);
    std::vector<double> point_cost(n, 0.0);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        parallel_for(0, n, [&](std::size_t i) {
            double best = std::numeric_limits<double>::infinity();
            std::uint32_t arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = kmdetail::sq_distance(pts.row(i), centroids.row(c));
                if (d < best) {
                    best = d;
                    arg = static_cast<std::uint32_t>(c);
                }
            }
            res.assignments[i] = arg;
            point_cost[i] = best;
        });
        double inertia = 0.0;
        for (double c : point_cost) inertia += c;
        res.inertia_history.push_back(inertia);
        res.iterations = iter + 1;

        // recompute centroids, fixing empty clusters first
        std::vector<std::size_t> counts(k, 0);
        for (std::uint32_t a : res.assignments) ++counts[a];
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            std::size_t farthest = 0;
            double worst = -1.0;
            for (std::size_t i = 0; i < n; ++i)
                if (counts[res.assignments[i]] > 1 && point_cost[i] > worst) {
                    worst = point_cost[i];
                    farthest = i;
                }
            --counts[res.assignments[farthest]];
            res.assignments[farthest] = static_cast<std::uint32_t>(c);
            counts[c] = 1;
            auto dst = centroids.row(c);
            auto src = pts.row(farthest);
            std::copy(src.begin(), src.end(), dst.begin());
            point_cost[farthest] = 0.0;
            changed = true;
        }

        DenseMatrix next(k, dim);
        for (std::size_t i = 0; i < n; ++i) {
            auto dst = next.row(res.assignments[i]);
            auto src = pts.row(i);
            for (std::size_t x = 0; x < dim; ++x) dst[x] += src[x];
        }
        for (std::size_t c = 0; c < k; ++c) {
            auto row = next.row(c);
            for (double& v : row) v /= static_cast<double>(counts[c]);
        }

        // converged when no centroid moved
        bool moved = false;
        for (std::size_t c = 0; c < k && !moved; ++c)
            if (kmdetail::sq_distance(next.row(c), centroids.row(c)) > 0.0)
                moved = true;
        centroids = std::move(next);
        if (!moved && !changed) break;
    }
    // final assignment pass so every point maps to its nearest centroid
    parallel_for(0, n, [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t arg = 0;
        for (std::size_t c = 0; c < k; ++c) {
            const double d = kmdetail::sq_distance(pts.row(i), centroids.row(c));
            if (d < best) {
                best = d;
                arg = static_cast<std::uint32_t>(c);
            }
        }
        res.assignments[i] = arg;
        point_cost[i] = best;
    });
    res.inertia = 0.0;
    for (double c : point_cost) res.inertia += c;
    res.centroids = std::move(centroids);
    return res;
}

/// k-means with seeded k-means++ initialization. Deterministic given seed.
inline KmeansResult kmeans(const DenseMatrix& pts, std::size_t k,
                           std::uint64_t seed, std::size_t max_iter = 300) {
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (k > pts.rows())
        throw std::invalid_argument("kmeans: k exceeds number of points");
    Rng rng(seed);
    DenseMatrix centroids = kmdetail::seed_centroids(pts, k, rng);
    return lloyd(pts, std::move(centroids), max_iter);
}

/// Inertia for k = 1..k_max, for elbow inspection.
inline std::vector<std::pair<std::size_t, double>> inertia_curve(
    const DenseMatrix& pts, std::size_t k_max, std::uint64_t seed,
    std::size_t max_iter = 300) {
    if (k_max > pts.rows())
        throw std::invalid_argument("inertia_curve: k_max exceeds number of points");
    std::vector<std::pair<std::size_t, double>> curve;
    curve.reserve(k_max);
    for (std::size_t k = 1; k <= k_max; ++k)
        curve.emplace_back(k, kmeans(pts, k, seed, max_iter).inertia);
    return curve;
}

}  // namespace movierec
