#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>

#include "movierec/matrix.hpp"

namespace movierec {

/// Cosine similarity x.y / (|x||y|). Zero vectors compare as 0 so that
/// movies with no signal rank last instead of aborting a batch.
inline double cosine(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("cosine: dimension mismatch");
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        nx += x[i] * x[i];
        ny += y[i] * y[i];
    }
    if (nx == 0.0 || ny == 0.0) return 0.0;
    double s = dot / (std::sqrt(nx) * std::sqrt(ny));
    if (s > 1.0) s = 1.0;
    if (s < -1.0) s = -1.0;
    return s;
}

/// Cosine of two sparse rows (entries sorted by column index).
inline double cosine_sparse(std::span<const SparseEntry> x,
                            std::span<const SparseEntry> y) {
    double dot = 0.0, nx = 0.0, ny = 0.0;
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        if (x[i].col == y[j].col) {
            dot += x[i].value * y[j].value;
            ++i;
            ++j;
        } else if (x[i].col < y[j].col) {
            ++i;
        } else {
            ++j;
        }
    }
    for (const auto& e : x) nx += e.value * e.value;
    for (const auto& e : y) ny += e.value * e.value;
    if (nx == 0.0 || ny == 0.0) return 0.0;
    double s = dot / (std::sqrt(nx) * std::sqrt(ny));
    if (s > 1.0) s = 1.0;
    if (s < -1.0) s = -1.0;
    return s;
}

// Pairwise-complete Pearson correlation of two labeled sparse columns:
// only positions stored in BOTH columns enter the sums, mirroring a
// NaN-aware pivot. Returns nothing when the overlap is below min_overlap
// or either restricted column has zero variance.
inline std::optional<double> pearson_pairwise(std::span<const SparseEntry> a,
                                              std::span<const SparseEntry> b,
                                              std::size_t min_overlap = 1) {
    std::size_t n = 0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].col == b[j].col) {
            const double x = a[i].value, y = b[j].value;
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
            ++n;
            ++i;
            ++j;
        } else if (a[i].col < b[j].col) {
            ++i;
        } else {
            ++j;
        }
    }
    if (n < min_overlap || n < 2) return std::nullopt;
    const double dn = static_cast<double>(n);
    const double cov = sxy - sx * sy / dn;
    const double vx = sxx - sx * sx / dn;
    const double vy = syy - sy * sy / dn;
    if (vx <= 0.0 || vy <= 0.0) return std::nullopt;
    // single sqrt of the product keeps half-step rating inputs exact
    double r = cov / std::sqrt(vx * vy);
    if (!std::isfinite(r)) return std::nullopt;
    if (r > 1.0) r = 1.0;
    if (r < -1.0) r = -1.0;
    return r;
}

}  // namespace movierec
