#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "movierec/matrix.hpp"
#include "movierec/parallel.hpp"
#include "movierec/similarity.hpp"

namespace movierec {

/// One nearest-neighbor hit: row index into the queried matrix, the row's
/// label when the matrix is labeled (0 otherwise), and cosine distance.
struct Neighbor {
    std::size_t row = 0;
    std::int64_t label = 0;
    double distance = 0.0;
};

struct KnnResult {
    std::vector<Neighbor> neighbors;  // ascending distance, self excluded
    bool truncated = false;           // k exceeded n_rows - 1
};

/// Brute-force k nearest rows by cosine distance 1 - cos(row_q, row_i).
/// Ties break on ascending label (row index when unlabeled).
inline KnnResult knn_brute(const SparseMatrix& mat, std::size_t query_row,
                           std::size_t k) {
    if (query_row >= mat.rows())
        throw std::invalid_argument("knn_brute: query row out of range");
    if (k < 1) throw std::invalid_argument("knn_brute: k must be >= 1");
    KnnResult res;
    if (mat.rows() == 0) return res;
    if (k > mat.rows() - 1) {
        k = mat.rows() - 1;
        res.truncated = true;
    }
    const bool labeled = !mat.row_labels().empty();
    const auto query = mat.row(query_row);
    std::vector<Neighbor> all(mat.rows());
    parallel_for(0, mat.rows(), [&](std::size_t i) {
        all[i].row = i;
        all[i].label = labeled ? mat.row_labels()[i] : static_cast<std::int64_t>(i);
        all[i].distance = 1.0 - cosine_sparse(query, mat.row(i));
    });
    all.erase(all.begin() + static_cast<std::ptrdiff_t>(query_row));
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        return a.distance != b.distance ? a.distance < b.distance
                                        : a.label < b.label;
    });
    if (all.size() > k) all.resize(k);
    res.neighbors = std::move(all);
    return res;
}

}  // namespace movierec
