#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "movierec/errors.hpp"

namespace movierec {

/// (column index, value) entry of a sparse row.
struct SparseEntry {
    std::uint32_t col;
    double value;
};

// Row-major compressed sparse matrix. Column indices are strictly
// increasing within each row; explicit zeros and non-finite values are
// rejected at construction. Rows/columns may carry int64 labels
// (MovieId / UserId) used by the recommenders for reporting.
class SparseMatrix {
public:
    SparseMatrix() = default;

    SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
        row_start_.assign(rows + 1, 0);
    }

    /// Builds from (row, col, value) triplets; duplicates are an error.
    static SparseMatrix from_triplets(
        std::size_t rows, std::size_t cols,
        std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> triplets) {
        std::sort(triplets.begin(), triplets.end(),
                  [](const auto& a, const auto& b) {
                      return std::get<0>(a) != std::get<0>(b)
                                 ? std::get<0>(a) < std::get<0>(b)
                                 : std::get<1>(a) < std::get<1>(b);
                  });
        SparseMatrix m(rows, cols);
        m.entries_.reserve(triplets.size());
        std::size_t at = 0;
        for (std::size_t r = 0; r < rows; ++r) {
            m.row_start_[r] = m.entries_.size();
            while (at < triplets.size() && std::get<0>(triplets[at]) == r) {
                auto [row, col, value] = triplets[at];
                if (col >= cols) throw std::invalid_argument("sparse: column out of range");
                if (!std::isfinite(value)) throw std::invalid_argument("sparse: non-finite value");
                if (at > 0 && std::get<0>(triplets[at - 1]) == row &&
                    std::get<1>(triplets[at - 1]) == col)
                    throw std::invalid_argument("sparse: duplicate entry");
                if (value != 0.0) m.entries_.push_back({col, value});
                ++at;
            }
        }
        if (at != triplets.size()) throw std::invalid_argument("sparse: row out of range");
        m.row_start_[rows] = m.entries_.size();
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return entries_.size(); }

    std::span<const SparseEntry> row(std::size_t r) const {
        return {entries_.data() + row_start_[r], row_start_[r + 1] - row_start_[r]};
    }

    std::vector<std::int64_t>& row_labels() { return row_labels_; }
    const std::vector<std::int64_t>& row_labels() const { return row_labels_; }
    std::vector<std::int64_t>& col_labels() { return col_labels_; }
    const std::vector<std::int64_t>& col_labels() const { return col_labels_; }

    /// Dense copy of row r.
    std::vector<double> row_dense(std::size_t r) const {
        std::vector<double> out(cols_, 0.0);
        for (const auto& e : row(r)) out[e.col] = e.value;
        return out;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::size_t> row_start_{0};
    std::vector<SparseEntry> entries_;
    std::vector<std::int64_t> row_labels_;
    std::vector<std::int64_t> col_labels_;
};

/// Row-major dense matrix of doubles with optional row labels.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    std::vector<std::int64_t>& row_labels() { return row_labels_; }
    const std::vector<std::int64_t>& row_labels() const { return row_labels_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
    std::vector<std::int64_t> row_labels_;
};

// --- binary serialization -------------------------------------------------
//
// Little-endian layout, shared by the CLI artifact cache:
//
//   DenseMatrix   "MRDM" u32 version=1
//                 u64 rows, u64 cols, u8 has_row_labels
//                 [i64 * rows row labels]
//                 f64 * rows*cols   (row-major)
//
//   SvdFactors    "MRSF" u32 version=1
//                 u64 k, f64 * k singular values,
//                 DenseMatrix latent, DenseMatrix basis

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "serialized artifacts are little-endian");

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw DataError("truncated matrix artifact");
    return v;
}

inline void write_magic(std::ostream& out, const char magic[5]) {
    out.write(magic, 4);
}

inline void expect_magic(std::istream& in, const char magic[5]) {
    char buf[4];
    in.read(buf, 4);
    if (!in || std::memcmp(buf, magic, 4) != 0)
        throw DataError(std::string("bad artifact magic, expected ") + magic);
}

}  // namespace detail

inline void save_matrix(std::ostream& out, const DenseMatrix& m) {
    detail::write_magic(out, "MRDM");
    detail::write_pod<std::uint32_t>(out, 1);
    detail::write_pod<std::uint64_t>(out, m.rows());
    detail::write_pod<std::uint64_t>(out, m.cols());
    const bool labeled = !m.row_labels().empty();
    detail::write_pod<std::uint8_t>(out, labeled ? 1 : 0);
    if (labeled)
        out.write(reinterpret_cast<const char*>(m.row_labels().data()),
                  static_cast<std::streamsize>(m.rows() * sizeof(std::int64_t)));
    out.write(reinterpret_cast<const char*>(m.data().data()),
              static_cast<std::streamsize>(m.data().size() * sizeof(double)));
}

inline DenseMatrix load_matrix(std::istream& in) {
    detail::expect_magic(in, "MRDM");
    const auto version = detail::read_pod<std::uint32_t>(in);
    if (version != 1) throw DataError("unsupported matrix artifact version");
    const auto rows = detail::read_pod<std::uint64_t>(in);
    const auto cols = detail::read_pod<std::uint64_t>(in);
    const auto labeled = detail::read_pod<std::uint8_t>(in);
    DenseMatrix m(rows, cols);
    if (labeled) {
        m.row_labels().resize(rows);
        in.read(reinterpret_cast<char*>(m.row_labels().data()),
                static_cast<std::streamsize>(rows * sizeof(std::int64_t)));
    }
    in.read(reinterpret_cast<char*>(m.data().data()),
            static_cast<std::streamsize>(m.data().size() * sizeof(double)));
    if (!in) throw DataError("truncated matrix artifact");
    return m;
}

inline void save_matrix(const std::string& path, const DenseMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    save_matrix(out, m);
}

inline DenseMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return load_matrix(in);
}

}  // namespace movierec
