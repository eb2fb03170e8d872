#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "movierec/matrix.hpp"
#include "movierec/parallel.hpp"
#include "movierec/rng.hpp"

namespace movierec {

/// Rank-k factorization A ~ latent * basis with latent = U_k diag(S).
struct SvdFactors {
    std::size_t k = 0;
    std::vector<double> singular_values;  // non-increasing, >= 0
    DenseMatrix latent;                   // n_rows x k, row labels copied from input
    DenseMatrix basis;                    // k x n_cols, orthonormal rows
};

struct SvdOptions {
    std::size_t oversample = 10;
    std::size_t power_iterations = 5;
};

namespace svddetail {

// y = A * x
inline void mul_vec(const SparseMatrix& a, std::span<const double> x,
                    std::span<double> y) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (const auto& e : a.row(i)) acc += e.value * x[e.col];
        y[i] = acc;
    }
}

inline void mul_vec(const DenseMatrix& a, std::span<const double> x,
                    std::span<double> y) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto row = a.row(i);
        double acc = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * x[c];
        y[i] = acc;
    }
}

// y = A^T * x
inline void mul_tvec(const SparseMatrix& a, std::span<const double> x,
                     std::span<double> y) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (const auto& e : a.row(i)) y[e.col] += e.value * xi;
    }
}

inline void mul_tvec(const DenseMatrix& a, std::span<const double> x,
                     std::span<double> y) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const auto row = a.row(i);
        for (std::size_t c = 0; c < row.size(); ++c) y[c] += row[c] * xi;
    }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Replaces a numerically vanished panel row with a canonical direction
// orthogonal to rows [0, j).
inline void complete_row(DenseMatrix& panel, std::size_t j) {
    const std::size_t dim = panel.cols();
    for (std::size_t t = 0; t < dim; ++t) {
        auto row = panel.row(j);
        std::fill(row.begin(), row.end(), 0.0);
        row[(j + t) % dim] = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t i = 0; i < j; ++i) {
                const double c = dot(panel.row(i), row);
                const auto qi = panel.row(i);
                for (std::size_t x = 0; x < dim; ++x) row[x] -= c * qi[x];
            }
        const double n = norm2(row);
        if (n > 0.5) {  // canonical vector mostly outside the current span
            for (double& v : row) v /= n;
            return;
        }
    }
    throw std::logic_error("svd: cannot complete orthonormal panel");
}

// Right-looking modified Gram-Schmidt on the rows of `panel`. When
// `coeffs` is non-null it receives the lower-triangular factor so that
// panel_in = coeffs * panel_out. A second pass (needed for the subspaces
// that feed the public factors) is triggered by `passes` = 2; each pass
// folds its coefficients into `coeffs`.
inline void orthonormalize_rows(DenseMatrix& panel, DenseMatrix* coeffs = nullptr,
                                int passes = 1) {
    const std::size_t s = panel.rows();
    if (coeffs) {
        *coeffs = DenseMatrix(s, s);
        for (std::size_t i = 0; i < s; ++i) coeffs->at(i, i) = 1.0;
    }
    for (int pass = 0; pass < passes; ++pass) {
        DenseMatrix step(coeffs ? s : 0, coeffs ? s : 0);
        for (std::size_t j = 0; j < s; ++j) {
            auto qj = panel.row(j);
            const double n = norm2(qj);
            if (n < 1e-250) {
                complete_row(panel, j);
                if (coeffs) step.at(j, j) = 0.0;
            } else {
                for (double& v : qj) v /= n;
                if (coeffs) step.at(j, j) = n;
            }
            parallel_for(j + 1, s, [&](std::size_t c) {
                auto rc = panel.row(c);
                const double coef = dot(qj, rc);
                if (coeffs) step.at(c, j) = coef;
                for (std::size_t x = 0; x < rc.size(); ++x) rc[x] -= coef * qj[x];
            });
        }
        if (coeffs) {
            if (pass == 0) {
                *coeffs = step;
            } else {
                // coeffs = coeffs * step (both lower triangular)
                DenseMatrix merged(s, s);
                for (std::size_t i = 0; i < s; ++i)
                    for (std::size_t j = 0; j <= i; ++j) {
                        double acc = 0.0;
                        for (std::size_t t = j; t <= i; ++t)
                            acc += coeffs->at(i, t) * step.at(t, j);
                        merged.at(i, j) = acc;
                    }
                *coeffs = merged;
            }
        }
    }
}

// One-sided Jacobi SVD of a small square matrix given as a transposed
// panel (row j of `wt` is column j of W). On return the rows of `wt` are
// the left singular directions scaled by the singular values and `vt`
// accumulates the rotations (row j = column j of V): W = U diag(S) V^T.
inline void jacobi_svd_transposed(DenseMatrix& wt, DenseMatrix& vt,
                                  std::vector<double>& sigma) {
    const std::size_t s = wt.rows();
    vt = DenseMatrix(s, s);
    for (std::size_t i = 0; i < s; ++i) vt.at(i, i) = 1.0;
    const double tol = 1e-15;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < s; ++p)
            for (std::size_t q = p + 1; q < s; ++q) {
                auto wp = wt.row(p), wq = wt.row(q);
                const double app = dot(wp, wp);
                const double aqq = dot(wq, wq);
                const double apq = dot(wp, wq);
                if (app == 0.0 || aqq == 0.0) continue;
                if (std::abs(apq) <= tol * std::sqrt(app * aqq)) continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = c * t;
                auto vp = vt.row(p), vq = vt.row(q);
                for (std::size_t x = 0; x < s; ++x) {
                    const double a = wp[x], b = wq[x];
                    wp[x] = c * a - sn * b;
                    wq[x] = sn * a + c * b;
                    const double va = vp[x], vb = vq[x];
                    vp[x] = c * va - sn * vb;
                    vq[x] = sn * va + c * vb;
                }
            }
        if (!rotated) break;
    }
    sigma.resize(s);
    for (std::size_t j = 0; j < s; ++j) {
        const double n = norm2(wt.row(j));
        sigma[j] = n;
        auto row = wt.row(j);
        if (n > 0.0)
            for (double& v : row) v /= n;
        else
            std::fill(row.begin(), row.end(), 0.0);
    }
}

}  // namespace svddetail

// Randomized range-finder truncated SVD (Halko, Martinsson, Tropp 2011,
// http://arxiv.org/abs/0909.4061): Gaussian test matrix of width
// k + oversample, power iterations with re-orthonormalization, then an
// exact SVD of the projected matrix via QR + one-sided Jacobi.
// Deterministic for a fixed seed.
template <typename Matrix>
SvdFactors truncated_svd(const Matrix& a, std::size_t k, std::uint64_t seed,
                         const SvdOptions& opts = {}) {
    using namespace svddetail;
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    const std::size_t min_dim = std::min(m, n);
    if (k < 1 || k > min_dim)
        throw std::invalid_argument("truncated_svd: k out of range");
    const std::size_t s = std::min(k + opts.oversample, min_dim);

    // Gaussian test vectors, one per panel row.
    DenseMatrix omega(s, n);
    {
        Rng rng(seed);
        for (double& v : omega.data()) v = rng.normal();
    }

    // Range finder: rows of qt hold the current orthonormal basis of the
    // column space sample.
    DenseMatrix qt(s, m);
    parallel_for(0, s, [&](std::size_t j) { mul_vec(a, omega.row(j), qt.row(j)); });
    orthonormalize_rows(qt);
    DenseMatrix zt(s, n);
    for (std::size_t it = 0; it < opts.power_iterations; ++it) {
        parallel_for(0, s, [&](std::size_t j) { mul_tvec(a, qt.row(j), zt.row(j)); });
        orthonormalize_rows(zt);
        parallel_for(0, s, [&](std::size_t j) { mul_vec(a, zt.row(j), qt.row(j)); });
        orthonormalize_rows(qt);
    }
    orthonormalize_rows(qt, nullptr, 2);

    // Projected matrix B = Q^T A, one row per basis vector.
    DenseMatrix b(s, n);
    parallel_for(0, s, [&](std::size_t j) { mul_tvec(a, qt.row(j), b.row(j)); });

    // B = L * P with P orthonormal rows, then L = U_L diag(S) V_L^T, so
    // A ~ (Q U_L) diag(S) (V_L^T P).
    DenseMatrix coeffs;
    orthonormalize_rows(b, &coeffs, 2);

    DenseMatrix lt(s, s);  // row j = column j of L
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j) lt.at(j, i) = coeffs.at(i, j);
    DenseMatrix vt;
    std::vector<double> sigma;
    jacobi_svd_transposed(lt, vt, sigma);  // rows of lt become columns of U_L

    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return sigma[x] != sigma[y] ? sigma[x] > sigma[y] : x < y;
    });

    SvdFactors f;
    f.k = k;
    f.singular_values.resize(k);
    for (std::size_t c = 0; c < k; ++c) f.singular_values[c] = sigma[order[c]];

    // latent(i, c) = sigma_c * <Q row i, U_L column c>
    DenseMatrix q(m, s);
    for (std::size_t j = 0; j < s; ++j)
        for (std::size_t i = 0; i < m; ++i) q.at(i, j) = qt.at(j, i);
    f.latent = DenseMatrix(m, k);
    parallel_for(0, m, [&](std::size_t i) {
        auto qi = q.row(i);
        auto out = f.latent.row(i);
        for (std::size_t c = 0; c < k; ++c)
            out[c] = f.singular_values[c] == 0.0
                         ? 0.0
                         : f.singular_values[c] * dot(qi, lt.row(order[c]));
    });
    f.latent.row_labels() = a.row_labels();

    // basis row c = V_L column c (as coefficients) applied to the rows of P
    f.basis = DenseMatrix(k, n);
    parallel_for(0, k, [&](std::size_t c) {
        auto out = f.basis.row(c);
        const auto vcol = vt.row(order[c]);
        for (std::size_t j = 0; j < s; ++j) {
            const double w = vcol[j];
            if (w == 0.0) continue;
            const auto pj = b.row(j);
            for (std::size_t x = 0; x < n; ++x) out[x] += w * pj[x];
        }
    });
    return f;
}

inline void save_factors(std::ostream& out, const SvdFactors& f) {
    detail::write_magic(out, "MRSF");
    detail::write_pod<std::uint32_t>(out, 1);
    detail::write_pod<std::uint64_t>(out, f.k);
    out.write(reinterpret_cast<const char*>(f.singular_values.data()),
              static_cast<std::streamsize>(f.k * sizeof(double)));
    save_matrix(out, f.latent);
    save_matrix(out, f.basis);
}

inline SvdFactors load_factors(std::istream& in) {
    detail::expect_magic(in, "MRSF");
    const auto version = detail::read_pod<std::uint32_t>(in);
    if (version != 1) throw DataError("unsupported factors artifact version");
    SvdFactors f;
    f.k = detail::read_pod<std::uint64_t>(in);
    f.singular_values.resize(f.k);
    in.read(reinterpret_cast<char*>(f.singular_values.data()),
            static_cast<std::streamsize>(f.k * sizeof(double)));
    if (!in) throw DataError("truncated factors artifact");
    f.latent = load_matrix(in);
    f.basis = load_matrix(in);
    return f;
}

inline void save_factors(const std::string& path, const SvdFactors& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    save_factors(out, f);
}

inline SvdFactors load_factors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return load_factors(in);
}

}  // namespace movierec
