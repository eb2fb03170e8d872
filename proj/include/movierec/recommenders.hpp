#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "movierec/dataset.hpp"
#include "movierec/kmeans.hpp"
#include "movierec/knn.hpp"
#include "movierec/matrix.hpp"
#include "movierec/similarity.hpp"
#include "movierec/svd.hpp"
#include "movierec/tfidf.hpp"

namespace movierec {

enum class ValueKind {
    weighted_score,
    pearson_r,
    cosine_sim,
    knn_distance,  // ascending; everything else descending
    latent_cosine,
    predicted_rating,
};

struct ScoredMovie {
    MovieId movie = 0;
    std::string title;
    double value = 0.0;
    ValueKind kind = ValueKind::weighted_score;
};

/// Why a recommender returned nothing (empty list is a valid outcome too).
enum class RecError {
    none,
    unknown_title,
    ambiguous_title,
    unknown_genre,
    not_eligible,
    no_ratings,       // movie absent from the rating pivot
    too_few_ratings,  // correlation undefined everywhere
    no_genre_signal,  // query movie has an empty genre set
};

struct RecResult {
    RecError error = RecError::none;
    std::vector<MovieId> candidates;  // filled for ambiguous_title
    std::vector<ScoredMovie> items;
    bool truncated = false;  // knn: k exceeded the available rows
};

/// Shrinkage of a movie's mean rating R toward the global mean C:
/// v/(v+m) * R + m/(v+m) * C.
inline double weighted_score(std::size_t v, std::size_t m, double r, double c) {
    if (m < 1) throw std::invalid_argument("weighted_score: m must be >= 1");
    const double dv = static_cast<double>(v);
    const double dm = static_cast<double>(m);
    return dv / (dv + dm) * r + dm / (dv + dm) * c;
}

namespace recdetail {

inline std::string fold_case(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text) {
        const unsigned char u = static_cast<unsigned char>(ch);
        out.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : ch);
    }
    return out;
}

inline void sort_scored(std::vector<ScoredMovie>& items, bool ascending) {
    std::sort(items.begin(), items.end(),
              [ascending](const ScoredMovie& a, const ScoredMovie& b) {
                  if (a.value != b.value)
                      return ascending ? a.value < b.value : a.value > b.value;
                  return a.movie < b.movie;
              });
}

inline ScoredMovie make_scored(const Dataset& ds, MovieId id, double value,
                               ValueKind kind) {
    const Movie* movie = ds.find_movie(id);
    return {id, movie ? movie->title : std::string(), value, kind};
}

/// Resolves a title into `result`; true when usable.
inline bool resolve_into(const Dataset& ds, std::string_view title,
                         RecResult& result, MovieId& id) {
    const TitleMatch match = resolve_title(ds, title);
    if (match.status == TitleMatch::Status::unknown) {
        result.error = RecError::unknown_title;
        return false;
    }
    if (match.status == TitleMatch::Status::ambiguous) {
        result.error = RecError::ambiguous_title;
        result.candidates = match.candidates;
        return false;
    }
    id = match.id;
    return true;
}

/// Genre strings ("Action Adventure ...") of the eligible movies,
/// ascending MovieId.
inline std::pair<std::vector<MovieId>, std::vector<std::string>>
eligible_genre_corpus(const Dataset& ds) {
    std::vector<MovieId> ids = ds.eligible_ids();
    std::vector<std::string> docs;
    docs.reserve(ids.size());
    for (MovieId id : ids) {
        const Movie* movie = ds.find_movie(id);
        std::string text;
        for (const auto& genre : movie->genres) {
            if (!text.empty()) text.push_back(' ');
            text += genre;
        }
        docs.push_back(std::move(text));
    }
    return {std::move(ids), std::move(docs)};
}

}  // namespace recdetail

/// Top-n eligible movies carrying `genre`, by weighted score.
inline RecResult recommend_by_genre(const Dataset& ds, std::string_view genre,
                                    std::size_t n) {
    RecResult result;
    const std::string folded = recdetail::fold_case(genre);
    bool known = false;
    for (const auto& [id, movie] : ds.movies) {
        for (const auto& g : movie.genres)
            if (recdetail::fold_case(g) == folded) {
                known = true;
                break;
            }
        if (known) break;
    }
    if (!known) {
        result.error = RecError::unknown_genre;
        return result;
    }
    for (const auto& [id, s] : ds.stats) {
        if (!s.eligible) continue;
        const Movie* movie = ds.find_movie(id);
        const bool has = std::any_of(movie->genres.begin(), movie->genres.end(),
                                     [&](const std::string& g) {
                                         return recdetail::fold_case(g) == folded;
                                     });
        if (!has) continue;
        result.items.push_back(recdetail::make_scored(
            ds, id, weighted_score(s.count, ds.min_ratings, s.mean, ds.global_mean),
            ValueKind::weighted_score));
    }
    recdetail::sort_scored(result.items, false);
    if (result.items.size() > n) result.items.resize(n);
    return result;
}

/// Pairwise-complete Pearson of the query movie's rating column against
/// every other movie's; undefined correlations are dropped.
inline RecResult recommend_pearson_by_id(const Dataset& ds, MovieId query,
                                         std::size_t n,
                                         std::size_t min_overlap = 1) {
    RecResult result;
    if (!ds.find_movie(query)) {
        result.error = RecError::unknown_title;
        return result;
    }
    const EligStats* s = ds.find_stats(query);
    if (!s) {
        result.error = RecError::no_ratings;
        return result;
    }
    if (s->count < 2) {
        result.error = RecError::too_few_ratings;
        return result;
    }
    const SparseMatrix pivot = rating_matrix(ds);
    const auto& labels = pivot.row_labels();
    std::size_t query_row = std::lower_bound(labels.begin(), labels.end(), query) -
                            labels.begin();
    const auto query_col = pivot.row(query_row);
    for (std::size_t i = 0; i < pivot.rows(); ++i) {
        if (i == query_row) continue;
        const auto r = pearson_pairwise(query_col, pivot.row(i), min_overlap);
        if (!r) continue;
        result.items.push_back(
            recdetail::make_scored(ds, labels[i], *r, ValueKind::pearson_r));
    }
    recdetail::sort_scored(result.items, false);
    if (result.items.size() > n) result.items.resize(n);
    return result;
}

inline RecResult recommend_pearson(const Dataset& ds, std::string_view title,
                                   std::size_t n, std::size_t min_overlap = 1) {
    RecResult result;
    MovieId query = 0;
    if (!recdetail::resolve_into(ds, title, result, query)) return result;
    return recommend_pearson_by_id(ds, query, n, min_overlap);
}

/// Cosine similarity of TF-IDF genre vectors over the eligible movies.
inline RecResult recommend_cosine_genre_by_id(const Dataset& ds, MovieId query,
                                              std::size_t n) {
    RecResult result;
    if (!ds.find_movie(query)) {
        result.error = RecError::unknown_title;
        return result;
    }
    const EligStats* s = ds.find_stats(query);
    if (!s || !s->eligible) {
        result.error = RecError::not_eligible;
        return result;
    }
    const Movie* query_movie = ds.find_movie(query);
    if (query_movie->genres.empty()) {
        result.error = RecError::no_genre_signal;
        return result;
    }
    auto [ids, docs] = recdetail::eligible_genre_corpus(ds);
    const TfidfModel model = TfidfModel::fit(docs);
    const SparseMatrix vectors = model.transform_matrix(docs);
    const std::size_t query_row =
        std::lower_bound(ids.begin(), ids.end(), query) - ids.begin();
    const auto query_vec = vectors.row(query_row);
    for (std::size_t i = 0; i < vectors.rows(); ++i) {
        if (i == query_row) continue;
        result.items.push_back(recdetail::make_scored(
            ds, ids[i], cosine_sparse(query_vec, vectors.row(i)),
            ValueKind::cosine_sim));
    }
    recdetail::sort_scored(result.items, false);
    if (result.items.size() > n) result.items.resize(n);
    return result;
}

inline RecResult recommend_cosine_genre(const Dataset& ds, std::string_view title,
                                        std::size_t n) {
    RecResult result;
    MovieId query = 0;
    if (!recdetail::resolve_into(ds, title, result, query)) return result;
    return recommend_cosine_genre_by_id(ds, query, n);
}

/// Item-based KNN on the rating pivot (absent ratings treated as 0),
/// cosine distance, brute force. Returns k true neighbors.
inline RecResult recommend_knn_item_by_id(const Dataset& ds, MovieId query,
                                          std::size_t k) {
    RecResult result;
    if (!ds.find_movie(query)) {
        result.error = RecError::unknown_title;
        return result;
    }
    if (!ds.find_stats(query)) {
        result.error = RecError::no_ratings;
        return result;
    }
    const SparseMatrix pivot = rating_matrix(ds);
    const auto& labels = pivot.row_labels();
    const std::size_t query_row =
        std::lower_bound(labels.begin(), labels.end(), query) - labels.begin();
    const KnnResult knn = knn_brute(pivot, query_row, k);
    result.truncated = knn.truncated;
    result.items.reserve(knn.neighbors.size());
    for (const auto& nb : knn.neighbors)
        result.items.push_back(
            recdetail::make_scored(ds, nb.label, nb.distance, ValueKind::knn_distance));
    return result;
}

inline RecResult recommend_knn_item(const Dataset& ds, std::string_view title,
                                    std::size_t k) {
    RecResult result;
    MovieId query = 0;
    if (!recdetail::resolve_into(ds, title, result, query)) return result;
    return recommend_knn_item_by_id(ds, query, k);
}

/// k-means over the eligible movies' TF-IDF genre vectors.
struct ClusterReport {
    std::size_t k = 0;
    std::map<MovieId, std::uint32_t> assignments;
    std::vector<std::pair<std::size_t, double>> inertia_curve;  // k = 1..k_max
    double inertia = 0.0;
};

inline ClusterReport cluster_genres(const Dataset& ds, std::size_t k,
                                    std::uint64_t seed, std::size_t k_max = 9,
                                    std::size_t max_iter = 300) {
    auto [ids, docs] = recdetail::eligible_genre_corpus(ds);
    if (k < 1) throw std::invalid_argument("cluster_genres: k must be >= 1");
    if (k > ids.size())
        throw std::invalid_argument("cluster_genres: k exceeds eligible movies");
    const TfidfModel model = TfidfModel::fit(docs);
    const SparseMatrix sparse = model.transform_matrix(docs);
    DenseMatrix pts(sparse.rows(), sparse.cols());
    for (std::size_t i = 0; i < sparse.rows(); ++i)
        for (const auto& e : sparse.row(i)) pts.at(i, e.col) = e.value;
    ClusterReport report;
    report.k = k;
    const KmeansResult km = kmeans(pts, k, seed, max_iter);
    for (std::size_t i = 0; i < ids.size(); ++i)
        report.assignments.emplace(ids[i], km.assignments[i]);
    report.inertia = km.inertia;
    report.inertia_curve =
        inertia_curve(pts, std::min(k_max, ids.size()), seed, max_iter);
    return report;
}

// --- latent pipelines -------------------------------------------------------

/// TF-IDF over the metadata documents, compressed by truncated SVD.
/// k_components is clamped to the corpus dimensions.
inline SvdFactors content_latent(const Dataset& ds, std::size_t k_components,
                                 std::uint64_t seed) {
    const std::vector<MetadataDoc> docs = metadata_docs(ds);
    std::vector<std::string> texts;
    texts.reserve(docs.size());
    for (const auto& d : docs) texts.push_back(d.text);
    const TfidfModel model = TfidfModel::fit(texts);
    SparseMatrix mat = model.transform_matrix(texts);
    std::vector<std::int64_t> labels;
    labels.reserve(docs.size());
    for (const auto& d : docs) labels.push_back(d.movie);
    mat.row_labels() = std::move(labels);
    const std::size_t k =
        std::clamp<std::size_t>(k_components, 1, std::min(mat.rows(), mat.cols()));
    return truncated_svd(mat, k, seed);
}

/// Truncated SVD of the rating pivot (absent ratings as 0).
inline SvdFactors collab_latent(const Dataset& ds, std::size_t k_components,
                                std::uint64_t seed) {
    const SparseMatrix pivot = rating_matrix(ds);
    const std::size_t k =
        std::clamp<std::size_t>(k_components, 1, std::min(pivot.rows(), pivot.cols()));
    return truncated_svd(pivot, k, seed);
}

/// Ranks every other row of `latent` by cosine against the query movie's
/// row. The latent matrix must be row-labeled with MovieIds.
inline RecResult rank_latent_neighbors(const Dataset& ds, const DenseMatrix& latent,
                                       MovieId query, std::size_t n) {
    RecResult result;
    const auto& labels = latent.row_labels();
    const auto it = std::lower_bound(labels.begin(), labels.end(), query);
    if (it == labels.end() || *it != query) {
        result.error = RecError::no_ratings;
        return result;
    }
    const std::size_t query_row = it - labels.begin();
    const auto query_vec = latent.row(query_row);
    result.items.reserve(latent.rows() - 1);
    for (std::size_t i = 0; i < latent.rows(); ++i) {
        if (i == query_row) continue;
        result.items.push_back(recdetail::make_scored(
            ds, labels[i], cosine(query_vec, latent.row(i)), ValueKind::latent_cosine));
    }
    recdetail::sort_scored(result.items, false);
    if (result.items.size() > n) result.items.resize(n);
    return result;
}

inline RecResult recommend_content_latent(const Dataset& ds, std::string_view title,
                                          std::size_t n,
                                          std::size_t k_components = 1000,
                                          std::uint64_t seed = 42) {
    RecResult result;
    MovieId query = 0;
    if (!recdetail::resolve_into(ds, title, result, query)) return result;
    const SvdFactors factors = content_latent(ds, k_components, seed);
    return rank_latent_neighbors(ds, factors.latent, query, n);
}

inline RecResult recommend_collab_latent(const Dataset& ds, std::string_view title,
                                         std::size_t n,
                                         std::size_t k_components = 100,
                                         std::uint64_t seed = 42) {
    RecResult result;
    MovieId query = 0;
    if (!recdetail::resolve_into(ds, title, result, query)) return result;
    const SvdFactors factors = collab_latent(ds, k_components, seed);
    return rank_latent_neighbors(ds, factors.latent, query, n);
}

}  // namespace movierec
