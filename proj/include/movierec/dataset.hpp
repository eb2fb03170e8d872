#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "movierec/csv.hpp"
#include "movierec/errors.hpp"
#include "movierec/matrix.hpp"

namespace movierec {

using MovieId = std::int64_t;
using UserId = std::int64_t;

struct Movie {
    MovieId id = 0;
    std::string title;
    std::vector<std::string> genres;  // '|'-split, duplicates removed
    std::string clean_title;
};

struct RatingRecord {
    UserId user = 0;
    MovieId movie = 0;
    double rating = 0.0;     // half-star grid in [0.5, 5.0]
    std::int64_t timestamp = 0;  // retained, unused by the algorithms
};

struct TagRecord {
    UserId user = 0;
    MovieId movie = 0;
    std::string tag;  // lowercased, trimmed, non-empty
};

/// Per-movie rating count (v), mean rating (R) and the v >= m flag.
struct EligStats {
    std::size_t count = 0;
    double mean = 0.0;
    bool eligible = false;
};

/// Lowercase, non-alphanumerics to spaces, runs collapsed, trimmed.
inline std::string clean_title(std::string_view title) {
    std::string out;
    out.reserve(title.size());
    bool pending_space = false;
    for (char ch : title) {
        const unsigned char u = static_cast<unsigned char>(ch);
        char mapped;
        if (u < 0x80 && std::isalnum(u))
            mapped = static_cast<char>(std::tolower(u));
        else
            mapped = ' ';
        if (mapped == ' ') {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(mapped);
        }
    }
    return out;
}

namespace ingest_detail {

inline std::int64_t parse_int(const std::string& text, const char* what,
                              std::size_t row) {
    if (text.empty()) throw DataError(std::string("empty ") + what, row);
    std::size_t pos = 0;
    std::int64_t value = 0;
    try {
        value = std::stoll(text, &pos);
    } catch (const std::exception&) {
        throw DataError(std::string("bad ") + what + " '" + text + "'", row);
    }
    if (pos != text.size())
        throw DataError(std::string("bad ") + what + " '" + text + "'", row);
    return value;
}

inline std::int64_t parse_positive(const std::string& text, const char* what,
                                   std::size_t row) {
    const std::int64_t value = parse_int(text, what, row);
    if (value <= 0)
        throw DataError(std::string(what) + " must be positive, got '" + text + "'", row);
    return value;
}

inline double parse_rating(const std::string& text, std::size_t row) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw DataError("bad rating '" + text + "'", row);
    }
    if (pos != text.size()) throw DataError("bad rating '" + text + "'", row);
    const double doubled = value * 2.0;
    if (value < 0.5 || value > 5.0 ||
        std::abs(doubled - std::round(doubled)) > 1e-9)
        throw DataError("rating '" + text + "' off the half-star grid", row);
    return value;
}

inline std::string lower_trim(std::string_view text) {
    std::size_t begin = 0, end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    std::string out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        const unsigned char u = static_cast<unsigned char>(text[i]);
        out.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : text[i]);
    }
    return out;
}

}  // namespace ingest_detail

inline const std::string kNoGenresSentinel = "(no genres listed)";

/// movies.csv: movieId,title,genres. Genres split on '|'; the
/// "(no genres listed)" sentinel maps to an empty set.
inline std::map<MovieId, Movie> load_movies(const std::string& path) {
    std::map<MovieId, Movie> movies;
    for (const auto& row : csv::read_file(path, {"movieId", "title", "genres"})) {
        if (row.fields.size() != 3)
            throw DataError("movies row needs 3 columns, got " +
                                std::to_string(row.fields.size()),
                            row.line);
        Movie movie;
        movie.id = ingest_detail::parse_positive(row.fields[0], "movieId", row.line);
        movie.title = row.fields[1];
        movie.clean_title = clean_title(movie.title);
        if (row.fields[2] != kNoGenresSentinel && !row.fields[2].empty()) {
            std::string_view rest = row.fields[2];
            while (!rest.empty()) {
                const auto bar = rest.find('|');
                std::string_view genre = rest.substr(0, bar);
                if (!genre.empty() &&
                    std::find(movie.genres.begin(), movie.genres.end(), genre) ==
                        movie.genres.end())
                    movie.genres.emplace_back(genre);
                if (bar == std::string_view::npos) break;
                rest.remove_prefix(bar + 1);
            }
        }
        if (!movies.emplace(movie.id, std::move(movie)).second)
            throw DataError("duplicate movieId " + row.fields[0], row.line);
    }
    return movies;
}

/// ratings.csv: userId,movieId,rating,timestamp. Ratings must sit on the
/// half-star grid; duplicate (user, movie) pairs are fatal.
inline std::vector<RatingRecord> load_ratings(const std::string& path) {
    std::vector<RatingRecord> ratings;
    std::set<std::pair<UserId, MovieId>> seen;
    for (const auto& row :
         csv::read_file(path, {"userId", "movieId", "rating", "timestamp"})) {
        if (row.fields.size() != 4)
            throw DataError("ratings row needs 4 columns, got " +
                                std::to_string(row.fields.size()),
                            row.line);
        RatingRecord rec;
        rec.user = ingest_detail::parse_positive(row.fields[0], "userId", row.line);
        rec.movie = ingest_detail::parse_positive(row.fields[1], "movieId", row.line);
        rec.rating = ingest_detail::parse_rating(row.fields[2], row.line);
        rec.timestamp = ingest_detail::parse_int(row.fields[3], "timestamp", row.line);
        if (!seen.emplace(rec.user, rec.movie).second)
            throw DataError("duplicate rating for user " + row.fields[0] +
                                ", movie " + row.fields[1],
                            row.line);
        ratings.push_back(rec);
    }
    return ratings;
}

struct TagLoad {
    std::vector<TagRecord> tags;
    std::size_t skipped_empty = 0;  // rows whose tag was blank after trim
};

/// tags.csv: userId,movieId,tag,timestamp. Tags are lowercased and
/// trimmed; blank tags are skipped and counted.
inline TagLoad load_tags(const std::string& path) {
    TagLoad out;
    for (const auto& row :
         csv::read_file(path, {"userId", "movieId", "tag", "timestamp"})) {
        if (row.fields.size() != 4)
            throw DataError("tags row needs 4 columns, got " +
                                std::to_string(row.fields.size()),
                            row.line);
        TagRecord rec;
        rec.user = ingest_detail::parse_positive(row.fields[0], "userId", row.line);
        rec.movie = ingest_detail::parse_positive(row.fields[1], "movieId", row.line);
        rec.tag = ingest_detail::lower_trim(row.fields[2]);
        if (rec.tag.empty()) {
            ++out.skipped_empty;
            continue;
        }
        out.tags.push_back(std::move(rec));
    }
    return out;
}

/// Per-movie (v, R) with the eligible flag, plus the global mean C over
/// every rating. m must be >= 1 and ratings non-empty.
inline std::pair<std::map<MovieId, EligStats>, double> compute_eligibility(
    std::span<const RatingRecord> ratings, std::size_t m) {
    if (m < 1) throw std::invalid_argument("eligibility threshold m must be >= 1");
    if (ratings.empty())
        throw DataError("no ratings: global mean undefined");
    std::map<MovieId, EligStats> stats;
    double total = 0.0;
    for (const auto& rec : ratings) {
        auto& s = stats[rec.movie];
        ++s.count;
        s.mean += rec.rating;
        total += rec.rating;
    }
    for (auto& [id, s] : stats) {
        s.mean /= static_cast<double>(s.count);
        s.eligible = s.count >= m;
    }
    return {std::move(stats), total / static_cast<double>(ratings.size())};
}

// The loaded corpus: immutable after construction, safe for concurrent
// reads. `stats` covers every rated movie; `global_mean` is C in the
// weighted-score formula and `min_ratings` is the m threshold.
struct Dataset {
    std::map<MovieId, Movie> movies;
    std::vector<RatingRecord> ratings;
    std::vector<TagRecord> tags;
    std::size_t skipped_empty_tags = 0;
    std::map<MovieId, EligStats> stats;
    double global_mean = 0.0;
    std::size_t min_ratings = 7;

    const Movie* find_movie(MovieId id) const {
        auto it = movies.find(id);
        return it == movies.end() ? nullptr : &it->second;
    }

    const EligStats* find_stats(MovieId id) const {
        auto it = stats.find(id);
        return it == stats.end() ? nullptr : &it->second;
    }

    std::size_t eligible_count() const {
        std::size_t n = 0;
        for (const auto& [id, s] : stats) n += s.eligible;
        return n;
    }

    std::vector<MovieId> eligible_ids() const {
        std::vector<MovieId> ids;
        for (const auto& [id, s] : stats)
            if (s.eligible) ids.push_back(id);
        return ids;  // std::map iteration: already ascending
    }

    std::vector<UserId> user_ids() const {
        std::set<UserId> users;
        for (const auto& rec : ratings) users.insert(rec.user);
        return {users.begin(), users.end()};
    }
};

/// Loads movies.csv, ratings.csv and tags.csv from a directory and
/// derives eligibility. Every rating must reference a known movie.
inline Dataset load_dataset(const std::string& data_dir, std::size_t m = 7) {
    namespace fs = std::filesystem;
    Dataset ds;
    ds.min_ratings = m;
    ds.movies = load_movies((fs::path(data_dir) / "movies.csv").string());
    ds.ratings = load_ratings((fs::path(data_dir) / "ratings.csv").string());
    auto tags = load_tags((fs::path(data_dir) / "tags.csv").string());
    ds.tags = std::move(tags.tags);
    ds.skipped_empty_tags = tags.skipped_empty;
    for (const auto& rec : ds.ratings)
        if (!ds.movies.contains(rec.movie))
            throw DataError("rating references unknown movie " +
                            std::to_string(rec.movie));
    auto [stats, mean] = compute_eligibility(ds.ratings, m);
    ds.stats = std::move(stats);
    ds.global_mean = mean;
    return ds;
}

// --- writers (round-trip support) ------------------------------------------

inline void save_movies(const std::string& path,
                        const std::map<MovieId, Movie>& movies) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    csv::write_row(out, {"movieId", "title", "genres"});
    for (const auto& [id, movie] : movies) {
        std::string genres;
        for (std::size_t i = 0; i < movie.genres.size(); ++i) {
            if (i) genres.push_back('|');
            genres += movie.genres[i];
        }
        if (movie.genres.empty()) genres = kNoGenresSentinel;
        csv::write_row(out, {std::to_string(id), movie.title, genres});
    }
}

inline void save_ratings(const std::string& path,
                         std::span<const RatingRecord> ratings) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    csv::write_row(out, {"userId", "movieId", "rating", "timestamp"});
    char rating[16];
    for (const auto& rec : ratings) {
        std::snprintf(rating, sizeof rating, "%.1f", rec.rating);
        csv::write_row(out, {std::to_string(rec.user), std::to_string(rec.movie),
                             rating, std::to_string(rec.timestamp)});
    }
}

inline void save_tags(const std::string& path, std::span<const TagRecord> tags) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    csv::write_row(out, {"userId", "movieId", "tag", "timestamp"});
    for (const auto& rec : tags)
        csv::write_row(out, {std::to_string(rec.user), std::to_string(rec.movie),
                             rec.tag, "0"});
}

// --- derived structures -----------------------------------------------------

/// Item-by-user rating pivot over movies with at least one rating, rows
/// and columns ascending by id, absent entries meaning "not rated".
inline SparseMatrix rating_matrix(const Dataset& ds) {
    std::vector<MovieId> movie_ids;
    movie_ids.reserve(ds.stats.size());
    for (const auto& [id, s] : ds.stats) movie_ids.push_back(id);
    const std::vector<UserId> user_ids = ds.user_ids();
    std::unordered_map<MovieId, std::uint32_t> movie_row;
    for (std::size_t i = 0; i < movie_ids.size(); ++i)
        movie_row.emplace(movie_ids[i], static_cast<std::uint32_t>(i));
    std::unordered_map<UserId, std::uint32_t> user_col;
    for (std::size_t i = 0; i < user_ids.size(); ++i)
        user_col.emplace(user_ids[i], static_cast<std::uint32_t>(i));
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> triplets;
    triplets.reserve(ds.ratings.size());
    for (const auto& rec : ds.ratings)
        triplets.emplace_back(movie_row.at(rec.movie), user_col.at(rec.user),
                              rec.rating);
    SparseMatrix mat = SparseMatrix::from_triplets(movie_ids.size(),
                                                   user_ids.size(),
                                                   std::move(triplets));
    mat.row_labels().assign(movie_ids.begin(), movie_ids.end());
    mat.col_labels().assign(user_ids.begin(), user_ids.end());
    return mat;
}

/// Movie metadata document for the content latent pipeline.
struct MetadataDoc {
    MovieId movie = 0;
    std::string text;  // genres, sorted deduplicated tags, clean title
};

/// One document per movie in the rating pivot, ascending MovieId. Tags
/// are deduplicated per movie so heavily re-applied tags do not inflate
/// term frequency.
inline std::vector<MetadataDoc> metadata_docs(const Dataset& ds) {
    std::map<MovieId, std::set<std::string>> tags_by_movie;
    for (const auto& rec : ds.tags) tags_by_movie[rec.movie].insert(rec.tag);
    std::vector<MetadataDoc> docs;
    docs.reserve(ds.stats.size());
    for (const auto& [id, s] : ds.stats) {
        const Movie* movie = ds.find_movie(id);
        MetadataDoc doc;
        doc.movie = id;
        for (const auto& genre : movie->genres) {
            if (!doc.text.empty()) doc.text.push_back(' ');
            doc.text += genre;
        }
        auto it = tags_by_movie.find(id);
        if (it != tags_by_movie.end())
            for (const auto& tag : it->second) {
                if (!doc.text.empty()) doc.text.push_back(' ');
                doc.text += tag;
            }
        if (!movie->clean_title.empty()) {
            if (!doc.text.empty()) doc.text.push_back(' ');
            doc.text += movie->clean_title;
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

/// Title lookup: exact match, then case-insensitive fallback; both must
/// resolve uniquely.
struct TitleMatch {
    enum class Status { ok, unknown, ambiguous };
    Status status = Status::unknown;
    MovieId id = 0;
    std::vector<MovieId> candidates;
};

inline TitleMatch resolve_title(const Dataset& ds, std::string_view query) {
    TitleMatch match;
    for (const auto& [id, movie] : ds.movies)
        if (movie.title == query) match.candidates.push_back(id);
    if (match.candidates.empty()) {
        const std::string folded = ingest_detail::lower_trim(query);
        for (const auto& [id, movie] : ds.movies)
            if (ingest_detail::lower_trim(movie.title) == folded)
                match.candidates.push_back(id);
    }
    if (match.candidates.size() == 1) {
        match.status = TitleMatch::Status::ok;
        match.id = match.candidates.front();
    } else if (!match.candidates.empty()) {
        match.status = TitleMatch::Status::ambiguous;
    }
    return match;
}

}  // namespace movierec
