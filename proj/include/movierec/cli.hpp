#pragma once

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "movierec/cache.hpp"
#include "movierec/dataset.hpp"
#include "movierec/evaluation.hpp"
#include "movierec/predictor.hpp"
#include "movierec/recommenders.hpp"

namespace movierec {
namespace cli {

enum class OutputFormat { table, json, csv };

struct CliConfig {
    std::string data_dir = "data/ml-latest-small";
    std::uint64_t seed = 42;
    std::size_t m = 7;
    OutputFormat output = OutputFormat::table;
    std::string cache_dir;
};

namespace detail {

constexpr int kExitOk = 0;
constexpr int kExitUserError = 1;
constexpr int kExitDataError = 2;

inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

struct Table {
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> rows;
};

inline void emit_table(std::ostream& out, const Table& table) {
    std::vector<std::size_t> width(table.headers.size());
    for (std::size_t c = 0; c < table.headers.size(); ++c)
        width[c] = table.headers[c].size();
    for (const auto& row : table.rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            width[c] = std::max(width[c], row[c].size());
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            out << cells[c];
            if (c + 1 < cells.size())
                out << std::string(width[c] - cells[c].size() + 2, ' ');
        }
        out << '\n';
    };
    line(table.headers);
    for (const auto& row : table.rows) line(row);
}

inline void emit_csv(std::ostream& out, const Table& table) {
    csv::write_row(out, table.headers);
    for (const auto& row : table.rows) csv::write_row(out, row);
}

inline void emit(const CliConfig& cfg, const Table& table,
                 const nlohmann::ordered_json& json) {
    switch (cfg.output) {
        case OutputFormat::table: emit_table(std::cout, table); break;
        case OutputFormat::csv: emit_csv(std::cout, table); break;
        case OutputFormat::json: std::cout << json.dump(2) << '\n'; break;
    }
}

inline nlohmann::ordered_json envelope(const CliConfig& cfg, const char* command) {
    return nlohmann::ordered_json{
        {"command", command}, {"seed", cfg.seed}, {"m", cfg.m}};
}

inline int fail_user(const std::string& message, const std::string& remedy) {
    std::cerr << "error: " << message << " (" << remedy << ")\n";
    return kExitUserError;
}

inline int fail_rec(const Dataset& ds, const RecResult& result,
                    const std::string& query) {
    switch (result.error) {
        case RecError::unknown_title:
            return fail_user("unknown title '" + query + "'",
                             "pass the exact title in quotes, or use --id <movieId>");
        case RecError::ambiguous_title: {
            std::string msg = "title '" + query + "' is ambiguous; candidates:";
            for (MovieId id : result.candidates) msg += " " + std::to_string(id);
            return fail_user(msg, "disambiguate with --id <movieId>");
        }
        case RecError::unknown_genre:
            return fail_user("unknown genre '" + query + "'",
                             "check the genre spelling, e.g. Action or Sci-Fi");
        case RecError::not_eligible:
            return fail_user("movie '" + query + "' is below the eligibility threshold",
                             "lower -m or pick a movie with more ratings");
        case RecError::no_ratings:
            return fail_user("movie '" + query + "' has no ratings",
                             "pick a movie that appears in ratings.csv");
        case RecError::too_few_ratings:
            return fail_user("movie '" + query + "' has fewer than 2 ratings",
                             "correlation needs at least 2; pick a popular title");
        case RecError::no_genre_signal:
            return fail_user("movie '" + query + "' has no genres listed",
                             "genre similarity is undefined for it");
        case RecError::none: break;
    }
    return kExitOk;
}

/// Resolves the query movie from the positional title or the --id flag.
inline std::optional<MovieId> resolve_query(const Dataset& ds,
                                            const std::string& title,
                                            std::optional<MovieId> id, int& exit_code) {
    if (id) {
        if (!ds.find_movie(*id)) {
            exit_code = fail_user("unknown movieId " + std::to_string(*id),
                                  "run `movierec inspect` for dataset bounds");
            return std::nullopt;
        }
        return id;
    }
    const TitleMatch match = resolve_title(ds, title);
    if (match.status == TitleMatch::Status::ok) return match.id;
    RecResult stub;
    stub.error = match.status == TitleMatch::Status::unknown
                     ? RecError::unknown_title
                     : RecError::ambiguous_title;
    stub.candidates = match.candidates;
    exit_code = fail_rec(ds, stub, title);
    return std::nullopt;
}

inline const char* value_column(ValueKind kind) {
    switch (kind) {
        case ValueKind::weighted_score: return "score";
        case ValueKind::pearson_r: return "r";
        case ValueKind::cosine_sim: return "similarity";
        case ValueKind::knn_distance: return "distance";
        case ValueKind::latent_cosine: return "similarity";
        case ValueKind::predicted_rating: return "predicted";
    }
    return "value";
}

inline int emit_scored(const CliConfig& cfg, const char* command,
                       nlohmann::ordered_json params,
                       const std::vector<ScoredMovie>& items) {
    const char* column =
        items.empty() ? "score" : value_column(items.front().kind);
    Table table;
    table.headers = {"movieId", "title", column};
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const auto& item : items) {
        table.rows.push_back(
            {std::to_string(item.movie), item.title, fmt6(item.value)});
        results.push_back({{"movie", item.movie},
                           {"title", item.title},
                           {column, item.value}});
    }
    nlohmann::ordered_json json = envelope(cfg, command);
    for (auto& [key, value] : params.items()) json[key] = value;
    json["results"] = results;
    emit(cfg, table, json);
    return kExitOk;
}

}  // namespace detail

// --- subcommand handlers ----------------------------------------------------

inline int cmd_inspect(const CliConfig& cfg, const Dataset& ds) {
    using detail::Table;
    nlohmann::ordered_json json = detail::envelope(cfg, "inspect");
    json["movies"] = ds.movies.size();
    json["ratings"] = ds.ratings.size();
    json["tags"] = ds.tags.size();
    json["users"] = ds.user_ids().size();
    json["eligible_movies"] = ds.eligible_count();
    json["global_mean_rating"] = ds.global_mean;
    json["skipped_empty_tags"] = ds.skipped_empty_tags;
    Table table;
    table.headers = {"metric", "value"};
    table.rows = {
        {"movies", std::to_string(ds.movies.size())},
        {"ratings", std::to_string(ds.ratings.size())},
        {"tags", std::to_string(ds.tags.size())},
        {"users", std::to_string(ds.user_ids().size())},
        {"eligible_movies", std::to_string(ds.eligible_count())},
        {"global_mean_rating", detail::fmt6(ds.global_mean)},
        {"skipped_empty_tags", std::to_string(ds.skipped_empty_tags)},
    };
    detail::emit(cfg, table, json);
    return detail::kExitOk;
}

inline int cmd_genre_top(const CliConfig& cfg, const Dataset& ds,
                         const std::string& genre, std::size_t n) {
    const RecResult result = recommend_by_genre(ds, genre, n);
    if (result.error != RecError::none) return detail::fail_rec(ds, result, genre);
    return detail::emit_scored(cfg, "genre-top", {{"genre", genre}, {"n", n}},
                               result.items);
}

inline int cmd_pearson(const CliConfig& cfg, const Dataset& ds,
                       const std::string& title, std::optional<MovieId> id,
                       std::size_t n, std::size_t min_overlap) {
    int exit_code = detail::kExitOk;
    const auto query = detail::resolve_query(ds, title, id, exit_code);
    if (!query) return exit_code;
    const RecResult result = recommend_pearson_by_id(ds, *query, n, min_overlap);
    if (result.error != RecError::none) return detail::fail_rec(ds, result, title);
    return detail::emit_scored(cfg, "pearson",
                               {{"title", ds.find_movie(*query)->title},
                                {"movie", *query},
                                {"n", n},
                                {"min_overlap", min_overlap}},
                               result.items);
}

inline int cmd_cosine_genre(const CliConfig& cfg, const Dataset& ds,
                            const std::string& title, std::optional<MovieId> id,
                            std::size_t n) {
    int exit_code = detail::kExitOk;
    const auto query = detail::resolve_query(ds, title, id, exit_code);
    if (!query) return exit_code;
    const RecResult result = recommend_cosine_genre_by_id(ds, *query, n);
    if (result.error != RecError::none) return detail::fail_rec(ds, result, title);
    return detail::emit_scored(
        cfg, "cosine-genre",
        {{"title", ds.find_movie(*query)->title}, {"movie", *query}, {"n", n}},
        result.items);
}

inline int cmd_knn_item(const CliConfig& cfg, const Dataset& ds,
                        const std::string& title, std::optional<MovieId> id,
                        std::size_t k) {
    int exit_code = detail::kExitOk;
    const auto query = detail::resolve_query(ds, title, id, exit_code);
    if (!query) return exit_code;
    const RecResult result = recommend_knn_item_by_id(ds, *query, k);
    if (result.error != RecError::none) return detail::fail_rec(ds, result, title);
    if (result.truncated)
        std::cerr << "warning: k exceeds available movies, truncated to "
                  << result.items.size() << "\n";
    return detail::emit_scored(cfg, "knn-item",
                               {{"title", ds.find_movie(*query)->title},
                                {"movie", *query},
                                {"k", k},
                                {"truncated", result.truncated}},
                               result.items);
}

inline int cmd_cluster(const CliConfig& cfg, const Dataset& ds, std::size_t k,
                       std::size_t k_max) {
    ClusterReport report;
    try {
        report = cluster_genres(ds, k, cfg.seed, k_max);
    } catch (const std::invalid_argument& e) {
        return detail::fail_user(e.what(), "choose a smaller --k / --k-max");
    }
    nlohmann::ordered_json json = detail::envelope(cfg, "cluster");
    json["k"] = report.k;
    json["k_max"] = k_max;
    json["inertia"] = report.inertia;
    nlohmann::ordered_json curve = nlohmann::ordered_json::array();
    for (const auto& [ck, inertia] : report.inertia_curve)
        curve.push_back({{"k", ck}, {"inertia", inertia}});
    json["inertia_curve"] = curve;
    nlohmann::ordered_json assignments = nlohmann::ordered_json::array();
    detail::Table table;
    table.headers = {"movieId", "title", "cluster"};
    for (const auto& [movie, cluster] : report.assignments) {
        const Movie* m = ds.find_movie(movie);
        assignments.push_back(
            {{"movie", movie}, {"title", m->title}, {"cluster", cluster}});
        table.rows.push_back(
            {std::to_string(movie), m->title, std::to_string(cluster)});
    }
    json["assignments"] = assignments;
    if (cfg.output == OutputFormat::table) {
        detail::Table curve_table;
        curve_table.headers = {"k", "inertia"};
        for (const auto& [ck, inertia] : report.inertia_curve)
            curve_table.rows.push_back({std::to_string(ck), detail::fmt6(inertia)});
        detail::emit_table(std::cout, curve_table);
        std::cout << '\n';
    }
    detail::emit(cfg, table, json);
    return detail::kExitOk;
}

inline int cmd_latent(const CliConfig& cfg, const Dataset& ds, bool content,
                      const std::string& title, std::optional<MovieId> id,
                      std::size_t n, std::size_t components) {
    int exit_code = detail::kExitOk;
    const auto query = detail::resolve_query(ds, title, id, exit_code);
    if (!query) return exit_code;
    const char* command = content ? "content-latent" : "collab-latent";
    const std::uint64_t data_hash =
        cfg.cache_dir.empty() ? 0 : dataset_hash(cfg.data_dir);
    const SvdFactors factors = cached_factors(
        cfg.cache_dir, command, data_hash, components, cfg.seed, [&] {
            return content ? content_latent(ds, components, cfg.seed)
                           : collab_latent(ds, components, cfg.seed);
        });
    const RecResult result = rank_latent_neighbors(ds, factors.latent, *query, n);
    if (result.error != RecError::none) return detail::fail_rec(ds, result, title);
    return detail::emit_scored(cfg, command,
                               {{"title", ds.find_movie(*query)->title},
                                {"movie", *query},
                                {"n", n},
                                {"components", factors.k}},
                               result.items);
}

inline int cmd_predict(const CliConfig& cfg, const Dataset& ds, UserId user,
                       MovieId movie, const PredictorConfig& pconfig) {
    const PredictorModel model = fit_predictor(ds, pconfig);
    const Prediction pred = model.predict(user, movie);
    if (pred.unseen_user || pred.unseen_movie)
        std::cerr << "warning: unseen "
                  << (pred.unseen_user ? "user" : "movie")
                  << ", predicted the global mean\n";
    nlohmann::ordered_json json = detail::envelope(cfg, "predict");
    json["user"] = user;
    json["movie"] = movie;
    json["predicted"] = pred.value;
    json["neighbors_used"] = pred.neighbors_used;
    json["fallback"] = pred.fallback;
    json["unseen_user"] = pred.unseen_user;
    json["unseen_movie"] = pred.unseen_movie;
    detail::Table table;
    table.headers = {"user", "movie", "predicted", "neighbors_used", "fallback"};
    table.rows = {{std::to_string(user), std::to_string(movie),
                   detail::fmt6(pred.value), std::to_string(pred.neighbors_used),
                   pred.fallback ? "true" : "false"}};
    detail::emit(cfg, table, json);
    return detail::kExitOk;
}

inline int cmd_top_n(const CliConfig& cfg, const Dataset& ds, UserId user,
                     std::size_t n, const PredictorConfig& pconfig) {
    const PredictorModel model = fit_predictor(ds, pconfig);
    const TopN top = top_n_for_user(model, ds, user, n);
    if (top.cold_start)
        std::cerr << "warning: unknown user " << user
                  << ", ranked by weighted score instead\n";
    nlohmann::ordered_json params = {{"user", user},
                                     {"n", n},
                                     {"cold_start", top.cold_start}};
    return detail::emit_scored(cfg, "top-n", params, top.items);
}

inline int cmd_evaluate(const CliConfig& cfg, const Dataset& ds, std::size_t folds,
                        const PredictorConfig& pconfig) {
    FoldPlan plan;
    try {
        plan = kfold_split(ds.ratings, folds, cfg.seed);
    } catch (const std::invalid_argument& e) {
        return detail::fail_user(e.what(), "use --folds >= 2");
    }
    const EvalReport report = cross_validate(ds, pconfig, plan);
    for (std::size_t f = 0; f < report.per_fold_seconds.size(); ++f)
        std::cerr << "fold " << f << ": " << detail::fmt6(report.per_fold_seconds[f])
                  << "s\n";
    nlohmann::ordered_json json = detail::envelope(cfg, "evaluate");
    json["report"] = to_json(report);
    detail::Table table;
    table.headers = {"fold", "rmse", "baseline_rmse"};
    for (std::size_t f = 0; f < report.per_fold_rmse.size(); ++f)
        table.rows.push_back({std::to_string(f), detail::fmt6(report.per_fold_rmse[f]),
                              detail::fmt6(report.per_fold_baseline_rmse[f])});
    table.rows.push_back({"mean", detail::fmt6(report.mean_rmse),
                          detail::fmt6(report.baseline_rmse)});
    detail::emit(cfg, table, json);
    return detail::kExitOk;
}

// --- entry point --------------------------------------------------------------

inline int run(int argc, const char* const* argv) {
    CLI::App app{"movierec: MovieLens-style movie recommendation engine"};
    app.require_subcommand(1);

    CliConfig cfg;
    std::string output = "table";
    app.add_option("--data-dir", cfg.data_dir,
                   "directory with movies.csv, ratings.csv, tags.csv")
        ->envname("MOVIEREC_DATA_DIR")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "seed for every randomized kernel")
        ->capture_default_str();
    app.add_option("-m,--min-ratings", cfg.m, "eligibility threshold m")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("-o,--output", output, "output format")
        ->check(CLI::IsMember({"table", "json", "csv"}))
        ->capture_default_str();
    app.add_option("--cache-dir", cfg.cache_dir,
                   "cache directory for latent-matrix artifacts");

    PredictorConfig pconfig;
    std::string mode = "user", similarity = "msd";
    auto add_predictor_opts = [&](CLI::App* cmd) {
        cmd->add_option("--knn-mode", mode, "user or item neighborhoods")
            ->check(CLI::IsMember({"user", "item"}));
        cmd->add_option("--similarity", similarity, "msd, cosine or pearson")
            ->check(CLI::IsMember({"msd", "cosine", "pearson"}));
        cmd->add_option("--neighbors", pconfig.k, "neighborhood size k")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--min-neighbors", pconfig.min_k,
                        "fewer qualifying neighbors than this falls back to the mean")
            ->check(CLI::PositiveNumber);
    };

    std::string genre, title;
    std::size_t n = 5;
    std::size_t min_overlap = 1, knn_k = 5, cluster_k = 6, k_max = 9;
    std::size_t components_content = 1000, components_collab = 100, folds = 5;
    MovieId id_flag = 0;
    UserId user = 0;
    MovieId movie = 0;

    auto* inspect = app.add_subcommand("inspect", "dataset summary counts");

    auto* genre_top =
        app.add_subcommand("genre-top", "top movies of a genre by weighted score");
    genre_top->add_option("genre", genre, "genre name")->required();
    genre_top->add_option("-n", n, "number of movies");

    auto add_title_query = [&](CLI::App* cmd) {
        cmd->add_option("title", title, "exact movie title (quoted)");
        cmd->add_option("--id", id_flag, "query by movieId instead of title");
    };

    auto* pearson =
        app.add_subcommand("pearson", "movies correlated with a title (Pearson)");
    add_title_query(pearson);
    pearson->add_option("-n", n, "number of movies");
    pearson->add_option("--min-overlap", min_overlap,
                        "common raters required for a defined correlation");

    auto* cosine_genre = app.add_subcommand(
        "cosine-genre", "movies with similar genres (TF-IDF cosine)");
    add_title_query(cosine_genre);
    cosine_genre->add_option("-n", n, "number of movies");

    auto* knn_item =
        app.add_subcommand("knn-item", "nearest movies by rating-vector cosine");
    add_title_query(knn_item);
    knn_item->add_option("-k", knn_k, "number of neighbors");

    auto* cluster = app.add_subcommand("cluster", "k-means over genre vectors");
    cluster->add_option("--k", cluster_k, "cluster count");
    cluster->add_option("--k-max", k_max, "inertia curve upper k");

    auto* content = app.add_subcommand(
        "content-latent", "similar movies in the metadata latent space");
    add_title_query(content);
    content->add_option("-n", n, "number of movies");
    content->add_option("--components", components_content, "SVD components");

    auto* collab = app.add_subcommand(
        "collab-latent", "similar movies in the rating latent space");
    add_title_query(collab);
    collab->add_option("-n", n, "number of movies");
    collab->add_option("--components", components_collab, "SVD components");

    auto* predict =
        app.add_subcommand("predict", "predict one user's rating of one movie");
    predict->add_option("user", user, "userId")->required();
    predict->add_option("movie", movie, "movieId")->required();
    add_predictor_opts(predict);

    auto* top_n = app.add_subcommand("top-n", "best predicted unseen movies");
    top_n->add_option("user", user, "userId")->required();
    top_n->add_option("-n", n, "number of movies");
    add_predictor_opts(top_n);

    auto* evaluate =
        app.add_subcommand("evaluate", "k-fold cross-validated RMSE");
    evaluate->add_option("--folds", folds, "fold count");
    add_predictor_opts(evaluate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << " (see --help)\n";
        return detail::kExitUserError;
    }

    cfg.output = output == "json"  ? OutputFormat::json
                 : output == "csv" ? OutputFormat::csv
                                   : OutputFormat::table;
    pconfig.mode =
        mode == "item" ? PredictorMode::item_based : PredictorMode::user_based;
    pconfig.similarity = similarity == "cosine"    ? SimilarityKind::cosine
                         : similarity == "pearson" ? SimilarityKind::pearson
                                                   : SimilarityKind::msd;
    if (pconfig.k < pconfig.min_k)
        return detail::fail_user("--neighbors must be >= --min-neighbors",
                                 "raise --neighbors or lower --min-neighbors");

    const bool needs_title = pearson->parsed() || cosine_genre->parsed() ||
                             knn_item->parsed() || content->parsed() ||
                             collab->parsed();
    std::optional<MovieId> id;
    if (id_flag != 0) id = id_flag;
    if (needs_title && title.empty() && !id)
        return detail::fail_user("no query movie given",
                                 "pass a quoted title or --id <movieId>");

    try {
        const Dataset ds = load_dataset(cfg.data_dir, cfg.m);
        if (inspect->parsed()) return cmd_inspect(cfg, ds);
        if (genre_top->parsed()) return cmd_genre_top(cfg, ds, genre, n);
        if (pearson->parsed())
            return cmd_pearson(cfg, ds, title, id, n, min_overlap);
        if (cosine_genre->parsed()) return cmd_cosine_genre(cfg, ds, title, id, n);
        if (knn_item->parsed()) return cmd_knn_item(cfg, ds, title, id, knn_k);
        if (cluster->parsed()) return cmd_cluster(cfg, ds, cluster_k, k_max);
        if (content->parsed())
            return cmd_latent(cfg, ds, true, title, id, n, components_content);
        if (collab->parsed())
            return cmd_latent(cfg, ds, false, title, id, n, components_collab);
        if (predict->parsed()) return cmd_predict(cfg, ds, user, movie, pconfig);
        if (top_n->parsed()) return cmd_top_n(cfg, ds, user, n, pconfig);
        if (evaluate->parsed()) return cmd_evaluate(cfg, ds, folds, pconfig);
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what()
                  << " (check --data-dir points at a MovieLens-style directory)\n";
        return detail::kExitDataError;
    } catch (const std::invalid_argument& e) {
        return detail::fail_user(e.what(), "see --help for valid ranges");
    }
    return detail::kExitUserError;
}

}  // namespace cli
}  // namespace movierec
