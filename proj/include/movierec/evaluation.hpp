#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "movierec/dataset.hpp"
#include "movierec/predictor.hpp"
#include "movierec/rng.hpp"

#include "json.hpp"

namespace movierec {

/// Assignment of every rating record to one of n_folds test folds.
struct FoldPlan {
    std::size_t n_folds = 5;
    std::uint64_t seed = 42;
    std::vector<std::uint32_t> fold;  // per rating index
};

/// Seeded Fisher-Yates shuffle, then contiguous slices; the first
/// (count % n_folds) folds get one extra record.
inline FoldPlan kfold_split(std::span<const RatingRecord> ratings,
                            std::size_t n_folds = 5, std::uint64_t seed = 42) {
    if (n_folds < 2) throw std::invalid_argument("kfold: need n_folds >= 2");
    if (ratings.size() < n_folds)
        throw DataError("kfold: fewer ratings than folds");
    const std::size_t count = ratings.size();
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = count - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_index(i + 1)]);
    FoldPlan plan;
    plan.n_folds = n_folds;
    plan.seed = seed;
    plan.fold.resize(count);
    const std::size_t base = count / n_folds;
    const std::size_t extra = count % n_folds;
    std::size_t at = 0;
    for (std::size_t f = 0; f < n_folds; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i)
            plan.fold[order[at++]] = static_cast<std::uint32_t>(f);
    }
    return plan;
}

/// sqrt(mean((predicted - actual)^2)); empty input is fatal.
inline double rmse(std::span<const std::pair<double, double>> pairs) {
    if (pairs.empty()) throw std::invalid_argument("rmse: empty input");
    double acc = 0.0;
    for (const auto& [predicted, actual] : pairs) {
        const double d = predicted - actual;
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pairs.size()));
}

struct EvalReport {
    std::vector<double> per_fold_rmse;
    std::vector<double> per_fold_baseline_rmse;
    std::vector<double> per_fold_seconds;
    double mean_rmse = 0.0;
    double baseline_rmse = 0.0;  // global-mean predictor on identical folds
    std::uint64_t seed = 42;
    std::size_t n_folds = 5;
    PredictorConfig config;
};

/// Fits on each fold's complement and scores the fold, for the predictor
/// and the global-mean baseline on identical splits. A fold whose
/// complement leaves a user or movie unseen goes through the predictor's
/// fallback, never an error.
inline EvalReport cross_validate(const Dataset& ds, const PredictorConfig& config,
                                 const FoldPlan& plan) {
    if (plan.fold.size() != ds.ratings.size())
        throw std::invalid_argument("cross_validate: plan does not match dataset");
    EvalReport report;
    report.seed = plan.seed;
    report.n_folds = plan.n_folds;
    report.config = config;
    for (std::size_t f = 0; f < plan.n_folds; ++f) {
        const auto started = std::chrono::steady_clock::now();
        std::vector<RatingRecord> train;
        std::vector<const RatingRecord*> test;
        train.reserve(ds.ratings.size());
        for (std::size_t i = 0; i < ds.ratings.size(); ++i) {
            if (plan.fold[i] == f)
                test.push_back(&ds.ratings[i]);
            else
                train.push_back(ds.ratings[i]);
        }
        const PredictorModel model = PredictorModel::fit(train, config);
        double train_mean = 0.0;
        for (const auto& rec : train) train_mean += rec.rating;
        train_mean /= static_cast<double>(train.size());
        std::vector<std::pair<double, double>> predicted, baseline;
        predicted.reserve(test.size());
        baseline.reserve(test.size());
        for (const RatingRecord* rec : test) {
            predicted.emplace_back(model.predict(rec->user, rec->movie).value,
                                   rec->rating);
            baseline.emplace_back(train_mean, rec->rating);
        }
        report.per_fold_rmse.push_back(rmse(predicted));
        report.per_fold_baseline_rmse.push_back(rmse(baseline));
        report.per_fold_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                .count());
    }
    const auto mean = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) /
               static_cast<double>(v.size());
    };
    report.mean_rmse = mean(report.per_fold_rmse);
    report.baseline_rmse = mean(report.per_fold_baseline_rmse);
    return report;
}

inline const char* to_string(PredictorMode mode) {
    return mode == PredictorMode::user_based ? "user" : "item";
}

inline const char* to_string(SimilarityKind kind) {
    switch (kind) {
        case SimilarityKind::msd: return "msd";
        case SimilarityKind::cosine: return "cosine";
        case SimilarityKind::pearson: return "pearson";
    }
    return "msd";
}

/// JSON form of the report. Timings stay out so identical runs serialize
/// identically; they are diagnostics, not results.
inline nlohmann::ordered_json to_json(const EvalReport& report) {
    nlohmann::ordered_json folds = nlohmann::ordered_json::array();
    for (std::size_t f = 0; f < report.per_fold_rmse.size(); ++f)
        folds.push_back({{"fold", f},
                         {"rmse", report.per_fold_rmse[f]},
                         {"baseline_rmse", report.per_fold_baseline_rmse[f]}});
    return nlohmann::ordered_json{
        {"folds", folds},
        {"mean_rmse", report.mean_rmse},
        {"baseline_rmse", report.baseline_rmse},
        {"seed", report.seed},
        {"config",
         {{"mode", to_string(report.config.mode)},
          {"similarity", to_string(report.config.similarity)},
          {"k", report.config.k},
          {"min_k", report.config.min_k},
          {"min_support", report.config.min_support},
          {"n_folds", report.n_folds}}},
    };
}

}  // namespace movierec
