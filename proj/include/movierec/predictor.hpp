#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "movierec/dataset.hpp"
#include "movierec/recommenders.hpp"

namespace movierec {

enum class PredictorMode { user_based, item_based };
enum class SimilarityKind { msd, cosine, pearson };

struct PredictorConfig {
    PredictorMode mode = PredictorMode::user_based;
    SimilarityKind similarity = SimilarityKind::msd;
    std::size_t k = 40;
    std::size_t min_k = 1;
    std::size_t min_support = 1;  // co-ratings required for a defined similarity
};

struct Prediction {
    double value = 0.0;
    bool unseen_user = false;
    bool unseen_movie = false;
    bool fallback = false;  // too few neighbors, answered with the global mean
    std::size_t neighbors_used = 0;
};

namespace preddetail {

struct PairStats {
    std::size_t n = 0;
    double sum_x = 0.0, sum_y = 0.0;
    double sum_xx = 0.0, sum_yy = 0.0, sum_xy = 0.0;
    double sum_sqdiff = 0.0;
};

inline std::optional<double> similarity_from(const PairStats& st,
                                             SimilarityKind kind,
                                             std::size_t min_support) {
    if (st.n < min_support || st.n == 0) return std::nullopt;
    switch (kind) {
        case SimilarityKind::msd:
            return 1.0 / (st.sum_sqdiff / static_cast<double>(st.n) + 1.0);
        case SimilarityKind::cosine: {
            if (st.sum_xx <= 0.0 || st.sum_yy <= 0.0) return std::nullopt;
            double s = st.sum_xy / (std::sqrt(st.sum_xx) * std::sqrt(st.sum_yy));
            return std::clamp(s, -1.0, 1.0);
        }
        case SimilarityKind::pearson: {
            if (st.n < 2) return std::nullopt;
            const double dn = static_cast<double>(st.n);
            const double cov = st.sum_xy - st.sum_x * st.sum_y / dn;
            const double vx = st.sum_xx - st.sum_x * st.sum_x / dn;
            const double vy = st.sum_yy - st.sum_y * st.sum_y / dn;
            if (vx <= 0.0 || vy <= 0.0) return std::nullopt;
            return std::clamp(cov / std::sqrt(vx * vy), -1.0, 1.0);
        }
    }
    return std::nullopt;
}

}  // namespace preddetail

// Neighborhood rating predictor in the KNNBasic style: the estimate is
// sum(sim * r) / sum(|sim|) over the k most similar co-raters, with the
// training global mean as fallback when fewer than min_k qualify.
//
// User-based mode precomputes the dense user-user similarity table at
// fit. Item-based mode keeps the indexed rating lists and derives pair
// similarities from them inside predict (a dense item-item table does
// not pay for itself at this scale).
class PredictorModel {
public:
    static PredictorModel fit(std::span<const RatingRecord> ratings,
                              const PredictorConfig& config) {
        if (config.min_k < 1 || config.k < config.min_k)
            throw std::invalid_argument("predictor: need k >= min_k >= 1");
        PredictorModel model;
        model.config_ = config;
        double total = 0.0;
        for (const auto& rec : ratings) {
            model.user_index_.try_emplace(rec.user, 0);
            model.item_index_.try_emplace(rec.movie, 0);
            total += rec.rating;
        }
        model.global_mean_ =
            ratings.empty() ? 0.0 : total / static_cast<double>(ratings.size());
        model.users_.reserve(model.user_index_.size());
        for (auto& [id, idx] : model.user_index_) model.users_.push_back(id);
        std::sort(model.users_.begin(), model.users_.end());
        for (std::size_t i = 0; i < model.users_.size(); ++i)
            model.user_index_[model.users_[i]] = i;
        model.items_.reserve(model.item_index_.size());
        for (auto& [id, idx] : model.item_index_) model.items_.push_back(id);
        std::sort(model.items_.begin(), model.items_.end());
        for (std::size_t i = 0; i < model.items_.size(); ++i)
            model.item_index_[model.items_[i]] = i;

        model.by_user_.resize(model.users_.size());
        model.by_item_.resize(model.items_.size());
        for (const auto& rec : ratings) {
            const std::size_t u = model.user_index_.at(rec.user);
            const std::size_t i = model.item_index_.at(rec.movie);
            model.by_user_[u].emplace_back(i, rec.rating);
            model.by_item_[i].emplace_back(u, rec.rating);
        }
        for (auto& v : model.by_user_) std::sort(v.begin(), v.end());
        for (auto& v : model.by_item_) std::sort(v.begin(), v.end());

        if (config.mode == PredictorMode::user_based) model.fit_user_sims();
        return model;
    }

    double global_mean() const { return global_mean_; }
    const PredictorConfig& config() const { return config_; }
    std::size_t n_users() const { return users_.size(); }
    std::size_t n_items() const { return items_.size(); }

    bool knows_user(UserId user) const { return user_index_.contains(user); }

    bool has_rated(UserId user, MovieId movie) const {
        auto u = user_index_.find(user);
        auto i = item_index_.find(movie);
        if (u == user_index_.end() || i == item_index_.end()) return false;
        const auto& row = by_user_[u->second];
        return std::binary_search(
            row.begin(), row.end(), std::make_pair(i->second, 0.0),
            [](const auto& a, const auto& b) { return a.first < b.first; });
    }

    /// Defined similarity between two known entity ids, for inspection
    /// and tests; nullopt when undefined.
    std::optional<double> user_similarity(UserId a, UserId b) const {
        const std::size_t ia = user_index_.at(a), ib = user_index_.at(b);
        if (config_.mode != PredictorMode::user_based)
            throw std::logic_error("user_similarity: model is item-based");
        const double s = user_sims_[ia * users_.size() + ib];
        if (std::isnan(s)) return std::nullopt;
        return s;
    }

    std::optional<double> item_similarity(MovieId a, MovieId b) const {
        return pair_similarity(by_item_[item_index_.at(a)],
                               by_item_[item_index_.at(b)]);
    }

    Prediction predict(UserId user, MovieId movie) const {
        Prediction pred;
        const auto u = user_index_.find(user);
        const auto i = item_index_.find(movie);
        pred.unseen_user = u == user_index_.end();
        pred.unseen_movie = i == item_index_.end();
        if (pred.unseen_user || pred.unseen_movie) {
            pred.fallback = true;
            pred.value = clip(global_mean_);
            return pred;
        }
        // (similarity, rating, entity id for tie order)
        std::vector<std::tuple<double, double, std::int64_t>> candidates;
        if (config_.mode == PredictorMode::user_based) {
            for (const auto& [v, r] : by_item_[i->second]) {
                if (v == u->second) continue;
                const double s = user_sims_[u->second * users_.size() + v];
                if (std::isnan(s)) continue;
                candidates.emplace_back(s, r, users_[v]);
            }
        } else {
            const auto& target = by_item_[i->second];
            for (const auto& [j, r] : by_user_[u->second]) {
                if (j == i->second) continue;
                const auto s = pair_similarity(target, by_item_[j]);
                if (!s) continue;
                candidates.emplace_back(*s, r, items_[j]);
            }
        }
        std::sort(candidates.begin(), candidates.end(),
                  [](const auto& a, const auto& b) {
                      if (std::get<0>(a) != std::get<0>(b))
                          return std::get<0>(a) > std::get<0>(b);
                      return std::get<2>(a) < std::get<2>(b);
                  });
        if (candidates.size() > config_.k) candidates.resize(config_.k);
        if (candidates.size() < config_.min_k) {
            pred.fallback = true;
            pred.value = clip(global_mean_);
            return pred;
        }
        double num = 0.0, den = 0.0;
        for (const auto& [s, r, id] : candidates) {
            num += s * r;
            den += std::abs(s);
        }
        if (den == 0.0) {
            pred.fallback = true;
            pred.value = clip(global_mean_);
            return pred;
        }
        pred.neighbors_used = candidates.size();
        pred.value = clip(num / den);
        return pred;
    }

private:
    static double clip(double v) { return std::clamp(v, 0.5, 5.0); }

    std::optional<double> pair_similarity(
        const std::vector<std::pair<std::size_t, double>>& a,
        const std::vector<std::pair<std::size_t, double>>& b) const {
        preddetail::PairStats st;
        std::size_t x = 0, y = 0;
        while (x < a.size() && y < b.size()) {
            if (a[x].first == b[y].first) {
                const double rx = a[x].second, ry = b[y].second;
                ++st.n;
                st.sum_x += rx;
                st.sum_y += ry;
                st.sum_xx += rx * rx;
                st.sum_yy += ry * ry;
                st.sum_xy += rx * ry;
                st.sum_sqdiff += (rx - ry) * (rx - ry);
                ++x;
                ++y;
            } else if (a[x].first < b[y].first) {
                ++x;
            } else {
                ++y;
            }
        }
        return preddetail::similarity_from(st, config_.similarity,
                                           config_.min_support);
    }

    void fit_user_sims() {
        const std::size_t n = users_.size();
        user_sims_.assign(n * n, std::numeric_limits<double>::quiet_NaN());
        if (n < 2) return;
        // accumulate pair stats item by item; rater lists are user-sorted
        const std::size_t pairs = n * (n - 1) / 2;
        std::vector<preddetail::PairStats> stats(pairs);
        auto pair_at = [n](std::size_t a, std::size_t b) {
            return a * n - a * (a + 1) / 2 + (b - a - 1);
        };
        for (const auto& raters : by_item_)
            for (std::size_t x = 0; x < raters.size(); ++x)
                for (std::size_t y = x + 1; y < raters.size(); ++y) {
                    auto& st = stats[pair_at(raters[x].first, raters[y].first)];
                    const double rx = raters[x].second, ry = raters[y].second;
                    ++st.n;
                    st.sum_x += rx;
                    st.sum_y += ry;
                    st.sum_xx += rx * rx;
                    st.sum_yy += ry * ry;
                    st.sum_xy += rx * ry;
                    st.sum_sqdiff += (rx - ry) * (rx - ry);
                }
        for (std::size_t a = 0; a + 1 < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) {
                const auto s = preddetail::similarity_from(
                    stats[pair_at(a, b)], config_.similarity, config_.min_support);
                if (!s) continue;
                user_sims_[a * n + b] = *s;
                user_sims_[b * n + a] = *s;
            }
    }

    PredictorConfig config_;
    double global_mean_ = 0.0;
    std::vector<UserId> users_;
    std::vector<MovieId> items_;
    std::unordered_map<UserId, std::size_t> user_index_;
    std::unordered_map<MovieId, std::size_t> item_index_;
    std::vector<std::vector<std::pair<std::size_t, double>>> by_user_;  // item-sorted
    std::vector<std::vector<std::pair<std::size_t, double>>> by_item_;  // user-sorted
    std::vector<double> user_sims_;  // dense, NaN = undefined
};

inline PredictorModel fit_predictor(std::span<const RatingRecord> ratings,
                                    const PredictorConfig& config = {}) {
    return PredictorModel::fit(ratings, config);
}

inline PredictorModel fit_predictor(const Dataset& ds,
                                    const PredictorConfig& config = {}) {
    return PredictorModel::fit(ds.ratings, config);
}

struct TopN {
    std::vector<ScoredMovie> items;
    bool cold_start = false;  // unknown user, ranked by weighted score
};

/// Predictions for every movie the user has not rated, best first.
/// Unknown users fall back to the weighted-score ranking.
inline TopN top_n_for_user(const PredictorModel& model, const Dataset& ds,
                           UserId user, std::size_t n = 5) {
    TopN top;
    if (!model.knows_user(user)) {
        top.cold_start = true;
        for (const auto& [id, s] : ds.stats) {
            if (!s.eligible) continue;
            top.items.push_back(recdetail::make_scored(
                ds, id,
                weighted_score(s.count, ds.min_ratings, s.mean, ds.global_mean),
                ValueKind::weighted_score));
        }
    } else {
        for (const auto& [id, movie] : ds.movies) {
            if (model.has_rated(user, id)) continue;
            top.items.push_back(recdetail::make_scored(
                ds, id, model.predict(user, id).value, ValueKind::predicted_rating));
        }
    }
    recdetail::sort_scored(top.items, false);
    if (top.items.size() > n) top.items.resize(n);
    return top;
}

}  // namespace movierec
