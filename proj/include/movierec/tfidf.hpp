#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "movierec/errors.hpp"
#include "movierec/matrix.hpp"

namespace movierec {

/// Lowercased maximal alphanumeric runs of length >= 2; shorter runs and
/// everything else are separators.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.size() >= 2) tokens.push_back(current);
        current.clear();
    };
    for (char ch : text) {
        const unsigned char u = static_cast<unsigned char>(ch);
        if (std::isalnum(u))
            current.push_back(static_cast<char>(std::tolower(u)));
        else
            flush();
    }
    flush();
    return tokens;
}

// Smoothed TF-IDF: idf(t) = ln((1 + n_docs) / (1 + df(t))) + 1, raw term
// counts, L2-normalized document vectors. Matches the common vectorizer
// default so latent-pipeline scores stay comparable.
class TfidfModel {
public:
    /// Fits vocabulary and idf over the corpus. Tokens get dense indices
    /// in sorted order. Throws on an empty or token-free corpus.
    static TfidfModel fit(std::span<const std::string> corpus,
                          bool sublinear_tf = false) {
        if (corpus.empty()) throw DataError("tfidf: empty corpus");
        std::map<std::string, std::size_t> df;
        for (const auto& doc : corpus) {
            auto tokens = tokenize(doc);
            std::sort(tokens.begin(), tokens.end());
            tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
            for (auto& t : tokens) ++df[t];
        }
        if (df.empty()) throw DataError("tfidf: corpus has no tokens");
        TfidfModel model;
        model.n_docs_ = corpus.size();
        model.sublinear_tf_ = sublinear_tf;
        model.tokens_.reserve(df.size());
        model.idf_.reserve(df.size());
        const double n = static_cast<double>(corpus.size());
        for (const auto& [token, count] : df) {  // std::map: sorted-token order
            model.index_.emplace(token, model.tokens_.size());
            model.tokens_.push_back(token);
            model.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
        }
        return model;
    }

    std::size_t vocabulary_size() const { return tokens_.size(); }
    std::size_t n_docs() const { return n_docs_; }
    const std::vector<std::string>& tokens() const { return tokens_; }
    const std::vector<double>& idf() const { return idf_; }

    /// Column index of a token, or npos if out of vocabulary.
    std::size_t token_index(const std::string& token) const {
        auto it = index_.find(token);
        return it == index_.end() ? npos : it->second;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    /// count-times-idf, L2-normalized. Out-of-vocabulary tokens are
    /// ignored; an all-OOV document transforms to the zero vector.
    std::vector<SparseEntry> transform(std::string_view doc) const {
        std::unordered_map<std::size_t, double> counts;
        for (const auto& token : tokenize(doc)) {
            const std::size_t idx = token_index(token);
            if (idx != npos) counts[idx] += 1.0;
        }
        std::vector<SparseEntry> entries;
        entries.reserve(counts.size());
        for (const auto& [idx, count] : counts) {
            const double tf = sublinear_tf_ ? 1.0 + std::log(count) : count;
            entries.push_back({static_cast<std::uint32_t>(idx), tf * idf_[idx]});
        }
        std::sort(entries.begin(), entries.end(),
                  [](const SparseEntry& a, const SparseEntry& b) { return a.col < b.col; });
        double norm = 0.0;
        for (const auto& e : entries) norm += e.value * e.value;
        if (norm > 0.0) {
            norm = std::sqrt(norm);
            for (auto& e : entries) e.value /= norm;
        }
        return entries;
    }

    /// Transforms a whole corpus into a docs x vocabulary sparse matrix.
    SparseMatrix transform_matrix(std::span<const std::string> corpus) const {
        std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> triplets;
        for (std::size_t d = 0; d < corpus.size(); ++d)
            for (const auto& e : transform(corpus[d]))
                triplets.emplace_back(static_cast<std::uint32_t>(d), e.col, e.value);
        return SparseMatrix::from_triplets(corpus.size(), vocabulary_size(),
                                           std::move(triplets));
    }

    // Text artifact, one "token<TAB>index<TAB>idf" line per vocabulary
    // entry, used by the CLI cache.
    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write " + path);
        out.precision(17);
        for (std::size_t i = 0; i < tokens_.size(); ++i)
            out << tokens_[i] << '\t' << i << '\t' << idf_[i] << '\n';
    }

    static TfidfModel load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw DataError("cannot open " + path);
        TfidfModel model;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto tab1 = line.find('\t');
            const auto tab2 = line.find('\t', tab1 + 1);
            if (tab1 == std::string::npos || tab2 == std::string::npos)
                throw DataError("malformed tfidf artifact line", lineno);
            const std::string token = line.substr(0, tab1);
            const std::size_t index = std::stoull(line.substr(tab1 + 1, tab2 - tab1 - 1));
            if (index != model.tokens_.size())
                throw DataError("tfidf artifact indices out of order", lineno);
            model.index_.emplace(token, index);
            model.tokens_.push_back(token);
            model.idf_.push_back(std::stod(line.substr(tab2 + 1)));
        }
        if (model.tokens_.empty()) throw DataError("empty tfidf artifact: " + path);
        return model;
    }

private:
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::string> tokens_;
    std::vector<double> idf_;
    std::size_t n_docs_ = 0;
    bool sublinear_tf_ = false;
};

}  // namespace movierec
