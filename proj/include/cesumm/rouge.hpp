#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cesumm/errors.hpp"
#include "cesumm/porter.hpp"

namespace cesumm {

/// Evaluation settings. The defaults correspond to the standard toolkit
/// configuration this evaluator mirrors: stemming on, skip-bigrams with gap
/// up to 4 plus unigrams, balanced F, candidates cut at 250 words.
struct RougeConfig {
    bool stemming = true;
    std::size_t skip_distance = 4;
    bool include_unigrams = true;
    double f_alpha = 0.5;
    std::size_t length_truncation = 250;
};

struct RougeScore {
    double recall = 0.0;
    double precision = 0.0;
    double f = 0.0;
};

/// Scoring tokenization: lowercase alphanumeric word split with optional
/// Porter stemming. Stopwords are retained, unlike the summarizer's analysis
/// chain; overlap metrics count every word.
inline std::vector<std::string> rouge_tokenize(std::string_view text, const RougeConfig& config) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i])) == 0) ++i;
        const std::size_t begin = i;
        while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i])) != 0) ++i;
        if (i == begin) continue;
        std::string token;
        token.reserve(i - begin);
        for (std::size_t p = begin; p < i; ++p)
            token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[p]))));
        if (config.stemming) token = porter_stem(std::move(token));
        out.push_back(std::move(token));
    }
    return out;
}

namespace detail {

using GramCounts = std::map<std::string, std::uint64_t>;

inline GramCounts ngram_counts(std::span<const std::string> tokens, int n) {
    GramCounts counts;
    if (tokens.size() < static_cast<std::size_t>(n)) return counts;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        std::string gram = tokens[i];
        for (int k = 1; k < n; ++k) {
            gram.push_back(' ');
            gram.append(tokens[i + static_cast<std::size_t>(k)]);
        }
        ++counts[gram];
    }
    return counts;
}

/// Skip-bigrams (pairs with at most skip_distance intervening words) plus,
/// optionally, unigrams, pooled into one count map. Unigram keys contain no
/// space, so the two gram kinds cannot collide.
inline GramCounts skip_bigram_counts(std::span<const std::string> tokens,
                                     const RougeConfig& config) {
    GramCounts counts;
    const std::size_t max_span = config.skip_distance + 1;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        for (std::size_t j = i + 1; j < tokens.size() && j - i <= max_span; ++j) {
            std::string gram = tokens[i];
            gram.push_back(' ');
            gram.append(tokens[j]);
            ++counts[gram];
        }
        if (config.include_unigrams) ++counts[tokens[i]];
    }
    return counts;
}

inline std::uint64_t total(const GramCounts& counts) {
    std::uint64_t t = 0;
    for (const auto& [gram, c] : counts) t += c;
    return t;
}

/// Clipped overlap: each gram counts at most as often as it appears in the
/// reference.
inline std::uint64_t clipped_overlap(const GramCounts& candidate, const GramCounts& reference) {
    std::uint64_t overlap = 0;
    const GramCounts& small = candidate.size() <= reference.size() ? candidate : reference;
    const GramCounts& large = candidate.size() <= reference.size() ? reference : candidate;
    for (const auto& [gram, c] : small) {
        const auto it = large.find(gram);
        if (it != large.end()) overlap += std::min(c, it->second);
    }
    return overlap;
}

inline double f_measure(double recall, double precision, double alpha) {
    const double denom = alpha * recall + (1.0 - alpha) * precision;
    if (denom <= 0.0) return 0.0;
    return precision * recall / denom;
}

template <class GramFn>
RougeScore score_grams(std::span<const std::string> candidate,
                       std::span<const std::vector<std::string>> references,
                       const RougeConfig& config, const GramFn& grams) {
    if (references.empty()) throw UsageError("rouge: at least one reference is required");
    const std::size_t cut = std::min(candidate.size(), config.length_truncation);
    const GramCounts cand = grams(candidate.subspan(0, cut));
    const std::uint64_t cand_total = total(cand);

    double recall_sum = 0.0;
    double precision_sum = 0.0;
    std::size_t usable = 0;
    for (const auto& ref_tokens : references) {
        const GramCounts ref = grams(std::span<const std::string>(ref_tokens));
        const std::uint64_t ref_total = total(ref);
        if (ref_total == 0) continue; // empty reference contributes nothing
        ++usable;
        const std::uint64_t overlap = clipped_overlap(cand, ref);
        recall_sum += static_cast<double>(overlap) / static_cast<double>(ref_total);
        precision_sum += cand_total == 0
                             ? 0.0
                             : static_cast<double>(overlap) / static_cast<double>(cand_total);
    }
    if (usable == 0)
        throw EvaluationError("rouge: every reference is empty after tokenization");
    RougeScore score;
    score.recall = recall_sum / static_cast<double>(usable);
    score.precision = precision_sum / static_cast<double>(usable);
    score.f = f_measure(score.recall, score.precision, config.f_alpha);
    return score;
}

} // namespace detail

/// N-gram overlap (n = 1 or 2) of a candidate against one or more reference
/// token lists: clipped matches, per-reference recall and precision averaged
/// arithmetically (no jackknifing), F as the f_alpha-weighted combination.
/// The candidate is truncated to length_truncation tokens first.
inline RougeScore rouge_n(std::span<const std::string> candidate,
                          std::span<const std::vector<std::string>> references, int n,
                          const RougeConfig& config = {}) {
    if (n != 1 && n != 2) throw UsageError("rouge_n: n must be 1 or 2");
    return detail::score_grams(candidate, references, config,
                               [n](std::span<const std::string> tokens) {
                                   return detail::ngram_counts(tokens, n);
                               });
}

/// Skip-bigram overlap with unigrams pooled in (the SU metric), same
/// averaging rules as rouge_n.
inline RougeScore rouge_su(std::span<const std::string> candidate,
                           std::span<const std::vector<std::string>> references,
                           const RougeConfig& config = {}) {
    return detail::score_grams(candidate, references, config,
                               [&config](std::span<const std::string> tokens) {
                                   return detail::skip_bigram_counts(tokens, config);
                               });
}

} // namespace cesumm
