#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "cesumm/porter.hpp"

namespace cesumm {

/// The classic 33-word English stopword list used by Lucene-style analyzers.
inline const std::unordered_set<std::string>& default_english_stopwords() {
    static const std::unordered_set<std::string> words = {
        "a", "an", "and", "are", "as", "at", "be", "but", "by",
        "for", "if", "in", "into", "is", "it",
        "no", "not", "of", "on", "or", "such",
        "that", "the", "their", "then", "there", "these",
        "they", "this", "to", "was", "will", "with"};
    return words;
}

/// Settings for the text analysis chain: tokenize, lowercase, drop stopwords,
/// stem. All corpus statistics and all scoring run through this one chain so
/// that sentence vectors, query vectors and feedback terms live in the same
/// term space.
struct AnalyzerConfig {
    std::unordered_set<std::string> stopwords = default_english_stopwords();
    bool lowercase_enabled = true;
    bool stemming_enabled = true;
    /// When true (the default), bigrams are formed over the stopped token
    /// stream, i.e. a stopword between two content words does not break the
    /// pair. When false, bigrams keep stopwords as members. Exposed as a knob
    /// because either convention is defensible; the default keeps bigram
    /// statistics aligned with the unigram term space.
    bool bigrams_skip_stopwords = true;
};

namespace detail {

inline bool is_token_char(unsigned char c) {
    return std::isalnum(c) != 0;
}

inline std::string ascii_lower(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (const unsigned char c : raw)
        out.push_back(static_cast<char>(std::tolower(c)));
    return out;
}

/// Tokenizes raw text into maximal ASCII alphanumeric runs, then applies the
/// configured lowercase / stopword / stemming stages. Stopword matching
/// happens on the lowercased surface form, before stemming.
inline std::vector<std::string> analyze_impl(std::string_view text, const AnalyzerConfig& config,
                                             bool apply_stopwords) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_token_char(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t begin = i;
        while (i < text.size() && is_token_char(static_cast<unsigned char>(text[i]))) ++i;
        if (i == begin) continue;
        std::string token{text.substr(begin, i - begin)};
        if (config.lowercase_enabled) token = ascii_lower(token);
        if (apply_stopwords && config.stopwords.count(token) > 0) continue;
        if (config.stemming_enabled) token = porter_stem(std::move(token));
        if (!token.empty()) out.push_back(std::move(token));
    }
    return out;
}

} // namespace detail

/// Full analysis chain: the token stream every model in the library is built
/// from.
inline std::vector<std::string> analyze(std::string_view text, const AnalyzerConfig& config = {}) {
    return detail::analyze_impl(text, config, /*apply_stopwords=*/true);
}

/// Adjacent-pair bigrams over a sentence's analysis output, each encoded as
/// the two tokens joined by a single space. Which token stream feeds this is
/// decided by the caller (see AnalyzerConfig::bigrams_skip_stopwords).
inline std::vector<std::string> adjacent_bigrams(const std::vector<std::string>& tokens) {
    std::vector<std::string> out;
    if (tokens.size() < 2) return out;
    out.reserve(tokens.size() - 1);
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        std::string gram = tokens[i];
        gram.push_back(' ');
        gram.append(tokens[i + 1]);
        out.push_back(std::move(gram));
    }
    return out;
}

/// The bigram token source for one sentence under the given configuration.
inline std::vector<std::string> bigram_tokens(std::string_view text, const AnalyzerConfig& config) {
    return detail::analyze_impl(text, config, /*apply_stopwords=*/config.bigrams_skip_stopwords);
}

/// Number of whitespace-delimited surface words. Length budgets are counted
/// over surface words, not analyzed tokens, so stopword-heavy sentences still
/// spend budget.
inline std::uint32_t surface_word_count(std::string_view text) {
    std::uint32_t n = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])) != 0) ++i;
        if (i >= text.size()) break;
        ++n;
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])) == 0) ++i;
    }
    return n;
}

} // namespace cesumm
