#pragma once

#include <cstdint>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cesumm/corpus.hpp"
#include "cesumm/rng.hpp"

namespace cesumm {
namespace bench {

/// Knobs of the bundled synthetic benchmark. The generated corpora are
/// pseudo-language with planted structure: every topic has a core vocabulary
/// of answer material repeated across documents, a small query vocabulary
/// concentrated in a minority of sentences, boilerplate that recurs in every
/// sentence the way wire-service filler does, and one-off background words.
/// Reference-worthy sentences are marked by the core vocabulary they share,
/// not by where they sit in a document, and the query wording does not
/// mention the core vocabulary at all. Raw collection statistics are
/// dominated by boilerplate, so telling core sentences apart takes more than
/// proximity to the collection centroid.
struct BenchmarkSpec {
    std::size_t topics = 20;
    std::uint64_t seed = 0x5eedc0de;
    std::size_t docs_per_topic = 10;
    std::size_t sentences_per_doc = 16;
    std::size_t core_sentences_per_doc = 4;
    std::size_t query_sentences_per_doc = 2;

    // Vocabulary sizes control how sharply topical words stand out by
    // frequency: many background words each appear only a few times, the
    // small core and query pools repeat across every document, and the tiny
    // boilerplate pool floods the whole collection.
    std::size_t background_words = 600;
    std::size_t core_words = 80;
    std::size_t query_words = 20;
    std::size_t boilerplate_words = 25;
    std::size_t background_phrases = 120;
    std::size_t core_phrases = 48;
    std::size_t query_phrases = 10;
    std::size_t boilerplate_phrases = 30;

    std::size_t reference_count = 4;
    std::size_t min_sentence_words = 14;
    std::size_t max_sentence_words = 20;
};

/// One generated topic: the corpus file content, its parsed form, and the
/// planted reference summaries.
struct BenchmarkTopic {
    nlohmann::json corpus_json;
    TopicCorpus corpus;
    std::vector<std::string> references;
};

namespace detail {

/// Draws a pronounceable pseudo-word that the analysis chain maps to itself:
/// no stopword hits, stem-stable, and unique within the topic.
inline std::string fresh_word(RandomStream& rng, std::set<std::string>& used,
                              const AnalyzerConfig& analyzer) {
    static const char consonants[] = "bdfgklmnprstvz";
    static const char vowels[] = "aeiou";
    for (;;) {
        std::string w;
        const std::size_t syllables = 2 + rng.next_below(2);
        for (std::size_t s = 0; s < syllables; ++s) {
            w.push_back(consonants[rng.next_below(sizeof(consonants) - 1)]);
            w.push_back(vowels[rng.next_below(sizeof(vowels) - 1)]);
        }
        if (rng.next_unit() < 0.5)
            w.push_back(consonants[rng.next_below(sizeof(consonants) - 1)]);
        if (analyzer.stopwords.count(w) > 0) continue;
        if (porter_stem(w) != w) continue;
        if (!used.insert(w).second) continue;
        return w;
    }
}

struct TopicVocab {
    std::vector<std::string> background, core, query, boilerplate;
    std::vector<std::pair<std::string, std::string>> background_phrases, core_phrases,
        query_phrases, boilerplate_phrases;
};

enum class Role { core, query, background };

/// Emits one sentence as a mixture of phrases and single words drawn from
/// role-weighted pools.
inline std::string make_sentence(Role role, const TopicVocab& vocab, std::size_t target_words,
                                 RandomStream& rng) {
    const auto pick_word = [&](const std::vector<std::string>& pool) {
        return pool[rng.next_below(pool.size())];
    };
    const auto pick_phrase = [&](const std::vector<std::pair<std::string, std::string>>& pool) {
        return pool[rng.next_below(pool.size())];
    };
    // Pool weights per role: (core, query, boilerplate, background), phrases
    // and singles alike. Core sentences mostly reuse core phrases; query
    // sentences mix query and core material; background sentences are filler
    // with light contamination. Boilerplate gets the same share everywhere,
    // so its density says nothing about a sentence's role.
    double w_core = 0.0, w_query = 0.0;
    const double w_boiler = 0.30;
    switch (role) {
        case Role::core: w_core = 0.55; w_query = 0.05; break;
        case Role::query: w_core = 0.20; w_query = 0.45; break;
        case Role::background: w_core = 0.08; w_query = 0.02; break;
    }
    std::vector<std::string> words;
    while (words.size() < target_words) {
        const double source = rng.next_unit();
        const bool phrase = rng.next_unit() < 0.55 && words.size() + 2 <= target_words;
        if (phrase) {
            const auto& p = source < w_core                      ? pick_phrase(vocab.core_phrases)
                            : source < w_core + w_query          ? pick_phrase(vocab.query_phrases)
                            : source < w_core + w_query + w_boiler
                                ? pick_phrase(vocab.boilerplate_phrases)
                                : pick_phrase(vocab.background_phrases);
            words.push_back(p.first);
            words.push_back(p.second);
        } else {
            words.push_back(source < w_core             ? pick_word(vocab.core)
                            : source < w_core + w_query ? pick_word(vocab.query)
                            : source < w_core + w_query + w_boiler
                                ? pick_word(vocab.boilerplate)
                                : pick_word(vocab.background));
        }
    }
    std::string text;
    for (const auto& w : words) {
        if (!text.empty()) text.push_back(' ');
        text.append(w);
    }
    text.push_back('.');
    return text;
}

} // namespace detail

/// Generates one topic deterministically from (spec.seed, topic index).
inline BenchmarkTopic make_topic(const BenchmarkSpec& spec, std::size_t topic_index,
                                 const AnalyzerConfig& analyzer = {}) {
    if (spec.sentences_per_doc < spec.core_sentences_per_doc + spec.query_sentences_per_doc)
        throw UsageError("make_topic: documents too short for the requested core and "
                         "query sentence counts");
    RandomStream rng(RandomStream::derive(spec.seed, topic_index));
    std::set<std::string> used;
    detail::TopicVocab vocab;
    for (std::size_t i = 0; i < spec.background_words; ++i)
        vocab.background.push_back(detail::fresh_word(rng, used, analyzer));
    for (std::size_t i = 0; i < spec.core_words; ++i)
        vocab.core.push_back(detail::fresh_word(rng, used, analyzer));
    for (std::size_t i = 0; i < spec.query_words; ++i)
        vocab.query.push_back(detail::fresh_word(rng, used, analyzer));
    for (std::size_t i = 0; i < spec.boilerplate_words; ++i)
        vocab.boilerplate.push_back(detail::fresh_word(rng, used, analyzer));
    const auto make_phrases = [&rng](const std::vector<std::string>& pool, std::size_t n) {
        std::vector<std::pair<std::string, std::string>> phrases;
        for (std::size_t i = 0; i < n; ++i) {
            const auto a = rng.next_below(pool.size());
            auto b = rng.next_below(pool.size());
            if (b == a) b = (b + 1) % pool.size();
            phrases.emplace_back(pool[a], pool[b]);
        }
        return phrases;
    };
    vocab.background_phrases = make_phrases(vocab.background, spec.background_phrases);
    vocab.core_phrases = make_phrases(vocab.core, spec.core_phrases);
    vocab.query_phrases = make_phrases(vocab.query, spec.query_phrases);
    vocab.boilerplate_phrases = make_phrases(vocab.boilerplate, spec.boilerplate_phrases);

    char id[32];
    std::snprintf(id, sizeof(id), "synth-%03zu", topic_index);

    // Role layout per document: core and query sentences are scattered
    // uniformly, background fills the rest. Reference-worthy content is
    // marked by its shared vocabulary alone (references model human
    // abstracts, whose content has no privileged surface position), so
    // position predictors act as priors rather than oracles here.
    std::vector<nlohmann::json> documents;
    std::vector<std::vector<std::string>> doc_texts(spec.docs_per_topic);
    std::vector<std::vector<std::size_t>> core_positions(spec.docs_per_topic);
    std::vector<std::vector<std::size_t>> query_positions(spec.docs_per_topic);
    for (std::size_t d = 0; d < spec.docs_per_topic; ++d) {
        std::vector<detail::Role> roles(spec.sentences_per_doc, detail::Role::background);
        std::size_t placed = 0;
        while (placed < spec.core_sentences_per_doc) {
            const std::size_t pos = rng.next_below(spec.sentences_per_doc);
            if (roles[pos] != detail::Role::background) continue;
            roles[pos] = detail::Role::core;
            core_positions[d].push_back(pos);
            ++placed;
        }
        placed = 0;
        while (placed < spec.query_sentences_per_doc) {
            const std::size_t pos = rng.next_below(spec.sentences_per_doc);
            if (roles[pos] != detail::Role::background) continue;
            roles[pos] = detail::Role::query;
            query_positions[d].push_back(pos);
            ++placed;
        }
        std::sort(core_positions[d].begin(), core_positions[d].end());
        std::sort(query_positions[d].begin(), query_positions[d].end());
        std::vector<std::string> sentences;
        for (std::size_t i = 0; i < spec.sentences_per_doc; ++i) {
            const std::size_t words =
                spec.min_sentence_words +
                rng.next_below(spec.max_sentence_words - spec.min_sentence_words + 1);
            sentences.push_back(detail::make_sentence(roles[i], vocab, words, rng));
        }
        doc_texts[d] = sentences;
        char doc_id[32];
        std::snprintf(doc_id, sizeof(doc_id), "doc%02zu", d);
        documents.push_back({{"doc_id", doc_id}, {"sentences", sentences}});
    }

    // Title and questions use only the query vocabulary (plus two core
    // words in the title naming the topic). The body of the reference-worthy
    // core content stays outside the query's wording, the vocabulary gap
    // that pseudo-feedback exists to bridge.
    const std::string title = vocab.core[0] + " " + vocab.core[1] + " " + vocab.query[0];
    std::vector<std::string> questions;
    std::vector<std::vector<std::string>> expansions;
    const std::size_t question_count = 2;
    for (std::size_t q = 0; q < question_count; ++q) {
        std::string question;
        for (std::size_t k = 0; k < 5; ++k) {
            if (!question.empty()) question.push_back(' ');
            question += vocab.query[(q * 5 + k) % vocab.query.size()];
        }
        questions.push_back(question);
        std::vector<std::string> expansion;
        for (std::size_t k = 0; k < 6; ++k)
            expansion.push_back(vocab.query[(q * 5 + 5 + k) % vocab.query.size()]);
        expansions.push_back(expansion);
    }

    nlohmann::json expansion_json = nlohmann::json::object();
    for (std::size_t q = 0; q < expansions.size(); ++q)
        expansion_json[std::to_string(q)] = expansions[q];
    nlohmann::json corpus_json{
        {"topic_id", id},
        {"title", title},
        {"questions", questions},
        {"expansion_terms", expansion_json},
        {"documents", documents},
    };

    // Planted references: concatenations of gold document sentences (two
    // core-role sentences from a rotating half of the documents, plus a
    // couple of query-dense sentences), so reference bigrams are reachable
    // verbatim by an extractive system. The rotation also varies which of a
    // document's core sentences get used, keeping reference membership
    // independent of where a sentence sits in its document.
    std::vector<std::string> references;
    for (std::size_t r = 0; r < spec.reference_count; ++r) {
        std::string ref;
        for (std::size_t step = 0; step < spec.docs_per_topic; step += 2) {
            const std::size_t d = (r + step) % spec.docs_per_topic;
            for (std::size_t i = 0; i < 2 && i < core_positions[d].size(); ++i) {
                if (!ref.empty()) ref.push_back(' ');
                const std::size_t slot = (r + d + i) % core_positions[d].size();
                ref.append(doc_texts[d][core_positions[d][slot]]);
            }
        }
        for (std::size_t k = 0; k < 2; ++k) {
            const std::size_t d = (r + 1 + 2 * k) % spec.docs_per_topic;
            if (!query_positions[d].empty()) {
                ref.push_back(' ');
                const std::size_t slot = (r + d + k) % query_positions[d].size();
                ref.append(doc_texts[d][query_positions[d][slot]]);
            }
        }
        references.push_back(ref);
    }

    BenchmarkTopic topic{corpus_json, parse_corpus_json(corpus_json, id, analyzer), references};
    return topic;
}

inline std::vector<BenchmarkTopic> make_benchmark(const BenchmarkSpec& spec = {},
                                                  const AnalyzerConfig& analyzer = {}) {
    std::vector<BenchmarkTopic> topics;
    topics.reserve(spec.topics);
    for (std::size_t t = 0; t < spec.topics; ++t)
        topics.push_back(make_topic(spec, t, analyzer));
    return topics;
}

/// Reference file content for one topic.
inline nlohmann::json references_json(const BenchmarkTopic& topic) {
    return nlohmann::json{{"topic_id", topic.corpus.topic.topic_id},
                          {"references", topic.references}};
}

} // namespace bench
} // namespace cesumm
