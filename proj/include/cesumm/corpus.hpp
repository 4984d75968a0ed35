#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cesumm/analysis.hpp"
#include "cesumm/errors.hpp"
#include "cesumm/lm.hpp"

namespace cesumm {

/// One pre-segmented sentence with its analyzed representations. Sentences
/// arrive already split; no segmentation happens in this library.
struct Sentence {
    std::string doc_id;
    std::uint32_t index = 0;            // position within its document
    std::string raw_text;
    std::uint64_t char_offset = 0;      // start offset within the document
    std::uint32_t word_count = 0;       // whitespace-delimited surface words
    std::vector<Term> tokens;           // analyzed unigrams
    std::vector<Term> bigrams;          // adjacent analyzed pairs, space-joined
};

struct Document {
    std::string doc_id;
    std::vector<Sentence> sentences;
};

struct Topic {
    std::string topic_id;
    std::string title;
    std::vector<std::string> questions;
    /// Per-question expansion terms, aligned with `questions`. Empty inner
    /// lists mean no expansion for that question.
    std::vector<std::vector<std::string>> expansion_terms;
};

/// The analyzed document collection for one topic, with its centroid
/// statistics precomputed. Immutable after construction; safe to share across
/// threads by const reference.
class DocumentSet {
public:
    DocumentSet(std::string topic_id, std::vector<Document> documents, AnalyzerConfig analyzer)
        : topic_id_(std::move(topic_id)),
          documents_(std::move(documents)),
          analyzer_(std::move(analyzer)),
          centroid_uni_(NgramOrder::unigram),
          centroid_bi_(NgramOrder::bigram) {
        if (documents_.empty())
            throw ValidationError("document set '" + topic_id_ + "' contains no documents");
        for (auto& doc : documents_) {
            if (doc.sentences.empty())
                throw ValidationError("document '" + doc.doc_id + "' contains no sentences");
            std::uint64_t offset = 0;
            std::uint32_t index = 0;
            for (auto& s : doc.sentences) {
                s.doc_id = doc.doc_id;
                s.index = index++;
                s.char_offset = offset;
                offset += s.raw_text.size() + 1;
                s.word_count = surface_word_count(s.raw_text);
                if (s.word_count == 0)
                    throw ValidationError("document '" + doc.doc_id + "' sentence " +
                                          std::to_string(s.index) + " has no words");
                s.tokens = analyze(s.raw_text, analyzer_);
                s.bigrams = adjacent_bigrams(bigram_tokens(s.raw_text, analyzer_));
                centroid_uni_.add(TermVector::from_tokens(NgramOrder::unigram, s.tokens));
                centroid_bi_.add(TermVector::from_tokens(NgramOrder::bigram, s.bigrams));
                ++sentence_count_;
            }
        }
        centroid_lm_ = UnigramLM::from_counts(centroid_uni_);
    }

    const std::string& topic_id() const { return topic_id_; }
    const std::vector<Document>& documents() const { return documents_; }
    const AnalyzerConfig& analyzer() const { return analyzer_; }
    std::size_t sentence_count() const { return sentence_count_; }

    /// Unigram counts of the whole collection (all documents concatenated).
    const TermVector& centroid_unigrams() const { return centroid_uni_; }
    const TermVector& centroid_bigrams() const { return centroid_bi_; }
    const UnigramLM& centroid_lm() const { return centroid_lm_; }

    /// All sentences flattened in (document, sentence) order. Pointers remain
    /// valid for the lifetime of this DocumentSet instance.
    std::vector<const Sentence*> all_sentences() const {
        std::vector<const Sentence*> out;
        out.reserve(sentence_count_);
        for (const auto& doc : documents_)
            for (const auto& s : doc.sentences) out.push_back(&s);
        return out;
    }

private:
    std::string topic_id_;
    std::vector<Document> documents_;
    AnalyzerConfig analyzer_;
    TermVector centroid_uni_;
    TermVector centroid_bi_;
    UnigramLM centroid_lm_;
    std::size_t sentence_count_ = 0;
};

struct TopicCorpus {
    Topic topic;
    DocumentSet documents;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* key,
                                            const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end())
        throw SchemaError(where + ": missing required field '" + key + "'");
    return *it;
}

inline std::string require_string(const nlohmann::json& j, const char* key,
                                  const std::string& where) {
    const auto& v = require_field(j, key, where);
    if (!v.is_string())
        throw SchemaError(where + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

inline std::vector<std::string> require_string_array(const nlohmann::json& v, const char* key,
                                                     const std::string& where) {
    if (!v.is_array())
        throw SchemaError(where + ": field '" + std::string(key) + "' must be an array");
    std::vector<std::string> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_string())
            throw SchemaError(where + ": field '" + std::string(key) +
                              "' must contain only strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

} // namespace detail

/// Parses one topic's corpus document. `source` names the input (usually the
/// file path) for error messages.
inline TopicCorpus parse_corpus_json(const nlohmann::json& j, const std::string& source,
                                     const AnalyzerConfig& analyzer = {}) {
    if (!j.is_object()) throw SchemaError(source + ": corpus root must be a JSON object");

    Topic topic;
    topic.topic_id = detail::require_string(j, "topic_id", source);
    if (topic.topic_id.empty()) throw ValidationError(source + ": topic_id is empty");
    topic.title = detail::require_string(j, "title", source);
    topic.questions = detail::require_string_array(detail::require_field(j, "questions", source),
                                                   "questions", source);
    if (topic.questions.empty())
        throw ValidationError(source + ": topic '" + topic.topic_id + "' has no questions");

    topic.expansion_terms.assign(topic.questions.size(), {});
    if (const auto it = j.find("expansion_terms"); it != j.end()) {
        if (!it->is_object())
            throw SchemaError(source + ": field 'expansion_terms' must be an object keyed by "
                              "question index");
        for (const auto& [key, value] : it->items()) {
            std::size_t pos = 0;
            unsigned long idx = 0;
            try {
                idx = std::stoul(key, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != key.size())
                throw SchemaError(source + ": expansion_terms key '" + key +
                                  "' is not a question index");
            if (idx >= topic.questions.size())
                throw SchemaError(source + ": expansion_terms key '" + key +
                                  "' exceeds the question count");
            topic.expansion_terms[idx] =
                detail::require_string_array(value, "expansion_terms", source);
        }
    }

    const auto& docs_json = detail::require_field(j, "documents", source);
    if (!docs_json.is_array())
        throw SchemaError(source + ": field 'documents' must be an array");
    std::vector<Document> docs;
    docs.reserve(docs_json.size());
    for (const auto& dj : docs_json) {
        if (!dj.is_object())
            throw SchemaError(source + ": entries of 'documents' must be objects");
        Document doc;
        doc.doc_id = detail::require_string(dj, "doc_id", source);
        const auto sentences = detail::require_string_array(
            detail::require_field(dj, "sentences", source), "sentences", source);
        doc.sentences.reserve(sentences.size());
        for (const auto& text : sentences) {
            Sentence s;
            s.raw_text = text;
            doc.sentences.push_back(std::move(s));
        }
        docs.push_back(std::move(doc));
    }
    for (std::size_t i = 0; i < docs.size(); ++i)
        for (std::size_t k = i + 1; k < docs.size(); ++k)
            if (docs[i].doc_id == docs[k].doc_id)
                throw ValidationError(source + ": duplicate doc_id '" + docs[i].doc_id + "'");

    DocumentSet set(topic.topic_id, std::move(docs), analyzer);
    return TopicCorpus{std::move(topic), std::move(set)};
}

/// Loads a single-topic corpus file. Documents arrive pre-segmented into
/// sentences; segmentation is taken verbatim from the file.
inline TopicCorpus load_corpus(const std::filesystem::path& path,
                               const AnalyzerConfig& analyzer = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open corpus file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    if (text.size() >= 3 && text.compare(0, 3, "\xef\xbb\xbf") == 0)
        throw SchemaError(path.string() + ": corpus files must be UTF-8 without a BOM");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(path.string() + ": invalid JSON: " + e.what());
    }
    return parse_corpus_json(j, path.string(), analyzer);
}

/// Ranks sentences by unigram Bhattacharyya similarity to the combined topic
/// query (title plus all questions) and keeps the best k. Ties resolve by
/// (doc_id, char_offset) so the ranking is reproducible.
inline std::vector<const Sentence*> prune_candidates(const DocumentSet& documents,
                                                     const Topic& topic, std::size_t k) {
    if (k == 0) throw UsageError("prune_candidates: k must be at least 1");
    std::string query_text = topic.title;
    for (const auto& q : topic.questions) {
        query_text.push_back(' ');
        query_text.append(q);
    }
    const auto query_tokens = analyze(query_text, documents.analyzer());
    const auto query_lm = UnigramLM::from_counts(
        TermVector::from_tokens(NgramOrder::unigram, query_tokens));

    struct Ranked {
        const Sentence* sentence;
        double coefficient;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(documents.sentence_count());
    for (const Sentence* s : documents.all_sentences()) {
        const auto lm = UnigramLM::from_counts(
            TermVector::from_tokens(NgramOrder::unigram, s->tokens));
        ranked.push_back({s, bhattacharyya_coefficient(query_lm, lm)});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.coefficient != b.coefficient) return a.coefficient > b.coefficient;
        if (a.sentence->doc_id != b.sentence->doc_id) return a.sentence->doc_id < b.sentence->doc_id;
        return a.sentence->char_offset < b.sentence->char_offset;
    });
    if (ranked.size() > k) ranked.resize(k);
    std::vector<const Sentence*> out;
    out.reserve(ranked.size());
    for (const auto& r : ranked) out.push_back(r.sentence);
    return out;
}

} // namespace cesumm
