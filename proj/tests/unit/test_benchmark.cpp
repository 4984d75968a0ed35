#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cesumm/analysis.hpp"
#include "cesumm/benchmark.hpp"

using namespace cesumm;

namespace {

bench::BenchmarkSpec tiny_spec() {
    bench::BenchmarkSpec spec;
    spec.topics = 2;
    spec.docs_per_topic = 3;
    spec.sentences_per_doc = 8;
    return spec;
}

} // namespace

TEST_CASE("generated topics have the requested shape", "[benchmark]") {
    const auto spec = tiny_spec();
    const auto topic = bench::make_topic(spec, 0);

    REQUIRE(topic.corpus.topic.topic_id == "synth-000");
    REQUIRE(topic.corpus.topic.questions.size() == 2);
    REQUIRE(topic.corpus.topic.expansion_terms.size() == 2);
    REQUIRE_FALSE(topic.corpus.topic.expansion_terms[0].empty());
    REQUIRE(topic.corpus.documents.documents().size() == spec.docs_per_topic);
    for (const auto& doc : topic.corpus.documents.documents())
        REQUIRE(doc.sentences.size() == spec.sentences_per_doc);
    REQUIRE(topic.references.size() == spec.reference_count);

    // Sentence lengths stay inside the configured band.
    for (const Sentence* s : topic.corpus.documents.all_sentences()) {
        REQUIRE(s->word_count >= spec.min_sentence_words);
        REQUIRE(s->word_count <= spec.max_sentence_words);
    }

    // The corpus json re-parses to the same structure.
    const auto reparsed = parse_corpus_json(topic.corpus_json, "roundtrip");
    REQUIRE(reparsed.topic.topic_id == topic.corpus.topic.topic_id);
    REQUIRE(reparsed.documents.sentence_count() == topic.corpus.documents.sentence_count());
}

TEST_CASE("generation is deterministic in the seed and varies across topics", "[benchmark]") {
    const auto spec = tiny_spec();
    const auto a = bench::make_topic(spec, 0);
    const auto b = bench::make_topic(spec, 0);
    REQUIRE(a.corpus_json == b.corpus_json);
    REQUIRE(a.references == b.references);

    const auto other_topic = bench::make_topic(spec, 1);
    REQUIRE(other_topic.corpus.topic.topic_id == "synth-001");
    REQUIRE(a.corpus_json != other_topic.corpus_json);

    auto reseeded_spec = spec;
    reseeded_spec.seed = spec.seed + 1;
    const auto reseeded = bench::make_topic(reseeded_spec, 0);
    REQUIRE(a.corpus_json != reseeded.corpus_json);
}

TEST_CASE("references are verbatim extractive", "[benchmark]") {
    const auto topic = bench::make_topic(tiny_spec(), 0);

    // Every reference is a space-joined concatenation of corpus sentences, so
    // each of its '.'-terminated pieces appears verbatim in some document.
    std::set<std::string> corpus_sentences;
    for (const Sentence* s : topic.corpus.documents.all_sentences())
        corpus_sentences.insert(s->raw_text);

    for (const auto& ref : topic.references) {
        REQUIRE_FALSE(ref.empty());
        std::size_t begin = 0;
        while (begin < ref.size()) {
            const std::size_t dot = ref.find('.', begin);
            REQUIRE(dot != std::string::npos);
            REQUIRE(corpus_sentences.count(ref.substr(begin, dot - begin + 1)) == 1);
            begin = dot + 2; // skip the joining space
        }
    }
}

TEST_CASE("references concentrate the recurring vocabulary", "[benchmark]") {
    // Full-size documents: the density contrast needs background to dominate
    // the corpus the way it does at the default shape.
    bench::BenchmarkSpec spec;
    spec.topics = 1;
    const auto topic = bench::make_topic(spec, 0);

    // The top of the corpus frequency table is the recurring band:
    // boilerplate plus the planted topical vocabulary.
    std::map<std::string, std::size_t> freq;
    std::size_t corpus_tokens = 0;
    for (const Sentence* s : topic.corpus.documents.all_sentences())
        for (const auto& t : s->tokens) {
            ++freq[t];
            ++corpus_tokens;
        }
    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    REQUIRE(ranked.size() > 100);
    ranked.resize(100);
    std::set<std::string> recurring;
    for (const auto& [term, count] : ranked) recurring.insert(term);

    std::size_t corpus_hits = 0;
    for (const auto& [term, count] : freq)
        if (recurring.count(term)) corpus_hits += count;
    const double corpus_density =
        static_cast<double>(corpus_hits) / static_cast<double>(corpus_tokens);

    std::size_t ref_hits = 0;
    std::size_t ref_tokens = 0;
    for (const auto& ref : topic.references)
        for (const auto& t : analyze(ref)) {
            ref_hits += recurring.count(t);
            ++ref_tokens;
        }
    const double ref_density = static_cast<double>(ref_hits) / static_cast<double>(ref_tokens);

    // Reference sentences are core- and query-heavy, so the recurring band
    // covers far more of their tokens than of the corpus at large.
    REQUIRE(ref_density > corpus_density + 0.10);
}

TEST_CASE("reference sentences come from all over the documents", "[benchmark]") {
    bench::BenchmarkSpec spec;
    spec.topics = 1;
    const auto topic = bench::make_topic(spec, 0);

    std::map<std::string, std::size_t> position; // sentence text -> index in its doc
    for (const Sentence* s : topic.corpus.documents.all_sentences())
        position[s->raw_text] = s->index;

    // Split each reference back into its '.'-terminated pieces and record
    // where those sentences sit in their documents. Reference membership is
    // vocabulary-driven, so the pieces must not cluster in one position band.
    std::size_t earliest = spec.sentences_per_doc;
    std::size_t latest = 0;
    for (const auto& ref : topic.references) {
        std::size_t begin = 0;
        while (begin < ref.size()) {
            const std::size_t dot = ref.find('.', begin);
            REQUIRE(dot != std::string::npos);
            const auto it = position.find(ref.substr(begin, dot - begin + 1));
            REQUIRE(it != position.end());
            earliest = std::min(earliest, it->second);
            latest = std::max(latest, it->second);
            begin = dot + 2;
        }
    }
    REQUIRE(earliest < spec.sentences_per_doc / 4);
    REQUIRE(latest >= (3 * spec.sentences_per_doc) / 4);
}

TEST_CASE("the benchmark enumerates distinct topics", "[benchmark]") {
    const auto topics = bench::make_benchmark(tiny_spec());
    REQUIRE(topics.size() == 2);
    REQUIRE(topics[0].corpus.topic.topic_id == "synth-000");
    REQUIRE(topics[1].corpus.topic.topic_id == "synth-001");

    const auto j = bench::references_json(topics[0]);
    REQUIRE(j["topic_id"] == "synth-000");
    REQUIRE(j["references"].size() == topics[0].references.size());
}
