#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cesumm/benchmark.hpp"
#include "cesumm/cascade.hpp"
#include "cesumm/corpus.hpp"

using namespace cesumm;
using nlohmann::json;

namespace {

// CE parameters small enough to run dozens of times inside one test binary
// yet large enough to converge on the synthetic topics.
CascadeConfig fast_config() {
    CascadeConfig config;
    config.l_max = 60;
    config.l_bar = 120;
    config.adaptive_l0 = 240.0;
    config.prune_k = 24;
    config.feedback_top_k = 12;
    config.ce_params.sample_count = 120;
    config.ce_params.max_iterations = 8;
    config.ce_params.elite_fraction = 0.05;
    config.ce_params.stability_window = 0;
    config.ce_params.seed = 17;
    return config;
}

TopicCorpus small_bench() {
    bench::BenchmarkSpec spec;
    spec.topics = 1;
    spec.docs_per_topic = 4;
    spec.sentences_per_doc = 8;
    return bench::make_topic(spec, 0).corpus;
}

bool position_ordered(const CandidateSummary& s) {
    const auto& members = s.members();
    for (std::size_t i = 1; i < members.size(); ++i) {
        const Sentence* a = members[i - 1];
        const Sentence* b = members[i];
        if (a->doc_id != b->doc_id ? a->doc_id > b->doc_id : a->char_offset >= b->char_offset)
            return false;
    }
    return true;
}

} // namespace

TEST_CASE("mode names round-trip", "[cascade]") {
    for (const auto mode : {SummarizerMode::ces, SummarizerMode::ces_plus, SummarizerMode::dual,
                            SummarizerMode::dual_adaptive})
        REQUIRE(parse_mode(to_string(mode)) == mode);
    REQUIRE(to_string(SummarizerMode::ces_plus) == "ces-plus");
    REQUIRE_THROWS_AS(parse_mode("cascade"), ValidationError);
}

TEST_CASE("config validation", "[cascade]") {
    CascadeConfig config;
    REQUIRE_NOTHROW(config.validate());

    config.l_max = 0;
    REQUIRE_THROWS_AS(config.validate(), ValidationError);

    config = CascadeConfig{};
    config.l_bar = config.l_max - 1;
    REQUIRE_THROWS_AS(config.validate(), ValidationError);

    config = CascadeConfig{};
    config.prune_k = 0;
    REQUIRE_THROWS_AS(config.validate(), ValidationError);

    config = CascadeConfig{};
    config.feedback_top_k = 0;
    REQUIRE_THROWS_AS(config.validate(), ValidationError);

    config = CascadeConfig{};
    config.position_bias_b = 0.0;
    REQUIRE_THROWS_AS(config.validate(), ValidationError);

    config = CascadeConfig{};
    config.adaptive_l0 = 0.0;
    REQUIRE_THROWS_AS(config.validate(), ValidationError);

    config = CascadeConfig{};
    config.ce_params.elite_fraction = 1.5;
    REQUIRE_THROWS_AS(config.validate(), UsageError);
}

TEST_CASE("question expansion terms extend their sub-query", "[cascade]") {
    json j{
        {"topic_id", "t"},
        {"title", "alpha"},
        {"questions", {"beta gamma", "delta"}},
        {"expansion_terms", {{"0", json::array()}}},
        {"documents", {{{"doc_id", "d"}, {"sentences", {"alpha beta."}}}}},
    };
    // 120 distinct expansion terms; only the first 100 may survive.
    for (int i = 0; i < 120; ++i)
        j["expansion_terms"]["0"].push_back("xterm" + std::to_string(i));

    const auto corpus = parse_corpus_json(j, "test");
    const AnalyzerConfig analyzer;

    const auto expanded = prepare_subqueries(corpus.topic, analyzer);
    REQUIRE(expanded->subqueries.size() == 2);
    // Base tokens: {alpha, beta, gamma} plus 100 distinct expansion terms.
    REQUIRE(expanded->subqueries[0].tf.distinct() == 3 + kMaxExpansionTerms);
    REQUIRE(expanded->subqueries[0].tf.count("xterm0") == 1);
    REQUIRE(expanded->subqueries[0].tf.count("xterm99") == 1);
    REQUIRE(expanded->subqueries[0].tf.count("xterm100") == 0);
    // The second question has no expansion list.
    REQUIRE(expanded->subqueries[1].tf.distinct() == 2); // {alpha, delta}

    const auto bare = prepare_subqueries(corpus.topic, analyzer, false);
    REQUIRE(bare->subqueries[0].tf.distinct() == 3);
}

TEST_CASE("distillation keeps the most frequent terms with stable ties", "[cascade]") {
    const json j{
        {"topic_id", "t"},
        {"title", "q"},
        {"questions", {"q"}},
        {"documents",
         {{{"doc_id", "d"}, {"sentences", {"bb aa bb aa bb aa.", "cc cc zz."}}}}},
    };
    const auto corpus = parse_corpus_json(j, "test");
    const auto all = corpus.documents.all_sentences();
    const auto summary = CandidateSummary::from_sentences({all[0], all[1]});

    // Counts: aa:3, bb:3, cc:2, zz:1. Top 2 must be {aa, bb}: equal counts
    // break toward the lexicographically smaller term.
    const auto top2 = distill(summary, 2);
    REQUIRE(top2.salient_terms == std::set<Term>{"aa", "bb"});

    const auto top3 = distill(summary, 3);
    REQUIRE(top3.salient_terms == std::set<Term>{"aa", "bb", "cc"});

    // top_k beyond the vocabulary keeps everything.
    REQUIRE(distill(summary, 50).salient_terms.size() == 4);

    // Mean start offset over the two members.
    const double expected_avg =
        (0.0 + static_cast<double>(all[0]->raw_text.size() + 1)) / 2.0;
    REQUIRE(top2.avg_position == expected_avg);

    REQUIRE_THROWS_AS(distill(CandidateSummary(), 5), UsageError);
}

TEST_CASE("objective factories assemble the advertised predictor sets", "[cascade]") {
    auto query = std::make_shared<QueryContext>();

    const auto saliency = saliency_objective(query, 3.0);
    REQUIRE(saliency.predictor_terms == saliency_predictors());
    REQUIRE(saliency.position_bias_b == 3.0);

    FeedbackDistillate fb;
    fb.salient_terms = {"x"};
    const auto focus = focus_objective(query, 4.0, fb);
    REQUIRE(focus.predictor_terms == focus_predictors());
    REQUIRE(focus.feedback.has_value());

    const auto no_fb = focus_objective(query, 4.0, std::nullopt);
    REQUIRE(no_fb.predictor_terms == ces_plus_predictors());

    REQUIRE(baseline_objective(SummarizerMode::ces, query, 2.0).predictor_terms ==
            ces_predictors());
    REQUIRE(baseline_objective(SummarizerMode::ces_plus, query, 2.0).predictor_terms ==
            ces_plus_predictors());
    REQUIRE_THROWS_AS(baseline_objective(SummarizerMode::dual, query, 2.0), UsageError);
}

TEST_CASE("baseline runs respect the word budget", "[cascade]") {
    const auto corpus = small_bench();
    const auto config = fast_config();

    const auto result = run_ces_baseline(corpus.topic, corpus.documents, config,
                                         SummarizerMode::ces);
    REQUIRE(result.mode == SummarizerMode::ces);
    REQUIRE(result.seed == config.ce_params.seed);
    REQUIRE_FALSE(result.summary.empty());
    REQUIRE(result.summary.total_words() <= config.l_max);
    REQUIRE(result.objective > 0.0);
    REQUIRE(result.trace.size() == config.ce_params.max_iterations);
    REQUIRE_FALSE(result.step1.has_value());
    REQUIRE_FALSE(result.distillate.has_value());
    REQUIRE(position_ordered(result.summary));
    REQUIRE_FALSE(result.summary_text().empty());
}

TEST_CASE("the cascade runs two steps and distills between them", "[cascade]") {
    const auto corpus = small_bench();
    const auto config = fast_config();

    const auto result = summarize(corpus.topic, corpus.documents, config, SummarizerMode::dual);
    REQUIRE(result.mode == SummarizerMode::dual);
    REQUIRE(result.summary.total_words() <= config.l_max);
    REQUIRE(result.step1.has_value());
    REQUIRE(result.step1->summary.total_words() <= config.l_bar);
    REQUIRE(result.step1->summary.total_words() > config.l_max); // longer draft
    REQUIRE(result.step1->objective > 0.0);
    REQUIRE(result.distillate.has_value());
    REQUIRE(result.distillate->salient_terms.size() <= config.feedback_top_k);
    REQUIRE_FALSE(result.distillate->salient_terms.empty());
    REQUIRE(result.distillate->avg_position >= 0.0);
    REQUIRE(position_ordered(result.summary));

    REQUIRE_THROWS_AS(
        run_dual_ces(corpus.topic, corpus.documents, config, SummarizerMode::ces), UsageError);
}

TEST_CASE("the adaptive cascade caps step one at the starting length", "[cascade]") {
    const auto corpus = small_bench();
    const auto config = fast_config();

    const auto result =
        summarize(corpus.topic, corpus.documents, config, SummarizerMode::dual_adaptive);
    REQUIRE(result.mode == SummarizerMode::dual_adaptive);
    REQUIRE(result.step1.has_value());
    REQUIRE(result.step1->summary.total_words() <=
            static_cast<std::uint64_t>(config.adaptive_l0));
    // The trace records the learned length, which must move off the start.
    REQUIRE_FALSE(result.step1->trace.empty());
    REQUIRE(result.step1->trace.back().length_limit < config.adaptive_l0);
}

TEST_CASE("disabling both cascade extras reproduces the six-predictor baseline",
          "[cascade]") {
    const auto corpus = small_bench();
    auto config = fast_config();
    config.use_feedback_predictor = false;
    config.use_adaptive_position_bias = false;

    const auto degenerate =
        run_dual_ces(corpus.topic, corpus.documents, config, SummarizerMode::dual);
    const auto baseline =
        run_ces_baseline(corpus.topic, corpus.documents, config, SummarizerMode::ces_plus);

    // Same rng stream layout, same objective, same pool: bit-identical picks.
    REQUIRE(degenerate.objective == baseline.objective);
    REQUIRE(degenerate.summary.size() == baseline.summary.size());
    for (std::size_t i = 0; i < degenerate.summary.size(); ++i) {
        REQUIRE(degenerate.summary.members()[i]->doc_id ==
                baseline.summary.members()[i]->doc_id);
        REQUIRE(degenerate.summary.members()[i]->index ==
                baseline.summary.members()[i]->index);
    }
}

TEST_CASE("cascade runs are reproducible from their seed", "[cascade]") {
    const auto corpus = small_bench();
    const auto config = fast_config();

    const auto a = summarize(corpus.topic, corpus.documents, config, SummarizerMode::dual);
    const auto b = summarize(corpus.topic, corpus.documents, config, SummarizerMode::dual);
    REQUIRE(a.objective == b.objective);
    REQUIRE(a.summary_text() == b.summary_text());
    REQUIRE(a.distillate->salient_terms == b.distillate->salient_terms);
}

TEST_CASE("tradeoff profile moves coverage up and focus down with the budget", "[cascade]") {
    const auto corpus = small_bench();
    auto config = fast_config();
    config.ce_params.sample_count = 200;

    const std::uint64_t budgets[] = {40, 120, 360};
    const auto rows = tradeoff_profile(corpus.topic, corpus.documents, config, budgets);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(rows[i].budget == budgets[i]);
        REQUIRE(rows[i].feasible);
        REQUIRE(rows[i].word_count <= budgets[i]);
        REQUIRE(rows[i].saliency > 0.0);
    }
    // Larger drafts can only cover more of the collection.
    REQUIRE(rows.back().saliency > rows.front().saliency);

    SECTION("budgets below every sentence are reported, not thrown") {
        const std::uint64_t tiny[] = {1, 40};
        const auto partial = tradeoff_profile(corpus.topic, corpus.documents, config, tiny);
        REQUIRE_FALSE(partial[0].feasible);
        REQUIRE(partial[0].word_count == 0);
        REQUIRE(partial[1].feasible);
    }

    SECTION("budget list validation") {
        REQUIRE_THROWS_AS(tradeoff_profile(corpus.topic, corpus.documents, config, {}),
                          UsageError);
        const std::uint64_t unsorted[] = {100, 100};
        REQUIRE_THROWS_AS(
            tradeoff_profile(corpus.topic, corpus.documents, config, unsorted), UsageError);
    }
}

TEST_CASE("summary serialization carries the run facts", "[cascade]") {
    const auto corpus = small_bench();
    const auto config = fast_config();

    const auto dual = summarize(corpus.topic, corpus.documents, config, SummarizerMode::dual);
    const auto j = summary_to_json(dual, corpus.topic.topic_id, "runs/trace.csv");
    REQUIRE(j["topic_id"] == corpus.topic.topic_id);
    REQUIRE(j["mode"] == "dual");
    REQUIRE(j["seed"] == config.ce_params.seed);
    REQUIRE(j["summary"].is_array());
    REQUIRE_FALSE(j["summary"].empty());
    REQUIRE(j["summary"][0].contains("doc_id"));
    REQUIRE(j["summary"][0].contains("sentence_id"));
    REQUIRE(j["summary"][0].contains("text"));
    REQUIRE(j["word_count"] == dual.summary.total_words());
    REQUIRE(j["step1_word_count"] == dual.step1->summary.total_words());
    REQUIRE(j["distillate_terms"].size() == dual.distillate->salient_terms.size());
    REQUIRE(j["traces_path"] == "runs/trace.csv");

    const auto baseline =
        summarize(corpus.topic, corpus.documents, config, SummarizerMode::ces);
    const auto jb = summary_to_json(baseline, corpus.topic.topic_id, "runs/trace.csv");
    REQUIRE(jb["step1_word_count"].is_null());
    REQUIRE(jb["distillate_terms"].empty());
}
