#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cesumm/ce_opt.hpp"
#include "cesumm/compiled_objective.hpp"
#include "cesumm/corpus.hpp"
#include "cesumm/predictors.hpp"

namespace cesumm {

enum class SummarizerMode { ces, ces_plus, dual, dual_adaptive };

inline std::string to_string(SummarizerMode mode) {
    switch (mode) {
        case SummarizerMode::ces: return "ces";
        case SummarizerMode::ces_plus: return "ces-plus";
        case SummarizerMode::dual: return "dual";
        case SummarizerMode::dual_adaptive: return "dual-adaptive";
    }
    throw InternalError("to_string: unknown summarizer mode");
}

inline SummarizerMode parse_mode(const std::string& text) {
    if (text == "ces") return SummarizerMode::ces;
    if (text == "ces-plus") return SummarizerMode::ces_plus;
    if (text == "dual") return SummarizerMode::dual;
    if (text == "dual-adaptive") return SummarizerMode::dual_adaptive;
    throw ValidationError("unknown mode '" + text +
                          "' (expected ces, ces-plus, dual, or dual-adaptive)");
}

/// Expansion term lists are cut to this many entries per question before
/// analysis; callers supply them ranked.
inline constexpr std::size_t kMaxExpansionTerms = 100;

struct CascadeConfig {
    std::uint64_t l_max = 250;      // final summary word limit
    std::uint64_t l_bar = 1500;     // intermediate summary word limit
    double adaptive_l0 = 3000.0;    // starting length (and hard cap) of the adaptive variant
    std::size_t prune_k = 150;      // candidate pool size after pruning
    std::size_t feedback_top_k = 100;
    double position_bias_b = 2.0;
    ce::CEParams ce_params;

    /// Ablation switches. With both of the first two off, the cascade's
    /// second step degenerates to the six-predictor single-step baseline.
    bool use_feedback_predictor = true;
    bool use_adaptive_position_bias = true;
    /// Whether step 1's query-anchor predictor sees expansion terms too.
    bool expand_step1_queries = true;

    unsigned threads = 1;
    bool sampled_extraction = false;

    void validate() const {
        if (l_max == 0) throw ValidationError("config: l_max must be positive");
        if (l_bar < l_max) throw ValidationError("config: l_bar must be at least l_max");
        if (!(adaptive_l0 > 0.0)) throw ValidationError("config: adaptive_l0 must be positive");
        if (prune_k == 0) throw ValidationError("config: prune_k must be positive");
        if (feedback_top_k == 0) throw ValidationError("config: feedback_top_k must be positive");
        if (!(position_bias_b > 0.0))
            throw ValidationError("config: position_bias_b must be positive");
        ce_params.validate();
    }
};

/// Builds one sub-query per question: analyzed title + question tokens,
/// optionally extended with the question's expansion terms (each analyzed
/// through the same chain, truncated to kMaxExpansionTerms first).
inline std::shared_ptr<const QueryContext> prepare_subqueries(const Topic& topic,
                                                              const AnalyzerConfig& analyzer,
                                                              bool use_expansion = true) {
    auto context = std::make_shared<QueryContext>();
    for (std::size_t i = 0; i < topic.questions.size(); ++i) {
        std::string text = topic.title;
        text.push_back(' ');
        text.append(topic.questions[i]);
        auto tokens = analyze(text, analyzer);
        if (use_expansion && i < topic.expansion_terms.size()) {
            const auto& terms = topic.expansion_terms[i];
            const std::size_t n = std::min(terms.size(), kMaxExpansionTerms);
            for (std::size_t k = 0; k < n; ++k) {
                auto expanded = analyze(terms[k], analyzer);
                tokens.insert(tokens.end(), std::make_move_iterator(expanded.begin()),
                              std::make_move_iterator(expanded.end()));
            }
        }
        context->subqueries.push_back(SubQuery::from_tokens(std::move(text), std::move(tokens)));
    }
    return context;
}

/// Reduces an intermediate summary to the statistics that steer the final
/// step: its top_k most frequent unigrams (ties broken lexicographically)
/// and the mean start offset of its sentences.
inline FeedbackDistillate distill(const CandidateSummary& step1, std::size_t top_k) {
    if (step1.empty()) throw UsageError("distill: intermediate summary is empty");
    std::vector<std::pair<Term, std::uint64_t>> ranked(step1.unigrams().counts().begin(),
                                                       step1.unigrams().counts().end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > top_k) ranked.resize(top_k);
    FeedbackDistillate fb;
    for (const auto& [term, count] : ranked) fb.salient_terms.insert(term);
    double position_sum = 0.0;
    for (const Sentence* s : step1.members())
        position_sum += static_cast<double>(s->char_offset);
    fb.avg_position = position_sum / static_cast<double>(step1.size());
    return fb;
}

/// Objective factories. Kept as free functions so tests and tools can
/// introspect exactly which predictors each mode multiplies.
inline ObjectiveSpec saliency_objective(std::shared_ptr<const QueryContext> query, double b) {
    ObjectiveSpec spec;
    spec.predictor_terms = saliency_predictors();
    spec.position_bias_b = b;
    spec.query_context = std::move(query);
    return spec;
}

inline ObjectiveSpec focus_objective(std::shared_ptr<const QueryContext> query, double b,
                                     std::optional<FeedbackDistillate> feedback) {
    ObjectiveSpec spec;
    spec.predictor_terms = feedback.has_value() ? focus_predictors() : ces_plus_predictors();
    spec.position_bias_b = b;
    spec.feedback = std::move(feedback);
    spec.query_context = std::move(query);
    return spec;
}

inline ObjectiveSpec baseline_objective(SummarizerMode variant,
                                        std::shared_ptr<const QueryContext> query, double b) {
    if (variant != SummarizerMode::ces && variant != SummarizerMode::ces_plus)
        throw UsageError("baseline_objective: variant must be ces or ces-plus");
    ObjectiveSpec spec;
    spec.predictor_terms =
        variant == SummarizerMode::ces ? ces_predictors() : ces_plus_predictors();
    spec.position_bias_b = b;
    spec.query_context = std::move(query);
    return spec;
}

struct StepSummary {
    CandidateSummary summary;
    std::vector<ce::IterationStats> trace;
    double objective = 0.0;
};

struct SummaryResult {
    SummarizerMode mode = SummarizerMode::ces;
    std::uint64_t seed = 0;
    CandidateSummary summary; // members in (doc_id, char_offset) order
    double objective = 0.0;
    std::vector<ce::IterationStats> trace;
    std::optional<StepSummary> step1;
    std::optional<FeedbackDistillate> distillate;

    std::string summary_text() const {
        std::string out;
        for (const Sentence* s : summary.members()) {
            if (!out.empty()) out.push_back(' ');
            out.append(s->raw_text);
        }
        return out;
    }
};

namespace detail {

struct PreparedTopic {
    std::vector<const Sentence*> pool; // pruning order; shared by both steps
    std::vector<ce::SubsetItem> items;
    std::shared_ptr<const QueryContext> query;
};

inline PreparedTopic prepare_topic(const Topic& topic, const DocumentSet& documents,
                                   const CascadeConfig& config) {
    PreparedTopic prep;
    prep.pool = prune_candidates(documents, topic, config.prune_k);
    if (prep.pool.empty())
        throw ValidationError("topic '" + topic.topic_id + "': candidate pool is empty");
    prep.query = prepare_subqueries(topic, documents.analyzer());

    // Tie ranks follow (doc_id, char_offset) over the pool.
    std::vector<std::uint32_t> by_position(prep.pool.size());
    std::iota(by_position.begin(), by_position.end(), 0);
    std::sort(by_position.begin(), by_position.end(), [&](std::uint32_t a, std::uint32_t b) {
        const Sentence* sa = prep.pool[a];
        const Sentence* sb = prep.pool[b];
        if (sa->doc_id != sb->doc_id) return sa->doc_id < sb->doc_id;
        return sa->char_offset < sb->char_offset;
    });
    prep.items.resize(prep.pool.size());
    for (std::uint32_t rank = 0; rank < by_position.size(); ++rank) {
        const std::uint32_t i = by_position[rank];
        prep.items[i] = ce::SubsetItem{prep.pool[i]->word_count, rank};
    }
    return prep;
}

/// Runs one CE invocation over a prepared pool and materializes the result.
inline std::pair<CandidateSummary, ce::CEResult> run_step(
    const PreparedTopic& prep, const DocumentSet& documents, const ObjectiveSpec& spec,
    std::uint64_t budget, const ce::CEParams& params,
    std::optional<ce::AdaptiveLengthState> adaptive, const CascadeConfig& config) {
    const CompiledObjective objective(spec, prep.pool, documents);
    const auto factory = [&objective, budget] { return objective.make_evaluator(budget); };
    ce::RunOptions options;
    options.threads = config.threads;
    options.sampled_extraction = config.sampled_extraction;
    ce::CEResult result =
        ce::run(factory, std::span<const ce::SubsetItem>(prep.items), budget, params,
                std::move(adaptive), options);
    std::vector<const Sentence*> members;
    members.reserve(result.best.members.size());
    for (const std::uint32_t i : result.best.members) members.push_back(prep.pool[i]);
    std::sort(members.begin(), members.end(), [](const Sentence* a, const Sentence* b) {
        if (a->doc_id != b->doc_id) return a->doc_id < b->doc_id;
        return a->char_offset < b->char_offset;
    });
    auto summary = CandidateSummary::from_sentences(std::move(members));
    return {std::move(summary), std::move(result)};
}

inline double objective_value(const ObjectiveSpec& spec, const CandidateSummary& summary,
                              const DocumentSet& documents, std::uint64_t budget) {
    return evaluate_objective(spec, summary, documents, budget);
}

} // namespace detail

/// Single-step baselines: one CE invocation at l_max with the variant's
/// predictor product.
inline SummaryResult run_ces_baseline(const Topic& topic, const DocumentSet& documents,
                                      const CascadeConfig& config, SummarizerMode variant) {
    config.validate();
    const auto prep = detail::prepare_topic(topic, documents, config);
    const ObjectiveSpec spec = baseline_objective(variant, prep.query, config.position_bias_b);
    auto [summary, ce_result] =
        detail::run_step(prep, documents, spec, config.l_max, config.ce_params, std::nullopt,
                         config);
    SummaryResult out;
    out.mode = variant;
    out.seed = config.ce_params.seed;
    out.objective = detail::objective_value(spec, summary, documents, config.l_max);
    out.summary = std::move(summary);
    out.trace = std::move(ce_result.trace);
    return out;
}

/// The two-step cascade: a long saliency-oriented summary is optimized first
/// (at l_bar, or with Poisson-adaptive budgets from adaptive_l0), its term
/// statistics are distilled, and the final focus-oriented summary is
/// optimized at l_max over the same candidate pool. Step 2 consumes rng
/// streams keyed by the configured seed exactly as a single-step run would,
/// which is what makes the degenerate cascade (feedback and adaptive bias
/// disabled) coincide with the six-predictor baseline bit for bit.
inline SummaryResult run_dual_ces(const Topic& topic, const DocumentSet& documents,
                                  const CascadeConfig& config, SummarizerMode mode) {
    if (mode != SummarizerMode::dual && mode != SummarizerMode::dual_adaptive)
        throw UsageError("run_dual_ces: mode must be dual or dual-adaptive");
    config.validate();
    const auto prep = detail::prepare_topic(topic, documents, config);

    const bool adaptive = mode == SummarizerMode::dual_adaptive;
    const std::shared_ptr<const QueryContext> step1_query =
        config.expand_step1_queries ? prep.query
                                    : prepare_subqueries(topic, documents.analyzer(), false);
    const ObjectiveSpec step1_spec = saliency_objective(step1_query, config.position_bias_b);
    ce::CEParams step1_params = config.ce_params;
    step1_params.seed = RandomStream::derive(config.ce_params.seed, 1);
    const std::uint64_t step1_budget =
        adaptive ? static_cast<std::uint64_t>(config.adaptive_l0) : config.l_bar;
    auto [step1_summary, step1_result] = detail::run_step(
        prep, documents, step1_spec, step1_budget, step1_params,
        adaptive ? std::optional(ce::AdaptiveLengthState::starting_at(config.adaptive_l0))
                 : std::nullopt,
        config);

    FeedbackDistillate feedback = distill(step1_summary, config.feedback_top_k);
    const double step2_b =
        config.use_adaptive_position_bias ? feedback.avg_position : config.position_bias_b;
    const ObjectiveSpec step2_spec = focus_objective(
        prep.query, step2_b,
        config.use_feedback_predictor ? std::optional(feedback) : std::nullopt);
    auto [final_summary, step2_result] = detail::run_step(
        prep, documents, step2_spec, config.l_max, config.ce_params, std::nullopt, config);

    SummaryResult out;
    out.mode = mode;
    out.seed = config.ce_params.seed;
    out.objective = detail::objective_value(step2_spec, final_summary, documents, config.l_max);
    out.summary = std::move(final_summary);
    out.trace = std::move(step2_result.trace);
    StepSummary step1_out;
    step1_out.objective =
        detail::objective_value(step1_spec, step1_summary, documents, step1_budget);
    step1_out.summary = std::move(step1_summary);
    step1_out.trace = std::move(step1_result.trace);
    out.step1 = std::move(step1_out);
    out.distillate = std::move(feedback);
    return out;
}

/// Mode dispatch.
inline SummaryResult summarize(const Topic& topic, const DocumentSet& documents,
                               const CascadeConfig& config, SummarizerMode mode) {
    switch (mode) {
        case SummarizerMode::ces:
        case SummarizerMode::ces_plus:
            return run_ces_baseline(topic, documents, config, mode);
        case SummarizerMode::dual:
        case SummarizerMode::dual_adaptive:
            return run_dual_ces(topic, documents, config, mode);
    }
    throw InternalError("summarize: unknown summarizer mode");
}

struct TradeoffRow {
    std::uint64_t budget = 0;
    double saliency = 0.0;   // bigram cosine to the collection
    double focus = 0.0;      // summary LM mass on query terms
    std::uint64_t word_count = 0;
    bool feasible = true;
};

/// Optimizes the saliency objective at each budget and reports how general
/// coverage and query focus move against each other as the budget grows.
inline std::vector<TradeoffRow> tradeoff_profile(const Topic& topic,
                                                 const DocumentSet& documents,
                                                 const CascadeConfig& config,
                                                 std::span<const std::uint64_t> budgets) {
    config.validate();
    if (budgets.empty()) throw UsageError("tradeoff_profile: no budgets given");
    for (std::size_t i = 1; i < budgets.size(); ++i)
        if (budgets[i] <= budgets[i - 1])
            throw UsageError("tradeoff_profile: budgets must be strictly ascending");
    const auto prep = detail::prepare_topic(topic, documents, config);
    const ObjectiveSpec spec = saliency_objective(prep.query, config.position_bias_b);

    std::vector<TradeoffRow> rows;
    rows.reserve(budgets.size());
    for (const std::uint64_t budget : budgets) {
        TradeoffRow row;
        row.budget = budget;
        try {
            auto [summary, ce_result] = detail::run_step(prep, documents, spec, budget,
                                                         config.ce_params, std::nullopt, config);
            row.saliency = q_cov(summary, documents);
            row.focus = q_qf(summary, *prep.query);
            row.word_count = summary.total_words();
        } catch (const OptimizationError&) {
            row.feasible = false; // budget below every candidate sentence
        }
        rows.push_back(row);
    }
    return rows;
}

/// Serialized form of one run; `traces_path` names the CSV holding the
/// optimizer trace(s) for this run.
inline nlohmann::json summary_to_json(const SummaryResult& result, const std::string& topic_id,
                                      const std::string& traces_path) {
    nlohmann::json sentences = nlohmann::json::array();
    for (const Sentence* s : result.summary.members())
        sentences.push_back({{"doc_id", s->doc_id}, {"sentence_id", s->index},
                             {"text", s->raw_text}});
    nlohmann::json distillate = nlohmann::json::array();
    if (result.distillate)
        for (const Term& term : result.distillate->salient_terms) distillate.push_back(term);
    nlohmann::json j{
        {"topic_id", topic_id},
        {"mode", to_string(result.mode)},
        {"seed", result.seed},
        {"summary", std::move(sentences)},
        {"word_count", result.summary.total_words()},
        {"step1_word_count",
         result.step1 ? nlohmann::json(result.step1->summary.total_words()) : nlohmann::json()},
        {"distillate_terms", std::move(distillate)},
        {"traces_path", traces_path},
    };
    return j;
}

} // namespace cesumm
