#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cesumm/corpus.hpp"
#include "cesumm/errors.hpp"
#include "cesumm/lm.hpp"

namespace cesumm {

/// Score assigned to summaries that break the length budget. Compares
/// strictly below every finite objective value.
inline constexpr double kInfeasible = -std::numeric_limits<double>::infinity();

/// Floor applied to each predictor factor inside the product objective, so a
/// single zero factor degrades the score without erasing the ordering signal
/// carried by the other factors.
inline constexpr double kPredictorFloor = 1e-12;

/// A sentence subset under evaluation, with its aggregate statistics
/// precomputed once at construction.
class CandidateSummary {
public:
    CandidateSummary() : uni_(NgramOrder::unigram), bi_(NgramOrder::bigram) {}

    static CandidateSummary from_sentences(std::vector<const Sentence*> sentences) {
        CandidateSummary s;
        s.members_ = std::move(sentences);
        for (const Sentence* sent : s.members_) {
            s.total_words_ += sent->word_count;
            s.uni_.add(TermVector::from_tokens(NgramOrder::unigram, sent->tokens));
            s.bi_.add(TermVector::from_tokens(NgramOrder::bigram, sent->bigrams));
        }
        s.lm_ = UnigramLM::from_counts(s.uni_);
        return s;
    }

    const std::vector<const Sentence*>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    std::uint64_t total_words() const { return total_words_; }
    const TermVector& unigrams() const { return uni_; }
    const TermVector& bigrams() const { return bi_; }
    const UnigramLM& lm() const { return lm_; }

    /// Members reordered by (doc_id, char_offset), the presentation order.
    std::vector<const Sentence*> ordered_members() const {
        auto out = members_;
        std::sort(out.begin(), out.end(), [](const Sentence* a, const Sentence* b) {
            if (a->doc_id != b->doc_id) return a->doc_id < b->doc_id;
            return a->char_offset < b->char_offset;
        });
        return out;
    }

private:
    std::vector<const Sentence*> members_;
    std::uint64_t total_words_ = 0;
    TermVector uni_;
    TermVector bi_;
    UnigramLM lm_;
};

/// Salient unigrams and mean sentence start offset distilled from a long
/// intermediate summary, used to steer the final optimization step.
struct FeedbackDistillate {
    std::set<Term> salient_terms;
    double avg_position = 0.0;
};

/// One analyzed sub-query: the topic title concatenated with one question,
/// optionally extended with expansion terms.
struct SubQuery {
    std::string text;
    TermVector tf{NgramOrder::unigram};
    UnigramLM lm;
    std::vector<Term> unique_terms;

    static SubQuery from_tokens(std::string text, std::vector<Term> tokens) {
        SubQuery q;
        q.text = std::move(text);
        q.tf = TermVector::from_tokens(NgramOrder::unigram, tokens);
        q.lm = UnigramLM::from_counts(q.tf);
        q.unique_terms.reserve(q.tf.distinct());
        for (const auto& [term, count] : q.tf.counts()) q.unique_terms.push_back(term);
        return q;
    }
};

/// Prepared query data shared by the query-aware predictors.
struct QueryContext {
    std::vector<SubQuery> subqueries;
};

/// Predictor 1: how much of the collection's bigram content the summary
/// covers, as the cosine between summary and collection bigram vectors.
inline double q_cov(const CandidateSummary& s, const DocumentSet& documents) {
    return cosine_similarity(s.bigrams(), documents.centroid_bigrams());
}

/// One sentence's position factor: 1 + 1/ln(b + pos). Monotone decreasing in
/// the start offset, so earlier sentences score higher. The argument of the
/// logarithm is clamped just above 1 to dodge the singularity at ln(1) = 0,
/// reachable when an adaptive b below 1 meets a sentence at offset 0.
inline double position_factor(double position, double b) {
    const double arg = std::max(b + position, 1.0 + 1e-6);
    return 1.0 + 1.0 / std::log(arg);
}

/// Predictor 2 over raw positions: geometric mean of the per-sentence
/// factors. Computed in log space so long summaries cannot overflow.
inline double q_pos(std::span<const double> positions, double b) {
    if (positions.empty()) throw UsageError("q_pos: empty summary");
    double log_sum = 0.0;
    for (const double p : positions) log_sum += std::log(position_factor(p, b));
    return std::exp(log_sum / static_cast<double>(positions.size()));
}

/// Predictor 2: position bias of the summary's sentences.
inline double q_pos(const CandidateSummary& s, double b) {
    std::vector<double> positions;
    positions.reserve(s.size());
    for (const Sentence* sent : s.members())
        positions.push_back(static_cast<double>(sent->char_offset));
    return q_pos(positions, b);
}

/// Predictor 3: mean sentence length in surface words. Favors longer, more
/// contentful sentences.
inline double q_len(const CandidateSummary& s) {
    if (s.empty()) throw UsageError("q_len: empty summary");
    return static_cast<double>(s.total_words()) / static_cast<double>(s.size());
}

/// Predictor 4: exp(-KL) between the summary's unigram model and the
/// collection's.
inline double q_kl(const CandidateSummary& s, const DocumentSet& documents) {
    return kl_similarity(s.lm(), documents.centroid_lm());
}

/// Predictor 5: query anchor. For each sub-query, the summary LM mass on the
/// sub-query's unique terms; sub-query values summed.
inline double q_qf(const CandidateSummary& s, const QueryContext& query) {
    double total = 0.0;
    for (const SubQuery& sub : query.subqueries)
        for (const Term& term : sub.unique_terms) total += s.lm().probability(term);
    return total;
}

/// Predictor 6: per sub-query, the geometric mean of Bhattacharyya similarity
/// and unigram cosine between query and summary; sub-query values summed.
inline double q_sim(const CandidateSummary& s, const QueryContext& query) {
    double total = 0.0;
    for (const SubQuery& sub : query.subqueries) {
        const double bhatt = bhattacharyya_coefficient(sub.lm, s.lm());
        const double cos = cosine_similarity(sub.tf, s.unigrams());
        total += std::sqrt(bhatt * cos);
    }
    return total;
}

/// Predictor 7: how many distilled feedback terms appear in the summary's
/// unigram support. Set semantics: each term counts once regardless of its
/// frequency in the summary.
inline double q_cov_feedback(const CandidateSummary& s, const FeedbackDistillate& feedback) {
    double count = 0.0;
    for (const Term& term : feedback.salient_terms)
        if (s.unigrams().count(term) > 0) count += 1.0;
    return count;
}

enum class Predictor {
    coverage,          // 1: bigram cosine to the collection
    position,          // 2: early-sentence bias
    length,            // 3: mean sentence word length
    kl,                // 4: unigram LM proximity to the collection
    query_focus,       // 5: query-term LM mass
    query_similarity,  // 6: Bhattacharyya-cosine geometric mean vs the query
    feedback_coverage, // 7: distilled feedback term hits
};

/// A product objective: which predictors to multiply and the parameters they
/// need. Built once per optimization step and shared read-only.
struct ObjectiveSpec {
    std::vector<Predictor> predictor_terms;
    double position_bias_b = 2.0;
    std::optional<FeedbackDistillate> feedback;
    std::shared_ptr<const QueryContext> query_context;

    bool uses(Predictor p) const {
        return std::find(predictor_terms.begin(), predictor_terms.end(), p) !=
               predictor_terms.end();
    }

    void validate() const {
        if (predictor_terms.empty())
            throw UsageError("ObjectiveSpec: at least one predictor is required");
        for (std::size_t i = 0; i < predictor_terms.size(); ++i)
            for (std::size_t k = i + 1; k < predictor_terms.size(); ++k)
                if (predictor_terms[i] == predictor_terms[k])
                    throw UsageError("ObjectiveSpec: duplicate predictor term");
        if (uses(Predictor::feedback_coverage) && !feedback.has_value())
            throw UsageError("ObjectiveSpec: feedback_coverage requires a distillate");
        const bool needs_query = uses(Predictor::query_focus) || uses(Predictor::query_similarity);
        if (needs_query && query_context == nullptr)
            throw UsageError("ObjectiveSpec: query predictors require a query context");
    }
};

/// Product of the configured predictor values, each floored at
/// kPredictorFloor; kInfeasible when the summary breaks the word budget.
/// Empty summaries are infeasible as well: they carry no content and several
/// predictors are undefined on them.
inline double evaluate_objective(const ObjectiveSpec& spec, const CandidateSummary& s,
                                 const DocumentSet& documents, std::uint64_t budget_words) {
    spec.validate();
    if (s.empty() || s.total_words() > budget_words) return kInfeasible;
    double product = 1.0;
    for (const Predictor p : spec.predictor_terms) {
        double value = 0.0;
        switch (p) {
            case Predictor::coverage: value = q_cov(s, documents); break;
            case Predictor::position: value = q_pos(s, spec.position_bias_b); break;
            case Predictor::length: value = q_len(s); break;
            case Predictor::kl: value = q_kl(s, documents); break;
            case Predictor::query_focus: value = q_qf(s, *spec.query_context); break;
            case Predictor::query_similarity: value = q_sim(s, *spec.query_context); break;
            case Predictor::feedback_coverage: value = q_cov_feedback(s, *spec.feedback); break;
        }
        product *= std::max(value, kPredictorFloor);
    }
    return product;
}

/// Predictor sets of the shipped objective variants. The saliency objective
/// is predictors 1-5, the focus objective adds 6 and 7, and the two
/// single-step baselines use {1,2,3,5,6} and 1-6 respectively.
inline std::vector<Predictor> saliency_predictors() {
    return {Predictor::coverage, Predictor::position, Predictor::length, Predictor::kl,
            Predictor::query_focus};
}

inline std::vector<Predictor> focus_predictors() {
    return {Predictor::coverage, Predictor::position, Predictor::length, Predictor::kl,
            Predictor::query_focus, Predictor::query_similarity, Predictor::feedback_coverage};
}

inline std::vector<Predictor> ces_predictors() {
    return {Predictor::coverage, Predictor::position, Predictor::length, Predictor::query_focus,
            Predictor::query_similarity};
}

inline std::vector<Predictor> ces_plus_predictors() {
    return {Predictor::coverage, Predictor::position, Predictor::length, Predictor::kl,
            Predictor::query_focus, Predictor::query_similarity};
}

} // namespace cesumm
