#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cesumm/predictors.hpp"

namespace cesumm {

/// Interned, allocation-free form of an ObjectiveSpec over a fixed candidate
/// pool. The optimizer calls the objective millions of times per run; going
/// through string-keyed maps there would dominate the runtime, so this class
/// maps every term to a dense integer id once and evaluates summaries with
/// plain array arithmetic. Equivalence with the string-keyed predictors is
/// pinned by tests, not assumed.
///
/// Evaluators hold mutable scratch buffers; create one per thread via
/// make_evaluator(). The CompiledObjective itself is immutable after
/// construction and safe to share.
class CompiledObjective {
public:
    CompiledObjective(ObjectiveSpec spec, std::span<const Sentence* const> pool,
                      const DocumentSet& documents)
        : spec_(std::move(spec)) {
        spec_.validate();
        use_cov_ = spec_.uses(Predictor::coverage);
        use_pos_ = spec_.uses(Predictor::position);
        use_len_ = spec_.uses(Predictor::length);
        use_kl_ = spec_.uses(Predictor::kl);
        use_qf_ = spec_.uses(Predictor::query_focus);
        use_sim_ = spec_.uses(Predictor::query_similarity);
        use_fb_ = spec_.uses(Predictor::feedback_coverage);

        std::unordered_map<std::string, std::uint32_t> uni_ids;
        std::unordered_map<std::string, std::uint32_t> bi_ids;
        auto intern = [](std::unordered_map<std::string, std::uint32_t>& ids,
                         const std::string& term) {
            return ids.emplace(term, static_cast<std::uint32_t>(ids.size())).first->second;
        };

        const std::size_t n = pool.size();
        uni_token_totals_.reserve(n);
        log_pos_factor_.reserve(n);
        uni_offsets_.reserve(n + 1);
        bi_offsets_.reserve(n + 1);
        uni_offsets_.push_back(0);
        bi_offsets_.push_back(0);
        for (const Sentence* s : pool) {
            uni_token_totals_.push_back(static_cast<std::uint32_t>(s->tokens.size()));
            log_pos_factor_.push_back(
                std::log(position_factor(static_cast<double>(s->char_offset),
                                         spec_.position_bias_b)));
            std::map<std::string, std::uint32_t> counts;
            for (const auto& t : s->tokens) ++counts[t];
            for (const auto& [term, count] : counts)
                uni_entries_.push_back({intern(uni_ids, term), count});
            uni_offsets_.push_back(static_cast<std::uint32_t>(uni_entries_.size()));
            counts.clear();
            for (const auto& g : s->bigrams) ++counts[g];
            for (const auto& [term, count] : counts)
                bi_entries_.push_back({intern(bi_ids, term), count});
            bi_offsets_.push_back(static_cast<std::uint32_t>(bi_entries_.size()));
        }
        uni_vocab_ = uni_ids.size();
        bi_vocab_ = bi_ids.size();

        // Collection statistics, indexed by pool term id. The pool is a
        // subset of the collection, so every pool term has a positive
        // collection count.
        centroid_uni_logp_.assign(uni_vocab_, 0.0);
        const double uni_total = static_cast<double>(documents.centroid_unigrams().total());
        std::uint32_t max_count = 1;
        std::vector<std::uint64_t> pool_totals(uni_vocab_, 0);
        for (const auto& [term, id] : uni_ids) {
            const std::uint64_t c = documents.centroid_unigrams().count(term);
            if (c == 0)
                throw InternalError("compiled objective: pool term '" + term +
                                    "' missing from the collection centroid");
            centroid_uni_logp_[id] = std::log(static_cast<double>(c) / uni_total);
        }
        for (const auto& e : uni_entries_) pool_totals[e.id] += e.count;
        for (const auto& t : pool_totals)
            max_count = std::max<std::uint32_t>(max_count, static_cast<std::uint32_t>(t));
        log_int_.resize(static_cast<std::size_t>(max_count) + 1, 0.0);
        for (std::size_t i = 1; i < log_int_.size(); ++i)
            log_int_[i] = std::log(static_cast<double>(i));

        centroid_bi_count_.assign(bi_vocab_, 0.0);
        for (const auto& [term, id] : bi_ids) {
            const std::uint64_t c = documents.centroid_bigrams().count(term);
            if (c == 0)
                throw InternalError("compiled objective: pool bigram '" + term +
                                    "' missing from the collection centroid");
            centroid_bi_count_[id] = static_cast<double>(c);
        }
        double bi_sq = 0.0;
        for (const auto& [term, count] : documents.centroid_bigrams().counts()) {
            const double c = static_cast<double>(count);
            bi_sq += c * c;
        }
        centroid_bi_norm_ = std::sqrt(bi_sq);

        // Query data. Term lists keep the sub-query's lexicographic term
        // order so floating-point sums match the string-keyed path exactly
        // (terms outside the pool contribute nothing either way).
        if ((use_qf_ || use_sim_) && spec_.query_context) {
            for (const SubQuery& sub : spec_.query_context->subqueries) {
                CompiledSubQuery c;
                double q_sq = 0.0;
                for (const auto& [term, count] : sub.tf.counts()) {
                    const double qc = static_cast<double>(count);
                    q_sq += qc * qc;
                    const auto it = uni_ids.find(term);
                    if (it == uni_ids.end()) continue;
                    c.present_terms.push_back(it->second);
                    c.query_counts.push_back(qc);
                    c.query_probs.push_back(sub.lm.probability(term));
                }
                c.query_norm = std::sqrt(q_sq);
                subqueries_.push_back(std::move(c));
            }
        }

        if (use_fb_ && spec_.feedback.has_value()) {
            for (const Term& term : spec_.feedback->salient_terms) {
                const auto it = uni_ids.find(term);
                if (it != uni_ids.end()) feedback_ids_.push_back(it->second);
            }
        }
    }

    /// Stateful evaluator with its own scratch space. One per thread.
    class Evaluator {
    public:
        /// Scores the summary made of the given pool indices. total_words
        /// must be the precomputed surface-word sum of those sentences (the
        /// sampler tracks it anyway); summaries over the hard budget, and
        /// empty ones, are infeasible.
        double operator()(std::span<const std::uint32_t> members, std::uint64_t total_words) {
            const CompiledObjective& o = *parent_;
            if (members.empty() || total_words > hard_budget_) return kInfeasible;

            double log_pos_sum = 0.0;
            std::uint64_t uni_total = 0;
            for (const std::uint32_t i : members) {
                if (accumulate_uni_) {
                    uni_total += o.uni_token_totals_[i];
                    for (std::uint32_t e = o.uni_offsets_[i]; e < o.uni_offsets_[i + 1]; ++e) {
                        const auto& entry = o.uni_entries_[e];
                        if (uni_counts_[entry.id] == 0) touched_uni_.push_back(entry.id);
                        uni_counts_[entry.id] += entry.count;
                    }
                }
                if (o.use_cov_) {
                    for (std::uint32_t e = o.bi_offsets_[i]; e < o.bi_offsets_[i + 1]; ++e) {
                        const auto& entry = o.bi_entries_[e];
                        if (bi_counts_[entry.id] == 0) touched_bi_.push_back(entry.id);
                        bi_counts_[entry.id] += entry.count;
                    }
                }
                if (o.use_pos_) log_pos_sum += o.log_pos_factor_[i];
            }

            double product = 1.0;
            for (const Predictor p : o.spec_.predictor_terms) {
                double value = 0.0;
                switch (p) {
                    case Predictor::coverage: value = coverage(); break;
                    case Predictor::position:
                        value = std::exp(log_pos_sum / static_cast<double>(members.size()));
                        break;
                    case Predictor::length:
                        value = static_cast<double>(total_words) /
                                static_cast<double>(members.size());
                        break;
                    case Predictor::kl: value = kl(uni_total); break;
                    case Predictor::query_focus: value = query_focus(uni_total); break;
                    case Predictor::query_similarity: value = query_similarity(uni_total); break;
                    case Predictor::feedback_coverage: value = feedback_coverage(); break;
                }
                product *= std::max(value, kPredictorFloor);
            }

            for (const std::uint32_t id : touched_uni_) uni_counts_[id] = 0;
            touched_uni_.clear();
            for (const std::uint32_t id : touched_bi_) bi_counts_[id] = 0;
            touched_bi_.clear();
            return product;
        }

    private:
        friend class CompiledObjective;
        Evaluator(const CompiledObjective* parent, std::uint64_t hard_budget)
            : parent_(parent), hard_budget_(hard_budget) {
            accumulate_uni_ = parent_->use_kl_ || parent_->use_qf_ || parent_->use_sim_ ||
                              parent_->use_fb_;
            uni_counts_.assign(parent_->uni_vocab_, 0);
            bi_counts_.assign(parent_->bi_vocab_, 0);
            touched_uni_.reserve(parent_->uni_vocab_);
            touched_bi_.reserve(parent_->bi_vocab_);
        }

        double coverage() const {
            const CompiledObjective& o = *parent_;
            double dot = 0.0;
            double s_sq = 0.0;
            for (const std::uint32_t id : touched_bi_) {
                const double c = static_cast<double>(bi_counts_[id]);
                dot += c * o.centroid_bi_count_[id];
                s_sq += c * c;
            }
            if (dot == 0.0 || s_sq == 0.0) return 0.0;
            return dot / (std::sqrt(s_sq) * o.centroid_bi_norm_);
        }

        double kl(std::uint64_t uni_total) const {
            if (uni_total == 0) return 1.0; // empty LM: vacuous divergence
            const CompiledObjective& o = *parent_;
            const double log_total = std::log(static_cast<double>(uni_total));
            double div = 0.0;
            for (const std::uint32_t id : touched_uni_) {
                const double c = static_cast<double>(uni_counts_[id]);
                const double p = c / static_cast<double>(uni_total);
                div += p * (o.log_int_[uni_counts_[id]] - log_total - o.centroid_uni_logp_[id]);
            }
            return std::exp(-div);
        }

        double query_focus(std::uint64_t uni_total) const {
            if (uni_total == 0) return 0.0;
            const double total = static_cast<double>(uni_total);
            double sum = 0.0;
            for (const auto& sub : parent_->subqueries_)
                for (std::size_t k = 0; k < sub.present_terms.size(); ++k) {
                    const std::uint32_t c = uni_counts_[sub.present_terms[k]];
                    if (c != 0) sum += static_cast<double>(c) / total;
                }
            return sum;
        }

        double query_similarity(std::uint64_t uni_total) const {
            if (uni_total == 0) return 0.0;
            const double total = static_cast<double>(uni_total);
            double s_sq = 0.0;
            for (const std::uint32_t id : touched_uni_) {
                const double c = static_cast<double>(uni_counts_[id]);
                s_sq += c * c;
            }
            const double s_norm = std::sqrt(s_sq);
            double sum = 0.0;
            for (const auto& sub : parent_->subqueries_) {
                double bhatt = 0.0;
                double dot = 0.0;
                for (std::size_t k = 0; k < sub.present_terms.size(); ++k) {
                    const std::uint32_t c = uni_counts_[sub.present_terms[k]];
                    if (c == 0) continue;
                    bhatt += std::sqrt(sub.query_probs[k] * (static_cast<double>(c) / total));
                    dot += sub.query_counts[k] * static_cast<double>(c);
                }
                const double cos =
                    dot == 0.0 ? 0.0 : dot / (sub.query_norm * s_norm);
                sum += std::sqrt(bhatt * cos);
            }
            return sum;
        }

        double feedback_coverage() const {
            double count = 0.0;
            for (const std::uint32_t id : parent_->feedback_ids_)
                if (uni_counts_[id] != 0) count += 1.0;
            return count;
        }

        const CompiledObjective* parent_;
        std::uint64_t hard_budget_;
        bool accumulate_uni_ = false;
        std::vector<std::uint32_t> uni_counts_;
        std::vector<std::uint32_t> bi_counts_;
        std::vector<std::uint32_t> touched_uni_;
        std::vector<std::uint32_t> touched_bi_;
    };

    Evaluator make_evaluator(std::uint64_t hard_budget) const {
        return Evaluator(this, hard_budget);
    }

    const ObjectiveSpec& spec() const { return spec_; }

private:
    struct Entry {
        std::uint32_t id;
        std::uint32_t count;
    };
    struct CompiledSubQuery {
        std::vector<std::uint32_t> present_terms; // pool ids, lexicographic term order
        std::vector<double> query_counts;
        std::vector<double> query_probs;
        double query_norm = 0.0;
    };

    ObjectiveSpec spec_;
    bool use_cov_ = false, use_pos_ = false, use_len_ = false, use_kl_ = false;
    bool use_qf_ = false, use_sim_ = false, use_fb_ = false;

    std::vector<std::uint32_t> uni_token_totals_;
    std::vector<double> log_pos_factor_;
    std::vector<std::uint32_t> uni_offsets_;
    std::vector<std::uint32_t> bi_offsets_;
    std::vector<Entry> uni_entries_;
    std::vector<Entry> bi_entries_;
    std::size_t uni_vocab_ = 0;
    std::size_t bi_vocab_ = 0;

    std::vector<double> centroid_uni_logp_;
    std::vector<double> log_int_;
    std::vector<double> centroid_bi_count_;
    double centroid_bi_norm_ = 0.0;

    std::vector<CompiledSubQuery> subqueries_;
    std::vector<std::uint32_t> feedback_ids_;
};

} // namespace cesumm
