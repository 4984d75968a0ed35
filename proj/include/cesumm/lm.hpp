#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cesumm/errors.hpp"

namespace cesumm {

using Term = std::string;

enum class NgramOrder : int {
    unigram = 1,
    bigram = 2,
};

/// Sparse non-negative integer count vector over terms of one n-gram order.
/// Counts are kept in an ordered map so that iteration (and everything
/// serialized from it) is deterministic.
class TermVector {
public:
    explicit TermVector(NgramOrder order = NgramOrder::unigram) : order_(order) {}

    static TermVector from_tokens(NgramOrder order, std::span<const Term> tokens) {
        TermVector v(order);
        for (const Term& t : tokens) v.add(t);
        return v;
    }

    void add(const Term& term, std::uint64_t count = 1) {
        if (count == 0) return;
        counts_[term] += count;
        total_ += count;
    }

    /// Accumulates another vector of the same order.
    void add(const TermVector& other) {
        if (other.order_ != order_)
            throw UsageError("TermVector::add: n-gram order mismatch");
        for (const auto& [term, count] : other.counts_) {
            counts_[term] += count;
            total_ += count;
        }
    }

    std::uint64_t count(const Term& term) const {
        const auto it = counts_.find(term);
        return it == counts_.end() ? 0 : it->second;
    }

    std::uint64_t total() const { return total_; }
    std::size_t distinct() const { return counts_.size(); }
    bool empty() const { return counts_.empty(); }
    NgramOrder order() const { return order_; }
    const std::map<Term, std::uint64_t>& counts() const { return counts_; }

private:
    NgramOrder order_;
    std::map<Term, std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

/// Maximum-likelihood unigram language model: term frequencies normalized by
/// the total count, no smoothing. Absent terms have probability zero.
class UnigramLM {
public:
    UnigramLM() = default;

    static UnigramLM from_counts(const TermVector& counts) {
        UnigramLM lm;
        if (counts.total() == 0) return lm;
        const double total = static_cast<double>(counts.total());
        for (const auto& [term, count] : counts.counts())
            lm.probs_[term] = static_cast<double>(count) / total;
        return lm;
    }

    double probability(const Term& term) const {
        const auto it = probs_.find(term);
        return it == probs_.end() ? 0.0 : it->second;
    }

    bool empty() const { return probs_.empty(); }
    std::size_t support_size() const { return probs_.size(); }
    const std::map<Term, double>& probabilities() const { return probs_; }

private:
    std::map<Term, double> probs_;
};

/// Cosine similarity between two count vectors of the same order. Zero when
/// either vector is empty.
inline double cosine_similarity(const TermVector& a, const TermVector& b) {
    if (a.order() != b.order())
        throw UsageError("cosine_similarity: n-gram order mismatch");
    if (a.empty() || b.empty()) return 0.0;
    // Iterate the smaller map for the dot product.
    const TermVector& small = a.distinct() <= b.distinct() ? a : b;
    const TermVector& large = a.distinct() <= b.distinct() ? b : a;
    double dot = 0.0;
    for (const auto& [term, count] : small.counts())
        dot += static_cast<double>(count) * static_cast<double>(large.count(term));
    if (dot == 0.0) return 0.0;
    auto sq_norm = [](const TermVector& v) {
        double s = 0.0;
        for (const auto& [term, count] : v.counts()) {
            const double c = static_cast<double>(count);
            s += c * c;
        }
        return s;
    };
    return dot / (std::sqrt(sq_norm(a)) * std::sqrt(sq_norm(b)));
}

/// Bhattacharyya coefficient between two unigram models, summed over the
/// support of the first. Lives in [0, 1], reaching 1 only for identical
/// distributions.
inline double bhattacharyya_coefficient(const UnigramLM& query, const UnigramLM& other) {
    double s = 0.0;
    for (const auto& [term, p] : query.probabilities())
        s += std::sqrt(p * other.probability(term));
    return s;
}

/// exp(-KL(summary || documents)), a similarity in (0, 1]. The summary model
/// must be supported inside the document model; that holds by construction
/// here (summaries are built out of document sentences), so a violation
/// indicates a bug rather than bad input.
inline double kl_similarity(const UnigramLM& summary, const UnigramLM& documents) {
    double kl = 0.0;
    for (const auto& [term, p] : summary.probabilities()) {
        const double q = documents.probability(term);
        if (q <= 0.0)
            throw InternalError("kl_similarity: summary term '" + term +
                                "' missing from the document model");
        kl += p * std::log(p / q);
    }
    return std::exp(-kl);
}

} // namespace cesumm
