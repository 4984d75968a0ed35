#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "cesumm/errors.hpp"
#include "cesumm/rng.hpp"

namespace cesumm {
namespace ce {

/// One selectable item: its budget weight (word count for sentences) and a
/// tie rank used wherever a deterministic ordering among equal-probability
/// items is needed. Callers assign tie ranks; for sentence pools the rank
/// follows (doc_id, char_offset).
struct SubsetItem {
    std::uint64_t weight = 0;
    std::uint32_t tie_rank = 0;
};

/// A sampled or extracted subset, as indices into the item span.
struct Subset {
    std::vector<std::uint32_t> members;
    std::uint64_t total_weight = 0;
};

/// Per-item inclusion probabilities.
struct SelectionPolicy {
    std::vector<double> phi;

    static SelectionPolicy uniform(std::size_t n, double p = 0.5) {
        SelectionPolicy policy;
        policy.phi.assign(n, p);
        return policy;
    }
};

struct CEParams {
    std::size_t sample_count = 10000;
    double elite_fraction = 0.01;
    double smoothing = 0.7;
    std::size_t max_iterations = 100;
    /// Early stop when the elite threshold moved by less than
    /// stability_epsilon (relative) over this many consecutive iterations.
    /// A window or epsilon of zero disables early stopping.
    std::size_t stability_window = 5;
    double stability_epsilon = 1e-6;
    std::uint64_t seed = 0;

    void validate() const {
        if (sample_count == 0) throw UsageError("CEParams: sample_count must be positive");
        if (!(elite_fraction > 0.0 && elite_fraction < 1.0))
            throw UsageError("CEParams: elite_fraction must lie in (0,1)");
        if (!(smoothing >= 0.0 && smoothing <= 1.0))
            throw UsageError("CEParams: smoothing must lie in [0,1]");
        if (max_iterations == 0) throw UsageError("CEParams: max_iterations must be positive");
    }
};

/// State of the adaptive length extension: the learned mean length and its
/// starting value.
struct AdaptiveLengthState {
    double l_0 = 3000.0;
    double l_t = 3000.0;

    static AdaptiveLengthState starting_at(double l0) { return {l0, l0}; }
};

struct IterationStats {
    std::size_t iteration = 0;
    double gamma = 0.0;
    double elite_mean = 0.0;
    double length_limit = 0.0; // learned L_t when adaptive, fixed budget otherwise
    double wallclock_ms = 0.0;
};

struct EliteSelection {
    double gamma = 0.0;
    std::vector<std::uint32_t> sample_ids; // ascending
};

struct RunOptions {
    unsigned threads = 1;
    /// When true, the final summary is drawn from the learned policy instead
    /// of realized greedily.
    bool sampled_extraction = false;
};

struct CEResult {
    Subset best;
    SelectionPolicy policy;
    std::vector<IterationStats> trace;
};

/// Draws one length-feasible subset: items are visited in a shuffled order
/// and each one that still fits the budget is included with probability
/// phi(item). Items that no longer fit are passed over without consuming a
/// coin flip, so the result is feasible by construction.
inline Subset sample_subset(const SelectionPolicy& policy, std::span<const SubsetItem> items,
                            std::uint64_t budget, RandomStream& rng) {
    if (policy.phi.size() != items.size())
        throw UsageError("sample_subset: policy and item count differ");
    std::vector<std::uint32_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    Subset subset;
    for (const std::uint32_t i : order) {
        if (subset.total_weight + items[i].weight > budget) continue;
        if (rng.next_unit() < policy.phi[i]) {
            subset.members.push_back(i);
            subset.total_weight += items[i].weight;
        }
    }
    return subset;
}

/// The elite threshold: the score at descending rank ceil(rho*N), counting
/// only feasible samples (infeasible ones rank behind every finite score).
/// The elite set is every sample scoring at or above the threshold, which can
/// exceed rho*N on ties.
inline EliteSelection elite_threshold(std::span<const double> scores, double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        throw UsageError("elite_threshold: rho must lie in (0,1)");
    std::vector<double> finite;
    finite.reserve(scores.size());
    for (const double s : scores)
        if (std::isfinite(s)) finite.push_back(s);
    if (finite.empty())
        throw OptimizationError(
            "no feasible sample in this iteration; the length budget is likely smaller than "
            "every candidate sentence");
    std::sort(finite.begin(), finite.end(), std::greater<>());
    // ceil(rho*N) with a nudge so exact products like 0.01*10000 do not land
    // on the next rank through floating-point excess.
    const double x = rho * static_cast<double>(scores.size());
    const double rounded = std::round(x);
    std::size_t rank = std::fabs(x - rounded) < 1e-9 ? static_cast<std::size_t>(rounded)
                                                     : static_cast<std::size_t>(std::ceil(x));
    rank = std::clamp<std::size_t>(rank, 1, finite.size());
    EliteSelection elite;
    elite.gamma = finite[rank - 1];
    for (std::size_t j = 0; j < scores.size(); ++j)
        if (scores[j] >= elite.gamma) elite.sample_ids.push_back(static_cast<std::uint32_t>(j));
    return elite;
}

/// Empirical inclusion frequencies over the elite subsets: phi(i) = (number
/// of elite subsets containing i) / (elite count), an exact integer ratio.
inline SelectionPolicy update_policy(std::span<const Subset> elite, std::size_t item_count) {
    if (elite.empty()) throw UsageError("update_policy: elite set is empty");
    std::vector<std::uint64_t> hits(item_count, 0);
    for (const Subset& s : elite)
        for (const std::uint32_t i : s.members) {
            if (i >= item_count) throw UsageError("update_policy: member index out of range");
            ++hits[i];
        }
    SelectionPolicy policy;
    policy.phi.resize(item_count);
    const double denom = static_cast<double>(elite.size());
    for (std::size_t i = 0; i < item_count; ++i)
        policy.phi[i] = static_cast<double>(hits[i]) / denom;
    return policy;
}

/// Convex combination keeping `alpha` of the previous policy.
inline SelectionPolicy smooth_policy(const SelectionPolicy& prev, const SelectionPolicy& next,
                                     double alpha) {
    if (prev.phi.size() != next.phi.size())
        throw UsageError("smooth_policy: policy sizes differ");
    SelectionPolicy out;
    out.phi.resize(prev.phi.size());
    for (std::size_t i = 0; i < prev.phi.size(); ++i)
        out.phi[i] = alpha * prev.phi[i] + (1.0 - alpha) * next.phi[i];
    return out;
}

/// Mean elite length, smoothed against the previous value with the same
/// coefficient as the policy.
inline double update_length(std::span<const std::uint64_t> elite_lengths, double prev_length,
                            double alpha) {
    if (elite_lengths.empty()) throw UsageError("update_length: elite set is empty");
    double sum = 0.0;
    for (const std::uint64_t len : elite_lengths) sum += static_cast<double>(len);
    const double mean = sum / static_cast<double>(elite_lengths.size());
    return alpha * prev_length + (1.0 - alpha) * mean;
}

/// Deterministic greedy realization of a policy: items by descending phi
/// (ties by tie_rank), including every one that fits the budget. Items with
/// zero probability are never taken, so an indicator policy reproduces its
/// subset exactly.
inline Subset extract_summary(const SelectionPolicy& policy, std::span<const SubsetItem> items,
                              std::uint64_t budget) {
    if (policy.phi.size() != items.size())
        throw UsageError("extract_summary: policy and item count differ");
    std::vector<std::uint32_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (policy.phi[a] != policy.phi[b]) return policy.phi[a] > policy.phi[b];
        return items[a].tie_rank < items[b].tie_rank;
    });
    Subset subset;
    for (const std::uint32_t i : order) {
        if (policy.phi[i] <= 0.0) break;
        if (subset.total_weight + items[i].weight > budget) continue;
        subset.members.push_back(i);
        subset.total_weight += items[i].weight;
    }
    return subset;
}

namespace detail {

inline std::uint64_t sample_stream_key(std::uint64_t seed, std::size_t iteration,
                                       std::size_t sample) {
    return RandomStream::derive(RandomStream::derive(seed, iteration), sample);
}

} // namespace detail

/// Full optimization loop: sample, score, select elites, update and smooth
/// the policy, optionally adapt the length budget, and extract the final
/// subset.
///
/// `factory` is called once per worker thread and must return a callable
/// `double(std::span<const std::uint32_t> members, std::uint64_t total_weight)`
/// scoring a subset (kInfeasible for summaries that break the hard budget).
/// Every sample owns an rng stream derived from (seed, iteration, sample
/// index), so results are bit-identical for any thread count. Elite subsets
/// are regenerated from their streams rather than stored, which keeps memory
/// flat in the sample count.
template <class EvaluatorFactory>
CEResult run(const EvaluatorFactory& factory, std::span<const SubsetItem> items,
             std::uint64_t budget, const CEParams& params,
             std::optional<AdaptiveLengthState> adaptive = std::nullopt,
             const RunOptions& options = {}) {
    params.validate();
    if (items.empty()) throw UsageError("ce::run: no candidates");
    if (adaptive && !(adaptive->l_0 > 0.0))
        throw UsageError("ce::run: adaptive starting length must be positive");

    const std::size_t n = items.size();
    const std::size_t sample_count = params.sample_count;
    SelectionPolicy policy = SelectionPolicy::uniform(n, 0.5);
    double length = adaptive ? adaptive->l_t : static_cast<double>(budget);

    // One sample end to end: the per-sample budget draw (adaptive runs only)
    // happens before the shuffle, so regeneration replays the identical
    // sequence.
    const auto draw_sample = [&](RandomStream& rng, double current_length) {
        std::uint64_t sample_budget = budget;
        if (adaptive)
            sample_budget = std::min<std::uint64_t>(budget, rng.next_poisson(current_length));
        return sample_subset(policy, items, sample_budget, rng);
    };

    CEResult result;
    std::vector<double> scores(sample_count);
    std::vector<std::uint64_t> lengths(sample_count);
    std::vector<double> gammas;

    for (std::size_t t = 1; t <= params.max_iterations; ++t) {
        const auto started = std::chrono::steady_clock::now();

        const unsigned thread_count =
            std::max(1u, std::min<unsigned>(options.threads,
                                            static_cast<unsigned>(sample_count)));
        const auto worker = [&](std::size_t begin, std::size_t end) {
            auto evaluate = factory();
            for (std::size_t j = begin; j < end; ++j) {
                RandomStream rng(detail::sample_stream_key(params.seed, t, j));
                const Subset subset = draw_sample(rng, length);
                scores[j] = evaluate(std::span<const std::uint32_t>(subset.members),
                                     subset.total_weight);
                lengths[j] = subset.total_weight;
            }
        };
        if (thread_count == 1) {
            worker(0, sample_count);
        } else {
            const std::size_t chunk = (sample_count + thread_count - 1) / thread_count;
            std::vector<std::thread> threads;
            std::vector<std::exception_ptr> failures(thread_count);
            for (unsigned w = 0; w < thread_count; ++w) {
                const std::size_t begin = std::min<std::size_t>(w * chunk, sample_count);
                const std::size_t end = std::min<std::size_t>(begin + chunk, sample_count);
                threads.emplace_back([&, w, begin, end] {
                    try {
                        worker(begin, end);
                    } catch (...) {
                        failures[w] = std::current_exception();
                    }
                });
            }
            for (auto& th : threads) th.join();
            for (const auto& failure : failures)
                if (failure) std::rethrow_exception(failure);
        }

        const EliteSelection elite = elite_threshold(scores, params.elite_fraction);

        std::vector<Subset> elite_subsets;
        elite_subsets.reserve(elite.sample_ids.size());
        std::vector<std::uint64_t> elite_lengths;
        elite_lengths.reserve(elite.sample_ids.size());
        double elite_score_sum = 0.0;
        for (const std::uint32_t j : elite.sample_ids) {
            RandomStream rng(detail::sample_stream_key(params.seed, t, j));
            elite_subsets.push_back(draw_sample(rng, length));
            elite_lengths.push_back(lengths[j]);
            elite_score_sum += scores[j];
        }

        const SelectionPolicy updated = update_policy(elite_subsets, n);
        policy = smooth_policy(policy, updated, params.smoothing);
        if (adaptive) length = update_length(elite_lengths, length, params.smoothing);

        const double elapsed_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
                .count();
        result.trace.push_back({t, elite.gamma,
                                elite_score_sum / static_cast<double>(elite.sample_ids.size()),
                                adaptive ? length : static_cast<double>(budget), elapsed_ms});
        gammas.push_back(elite.gamma);

        if (params.stability_window > 0 && params.stability_epsilon > 0.0 &&
            gammas.size() > params.stability_window) {
            bool stable = true;
            for (std::size_t i = gammas.size() - params.stability_window; i < gammas.size();
                 ++i) {
                const double prev = gammas[i - 1];
                const double scale = std::fabs(prev) > 0.0 ? std::fabs(prev) : 1.0;
                if (std::fabs(gammas[i] - prev) >= params.stability_epsilon * scale) {
                    stable = false;
                    break;
                }
            }
            if (stable) break;
        }
    }

    std::uint64_t extraction_budget = budget;
    if (adaptive)
        extraction_budget =
            std::min<std::uint64_t>(budget, static_cast<std::uint64_t>(std::llround(length)));
    if (options.sampled_extraction) {
        RandomStream rng(detail::sample_stream_key(params.seed, 0, 0));
        result.best = sample_subset(policy, items, extraction_budget, rng);
    } else {
        result.best = extract_summary(policy, items, extraction_budget);
    }
    result.policy = std::move(policy);
    return result;
}

/// Serializes a trace with one CSV row per iteration. Numeric columns use
/// shortest round-trip formatting so equal doubles always print identically.
inline std::string trace_to_csv(std::span<const IterationStats> trace) {
    std::string out = "iteration,gamma,elite_mean,L_t,wallclock_ms\n";
    char row[256];
    for (const IterationStats& it : trace) {
        std::snprintf(row, sizeof(row), "%zu,%.17g,%.17g,%.17g,%.3f\n", it.iteration, it.gamma,
                      it.elite_mean, it.length_limit, it.wallclock_ms);
        out += row;
    }
    return out;
}

} // namespace ce
} // namespace cesumm
