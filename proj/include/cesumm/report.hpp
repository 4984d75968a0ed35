#pragma once

#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "cesumm/errors.hpp"

namespace cesumm {

/// Mean and normal-approximation 95% confidence halfwidth of a score list.
/// The halfwidth is 1.96·s/√n with the sample (n−1) standard deviation; it is
/// zero for a single run, where no interval is defined.
struct Aggregate {
    double mean = 0.0;
    double ci95_halfwidth = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t runs = 0;
};

inline Aggregate aggregate_scores(std::span<const double> scores) {
    if (scores.empty()) throw UsageError("aggregate_scores: no scores");
    Aggregate agg;
    agg.runs = scores.size();
    agg.min = scores[0];
    agg.max = scores[0];
    double sum = 0.0;
    for (const double s : scores) {
        sum += s;
        agg.min = std::min(agg.min, s);
        agg.max = std::max(agg.max, s);
    }
    agg.mean = sum / static_cast<double>(scores.size());
    if (scores.size() >= 2) {
        double sq = 0.0;
        for (const double s : scores) sq += (s - agg.mean) * (s - agg.mean);
        const double sd = std::sqrt(sq / static_cast<double>(scores.size() - 1));
        agg.ci95_halfwidth = 1.96 * sd / std::sqrt(static_cast<double>(scores.size()));
    }
    return agg;
}

/// One topic's aggregated result across seeded runs.
struct RunReport {
    std::string topic_id;
    std::string mode;
    std::vector<double> scores; // per-seed final objective values
    Aggregate aggregate;
    double runtime_ms = 0.0;
};

/// CSV rows: one per topic, per-seed scores joined by ';' in the last column.
inline std::string report_to_csv(std::span<const RunReport> reports) {
    std::string out = "topic_id,mode,runs,mean,ci95_halfwidth,runtime_ms,scores\n";
    char buffer[128];
    for (const RunReport& r : reports) {
        out += r.topic_id;
        out.push_back(',');
        out += r.mode;
        std::snprintf(buffer, sizeof(buffer), ",%zu,%.17g,%.17g,%.3f,", r.aggregate.runs,
                      r.aggregate.mean, r.aggregate.ci95_halfwidth, r.runtime_ms);
        out += buffer;
        for (std::size_t i = 0; i < r.scores.size(); ++i) {
            std::snprintf(buffer, sizeof(buffer), "%s%.17g", i == 0 ? "" : ";", r.scores[i]);
            out += buffer;
        }
        out.push_back('\n');
    }
    return out;
}

} // namespace cesumm
