#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cesumm/report.hpp"

using namespace cesumm;
using Catch::Matchers::WithinRel;

TEST_CASE("score aggregation", "[report]") {
    SECTION("mean, extrema, and normal-approximation interval") {
        const double scores[] = {1.0, 2.0, 3.0, 4.0};
        const auto agg = aggregate_scores(scores);
        REQUIRE(agg.runs == 4);
        REQUIRE(agg.mean == 2.5);
        REQUIRE(agg.min == 1.0);
        REQUIRE(agg.max == 4.0);
        // Sample variance 5/3, halfwidth 1.96 * sd / sqrt(4).
        REQUIRE_THAT(agg.ci95_halfwidth,
                     WithinRel(1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-14));
    }

    SECTION("a single run has no interval") {
        const double one[] = {0.7};
        const auto agg = aggregate_scores(one);
        REQUIRE(agg.runs == 1);
        REQUIRE(agg.mean == 0.7);
        REQUIRE(agg.ci95_halfwidth == 0.0);
        REQUIRE(agg.min == 0.7);
        REQUIRE(agg.max == 0.7);
    }

    SECTION("identical scores collapse the interval") {
        const double flat[] = {2.0, 2.0, 2.0};
        REQUIRE(aggregate_scores(flat).ci95_halfwidth == 0.0);
    }

    SECTION("no scores is a usage error") {
        REQUIRE_THROWS_AS(aggregate_scores({}), UsageError);
    }
}

TEST_CASE("report serialization", "[report]") {
    RunReport report;
    report.topic_id = "synth-000";
    report.mode = "dual";
    report.scores = {0.5, 0.25};
    report.aggregate = aggregate_scores(report.scores);
    report.runtime_ms = 12.5;

    const std::vector<RunReport> reports = {report};
    const auto csv = report_to_csv(reports);
    const auto expected_halfwidth = report.aggregate.ci95_halfwidth;
    char expected[256];
    std::snprintf(expected, sizeof(expected),
                  "topic_id,mode,runs,mean,ci95_halfwidth,runtime_ms,scores\n"
                  "synth-000,dual,2,0.375,%.17g,12.500,0.5;0.25\n",
                  expected_halfwidth);
    REQUIRE(csv == expected);

    REQUIRE(report_to_csv({}) == "topic_id,mode,runs,mean,ci95_halfwidth,runtime_ms,scores\n");
}
