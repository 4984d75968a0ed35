#include <catch2/catch_amalgamated.hpp>

#include "cesumm/analysis.hpp"
#include "cesumm/benchmark.hpp"
#include "cesumm/cascade.hpp"
#include "cesumm/ce_opt.hpp"
#include "cesumm/cli.hpp"
#include "cesumm/compiled_objective.hpp"
#include "cesumm/corpus.hpp"
#include "cesumm/errors.hpp"
#include "cesumm/lm.hpp"
#include "cesumm/porter.hpp"
#include "cesumm/predictors.hpp"
#include "cesumm/report.hpp"
#include "cesumm/rng.hpp"
#include "cesumm/rouge.hpp"

TEST_CASE("headers compile together and basic plumbing works", "[smoke]") {
    const auto tokens = cesumm::analyze("The cats are running");
    REQUIRE(tokens == std::vector<std::string>{"cat", "run"});

    cesumm::RandomStream rng(42);
    const double u = rng.next_unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
}
