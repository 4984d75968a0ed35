#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "cesumm/rng.hpp"
#include "cesumm/rouge.hpp"

#include "support/oracles.hpp"

using namespace cesumm;
using Catch::Matchers::WithinRel;

namespace {

std::vector<std::string> toks(const std::string& text, const RougeConfig& config = {}) {
    return rouge_tokenize(text, config);
}

std::vector<std::vector<std::string>> refs(std::initializer_list<std::string> texts,
                                           const RougeConfig& config = {}) {
    std::vector<std::vector<std::string>> out;
    for (const auto& t : texts) out.push_back(toks(t, config));
    return out;
}

} // namespace

TEST_CASE("scoring tokenizer keeps stopwords and splits on non-alphanumerics", "[rouge]") {
    RougeConfig plain;
    plain.stemming = false;
    REQUIRE(toks("The cats, running!", plain) ==
            std::vector<std::string>{"the", "cats", "running"});
    REQUIRE(toks("The cats, running!") == std::vector<std::string>{"the", "cat", "run"});
    REQUIRE(toks("  ", plain).empty());
    REQUIRE(toks("3,000 on-site", plain) == std::vector<std::string>{"3", "000", "on", "site"});
}

TEST_CASE("unigram and bigram overlap on a minimal pair", "[rouge]") {
    const auto cand = toks("a b c");
    const auto references = refs({"a b d"});

    const auto r1 = rouge_n(cand, references, 1);
    REQUIRE_THAT(r1.recall, WithinRel(2.0 / 3.0, 1e-15));
    REQUIRE_THAT(r1.precision, WithinRel(2.0 / 3.0, 1e-15));
    REQUIRE_THAT(r1.f, WithinRel(2.0 / 3.0, 1e-15));

    const auto r2 = rouge_n(cand, references, 2);
    REQUIRE(r2.recall == 0.5);
    REQUIRE(r2.precision == 0.5);
    REQUIRE(r2.f == 0.5);

    REQUIRE_THROWS_AS(rouge_n(cand, references, 3), UsageError);
    REQUIRE_THROWS_AS(rouge_n(cand, references, 0), UsageError);
}

TEST_CASE("skip-bigram pool counts ordered pairs plus unigrams", "[rouge]") {
    // Pairs of "a b c": (a,b) (a,c) (b,c); of "a c b": (a,c) (a,b) (c,b).
    // Shared pairs: 2. Shared unigrams: 3. Each side pools 6 units.
    const auto su = rouge_su(toks("a b c"), refs({"a c b"}));
    REQUIRE_THAT(su.recall, WithinRel(5.0 / 6.0, 1e-15));
    REQUIRE_THAT(su.precision, WithinRel(5.0 / 6.0, 1e-15));

    // With no skips and no unigrams the pool degenerates to plain bigrams.
    RougeConfig adjacent;
    adjacent.skip_distance = 0;
    adjacent.include_unigrams = false;
    const auto degenerate = rouge_su(toks("a b c"), refs({"a b d"}), adjacent);
    const auto r2 = rouge_n(toks("a b c"), refs({"a b d"}), 2);
    REQUIRE(degenerate.recall == r2.recall);
    REQUIRE(degenerate.precision == r2.precision);

    // The skip distance bounds the pair span: in "a b c d e f g" the pair
    // (a, g) spans 6 > skip_distance + 1 and is excluded at the default 4.
    const auto far_pair = rouge_su(toks("a g"), refs({"a b c d e f g"}));
    // Reference pairs: 6+6+5+4+3+2+1 limited to span 5: positions (i,j), j-i<=5:
    // i=0: 5 pairs, i=1: 5, i=2: 4, i=3: 3, i=4: 2, i=5: 1 -> 20 pairs + 7 unigrams = 27.
    // Candidate holds pair (a,g) unmatched, unigrams a and g matched.
    REQUIRE_THAT(far_pair.recall, WithinRel(2.0 / 27.0, 1e-15));
    REQUIRE_THAT(far_pair.precision, WithinRel(2.0 / 3.0, 1e-15));
}

TEST_CASE("overlap counts clip at the reference frequency", "[rouge]") {
    const auto score = rouge_n(toks("a a a"), refs({"a"}), 1);
    REQUIRE(score.recall == 1.0);
    REQUIRE_THAT(score.precision, WithinRel(1.0 / 3.0, 1e-15));
    REQUIRE(score.f == 0.5);
}

TEST_CASE("multiple references average arithmetically", "[rouge]") {
    const auto score = rouge_n(toks("a b"), refs({"a b", "c d"}), 1);
    REQUIRE(score.recall == 0.5);
    REQUIRE(score.precision == 0.5);
    REQUIRE(score.f == 0.5);
}

TEST_CASE("degenerate inputs", "[rouge]") {
    SECTION("empty candidate scores zero") {
        const auto score = rouge_n({}, refs({"a b"}), 1);
        REQUIRE(score.recall == 0.0);
        REQUIRE(score.precision == 0.0);
        REQUIRE(score.f == 0.0);
    }

    SECTION("empty references are skipped") {
        const auto score = rouge_n(toks("a b"), refs({"", "a b"}), 1);
        REQUIRE(score.recall == 1.0);
        REQUIRE(score.precision == 1.0);
    }

    SECTION("all references empty is an evaluation failure") {
        REQUIRE_THROWS_AS(rouge_n(toks("a b"), refs({"", ""}), 1), EvaluationError);
    }

    SECTION("no references is a usage error") {
        REQUIRE_THROWS_AS(rouge_n(toks("a b"), {}, 1), UsageError);
        REQUIRE_THROWS_AS(rouge_su(toks("a b"), {}), UsageError);
    }
}

TEST_CASE("candidates are truncated, references are not", "[rouge]") {
    RougeConfig config;
    config.length_truncation = 2;
    // Truncated candidate {a, b}; reference {a, c}. Precision denominator
    // must be 2, not 3.
    const auto score = rouge_n(toks("a b c"), refs({"a c"}), 1, config);
    REQUIRE(score.recall == 0.5);
    REQUIRE(score.precision == 0.5);

    // The same cut applies before skip-gram expansion.
    const auto su = rouge_su(toks("a b c"), refs({"a b"}), config);
    REQUIRE(su.recall == 1.0);
    REQUIRE(su.precision == 1.0);
}

TEST_CASE("stemming folds inflected forms before matching", "[rouge]") {
    const auto stemmed =
        rouge_n(toks("the cats were running"), refs({"the cat was run"}), 1);
    REQUIRE(stemmed.recall == 0.75);

    RougeConfig plain;
    plain.stemming = false;
    const auto literal = rouge_n(toks("the cats were running", plain),
                                 refs({"the cat was run"}, plain), 1, plain);
    REQUIRE(literal.recall == 0.25);
}

TEST_CASE("f weighting interpolates between precision and recall", "[rouge]") {
    RougeConfig toward_p;
    toward_p.f_alpha = 1.0;
    const auto p_side = rouge_n(toks("a a a"), refs({"a"}), 1, toward_p);
    REQUIRE_THAT(p_side.f, WithinRel(p_side.precision, 1e-15));

    RougeConfig toward_r;
    toward_r.f_alpha = 0.0;
    const auto r_side = rouge_n(toks("a a a"), refs({"a"}), 1, toward_r);
    REQUIRE(r_side.f == r_side.recall);
}

TEST_CASE("fast scorer matches literal counting on random inputs", "[rouge]") {
    RandomStream rng(0xa0c4e);
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f"};

    const auto random_tokens = [&](std::size_t min_len, std::size_t max_len) {
        std::vector<std::string> tokens;
        const auto len = min_len + rng.next_below(max_len - min_len + 1);
        for (std::uint64_t i = 0; i < len; ++i)
            tokens.push_back(vocab[rng.next_below(vocab.size())]);
        return tokens;
    };

    for (int trial = 0; trial < 200; ++trial) {
        RougeConfig config;
        config.stemming = false;
        config.skip_distance = rng.next_below(6);
        config.include_unigrams = rng.next_below(2) == 0;
        config.length_truncation = 1 + rng.next_below(12);

        // Candidates may be empty; references keep two or more tokens so
        // every gram kind has a non-empty reference pool.
        const auto cand = random_tokens(0, 14);
        std::vector<std::vector<std::string>> references;
        const auto ref_count = 1 + rng.next_below(3);
        for (std::uint64_t r = 0; r < ref_count; ++r)
            references.push_back(random_tokens(2, 10));

        INFO("trial " << trial);
        for (const auto kind : {oracle::RougeKind::r1, oracle::RougeKind::r2,
                                oracle::RougeKind::su}) {
            const auto expected = oracle::rouge(cand, references, kind, config);
            RougeScore got;
            switch (kind) {
                case oracle::RougeKind::r1: got = rouge_n(cand, references, 1, config); break;
                case oracle::RougeKind::r2: got = rouge_n(cand, references, 2, config); break;
                case oracle::RougeKind::su: got = rouge_su(cand, references, config); break;
            }
            REQUIRE(oracle::near(got.recall, expected.recall, 1e-12));
            REQUIRE(oracle::near(got.precision, expected.precision, 1e-12));
            REQUIRE(oracle::near(got.f, expected.f, 1e-12));
        }
    }
}
