#include "anvaya/corpus.hpp"
#include "anvaya/error.hpp"
#include "anvaya/iast.hpp"
#include "anvaya/linearizer.hpp"

#include "testkit.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace anvaya;

namespace {

AnnotatedSentence one_clause(std::vector<AnnotatedToken> tokens) {
    AnnotatedSentence s;
    s.clauses = {{"M", ClauseKind::main, std::nullopt}};
    s.tokens = std::move(tokens);
    return s;
}

AnnotatedToken tok(std::size_t i, std::string surface, Role role, std::optional<std::size_t> head,
                   bool main_verb = false, std::string clause = "M") {
    return {i, std::move(surface), role, head, std::move(clause), {false, main_verb}};
}

}  // namespace

TEST_CASE("golden fixtures reproduce the gold prose") {
    for (const auto& r : load_corpus(testkit::fixture("golden.jsonl"), CorpusFormat::jsonl)) {
        CAPTURE(r.id);
        CHECK(linearize(*r.annotation) == collapse_whitespace(*r.prose));
    }
}

TEST_CASE("kāraka order follows the profile") {
    // gacchati vane rāmaḥ bāṇena vanam
    auto s = one_clause({tok(0, "gacchati", Role::finite_verb, std::nullopt, true),
                         tok(1, "vane", Role::adhikarana, 0), tok(2, "rāmaḥ", Role::kartr, 0),
                         tok(3, "bāṇena", Role::karana, 0), tok(4, "vanam", Role::karman, 0),
                         tok(5, "he", Role::sambodhya, 0)});
    CHECK(linearize(s) == "he rāmaḥ vane bāṇena vanam gacchati");

    RuleProfile p;
    p.karaka_order = {Role::karman, Role::karana, Role::sampradana, Role::apadana, Role::adhikarana};
    CHECK(linearize(s, p) == "he rāmaḥ vanam bāṇena vane gacchati");
}

TEST_CASE("non-finite placement options") {
    // rāmaḥ phalam dṛṣṭvā vanam gacchati; dṛṣṭvā governs phalam
    auto s = one_clause({tok(0, "gacchati", Role::finite_verb, std::nullopt, true),
                         tok(1, "vanam", Role::karman, 0), tok(2, "dṛṣṭvā", Role::nonfinite_verb, 0),
                         tok(3, "phalam", Role::karman, 2), tok(4, "rāmaḥ", Role::kartr, 0),
                         tok(5, "vane", Role::adhikarana, 0)});
    CHECK(linearize(s) == "rāmaḥ vane phalam dṛṣṭvā vanam gacchati");
    RuleProfile p;
    p.nonfinite_placement = NonfinitePlacement::after_karakas;
    CHECK(linearize(s, p) == "rāmaḥ vane vanam phalam dṛṣṭvā gacchati");
}

TEST_CASE("modifiers chunk with their head; negation sits next to it") {
    auto s = one_clause({tok(0, "na", Role::negation, 3), tok(1, "gacchati", Role::finite_verb, std::nullopt, true),
                         tok(2, "śīghram", Role::adverb, 1), tok(3, "vadati", Role::finite_verb, 1),
                         tok(4, "rāmasya", Role::genitive_modifier, 5), tok(5, "putraḥ", Role::kartr, 1),
                         tok(6, "vīraḥ", Role::adjective, 5)});
    auto chunks = build_chunks(s, RuleProfile{});
    const auto& m = chunks.at("M");
    auto it = std::find_if(m.begin(), m.end(), [](const Chunk& c) { return c.head == 5; });
    REQUIRE(it != m.end());
    CHECK(it->members == std::vector<std::size_t>{4, 6, 5});
    CHECK(linearize(s) == "rāmasya vīraḥ putraḥ na vadati śīghram gacchati");

    RuleProfile before;
    before.appositive_placement = AppositivePlacement::before_head;
    auto ap = one_clause({tok(0, "gacchati", Role::finite_verb, std::nullopt, true),
                          tok(1, "rāmaḥ", Role::kartr, 0), tok(2, "rājā", Role::appositive_of_kartr, 1)});
    CHECK(linearize(ap) == "rāmaḥ rājā gacchati");
    CHECK(linearize(ap, before) == "rājā rāmaḥ gacchati");
}

TEST_CASE("particles follow their head in source order") {
    auto s = one_clause({tok(0, "ca", Role::particle, 3), tok(1, "gacchati", Role::finite_verb, std::nullopt, true),
                         tok(2, "eva", Role::particle, 3), tok(3, "rāmaḥ", Role::kartr, 1),
                         tok(4, "hi", Role::particle, 0)});
    CHECK(linearize(s) == "rāmaḥ ca hi eva gacchati");

    std::vector<std::size_t> wrong{1, 1, 3};
    CHECK_THROWS_AS(place_particles(wrong, s), LinearizeError);
}

TEST_CASE("clause order: ranks, otherwise main last") {
    AnnotatedSentence s;
    s.clauses = {{"M", ClauseKind::main, std::nullopt}, {"R", ClauseKind::relative, std::nullopt}};
    s.tokens = {tok(0, "gacchati", Role::finite_verb, std::nullopt, true, "M"),
                tok(1, "yaḥ", Role::kartr, 2, false, "R"), tok(2, "vadati", Role::finite_verb, 0, false, "R"),
                tok(3, "saḥ", Role::kartr, 0, false, "M")};
    CHECK(order_clauses(s) == std::vector<std::string>{"R", "M"});
    CHECK(linearize(s) == "yaḥ vadati saḥ gacchati");

    RuleProfile off;
    off.enabled_rules.erase(OrderingRule::clause);
    CHECK(order_clauses(s, off) == std::vector<std::string>{"M", "R"});

    s.clauses[0].order_rank = 0;
    s.clauses[1].order_rank = 1;
    CHECK(order_clauses(s) == std::vector<std::string>{"M", "R"});
}

TEST_CASE("disabled rules keep the source arrangement for their aspect") {
    auto s = one_clause({tok(0, "gacchati", Role::finite_verb, std::nullopt, true),
                         tok(1, "vanam", Role::karman, 0), tok(2, "ca", Role::particle, 3),
                         tok(3, "rāmaḥ", Role::kartr, 0)});
    RuleProfile p;
    p.enabled_rules = {};
    CHECK(linearize(s, p) == "gacchati vanam ca rāmaḥ");
    // a particle left in place trails its source-order left neighbour
    p.enabled_rules = {OrderingRule::intra_order};
    CHECK(linearize(s, p) == "rāmaḥ vanam ca gacchati");
}

TEST_CASE("invalid input is rejected") {
    AnnotatedSentence s;
    s.clauses = {{"M", ClauseKind::main, std::nullopt}, {"R", ClauseKind::relative, std::nullopt}};
    s.tokens = {tok(0, "gacchati", Role::finite_verb, std::nullopt, true, "M"),
                tok(1, "mahān", Role::adjective, 2, false, "M"), tok(2, "rāmaḥ", Role::kartr, 0, false, "R")};
    CHECK_THROWS_AS(linearize(s), LinearizeError);

    s.tokens[2].clause = "M";
    s.tokens[1].head = 1;
    CHECK_THROWS_AS(linearize(s), AnnotationError);
}

TEST_CASE("profile json round trip and hash") {
    RuleProfile p;
    p.nonfinite_placement = NonfinitePlacement::after_karakas;
    p.enabled_rules.erase(OrderingRule::particle);
    auto q = RuleProfile::from_json(p.to_json());
    CHECK(q == p);
    CHECK(q.hash() == p.hash());
    CHECK(p.hash() != RuleProfile{}.hash());
    CHECK(p.hash().size() == 64);

    auto bad = p.to_json();
    bad["karaka_order"] = {"karman", "karman", "karana", "sampradana", "apadana"};
    CHECK_THROWS(RuleProfile::from_json(bad));
}

TEST_CASE("property: random sentences satisfy the output invariants") {
    std::mt19937 rng(20240517);
    for (int iter = 0; iter < 1500; ++iter) {
        const auto s = testkit::random_sentence(rng);
        CAPTURE(nlohmann::json(s).dump());
        CHECK(testkit::linearizer_violations(s, RuleProfile{}).empty());
    }
}

TEST_CASE("property: invariants hold under alternative profiles") {
    std::mt19937 rng(99);
    RuleProfile p;
    p.nonfinite_placement = NonfinitePlacement::after_karakas;
    p.appositive_placement = AppositivePlacement::before_head;
    p.karaka_order = {Role::karman, Role::apadana, Role::karana, Role::adhikarana, Role::sampradana};
    for (int iter = 0; iter < 500; ++iter) {
        const auto s = testkit::random_sentence(rng);
        CAPTURE(nlohmann::json(s).dump());
        CHECK(testkit::linearizer_violations(s, p).empty());
    }
}
