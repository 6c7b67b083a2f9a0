#include "anvaya/corpus.hpp"
#include "anvaya/error.hpp"
#include "anvaya/iast.hpp"

#include "testkit.hpp"

#include <doctest.h>

#include <sstream>

using namespace anvaya;

TEST_CASE("golden fixture corpus loads with annotations") {
    auto records = load_corpus(testkit::fixture("golden.jsonl"), CorpusFormat::jsonl);
    REQUIRE(records.size() == 6);
    for (const auto& r : records) {
        CHECK(r.annotation);
        CHECK(r.prose);
    }
    // apostrophe normalized on load
    CHECK(records[4].verse.find("nāgoʼtha") != std::string::npos);
}

TEST_CASE("jsonl errors carry line numbers") {
    std::istringstream bad_json("{\"id\":\"a\",\"verse\":\"x\",\"source\":\"s\"}\n\nnot json\n");
    try {
        read_corpus(bad_json, CorpusFormat::jsonl);
        FAIL("expected CorpusError");
    } catch (const CorpusError& e) {
        CHECK(e.line() == 3);
    }

    std::istringstream missing("{\"id\":\"a\",\"source\":\"s\"}\n");
    CHECK_THROWS_AS(read_corpus(missing, CorpusFormat::jsonl), CorpusError);

    std::istringstream bad_char("{\"id\":\"a\",\"verse\":\"manyē\",\"source\":\"s\"}\n");
    CHECK_THROWS_WITH_AS(read_corpus(bad_char, CorpusFormat::jsonl), doctest::Contains("line 1"), CorpusError);

    std::istringstream empty_verse("{\"id\":\"a\",\"verse\":\"  \",\"source\":\"s\"}\n");
    CHECK_THROWS_AS(read_corpus(empty_verse, CorpusFormat::jsonl), CorpusError);
}

TEST_CASE("duplicate ids are rejected naming the id") {
    std::istringstream dup("{\"id\":\"v1\",\"verse\":\"a\",\"source\":\"s\"}\n"
                           "{\"id\":\"v1\",\"verse\":\"b\",\"source\":\"s\"}\n");
    CHECK_THROWS_WITH_AS(read_corpus(dup, CorpusFormat::jsonl), doctest::Contains("v1"), CorpusError);
}

TEST_CASE("tsv with and without prose") {
    std::istringstream in("a\trāmaḥ vanam gacchati\trāmaḥ vanam gacchati\nb\tsaḥ gacchati\n\nc\tx\t\n");
    auto r = read_corpus(in, CorpusFormat::tsv);
    REQUIRE(r.size() == 3);
    CHECK(r[0].prose == "rāmaḥ vanam gacchati");
    CHECK_FALSE(r[1].prose);
    CHECK(r[0].source.empty());

    std::istringstream bad("only-one-column\n");
    CHECK_THROWS_AS(read_corpus(bad, CorpusFormat::tsv), CorpusError);
}

TEST_CASE("jsonl round trip and stats") {
    auto records = load_corpus(testkit::fixture("golden.jsonl"), CorpusFormat::jsonl);
    std::stringstream buf;
    write_jsonl(buf, records);
    CHECK(read_corpus(buf, CorpusFormat::jsonl) == records);

    auto st = corpus_stats(records);
    CHECK(st.records == 6);
    CHECK(st.annotated == 6);
    CHECK(st.with_prose == 6);
    CHECK(st.per_source.at("mahabharata") == 6);
    double verse_tokens = 0;
    for (const auto& r : records) verse_tokens += static_cast<double>(split_whitespace(r.verse).size());
    CHECK(st.mean_verse_tokens == doctest::Approx(verse_tokens / 6));
    CHECK(parse_corpus_format("tsv") == CorpusFormat::tsv);
    CHECK_FALSE(parse_corpus_format("csv"));
}
