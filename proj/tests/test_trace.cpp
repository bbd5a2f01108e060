#include "reflectforge/trace.hpp"

#include "reflectforge/errors.hpp"
#include "reflectforge/util.hpp"

#include <doctest.h>

#include <random>

using namespace reflectforge;

TEST_CASE("parse_trace splits think and summary") {
    const auto t = parse_trace("p1", "<think>reason…</think>Answer: \\boxed{16}");
    REQUIRE(t.think_segment.has_value());
    CHECK(*t.think_segment == "reason…");
    CHECK(t.summary_segment == "Answer: \\boxed{16}");
    CHECK(t.reflections.empty());
}

TEST_CASE("parse_trace without tags keeps the whole text as summary") {
    const auto t = parse_trace("p1", "plain text, no tags");
    CHECK_FALSE(t.think_segment.has_value());
    CHECK(t.summary_segment == "plain text, no tags");
}

TEST_CASE("parse_trace rejects inverted delimiters with both offsets") {
    try {
        parse_trace("p1", "</think>x<think>");
        FAIL("expected malformed-trace error");
    } catch (const MalformedTraceError& e) {
        CHECK(e.close_offset == 0);
        CHECK(e.open_offset == 9);
    }
}

TEST_CASE("parse_trace takes first open and last close") {
    const auto t = parse_trace("p1", "<think>a</think>b<think>c</think>d");
    REQUIRE(t.think_segment.has_value());
    CHECK(*t.think_segment == "a</think>b<think>c");
    CHECK(t.summary_segment == "d");
}

TEST_CASE("parse_trace with unclosed open leaves think absent") {
    const auto t = parse_trace("p1", "<think>never closed");
    CHECK_FALSE(t.think_segment.has_value());
    CHECK(t.summary_segment == "<think>never closed");
}

TEST_CASE("parse_trace with close only takes the tail as summary") {
    const auto t = parse_trace("p1", "forced open thinking</think>summary");
    CHECK_FALSE(t.think_segment.has_value());
    CHECK(t.summary_segment == "summary");
}

TEST_CASE("parse_trace validates delimiters") {
    CHECK_THROWS_AS(parse_trace("p", "x", MarkerPair{"", "</think>"}), ValidationError);
    CHECK_THROWS_AS(parse_trace("p", "x", MarkerPair{"<t>", "<t>"}), ValidationError);
}

TEST_CASE("detect_reflections counts keyword occurrences") {
    ReflectionLexicon lex;
    lex.entries = {"wait", "hold on"};
    auto t = detect_reflections(parse_trace("p1", "Wait, hold on. Wait again."), lex);
    REQUIRE(t.reflections.size() == 3);
    CHECK(t.reflections[0].offset == 0);
    CHECK(t.reflections[0].keyword == "wait");
    CHECK(t.reflections[1].offset == 6);
    CHECK(t.reflections[1].keyword == "hold on");
    CHECK(t.reflections[2].offset == 15);
    CHECK(reflection_count(t) == 3);
}

TEST_CASE("detect_reflections on empty text") {
    const auto t = detect_reflections(parse_trace("p1", ""), ReflectionLexicon::defaults());
    CHECK(reflection_count(t) == 0);
}

TEST_CASE("default lexicon on the double-check case text") {
    const auto t = detect_reflections(parse_trace("p1", "Wait, hold on, let me compute"),
                                      ReflectionLexicon::defaults());
    REQUIRE(t.reflections.size() == 2);
    CHECK(t.reflections[0].keyword == "wait");
    CHECK(t.reflections[1].keyword == "hold on");
}

TEST_CASE("single words respect word boundaries") {
    const auto lex = ReflectionLexicon::defaults();
    CHECK(reflection_count(detect_reflections(parse_trace("p", "await the result"), lex)) == 0);
    CHECK(reflection_count(detect_reflections(parse_trace("p", "waits"), lex)) == 0);
    CHECK(reflection_count(detect_reflections(parse_trace("p", "wait."), lex)) == 1);
    CHECK(reflection_count(detect_reflections(parse_trace("p", "rechecking now"), lex)) == 0);
    CHECK(reflection_count(detect_reflections(parse_trace("p", "recheck now"), lex)) == 1);
    CHECK(reflection_count(detect_reflections(parse_trace("p", "double-check it"), lex)) == 1);
}

TEST_CASE("multi-word phrases match as substrings") {
    const auto lex = ReflectionLexicon::defaults();
    const auto t = detect_reflections(parse_trace("p", "so let me double check now"), lex);
    REQUIRE(t.reflections.size() == 1);
    CHECK(t.reflections[0].keyword == "let me double check");
}

TEST_CASE("same-entry overlaps count non-overlapping left to right") {
    ReflectionLexicon lex;
    lex.entries = {"a a"};
    const auto t = detect_reflections(parse_trace("p", "a a a"), lex);
    CHECK(t.reflections.size() == 1);
    CHECK(t.reflections[0].offset == 0);
}

TEST_CASE("reflection_count before detection is a usage error") {
    const auto t = parse_trace("p1", "Wait");
    CHECK_THROWS_AS(reflection_count(t), ValidationError);
}

TEST_CASE("batch counts for a two-trace corpus") {
    ReflectionLexicon lex;
    lex.entries = {"wait", "hold on"};
    const auto a = detect_reflections(parse_trace("a", "Wait, hold on. Wait again."), lex);
    const auto b = detect_reflections(parse_trace("b", "wait... hold on"), lex);
    CHECK(reflection_count(a) == 3);
    CHECK(reflection_count(b) == 2);
}

TEST_CASE("lexicon validation") {
    ReflectionLexicon empty;
    CHECK_THROWS_AS(empty.validate(), ValidationError);
    ReflectionLexicon dup;
    dup.entries = {"Wait", "wait"};
    CHECK_THROWS_AS(dup.validate(), ValidationError);
    ReflectionLexicon dup_cs = dup;
    dup_cs.case_insensitive = false;
    CHECK_NOTHROW(dup_cs.validate());
}

TEST_CASE("lexicon hash tracks entries and flags") {
    const auto base = ReflectionLexicon::defaults();
    auto other = base;
    other.entries.push_back("hmm");
    CHECK(lexicon_hash(base) != lexicon_hash(other));
    auto cs = base;
    cs.case_insensitive = false;
    CHECK(lexicon_hash(base) != lexicon_hash(cs));
    CHECK(lexicon_hash(base) == lexicon_hash(ReflectionLexicon::defaults()));
}

namespace {

std::string random_text(std::mt19937_64& rng) {
    static const std::vector<std::string> words = {"wait",  "so",    "hold", "on",      "check",
                                                   "let",   "me",    "the",  "recheck", "answer",
                                                   "hmm,",  "x+1",   "wait,", "verify"};
    std::string out;
    const auto count = rng() % 12;
    for (std::size_t i = 0; i < count; ++i) {
        if (i) out += ' ';
        out += words[rng() % words.size()];
    }
    return out;
}

}  // namespace

TEST_CASE("property: detection is deterministic") {
    const auto lex = ReflectionLexicon::defaults();
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const auto text = random_text(rng);
        const auto a = detect_reflections(parse_trace("p", text), lex);
        const auto b = detect_reflections(parse_trace("p", text), lex);
        REQUIRE(a.reflections.size() == b.reflections.size());
        for (std::size_t j = 0; j < a.reflections.size(); ++j) {
            CHECK(a.reflections[j].offset == b.reflections[j].offset);
            CHECK(a.reflections[j].keyword == b.reflections[j].keyword);
            CHECK(a.reflections[j].window == b.reflections[j].window);
        }
    }
}

TEST_CASE("property: appending text never decreases the count") {
    // the appended chunk starts with a non-word character so it cannot merge
    // into a trailing keyword
    const auto lex = ReflectionLexicon::defaults();
    std::mt19937_64 rng(13);
    for (int i = 0; i < 200; ++i) {
        const auto head = random_text(rng);
        const auto tail = " " + random_text(rng);
        const auto before = reflection_count(detect_reflections(parse_trace("p", head), lex));
        const auto after = reflection_count(detect_reflections(parse_trace("p", head + tail), lex));
        CHECK(after >= before);
    }
}

TEST_CASE("property: offsets round-trip to the matched keyword") {
    const auto lex = ReflectionLexicon::defaults();
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
        const auto text = random_text(rng);
        const auto t = detect_reflections(parse_trace("p", text), lex);
        for (const auto& ev : t.reflections) {
            REQUIRE(ev.offset + ev.keyword.size() <= t.raw_text.size());
            const auto at = t.raw_text.substr(ev.offset, ev.keyword.size());
            CHECK(to_lower_ascii(at) == to_lower_ascii(ev.keyword));
        }
        // strictly increasing offsets under the default lexicon
        for (std::size_t j = 1; j < t.reflections.size(); ++j) {
            CHECK(t.reflections[j - 1].offset < t.reflections[j].offset);
        }
    }
}

TEST_CASE("event windows clamp to the text bounds") {
    ReflectionLexicon lex;
    lex.entries = {"wait"};
    const std::string text = "wait means wait";
    const auto t = detect_reflections(parse_trace("p", text), lex, 4);
    REQUIRE(t.reflections.size() == 2);
    CHECK(t.reflections[0].window == "wait mea");
    CHECK(t.reflections[1].window == "ans wait");
}
