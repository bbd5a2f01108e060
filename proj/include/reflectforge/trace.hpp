#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace reflectforge {

struct MarkerPair {
    std::string open = "<think>";
    std::string close = "</think>";
    void validate() const;
};

struct ReflectionEvent {
    std::size_t offset = 0;  // character index into raw_text
    std::string keyword;     // the lexicon entry that matched
    std::string window;      // surrounding context snippet
};

struct ReflectionLexicon {
    enum class MatchRule {
        word_boundary,
        substring,
        // word-boundary for single words, substring for multi-word phrases
        automatic,
    };

    std::vector<std::string> entries;
    bool case_insensitive = true;
    MatchRule match_rule = MatchRule::automatic;

    void validate() const;  // non-empty, no duplicates after case folding
    static ReflectionLexicon defaults();
};

/// Stable identifier for the active lexicon; recorded in every report so ERR
/// numbers can be traced back to the keyword set that produced them.
std::string lexicon_hash(const ReflectionLexicon& lexicon);

struct Trace {
    std::string problem_id;
    std::string raw_text;
    std::optional<std::string> think_segment;
    std::string summary_segment;
    std::vector<ReflectionEvent> reflections;
    std::optional<std::string> extracted_answer;
    std::optional<bool> is_correct;
    std::optional<long long> token_count;
    bool reflections_detected = false;
};

/// Splits raw model output into think/summary segments. Multiple or nested
/// markers resolve to first-open/last-close. A close marker with an open
/// marker only after it is a malformed trace.
Trace parse_trace(std::string problem_id, std::string raw_text, const MarkerPair& delimiters = {});

/// Fills trace.reflections with every keyword occurrence, ordered by offset.
/// Distinct entries may overlap; occurrences of the same entry are counted
/// non-overlapping left to right.
Trace detect_reflections(Trace trace, const ReflectionLexicon& lexicon, std::size_t window_radius = 80);

std::size_t reflection_count(const Trace& trace);

struct TraceInput {
    std::string problem_id;
    std::string raw_text;
    std::optional<long long> token_count;
};

/// JSONL with fields {problem_id, raw_text, token_count?}.
std::vector<TraceInput> read_trace_inputs(const std::filesystem::path& path);

}  // namespace reflectforge
