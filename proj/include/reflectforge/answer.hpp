#pragma once

#include "reflectforge/rational.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reflectforge {

struct Problem {
    std::string id;
    std::string question;
    std::string ground_truth;
    std::string source;  // dataset tag, e.g. aime2024
    void validate() const;
};

/// JSONL with fields {id, question, ground_truth, source}; ids must be unique
/// within the file.
std::vector<Problem> read_problems(const std::filesystem::path& path);

inline constexpr std::string_view kDefaultBoxedMarker = "\\boxed";

struct CanonicalAnswer {
    std::string raw;
    std::string normalized;
    std::optional<Rational> numeric;
};

/// Content of the last boxed construct in text, balanced-brace matched so
/// nested braces come through whole. Throws NoAnswerError / MalformedAnswerError.
/// Only the raw field of the result is populated; run normalize() on it.
CanonicalAnswer extract_answer(std::string_view text,
                               std::string_view boxed_marker = kDefaultBoxedMarker);

/// Pipeline: trim, strip math-mode wrappers and size commands, drop thousands
/// separators, rewrite \frac{a}{b} to a/b, collapse whitespace, then attempt
/// an exact rational parse. Idempotent on its own output.
CanonicalAnswer normalize(std::string_view raw);

/// Numeric answers compare as exact rationals; non-numeric answers fall back
/// to byte equality of the normalized strings. Mixed pairs are unequal.
bool answers_equivalent(const CanonicalAnswer& a, const CanonicalAnswer& b);

struct AnswerCheck {
    bool correct = false;
    bool no_answer = false;  // missing or malformed boxed construct
};

AnswerCheck check_answer(std::string_view text, const Problem& problem,
                         std::string_view boxed_marker = kDefaultBoxedMarker);

/// Extraction failure counts as incorrect, never as an error.
bool judge_correct(std::string_view text, const Problem& problem,
                   std::string_view boxed_marker = kDefaultBoxedMarker);

}  // namespace reflectforge
