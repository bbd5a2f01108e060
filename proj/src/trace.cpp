#include "reflectforge/trace.hpp"

#include "reflectforge/errors.hpp"
#include "reflectforge/jsonl.hpp"
#include "reflectforge/util.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace reflectforge {

void MarkerPair::validate() const {
    if (open.empty() || close.empty()) {
        throw ValidationError("think delimiters must be non-empty");
    }
    if (open == close) {
        throw ValidationError("think delimiters must be distinct");
    }
}

void ReflectionLexicon::validate() const {
    if (entries.empty()) {
        throw ValidationError("reflection lexicon is empty");
    }
    std::set<std::string> seen;
    for (const auto& e : entries) {
        if (e.empty()) {
            throw ValidationError("reflection lexicon contains an empty entry");
        }
        auto folded = case_insensitive ? to_lower_ascii(e) : e;
        if (!seen.insert(folded).second) {
            throw ValidationError("duplicate lexicon entry after case folding: " + e);
        }
    }
}

ReflectionLexicon ReflectionLexicon::defaults() {
    ReflectionLexicon lex;
    lex.entries = {"wait",         "let me double check", "hold on", "let me verify",
                   "let me check", "recheck",             "double-check"};
    lex.case_insensitive = true;
    lex.match_rule = MatchRule::automatic;
    return lex;
}

std::string lexicon_hash(const ReflectionLexicon& lexicon) {
    std::string canon;
    for (const auto& e : lexicon.entries) {
        canon += e;
        canon += '\x1f';
    }
    canon += lexicon.case_insensitive ? "ci" : "cs";
    canon += '\x1f';
    switch (lexicon.match_rule) {
        case ReflectionLexicon::MatchRule::word_boundary: canon += "wb"; break;
        case ReflectionLexicon::MatchRule::substring: canon += "sub"; break;
        case ReflectionLexicon::MatchRule::automatic: canon += "auto"; break;
    }
    return sha256_hex(canon).substr(0, 16);
}

Trace parse_trace(std::string problem_id, std::string raw_text, const MarkerPair& delimiters) {
    delimiters.validate();
    Trace t;
    t.problem_id = std::move(problem_id);
    t.raw_text = std::move(raw_text);

    const auto& raw = t.raw_text;
    const auto open_pos = raw.find(delimiters.open);
    if (open_pos == std::string::npos) {
        // Forced-open style traces may carry only a close marker; everything
        // after it is the summary, and there is no recoverable think segment.
        const auto close_pos = raw.find(delimiters.close);
        t.summary_segment =
            close_pos == std::string::npos ? raw : raw.substr(close_pos + delimiters.close.size());
        return t;
    }

    const auto close_pos = raw.rfind(delimiters.close);
    if (close_pos == std::string::npos) {
        t.summary_segment = raw;
        return t;
    }
    if (close_pos < open_pos) {
        throw MalformedTraceError(close_pos, open_pos,
                                  "close delimiter at offset " + std::to_string(close_pos) +
                                      " precedes open delimiter at offset " + std::to_string(open_pos));
    }
    const auto think_begin = open_pos + delimiters.open.size();
    t.think_segment = raw.substr(think_begin, close_pos - think_begin);
    t.summary_segment = raw.substr(close_pos + delimiters.close.size());
    return t;
}

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool boundary_ok(const std::string& text, std::size_t pos, std::size_t len) {
    const bool left = pos == 0 || !is_word_char(text[pos - 1]);
    const bool right = pos + len == text.size() || !is_word_char(text[pos + len]);
    return left && right;
}

bool entry_uses_boundary(const std::string& entry, ReflectionLexicon::MatchRule rule) {
    switch (rule) {
        case ReflectionLexicon::MatchRule::word_boundary: return true;
        case ReflectionLexicon::MatchRule::substring: return false;
        case ReflectionLexicon::MatchRule::automatic:
            return entry.find_first_of(" \t") == std::string::npos;
    }
    return true;
}

}  // namespace

Trace detect_reflections(Trace trace, const ReflectionLexicon& lexicon, std::size_t window_radius) {
    lexicon.validate();

    const std::string haystack =
        lexicon.case_insensitive ? to_lower_ascii(trace.raw_text) : trace.raw_text;

    struct Hit {
        std::size_t offset;
        std::size_t entry_index;
        std::size_t length;
    };
    std::vector<Hit> hits;

    for (std::size_t e = 0; e < lexicon.entries.size(); ++e) {
        const auto& entry = lexicon.entries[e];
        const std::string needle = lexicon.case_insensitive ? to_lower_ascii(entry) : entry;
        const bool boundary = entry_uses_boundary(entry, lexicon.match_rule);
        std::size_t pos = 0;
        while (pos < haystack.size()) {
            const auto at = haystack.find(needle, pos);
            if (at == std::string::npos) break;
            if (!boundary || boundary_ok(haystack, at, needle.size())) {
                hits.push_back({at, e, needle.size()});
                pos = at + needle.size();
            } else {
                pos = at + 1;
            }
        }
    }

    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        return a.offset != b.offset ? a.offset < b.offset : a.entry_index < b.entry_index;
    });

    trace.reflections.clear();
    trace.reflections.reserve(hits.size());
    for (const auto& h : hits) {
        ReflectionEvent ev;
        ev.offset = h.offset;
        ev.keyword = lexicon.entries[h.entry_index];
        const std::size_t start = h.offset >= window_radius ? h.offset - window_radius : 0;
        const std::size_t end = std::min(trace.raw_text.size(), h.offset + h.length + window_radius);
        ev.window = trace.raw_text.substr(start, end - start);
        trace.reflections.push_back(std::move(ev));
    }
    trace.reflections_detected = true;
    return trace;
}

std::size_t reflection_count(const Trace& trace) {
    if (!trace.reflections_detected) {
        throw ValidationError("reflection_count called before detect_reflections on problem " +
                              trace.problem_id);
    }
    return trace.reflections.size();
}

std::vector<TraceInput> read_trace_inputs(const std::filesystem::path& path) {
    std::vector<TraceInput> out;
    for (const auto& obj : read_jsonl(path)) {
        TraceInput in;
        if (!obj.contains("problem_id") || !obj.contains("raw_text")) {
            throw ValidationError(path.string() + ": trace line needs problem_id and raw_text");
        }
        in.problem_id = obj.at("problem_id").get<std::string>();
        in.raw_text = obj.at("raw_text").get<std::string>();
        if (obj.contains("token_count") && !obj.at("token_count").is_null()) {
            in.token_count = obj.at("token_count").get<long long>();
            if (*in.token_count < 0) {
                throw ValidationError(path.string() + ": negative token_count for " + in.problem_id);
            }
        }
        out.push_back(std::move(in));
    }
    return out;
}

}  // namespace reflectforge
