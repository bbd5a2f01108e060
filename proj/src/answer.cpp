#include "reflectforge/answer.hpp"

#include "reflectforge/errors.hpp"
#include "reflectforge/jsonl.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace reflectforge {

void Problem::validate() const {
    if (id.empty()) {
        throw ValidationError("problem with empty id");
    }
    if (ground_truth.empty()) {
        throw ValidationError("problem " + id + " has empty ground_truth");
    }
}

std::vector<Problem> read_problems(const std::filesystem::path& path) {
    std::vector<Problem> out;
    std::set<std::string> ids;
    for (const auto& obj : read_jsonl(path)) {
        Problem p;
        if (!obj.contains("id") || !obj.contains("question") || !obj.contains("ground_truth")) {
            throw ValidationError(path.string() + ": problem line needs id, question, ground_truth");
        }
        p.id = obj.at("id").get<std::string>();
        p.question = obj.at("question").get<std::string>();
        p.ground_truth = obj.at("ground_truth").get<std::string>();
        p.source = obj.value("source", std::string("default"));
        p.validate();
        if (!ids.insert(p.id).second) {
            throw ValidationError(path.string() + ": duplicate problem id " + p.id);
        }
        out.push_back(std::move(p));
    }
    return out;
}

CanonicalAnswer extract_answer(std::string_view text, std::string_view boxed_marker) {
    if (text.empty()) {
        throw NoAnswerError("no boxed answer in empty text");
    }
    std::string needle = std::string(boxed_marker) + "{";
    const auto pos = text.rfind(needle);
    if (pos == std::string_view::npos) {
        throw NoAnswerError("no boxed answer construct found");
    }
    const std::size_t start = pos + needle.size();
    int depth = 1;
    std::size_t i = start;
    for (; i < text.size(); ++i) {
        if (text[i] == '{') {
            ++depth;
        } else if (text[i] == '}') {
            if (--depth == 0) break;
        }
    }
    if (depth != 0) {
        throw MalformedAnswerError("unbalanced braces in boxed answer at offset " +
                                   std::to_string(pos));
    }
    CanonicalAnswer a;
    a.raw = std::string(text.substr(start, i - start));
    return a;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool strip_pair(std::string& s, std::string_view open, std::string_view close) {
    if (s.size() >= open.size() + close.size() && s.compare(0, open.size(), open) == 0 &&
        s.compare(s.size() - close.size(), close.size(), close) == 0) {
        s = s.substr(open.size(), s.size() - open.size() - close.size());
        return true;
    }
    return false;
}

std::string strip_math_wrappers(std::string s) {
    for (;;) {
        std::string before = s;
        s = trim(s);
        strip_pair(s, "$$", "$$") || strip_pair(s, "$", "$") || strip_pair(s, "\\(", "\\)") ||
            strip_pair(s, "\\[", "\\]");
        if (s == before) return s;
    }
}

std::string strip_size_commands(const std::string& s) {
    // longest-first so \bigg is not left as a stray g after \big
    static const std::array<std::string_view, 8> commands = {
        "\\displaystyle", "\\Bigg", "\\bigg", "\\Big", "\\big", "\\left", "\\right", "\\!",
    };
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        bool matched = false;
        if (s[i] == '\\') {
            for (auto cmd : commands) {
                if (s.compare(i, cmd.size(), cmd) == 0) {
                    i += cmd.size();
                    matched = true;
                    break;
                }
            }
        }
        if (!matched) {
            out.push_back(s[i]);
            ++i;
        }
    }
    return out;
}

// Removes a comma when it sits between a digit and exactly three digits
// (standard thousands grouping); "1,2" style tuples survive.
std::string strip_thousands(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == ',' && i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1]))) {
            std::size_t digits = 0;
            while (i + 1 + digits < s.size() &&
                   std::isdigit(static_cast<unsigned char>(s[i + 1 + digits]))) {
                ++digits;
            }
            if (digits == 3) {
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

// Balanced-brace group starting at s[i] == '{'; returns content and advances
// i past the closing brace, or returns nullopt on imbalance.
std::optional<std::string> read_group(const std::string& s, std::size_t& i) {
    if (i >= s.size() || s[i] != '{') return std::nullopt;
    int depth = 1;
    std::size_t start = ++i;
    for (; i < s.size(); ++i) {
        if (s[i] == '{') ++depth;
        if (s[i] == '}' && --depth == 0) {
            auto content = s.substr(start, i - start);
            ++i;
            return content;
        }
    }
    return std::nullopt;
}

std::string rewrite_fracs(const std::string& s) {
    static const std::array<std::string_view, 2> frac_cmds = {"\\dfrac", "\\frac"};
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        bool rewritten = false;
        if (s[i] == '\\') {
            for (auto cmd : frac_cmds) {
                if (s.compare(i, cmd.size(), cmd) != 0) continue;
                std::size_t j = i + cmd.size();
                auto a = read_group(s, j);
                if (!a) break;
                auto b = read_group(s, j);
                if (!b) break;
                out += rewrite_fracs(*a);
                out += '/';
                out += rewrite_fracs(*b);
                i = j;
                rewritten = true;
                break;
            }
        }
        if (!rewritten) {
            out.push_back(s[i]);
            ++i;
        }
    }
    return out;
}

std::string collapse_whitespace(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) {
            out.push_back(' ');
        }
        in_space = false;
        out.push_back(c);
    }
    return out;
}

}  // namespace

CanonicalAnswer normalize(std::string_view raw) {
    CanonicalAnswer out;
    out.raw = std::string(raw);
    std::string s = strip_math_wrappers(std::string(raw));
    s = strip_size_commands(s);
    s = strip_thousands(s);
    s = rewrite_fracs(s);
    s = collapse_whitespace(s);
    out.normalized = s;
    out.numeric = Rational::parse(s);
    return out;
}

bool answers_equivalent(const CanonicalAnswer& a, const CanonicalAnswer& b) {
    if (a.numeric && b.numeric) {
        return *a.numeric == *b.numeric;
    }
    if (!a.numeric && !b.numeric) {
        return a.normalized == b.normalized;
    }
    return false;
}

AnswerCheck check_answer(std::string_view text, const Problem& problem,
                         std::string_view boxed_marker) {
    problem.validate();
    CanonicalAnswer candidate;
    try {
        candidate = extract_answer(text, boxed_marker);
    } catch (const ValidationError&) {
        return {false, true};
    }
    const auto lhs = normalize(candidate.raw);
    const auto rhs = normalize(problem.ground_truth);
    return {answers_equivalent(lhs, rhs), false};
}

bool judge_correct(std::string_view text, const Problem& problem, std::string_view boxed_marker) {
    return check_answer(text, problem, boxed_marker).correct;
}

}  // namespace reflectforge
