#include "reflectforge/reward.hpp"

#include "reflectforge/errors.hpp"
#include "reflectforge/util.hpp"

#include <json.hpp>

#include <cmath>

namespace reflectforge {

void RubricDefinition::validate() const {
    if (principles.size() != 5) {
        throw ValidationError("rubric must define exactly five principles, got " +
                              std::to_string(principles.size()));
    }
    for (std::size_t i = 0; i < principles.size(); ++i) {
        const std::string expected = "P" + std::to_string(i + 1);
        if (principles[i].id != expected) {
            throw ValidationError("rubric principle " + std::to_string(i + 1) + " must be " +
                                  expected + ", got " + principles[i].id);
        }
        if (principles[i].name.empty() || principles[i].description.empty()) {
            throw ValidationError("rubric principle " + expected + " needs a name and description");
        }
    }
    if (bands.empty()) {
        throw ValidationError("rubric needs score bands");
    }
    int next = 0;
    for (const auto& band : bands) {
        if (band.lo != next || band.hi < band.lo) {
            throw ValidationError("rubric bands must tile 0-10 without gaps or overlap");
        }
        next = band.hi + 1;
    }
    if (next != 11) {
        throw ValidationError("rubric bands must cover scores 0 through 10");
    }
}

RubricDefinition RubricDefinition::defaults() {
    RubricDefinition r;
    r.principles = {
        {"P1", "Truthfulness (Critical Necessity)",
         "The reflection must objectively judge the correctness of the previous step. It should "
         "not hallucinate errors in correct steps nor blindly validate incorrect ones."},
        {"P2", "Constructiveness (Problem Solving)",
         "The reflection must not only identify an error but also propose a valid correction or a "
         "specific next step. Mere complaints without guidance are penalized."},
        {"P3", "Specificity (Precision)",
         "The critique must pinpoint the exact location or logic of the error (e.g., \"calculation "
         "error in step 2\" vs. \"the answer looks wrong\")."},
        {"P4", "Substantiveness (Depth)",
         "The reflection should involve rigorous verification (e.g., re-deriving a formula or "
         "checking constraints) rather than superficial checks."},
        {"P5", "InfoGain (Efficiency)",
         "The reflection should break repetitive loops or open new reasoning paths that "
         "significantly reduce uncertainty, avoiding redundant restatements."},
    };
    r.bands = {
        {0, 2, "Harmful/Hallucinated - P1 Failed",
         {"The model performs a \"Fake Reflection\".",
          "It claims a correct step is wrong (Hallucination).",
          "It confirms a wrong step is correct (Sycophancy).",
          "Penalty: If P1 is violated, the score must be <= 2, regardless of length."}},
        {3, 5, "Superficial/Ineffective",
         {"The model attempts to reflect but fails to add value.",
          "It says \"Let me check\" and simply repeats the same wrong logic.",
          "It identifies an error but fails to fix it (P2 failed).",
          "The reflection is vague (e.g., \"Something is wrong\") without specificity (P3 "
          "failed)."}},
        {6, 8, "Effective Correction",
         {"The reflection successfully identifies and fixes an error.",
          "The model correctly spots a calculation or logic error (P1, P3).",
          "It proposes a valid correction that steers the trajectory back to the right path "
          "(P2)."}},
        {9, 10, "Profound Insight",
         {"The reflection demonstrates high-level reasoning capabilities.",
          "It uses a different method to verify the answer (Rigorous Verification - P4).",
          "It breaks a logical loop or provides a shortcut that significantly simplifies the "
          "problem (High InfoGain - P5)."}},
    };
    return r;
}

std::string RubricDefinition::render_text() const {
    std::string out;
    out += "Principles:\n";
    for (const auto& p : principles) {
        out += "- " + p.id + ": " + p.name + ". " + p.description + "\n";
    }
    out += "\nScoring Rubric (0-10 Scale):\n";
    for (const auto& band : bands) {
        out += "- Score " + std::to_string(band.lo) + "-" + std::to_string(band.hi) + " (" +
               band.title + "):\n";
        for (const auto& point : band.points) {
            out += "  - " + point + "\n";
        }
    }
    return out;
}

namespace {

std::string elide_middle(const std::string& text, std::size_t budget) {
    static const std::string marker = "\n[... middle of trajectory elided ...]\n";
    if (budget <= marker.size() + 2) {
        return text.substr(0, budget);
    }
    const std::size_t keep = budget - marker.size();
    const std::size_t head = keep / 2;
    const std::size_t tail = keep - head;
    return text.substr(0, head) + marker + text.substr(text.size() - tail);
}

}  // namespace

namespace {

std::string render_judge_prompt(const std::string& question, const std::string& trajectory,
                                const RubricDefinition& rubric) {
    std::string prompt;
    prompt += "You are an expert Mathematics and Logic Evaluator.\n";
    prompt +=
        "Your task is to assess the quality of the **Self-Reflection/Critique** mechanisms within "
        "a model's reasoning trajectory.\n\n";
    prompt += "Input Data:\n";
    prompt += "- Question: " + question + "\n";
    prompt += "- Model Trajectory: " + trajectory + "\n\n";
    prompt += "Evaluation Process:\n";
    prompt +=
        "1. Locate Reflection: Scan the trajectory for moments where the model pauses to verify, "
        "critique, or correct itself (e.g., keywords like \"Wait\", \"Let me double check\", "
        "\"Hold on\", or specific tags).\n";
    prompt +=
        "2. Verify Logic: Independently verify the math/logic at the point of reflection. "
        "Determine if the model's previous step was actually correct or incorrect.\n";
    prompt += "3. Apply Principles: Evaluate the reflection using the 5 Principles (P1-P5).\n\n";
    prompt += rubric.render_text();
    prompt += "\nOutput Format:\n";
    prompt += "Return a JSON object with the analysis and final score.\n";
    prompt += "{\n";
    prompt += "  \"reflection_moments\": [\"...\"],\n";
    prompt += "  \"analysis\": \"...\",\n";
    prompt += "  \"score\": 8\n";
    prompt += "}\n";
    return prompt;
}

}  // namespace

JudgePromptResult build_judge_prompt(const std::string& question, const std::string& trajectory,
                                     const RubricDefinition& rubric,
                                     std::size_t trajectory_budget) {
    rubric.validate();

    const bool truncated = trajectory.size() > trajectory_budget;
    const std::string body = truncated ? elide_middle(trajectory, trajectory_budget) : trajectory;

    JudgePromptResult result;
    result.prompt.text = render_judge_prompt(question, body, rubric);
    // version over the empty-slot template: rubric wording changes it,
    // per-call question/trajectory must not
    result.prompt.version = "judge-" + sha256_hex(render_judge_prompt("", "", rubric)).substr(0, 12);
    result.truncated = truncated;
    return result;
}

const std::vector<std::string>& default_p1_phrases() {
    static const std::vector<std::string> phrases = {"hallucination", "sycophancy",
                                                     "fake reflection"};
    return phrases;
}

namespace {

// first balanced top-level {...} outside string literals
std::optional<std::string> first_json_object(const std::string& raw) {
    std::size_t search = 0;
    while (search < raw.size()) {
        const auto open = raw.find('{', search);
        if (open == std::string::npos) return std::nullopt;
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = open; i < raw.size(); ++i) {
            const char c = raw[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    return raw.substr(open, i - open + 1);
                }
            }
        }
        search = open + 1;
    }
    return std::nullopt;
}

}  // namespace

JudgeVerdict parse_verdict(const std::string& raw, const std::vector<std::string>& p1_phrases) {
    if (raw.empty()) {
        throw VerdictParseError("empty judge output");
    }
    const auto object_text = first_json_object(raw);
    if (!object_text) {
        throw VerdictParseError("no JSON object in judge output");
    }
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(*object_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw VerdictParseError(std::string("judge output object does not parse: ") + e.what());
    }
    if (!obj.contains("reflection_moments") || !obj["reflection_moments"].is_array()) {
        throw VerdictParseError("verdict is missing reflection_moments list");
    }
    if (!obj.contains("analysis") || !obj["analysis"].is_string()) {
        throw VerdictParseError("verdict is missing analysis string");
    }
    if (!obj.contains("score") || !obj["score"].is_number_integer()) {
        throw VerdictParseError("verdict is missing an integer score");
    }

    JudgeVerdict v;
    v.raw = raw;
    for (const auto& moment : obj["reflection_moments"]) {
        if (!moment.is_string()) {
            throw VerdictParseError("reflection_moments must contain strings");
        }
        v.reflection_moments.push_back(moment.get<std::string>());
    }
    v.analysis = obj["analysis"].get<std::string>();
    const long long score = obj["score"].get<long long>();
    if (score < 0 || score > 10) {
        throw ValidationError("verdict score " + std::to_string(score) + " outside [0,10]");
    }
    v.score = static_cast<int>(score);

    const auto folded = to_lower_ascii(v.analysis);
    for (const auto& phrase : p1_phrases) {
        if (folded.find(to_lower_ascii(phrase)) != std::string::npos) {
            v.matched_phrases.push_back(phrase);
        }
    }
    if (!v.matched_phrases.empty() && v.score > 2) {
        v.score = 2;
        v.clamped = true;
    }
    v.p1_violation = !v.matched_phrases.empty() || v.score <= 2;
    return v;
}

std::string render_verdict(const JudgeVerdict& verdict) {
    nlohmann::ordered_json obj;
    obj["reflection_moments"] = verdict.reflection_moments;
    obj["analysis"] = verdict.analysis;
    obj["score"] = verdict.score;
    return obj.dump();
}

RewardRecord combine_rewards(int outcome, const JudgeVerdict& verdict, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) {
        throw ConfigError("alpha must be in [0,1], got " + std::to_string(alpha));
    }
    if (outcome != 0 && outcome != 1) {
        throw DomainError("outcome reward must be 0 or 1");
    }
    RewardRecord r;
    r.outcome = outcome;
    r.reflection = verdict.score / 10.0;
    r.combined = alpha * outcome + (1.0 - alpha) * r.reflection;
    return r;
}

std::vector<RewardRecord> group_advantages(std::vector<RewardRecord> records, int group_size,
                                           double epsilon) {
    if (group_size < 1) {
        throw DomainError("group_size must be >= 1");
    }
    if (records.size() % static_cast<std::size_t>(group_size) != 0) {
        const auto& tail = records.back();
        throw DomainError("records for problem " + tail.problem_id +
                          " do not fill a group of " + std::to_string(group_size));
    }
    for (std::size_t start = 0; start < records.size();
         start += static_cast<std::size_t>(group_size)) {
        const auto& group_problem = records[start].problem_id;
        double mean = 0.0;
        for (int i = 0; i < group_size; ++i) {
            const auto& r = records[start + i];
            if (r.problem_id != group_problem) {
                throw DomainError("group starting at problem " + group_problem +
                                  " mixes in problem " + r.problem_id);
            }
            mean += r.combined;
        }
        mean /= group_size;
        double variance = 0.0;
        for (int i = 0; i < group_size; ++i) {
            const double d = records[start + i].combined - mean;
            variance += d * d;
        }
        variance /= group_size;
        const double stddev = std::sqrt(variance);
        for (int i = 0; i < group_size; ++i) {
            auto& r = records[start + i];
            r.advantage = variance == 0.0 ? 0.0 : (r.combined - mean) / (stddev + epsilon);
        }
    }
    return records;
}

std::size_t emit_reward_jsonl(const std::vector<RewardRecord>& records,
                              const RewardRunConfig& run_config,
                              const std::filesystem::path& path) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::ordered_json obj;
        obj["problem_id"] = r.problem_id;
        obj["rollout_index"] = r.rollout_index;
        obj["outcome"] = r.outcome;
        obj["reflection"] = r.reflection;
        obj["combined"] = r.combined;
        obj["advantage"] = r.advantage;
        obj["group_id"] = r.group_id;
        obj["judge_failed"] = r.judge_failed;
        obj["config"] = {{"alpha", run_config.alpha},
                         {"group_size", run_config.group_size},
                         {"epsilon", run_config.epsilon},
                         {"prompt_version", run_config.prompt_version},
                         {"judge_model", run_config.judge_model},
                         {"max_prompt_tokens", run_config.max_prompt_tokens},
                         {"max_response_tokens", run_config.max_response_tokens}};
        out += obj.dump();
        out += '\n';
    }
    write_text_file_atomic(path, out);
    return records.size();
}

void record_verdict(RewardManifest& manifest, const JudgeVerdict& verdict) {
    manifest.score_histogram[static_cast<std::size_t>(verdict.score)] += 1;
    if (verdict.clamped) {
        ++manifest.clamp_count;
    }
    for (const auto& phrase : verdict.matched_phrases) {
        ++manifest.phrase_hits[phrase];
    }
    ++manifest.records;
}

void record_parse_failure(RewardManifest& manifest) {
    ++manifest.parse_failure_count;
    ++manifest.records;
}

void write_reward_manifest(const RewardManifest& manifest, const std::filesystem::path& path) {
    nlohmann::ordered_json obj;
    obj["score_histogram"] = manifest.score_histogram;
    obj["clamp_count"] = manifest.clamp_count;
    obj["parse_failure_count"] = manifest.parse_failure_count;
    obj["truncated_prompts"] = manifest.truncated_prompts;
    obj["phrase_hits"] = manifest.phrase_hits;
    obj["records"] = manifest.records;
    obj["groups"] = manifest.groups;
    write_text_file_atomic(path, obj.dump(2) + "\n");
}

}  // namespace reflectforge
