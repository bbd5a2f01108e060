#pragma once

#include "reflectforge/gateway.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace reflectforge {

struct RubricPrinciple {
    std::string id;    // P1..P5
    std::string name;
    std::string description;
};

struct ScoreBand {
    int lo = 0;
    int hi = 0;
    std::string title;
    std::vector<std::string> points;
};

/// The five-principle reflection rubric plus the 0-10 score bands. The
/// rendered text feeds the judge prompt and its version hash, so any wording
/// change invalidates cached verdicts.
struct RubricDefinition {
    std::vector<RubricPrinciple> principles;
    std::vector<ScoreBand> bands;

    void validate() const;  // exactly P1..P5 in order; bands tile 0-10
    std::string render_text() const;
    static RubricDefinition defaults();
};

struct JudgePromptResult {
    RenderedPrompt prompt;
    bool truncated = false;  // trajectory was elided head+tail to fit the budget
};

JudgePromptResult build_judge_prompt(const std::string& question, const std::string& trajectory,
                                     const RubricDefinition& rubric,
                                     std::size_t trajectory_budget = 65536);

const std::vector<std::string>& default_p1_phrases();

struct JudgeVerdict {
    std::vector<std::string> reflection_moments;
    std::string analysis;
    int score = 0;  // [0,10], clamped to <= 2 on a P1 violation
    bool p1_violation = false;
    bool clamped = false;  // score was pulled down to honor the P1 rule
    std::vector<std::string> matched_phrases;
    std::string raw;
};

/// Extracts the first balanced JSON object from the judge output (code
/// fences and prose are tolerated) and validates the schema. Score outside
/// [0,10] is a validation error; anything unparsable is a VerdictParseError.
JudgeVerdict parse_verdict(const std::string& raw,
                           const std::vector<std::string>& p1_phrases = default_p1_phrases());

/// Canonical JSON for a verdict; parse_verdict(render_verdict(v)) round-trips.
std::string render_verdict(const JudgeVerdict& verdict);

struct RewardRecord {
    std::string problem_id;
    int rollout_index = 0;
    int outcome = 0;          // 0 or 1
    double reflection = 0.0;  // score / 10
    double combined = 0.0;    // alpha * outcome + (1 - alpha) * reflection
    double advantage = 0.0;
    std::string group_id;
    bool judge_failed = false;  // verdict never parsed within the retry budget
};

RewardRecord combine_rewards(int outcome, const JudgeVerdict& verdict, double alpha);

/// Group-relative normalization: (combined - mean) / (std + epsilon) within
/// each consecutive block of group_size records sharing a problem_id.
/// Zero-variance groups get all-zero advantages.
std::vector<RewardRecord> group_advantages(std::vector<RewardRecord> records, int group_size,
                                           double epsilon = 1e-8);

struct RewardRunConfig {
    double alpha = 0.5;
    int group_size = 8;
    double epsilon = 1e-8;
    std::string prompt_version;
    std::string judge_model;
    // RL-stage length caps exported for the external trainer
    int max_prompt_tokens = 1024;
    int max_response_tokens = 16384;
};

std::size_t emit_reward_jsonl(const std::vector<RewardRecord>& records,
                              const RewardRunConfig& run_config,
                              const std::filesystem::path& path);

struct RewardManifest {
    std::array<long long, 11> score_histogram{};
    long long clamp_count = 0;
    long long parse_failure_count = 0;
    long long truncated_prompts = 0;
    std::map<std::string, long long> phrase_hits;
    long long records = 0;
    long long groups = 0;
};

void record_verdict(RewardManifest& manifest, const JudgeVerdict& verdict);
void record_parse_failure(RewardManifest& manifest);
void write_reward_manifest(const RewardManifest& manifest, const std::filesystem::path& path);

}  // namespace reflectforge
