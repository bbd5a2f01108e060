#pragma once

#include "reflectforge/trace.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace reflectforge {

struct EndpointConfig {
    std::string url;          // chat-completions endpoint; empty = offline
    std::string model = "local-model";
    std::string judge_url;    // defaults to url when empty
    std::string judge_model = "gpt-4o";
    int max_inflight = 8;
    int retries = 2;
    double rate_limit_per_s = 0.0;  // 0 = unlimited
    int timeout_s = 120;
    int backoff_ms = 250;
    std::string api_key_env = "REFLECTFORGE_API_KEY";
};

struct SamplingDefaults {
    double temperature = 0.6;
    int max_tokens = 32768;
    int n_samples = 16;
};

struct TraceConfig {
    std::string think_open = "<think>";
    std::string think_close = "</think>";
    std::vector<std::string> lexicon;  // empty = built-in defaults
    bool case_insensitive = true;
    std::string match_rule = "auto";   // auto | word-boundary | substring
    long long window_radius = 80;
};

struct AnswerConfig {
    std::string boxed_marker = "\\boxed";
};

struct ScftSettings {
    long long ratio_ic = 2;
    long long ratio_cc = 1;
    std::optional<long long> target_ic;
    bool chat_schema = false;
    long long per_problem_cap = 0;  // 0 = unlimited kept critiques per problem
    int critiques_per_response = 1;
    std::string critique_template;  // empty = built-in default
};

struct RewardSettings {
    double alpha = 0.5;
    int group_size = 8;
    double epsilon = 1e-8;
    int judge_retries = 3;
    std::vector<std::string> p1_phrases;  // empty = built-in defaults
    long long prompt_budget = 65536;      // max trajectory chars in the judge prompt
};

struct RunSettings {
    std::string cache_dir = ".reflectforge-cache";
    std::string out_dir = "out";
    std::uint64_t seed = 17;
    std::optional<std::string> mock_fixture;  // --mock; not read from config files
};

struct PipelineConfig {
    EndpointConfig endpoint;
    SamplingDefaults sampling;
    TraceConfig trace;
    AnswerConfig answer;
    ScftSettings scft;
    RewardSettings reward;
    RunSettings run;

    static PipelineConfig from_toml(std::string_view text, const std::string& origin = "config");
    static PipelineConfig load(const std::filesystem::path& path);
    std::string to_toml() const;
    void validate() const;

    ReflectionLexicon lexicon() const;
    MarkerPair markers() const;
    std::vector<std::string> phrases() const;
};

}  // namespace reflectforge
