#pragma once

#include "reflectforge/config.hpp"
#include "reflectforge/metrics.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace reflectforge {

std::size_t cmd_generate(const PipelineConfig& cfg, const std::filesystem::path& dataset);

std::size_t cmd_critique(const PipelineConfig& cfg, const std::filesystem::path& dataset);

std::size_t cmd_detect(const PipelineConfig& cfg, const std::filesystem::path& traces,
                       const std::filesystem::path& out);

struct EvalPaths {
    std::filesystem::path metrics_csv;
    std::filesystem::path per_problem_csv;
    std::filesystem::path table_txt;
};

EvalPaths cmd_eval(const PipelineConfig& cfg, const std::filesystem::path& dataset, int k);

struct ScftOptions {
    std::optional<long long> target_ic;
    std::vector<long long> cc_list;  // explicit c->c counts for ratio sweeps
    bool self_distill = false;
    std::optional<long long> self_distill_size;
    // pre-made {problem_id, response, critique} JSONL instead of the cache
    std::optional<std::filesystem::path> pairs;
};

std::size_t cmd_build_scft(const PipelineConfig& cfg, const std::filesystem::path& dataset,
                           const ScftOptions& options = {});

std::size_t cmd_judge(const PipelineConfig& cfg, const std::filesystem::path& dataset);

struct RewardOptions {
    // pre-made {problem_id, raw_text} JSONL instead of the cache
    std::optional<std::filesystem::path> trajectories;
};

std::size_t cmd_reward(const PipelineConfig& cfg, const std::filesystem::path& dataset,
                       const RewardOptions& options = {});

CorrectionDelta cmd_delta(const PipelineConfig& cfg, const std::filesystem::path& t1,
                          const std::filesystem::path& t2);

void cmd_report(const PipelineConfig& cfg, const std::filesystem::path& metrics_csv,
                const std::filesystem::path& per_problem_csv);

}  // namespace reflectforge
