#pragma once

#include "reflectforge/rational.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace reflectforge {

struct ProblemResult {
    std::string problem_id;
    int n = 0;  // samples generated
    int c = 0;  // samples correct
    std::vector<int> reflection_counts;
    std::vector<bool> correctness_flags;

    void validate() const;
    long long reflections_in_correct() const;
    long long reflections_in_incorrect() const;
};

/// 1 - C(n-c, k) / C(n, k), exact; 1 when n-c < k.
Rational pass_at_k(int n, int c, int k);

/// Pooled over every sample of every problem; nullopt when no reflections.
std::optional<Rational> err(const std::vector<ProblemResult>& results);

/// Mean over problems of c/n.
Rational mean_pass1(const std::vector<ProblemResult>& results);

/// Pooled sample accuracy: total correct / total samples.
Rational pooled_pass1(const std::vector<ProblemResult>& results);

struct CorrectionDelta {
    Rational acc_t1;
    Rational acc_t2;
    Rational delta;     // acc_t2 - acc_t1 == delta_ic - delta_ci
    Rational delta_ic;  // fraction flipping incorrect -> correct
    Rational delta_ci;  // fraction flipping correct -> incorrect
};

CorrectionDelta correction_delta(const std::vector<bool>& t1_flags,
                                 const std::vector<bool>& t2_flags);

/// Exact percent with one decimal, round half away from zero: 8/30 -> "26.7".
std::string percent_1dp(const Rational& r);

/// Exact ratio with two decimals: 12/25 -> "0.48".
std::string ratio_2dp(const Rational& r);

struct DatasetMetrics {
    std::string dataset;
    std::size_t n_problems = 0;
    long long n_samples = 0;
    int k = 1;
    Rational pass1_mean;    // per-problem mean (headline number)
    Rational pass1_pooled;  // pooled sample accuracy
    Rational pass_k_mean;   // mean over problems of pass_at_k
    std::optional<Rational> err_ratio;
};

DatasetMetrics compute_dataset_metrics(const std::string& dataset,
                                       const std::vector<ProblemResult>& results, int k);

/// Adds "avg" (unweighted across datasets) and "pooled" (sample-weighted)
/// summary rows. avg is the primary aggregate.
std::vector<DatasetMetrics> with_summary_rows(std::vector<DatasetMetrics> rows,
                                              const std::vector<std::vector<ProblemResult>>& per_dataset);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<DatasetMetrics>& rows,
                       const std::string& lexicon_hash_hex);

void write_per_problem_csv(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::vector<ProblemResult>>>& per_dataset);

std::string render_metrics_table(const std::vector<DatasetMetrics>& rows,
                                 const std::string& lexicon_hash_hex);

std::string render_delta_table(const CorrectionDelta& d);

}  // namespace reflectforge
