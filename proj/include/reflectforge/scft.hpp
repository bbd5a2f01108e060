#pragma once

#include "reflectforge/answer.hpp"
#include "reflectforge/gateway.hpp"
#include "reflectforge/rational.hpp"
#include "reflectforge/trace.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reflectforge {

enum class CritiqueCategory { i_to_c, c_to_c, rejected };

std::string_view to_string(CritiqueCategory category);

struct Critique {
    std::string problem_id;
    int response_ref = 0;  // index of the critiqued trace
    std::string raw_text;
    std::optional<CanonicalAnswer> critique_answer;
    bool acc_y = false;  // correctness of the critiqued response
    bool acc_c = false;  // correctness of the critique's final answer
    CritiqueCategory category = CritiqueCategory::rejected;

    bool kept() const { return category != CritiqueCategory::rejected; }
};

/// Correctness filter: a critique is kept iff its own final answer is
/// correct; the (acc_y, acc_c) pair decides the category.
Critique apply_filter(const Problem& problem, const Trace& trace, const std::string& critique_text,
                      std::string_view boxed_marker = kDefaultBoxedMarker);

/// Seeded uniform subsample hitting |i->c| / |c->c| = ratio as closely as
/// integer counts allow. target_ic pins the i->c count; target_cc (used by
/// ratio sweeps) overrides the ratio for the c->c side. Selection order is
/// seeded shuffle then prefix-take; output preserves pool order.
std::vector<Critique> balance_dataset(const std::vector<Critique>& pool,
                                      const Rational& ratio_ic_to_cc, std::uint64_t seed,
                                      std::optional<std::size_t> target_ic = std::nullopt,
                                      std::optional<std::size_t> target_cc = std::nullopt);

struct ScftExample {
    std::string instruction;
    std::string output;
    CritiqueCategory category = CritiqueCategory::rejected;
    std::string problem_id;
};

ScftExample make_scft_example(const Problem& problem, const Trace& response,
                              const Critique& critique, const PromptTemplate& tmpl = {});

/// One object per line: {instruction, output, category, problem_id}, or a
/// chat-messages schema behind the flag. Returns lines written.
std::size_t emit_scft_jsonl(const std::vector<ScftExample>& examples,
                            const std::filesystem::path& path, bool chat_schema = false);

struct FilterStats {
    long long acc_y1_acc_c1 = 0;
    long long acc_y0_acc_c1 = 0;
    long long acc_y1_acc_c0 = 0;
    long long acc_y0_acc_c0 = 0;
};

struct ScftManifest {
    long long pool_i_to_c = 0;
    long long pool_c_to_c = 0;
    long long pool_rejected = 0;
    long long selected_i_to_c = 0;
    long long selected_c_to_c = 0;
    long long emitted = 0;
    std::string ratio;
    std::uint64_t seed = 0;
    std::string lexicon_hash;
    FilterStats filter;
};

void write_scft_manifest(const ScftManifest& manifest, const std::filesystem::path& path);

/// Baseline dataset: {instruction: question, output: response} for correct
/// traces only, optionally size-matched by seeded subsample.
std::size_t build_self_distill_jsonl(const std::vector<Trace>& traces,
                                     const std::vector<Problem>& problems,
                                     const std::filesystem::path& path,
                                     std::optional<std::size_t> match_size, std::uint64_t seed);

}  // namespace reflectforge
