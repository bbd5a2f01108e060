#pragma once

#include "reflectforge/answer.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reflectforge {

struct SamplingConfig {
    double temperature = 0.6;
    int max_tokens = 32768;
    int n_samples = 16;
    std::string model_name;
    std::string endpoint_url;
    void validate() const;
};

struct CacheKey {
    std::string digest;  // sha256 hex, fixed length
    static CacheKey make(std::string_view prompt, std::string_view model, double temperature,
                         int max_tokens, int sample_index, std::string_view prompt_version);
};

/// Content-addressed response store: one text file per key under
/// root/<aa>/<digest>.txt with a JSON sidecar. Writes are temp-then-rename,
/// so concurrent workers never observe partial entries.
class DiskCache {
public:
    explicit DiskCache(std::filesystem::path root) : root_(std::move(root)) {}

    std::optional<std::string> get(const CacheKey& key) const;
    void put(const CacheKey& key, std::string_view text, const nlohmann::ordered_json& meta) const;
    bool contains(const CacheKey& key) const;
    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path entry_path(const CacheKey& key) const;
    std::filesystem::path root_;
};

struct ChatRequest {
    std::string prompt;
    std::string model;
    double temperature = 0.6;
    int max_tokens = 1024;
    int sample_index = 0;      // scripted transports key replies off this
    std::string endpoint_url;  // overrides the transport default (judge endpoints)
};

struct TransportReply {
    std::string text;
    std::string usage_json;  // endpoint usage object when present
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportReply complete(const ChatRequest& request) = 0;
    virtual std::string describe() const = 0;
};

/// POSTs a chat-completions request and reads the first choice's message
/// content. The API key comes from the configured environment variable only.
class HttpTransport final : public Transport {
public:
    HttpTransport(std::string endpoint_url, std::string api_key, std::chrono::seconds timeout);
    TransportReply complete(const ChatRequest& request) override;
    std::string describe() const override { return "http:" + endpoint_url_; }

private:
    std::string endpoint_url_;
    std::string api_key_;
    std::chrono::seconds timeout_;
};

/// Offline endpoint driven by a fixture file:
///   { "mode": "scripted" | "echo",
///     "replies": { "<sha256 of prompt>": "text" | ["text0", "text1", ...] },
///     "default": "fallback" }
/// Array replies are picked by sample_index. Echo mode returns the prompt.
class MockTransport final : public Transport {
public:
    explicit MockTransport(nlohmann::json fixture);
    static std::shared_ptr<MockTransport> from_fixture(const std::filesystem::path& path);
    static std::string fixture_key(std::string_view prompt);

    TransportReply complete(const ChatRequest& request) override;
    std::string describe() const override { return "mock"; }

private:
    nlohmann::json fixture_;
};

/// Refuses every request with an actionable hint. Used by commands whose
/// contract is to consume previously cached responses only.
class CacheOnlyTransport final : public Transport {
public:
    explicit CacheOnlyTransport(std::string hint) : hint_(std::move(hint)) {}
    TransportReply complete(const ChatRequest&) override;
    std::string describe() const override { return "cache-only"; }

private:
    std::string hint_;
};

struct GatewayOptions {
    int max_retries = 2;
    int max_inflight = 8;
    double rate_limit_per_s = 0.0;  // token bucket; 0 disables
    std::chrono::milliseconds retry_backoff{250};
};

inline constexpr std::string_view kDefaultCritiqueTemplate =
    "Please critique whether the following solution to the question is correct. "
    "Question: {question} Solution: {solution}";

inline constexpr std::string_view kGenerationPromptVersion = "generate-v1";

struct PromptTemplate {
    std::string text = std::string(kDefaultCritiqueTemplate);
    void validate() const;  // TemplateError if {question} or {solution} is missing
    std::string render(std::string_view question, std::string_view solution) const;
    std::string version() const;
};

struct RenderedPrompt {
    std::string text;
    std::string version;
};

class ModelGateway {
public:
    ModelGateway(DiskCache cache, std::shared_ptr<Transport> transport, GatewayOptions opts = {});

    /// Exactly n_samples texts in sample_index order, each persisted to the
    /// cache before being returned.
    std::vector<std::string> sample_responses(const Problem& problem, const SamplingConfig& cfg);

    std::string generate_critique(const Problem& problem, const std::string& response,
                                  const SamplingConfig& cfg, const PromptTemplate& tmpl = {},
                                  int critique_index = 0);

    /// Judge prompts are pre-rendered by the reward module; the attempt index
    /// varies the cache key so unparsable verdicts can be re-sampled.
    std::string call_judge(const RenderedPrompt& judge_prompt, const SamplingConfig& cfg,
                           int attempt = 0);

    std::string complete(const std::string& prompt, const SamplingConfig& cfg,
                         std::string_view prompt_version, int sample_index);

    const DiskCache& cache() const { return cache_; }
    const GatewayOptions& options() const { return opts_; }

private:
    TransportReply request_with_retry(const ChatRequest& request);
    void rate_limit();

    DiskCache cache_;
    std::shared_ptr<Transport> transport_;
    GatewayOptions opts_;
    std::mutex bucket_mutex_;
    double bucket_tokens_ = 0.0;
    std::chrono::steady_clock::time_point bucket_last_{};
    bool bucket_started_ = false;
};

/// Runs body(0..count-1) on up to max_inflight workers; rethrows the first
/// failure after joining.
void parallel_for(std::size_t count, int max_inflight,
                  const std::function<void(std::size_t)>& body);

}  // namespace reflectforge
