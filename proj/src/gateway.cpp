#include "reflectforge/gateway.hpp"

#include "reflectforge/errors.hpp"
#include "reflectforge/util.hpp"

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <ctime>
#include <thread>

namespace reflectforge {

void SamplingConfig::validate() const {
    if (temperature < 0) throw ConfigError("temperature must be >= 0");
    if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
    if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
}

CacheKey CacheKey::make(std::string_view prompt, std::string_view model, double temperature,
                        int max_tokens, int sample_index, std::string_view prompt_version) {
    nlohmann::json canon = nlohmann::json::array(
        {std::string(prompt), std::string(model), temperature, max_tokens, sample_index,
         std::string(prompt_version)});
    return CacheKey{sha256_hex(canon.dump())};
}

std::filesystem::path DiskCache::entry_path(const CacheKey& key) const {
    return root_ / key.digest.substr(0, 2) / (key.digest + ".txt");
}

std::optional<std::string> DiskCache::get(const CacheKey& key) const {
    const auto path = entry_path(key);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) {
        return std::nullopt;
    }
    return read_text_file(path);
}

bool DiskCache::contains(const CacheKey& key) const {
    std::error_code ec;
    return std::filesystem::exists(entry_path(key), ec);
}

void DiskCache::put(const CacheKey& key, std::string_view text,
                    const nlohmann::ordered_json& meta) const {
    const auto path = entry_path(key);
    write_text_file_atomic(path, text);
    auto sidecar = meta;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    sidecar["created_at"] = stamp;
    auto meta_path = path;
    meta_path.replace_extension(".meta.json");
    write_text_file_atomic(meta_path, sidecar.dump(2) + "\n");
}

// --- transports -------------------------------------------------------------

namespace {

// scheme://host[:port] and path; httplib wants them split
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint url must include a scheme: " + url);
    }
    const auto path_pos = url.find('/', scheme_end + 3);
    if (path_pos == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_pos), url.substr(path_pos)};
}

}  // namespace

HttpTransport::HttpTransport(std::string endpoint_url, std::string api_key,
                             std::chrono::seconds timeout)
    : endpoint_url_(std::move(endpoint_url)), api_key_(std::move(api_key)), timeout_(timeout) {}

TransportReply HttpTransport::complete(const ChatRequest& request) {
    const auto& url = request.endpoint_url.empty() ? endpoint_url_ : request.endpoint_url;
    const auto [base, path] = split_url(url);
    httplib::Client client(base);
    client.set_connection_timeout(timeout_.count(), 0);
    client.set_read_timeout(timeout_.count(), 0);
    client.set_write_timeout(timeout_.count(), 0);

    nlohmann::json body = {
        {"model", request.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
    httplib::Headers headers;
    if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
    }
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
        throw GatewayError("transport failure contacting " + endpoint_url_ + ": " +
                           httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw GatewayError("http status " + std::to_string(res->status) + " from " + endpoint_url_);
    }
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw GatewayError(std::string("unparsable endpoint response: ") + e.what());
    }
    if (!parsed.contains("choices") || !parsed["choices"].is_array() || parsed["choices"].empty()) {
        throw GatewayError("endpoint response has no choices");
    }
    const auto& first = parsed["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content")) {
        throw GatewayError("endpoint response choice has no message content");
    }
    TransportReply reply;
    reply.text = first["message"]["content"].get<std::string>();
    if (parsed.contains("usage")) {
        reply.usage_json = parsed["usage"].dump();
    }
    return reply;
}

MockTransport::MockTransport(nlohmann::json fixture) : fixture_(std::move(fixture)) {
    const std::string mode = fixture_.value("mode", "scripted");
    if (mode != "scripted" && mode != "echo") {
        throw ConfigError("mock fixture mode must be scripted or echo");
    }
}

std::shared_ptr<MockTransport> MockTransport::from_fixture(const std::filesystem::path& path) {
    nlohmann::json fixture;
    try {
        fixture = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("mock fixture " + path.string() + ": " + e.what());
    }
    return std::make_shared<MockTransport>(std::move(fixture));
}

std::string MockTransport::fixture_key(std::string_view prompt) {
    return sha256_hex(prompt);
}

TransportReply MockTransport::complete(const ChatRequest& request) {
    if (fixture_.value("mode", "scripted") == "echo") {
        return {request.prompt, ""};
    }
    const auto key = fixture_key(request.prompt);
    if (fixture_.contains("replies") && fixture_["replies"].contains(key)) {
        const auto& entry = fixture_["replies"][key];
        if (entry.is_string()) {
            return {entry.get<std::string>(), ""};
        }
        if (entry.is_array() && !entry.empty()) {
            const auto idx = static_cast<std::size_t>(request.sample_index) % entry.size();
            return {entry[idx].get<std::string>(), ""};
        }
        throw ConfigError("mock fixture reply for " + key + " must be a string or array");
    }
    if (fixture_.contains("default")) {
        return {fixture_["default"].get<std::string>(), ""};
    }
    throw GatewayError("mock fixture has no reply for prompt hash " + key);
}

TransportReply CacheOnlyTransport::complete(const ChatRequest&) {
    throw GatewayError(hint_);
}

// --- gateway ----------------------------------------------------------------

ModelGateway::ModelGateway(DiskCache cache, std::shared_ptr<Transport> transport,
                           GatewayOptions opts)
    : cache_(std::move(cache)), transport_(std::move(transport)), opts_(opts) {
    if (!transport_) {
        throw ConfigError("gateway needs a transport");
    }
}

void ModelGateway::rate_limit() {
    if (opts_.rate_limit_per_s <= 0) return;
    for (;;) {
        std::chrono::duration<double> wait{0};
        {
            std::lock_guard<std::mutex> lock(bucket_mutex_);
            const auto now = std::chrono::steady_clock::now();
            if (!bucket_started_) {
                bucket_started_ = true;
                bucket_last_ = now;
                bucket_tokens_ = 1.0;
            }
            const std::chrono::duration<double> elapsed = now - bucket_last_;
            bucket_last_ = now;
            const double burst = std::max(1.0, opts_.rate_limit_per_s);
            bucket_tokens_ = std::min(burst, bucket_tokens_ + elapsed.count() * opts_.rate_limit_per_s);
            if (bucket_tokens_ >= 1.0) {
                bucket_tokens_ -= 1.0;
                return;
            }
            wait = std::chrono::duration<double>((1.0 - bucket_tokens_) / opts_.rate_limit_per_s);
        }
        std::this_thread::sleep_for(wait);
    }
}

TransportReply ModelGateway::request_with_retry(const ChatRequest& request) {
    const int attempts = 1 + std::max(0, opts_.max_retries);
    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0 && opts_.retry_backoff.count() > 0) {
            std::this_thread::sleep_for(opts_.retry_backoff * attempt);
        }
        rate_limit();
        try {
            return transport_->complete(request);
        } catch (const GatewayError& e) {
            last_error = e.what();
        }
    }
    throw GatewayError(last_error + " (after " + std::to_string(attempts) + " attempts)");
}

std::string ModelGateway::complete(const std::string& prompt, const SamplingConfig& cfg,
                                   std::string_view prompt_version, int sample_index) {
    cfg.validate();
    const auto key = CacheKey::make(prompt, cfg.model_name, cfg.temperature, cfg.max_tokens,
                                    sample_index, prompt_version);
    if (auto hit = cache_.get(key)) {
        return *hit;
    }
    const auto reply = request_with_retry(ChatRequest{
        prompt, cfg.model_name, cfg.temperature, cfg.max_tokens, sample_index});
    nlohmann::ordered_json meta;
    meta["model"] = cfg.model_name;
    meta["prompt_version"] = std::string(prompt_version);
    meta["sample_index"] = sample_index;
    meta["transport"] = transport_->describe();
    if (!reply.usage_json.empty()) {
        meta["usage"] = nlohmann::ordered_json::parse(reply.usage_json);
    }
    cache_.put(key, reply.text, meta);
    return reply.text;
}

std::vector<std::string> ModelGateway::sample_responses(const Problem& problem,
                                                        const SamplingConfig& cfg) {
    cfg.validate();
    std::vector<std::string> out(static_cast<std::size_t>(cfg.n_samples));
    parallel_for(out.size(), opts_.max_inflight, [&](std::size_t i) {
        try {
            out[i] = complete(problem.question, cfg, kGenerationPromptVersion, static_cast<int>(i));
        } catch (const GatewayError& e) {
            throw GatewayError("problem " + problem.id + " sample " + std::to_string(i) + ": " +
                               e.what());
        }
    });
    return out;
}

std::string ModelGateway::generate_critique(const Problem& problem, const std::string& response,
                                            const SamplingConfig& cfg, const PromptTemplate& tmpl,
                                            int critique_index) {
    tmpl.validate();
    const auto prompt = tmpl.render(problem.question, response);
    try {
        return complete(prompt, cfg, tmpl.version(), critique_index);
    } catch (const GatewayError& e) {
        throw GatewayError("problem " + problem.id + " critique " + std::to_string(critique_index) +
                           ": " + e.what());
    }
}

std::string ModelGateway::call_judge(const RenderedPrompt& judge_prompt, const SamplingConfig& cfg,
                                     int attempt) {
    return complete(judge_prompt.text, cfg, judge_prompt.version, attempt);
}

// --- prompt template --------------------------------------------------------

void PromptTemplate::validate() const {
    if (text.find("{question}") == std::string::npos) {
        throw TemplateError("critique template is missing the {question} placeholder");
    }
    if (text.find("{solution}") == std::string::npos) {
        throw TemplateError("critique template is missing the {solution} placeholder");
    }
}

std::string PromptTemplate::render(std::string_view question, std::string_view solution) const {
    validate();
    std::string out = text;
    const auto replace_all = [&out](std::string_view what, std::string_view with) {
        std::size_t pos = 0;
        while ((pos = out.find(what, pos)) != std::string::npos) {
            out.replace(pos, what.size(), with);
            pos += with.size();
        }
    };
    replace_all("{question}", question);
    replace_all("{solution}", solution);
    return out;
}

std::string PromptTemplate::version() const {
    return "critique-" + sha256_hex(text).substr(0, 12);
}

// --- worker pool ------------------------------------------------------------

void parallel_for(std::size_t count, int max_inflight,
                  const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    const std::size_t workers =
        std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, max_inflight)));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace reflectforge
