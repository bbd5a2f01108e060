#include "reflectforge/config.hpp"

#include "reflectforge/errors.hpp"
#include "reflectforge/reward.hpp"
#include "reflectforge/toml_lite.hpp"
#include "reflectforge/util.hpp"

#include <json.hpp>

#include <set>

namespace reflectforge {

namespace {

// shortest round-trip representation, e.g. 0.6 stays "0.6"
std::string number_repr(double d) {
    return nlohmann::json(d).dump();
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "endpoint.url", "endpoint.model", "endpoint.judge_url", "endpoint.judge_model",
        "endpoint.max_inflight", "endpoint.retries", "endpoint.rate_limit_per_s",
        "endpoint.timeout_s", "endpoint.backoff_ms", "endpoint.api_key_env",
        "sampling.temperature", "sampling.max_tokens", "sampling.n_samples",
        "trace.think_open", "trace.think_close", "trace.lexicon", "trace.case_insensitive",
        "trace.match_rule", "trace.window_radius",
        "answer.boxed_marker",
        "scft.ratio_ic", "scft.ratio_cc", "scft.target_ic", "scft.chat_schema",
        "scft.per_problem_cap", "scft.critiques_per_response", "scft.critique_template",
        "reward.alpha", "reward.group_size", "reward.epsilon", "reward.judge_retries",
        "reward.p1_phrases", "reward.prompt_budget",
        "run.cache_dir", "run.out_dir", "run.seed",
    };
    return keys;
}

}  // namespace

PipelineConfig PipelineConfig::from_toml(std::string_view text, const std::string& origin) {
    const auto table = toml_lite::parse(text, origin);
    for (const auto& [key, value] : table) {
        (void)value;
        if (!known_keys().count(key)) {
            throw ConfigError(origin + ": unknown key: " + key);
        }
    }

    PipelineConfig cfg;
    auto str = [&](const char* key, std::string& field) {
        if (auto it = table.find(key); it != table.end()) field = it->second.as_string(key);
    };
    auto int_field = [&](const char* key, auto& field) {
        if (auto it = table.find(key); it != table.end()) {
            field = static_cast<std::decay_t<decltype(field)>>(it->second.as_int(key));
        }
    };
    auto dbl = [&](const char* key, double& field) {
        if (auto it = table.find(key); it != table.end()) field = it->second.as_double(key);
    };
    auto boolean = [&](const char* key, bool& field) {
        if (auto it = table.find(key); it != table.end()) field = it->second.as_bool(key);
    };
    auto str_list = [&](const char* key, std::vector<std::string>& field) {
        if (auto it = table.find(key); it != table.end()) field = it->second.as_string_array(key);
    };

    str("endpoint.url", cfg.endpoint.url);
    str("endpoint.model", cfg.endpoint.model);
    str("endpoint.judge_url", cfg.endpoint.judge_url);
    str("endpoint.judge_model", cfg.endpoint.judge_model);
    int_field("endpoint.max_inflight", cfg.endpoint.max_inflight);
    int_field("endpoint.retries", cfg.endpoint.retries);
    dbl("endpoint.rate_limit_per_s", cfg.endpoint.rate_limit_per_s);
    int_field("endpoint.timeout_s", cfg.endpoint.timeout_s);
    int_field("endpoint.backoff_ms", cfg.endpoint.backoff_ms);
    str("endpoint.api_key_env", cfg.endpoint.api_key_env);

    dbl("sampling.temperature", cfg.sampling.temperature);
    int_field("sampling.max_tokens", cfg.sampling.max_tokens);
    int_field("sampling.n_samples", cfg.sampling.n_samples);

    str("trace.think_open", cfg.trace.think_open);
    str("trace.think_close", cfg.trace.think_close);
    str_list("trace.lexicon", cfg.trace.lexicon);
    boolean("trace.case_insensitive", cfg.trace.case_insensitive);
    str("trace.match_rule", cfg.trace.match_rule);
    int_field("trace.window_radius", cfg.trace.window_radius);

    str("answer.boxed_marker", cfg.answer.boxed_marker);

    int_field("scft.ratio_ic", cfg.scft.ratio_ic);
    int_field("scft.ratio_cc", cfg.scft.ratio_cc);
    if (auto it = table.find("scft.target_ic"); it != table.end()) {
        cfg.scft.target_ic = it->second.as_int("scft.target_ic");
    }
    boolean("scft.chat_schema", cfg.scft.chat_schema);
    int_field("scft.per_problem_cap", cfg.scft.per_problem_cap);
    int_field("scft.critiques_per_response", cfg.scft.critiques_per_response);
    str("scft.critique_template", cfg.scft.critique_template);

    dbl("reward.alpha", cfg.reward.alpha);
    int_field("reward.group_size", cfg.reward.group_size);
    dbl("reward.epsilon", cfg.reward.epsilon);
    int_field("reward.judge_retries", cfg.reward.judge_retries);
    str_list("reward.p1_phrases", cfg.reward.p1_phrases);
    int_field("reward.prompt_budget", cfg.reward.prompt_budget);

    str("run.cache_dir", cfg.run.cache_dir);
    str("run.out_dir", cfg.run.out_dir);
    int_field("run.seed", cfg.run.seed);

    cfg.validate();
    return cfg;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    return from_toml(read_text_file(path), path.string());
}

std::string PipelineConfig::to_toml() const {
    using toml_lite::escape_string;
    std::string out;
    auto line = [&](const std::string& s) { out += s + "\n"; };

    line("[endpoint]");
    line("url = " + escape_string(endpoint.url));
    line("model = " + escape_string(endpoint.model));
    line("judge_url = " + escape_string(endpoint.judge_url));
    line("judge_model = " + escape_string(endpoint.judge_model));
    line("max_inflight = " + std::to_string(endpoint.max_inflight));
    line("retries = " + std::to_string(endpoint.retries));
    line("rate_limit_per_s = " + number_repr(endpoint.rate_limit_per_s));
    line("timeout_s = " + std::to_string(endpoint.timeout_s));
    line("backoff_ms = " + std::to_string(endpoint.backoff_ms));
    line("api_key_env = " + escape_string(endpoint.api_key_env));
    line("");
    line("[sampling]");
    line("temperature = " + number_repr(sampling.temperature));
    line("max_tokens = " + std::to_string(sampling.max_tokens));
    line("n_samples = " + std::to_string(sampling.n_samples));
    line("");
    line("[trace]");
    line("think_open = " + escape_string(trace.think_open));
    line("think_close = " + escape_string(trace.think_close));
    {
        std::string arr = "lexicon = [";
        const auto entries = lexicon().entries;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (i) arr += ", ";
            arr += escape_string(entries[i]);
        }
        line(arr + "]");
    }
    line(std::string("case_insensitive = ") + (trace.case_insensitive ? "true" : "false"));
    line("match_rule = " + escape_string(trace.match_rule));
    line("window_radius = " + std::to_string(trace.window_radius));
    line("");
    line("[answer]");
    line("boxed_marker = " + escape_string(answer.boxed_marker));
    line("");
    line("[scft]");
    line("ratio_ic = " + std::to_string(scft.ratio_ic));
    line("ratio_cc = " + std::to_string(scft.ratio_cc));
    if (scft.target_ic) {
        line("target_ic = " + std::to_string(*scft.target_ic));
    }
    line(std::string("chat_schema = ") + (scft.chat_schema ? "true" : "false"));
    line("per_problem_cap = " + std::to_string(scft.per_problem_cap));
    line("critiques_per_response = " + std::to_string(scft.critiques_per_response));
    if (!scft.critique_template.empty()) {
        line("critique_template = " + escape_string(scft.critique_template));
    }
    line("");
    line("[reward]");
    line("alpha = " + number_repr(reward.alpha));
    line("group_size = " + std::to_string(reward.group_size));
    line("epsilon = " + number_repr(reward.epsilon));
    line("judge_retries = " + std::to_string(reward.judge_retries));
    {
        std::string arr = "p1_phrases = [";
        const auto list = phrases();
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (i) arr += ", ";
            arr += escape_string(list[i]);
        }
        line(arr + "]");
    }
    line("prompt_budget = " + std::to_string(reward.prompt_budget));
    line("");
    line("[run]");
    line("cache_dir = " + escape_string(run.cache_dir));
    line("out_dir = " + escape_string(run.out_dir));
    line("seed = " + std::to_string(run.seed));
    if (run.mock_fixture) {
        line("# mock fixture supplied on the command line: " + *run.mock_fixture);
    }
    return out;
}

void PipelineConfig::validate() const {
    if (sampling.temperature < 0) throw ConfigError("sampling.temperature must be >= 0");
    if (sampling.max_tokens < 1) throw ConfigError("sampling.max_tokens must be >= 1");
    if (sampling.n_samples < 1) throw ConfigError("sampling.n_samples must be >= 1");
    if (endpoint.max_inflight < 1) throw ConfigError("endpoint.max_inflight must be >= 1");
    if (endpoint.retries < 0) throw ConfigError("endpoint.retries must be >= 0");
    if (endpoint.timeout_s < 1) throw ConfigError("endpoint.timeout_s must be >= 1");
    if (endpoint.backoff_ms < 0) throw ConfigError("endpoint.backoff_ms must be >= 0");
    if (endpoint.rate_limit_per_s < 0) throw ConfigError("endpoint.rate_limit_per_s must be >= 0");
    if (trace.think_open.empty() || trace.think_close.empty()) {
        throw ConfigError("trace delimiters must be non-empty");
    }
    if (trace.think_open == trace.think_close) {
        throw ConfigError("trace delimiters must be distinct");
    }
    if (trace.match_rule != "auto" && trace.match_rule != "word-boundary" &&
        trace.match_rule != "substring") {
        throw ConfigError("trace.match_rule must be auto, word-boundary, or substring");
    }
    if (trace.window_radius < 0) throw ConfigError("trace.window_radius must be >= 0");
    if (answer.boxed_marker.empty()) throw ConfigError("answer.boxed_marker must be non-empty");
    if (scft.ratio_ic < 1 || scft.ratio_cc < 1) {
        throw ConfigError("scft ratio parts must be positive integers");
    }
    if (scft.target_ic && *scft.target_ic < 0) throw ConfigError("scft.target_ic must be >= 0");
    if (scft.per_problem_cap < 0) throw ConfigError("scft.per_problem_cap must be >= 0");
    if (scft.critiques_per_response < 1) {
        throw ConfigError("scft.critiques_per_response must be >= 1");
    }
    if (reward.alpha < 0.0 || reward.alpha > 1.0) {
        throw ConfigError("reward.alpha must be in [0,1]");
    }
    if (reward.group_size < 1) throw ConfigError("reward.group_size must be >= 1");
    if (reward.epsilon <= 0) throw ConfigError("reward.epsilon must be > 0");
    if (reward.judge_retries < 0) throw ConfigError("reward.judge_retries must be >= 0");
    if (reward.prompt_budget < 256) throw ConfigError("reward.prompt_budget must be >= 256");
    if (run.cache_dir.empty() || run.out_dir.empty()) {
        throw ConfigError("run.cache_dir and run.out_dir must be non-empty");
    }
    lexicon().validate();
}

ReflectionLexicon PipelineConfig::lexicon() const {
    ReflectionLexicon lex = ReflectionLexicon::defaults();
    if (!trace.lexicon.empty()) {
        lex.entries = trace.lexicon;
    }
    lex.case_insensitive = trace.case_insensitive;
    if (trace.match_rule == "word-boundary") {
        lex.match_rule = ReflectionLexicon::MatchRule::word_boundary;
    } else if (trace.match_rule == "substring") {
        lex.match_rule = ReflectionLexicon::MatchRule::substring;
    } else {
        lex.match_rule = ReflectionLexicon::MatchRule::automatic;
    }
    return lex;
}

MarkerPair PipelineConfig::markers() const {
    return MarkerPair{trace.think_open, trace.think_close};
}

std::vector<std::string> PipelineConfig::phrases() const {
    return reward.p1_phrases.empty() ? default_p1_phrases() : reward.p1_phrases;
}

}  // namespace reflectforge
