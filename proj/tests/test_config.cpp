#include "reflectforge/config.hpp"

#include "reflectforge/errors.hpp"
#include "reflectforge/toml_lite.hpp"

#include <doctest.h>

using namespace reflectforge;

TEST_CASE("toml_lite parses sections, scalars, and arrays") {
    const auto table = toml_lite::parse(R"(# comment
[endpoint]
url = "http://localhost:8080/v1/chat/completions"  # trailing comment
max_inflight = 4
rate_limit_per_s = 2.5

[trace]
lexicon = ["wait", "hold on"]
case_insensitive = true
)");
    CHECK(table.at("endpoint.url").as_string("endpoint.url") ==
          "http://localhost:8080/v1/chat/completions");
    CHECK(table.at("endpoint.max_inflight").as_int("endpoint.max_inflight") == 4);
    CHECK(table.at("endpoint.rate_limit_per_s").as_double("x") == doctest::Approx(2.5));
    CHECK(table.at("trace.case_insensitive").as_bool("x"));
    const auto lex = table.at("trace.lexicon").as_string_array("trace.lexicon");
    REQUIRE(lex.size() == 2);
    CHECK(lex[0] == "wait");
    CHECK(lex[1] == "hold on");
}

TEST_CASE("toml_lite handles escapes and hash inside strings") {
    const auto table = toml_lite::parse(R"(marker = "\\boxed"
note = "a # not a comment \"quoted\""
)");
    CHECK(table.at("marker").as_string("marker") == "\\boxed");
    CHECK(table.at("note").as_string("note") == "a # not a comment \"quoted\"");
}

TEST_CASE("toml_lite errors carry line numbers") {
    try {
        toml_lite::parse("a = 1\nbad line\n", "test.toml");
        FAIL("expected config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("test.toml:2") != std::string::npos);
    }
    CHECK_THROWS_AS(toml_lite::parse("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(toml_lite::parse("a = [1, \n"), ConfigError);
    CHECK_THROWS_AS(toml_lite::parse("a = \"unterminated\n"), ConfigError);
}

TEST_CASE("pipeline config defaults follow the experimental setup") {
    const PipelineConfig cfg;
    CHECK(cfg.sampling.temperature == doctest::Approx(0.6));
    CHECK(cfg.sampling.max_tokens == 32768);
    CHECK(cfg.sampling.n_samples == 16);
    CHECK(cfg.reward.group_size == 8);
    CHECK(cfg.reward.alpha == doctest::Approx(0.5));
    CHECK(cfg.scft.ratio_ic == 2);
    CHECK(cfg.scft.ratio_cc == 1);
    CHECK(cfg.endpoint.max_inflight == 8);
    CHECK(cfg.endpoint.api_key_env == "REFLECTFORGE_API_KEY");
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config round-trips through its TOML serialization") {
    PipelineConfig cfg;
    cfg.endpoint.url = "http://example:9999/v1/chat/completions";
    cfg.endpoint.model = "some-model";
    cfg.sampling.n_samples = 4;
    cfg.trace.lexicon = {"wait", "hmm"};
    cfg.scft.target_ic = 100;
    cfg.reward.alpha = 0.25;
    cfg.run.seed = 99;
    const auto text = cfg.to_toml();
    const auto back = PipelineConfig::from_toml(text);
    CHECK(back.to_toml() == text);
    CHECK(back.endpoint.model == "some-model");
    CHECK(back.sampling.n_samples == 4);
    REQUIRE(back.scft.target_ic.has_value());
    CHECK(*back.scft.target_ic == 100);
    CHECK(back.run.seed == 99);
    CHECK(back.trace.lexicon == std::vector<std::string>{"wait", "hmm"});
}

TEST_CASE("unknown keys are config errors") {
    CHECK_THROWS_AS(PipelineConfig::from_toml("[endpoint]\nurll = \"typo\"\n"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_toml("loose = 1\n"), ConfigError);
}

TEST_CASE("config validation bounds") {
    CHECK_THROWS_AS(PipelineConfig::from_toml("[sampling]\ntemperature = -0.1\n"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_toml("[sampling]\nn_samples = 0\n"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_toml("[reward]\nalpha = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_toml("[reward]\nepsilon = 0.0\n"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_toml("[scft]\nratio_ic = 0\n"), ConfigError);
    CHECK_THROWS_AS(
        PipelineConfig::from_toml("[trace]\nthink_open = \"<t>\"\nthink_close = \"<t>\"\n"),
        ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_toml("[trace]\nmatch_rule = \"fuzzy\"\n"), ConfigError);
}

TEST_CASE("lexicon and marker helpers reflect overrides") {
    PipelineConfig cfg;
    CHECK(cfg.lexicon().entries == ReflectionLexicon::defaults().entries);
    cfg.trace.lexicon = {"wait"};
    cfg.trace.match_rule = "substring";
    CHECK(cfg.lexicon().entries == std::vector<std::string>{"wait"});
    CHECK(cfg.lexicon().match_rule == ReflectionLexicon::MatchRule::substring);
    cfg.trace.think_open = "<reason>";
    cfg.trace.think_close = "</reason>";
    CHECK(cfg.markers().open == "<reason>");
    // built-in p1 phrase defaults
    CHECK(cfg.phrases().size() == 3);
    cfg.reward.p1_phrases = {"bogus"};
    CHECK(cfg.phrases() == std::vector<std::string>{"bogus"});
}
