// Acceptance suite: one line per criterion, nonzero exit on any failure.
#include "reflectforge/answer.hpp"
#include "reflectforge/commands.hpp"
#include "reflectforge/config.hpp"
#include "reflectforge/errors.hpp"
#include "reflectforge/gateway.hpp"
#include "reflectforge/metrics.hpp"
#include "reflectforge/reward.hpp"
#include "reflectforge/scft.hpp"
#include "reflectforge/trace.hpp"
#include "reflectforge/util.hpp"

#include "oracles.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

using namespace reflectforge;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void run_criterion(const std::string& name, const std::function<void()>& body) {
    try {
        body();
        std::cout << "[PASS] " << name << "\n";
    } catch (const std::exception& e) {
        ++g_failures;
        std::cout << "[FAIL] " << name << ": " << e.what() << "\n";
    }
}

void require(bool condition, const std::string& message) {
    if (!condition) {
        throw std::runtime_error(message);
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// --- criterion 1: pass@k oracle equivalence ---------------------------------

void criterion_pass_at_k() {
    const auto start = std::chrono::steady_clock::now();
    for (int n = 1; n <= 8; ++n) {
        for (int c = 0; c <= n; ++c) {
            for (int k = 1; k <= n; ++k) {
                const auto closed = pass_at_k(n, c, k);
                const auto enumerated = oracles::pass_at_k_enumerated(n, c, k);
                require(closed == enumerated,
                        "mismatch at n=" + std::to_string(n) + " c=" + std::to_string(c) +
                            " k=" + std::to_string(k) + ": " + closed.str() + " vs " +
                            enumerated.str());
            }
        }
    }
    require(seconds_since(start) < 1.0, "exceeded the 1 s budget");
}

// --- criterion 2: ERR hand-oracle --------------------------------------------

void criterion_err_oracle() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::vector<oracles::Sample> samples;
    std::vector<ProblemResult> results;
    for (int p = 0; p < 10; ++p) {
        ProblemResult r;
        r.problem_id = "p" + std::to_string(p);
        r.n = 5;
        for (int i = 0; i < 5; ++i) {
            const bool correct = rng() % 3 != 0;
            const int reflections = static_cast<int>(rng() % 6);
            r.correctness_flags.push_back(correct);
            r.reflection_counts.push_back(reflections);
            r.c += correct;
            samples.push_back({correct, reflections});
        }
        results.push_back(std::move(r));
    }
    require(samples.size() == 50, "corpus must hold 50 samples");
    const auto direct = oracles::err_direct(samples);
    const auto computed = err(results);
    require(direct.has_value() == computed.has_value(), "presence mismatch");
    require(*direct == *computed, "ERR mismatch: " + computed->str() + " vs " + direct->str());

    std::vector<ProblemResult> zero;
    ProblemResult z;
    z.problem_id = "z";
    z.n = 3;
    z.c = 1;
    z.correctness_flags = {true, false, false};
    z.reflection_counts = {0, 0, 0};
    zero.push_back(z);
    require(!err(zero).has_value(), "zero-denominator ERR must be absent");
    require(seconds_since(start) < 1.0, "exceeded the 1 s budget");
}

// --- criterion 3: filter truth table -----------------------------------------

void criterion_filter_truth_table() {
    std::mt19937_64 rng(103);
    for (int trial = 0; trial < 1000; ++trial) {
        const Problem problem{"p", "q", std::to_string(rng() % 90 + 10), "acc"};
        const bool response_right = rng() % 2 == 0;
        const bool critique_right = rng() % 2 == 0;
        const bool critique_boxed = rng() % 8 != 0;

        const auto trace = parse_trace(
            problem.id, "work… \\boxed{" +
                            (response_right ? problem.ground_truth : problem.ground_truth + "9") +
                            "}");
        std::string critique = "inspecting. ";
        if (critique_boxed) {
            critique += "\\boxed{" +
                        (critique_right ? problem.ground_truth : problem.ground_truth + "3") + "}";
        }
        const auto filtered = apply_filter(problem, trace, critique);
        const bool expect_kept = critique_boxed && critique_right;
        require(filtered.kept() == expect_kept, "retention mismatch at trial " +
                                                    std::to_string(trial));
        if (expect_kept) {
            const auto expected =
                response_right ? CritiqueCategory::c_to_c : CritiqueCategory::i_to_c;
            require(filtered.category == expected, "category mismatch at trial " +
                                                       std::to_string(trial));
            require(filtered.acc_y == response_right && filtered.acc_c,
                    "accuracy flags mismatch at trial " + std::to_string(trial));
        } else {
            require(filtered.category == CritiqueCategory::rejected,
                    "rejected expected at trial " + std::to_string(trial));
        }
    }
}

// --- criterion 4: Table 2 shape ----------------------------------------------

void criterion_balance_shape() {
    std::vector<Critique> pool;
    for (int i = 0; i < 1000; ++i) {
        Critique c;
        c.problem_id = "ic" + std::to_string(i);
        c.raw_text = "c" + std::to_string(i);
        c.acc_y = false;
        c.acc_c = true;
        c.category = CritiqueCategory::i_to_c;
        pool.push_back(std::move(c));
    }
    for (int i = 0; i < 3000; ++i) {
        Critique c;
        c.problem_id = "cc" + std::to_string(i);
        c.raw_text = "c" + std::to_string(i);
        c.acc_y = true;
        c.acc_c = true;
        c.category = CritiqueCategory::c_to_c;
        pool.push_back(std::move(c));
    }

    const auto make_manifest = [&pool]() {
        const auto selected = balance_dataset(pool, Rational(2, 1), 17, std::size_t{1000});
        ScftManifest m;
        m.pool_i_to_c = 1000;
        m.pool_c_to_c = 3000;
        for (const auto& c : selected) {
            if (c.category == CritiqueCategory::i_to_c) ++m.selected_i_to_c;
            if (c.category == CritiqueCategory::c_to_c) ++m.selected_c_to_c;
        }
        m.emitted = static_cast<long long>(selected.size());
        m.ratio = "2";
        m.seed = 17;
        m.lexicon_hash = lexicon_hash(ReflectionLexicon::defaults());
        return m;
    };

    const auto manifest = make_manifest();
    require(manifest.selected_i_to_c == 1000,
            "expected 1000 i->c, got " + std::to_string(manifest.selected_i_to_c));
    require(manifest.selected_c_to_c == 500,
            "expected 500 c->c, got " + std::to_string(manifest.selected_c_to_c));
    require(manifest.emitted == 1500, "expected 1500 total");

    const auto dir = fs::temp_directory_path() / "reflectforge-acceptance";
    fs::create_directories(dir);
    write_scft_manifest(manifest, dir / "manifest_run1.json");
    write_scft_manifest(make_manifest(), dir / "manifest_run2.json");
    require(read_text_file(dir / "manifest_run1.json") ==
                read_text_file(dir / "manifest_run2.json"),
            "manifest bytes differ across reruns with the same seed");
}

// --- criterion 5: Table 4 identity -------------------------------------------

void criterion_delta_identity() {
    std::mt19937_64 rng(107);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 60;
        std::vector<bool> t1(n);
        std::vector<bool> t2(n);
        for (std::size_t i = 0; i < n; ++i) {
            t1[i] = rng() % 2 == 0;
            t2[i] = rng() % 2 == 0;
        }
        const auto d = correction_delta(t1, t2);
        require(d.delta == d.delta_ic - d.delta_ci,
                "delta identity failed at trial " + std::to_string(trial));
    }

    // 30-problem vectors reproducing the published row arithmetic
    std::vector<bool> t1(30, false);
    std::vector<bool> t2(30, false);
    for (int i = 0; i < 7; ++i) t1[static_cast<std::size_t>(i)] = true;
    for (int i = 0; i < 6; ++i) t2[static_cast<std::size_t>(i)] = true;   // one c->i flip
    for (int i = 7; i < 16; ++i) t2[static_cast<std::size_t>(i)] = true;  // nine i->c flips
    const auto d = correction_delta(t1, t2);
    require(percent_1dp(d.delta_ic) == "30.0", "delta_ic renders " + percent_1dp(d.delta_ic));
    require(percent_1dp(d.delta_ci) == "3.3", "delta_ci renders " + percent_1dp(d.delta_ci));
    require(percent_1dp(d.delta) == "26.7", "delta renders " + percent_1dp(d.delta));
    require(percent_1dp(d.acc_t1) == "23.3" && percent_1dp(d.acc_t2) == "50.0",
            "accuracy columns render incorrectly");
}

// --- criterion 6: judge pipeline round-trip -----------------------------------

void criterion_judge_round_trip() {
    const std::string appendix =
        "```json\n{\n  \"reflection_moments\": [\"Wait, I missed the coefficient of x^2 in the "
        "expansion...\"],\n  \"analysis\": \"The model correctly identified a calculation "
        "error.It verified this by re-calculating and provided the correct value, leading to the "
        "right answer.\",\n  \"score\": 8\n}\n```";

    nlohmann::json fixture;
    fixture["mode"] = "scripted";
    RenderedPrompt prompt{"judge body", "judge-acc"};
    fixture["replies"][MockTransport::fixture_key(prompt.text)] = appendix;
    const auto dir = fs::temp_directory_path() / "reflectforge-acceptance" / "judge-cache";
    fs::remove_all(dir);
    ModelGateway gateway(DiskCache(dir), std::make_shared<MockTransport>(fixture), {});
    const auto raw = gateway.call_judge(prompt, SamplingConfig{0.6, 128, 1, "judge", ""});
    const auto verdict = parse_verdict(raw);
    require(verdict.score == 8, "appendix verdict should score 8");
    require(verdict.reflection_moments.size() == 1, "one reflection moment expected");

    bool parse_error = false;
    try {
        parse_verdict("score: eleven");
    } catch (const VerdictParseError&) {
        parse_error = true;
    }
    require(parse_error, "malformed output must raise a parse error");

    bool range_error = false;
    try {
        parse_verdict("{\"reflection_moments\": [], \"analysis\": \"x\", \"score\": 11}");
    } catch (const ValidationError&) {
        range_error = true;
    }
    require(range_error, "score 11 must raise a validation error");

    RewardManifest manifest;
    const auto clamped = parse_verdict(
        "{\"reflection_moments\": [\"m\"], \"analysis\": \"this is a hallucination of an "
        "error\", \"score\": 7}");
    record_verdict(manifest, clamped);
    require(clamped.score == 2, "p1 violation must clamp the score to 2");
    require(clamped.clamped && clamped.p1_violation, "clamp flags must be set");
    require(manifest.clamp_count == 1, "clamp must be counted in the manifest");
}

// --- criterion 7: GRPO advantage properties -----------------------------------

void criterion_advantage_properties() {
    std::mt19937_64 rng(109);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<RewardRecord> group;
        for (int i = 0; i < 8; ++i) {
            RewardRecord r;
            r.problem_id = "p";
            r.group_id = "p";
            r.rollout_index = i;
            r.combined = (rng() % 1001) / 1000.0;
            group.push_back(std::move(r));
        }
        const auto base = group_advantages(group, 8);
        double mean = 0.0;
        for (const auto& r : base) mean += r.advantage;
        require(std::abs(mean) < 1e-9, "group mean must be 0");

        auto shifted = group;
        for (auto& r : shifted) r.combined += 2.5;
        const auto shift = group_advantages(shifted, 8);
        auto scaled = group;
        for (auto& r : scaled) r.combined *= 3.0;
        const auto scale = group_advantages(scaled, 8);
        for (int i = 0; i < 8; ++i) {
            require(std::abs(shift[static_cast<std::size_t>(i)].advantage -
                             base[static_cast<std::size_t>(i)].advantage) < 1e-6,
                    "shift invariance failed");
            require(std::abs(scale[static_cast<std::size_t>(i)].advantage -
                             base[static_cast<std::size_t>(i)].advantage) < 1e-4,
                    "scale invariance failed");
        }
    }

    std::vector<RewardRecord> flat;
    for (int i = 0; i < 8; ++i) {
        RewardRecord r;
        r.problem_id = "p";
        r.combined = 0.75;
        flat.push_back(std::move(r));
    }
    for (const auto& r : group_advantages(flat, 8)) {
        require(r.advantage == 0.0, "zero-variance group must have all-zero advantages");
    }
}

// --- criterion 8: answer-checker suite ----------------------------------------

void criterion_answer_checker() {
    require(extract_answer("…\\boxed{16}… Thus \\boxed{25}.").raw == "25", "last boxed must win");
    require(extract_answer("…\\boxed{\\frac{5x}{2}}…").raw == "\\frac{5x}{2}",
            "nested braces must come through whole");

    std::mt19937_64 rng(113);
    const std::vector<std::string> cores = {"16", "9/2", "23,751", "x", "\\frac{5x}{2}",
                                            "4.5", "211", "-3",    "1,2"};
    const std::vector<std::pair<std::string, std::string>> wraps = {
        {"", ""}, {"$", "$"}, {" ", " "}, {"\\(", "\\)"}};
    for (int i = 0; i < 500; ++i) {
        const auto text =
            wraps[rng() % wraps.size()].first + cores[rng() % cores.size()] +
            wraps[rng() % wraps.size()].second;
        const auto once = normalize(text);
        const auto twice = normalize(once.normalized);
        require(once.normalized == twice.normalized && once.numeric == twice.numeric,
                "normalize must be idempotent on: " + text);
    }

    require(answers_equivalent(normalize("9/2"), normalize("4.5")), "9/2 must equal 4.5");
    require(!answers_equivalent(normalize("16"), normalize("25")), "16 must not equal 25");
    const auto thousands = normalize("23,751");
    require(thousands.numeric == Rational(23751), "thousands separator must parse to 23751");
}

// --- criterion 9: end-to-end offline run ---------------------------------------

struct E2eFixture {
    std::vector<Problem> problems;
    nlohmann::json mock;
    PipelineConfig cfg;
};

E2eFixture build_e2e_fixture(const fs::path& root) {
    E2eFixture fx;
    fx.cfg.endpoint.model = "mock-model";
    fx.cfg.endpoint.judge_model = "mock-judge";
    fx.cfg.sampling.temperature = 0.6;
    fx.cfg.sampling.max_tokens = 512;
    fx.cfg.sampling.n_samples = 4;
    fx.cfg.reward.group_size = 4;
    fx.cfg.run.cache_dir = (root / "cache").string();
    fx.cfg.run.out_dir = (root / "out").string();
    fx.cfg.run.seed = 17;

    const std::vector<std::pair<std::string, std::string>> spec_problems = {
        {"geometry-area", "4"},   {"fraction-sum", "9/2"}, {"triangle-cbd", "25"},
        {"digit-puzzle", "7"},    {"beautiful-base", "211"},
    };
    fx.mock["mode"] = "scripted";

    const PromptTemplate tmpl;
    const auto rubric = RubricDefinition::defaults();
    int salt = 0;
    for (const auto& [id, gt] : spec_problems) {
        Problem p{id, "Solve problem " + id + " and box the final answer.", gt, "e2e"};
        fx.problems.push_back(p);

        const std::string wrong1 = gt + "1";
        const std::string wrong2 = gt + "3";
        const std::vector<std::string> responses = {
            "<think>Let me check the approach. Wait, I should verify the key step.</think>"
            "The answer is \\boxed{" + gt + "}.",
            "<think>Straightforward case " + std::to_string(salt) + ".</think>"
            "I conclude \\boxed{" + wrong1 + "}.",
            "<think>Wait. Recomputing carefully.</think>Thus \\boxed{" + gt + "}.",
            "<think>Hold on, recheck the bound.</think>So \\boxed{" + wrong2 + "}.",
        };
        fx.mock["replies"][MockTransport::fixture_key(p.question)] = responses;

        // critiques: confirm, correct, reject, correct
        const std::vector<std::string> critiques = {
            "<think>Verify each step. Everything holds.</think>The solution is correct: \\boxed{" +
                gt + "}.",
            "<think>Wait, the last step is wrong.</think>The solution is incorrect; the right "
            "answer is \\boxed{" + gt + "}.",
            "<think>Hmm, I disagree somewhere.</think>I think it should be \\boxed{" + wrong2 +
                "}.",
            "<think>Let me verify. The bound was misused.</think>Corrected: \\boxed{" + gt + "}.",
        };
        const std::vector<int> scores = {8, 6, 3, 9};
        for (std::size_t i = 0; i < responses.size(); ++i) {
            fx.mock["replies"][MockTransport::fixture_key(tmpl.render(p.question, responses[i]))] =
                critiques[i];
            const auto judge_prompt = build_judge_prompt(p.question, responses[i], rubric,
                                                         static_cast<std::size_t>(
                                                             fx.cfg.reward.prompt_budget));
            nlohmann::ordered_json verdict;
            verdict["reflection_moments"] = {"Wait moment in rollout " + std::to_string(i)};
            verdict["analysis"] = "The reflection pinpointed the computation and fixed it.";
            verdict["score"] = scores[i];
            fx.mock["replies"][MockTransport::fixture_key(judge_prompt.prompt.text)] =
                verdict.dump(2);
        }
        ++salt;
    }
    return fx;
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(RF_CLI_PATH) + " " + args + " >> " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string collect_outputs(const fs::path& out_dir, const std::vector<std::string>& names) {
    std::string all;
    for (const auto& name : names) {
        const auto path = out_dir / name;
        require(fs::exists(path), "missing output " + path.string());
        all += "=== " + name + " ===\n";
        all += read_text_file(path);
    }
    return all;
}

void criterion_end_to_end() {
    const auto start = std::chrono::steady_clock::now();
    const auto root = fs::temp_directory_path() / "reflectforge-acceptance" / "e2e";
    fs::remove_all(root);
    fs::create_directories(root);

    const auto fixture = build_e2e_fixture(root);
    const auto problems_path = root / "problems.jsonl";
    {
        std::string lines;
        for (const auto& p : fixture.problems) {
            nlohmann::ordered_json obj;
            obj["id"] = p.id;
            obj["question"] = p.question;
            obj["ground_truth"] = p.ground_truth;
            obj["source"] = p.source;
            lines += obj.dump() + "\n";
        }
        write_text_file_atomic(problems_path, lines);
    }
    const auto mock_path = root / "mock.json";
    write_text_file_atomic(mock_path, fixture.mock.dump(2));
    const auto config_path = root / "config.toml";
    write_text_file_atomic(config_path, fixture.cfg.to_toml());

    const auto log = root / "cli.log";
    const std::string base = "--config " + config_path.string() + " --mock " + mock_path.string();
    const std::string dataset = " --dataset " + problems_path.string();
    const std::vector<std::string> outputs = {"scft.jsonl", "scft_manifest.json", "reward.jsonl",
                                              "reward_manifest.json", "resolved_config.toml"};

    const auto run_pipeline = [&]() {
        require(run_cli(base + " generate" + dataset, log) == 0, "generate failed; see " +
                                                                     log.string());
        require(run_cli(base + " critique" + dataset, log) == 0, "critique failed");
        require(run_cli(base + " build-scft" + dataset, log) == 0, "build-scft failed");
        require(run_cli(base + " judge" + dataset, log) == 0, "judge failed");
        require(run_cli(base + " reward" + dataset, log) == 0, "reward failed");
        return collect_outputs(fs::path(fixture.cfg.run.out_dir), outputs);
    };

    const auto first = run_pipeline();
    require(first.find("\"category\":\"i_to_c\"") != std::string::npos,
            "SCFT output must contain i_to_c examples");
    require(first.find("\"category\":\"c_to_c\"") != std::string::npos,
            "SCFT output must contain c_to_c examples");

    // cold rerun: wipe both cache and outputs
    fs::remove_all(fixture.cfg.run.cache_dir);
    fs::remove_all(fixture.cfg.run.out_dir);
    const auto second = run_pipeline();
    require(first == second, "pipeline outputs are not byte-reproducible across runs");

    // warm rerun: outputs must not change over a warm cache either
    const auto third = run_pipeline();
    require(second == third, "pipeline outputs changed over a warm cache");

    require(seconds_since(start) < 60.0, "exceeded the 60 s budget");
}

}  // namespace

int main() {
    run_criterion("pass@k equals brute-force enumeration for all n <= 8 (< 1 s)",
                  criterion_pass_at_k);
    run_criterion("ERR matches the direct hand-oracle on a 50-sample corpus (< 1 s)",
                  criterion_err_oracle);
    run_criterion("correctness filter truth table holds on 1000 random cases",
                  criterion_filter_truth_table);
    run_criterion("balancing 1000/3000 pool at 2:1 with target 1000 yields 1000+500, manifest "
                  "byte-stable",
                  criterion_balance_shape);
    run_criterion("correction delta identity on 1000 random pairs and 30.0-3.3=26.7 rendering",
                  criterion_delta_identity);
    run_criterion("judge verdict round-trip, error classes, and audited p1 clamping",
                  criterion_judge_round_trip);
    run_criterion("group advantages: zero mean, shift/scale invariance, zero-variance guard",
                  criterion_advantage_properties);
    run_criterion("answer checker: last-wins, nested braces, idempotent normalize, 9/2=4.5, "
                  "16!=25, 23,751",
                  criterion_answer_checker);
    run_criterion("end-to-end offline pipeline on 5 problems is byte-reproducible (< 60 s)",
                  criterion_end_to_end);

    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all acceptance criteria passed\n";
    return 0;
}
