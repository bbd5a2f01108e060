#include "reflectforge/commands.hpp"

#include "reflectforge/errors.hpp"
#include "reflectforge/gateway.hpp"
#include "reflectforge/jsonl.hpp"
#include "reflectforge/reward.hpp"
#include "reflectforge/scft.hpp"
#include "reflectforge/util.hpp"

#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace reflectforge {

namespace {

std::filesystem::path out_path(const PipelineConfig& cfg, const std::string& name) {
    return std::filesystem::path(cfg.run.out_dir) / name;
}

void write_config_snapshot(const PipelineConfig& cfg) {
    write_text_file_atomic(out_path(cfg, "resolved_config.toml"), cfg.to_toml());
}

std::string api_key(const PipelineConfig& cfg) {
    const char* v = std::getenv(cfg.endpoint.api_key_env.c_str());
    return v ? v : "";
}

GatewayOptions gateway_options(const PipelineConfig& cfg) {
    GatewayOptions opts;
    opts.max_retries = cfg.endpoint.retries;
    opts.max_inflight = cfg.endpoint.max_inflight;
    opts.rate_limit_per_s = cfg.endpoint.rate_limit_per_s;
    opts.retry_backoff = std::chrono::milliseconds(cfg.endpoint.backoff_ms);
    return opts;
}

// cache_only commands consume earlier runs; hint names the command to run
ModelGateway make_gateway(const PipelineConfig& cfg, bool cache_only, const std::string& hint) {
    std::shared_ptr<Transport> transport;
    if (cache_only) {
        transport = std::make_shared<CacheOnlyTransport>(hint);
    } else if (cfg.run.mock_fixture) {
        transport = MockTransport::from_fixture(*cfg.run.mock_fixture);
    } else if (!cfg.endpoint.url.empty()) {
        transport = std::make_shared<HttpTransport>(cfg.endpoint.url, api_key(cfg),
                                                    std::chrono::seconds(cfg.endpoint.timeout_s));
    } else {
        transport = std::make_shared<CacheOnlyTransport>(hint);
    }
    return ModelGateway(DiskCache(cfg.run.cache_dir), std::move(transport), gateway_options(cfg));
}

SamplingConfig sampler(const PipelineConfig& cfg) {
    SamplingConfig s;
    s.temperature = cfg.sampling.temperature;
    s.max_tokens = cfg.sampling.max_tokens;
    s.n_samples = cfg.sampling.n_samples;
    s.model_name = cfg.endpoint.model;
    s.endpoint_url = cfg.endpoint.url;
    return s;
}

SamplingConfig judge_sampler(const PipelineConfig& cfg) {
    SamplingConfig s = sampler(cfg);
    s.model_name = cfg.endpoint.judge_model;
    s.endpoint_url = cfg.endpoint.judge_url.empty() ? cfg.endpoint.url : cfg.endpoint.judge_url;
    s.n_samples = 1;
    return s;
}

PromptTemplate critique_template(const PipelineConfig& cfg) {
    PromptTemplate tmpl;
    if (!cfg.scft.critique_template.empty()) {
        tmpl.text = cfg.scft.critique_template;
    }
    tmpl.validate();
    return tmpl;
}

}  // namespace

std::size_t cmd_generate(const PipelineConfig& cfg, const std::filesystem::path& dataset) {
    cfg.validate();
    const auto problems = read_problems(dataset);
    auto gateway = make_gateway(cfg, false, "no endpoint or mock fixture configured");
    const auto sampling = sampler(cfg);
    std::size_t generated = 0;
    for (const auto& problem : problems) {
        const auto responses = gateway.sample_responses(problem, sampling);
        generated += responses.size();
        std::cout << "generate " << problem.id << ": " << responses.size() << " responses\n";
    }
    write_config_snapshot(cfg);
    std::cout << "generated " << generated << " responses for " << problems.size()
              << " problems\n";
    return generated;
}

std::size_t cmd_critique(const PipelineConfig& cfg, const std::filesystem::path& dataset) {
    cfg.validate();
    const auto problems = read_problems(dataset);
    auto gateway = make_gateway(cfg, false, "no endpoint or mock fixture configured");
    const auto sampling = sampler(cfg);
    const auto tmpl = critique_template(cfg);
    std::size_t critiques = 0;
    for (const auto& problem : problems) {
        const auto responses = gateway.sample_responses(problem, sampling);
        parallel_for(responses.size(), gateway.options().max_inflight, [&](std::size_t i) {
            for (int j = 0; j < cfg.scft.critiques_per_response; ++j) {
                gateway.generate_critique(problem, responses[i], sampling, tmpl, j);
            }
        });
        critiques += responses.size() * static_cast<std::size_t>(cfg.scft.critiques_per_response);
        std::cout << "critique " << problem.id << ": " << responses.size() << " responses\n";
    }
    write_config_snapshot(cfg);
    std::cout << "generated " << critiques << " critiques\n";
    return critiques;
}

std::size_t cmd_detect(const PipelineConfig& cfg, const std::filesystem::path& traces,
                       const std::filesystem::path& out) {
    cfg.validate();
    const auto inputs = read_trace_inputs(traces);
    const auto lexicon = cfg.lexicon();
    const auto markers = cfg.markers();
    JsonlWriter writer(out);
    for (const auto& input : inputs) {
        auto trace = parse_trace(input.problem_id, input.raw_text, markers);
        trace.token_count = input.token_count;
        trace = detect_reflections(trace, lexicon,
                                   static_cast<std::size_t>(cfg.trace.window_radius));
        nlohmann::ordered_json obj;
        obj["problem_id"] = trace.problem_id;
        obj["reflection_count"] = reflection_count(trace);
        obj["think_present"] = trace.think_segment.has_value();
        auto events = nlohmann::ordered_json::array();
        for (const auto& ev : trace.reflections) {
            events.push_back({{"offset", ev.offset}, {"keyword", ev.keyword}, {"window", ev.window}});
        }
        obj["events"] = std::move(events);
        writer.write(obj);
    }
    writer.close();
    write_config_snapshot(cfg);
    std::cout << "detected reflections in " << writer.lines() << " traces (lexicon "
              << lexicon_hash(lexicon) << ")\n";
    return writer.lines();
}

namespace {

struct ScoredResponses {
    std::vector<Trace> traces;         // one per sample, correctness filled in
    ProblemResult result;
    long long no_answer = 0;           // responses with no extractable boxed answer
};

ScoredResponses score_problem(const PipelineConfig& cfg, ModelGateway& gateway,
                              const Problem& problem, const SamplingConfig& sampling) {
    ScoredResponses out;
    const auto responses = gateway.sample_responses(problem, sampling);
    out.result.problem_id = problem.id;
    out.result.n = static_cast<int>(responses.size());
    const auto lexicon = cfg.lexicon();
    const auto markers = cfg.markers();
    for (const auto& text : responses) {
        auto trace = parse_trace(problem.id, text, markers);
        trace = detect_reflections(trace, lexicon,
                                   static_cast<std::size_t>(cfg.trace.window_radius));
        const auto check = check_answer(text, problem, cfg.answer.boxed_marker);
        out.no_answer += check.no_answer;
        trace.is_correct = check.correct;
        out.result.reflection_counts.push_back(static_cast<int>(reflection_count(trace)));
        out.result.correctness_flags.push_back(check.correct);
        out.result.c += check.correct;
        out.traces.push_back(std::move(trace));
    }
    out.result.validate();
    return out;
}

}  // namespace

EvalPaths cmd_eval(const PipelineConfig& cfg, const std::filesystem::path& dataset, int k) {
    cfg.validate();
    const auto problems = read_problems(dataset);
    if (problems.empty()) {
        throw ValidationError("dataset " + dataset.string() + " has no problems");
    }
    auto gateway = make_gateway(cfg, true,
                                "response not in cache; run 'reflectforge generate' first");
    const auto sampling = sampler(cfg);
    const int k_eff = std::min(k, sampling.n_samples);

    std::map<std::string, std::vector<ProblemResult>> by_dataset;
    std::vector<std::string> dataset_order;
    long long no_answer_total = 0;
    for (const auto& problem : problems) {
        auto scored = score_problem(cfg, gateway, problem, sampling);
        no_answer_total += scored.no_answer;
        if (!by_dataset.count(problem.source)) {
            dataset_order.push_back(problem.source);
        }
        by_dataset[problem.source].push_back(std::move(scored.result));
    }

    std::vector<DatasetMetrics> rows;
    std::vector<std::vector<ProblemResult>> grouped;
    std::vector<std::pair<std::string, std::vector<ProblemResult>>> per_problem;
    for (const auto& name : dataset_order) {
        rows.push_back(compute_dataset_metrics(name, by_dataset[name], k_eff));
        grouped.push_back(by_dataset[name]);
        per_problem.emplace_back(name, by_dataset[name]);
    }
    rows = with_summary_rows(std::move(rows), grouped);

    const auto lex_hash = lexicon_hash(cfg.lexicon());
    EvalPaths paths{out_path(cfg, "metrics.csv"), out_path(cfg, "per_problem.csv"),
                    out_path(cfg, "metrics_table.txt")};
    write_metrics_csv(paths.metrics_csv, rows, lex_hash);
    write_per_problem_csv(paths.per_problem_csv, per_problem);
    write_text_file_atomic(paths.table_txt, render_metrics_table(rows, lex_hash));
    write_config_snapshot(cfg);
    std::cout << render_metrics_table(rows, lex_hash);
    std::cout << "no-answer responses: " << no_answer_total << "\n";
    return paths;
}

namespace {

// (problem, response, critique raw text) regardless of where they came from
struct CritiqueTriple {
    const Problem* problem;
    int response_ref;
    std::string response;
    std::string critique;
};

std::vector<CritiqueTriple> critique_triples_from_cache(const PipelineConfig& cfg,
                                                        ModelGateway& gateway,
                                                        const std::vector<Problem>& problems,
                                                        const PromptTemplate& tmpl) {
    const auto sampling = sampler(cfg);
    std::vector<CritiqueTriple> triples;
    for (const auto& problem : problems) {
        const auto responses = gateway.sample_responses(problem, sampling);
        for (std::size_t i = 0; i < responses.size(); ++i) {
            for (int j = 0; j < cfg.scft.critiques_per_response; ++j) {
                triples.push_back({&problem, static_cast<int>(i), responses[i],
                                   gateway.generate_critique(problem, responses[i], sampling,
                                                             tmpl, j)});
            }
        }
    }
    return triples;
}

std::vector<CritiqueTriple> critique_triples_from_jsonl(const std::filesystem::path& path,
                                                        const std::vector<Problem>& problems) {
    std::map<std::string, const Problem*> by_id;
    for (const auto& p : problems) by_id[p.id] = &p;
    std::map<std::string, int> per_problem_index;
    std::vector<CritiqueTriple> triples;
    for (const auto& obj : read_jsonl(path)) {
        if (!obj.contains("problem_id") || !obj.contains("response") || !obj.contains("critique")) {
            throw ValidationError(path.string() +
                                  ": pair lines need problem_id, response, critique");
        }
        const auto id = obj.at("problem_id").get<std::string>();
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw ValidationError(path.string() + ": unknown problem " + id);
        }
        triples.push_back({it->second, per_problem_index[id]++,
                           obj.at("response").get<std::string>(),
                           obj.at("critique").get<std::string>()});
    }
    return triples;
}

}  // namespace

std::size_t cmd_build_scft(const PipelineConfig& cfg, const std::filesystem::path& dataset,
                           const ScftOptions& options) {
    cfg.validate();
    const auto problems = read_problems(dataset);
    const auto tmpl = critique_template(cfg);
    const auto markers = cfg.markers();

    std::vector<CritiqueTriple> triples;
    if (options.pairs) {
        triples = critique_triples_from_jsonl(*options.pairs, problems);
    } else {
        auto gateway = make_gateway(
            cfg, false, "responses/critiques not in cache; run 'reflectforge generate' then "
                        "'reflectforge critique' first");
        triples = critique_triples_from_cache(cfg, gateway, problems, tmpl);
    }

    struct PoolEntry {
        Critique critique;
        const Problem* problem;
        Trace trace;
    };
    std::vector<PoolEntry> entries;
    FilterStats stats;
    std::map<std::string, long long> kept_per_problem;

    for (const auto& triple : triples) {
        const auto& problem = *triple.problem;
        auto trace = parse_trace(problem.id, triple.response, markers);
        auto critique = apply_filter(problem, trace, triple.critique, cfg.answer.boxed_marker);
        critique.response_ref = triple.response_ref;
        if (critique.acc_y && critique.acc_c) ++stats.acc_y1_acc_c1;
        if (!critique.acc_y && critique.acc_c) ++stats.acc_y0_acc_c1;
        if (critique.acc_y && !critique.acc_c) ++stats.acc_y1_acc_c0;
        if (!critique.acc_y && !critique.acc_c) ++stats.acc_y0_acc_c0;
        if (critique.kept()) {
            if (cfg.scft.per_problem_cap > 0 &&
                kept_per_problem[problem.id] >= cfg.scft.per_problem_cap) {
                continue;
            }
            ++kept_per_problem[problem.id];
            entries.push_back({std::move(critique), &problem, std::move(trace)});
        }
    }

    std::vector<Critique> pool;
    pool.reserve(entries.size());
    for (const auto& e : entries) {
        pool.push_back(e.critique);
    }

    const Rational ratio(cfg.scft.ratio_ic, cfg.scft.ratio_cc);
    const auto lex_hash = lexicon_hash(cfg.lexicon());

    auto emit_one = [&](const std::optional<std::size_t>& target_ic,
                        const std::optional<std::size_t>& target_cc,
                        const std::string& suffix) -> std::size_t {
        std::vector<Critique> selected;
        if (pool.empty()) {
            std::cout << "warning: no critique survived the filter; emitting empty dataset\n";
        } else {
            selected = balance_dataset(pool, ratio, cfg.run.seed, target_ic, target_cc);
        }
        // balance preserves pool order, so entries can be matched by a cursor
        std::vector<ScftExample> examples;
        std::size_t cursor = 0;
        for (const auto& sel : selected) {
            while (cursor < entries.size() &&
                   (entries[cursor].critique.problem_id != sel.problem_id ||
                    entries[cursor].critique.response_ref != sel.response_ref ||
                    entries[cursor].critique.raw_text != sel.raw_text)) {
                ++cursor;
            }
            if (cursor == entries.size()) {
                throw ValidationError("internal: balanced critique not found in pool");
            }
            examples.push_back(make_scft_example(*entries[cursor].problem, entries[cursor].trace,
                                                 sel, tmpl));
            ++cursor;
        }
        const auto emitted =
            emit_scft_jsonl(examples, out_path(cfg, "scft" + suffix + ".jsonl"),
                            cfg.scft.chat_schema);
        ScftManifest manifest;
        for (const auto& c : pool) {
            if (c.category == CritiqueCategory::i_to_c) ++manifest.pool_i_to_c;
            if (c.category == CritiqueCategory::c_to_c) ++manifest.pool_c_to_c;
        }
        manifest.pool_rejected = stats.acc_y1_acc_c0 + stats.acc_y0_acc_c0;
        for (const auto& c : selected) {
            if (c.category == CritiqueCategory::i_to_c) ++manifest.selected_i_to_c;
            if (c.category == CritiqueCategory::c_to_c) ++manifest.selected_c_to_c;
        }
        manifest.emitted = static_cast<long long>(emitted);
        manifest.ratio = ratio.str();
        manifest.seed = cfg.run.seed;
        manifest.lexicon_hash = lex_hash;
        manifest.filter = stats;
        write_scft_manifest(manifest, out_path(cfg, "scft_manifest" + suffix + ".json"));
        std::cout << "scft" << suffix << ": " << manifest.selected_i_to_c << " i_to_c + "
                  << manifest.selected_c_to_c << " c_to_c = " << emitted << " examples\n";
        return emitted;
    };

    std::optional<std::size_t> target_ic;
    if (cfg.scft.target_ic) target_ic = static_cast<std::size_t>(*cfg.scft.target_ic);
    if (options.target_ic) target_ic = static_cast<std::size_t>(*options.target_ic);

    std::size_t total = 0;
    if (options.cc_list.empty()) {
        total = emit_one(target_ic, std::nullopt, "");
    } else {
        for (const auto cc : options.cc_list) {
            const std::string suffix = "_cc" + std::to_string(cc);
            total += emit_one(target_ic, static_cast<std::size_t>(cc), suffix);
        }
    }

    if (options.self_distill) {
        // one trace per distinct (problem, response_ref) pair
        std::vector<Trace> traces;
        std::set<std::pair<std::string, int>> seen;
        for (const auto& triple : triples) {
            if (!seen.insert({triple.problem->id, triple.response_ref}).second) continue;
            auto trace = parse_trace(triple.problem->id, triple.response, markers);
            trace.is_correct = judge_correct(triple.response, *triple.problem,
                                             cfg.answer.boxed_marker);
            traces.push_back(std::move(trace));
        }
        std::optional<std::size_t> match;
        if (options.self_distill_size) {
            match = static_cast<std::size_t>(*options.self_distill_size);
        } else {
            match = total;  // size-matched to the SCFT set
        }
        const auto lines = build_self_distill_jsonl(traces, problems,
                                                    out_path(cfg, "self_distill.jsonl"), match,
                                                    cfg.run.seed);
        std::cout << "self_distill: " << lines << " examples\n";
    }

    write_config_snapshot(cfg);
    return total;
}

std::size_t cmd_judge(const PipelineConfig& cfg, const std::filesystem::path& dataset) {
    cfg.validate();
    const auto problems = read_problems(dataset);
    auto gateway = make_gateway(cfg, false, "no judge endpoint or mock fixture configured");
    const auto sampling = sampler(cfg);
    const auto judge_cfg = judge_sampler(cfg);
    const auto rubric = RubricDefinition::defaults();
    std::size_t judged = 0;
    for (const auto& problem : problems) {
        auto responses = gateway.sample_responses(problem, sampling);
        responses.resize(std::min<std::size_t>(responses.size(),
                                               static_cast<std::size_t>(cfg.reward.group_size)));
        parallel_for(responses.size(), gateway.options().max_inflight, [&](std::size_t i) {
            const auto rendered =
                build_judge_prompt(problem.question, responses[i], rubric,
                                   static_cast<std::size_t>(cfg.reward.prompt_budget));
            gateway.call_judge(rendered.prompt, judge_cfg, 0);
        });
        judged += responses.size();
        std::cout << "judge " << problem.id << ": " << responses.size() << " trajectories\n";
    }
    write_config_snapshot(cfg);
    std::cout << "judged " << judged << " trajectories\n";
    return judged;
}

namespace {

// trajectories grouped per problem, each group exactly group_size rollouts
std::vector<std::pair<const Problem*, std::vector<std::string>>> trajectory_groups_from_jsonl(
    const std::filesystem::path& path, const std::vector<Problem>& problems, int group_size) {
    std::map<std::string, const Problem*> by_id;
    for (const auto& p : problems) by_id[p.id] = &p;
    std::vector<std::pair<const Problem*, std::vector<std::string>>> groups;
    std::set<std::string> finished;
    for (const auto& obj : read_jsonl(path)) {
        if (!obj.contains("problem_id") || !obj.contains("raw_text")) {
            throw ValidationError(path.string() + ": trajectory lines need problem_id, raw_text");
        }
        const auto id = obj.at("problem_id").get<std::string>();
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw ValidationError(path.string() + ": unknown problem " + id);
        }
        if (groups.empty() || groups.back().first->id != id) {
            if (!finished.insert(id).second) {
                throw DomainError("trajectories for problem " + id + " are not contiguous");
            }
            if (!groups.empty() &&
                groups.back().second.size() != static_cast<std::size_t>(group_size)) {
                throw DomainError("problem " + groups.back().first->id + " has " +
                                  std::to_string(groups.back().second.size()) +
                                  " trajectories, expected " + std::to_string(group_size));
            }
            groups.emplace_back(it->second, std::vector<std::string>{});
        }
        groups.back().second.push_back(obj.at("raw_text").get<std::string>());
    }
    if (!groups.empty() && groups.back().second.size() != static_cast<std::size_t>(group_size)) {
        throw DomainError("problem " + groups.back().first->id + " has " +
                          std::to_string(groups.back().second.size()) +
                          " trajectories, expected " + std::to_string(group_size));
    }
    return groups;
}

}  // namespace

std::size_t cmd_reward(const PipelineConfig& cfg, const std::filesystem::path& dataset,
                       const RewardOptions& options) {
    cfg.validate();
    const auto problems = read_problems(dataset);
    auto gateway = make_gateway(
        cfg, false, "trajectories not in cache; run 'reflectforge generate' and "
                    "'reflectforge judge' first");
    const auto sampling = sampler(cfg);
    const auto judge_cfg = judge_sampler(cfg);
    const auto rubric = RubricDefinition::defaults();
    const auto phrases = cfg.phrases();

    std::vector<std::pair<const Problem*, std::vector<std::string>>> groups;
    if (options.trajectories) {
        groups = trajectory_groups_from_jsonl(*options.trajectories, problems,
                                              cfg.reward.group_size);
    } else {
        if (sampling.n_samples < cfg.reward.group_size) {
            throw ConfigError("sampling.n_samples (" + std::to_string(sampling.n_samples) +
                              ") is smaller than reward.group_size (" +
                              std::to_string(cfg.reward.group_size) + ")");
        }
        for (const auto& problem : problems) {
            auto responses = gateway.sample_responses(problem, sampling);
            responses.resize(static_cast<std::size_t>(cfg.reward.group_size));
            groups.emplace_back(&problem, std::move(responses));
        }
    }

    RewardManifest manifest;
    std::vector<RewardRecord> records;
    std::string prompt_version;

    for (const auto& [problem_ptr, responses] : groups) {
        const auto& problem = *problem_ptr;
        for (std::size_t i = 0; i < responses.size(); ++i) {
            const int outcome = judge_correct(responses[i], problem, cfg.answer.boxed_marker);
            const auto rendered =
                build_judge_prompt(problem.question, responses[i], rubric,
                                   static_cast<std::size_t>(cfg.reward.prompt_budget));
            prompt_version = rendered.prompt.version;
            if (rendered.truncated) {
                ++manifest.truncated_prompts;
            }

            JudgeVerdict verdict;
            bool parsed = false;
            for (int attempt = 0; attempt <= cfg.reward.judge_retries && !parsed; ++attempt) {
                const auto raw = gateway.call_judge(rendered.prompt, judge_cfg, attempt);
                try {
                    verdict = parse_verdict(raw, phrases);
                    parsed = true;
                } catch (const VerdictParseError&) {
                } catch (const ValidationError&) {
                    // out-of-range scores are as unusable as unparsable output
                }
            }
            RewardRecord record;
            if (parsed) {
                record_verdict(manifest, verdict);
                record = combine_rewards(outcome, verdict, cfg.reward.alpha);
            } else {
                record_parse_failure(manifest);
                JudgeVerdict zero;  // scoring failure keeps the group rectangular
                zero.score = 0;
                record = combine_rewards(outcome, zero, cfg.reward.alpha);
                record.judge_failed = true;
            }
            record.problem_id = problem.id;
            record.group_id = problem.id;
            record.rollout_index = static_cast<int>(i);
            records.push_back(std::move(record));
        }
    }

    records = group_advantages(std::move(records), cfg.reward.group_size, cfg.reward.epsilon);
    manifest.groups = static_cast<long long>(records.size()) / cfg.reward.group_size;

    RewardRunConfig run_config;
    run_config.alpha = cfg.reward.alpha;
    run_config.group_size = cfg.reward.group_size;
    run_config.epsilon = cfg.reward.epsilon;
    run_config.prompt_version = prompt_version;
    run_config.judge_model = judge_cfg.model_name;
    const auto emitted = emit_reward_jsonl(records, run_config, out_path(cfg, "reward.jsonl"));
    write_reward_manifest(manifest, out_path(cfg, "reward_manifest.json"));
    write_config_snapshot(cfg);
    std::cout << "emitted " << emitted << " reward records (" << manifest.groups << " groups, "
              << manifest.parse_failure_count << " scoring failures)\n";
    return emitted;
}

namespace {

std::vector<std::pair<std::string, bool>> read_correctness(const std::filesystem::path& path) {
    std::vector<std::pair<std::string, bool>> out;
    for (const auto& obj : read_jsonl(path)) {
        if (!obj.contains("problem_id") || !obj.contains("correct")) {
            throw ValidationError(path.string() + ": lines need problem_id and correct fields");
        }
        out.emplace_back(obj.at("problem_id").get<std::string>(), obj.at("correct").get<bool>());
    }
    return out;
}

}  // namespace

CorrectionDelta cmd_delta(const PipelineConfig& cfg, const std::filesystem::path& t1,
                          const std::filesystem::path& t2) {
    cfg.validate();
    const auto a = read_correctness(t1);
    const auto b = read_correctness(t2);
    if (a.size() != b.size()) {
        throw ValidationError("correctness files differ in length: " + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()));
    }
    std::vector<bool> t1_flags;
    std::vector<bool> t2_flags;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].first != b[i].first) {
            throw ValidationError("correctness files misaligned at line " + std::to_string(i + 1) +
                                  ": " + a[i].first + " vs " + b[i].first);
        }
        t1_flags.push_back(a[i].second);
        t2_flags.push_back(b[i].second);
    }
    const auto delta = correction_delta(t1_flags, t2_flags);
    const auto table = render_delta_table(delta);
    write_text_file_atomic(out_path(cfg, "delta_table.txt"), table);
    write_config_snapshot(cfg);
    std::cout << table;
    return delta;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
    const auto text = read_text_file(path);
    std::vector<std::vector<std::string>> rows;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        if (!line.empty() && line.back() == ',') {
            cells.push_back("");
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace

void cmd_report(const PipelineConfig& cfg, const std::filesystem::path& metrics_csv,
                const std::filesystem::path& per_problem_csv) {
    cfg.validate();
    const auto metric_rows = read_csv(metrics_csv);
    if (metric_rows.size() < 2 || metric_rows.front().size() < 7) {
        throw ValidationError(metrics_csv.string() + " is not a metrics CSV");
    }
    std::vector<DatasetMetrics> rows;
    std::string lex_hash;
    for (std::size_t i = 1; i < metric_rows.size(); ++i) {
        const auto& cells = metric_rows[i];
        DatasetMetrics m;
        m.dataset = cells[0];
        auto parse_ratio = [&](const std::string& cell) {
            auto r = Rational::parse(cell);
            if (!r) throw ValidationError(metrics_csv.string() + ": bad number " + cell);
            return *r;
        };
        m.pass1_mean = parse_ratio(cells[1]);
        m.pass_k_mean = parse_ratio(cells[2]);
        if (!cells[3].empty()) m.err_ratio = parse_ratio(cells[3]);
        m.n_problems = static_cast<std::size_t>(std::stoll(cells[4]));
        m.n_samples = std::stoll(cells[5]);
        lex_hash = cells[6];
        m.pass1_pooled = m.pass1_mean;
        rows.push_back(std::move(m));
    }
    write_text_file_atomic(out_path(cfg, "metrics_table.txt"),
                           render_metrics_table(rows, lex_hash));

    // Figure-style aggregation: total reflections in correct vs incorrect
    const auto problem_rows = read_csv(per_problem_csv);
    std::map<std::string, std::pair<long long, long long>> bars;
    std::vector<std::string> order;
    for (std::size_t i = 1; i < problem_rows.size(); ++i) {
        const auto& cells = problem_rows[i];
        if (cells.size() < 6) {
            throw ValidationError(per_problem_csv.string() + " is not a per-problem CSV");
        }
        if (!bars.count(cells[0])) order.push_back(cells[0]);
        bars[cells[0]].first += std::stoll(cells[4]);
        bars[cells[0]].second += std::stoll(cells[5]);
    }
    std::string fig = "dataset,reflections_correct,reflections_incorrect,err\n";
    for (const auto& name : order) {
        const auto [correct, incorrect] = bars[name];
        const auto total = correct + incorrect;
        fig += name + "," + std::to_string(correct) + "," + std::to_string(incorrect) + ",";
        if (total > 0) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.6f", Rational(correct, total).to_double());
            fig += buf;
        }
        fig += "\n";
    }
    write_text_file_atomic(out_path(cfg, "reflection_bars.csv"), fig);
    write_config_snapshot(cfg);
    std::cout << "report written to " << cfg.run.out_dir << "\n";
}

}  // namespace reflectforge
