#include "reflectforge/commands.hpp"
#include "reflectforge/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string cache_dir;
    std::string mock_fixture;
    std::string out_dir;
    std::int64_t seed = -1;
};

reflectforge::PipelineConfig resolve_config(const GlobalArgs& args) {
    reflectforge::PipelineConfig cfg;
    if (!args.config_path.empty()) {
        cfg = reflectforge::PipelineConfig::load(args.config_path);
    }
    if (!args.cache_dir.empty()) cfg.run.cache_dir = args.cache_dir;
    if (!args.out_dir.empty()) cfg.run.out_dir = args.out_dir;
    if (!args.mock_fixture.empty()) cfg.run.mock_fixture = args.mock_fixture;
    if (args.seed >= 0) cfg.run.seed = static_cast<std::uint64_t>(args.seed);
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reflectforge: reflection measurement, self-critique dataset construction, "
                 "and reward export for reasoning traces"};
    app.require_subcommand(1);

    GlobalArgs globals;
    app.add_option("--config", globals.config_path, "TOML config file");
    app.add_option("--cache-dir", globals.cache_dir, "response cache directory");
    app.add_option("--out-dir", globals.out_dir, "output directory");
    app.add_option("--seed", globals.seed, "seed for subsampling");
    app.add_option("--mock", globals.mock_fixture, "scripted mock endpoint fixture (offline mode)");

    std::string dataset;
    std::string traces_path;
    std::string detect_out = "detected.jsonl";
    int eval_k = 16;
    std::string t1_path;
    std::string t2_path;
    std::string metrics_csv;
    std::string per_problem_csv;
    reflectforge::ScftOptions scft_options;
    reflectforge::RewardOptions reward_options;
    std::int64_t target_ic = -1;
    std::int64_t self_distill_size = -1;
    std::string pairs_path;
    std::string trajectories_path;

    auto* generate = app.add_subcommand("generate", "sample responses per problem into the cache");
    generate->add_option("--dataset", dataset, "problems JSONL")->required();

    auto* critique = app.add_subcommand("critique", "generate a self-critique per cached response");
    critique->add_option("--dataset", dataset, "problems JSONL")->required();

    auto* detect = app.add_subcommand("detect", "detect reflection keywords in a trace file");
    detect->add_option("--traces", traces_path, "traces JSONL")->required();
    detect->add_option("--out", detect_out, "output JSONL");

    auto* eval = app.add_subcommand("eval", "compute pass@1, pass@k, and ERR from the cache");
    eval->add_option("--dataset", dataset, "problems JSONL")->required();
    eval->add_option("--k", eval_k, "k for pass@k (clamped to n_samples)");

    auto* build = app.add_subcommand("build-scft", "filter, balance, and emit the SCFT dataset");
    build->add_option("--dataset", dataset, "problems JSONL")->required();
    build->add_option("--target-ic", target_ic, "exact number of i->c critiques to keep");
    build->add_option("--cc-list", scft_options.cc_list,
                      "sweep of c->c counts, one dataset per value")
        ->delimiter(',');
    build->add_flag("--self-distill", scft_options.self_distill,
                    "also emit the size-matched self-distillation baseline");
    build->add_option("--self-distill-size", self_distill_size,
                      "override the self-distill size match");
    build->add_option("--pairs", pairs_path,
                      "{problem_id, response, critique} JSONL instead of the cache");

    auto* judge = app.add_subcommand("judge", "score cached trajectories with the judge model");
    judge->add_option("--dataset", dataset, "problems JSONL")->required();

    auto* reward = app.add_subcommand("reward", "combine rewards and export GRPO advantages");
    reward->add_option("--dataset", dataset, "problems JSONL")->required();
    reward->add_option("--trajectories", trajectories_path,
                       "{problem_id, raw_text} JSONL instead of the cache");

    auto* delta = app.add_subcommand("delta", "correction deltas between two correctness files");
    delta->add_option("--t1", t1_path, "correctness JSONL at t1")->required();
    delta->add_option("--t2", t2_path, "correctness JSONL at t2")->required();

    auto* report = app.add_subcommand("report", "re-render tables and figure data from CSVs");
    report->add_option("--metrics", metrics_csv, "metrics CSV from eval")->required();
    report->add_option("--per-problem", per_problem_csv, "per-problem CSV from eval")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const auto cfg = resolve_config(globals);
        if (target_ic >= 0) scft_options.target_ic = target_ic;
        if (self_distill_size >= 0) scft_options.self_distill_size = self_distill_size;
        if (!pairs_path.empty()) scft_options.pairs = pairs_path;
        if (!trajectories_path.empty()) reward_options.trajectories = trajectories_path;

        if (generate->parsed()) {
            reflectforge::cmd_generate(cfg, dataset);
        } else if (critique->parsed()) {
            reflectforge::cmd_critique(cfg, dataset);
        } else if (detect->parsed()) {
            reflectforge::cmd_detect(cfg, traces_path, detect_out);
        } else if (eval->parsed()) {
            reflectforge::cmd_eval(cfg, dataset, eval_k);
        } else if (build->parsed()) {
            reflectforge::cmd_build_scft(cfg, dataset, scft_options);
        } else if (judge->parsed()) {
            reflectforge::cmd_judge(cfg, dataset);
        } else if (reward->parsed()) {
            reflectforge::cmd_reward(cfg, dataset, reward_options);
        } else if (delta->parsed()) {
            reflectforge::cmd_delta(cfg, t1_path, t2_path);
        } else if (report->parsed()) {
            reflectforge::cmd_report(cfg, metrics_csv, per_problem_csv);
        }
        return 0;
    } catch (const reflectforge::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
