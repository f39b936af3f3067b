// Command-line front end: prepare a corpus, run evaluations, print reports.
//
//   takedown-eval prepare --corpus docs.jsonl --out prepared/
//   takedown-eval run --config run.cfg [overrides...]
//   takedown-eval risk|utility|efficiency --config run.cfg   (single stage)
//   takedown-eval report --run out/

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "takedown/pipeline.hpp"

namespace {

struct RunCliOverrides {
    std::string config_path;
    std::vector<std::string> sets;  // key=value overrides
    std::string prepared, out, scenario;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t jobs = 0;
    bool sweep = false;
};

takedown::RunConfig resolve_run_config(const RunCliOverrides& cli) {
    takedown::RunConfig cfg = takedown::load_run_config(cli.config_path);
    if (!cli.prepared.empty()) cfg.prepared_dir = cli.prepared;
    if (!cli.out.empty()) cfg.out_dir = cli.out;
    if (!cli.scenario.empty())
        cfg.scenario = cli.scenario == "rag" ? takedown::Scenario::rag : takedown::Scenario::memorization;
    if (cli.seed_set) cfg.seed = cli.seed;
    if (cli.jobs > 0) cfg.jobs = cli.jobs;
    if (cli.sweep) cfg.sweep = true;
    for (const auto& kv : cli.sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got: " + kv);
        takedown::apply_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

void add_run_options(CLI::App* cmd, RunCliOverrides& cli) {
    cmd->add_option("--config", cli.config_path, "run config file")->required();
    cmd->add_option("--prepared", cli.prepared, "prepared split directory (overrides config)");
    cmd->add_option("--out", cli.out, "report output directory (overrides config)");
    cmd->add_option("--scenario", cli.scenario, "memorization | rag")
        ->check(CLI::IsMember({"memorization", "rag"}));
    cmd->add_option("--seed", cli.seed, "run seed")->each([&](const std::string&) { cli.seed_set = true; });
    cmd->add_option("--jobs", cli.jobs, "parallel scoring threads");
    cmd->add_flag("--sweep", cli.sweep, "expand hyperparameter sweep grids into arms");
    cmd->add_option("--set", cli.sets, "override any config key, e.g. --set max_new=100");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"copyright takedown evaluation toolkit"};
    app.require_subcommand(1);

    // prepare
    std::string corpus_path, prepare_out;
    takedown::PrepareOptions popt;
    CLI::App* prepare = app.add_subcommand("prepare", "split a corpus and build blocklist artifacts");
    prepare->add_option("--corpus", corpus_path, "JSONL corpus")->required();
    prepare->add_option("--out", prepare_out, "output directory")->required();
    prepare->add_option("--n-block", popt.n_block, "blocklisted document count");
    prepare->add_option("--n-retain", popt.n_retain, "retain document count");
    prepare->add_option("--ngram", popt.ngram, "bloom filter n-gram size");
    prepare->add_option("--fp-target", popt.fp_target, "bloom filter false positive target");
    prepare->add_flag("--force", popt.force, "overwrite a non-empty output directory");
    prepare->add_flag("--overlap-filter", popt.overlap_filter,
                      "drop documents whose hint and continuation overlap heavily");
    prepare->add_option("--overlap-threshold", popt.overlap_threshold, "word-LCS overlap cutoff");
    prepare->add_option("--hint-len", popt.hint_len, "hint length for the overlap filter");

    // run + single-stage variants
    RunCliOverrides run_cli, risk_cli, utility_cli, efficiency_cli;
    CLI::App* run = app.add_subcommand("run", "risk + utility + efficiency, then emit reports");
    add_run_options(run, run_cli);
    CLI::App* risk = app.add_subcommand("risk", "risk stage only");
    add_run_options(risk, risk_cli);
    CLI::App* utility = app.add_subcommand("utility", "risk + utility stages");
    add_run_options(utility, utility_cli);
    CLI::App* efficiency = app.add_subcommand("efficiency", "risk + efficiency stages");
    add_run_options(efficiency, efficiency_cli);

    // report
    std::string run_dir;
    CLI::App* report = app.add_subcommand("report", "print the summary table for a finished run");
    report->add_option("--run", run_dir, "run output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (prepare->parsed()) {
            takedown::CorpusSplit split = takedown::cmd_prepare(corpus_path, prepare_out, popt);
            std::cout << "prepared " << prepare_out << ": " << split.blocklisted.size()
                      << " blocklisted, " << split.retain.size() << " retain, "
                      << split.in_domain.size() << " in-domain\n";
        } else if (run->parsed() || risk->parsed() || utility->parsed() || efficiency->parsed()) {
            RunCliOverrides& cli = run->parsed()      ? run_cli
                                   : risk->parsed()   ? risk_cli
                                   : utility->parsed() ? utility_cli
                                                       : efficiency_cli;
            takedown::RunConfig cfg = resolve_run_config(cli);
            if (risk->parsed()) {
                cfg.run_utility_stage = false;
                cfg.run_efficiency_stage = false;
            } else if (utility->parsed()) {
                cfg.run_efficiency_stage = false;
            } else if (efficiency->parsed()) {
                cfg.run_utility_stage = false;
            }
            takedown::EvalRun result = takedown::cmd_run(cfg);
            std::cout << "run " << result.run_id << " written to " << cfg.out_dir << "\n";
        } else if (report->parsed()) {
            takedown::cmd_report(run_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
