#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "takedown/corpus.hpp"
#include "takedown/eval.hpp"
#include "takedown/http_embed.hpp"
#include "takedown/membership.hpp"
#include "takedown/retrieval.hpp"
#include "takedown/unlearning.hpp"

// Orchestration behind the CLI subcommands. Everything here is a pure
// function of (inputs, seed): run ids derive from the config, reports are
// byte-stable across reruns, and wall-clock timing is quarantined in
// efficiency.json.
//
// Config file format: flat "key = value" lines, # comments, plus one
// "[arm NAME]" section per evaluated method. CLI flags override file values
// key-for-key.

namespace takedown {

struct ArmSpec {
    std::string name;
    std::string method;  // vanilla | system_prompt | memfree | topk_perturb | rcad | unlearn_ga | unlearn_gd
    std::map<std::string, std::string> params;

    std::string param(const std::string& key, const std::string& fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
    double param_num(const std::string& key, double fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : std::stod(it->second);
    }
};

struct RunConfig {
    std::string prepared_dir;  // output of `prepare`
    std::string out_dir;
    Scenario scenario = Scenario::memorization;
    std::uint64_t seed = 42;

    std::size_t hint_len = 100;
    std::size_t span_len = 200;
    std::size_t max_new = 200;
    // 0 = per-domain default: 1000/500 risk and 500/200 utility examples for
    // news/books respectively.
    std::size_t risk_examples = 0;
    std::size_t utility_examples = 0;
    std::size_t efficiency_examples = 10;
    std::size_t ngram_order = 4;
    double smoothing_k = 0.01;
    std::size_t finetune_repeats = 3;
    double rag_copy_weight = 0.8;
    std::size_t jobs = 1;
    bool sweep = false;
    bool run_utility_stage = true;
    bool run_efficiency_stage = true;

    std::vector<ArmSpec> arms;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["prepared_dir"] = prepared_dir;
        j["out_dir"] = out_dir;
        j["scenario"] = scenario_name(scenario);
        j["seed"] = seed;
        j["hint_len"] = hint_len;
        j["span_len"] = span_len;
        j["max_new"] = max_new;
        j["risk_examples"] = risk_examples;
        j["utility_examples"] = utility_examples;
        j["efficiency_examples"] = efficiency_examples;
        j["ngram_order"] = ngram_order;
        j["smoothing_k"] = smoothing_k;
        j["finetune_repeats"] = finetune_repeats;
        j["rag_copy_weight"] = rag_copy_weight;
        j["sweep"] = sweep;
        j["utility_stage"] = run_utility_stage;
        j["efficiency_stage"] = run_efficiency_stage;
        nlohmann::json arms_j = nlohmann::json::array();
        for (const auto& a : arms) {
            nlohmann::json aj;
            aj["name"] = a.name;
            aj["method"] = a.method;
            aj["params"] = a.params;
            arms_j.push_back(std::move(aj));
        }
        j["arms"] = std::move(arms_j);
        return j;
    }
};

// The embedder used for semantic similarity, the vector store and R-CAD
// retrieval: the deterministic built-in one, unless TAKEDOWN_EMBED_ENDPOINT
// points at an external embedding service speaking the wire protocol of
// http_embed.hpp. Reports are byte-deterministic only as far as the external
// service is.
inline std::shared_ptr<Embedder> make_embedder() {
    const char* spec = std::getenv(kEmbedEndpointEnvVar);
    if (spec && *spec) return std::make_shared<HttpEmbedder>(spec);
    return std::make_shared<BuiltinEmbedder>();
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool parse_bool(const std::string& v) { return v == "1" || v == "true" || v == "yes" || v == "on"; }

}  // namespace detail

// Applies one "key = value" assignment to the run config.
inline void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "prepared") cfg.prepared_dir = value;
    else if (key == "out") cfg.out_dir = value;
    else if (key == "scenario") cfg.scenario = value == "rag" ? Scenario::rag : Scenario::memorization;
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "hint_len") cfg.hint_len = std::stoul(value);
    else if (key == "span_len") cfg.span_len = std::stoul(value);
    else if (key == "max_new") cfg.max_new = std::stoul(value);
    else if (key == "risk_examples") cfg.risk_examples = std::stoul(value);
    else if (key == "utility_examples") cfg.utility_examples = std::stoul(value);
    else if (key == "efficiency_examples") cfg.efficiency_examples = std::stoul(value);
    else if (key == "ngram_order") cfg.ngram_order = std::stoul(value);
    else if (key == "smoothing_k") cfg.smoothing_k = std::stod(value);
    else if (key == "finetune_repeats") cfg.finetune_repeats = std::stoul(value);
    else if (key == "rag_copy_weight") cfg.rag_copy_weight = std::stod(value);
    else if (key == "jobs") cfg.jobs = std::stoul(value);
    else if (key == "sweep") cfg.sweep = detail::parse_bool(value);
    else if (key == "utility_stage") cfg.run_utility_stage = detail::parse_bool(value);
    else if (key == "efficiency_stage") cfg.run_efficiency_stage = detail::parse_bool(value);
    else throw std::runtime_error("unknown config key: " + key);
}

inline RunConfig parse_run_config(std::istream& in) {
    RunConfig cfg;
    ArmSpec* current_arm = nullptr;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            std::string header = detail::trim(t.substr(1, t.size() - 2));
            if (header.rfind("arm", 0) != 0)
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": unknown section [" + header + "]");
            ArmSpec arm;
            arm.name = detail::trim(header.substr(3));
            if (arm.name.empty())
                throw std::runtime_error("config line " + std::to_string(lineno) + ": arm needs a name");
            cfg.arms.push_back(arm);
            current_arm = &cfg.arms.back();
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(t.substr(0, eq));
        std::string value = detail::trim(t.substr(eq + 1));
        if (current_arm) {
            if (key == "method") current_arm->method = value;
            else current_arm->params[key] = value;
        } else {
            apply_config_key(cfg, key, value);
        }
    }
    for (const auto& a : cfg.arms)
        if (a.method.empty()) throw std::runtime_error("arm \"" + a.name + "\" has no method");
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse_run_config(in);
}

// ---------------------------------------------------------------------------
// prepare

struct PrepareOptions {
    std::size_t n_block = 1000;
    std::size_t n_retain = 1000;
    std::size_t ngram = 6;
    double fp_target = 0.001;
    bool force = false;
    // Optional hint/truth overlap filter from the split procedure; drops
    // documents whose hint and continuation share too much word-LCS.
    bool overlap_filter = false;
    double overlap_threshold = 0.5;
    std::size_t hint_len = 100;
    std::size_t span_len = 200;
};

struct PreparedPaths {
    std::string blocklisted;
    std::string retain;
    std::string in_domain;
    std::string bloom;
    std::string store;
};

inline PreparedPaths prepared_paths(const std::string& dir) {
    namespace fs = std::filesystem;
    return PreparedPaths{(fs::path(dir) / "blocklisted.jsonl").string(),
                         (fs::path(dir) / "retain.jsonl").string(),
                         (fs::path(dir) / "in_domain.jsonl").string(),
                         (fs::path(dir) / "blocklist.bloom").string(),
                         (fs::path(dir) / "store.jsonl").string()};
}

inline CorpusSplit cmd_prepare(const std::string& corpus_path, const std::string& out_dir,
                               const PrepareOptions& opt) {
    namespace fs = std::filesystem;
    if (fs::exists(out_dir) && !fs::is_empty(out_dir) && !opt.force)
        throw std::runtime_error("output directory " + out_dir + " is not empty (use --force)");
    fs::create_directories(out_dir);

    std::vector<Document> docs = load_corpus(corpus_path);
    if (opt.overlap_filter) {
        std::vector<Document> kept;
        for (auto& d : docs) {
            std::vector<std::string> tokens = split_whitespace(d.text);
            if (tokens.size() < opt.hint_len + 1) {
                kept.push_back(std::move(d));
                continue;
            }
            Example ex = make_example(d, opt.hint_len, opt.span_len);
            double overlap = static_cast<double>(lcs_word_len(ex.hint_text(), ex.truth_text())) /
                             static_cast<double>(std::max<std::size_t>(ex.ground_truth.size(), 1));
            if (overlap < opt.overlap_threshold) kept.push_back(std::move(d));
        }
        docs = std::move(kept);
    }
    CorpusSplit split = split_corpus(std::move(docs), opt.n_block, opt.n_retain);

    PreparedPaths paths = prepared_paths(out_dir);
    save_corpus(split.blocklisted, paths.blocklisted);
    save_corpus(split.retain, paths.retain);
    save_corpus(split.in_domain, paths.in_domain);

    BloomFilter filter = BloomFilter::build(split.blocklisted, opt.ngram, opt.fp_target);
    filter.save(paths.bloom);

    std::shared_ptr<Embedder> embedder = make_embedder();
    VectorStore store = VectorStore::build(split.blocklisted, *embedder);
    store.save(paths.store);
    return split;
}

// ---------------------------------------------------------------------------
// run

struct PreparedData {
    CorpusSplit split;
    std::shared_ptr<VectorStore> store;
};

inline PreparedData load_prepared(const std::string& dir) {
    PreparedPaths paths = prepared_paths(dir);
    PreparedData data;
    data.split.blocklisted = load_corpus(paths.blocklisted);
    data.split.retain = load_corpus(paths.retain);
    data.split.in_domain = load_corpus(paths.in_domain);
    data.store = std::make_shared<VectorStore>(VectorStore::load(paths.store));
    data.store->attach_texts(data.split.blocklisted);
    return data;
}

namespace detail {

// Example covering the whole document: hint plus everything after it.
inline Example full_example(const Document& doc, std::size_t hint_len) {
    return make_example(doc, hint_len, std::numeric_limits<std::size_t>::max());
}

inline std::vector<Example> make_examples(const std::vector<Document>& docs, std::size_t hint_len,
                                          std::size_t span_len, std::size_t limit) {
    std::vector<Example> out;
    for (const auto& d : docs) {
        if (out.size() >= limit) break;
        std::vector<std::string> tokens = split_whitespace(d.text);
        if (tokens.size() < hint_len + 1) continue;  // too short for this hint length
        out.push_back(make_example(d, hint_len, span_len));
    }
    return out;
}

}  // namespace detail

// Expands an arm spec into the evaluated arms, applying the hyperparameter
// sweep grids when requested: memfree n in {6,12,24}, top-k sigma in
// {0.5,1,3}, rcad alpha in {1,2,3}, and system_prompt over all six shipped
// presets. Arms that pin the swept key explicitly are kept as-is.
inline std::vector<ArmSpec> expand_sweep(const std::vector<ArmSpec>& arms, bool sweep) {
    if (!sweep) return arms;
    std::vector<ArmSpec> out;
    for (const auto& a : arms) {
        auto add_variants = [&](const char* key, const std::vector<std::string>& values) {
            if (a.params.count(key)) {
                out.push_back(a);
                return;
            }
            for (const std::string& v : values) {
                ArmSpec s = a;
                s.name = a.name + "-" + v;
                s.params[key] = v;
                out.push_back(std::move(s));
            }
        };
        if (a.method == "memfree") {
            add_variants("ngram", {"6", "12", "24"});
        } else if (a.method == "topk_perturb") {
            add_variants("sigma", {"0.5", "1", "3"});
        } else if (a.method == "rcad") {
            add_variants("alpha", {"1", "2", "3"});
        } else if (a.method == "system_prompt") {
            std::vector<std::string> presets;
            for (const auto& p : system_prompt_presets()) presets.push_back(p.id);
            add_variants("preset", presets);
        } else {
            out.push_back(a);
        }
    }
    return out;
}

struct BuiltArms {
    std::vector<MethodArm> arms;
    // Owners keeping models and filters alive for the arms' lifetime.
    std::vector<std::shared_ptr<const void>> keepalive;
};

// Materializes arm specs against the scenario model and prepared data.
inline BuiltArms build_arms(const std::vector<ArmSpec>& specs, const RunConfig& cfg,
                            std::shared_ptr<const NGramLM> scenario_model, const PreparedData& data,
                            std::shared_ptr<const Embedder> embedder) {
    BuiltArms built;
    for (const auto& spec : specs) {
        MethodArm arm;
        arm.name = spec.name;
        arm.model = scenario_model;
        if (spec.method == "vanilla") {
            // no interventions
        } else if (spec.method == "system_prompt") {
            std::string preset = spec.param("preset", "bing");
            (void)system_prompt_text(preset);  // validate before any generation runs
            arm.interventions.push_back(SystemPromptCfg{preset});
        } else if (spec.method == "memfree") {
            std::size_t n = static_cast<std::size_t>(spec.param_num("ngram", 6));
            std::shared_ptr<const NgramMembership> filter;
            if (detail::parse_bool(spec.param("exact", "false"))) {
                filter = std::make_shared<ExactNgramSet>(ExactNgramSet::build(data.split.blocklisted, n));
            } else {
                double fp = spec.param_num("fp_target", 0.001);
                filter = std::make_shared<BloomFilter>(BloomFilter::build(data.split.blocklisted, n, fp));
            }
            built.keepalive.push_back(filter);
            arm.interventions.push_back(MemFreeCfg{filter});
        } else if (spec.method == "topk_perturb") {
            TopKPerturbCfg tk;
            tk.k = static_cast<std::size_t>(spec.param_num("k", 50));
            tk.mu = spec.param_num("mu", 0.0);
            tk.sigma = spec.param_num("sigma", 1.0);
            arm.interventions.push_back(tk);
        } else if (spec.method == "rcad") {
            RcadCfg rc;
            rc.alpha = spec.param_num("alpha", 1.0);
            rc.distance_threshold = spec.param_num("threshold", 0.15);
            rc.context_weight = spec.param_num("context_weight", cfg.rag_copy_weight);
            rc.store = data.store;
            rc.embedder = embedder;
            arm.interventions.push_back(rc);
        } else if (spec.method == "unlearn_ga" || spec.method == "unlearn_gd") {
            UnlearningBatch batch;
            for (const auto& d : data.split.blocklisted)
                if (split_whitespace(d.text).size() >= cfg.hint_len + 1)
                    batch.forget.push_back(detail::full_example(d, cfg.hint_len));
            for (const auto& d : data.split.retain)
                if (split_whitespace(d.text).size() >= cfg.hint_len + 1)
                    batch.retain.push_back(detail::full_example(d, cfg.hint_len));
            UnlearnHyperparams hp;
            hp.lr_analog = spec.param_num("lr_analog", 1.0);
            hp.epochs = static_cast<std::size_t>(spec.param_num("epochs", 1));
            CountUnlearnMode mode =
                spec.method == "unlearn_gd" ? CountUnlearnMode::gd : CountUnlearnMode::ga;
            auto unlearned =
                std::make_shared<NGramLM>(count_unlearn(*scenario_model, batch, hp, mode));
            built.keepalive.push_back(unlearned);
            arm.model = unlearned;
        } else {
            throw std::runtime_error("unknown arm method \"" + spec.method + "\" for arm \"" +
                                     spec.name + "\"");
        }
        built.arms.push_back(std::move(arm));
    }
    return built;
}

// Base model for the scenario: counts from retain + in-domain documents,
// blocklisted tokens added to the vocabulary so context copying can encode
// them. The memorization scenario additionally fine-tunes on the blocklist.
inline std::shared_ptr<NGramLM> build_scenario_model(const RunConfig& cfg, const PreparedData& data) {
    std::vector<Document> training = data.split.retain;
    training.insert(training.end(), data.split.in_domain.begin(), data.split.in_domain.end());
    if (training.empty())
        throw std::runtime_error("prepared corpus has no retain or in-domain documents to train on");
    NGramLM base = NGramLM::train(training, cfg.ngram_order, cfg.smoothing_k);
    for (const auto& d : data.split.blocklisted)
        for (const auto& w : split_whitespace(d.text)) base.mutable_vocab().add(w);
    if (cfg.scenario == Scenario::memorization)
        return std::make_shared<NGramLM>(base.finetuned(data.split.blocklisted, cfg.finetune_repeats));
    return std::make_shared<NGramLM>(std::move(base));
}

// Deterministic run id: a hash of the canonical config JSON.
inline std::string derive_run_id(const RunConfig& cfg) {
    std::string dump = cfg.to_json().dump();
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash_bytes(dump, 0x52554e)));
    return std::string("run-") + buf;
}

inline EvalRun cmd_run(const RunConfig& cfg, std::ostream& log = std::cerr) {
    if (cfg.prepared_dir.empty()) throw std::runtime_error("config is missing `prepared`");
    if (cfg.out_dir.empty()) throw std::runtime_error("config is missing `out`");
    if (cfg.arms.empty()) throw std::runtime_error("config declares no [arm ...] sections");

    PreparedData data = load_prepared(cfg.prepared_dir);
    std::shared_ptr<NGramLM> scenario_model = build_scenario_model(cfg, data);
    std::shared_ptr<Embedder> embedder = make_embedder();

    std::vector<ArmSpec> specs = expand_sweep(cfg.arms, cfg.sweep);
    BuiltArms built = build_arms(specs, cfg, scenario_model, data, embedder);

    ScenarioConfig scfg;
    scfg.scenario = cfg.scenario;
    scfg.max_new = cfg.max_new;
    scfg.rag_copy_weight = cfg.rag_copy_weight;
    scfg.seed = cfg.seed;
    scfg.jobs = cfg.jobs;

    const bool books = !data.split.blocklisted.empty() && data.split.blocklisted[0].domain == Domain::books;
    const std::size_t risk_limit = cfg.risk_examples ? cfg.risk_examples : (books ? 500 : 1000);
    const std::size_t utility_limit = cfg.utility_examples ? cfg.utility_examples : (books ? 200 : 500);

    std::vector<Example> risk_examples =
        detail::make_examples(data.split.blocklisted, cfg.hint_len, cfg.span_len, risk_limit);
    if (risk_examples.empty())
        throw std::runtime_error("no blocklisted document is long enough for hint_len " +
                                 std::to_string(cfg.hint_len));

    EvalRun run;
    run.run_id = derive_run_id(cfg);
    run.scenario = cfg.scenario;
    run.seed = cfg.seed;
    run.config_meta = cfg.to_json();

    // The run seed governs every randomness source, metric hashing salts
    // included.
    RiskScoreOptions score_opts;
    score_opts.minhash_seed = detail::derive_seed(cfg.seed, 0x6d68ull, 0);

    log << "risk: " << built.arms.size() << " arm(s) x " << risk_examples.size() << " example(s)\n";
    run.risk = run_risk(built.arms, risk_examples, scfg, *embedder, score_opts);
    if (built.arms.size() >= 2) {
        run.win_rate = win_rates(run.risk);
    } else {
        log << "warning: win rate skipped, needs at least 2 arms\n";
    }

    if (cfg.run_utility_stage) {
        UtilityKind kind = books ? UtilityKind::rouge_l : UtilityKind::qa_f1;
        const char* score_name = books ? "rougeL_recall" : "qa_f1";
        std::size_t answer_len = books ? 64 : 16;
        auto tasks_of = [&](const std::vector<Document>& docs) {
            return books ? summary_tasks_from(docs, utility_limit)
                         : qa_tasks_from(docs, utility_limit);
        };
        std::vector<UtilityTask> blocked_tasks = tasks_of(data.split.blocklisted);
        std::vector<UtilityTask> in_domain_tasks = tasks_of(data.split.in_domain);
        for (const auto& arm : built.arms) {
            if (!blocked_tasks.empty())
                run.utility[arm.name]["blocklisted"] = {
                    score_name, run_utility(arm, blocked_tasks, kind, scfg, answer_len)};
            if (!in_domain_tasks.empty())
                run.utility[arm.name]["in_domain"] = {
                    score_name, run_utility(arm, in_domain_tasks, kind, scfg, answer_len)};
        }
        if (blocked_tasks.empty() && in_domain_tasks.empty())
            log << "warning: utility skipped, no QA pairs or reference summaries in the corpus\n";
    }

    if (cfg.run_efficiency_stage) {
        std::vector<Example> eff_examples(
            risk_examples.begin(),
            risk_examples.begin() +
                static_cast<std::ptrdiff_t>(std::min(cfg.efficiency_examples, risk_examples.size())));
        ScenarioConfig ecfg = scfg;
        ecfg.jobs = 1;  // timing is single-threaded
        run.efficiency = run_efficiency(built.arms, eff_examples, ecfg);
    }

    emit_report(run, cfg.out_dir);
    return run;
}

// ---------------------------------------------------------------------------
// report

// Prints the summary table and rewrites distributions.csv from details.csv
// when it is missing. Reading a finished run is idempotent.
inline void cmd_report(const std::string& run_dir, std::ostream& out = std::cout) {
    namespace fs = std::filesystem;
    fs::path summary_path = fs::path(run_dir) / "summary.json";
    std::ifstream in(summary_path);
    if (!in) throw std::runtime_error("missing run file: " + summary_path.string());
    nlohmann::json j = nlohmann::json::parse(in);

    nlohmann::json eff = nlohmann::json::object();
    {
        std::ifstream ein(fs::path(run_dir) / "efficiency.json");
        if (ein) eff = nlohmann::json::parse(ein);
    }

    out << "run " << j.value("run_id", "?") << "  scenario=" << j.value("scenario", "?")
        << "  seed=" << j.value("seed", 0) << "\n\n";
    out << "method                     win_rate   blocklisted     in_domain    speed\n";
    out << "-------------------------------------------------------------------------\n";
    for (const auto& method : j.at("methods")) {
        std::string name = method.get<std::string>();
        auto fmt = [&](double v) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3f", v);
            return std::string(buf);
        };
        std::string win = "-";
        if (j.contains("win_rate") && j["win_rate"].contains(name))
            win = fmt(j["win_rate"][name].get<double>());
        auto util_cell = [&](const char* split) -> std::string {
            if (!j.contains("utility") || !j["utility"].contains(name) ||
                !j["utility"][name].contains(split))
                return "-";
            const auto& u = j["utility"][name][split];
            return fmt(u.at("mean").get<double>()) + "±" +
                   fmt((u.at("ci_hi").get<double>() - u.at("ci_lo").get<double>()) / 2.0);
        };
        std::string speed = "-";
        if (eff.contains(name)) speed = fmt(eff[name].at("calibrated_speed_ratio").get<double>()) + "x";
        char row[256];
        std::snprintf(row, sizeof(row), "%-26s %8s %13s %13s %8s\n", name.c_str(), win.c_str(),
                      util_cell("blocklisted").c_str(), util_cell("in_domain").c_str(), speed.c_str());
        out << row;
    }

    fs::path dist_path = fs::path(run_dir) / "distributions.csv";
    if (!fs::exists(dist_path)) {
        std::ifstream din(fs::path(run_dir) / "details.csv");
        if (!din) throw std::runtime_error("missing run file: " + (fs::path(run_dir) / "details.csv").string());
        // details rows are run_id,scenario,method,example_id,metric,value
        struct Row {
            std::string metric, method, example_id, value;
        };
        std::vector<Row> rows;
        std::string line;
        std::getline(din, line);  // header
        while (std::getline(din, line)) {
            std::vector<std::string> f;
            std::string cur;
            for (char c : line) {
                if (c == ',') {
                    f.push_back(cur);
                    cur.clear();
                } else {
                    cur.push_back(c);
                }
            }
            f.push_back(cur);
            if (f.size() == 6) rows.push_back(Row{f[4], f[2], f[3], f[5]});
        }
        std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
            return a.metric < b.metric;
        });
        std::ofstream dout(dist_path, std::ios::binary);
        dout << "metric,method,example_id,value\n";
        for (const auto& r : rows)
            dout << r.metric << "," << r.method << "," << r.example_id << "," << r.value << "\n";
        out << "\nwrote " << dist_path.string() << "\n";
    }
}

}  // namespace takedown
