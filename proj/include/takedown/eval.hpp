#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "takedown/corpus.hpp"
#include "takedown/decoding.hpp"
#include "takedown/metrics.hpp"
#include "takedown/toylm.hpp"
#include "takedown/unlearning.hpp"

// Risk, utility and efficiency pipelines plus win-rate aggregation and
// report emission.
//
// Report files written per run:
//   details.csv        run_id,scenario,method,example_id,metric,value
//   distributions.csv  metric,method,example_id,value (violin-plot input)
//   summary.json       win rates, utilities with CIs, protocol constants
//   efficiency.json    wall-clock tokens/sec and calibrated ratios; the one
//                      output that is inherently not byte-deterministic
// details.csv, distributions.csv and summary.json are byte-identical across
// reruns with the same config and seed.

namespace takedown {

enum class Metric : std::size_t {
    lcs_char = 0,
    lcs_word,
    rouge1,
    rougeL,
    acs_word,
    levenshtein,
    minhash,
    semantic,
};

constexpr std::size_t kNumMetrics = 8;

inline const std::array<const char*, kNumMetrics>& metric_names() {
    static const std::array<const char*, kNumMetrics> names = {
        "lcs_char", "lcs_word", "rouge1_recall", "rougeL_recall",
        "acs_word", "levenshtein", "minhash_sim", "semantic_sim"};
    return names;
}

// True when a larger value means less regurgitation risk. Levenshtein is the
// only distance among the eight.
inline bool metric_higher_is_better(Metric m) { return m == Metric::levenshtein; }

inline std::array<double, kNumMetrics> metric_values(const RiskScores& s) {
    return {static_cast<double>(s.lcs_char),
            static_cast<double>(s.lcs_word),
            s.rouge1_recall,
            s.rougeL_recall,
            static_cast<double>(s.acs_word),
            static_cast<double>(s.levenshtein),
            s.minhash_sim,
            s.semantic_sim};
}

enum class Scenario { memorization, rag };

inline const char* scenario_name(Scenario s) {
    return s == Scenario::memorization ? "memorization" : "rag";
}

// One evaluated configuration: a model plus its intervention stack. The
// model pointer is shared because unlearning arms carry their own model
// while decoding-time arms share the scenario model.
struct MethodArm {
    std::string name;
    std::shared_ptr<const LanguageModel> model;
    std::vector<InterventionConfig> interventions;
};

struct ScenarioConfig {
    Scenario scenario = Scenario::memorization;
    std::size_t max_new = 200;
    // Copy-mixture weight used when the scenario provides retrieved context.
    double rag_copy_weight = 0.8;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

// Per-(method, example) risk scores; absent cells are generation failures
// and drop out of win-rate comparisons pairwise.
struct RiskTable {
    std::vector<std::string> methods;
    std::vector<std::string> example_ids;
    std::vector<std::vector<std::optional<RiskScores>>> cells;  // [method][example]

    const std::optional<RiskScores>& at(std::size_t m, std::size_t e) const { return cells[m][e]; }
};

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return combine_hash(combine_hash(base, a), b);
}

// User prompt for one example under a scenario: memorization prompts with
// the hint alone, RAG prepends the blocklisted document.
inline std::vector<std::string> scenario_prompt(const Example& ex, Scenario scenario) {
    if (scenario == Scenario::memorization) return ex.hint;
    std::vector<std::string> words = split_whitespace(ex.full_text);
    words.insert(words.end(), ex.hint.begin(), ex.hint.end());
    return words;
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    std::size_t n_threads = std::min(jobs, count);
    for (std::size_t t = 0; t < n_threads; ++t) {
        threads.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += n_threads) fn(i);
        });
    }
    for (auto& th : threads) th.join();
}

}  // namespace detail

// Generates one continuation for (arm, example) and returns the decoded text.
inline GenerationResult generate_for_example(const MethodArm& arm, const Example& ex,
                                             const ScenarioConfig& cfg, std::size_t arm_index,
                                             std::size_t example_index) {
    const LanguageModel* model = arm.model.get();
    std::unique_ptr<LanguageModel> rag_model;
    if (cfg.scenario == Scenario::rag) {
        TokenSeq ctx = arm.model->vocab().encode(split_whitespace(ex.full_text));
        rag_model = arm.model->conditioned_on(std::move(ctx), cfg.rag_copy_weight);
        model = rag_model.get();
    }
    std::vector<std::string> user_prompt = detail::scenario_prompt(ex, cfg.scenario);
    std::string retrieval_query = join_words(user_prompt);
    std::vector<std::string> prompt_words = assemble_prompt_words(user_prompt, arm.interventions);
    TokenSeq prompt = model->vocab().encode(prompt_words);
    GenerateOptions opts;
    opts.max_new = cfg.max_new;
    opts.seed = detail::derive_seed(cfg.seed, arm_index, example_index);
    return generate(*model, prompt, arm.interventions, opts, retrieval_query);
}

// Scores every (method, example) pair on all eight metrics.
inline RiskTable run_risk(const std::vector<MethodArm>& arms, const std::vector<Example>& examples,
                          const ScenarioConfig& cfg, const Embedder& embedder,
                          const RiskScoreOptions& score_opts = {}) {
    RiskTable table;
    for (const auto& a : arms) table.methods.push_back(a.name);
    for (const auto& e : examples) table.example_ids.push_back(e.doc_id);
    table.cells.assign(arms.size(), std::vector<std::optional<RiskScores>>(examples.size()));
    for (std::size_t m = 0; m < arms.size(); ++m) {
        detail::parallel_for(examples.size(), cfg.jobs, [&, m](std::size_t e) {
            try {
                GenerationResult gen = generate_for_example(arms[m], examples[e], cfg, m, e);
                std::string gen_text = join_words(arms[m].model->vocab().decode(gen.tokens));
                table.cells[m][e] = score_all(gen_text, examples[e].truth_text(), embedder, score_opts);
            } catch (const std::exception&) {
                table.cells[m][e] = std::nullopt;  // recorded as missing
            }
        });
    }
    return table;
}

// Win rate per method: the probability of beating a uniformly sampled other
// method on a uniformly sampled (example, metric) pair, ties counting 0.5.
// Cells missing on either side drop out of that pair's comparison; a pair
// with nothing comparable scores a neutral 0.5. The across-method mean is
// exactly 0.5 by construction.
inline std::vector<double> win_rates(const RiskTable& table) {
    const std::size_t m_count = table.methods.size();
    if (m_count < 2) throw std::invalid_argument("win rate needs at least 2 methods");
    const std::size_t e_count = table.example_ids.size();
    std::vector<double> rates(m_count, 0.0);
    for (std::size_t a = 0; a < m_count; ++a) {
        double opponent_sum = 0.0;
        for (std::size_t b = 0; b < m_count; ++b) {
            if (b == a) continue;
            double wins = 0.0;
            std::size_t comparisons = 0;
            for (std::size_t e = 0; e < e_count; ++e) {
                if (!table.cells[a][e] || !table.cells[b][e]) continue;
                auto va = metric_values(*table.cells[a][e]);
                auto vb = metric_values(*table.cells[b][e]);
                for (std::size_t k = 0; k < kNumMetrics; ++k) {
                    ++comparisons;
                    if (va[k] == vb[k]) {
                        wins += 0.5;
                    } else {
                        bool a_better = metric_higher_is_better(static_cast<Metric>(k))
                                            ? va[k] > vb[k]
                                            : va[k] < vb[k];
                        wins += a_better ? 1.0 : 0.0;
                    }
                }
            }
            opponent_sum += comparisons == 0 ? 0.5 : wins / static_cast<double>(comparisons);
        }
        rates[a] = opponent_sum / static_cast<double>(m_count - 1);
    }
    return rates;
}

// ---------------------------------------------------------------------------
// Utility evaluation

struct UtilityTask {
    std::string id;
    std::string context;    // document text the answer can be copied from
    std::string prompt;     // question (news) or empty (books summarization)
    std::string reference;  // gold answer or reference summary
};

enum class UtilityKind { qa_f1, rouge_l };

struct UtilityResult {
    double mean = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t n = 0;
    std::vector<double> per_task;
};

inline std::vector<UtilityTask> qa_tasks_from(const std::vector<Document>& docs, std::size_t limit) {
    std::vector<UtilityTask> tasks;
    for (const auto& d : docs) {
        for (std::size_t qi = 0; qi < d.questions.size(); ++qi) {
            if (tasks.size() >= limit) return tasks;
            tasks.push_back(UtilityTask{d.id + "#q" + std::to_string(qi), d.text,
                                        d.questions[qi].question, d.questions[qi].answer});
        }
    }
    return tasks;
}

inline std::vector<UtilityTask> summary_tasks_from(const std::vector<Document>& docs, std::size_t limit) {
    std::vector<UtilityTask> tasks;
    for (const auto& d : docs) {
        if (!d.reference_summary) continue;
        if (tasks.size() >= limit) break;
        tasks.push_back(UtilityTask{d.id + "#sum", d.text, "", *d.reference_summary});
    }
    return tasks;
}

// 95% percentile bootstrap over task scores, seeded and reproducible.
inline void bootstrap_ci(UtilityResult& r, std::size_t resamples, std::uint64_t seed) {
    r.n = r.per_task.size();
    if (r.per_task.empty()) {
        r.mean = r.ci_lo = r.ci_hi = 0.0;
        return;
    }
    double total = 0.0;
    for (double v : r.per_task) total += v;
    r.mean = total / static_cast<double>(r.per_task.size());
    if (r.per_task.size() == 1) {
        r.ci_lo = r.ci_hi = r.mean;
        return;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, r.per_task.size() - 1);
    std::vector<double> means(resamples);
    for (std::size_t b = 0; b < resamples; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < r.per_task.size(); ++i) s += r.per_task[pick(rng)];
        means[b] = s / static_cast<double>(r.per_task.size());
    }
    std::sort(means.begin(), means.end());
    auto quantile = [&](double q) {
        double pos = q * static_cast<double>(means.size() - 1);
        std::size_t lo = static_cast<std::size_t>(pos);
        std::size_t hi = std::min(lo + 1, means.size() - 1);
        double frac = pos - static_cast<double>(lo);
        return means[lo] * (1.0 - frac) + means[hi] * frac;
    };
    r.ci_lo = quantile(0.025);
    r.ci_hi = std::max(quantile(0.975), r.ci_lo);
}

// Generates answers/summaries with the task context provided (the toy model
// answers by copying), then scores qa_f1 or ROUGE-L recall.
inline UtilityResult run_utility(const MethodArm& arm, const std::vector<UtilityTask>& tasks,
                                 UtilityKind kind, const ScenarioConfig& cfg, std::size_t answer_len,
                                 std::size_t bootstrap_resamples = 1000) {
    if (tasks.empty()) throw std::invalid_argument("run_utility: empty task set");
    UtilityResult r;
    r.per_task.resize(tasks.size());
    detail::parallel_for(tasks.size(), cfg.jobs, [&](std::size_t i) {
        const UtilityTask& task = tasks[i];
        std::vector<std::string> ctx_words = split_whitespace(task.context);
        TokenSeq ctx = arm.model->vocab().encode(ctx_words);
        std::unique_ptr<LanguageModel> model = arm.model->conditioned_on(ctx, cfg.rag_copy_weight);
        std::vector<std::string> user_prompt = ctx_words;
        std::vector<std::string> prompt_tail = split_whitespace(task.prompt);
        user_prompt.insert(user_prompt.end(), prompt_tail.begin(), prompt_tail.end());
        std::string retrieval_query = join_words(user_prompt);
        std::vector<std::string> prompt_words = assemble_prompt_words(user_prompt, arm.interventions);
        GenerateOptions gopts;
        gopts.max_new = answer_len;
        gopts.seed = detail::derive_seed(cfg.seed, 0x757469ull, i);  // utility stream
        GenerationResult gen = generate(*model, model->vocab().encode(prompt_words), arm.interventions,
                                        gopts, retrieval_query);
        std::string text = join_words(model->vocab().decode(gen.tokens));
        r.per_task[i] = kind == UtilityKind::qa_f1
                            ? qa_f1(text, task.reference)
                            : rouge_recall(text, task.reference, RougeVariant::rougeL);
    });
    bootstrap_ci(r, bootstrap_resamples, detail::derive_seed(cfg.seed, 0xb007ull, 0));
    return r;
}

// ---------------------------------------------------------------------------
// Efficiency evaluation

constexpr std::size_t kEfficiencyTokens = 200;  // min_new = max_new = 200

struct EfficiencyResult {
    std::string method;
    double tokens_per_sec = 0.0;
    double calibrated_ratio = 1.0;
    std::size_t tokens_per_example = kEfficiencyTokens;
};

// Forces exactly 200 generated tokens per example, averages tokens/sec over
// the example set, and calibrates against the vanilla arm (index 0 if no arm
// is named "vanilla"). Strictly single-threaded while timing.
inline std::vector<EfficiencyResult> run_efficiency(const std::vector<MethodArm>& arms,
                                                    const std::vector<Example>& examples,
                                                    const ScenarioConfig& cfg) {
    if (arms.empty() || examples.empty())
        throw std::invalid_argument("run_efficiency: needs arms and examples");
    ScenarioConfig ecfg = cfg;
    ecfg.max_new = kEfficiencyTokens;
    std::vector<EfficiencyResult> results;
    for (std::size_t m = 0; m < arms.size(); ++m) {
        // Warm-up pass, untimed.
        (void)generate_for_example(arms[m], examples[0], ecfg, m, 0);
        double tps_sum = 0.0;
        for (std::size_t e = 0; e < examples.size(); ++e) {
            auto t0 = std::chrono::steady_clock::now();
            GenerationResult gen = generate_for_example(arms[m], examples[e], ecfg, m, e);
            auto t1 = std::chrono::steady_clock::now();
            if (gen.tokens.size() != kEfficiencyTokens)
                throw std::runtime_error("efficiency protocol violated: generated " +
                                         std::to_string(gen.tokens.size()) + " tokens, expected " +
                                         std::to_string(kEfficiencyTokens));
            double secs = std::chrono::duration<double>(t1 - t0).count();
            tps_sum += static_cast<double>(kEfficiencyTokens) / std::max(secs, 1e-9);
        }
        EfficiencyResult r;
        r.method = arms[m].name;
        r.tokens_per_sec = tps_sum / static_cast<double>(examples.size());
        results.push_back(r);
    }
    std::size_t base = 0;
    for (std::size_t m = 0; m < arms.size(); ++m)
        if (arms[m].name == "vanilla") base = m;
    double base_tps = results[base].tokens_per_sec;
    for (std::size_t m = 0; m < results.size(); ++m)
        results[m].calibrated_ratio = m == base ? 1.0 : results[m].tokens_per_sec / base_tps;
    return results;
}

// ---------------------------------------------------------------------------
// Report emission

struct EvalRun {
    std::string run_id;
    Scenario scenario = Scenario::memorization;
    std::uint64_t seed = 0;
    RiskTable risk;
    std::vector<double> win_rate;  // aligned with risk.methods; empty if < 2 arms
    // utility[method][split] -> (kind, result)
    std::map<std::string, std::map<std::string, std::pair<std::string, UtilityResult>>> utility;
    std::vector<EfficiencyResult> efficiency;
    nlohmann::json config_meta = nlohmann::json::object();
};

namespace detail {

// Shortest round-trip decimal form; deterministic across runs.
inline std::string format_double(double v) {
    std::array<char, 32> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

inline void csv_escape_append(std::string& out, const std::string& field) {
    bool quote = field.find_first_of(",\"\n") != std::string::npos;
    if (!quote) {
        out += field;
        return;
    }
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

}  // namespace detail

inline void emit_report(const EvalRun& run, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw std::runtime_error("cannot create report directory: " + dir);

    auto open = [&](const char* name) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        if (!out) throw std::runtime_error(std::string("cannot write report file: ") + name);
        return out;
    };

    {
        std::ofstream out = open("details.csv");
        out << "run_id,scenario,method,example_id,metric,value\n";
        auto write_row = [&](const std::string& method, const std::string& example_id,
                             const std::string& metric, double value) {
            std::string row;
            detail::csv_escape_append(row, run.run_id);
            row.push_back(',');
            row += scenario_name(run.scenario);
            row.push_back(',');
            detail::csv_escape_append(row, method);
            row.push_back(',');
            detail::csv_escape_append(row, example_id);
            row.push_back(',');
            row += metric;
            row.push_back(',');
            row += detail::format_double(value);
            out << row << "\n";
        };
        for (std::size_t m = 0; m < run.risk.methods.size(); ++m) {
            for (std::size_t e = 0; e < run.risk.example_ids.size(); ++e) {
                if (!run.risk.cells[m][e]) continue;
                auto vals = metric_values(*run.risk.cells[m][e]);
                for (std::size_t k = 0; k < kNumMetrics; ++k)
                    write_row(run.risk.methods[m], run.risk.example_ids[e], metric_names()[k], vals[k]);
            }
        }
        // Per-task utility scores, so the summary aggregates are recomputable
        // from this table alone.
        for (const auto& [method, splits] : run.utility) {
            for (const auto& [split, kr] : splits) {
                for (std::size_t i = 0; i < kr.second.per_task.size(); ++i)
                    write_row(method, split + "#" + std::to_string(i), kr.first, kr.second.per_task[i]);
            }
        }
    }

    {
        std::ofstream out = open("distributions.csv");
        out << "metric,method,example_id,value\n";
        for (std::size_t k = 0; k < kNumMetrics; ++k) {
            for (std::size_t m = 0; m < run.risk.methods.size(); ++m) {
                for (std::size_t e = 0; e < run.risk.example_ids.size(); ++e) {
                    if (!run.risk.cells[m][e]) continue;
                    auto vals = metric_values(*run.risk.cells[m][e]);
                    std::string row = metric_names()[k];
                    row.push_back(',');
                    detail::csv_escape_append(row, run.risk.methods[m]);
                    row.push_back(',');
                    detail::csv_escape_append(row, run.risk.example_ids[e]);
                    row.push_back(',');
                    row += detail::format_double(vals[k]);
                    out << row << "\n";
                }
            }
        }
    }

    {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["run_id"] = run.run_id;
        j["scenario"] = scenario_name(run.scenario);
        j["seed"] = run.seed;
        j["methods"] = run.risk.methods;
        j["config"] = run.config_meta;
        if (!run.win_rate.empty()) {
            nlohmann::json wr = nlohmann::json::object();
            for (std::size_t m = 0; m < run.risk.methods.size(); ++m)
                wr[run.risk.methods[m]] = run.win_rate[m];
            j["win_rate"] = std::move(wr);
        }
        nlohmann::json util = nlohmann::json::object();
        for (const auto& [method, splits] : run.utility) {
            nlohmann::json ms = nlohmann::json::object();
            for (const auto& [split, kr] : splits) {
                ms[split] = {{"score", kr.first},
                             {"mean", kr.second.mean},
                             {"ci_lo", kr.second.ci_lo},
                             {"ci_hi", kr.second.ci_hi},
                             {"n", kr.second.n}};
            }
            util[method] = std::move(ms);
        }
        j["utility"] = std::move(util);
        j["efficiency_protocol"] = {{"tokens_per_example", kEfficiencyTokens}};
        std::ofstream out = open("summary.json");
        out << j.dump(2) << "\n";
    }

    if (!run.efficiency.empty()) {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& r : run.efficiency) {
            j[r.method] = {{"tokens_per_sec", r.tokens_per_sec},
                           {"calibrated_speed_ratio", r.calibrated_ratio},
                           {"tokens_per_example", r.tokens_per_example}};
        }
        std::ofstream out = open("efficiency.json");
        out << j.dump(2) << "\n";
    }
}

}  // namespace takedown
