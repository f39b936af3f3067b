#include <algorithm>
#include <functional>
#include <gtest/gtest.h>
#include <map>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "takedown/eval.hpp"
#include "testutil.hpp"

using namespace takedown;

namespace {

// Wraps a dense score table into a RiskTable by storing each unit value in
// a rotating metric slot and zeroing the rest... too lossy; instead build
// risk tables directly from per-metric values.
RiskTable table_from(const std::vector<std::string>& methods, std::size_t n_examples,
                     const std::function<RiskScores(std::size_t, std::size_t)>& fill) {
    RiskTable t;
    t.methods = methods;
    for (std::size_t e = 0; e < n_examples; ++e) t.example_ids.push_back("e" + std::to_string(e));
    t.cells.assign(methods.size(), std::vector<std::optional<RiskScores>>(n_examples));
    for (std::size_t m = 0; m < methods.size(); ++m)
        for (std::size_t e = 0; e < n_examples; ++e) t.cells[m][e] = fill(m, e);
    return t;
}

RiskScores flat_scores(double v) {
    RiskScores s;
    s.lcs_char = static_cast<std::size_t>(v);
    s.lcs_word = static_cast<std::size_t>(v);
    s.rouge1_recall = v / 100.0;
    s.rougeL_recall = v / 100.0;
    s.acs_word = static_cast<std::size_t>(v);
    s.levenshtein = static_cast<std::size_t>(100.0 - v);  // higher is better, inverted
    s.minhash_sim = v / 100.0;
    s.semantic_sim = v / 100.0;
    return s;
}

struct ScenarioFixture {
    std::shared_ptr<NGramLM> model;
    std::vector<Document> blocklisted;
    std::vector<Example> examples;
    BuiltinEmbedder embedder;

    ScenarioFixture() {
        std::mt19937_64 rng(123);
        std::vector<Document> retain;
        for (int i = 0; i < 4; ++i)
            retain.push_back(testutil::random_doc("r" + std::to_string(i), 100, rng, 25));
        blocklisted = testutil::unique_corpus("b", 3, 60, 100000);
        NGramLM base = NGramLM::train(retain, 4, 0.01);
        model = std::make_shared<NGramLM>(base.finetuned(blocklisted, 3));
        for (const auto& d : blocklisted) examples.push_back(make_example(d, 10, 30));
    }
};

}  // namespace

TEST(WinRate, DominantMethodScoresOne) {
    RiskTable t = table_from({"worse", "better"}, 4, [](std::size_t m, std::size_t) {
        return flat_scores(m == 0 ? 90.0 : 10.0);  // lower is better on 7 metrics
    });
    std::vector<double> wr = win_rates(t);
    EXPECT_DOUBLE_EQ(wr[1], 1.0);
    EXPECT_DOUBLE_EQ(wr[0], 0.0);
}

TEST(WinRate, IdenticalTablesAreAllTies) {
    RiskTable t = table_from({"a", "b", "c"}, 5, [](std::size_t, std::size_t) {
        return flat_scores(42.0);
    });
    for (double wr : win_rates(t)) EXPECT_DOUBLE_EQ(wr, 0.5);
}

TEST(WinRate, SingleMethodThrows) {
    RiskTable t = table_from({"only"}, 3, [](std::size_t, std::size_t) { return flat_scores(1.0); });
    EXPECT_THROW(win_rates(t), std::invalid_argument);
}

TEST(WinRate, MatchesEnumerationOracleOnRandomTables) {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n_methods = 3, n_examples = 4;
        // Random raw values per (method, example, metric).
        std::vector<std::vector<std::array<double, kNumMetrics>>> raw(
            n_methods, std::vector<std::array<double, kNumMetrics>>(n_examples));
        RiskTable t;
        t.methods = {"m0", "m1", "m2"};
        for (std::size_t e = 0; e < n_examples; ++e) t.example_ids.push_back("e" + std::to_string(e));
        t.cells.assign(n_methods, std::vector<std::optional<RiskScores>>(n_examples));
        for (std::size_t m = 0; m < n_methods; ++m) {
            for (std::size_t e = 0; e < n_examples; ++e) {
                RiskScores s;
                s.lcs_char = static_cast<std::size_t>(u(rng));
                s.lcs_word = static_cast<std::size_t>(u(rng));
                s.rouge1_recall = u(rng) / 100.0;
                s.rougeL_recall = u(rng) / 100.0;
                s.acs_word = static_cast<std::size_t>(u(rng));
                s.levenshtein = static_cast<std::size_t>(u(rng));
                s.minhash_sim = u(rng) / 100.0;
                s.semantic_sim = u(rng) / 100.0;
                t.cells[m][e] = s;
                raw[m][e] = metric_values(s);
            }
        }
        // Flatten into the oracle's (method, unit) form.
        std::vector<std::vector<double>> units(n_methods);
        std::vector<bool> higher;
        for (std::size_t e = 0; e < n_examples; ++e) {
            for (std::size_t k = 0; k < kNumMetrics; ++k) {
                for (std::size_t m = 0; m < n_methods; ++m) units[m].push_back(raw[m][e][k]);
                higher.push_back(metric_higher_is_better(static_cast<Metric>(k)));
            }
        }
        std::vector<double> expect = oracles::win_rate_enumeration(units, higher);
        std::vector<double> got = win_rates(t);
        double mean = 0.0;
        for (std::size_t m = 0; m < n_methods; ++m) {
            EXPECT_NEAR(got[m], expect[m], 1e-12);
            mean += got[m];
        }
        EXPECT_NEAR(mean / static_cast<double>(n_methods), 0.5, 1e-12);
    }
}

TEST(WinRate, MissingCellsDropPairwiseAndKeepSymmetry) {
    RiskTable t = table_from({"a", "b", "c"}, 4, [](std::size_t m, std::size_t e) {
        return flat_scores(static_cast<double>(10 * m + e));
    });
    t.cells[1][2] = std::nullopt;
    t.cells[2][0] = std::nullopt;
    std::vector<double> wr = win_rates(t);
    double mean = (wr[0] + wr[1] + wr[2]) / 3.0;
    EXPECT_NEAR(mean, 0.5, 1e-12);
}

TEST(ScenarioPrompt, MemorizationIsHintOnlyRagPrependsDocument) {
    Example ex;
    ex.doc_id = "d";
    ex.full_text = "w1 w2 w3 w4 w5 w6";
    ex.hint = {"w1", "w2"};
    ex.ground_truth = {"w3", "w4"};
    std::vector<std::string> mem = detail::scenario_prompt(ex, Scenario::memorization);
    EXPECT_EQ(mem, ex.hint);
    std::vector<std::string> rag = detail::scenario_prompt(ex, Scenario::rag);
    std::vector<std::string> expected = split_whitespace(ex.full_text);
    expected.insert(expected.end(), ex.hint.begin(), ex.hint.end());
    EXPECT_EQ(rag, expected);
}

TEST(RunRisk, VanillaFullyRegurgitatesConstructedCorpus) {
    ScenarioFixture fx;
    std::vector<MethodArm> arms;
    arms.push_back(MethodArm{"vanilla", fx.model, {}});
    ScenarioConfig cfg;
    cfg.max_new = 30;
    RiskTable t = run_risk(arms, fx.examples, cfg, fx.embedder);
    for (std::size_t e = 0; e < fx.examples.size(); ++e) {
        ASSERT_TRUE(t.cells[0][e].has_value());
        EXPECT_EQ(t.cells[0][e]->lcs_word, fx.examples[e].ground_truth.size());
        EXPECT_DOUBLE_EQ(t.cells[0][e]->rougeL_recall, 1.0);
    }
}

TEST(RunRisk, MemFreeArmEmitsNoBlockedWindows) {
    ScenarioFixture fx;
    const std::size_t n = 6;
    auto filter = std::make_shared<ExactNgramSet>(ExactNgramSet::build(fx.blocklisted, n));
    std::vector<MethodArm> arms;
    arms.push_back(MethodArm{"vanilla", fx.model, {}});
    arms.push_back(MethodArm{"memfree", fx.model, {MemFreeCfg{filter}}});
    ScenarioConfig cfg;
    cfg.max_new = 30;
    RiskTable t = run_risk(arms, fx.examples, cfg, fx.embedder);
    std::vector<double> wr = win_rates(t);
    EXPECT_GT(wr[1], wr[0]);  // the filtered arm wins on similarity
    // And lcs_word drops hard versus vanilla.
    for (std::size_t e = 0; e < fx.examples.size(); ++e)
        EXPECT_LT(t.cells[1][e]->lcs_word, t.cells[0][e]->lcs_word);
}

TEST(RunUtility, CopyModelAnswersFromContext) {
    ScenarioFixture fx;
    // QA whose answer continues the question verbatim in the context.
    std::vector<UtilityTask> tasks;
    for (const auto& d : fx.blocklisted) {
        std::vector<std::string> w = split_whitespace(d.text);
        UtilityTask task;
        task.id = d.id + "#q0";
        task.context = d.text;
        task.prompt = join_words(std::vector<std::string>(w.begin() + 20, w.begin() + 25));
        task.reference = join_words(std::vector<std::string>(w.begin() + 25, w.begin() + 29));
        tasks.push_back(task);
    }
    MethodArm vanilla{"vanilla", fx.model, {}};
    ScenarioConfig cfg;
    UtilityResult r = run_utility(vanilla, tasks, UtilityKind::qa_f1, cfg, 4, 200);
    EXPECT_NEAR(r.mean, 1.0, 1e-9);
    EXPECT_EQ(r.n, tasks.size());
}

TEST(RunUtility, EmptyTaskSetThrows) {
    ScenarioFixture fx;
    MethodArm vanilla{"vanilla", fx.model, {}};
    ScenarioConfig cfg;
    EXPECT_THROW(run_utility(vanilla, {}, UtilityKind::qa_f1, cfg, 4), std::invalid_argument);
}

TEST(Bootstrap, CiContainsMeanAndShrinks) {
    std::mt19937_64 rng(55);
    std::normal_distribution<double> noise(0.5, 0.1);
    auto width_at = [&](std::size_t n) {
        UtilityResult r;
        for (std::size_t i = 0; i < n; ++i) r.per_task.push_back(noise(rng));
        bootstrap_ci(r, 1000, 99);
        EXPECT_GE(r.mean, r.ci_lo);
        EXPECT_LE(r.mean, r.ci_hi);
        return r.ci_hi - r.ci_lo;
    };
    double w_small = width_at(40);
    double w_large = width_at(640);
    // Width shrinks roughly like 1/sqrt(N): a 16x sample should be ~4x tighter.
    EXPECT_LT(w_large, w_small / 2.0);
}

TEST(RunEfficiency, VanillaRatioExactlyOneAndProtocolHolds) {
    ScenarioFixture fx;
    std::vector<MethodArm> arms;
    arms.push_back(MethodArm{"vanilla", fx.model, {}});
    TopKPerturbCfg tk;
    tk.sigma = 1.0;
    arms.push_back(MethodArm{"topk", fx.model, {tk}});
    ScenarioConfig cfg;
    std::vector<Example> subset(fx.examples.begin(), fx.examples.begin() + 2);
    std::vector<EfficiencyResult> res = run_efficiency(arms, subset, cfg);
    ASSERT_EQ(res.size(), 2u);
    EXPECT_EQ(res[0].method, "vanilla");
    EXPECT_DOUBLE_EQ(res[0].calibrated_ratio, 1.0);
    EXPECT_EQ(res[0].tokens_per_example, kEfficiencyTokens);
    EXPECT_GT(res[0].tokens_per_sec, 0.0);
    EXPECT_GT(res[1].calibrated_ratio, 0.0);
}

TEST(EmitReport, RowCountsAndDeterminism) {
    RiskTable t = table_from({"a", "b"}, 3, [](std::size_t m, std::size_t e) {
        return flat_scores(static_cast<double>(10 * m + e));
    });
    EvalRun run;
    run.run_id = "run-test";
    run.scenario = Scenario::memorization;
    run.seed = 7;
    run.risk = t;
    run.win_rate = win_rates(t);
    testutil::TempDir d1("report1"), d2("report2");
    emit_report(run, d1.str());
    emit_report(run, d2.str());

    std::string csv = testutil::read_file(d1.file("details.csv"));
    std::size_t rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
    EXPECT_EQ(rows, 1u + 2u * 3u * kNumMetrics);  // header + 48 data rows

    EXPECT_EQ(csv, testutil::read_file(d2.file("details.csv")));
    EXPECT_EQ(testutil::read_file(d1.file("summary.json")), testutil::read_file(d2.file("summary.json")));
    EXPECT_EQ(testutil::read_file(d1.file("distributions.csv")),
              testutil::read_file(d2.file("distributions.csv")));

    std::string dist = testutil::read_file(d1.file("distributions.csv"));
    std::size_t dist_rows = static_cast<std::size_t>(std::count(dist.begin(), dist.end(), '\n')) - 1;
    EXPECT_EQ(dist_rows, 2u * 3u * kNumMetrics);  // examples x arms per metric, all metrics
}

TEST(EmitReport, SummaryIsReproducibleFromDetailRows) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 40.0);
    RiskTable t = table_from({"a", "b"}, 4, [&](std::size_t, std::size_t) {
        return flat_scores(u(rng));
    });
    EvalRun run;
    run.run_id = "run-repro";
    run.risk = t;
    run.win_rate = win_rates(t);
    for (const char* method : {"a", "b"}) {
        UtilityResult r;
        for (int i = 0; i < 7; ++i) r.per_task.push_back(u(rng) / 40.0);
        bootstrap_ci(r, 200, 5);
        run.utility[method]["blocklisted"] = {"qa_f1", r};
    }
    testutil::TempDir dir("report_repro");
    emit_report(run, dir.str());

    // Re-read the detail table and rebuild the aggregates from it.
    std::istringstream csv(testutil::read_file(dir.file("details.csv")));
    std::string line;
    std::getline(csv, line);  // header
    std::map<std::string, std::map<std::string, std::map<std::string, double>>> risk_rows;
    std::map<std::string, std::vector<double>> utility_rows;
    while (std::getline(csv, line)) {
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
        ASSERT_EQ(f.size(), 6u);
        double value = std::stod(f[5]);
        if (f[4] == "qa_f1")
            utility_rows[f[2]].push_back(value);
        else
            risk_rows[f[2]][f[3]][f[4]] = value;
    }

    RiskTable rebuilt;
    rebuilt.methods = t.methods;
    rebuilt.example_ids = t.example_ids;
    rebuilt.cells.assign(t.methods.size(), std::vector<std::optional<RiskScores>>(t.example_ids.size()));
    for (std::size_t m = 0; m < t.methods.size(); ++m) {
        for (std::size_t e = 0; e < t.example_ids.size(); ++e) {
            const auto& row = risk_rows[t.methods[m]][t.example_ids[e]];
            RiskScores s;
            s.lcs_char = static_cast<std::size_t>(row.at("lcs_char"));
            s.lcs_word = static_cast<std::size_t>(row.at("lcs_word"));
            s.rouge1_recall = row.at("rouge1_recall");
            s.rougeL_recall = row.at("rougeL_recall");
            s.acs_word = static_cast<std::size_t>(row.at("acs_word"));
            s.levenshtein = static_cast<std::size_t>(row.at("levenshtein"));
            s.minhash_sim = row.at("minhash_sim");
            s.semantic_sim = row.at("semantic_sim");
            rebuilt.cells[m][e] = s;
        }
    }
    std::vector<double> recomputed = win_rates(rebuilt);
    nlohmann::json summary = nlohmann::json::parse(testutil::read_file(dir.file("summary.json")));
    for (std::size_t m = 0; m < t.methods.size(); ++m)
        EXPECT_NEAR(summary["win_rate"][t.methods[m]].get<double>(), recomputed[m], 1e-12);
    for (const char* method : {"a", "b"}) {
        double mean = 0.0;
        for (double v : utility_rows[method]) mean += v;
        mean /= static_cast<double>(utility_rows[method].size());
        EXPECT_NEAR(summary["utility"][method]["blocklisted"]["mean"].get<double>(), mean, 1e-12);
        EXPECT_EQ(utility_rows[method].size(), 7u);
    }
}

TEST(EmitReport, WinRateMeanIsHalfInSummary) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    RiskTable t = table_from({"a", "b", "c"}, 4, [&](std::size_t, std::size_t) {
        return flat_scores(u(rng));
    });
    EvalRun run;
    run.run_id = "run-x";
    run.risk = t;
    run.win_rate = win_rates(t);
    testutil::TempDir dir("report_wr");
    emit_report(run, dir.str());
    nlohmann::json j = nlohmann::json::parse(testutil::read_file(dir.file("summary.json")));
    double mean = 0.0;
    for (const auto& m : t.methods) mean += j["win_rate"][m].get<double>();
    EXPECT_NEAR(mean / 3.0, 0.5, 1e-12);
}
