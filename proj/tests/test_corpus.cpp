#include <fstream>
#include <gtest/gtest.h>
#include <set>

#include "takedown/corpus.hpp"
#include "testutil.hpp"

using namespace takedown;

namespace {

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    for (const auto& l : lines) out << l << "\n";
}

}  // namespace

TEST(LoadCorpus, ReadsDocumentsInFileOrder) {
    testutil::TempDir dir("corpus_load");
    write_lines(dir.file("c.jsonl"),
                {R"({"id":"a","domain":"news","text":"one two"})",
                 R"({"id":"b","domain":"books","text":"three","reference_summary":"sum"})",
                 R"({"id":"c","domain":"news","text":"four","questions":[{"question":"q","answer":"x"}],"custom":7})"});
    std::vector<Document> docs = load_corpus(dir.file("c.jsonl"));
    ASSERT_EQ(docs.size(), 3u);
    EXPECT_EQ(docs[0].id, "a");
    EXPECT_EQ(docs[1].domain, Domain::books);
    EXPECT_EQ(*docs[1].reference_summary, "sum");
    ASSERT_EQ(docs[2].questions.size(), 1u);
    EXPECT_EQ(docs[2].questions[0].answer, "x");
    EXPECT_EQ(docs[2].extra["custom"], 7);
}

TEST(LoadCorpus, EmptyFileGivesEmptyList) {
    testutil::TempDir dir("corpus_empty");
    write_lines(dir.file("c.jsonl"), {});
    EXPECT_TRUE(load_corpus(dir.file("c.jsonl")).empty());
}

TEST(LoadCorpus, DuplicateIdNamesTheId) {
    testutil::TempDir dir("corpus_dup");
    write_lines(dir.file("c.jsonl"), {R"({"id":"a","domain":"news","text":"x"})",
                                      R"({"id":"b","domain":"news","text":"y"})",
                                      R"({"id":"c","domain":"news","text":"z"})",
                                      R"({"id":"a","domain":"news","text":"w"})"});
    try {
        load_corpus(dir.file("c.jsonl"));
        FAIL() << "expected duplicate id error";
    } catch (const std::exception& e) {
        EXPECT_NE(std::string(e.what()).find("\"a\""), std::string::npos);
    }
}

TEST(LoadCorpus, MalformedLineNamesLineNumber) {
    testutil::TempDir dir("corpus_bad");
    write_lines(dir.file("c.jsonl"), {R"({"id":"a","domain":"news","text":"x"})", "{nope"});
    try {
        load_corpus(dir.file("c.jsonl"));
        FAIL() << "expected parse error";
    } catch (const std::exception& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(SaveCorpus, RoundTripsUnknownFields) {
    testutil::TempDir dir("corpus_rt");
    write_lines(dir.file("c.jsonl"),
                {R"({"id":"a","domain":"news","text":"one two","opaque":{"k":[1,2]}})"});
    std::vector<Document> docs = load_corpus(dir.file("c.jsonl"));
    save_corpus(docs, dir.file("out.jsonl"));
    std::vector<Document> again = load_corpus(dir.file("out.jsonl"));
    ASSERT_EQ(again.size(), 1u);
    EXPECT_EQ(again[0].extra["opaque"]["k"][1], 2);
}

TEST(SplitCorpus, ThousandDocumentSplits) {
    std::vector<Document> docs = testutil::unique_corpus("d", 3000, 3);
    CorpusSplit s = split_corpus(docs, 1000, 1000);
    EXPECT_EQ(s.blocklisted.size(), 1000u);
    EXPECT_EQ(s.retain.size(), 1000u);
    EXPECT_EQ(s.in_domain.size(), 1000u);
    EXPECT_EQ(s.blocklisted.front().id, "d0");
    EXPECT_EQ(s.retain.front().id, "d1000");
    EXPECT_EQ(s.in_domain.front().id, "d2000");
}

TEST(SplitCorpus, AllBlocklistedBoundary) {
    std::vector<Document> docs = testutil::unique_corpus("d", 10, 3);
    CorpusSplit s = split_corpus(docs, 10, 0);
    EXPECT_EQ(s.blocklisted.size(), 10u);
    EXPECT_TRUE(s.retain.empty());
    EXPECT_TRUE(s.in_domain.empty());
}

TEST(SplitCorpus, InsufficientDocumentsError) {
    std::vector<Document> docs = testutil::unique_corpus("d", 5, 3);
    try {
        split_corpus(docs, 10, 0);
        FAIL() << "expected size error";
    } catch (const std::exception& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("10"), std::string::npos);
        EXPECT_NE(msg.find("5"), std::string::npos);
    }
}

TEST(SplitCorpus, OrdersByRankScoreAscending) {
    std::vector<Document> docs = testutil::unique_corpus("d", 4, 3);
    docs[0].rank_score = 9.0;
    docs[1].rank_score = 1.0;
    docs[2].rank_score = 5.0;
    docs[3].rank_score = 3.0;
    CorpusSplit s = split_corpus(docs, 2, 1);
    EXPECT_EQ(s.blocklisted[0].id, "d1");
    EXPECT_EQ(s.blocklisted[1].id, "d3");
    EXPECT_EQ(s.retain[0].id, "d2");
    EXPECT_EQ(s.in_domain[0].id, "d0");
}

TEST(SplitCorpus, DeterministicAndPartitions) {
    std::vector<Document> docs = testutil::unique_corpus("d", 20, 3);
    CorpusSplit a = split_corpus(docs, 7, 6);
    CorpusSplit b = split_corpus(docs, 7, 6);
    std::set<std::string> ids;
    auto collect = [&](const std::vector<Document>& v) {
        for (const auto& d : v) EXPECT_TRUE(ids.insert(d.id).second) << "overlap at " << d.id;
    };
    collect(a.blocklisted);
    collect(a.retain);
    collect(a.in_domain);
    EXPECT_EQ(ids.size(), docs.size());
    for (std::size_t i = 0; i < a.blocklisted.size(); ++i)
        EXPECT_EQ(a.blocklisted[i].id, b.blocklisted[i].id);
}

TEST(MakeExample, SplitsHintAndTruth) {
    Document d;
    d.id = "x";
    d.text = "a b c d e";
    Example ex = make_example(d, 2, 3);
    EXPECT_EQ(ex.hint_text(), "a b");
    EXPECT_EQ(ex.truth_text(), "c d e");
}

TEST(MakeExample, TooShortError) {
    Document d;
    d.id = "x";
    d.text = "a b";
    EXPECT_THROW(make_example(d, 2, 3), std::runtime_error);
}

TEST(MakeExample, LengthAccountingMatchesReconcatenation) {
    Document d = testutil::unique_doc("big", 1000, 0);
    Example ex = make_example(d, 100, 200);
    EXPECT_EQ(ex.hint.size(), 100u);
    EXPECT_EQ(ex.ground_truth.size(), 200u);
    // Re-concatenation oracle: hint ++ truth is a prefix of the tokenization.
    std::vector<std::string> tokens = split_whitespace(d.text);
    std::vector<std::string> cat = ex.hint;
    cat.insert(cat.end(), ex.ground_truth.begin(), ex.ground_truth.end());
    ASSERT_LE(cat.size(), tokens.size());
    for (std::size_t i = 0; i < cat.size(); ++i) EXPECT_EQ(cat[i], tokens[i]);
}

TEST(MakeExample, TruthTruncatesAtTextEnd) {
    Document d = testutil::unique_doc("short", 8, 0);
    Example ex = make_example(d, 5, 100);
    EXPECT_EQ(ex.ground_truth.size(), 3u);
}
