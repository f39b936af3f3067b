#include <gtest/gtest.h>
#include <random>
#include <unordered_set>

#include "takedown/membership.hpp"
#include "testutil.hpp"

using namespace takedown;

namespace {

std::vector<std::string> words_of(const char* s) { return split_whitespace(s); }

}  // namespace

TEST(Bloom, ContainsEveryInsertedNgram) {
    Document d;
    d.id = "x";
    d.text = "a b c d";
    BloomFilter f = BloomFilter::build({d}, 3, 0.001);
    EXPECT_TRUE(f.contains(words_of("a b c")));
    EXPECT_TRUE(f.contains(words_of("b c d")));
}

TEST(Bloom, EmptyFilterAnswersFalse) {
    BloomFilter f(10, 0.01, 3);
    EXPECT_FALSE(f.contains(words_of("a b c")));
    BloomFilter built = BloomFilter::build({}, 3, 0.01);
    EXPECT_FALSE(built.contains(words_of("x y z")));
}

TEST(Bloom, SweepNgramSizesAccepted) {
    Document d = testutil::unique_doc("s", 40, 0);
    for (std::size_t n : {6u, 12u, 24u}) {
        BloomFilter f = BloomFilter::build({d}, n, 0.001);
        EXPECT_EQ(f.ngram_size(), n);
        std::vector<std::string> w = normalize_words(d.text);
        std::vector<std::string> gram(w.begin(), w.begin() + n);
        EXPECT_TRUE(f.contains(gram));
    }
}

TEST(Bloom, WrongArityThrows) {
    BloomFilter f(10, 0.01, 3);
    EXPECT_THROW((void)f.contains(words_of("a b")), std::invalid_argument);
}

TEST(Bloom, NoFalseNegativesExhaustive) {
    std::mt19937_64 rng(5);
    std::vector<Document> docs;
    for (int i = 0; i < 20; ++i) docs.push_back(testutil::random_doc("d" + std::to_string(i), 60, rng));
    const std::size_t n = 4;
    BloomFilter f = BloomFilter::build(docs, n, 0.01);
    for (const auto& d : docs) {
        std::vector<std::string> w = normalize_words(d.text);
        for (std::size_t i = 0; i + n <= w.size(); ++i) {
            std::vector<std::string> gram(w.begin() + i, w.begin() + i + n);
            EXPECT_TRUE(f.contains(gram));
        }
    }
}

TEST(Bloom, FalsePositiveRateWithinBudget) {
    std::mt19937_64 rng(6);
    std::vector<Document> docs;
    for (int i = 0; i < 50; ++i) docs.push_back(testutil::random_doc("d" + std::to_string(i), 100, rng));
    const std::size_t n = 4;
    const double fp_target = 0.01;
    BloomFilter f = BloomFilter::build(docs, n, fp_target);
    // Exact membership as the Monte-Carlo oracle.
    std::unordered_set<std::string> exact;
    for (const auto& d : docs) {
        std::vector<std::string> w = normalize_words(d.text);
        for (std::size_t i = 0; i + n <= w.size(); ++i)
            exact.insert(NgramMembership::join_key(std::span(w).subspan(i, n)));
    }
    std::size_t queries = 0, false_positives = 0;
    std::uniform_int_distribution<int> pick(0, 999999);
    while (queries < 100000) {
        std::vector<std::string> gram;
        for (std::size_t k = 0; k < n; ++k) gram.push_back("q" + std::to_string(pick(rng)));
        if (exact.count(NgramMembership::join_key(gram))) continue;
        ++queries;
        if (f.contains(gram)) ++false_positives;
    }
    double rate = static_cast<double>(false_positives) / static_cast<double>(queries);
    EXPECT_LE(rate, 2.0 * fp_target) << "observed " << rate;
}

TEST(Bloom, SaveLoadBitIdentical) {
    std::mt19937_64 rng(7);
    std::vector<Document> docs;
    for (int i = 0; i < 10; ++i) docs.push_back(testutil::random_doc("d" + std::to_string(i), 50, rng));
    BloomFilter f = BloomFilter::build(docs, 3, 0.001);
    testutil::TempDir dir("bloom_rt");
    f.save(dir.file("f.bloom"));
    BloomFilter g = BloomFilter::load(dir.file("f.bloom"));
    EXPECT_TRUE(f == g);
    // Identical query answers on a probe set.
    for (int i = 0; i < 200; ++i) {
        std::vector<std::string> gram{"p" + std::to_string(i), "q" + std::to_string(i * 7),
                                      "r" + std::to_string(i * 13)};
        EXPECT_EQ(f.contains(gram), g.contains(gram));
    }
    // Byte-level determinism of the file itself.
    f.save(dir.file("f2.bloom"));
    EXPECT_EQ(testutil::read_file(dir.file("f.bloom")), testutil::read_file(dir.file("f2.bloom")));
}

TEST(Bloom, DeterministicBitArrays) {
    std::mt19937_64 rng(8);
    std::vector<Document> docs;
    for (int i = 0; i < 10; ++i) docs.push_back(testutil::random_doc("d" + std::to_string(i), 50, rng));
    BloomFilter a = BloomFilter::build(docs, 3, 0.001);
    BloomFilter b = BloomFilter::build(docs, 3, 0.001);
    EXPECT_TRUE(a == b);
}

TEST(Bloom, MagicBytesGuardLoad) {
    testutil::TempDir dir("bloom_magic");
    {
        std::ofstream out(dir.file("bad.bloom"), std::ios::binary);
        out << "NOTBF0 some bytes";
    }
    EXPECT_THROW(BloomFilter::load(dir.file("bad.bloom")), std::runtime_error);
}

TEST(Bloom, ZeroedHeaderRejectedOnLoad) {
    testutil::TempDir dir("bloom_zero");
    {
        std::ofstream out(dir.file("zero.bloom"), std::ios::binary);
        out << "CTEBF1";
        for (int i = 0; i < 40; ++i) out.put('\0');  // m = h = n = c = 0, p = 0
    }
    EXPECT_THROW(BloomFilter::load(dir.file("zero.bloom")), std::runtime_error);
}

TEST(Bloom, SizingFollowsStandardFormulas) {
    BloomFilter f(1000, 0.001, 6);
    // m = ceil(-c ln p / (ln 2)^2) = ceil(1000 * 6.9078 / 0.4805) = 14378
    EXPECT_EQ(f.bit_count(), 14378u);
    // h = round((m/c) ln 2) = round(9.966) = 10
    EXPECT_EQ(f.hash_count(), 10u);
}

TEST(ExactSet, NoFalsePositivesAtAll) {
    Document d;
    d.id = "x";
    d.text = "a b c d e";
    ExactNgramSet s = ExactNgramSet::build({d}, 3);
    EXPECT_TRUE(s.contains(words_of("a b c")));
    EXPECT_TRUE(s.contains(words_of("c d e")));
    EXPECT_FALSE(s.contains(words_of("a b d")));
    EXPECT_FALSE(s.contains(words_of("x y z")));
    EXPECT_EQ(s.size(), 3u);
}

TEST(ExactSet, NormalizationMatchesMetrics) {
    Document d;
    d.id = "x";
    d.text = "The QUICK, brown fox!";
    ExactNgramSet s = ExactNgramSet::build({d}, 4);
    EXPECT_TRUE(s.contains(words_of("the quick brown fox")));
}
