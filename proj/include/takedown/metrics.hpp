#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "takedown/embed.hpp"
#include "takedown/hash.hpp"
#include "takedown/text.hpp"

// The eight regurgitation-risk similarity metrics plus the two utility
// scores (token-level F1 and ROUGE-L recall). All comparisons run over the
// normalization defined in text.hpp; levenshtein is the exception and works
// on lowercased raw strings with spaces and punctuation retained.

namespace takedown {

struct RiskScores {
    std::size_t lcs_char = 0;
    std::size_t lcs_word = 0;
    double rouge1_recall = 0.0;
    double rougeL_recall = 0.0;
    std::size_t acs_word = 0;
    std::size_t levenshtein = 0;
    double minhash_sim = 0.0;
    double semantic_sim = 0.0;
};

// LCS length, rolling rows, O(min(m,n)) memory.
template <typename Seq>
std::size_t lcs_len(const Seq& a, const Seq& b) {
    const Seq& lo = a.size() <= b.size() ? a : b;
    const Seq& hi = a.size() <= b.size() ? b : a;
    if (lo.empty()) return 0;
    std::vector<std::size_t> prev(lo.size() + 1, 0), cur(lo.size() + 1, 0);
    for (std::size_t i = 1; i <= hi.size(); ++i) {
        for (std::size_t j = 1; j <= lo.size(); ++j) {
            if (hi[i - 1] == lo[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[lo.size()];
}

inline std::size_t lcs_char_len(std::string_view gen, std::string_view truth) {
    return lcs_len(normalize_chars_cp(gen), normalize_chars_cp(truth));
}

inline std::size_t lcs_word_len(std::string_view gen, std::string_view truth) {
    return lcs_len(normalize_words(gen), normalize_words(truth));
}

namespace detail {

struct Span {
    std::size_t a_start = 0, b_start = 0, len = 0;
};

// Longest common contiguous run; ties prefer the earliest a_start, then the
// earliest b_start.
inline Span longest_common_span(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    Span best;
    if (a.empty() || b.empty()) return best;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1 : 0;
            if (cur[j] > best.len) {
                best.len = cur[j];
                best.a_start = i - cur[j];
                best.b_start = j - cur[j];
            }
        }
        std::swap(prev, cur);
        std::fill(cur.begin(), cur.end(), 0);
    }
    return best;
}

inline void erase_span(std::vector<std::string>& v, std::size_t start, std::size_t len) {
    v.erase(v.begin() + static_cast<std::ptrdiff_t>(start),
            v.begin() + static_cast<std::ptrdiff_t>(start + len));
}

}  // namespace detail

// Accumulated common span length: repeatedly remove the longest common
// contiguous word run from both sides while its length exceeds min_len, and
// sum the removed lengths. Runs of min_len words or fewer do not count.
inline std::size_t acs_word_len(std::string_view gen, std::string_view truth, std::size_t min_len = 3) {
    std::vector<std::string> a = normalize_words(gen);
    std::vector<std::string> b = normalize_words(truth);
    std::size_t total = 0;
    while (true) {
        detail::Span s = detail::longest_common_span(a, b);
        if (s.len <= min_len) break;
        total += s.len;
        detail::erase_span(a, s.a_start, s.len);
        detail::erase_span(b, s.b_start, s.len);
    }
    return total;
}

enum class RougeVariant { rouge1, rougeL };

// Recall-side ROUGE. ROUGE-1: clipped unigram overlap over the truth unigram
// count; ROUGE-L: word-LCS over the truth word count. Empty truth scores 0.
inline double rouge_recall(std::string_view gen, std::string_view truth, RougeVariant variant) {
    std::vector<std::string> g = normalize_words(gen);
    std::vector<std::string> t = normalize_words(truth);
    if (t.empty()) return 0.0;
    if (variant == RougeVariant::rougeL) return static_cast<double>(lcs_len(g, t)) / static_cast<double>(t.size());
    std::map<std::string, std::size_t> gc, tc;
    for (const auto& w : g) ++gc[w];
    for (const auto& w : t) ++tc[w];
    std::size_t overlap = 0;
    for (const auto& [w, n] : tc) {
        auto it = gc.find(w);
        if (it != gc.end()) overlap += std::min(n, it->second);
    }
    return static_cast<double>(overlap) / static_cast<double>(t.size());
}

// Character-level edit distance over lowercased code points; punctuation and
// whitespace are kept as-is.
inline std::size_t levenshtein(std::string_view gen, std::string_view truth) {
    std::vector<char32_t> a, b;
    for (std::size_t i = 0; i < gen.size();) a.push_back(to_lower_cp(decode_utf8(gen, i)));
    for (std::size_t i = 0; i < truth.size();) b.push_back(to_lower_cp(decode_utf8(truth, i)));
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

constexpr std::uint64_t kDefaultMinhashSeed = 0x31337c0ffeeull;

namespace detail {

inline std::vector<std::uint64_t> word_3gram_hashes(std::string_view text, std::uint64_t seed) {
    std::vector<std::string> w = normalize_words(text);
    std::vector<std::uint64_t> grams;
    if (w.size() < 3) return grams;
    grams.reserve(w.size() - 2);
    for (std::size_t i = 0; i + 3 <= w.size(); ++i) {
        std::string key = w[i];
        key.push_back('\x1f');
        key += w[i + 1];
        key.push_back('\x1f');
        key += w[i + 2];
        grams.push_back(hash_bytes(key, seed));
    }
    return grams;
}

}  // namespace detail

// MinHash estimate of the Jaccard similarity between the two word-3-gram
// sets, using num_perm double-hashed permutations. A side with no 3-grams
// scores 0 unless both sides have none (then 1).
inline double minhash_sim(std::string_view gen, std::string_view truth, std::size_t num_perm = 128,
                          std::uint64_t seed = kDefaultMinhashSeed) {
    std::vector<std::uint64_t> ga = detail::word_3gram_hashes(gen, seed);
    std::vector<std::uint64_t> gb = detail::word_3gram_hashes(truth, seed);
    if (ga.empty() || gb.empty()) return (ga.empty() && gb.empty()) ? 1.0 : 0.0;
    auto signature = [&](const std::vector<std::uint64_t>& grams) {
        std::vector<std::uint64_t> sig(num_perm, ~0ull);
        for (std::uint64_t g : grams) {
            std::uint64_t h1 = mix64(g ^ seed);
            std::uint64_t h2 = mix64(g + kGoldenGamma) | 1ull;
            std::uint64_t h = h1;
            for (std::size_t i = 0; i < num_perm; ++i, h += h2) sig[i] = std::min(sig[i], h);
        }
        return sig;
    };
    std::vector<std::uint64_t> sa = signature(ga), sb = signature(gb);
    std::size_t match = 0;
    for (std::size_t i = 0; i < num_perm; ++i) match += sa[i] == sb[i];
    return static_cast<double>(match) / static_cast<double>(num_perm);
}

inline double semantic_sim(std::string_view gen, std::string_view truth, const Embedder& embedder) {
    return cosine(embedder.embed(gen), embedder.embed(truth));
}

namespace detail {

// SQuAD-style answer normalization: lowercase, strip punctuation, drop
// articles, split on whitespace.
inline std::vector<std::string> qa_tokens(std::string_view s) {
    std::vector<std::string> words = normalize_words(s);
    std::vector<std::string> out;
    for (auto& w : words)
        if (w != "a" && w != "an" && w != "the") out.push_back(std::move(w));
    return out;
}

}  // namespace detail

// Token-level F1 with SQuAD normalization. Both sides empty scores 1, one
// side empty scores 0.
inline double qa_f1(std::string_view prediction, std::string_view gold) {
    std::vector<std::string> p = detail::qa_tokens(prediction);
    std::vector<std::string> g = detail::qa_tokens(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;
    std::map<std::string, std::size_t> pc;
    for (const auto& w : p) ++pc[w];
    std::size_t common = 0;
    for (const auto& w : g) {
        auto it = pc.find(w);
        if (it != pc.end() && it->second > 0) {
            ++common;
            --it->second;
        }
    }
    if (common == 0) return 0.0;
    double precision = static_cast<double>(common) / static_cast<double>(p.size());
    double recall = static_cast<double>(common) / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

struct RiskScoreOptions {
    std::size_t acs_min_len = 3;
    std::size_t minhash_num_perm = 128;
    std::uint64_t minhash_seed = kDefaultMinhashSeed;
};

inline RiskScores score_all(std::string_view gen, std::string_view truth, const Embedder& embedder,
                            const RiskScoreOptions& opt = {}) {
    RiskScores s;
    s.lcs_char = lcs_char_len(gen, truth);
    s.lcs_word = lcs_word_len(gen, truth);
    s.rouge1_recall = rouge_recall(gen, truth, RougeVariant::rouge1);
    s.rougeL_recall = rouge_recall(gen, truth, RougeVariant::rougeL);
    s.acs_word = acs_word_len(gen, truth, opt.acs_min_len);
    s.levenshtein = levenshtein(gen, truth);
    s.minhash_sim = minhash_sim(gen, truth, opt.minhash_num_perm, opt.minhash_seed);
    s.semantic_sim = semantic_sim(gen, truth, embedder);
    return s;
}

}  // namespace takedown
