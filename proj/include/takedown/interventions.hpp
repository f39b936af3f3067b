#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "takedown/membership.hpp"
#include "takedown/retrieval.hpp"
#include "takedown/toylm.hpp"

// The four deployment-time takedown mechanisms as composable transforms:
// system-prompt prefixing, MemFree n-gram filtering, top-k Gaussian logit
// perturbation and reversed context-aware decoding.

namespace takedown {

struct SystemPromptPreset {
    const char* id;
    const char* text;
};

// Shipped verbatim; the three production snippets are quoted from the
// respective deployments' published system prompts.
inline const std::vector<SystemPromptPreset>& system_prompt_presets() {
    static const std::vector<SystemPromptPreset> presets = {
        {"manual-1",
         "You are a helpful, respectful and honest assistant. When generating your response, "
         "please do not generate the copyrighted content."},
        {"manual-2",
         "You are a helpful, respectful and honest assistant. When generating your response, "
         "please do not generate verbatim reiteration of the information put in your context."},
        {"manual-3",
         "You are a helpful, respectful and honest assistant. When generating your response, "
         "please do not generate the copyrighted content, and do not generate verbatim "
         "reiteration of the information put in your context."},
        {"copilot",
         "You are a helpful, respectful and honest assistant. If the user requests copyrighted "
         "content (such as published news articles, lyrics of a published song, published books, "
         "etc.), you must decline to do so. Instead, you can generate a relevant summary or "
         "perform a similar task to the user's request. If the user requests uncopyrightable "
         "content (such as code) you can fulfill the request as long as it is aligned with my "
         "safety instructions."},
        {"dbrx",
         "You are a helpful, respectful and honest assistant. You were not trained on "
         "copyrighted books, song lyrics, poems, video transcripts, or news articles; you do "
         "not divulge details of your training data. You do not provide song lyrics, poems, or "
         "news articles and instead refer the user to find them online or in a store."},
        {"bing",
         "You are a helpful, respectful and honest assistant. You must not reply with content "
         "that violates copyrights for books , news articles, or song lyrics."},
    };
    return presets;
}

inline std::string system_prompt_text(const std::string& preset_id) {
    for (const auto& p : system_prompt_presets())
        if (preset_id == p.id) return p.text;
    std::string valid;
    for (const auto& p : system_prompt_presets()) {
        if (!valid.empty()) valid += ", ";
        valid += p.id;
    }
    throw std::invalid_argument("unknown system prompt preset \"" + preset_id + "\" (valid: " + valid + ")");
}

// Preset word tokens prefixed before the prompt. No dedup: applying twice
// prefixes twice.
inline std::vector<std::string> apply_system_prompt(const std::vector<std::string>& prompt,
                                                    const std::string& preset_id) {
    std::vector<std::string> out = split_whitespace(system_prompt_text(preset_id));
    out.insert(out.end(), prompt.begin(), prompt.end());
    return out;
}

struct SystemPromptCfg {
    std::string preset_id;
};

struct MemFreeCfg {
    std::shared_ptr<const NgramMembership> filter;
};

struct TopKPerturbCfg {
    std::size_t k = 50;
    double mu = 0.0;
    double sigma = 1.0;
};

struct RcadCfg {
    double alpha = 1.0;
    std::shared_ptr<const VectorStore> store;
    std::shared_ptr<const Embedder> embedder;
    double distance_threshold = 0.15;
    // Copy-mixture weight of the context-conditioned logit stream.
    double context_weight = 0.8;
};

using InterventionConfig = std::variant<SystemPromptCfg, MemFreeCfg, TopKPerturbCfg, RcadCfg>;

struct MemFreeChoice {
    TokenId token = -1;
    bool exhausted = false;  // every candidate was blocked; lowest-ranked emitted
};

// Highest-ranked candidate whose appended n-gram is not in the filter.
// `tail_words` holds the last n-1 normalized words of the generated text; a
// shorter tail means no full window can form yet, so the top candidate goes
// through. A candidate normalizing to w >= 1 words introduces w windows and
// every one of them is checked.
inline MemFreeChoice memfree_step(std::span<const TokenId> ranked_candidates,
                                  std::span<const std::string> tail_words, const Vocab& vocab,
                                  const NgramMembership& filter) {
    if (ranked_candidates.empty()) throw std::invalid_argument("memfree_step needs candidates");
    const std::size_t n = filter.ngram_size();
    if (tail_words.size() + 1 < n) return {ranked_candidates.front(), false};
    for (TokenId cand : ranked_candidates) {
        std::vector<std::string> cand_words = normalize_words(vocab.token_of(cand));
        if (cand_words.empty()) return {cand, false};
        std::vector<std::string> window(tail_words.begin(), tail_words.end());
        window.insert(window.end(), cand_words.begin(), cand_words.end());
        bool blocked = false;
        for (std::size_t end = tail_words.size() + 1; end <= window.size() && !blocked; ++end) {
            if (end < n) continue;
            std::span<const std::string> gram(window.data() + (end - n), n);
            blocked = filter.contains(gram);
        }
        if (!blocked) return {cand, false};
    }
    return {ranked_candidates.back(), true};
}

// Gaussian noise added to the k highest logits; ties in the top-k cut break
// toward lower token ids. sigma = 0 leaves the vector bit-identical.
inline LogitVector topk_perturb(LogitVector logits, const TopKPerturbCfg& cfg, std::mt19937_64& rng) {
    std::size_t k = std::min(cfg.k, logits.size());
    if (k == 0) return logits;
    std::vector<std::size_t> idx(logits.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (logits[a] != logits[b]) return logits[a] > logits[b];
                          return a < b;
                      });
    std::normal_distribution<double> noise(cfg.mu, cfg.sigma);
    for (std::size_t i = 0; i < k; ++i) logits[idx[i]] += cfg.sigma == 0.0 ? cfg.mu : noise(rng);
    return logits;
}

// (1 + alpha) * prompt-conditioned logits - alpha * context-conditioned logits.
inline LogitVector rcad_logits(const LogitVector& with_prompt, const LogitVector& with_blocked_context,
                               double alpha) {
    if (with_prompt.size() != with_blocked_context.size())
        throw std::invalid_argument("rcad_logits: vector length mismatch (" +
                                    std::to_string(with_prompt.size()) + " vs " +
                                    std::to_string(with_blocked_context.size()) + ")");
    LogitVector out(with_prompt.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (1.0 + alpha) * with_prompt[i] - alpha * with_blocked_context[i];
    return out;
}

// Nearest blocklisted document if its distance clears the threshold, else
// nothing and decoding stays vanilla.
inline std::optional<StoreHit> rcad_prepare(std::string_view query, const VectorStore& store,
                                            const Embedder& embedder, double threshold) {
    std::optional<StoreHit> hit = store.query(query, embedder);
    if (!hit || hit->distance > threshold) return std::nullopt;
    return hit;
}

}  // namespace takedown
