#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "takedown/interventions.hpp"
#include "takedown/toylm.hpp"

// Greedy decoding with the intervention stack applied each step:
//   1. system prompts rewrite the prompt before generation starts;
//   2. logit transforms (top-k perturbation, R-CAD combination) run in their
//      declared order;
//   3. MemFree re-ranks the final candidates;
//   4. argmax, ties broken toward the lowest token id.
// Generation is a pure function of (model, prompt, configs, seed).

namespace takedown {

struct GenerateOptions {
    std::size_t max_new = 200;
    std::uint64_t seed = 0;
};

struct GenerationResult {
    TokenSeq tokens;
    // Model log-prob of each chosen token (the model's own normalized
    // distribution, before decoding-time transforms); this is the quantity
    // the unlearning loss calculators consume.
    std::vector<double> logprobs;
    std::size_t memfree_exhausted = 0;
    bool rcad_triggered = false;
    std::string rcad_doc_id;
};

inline TokenId greedy_argmax(const LogitVector& logits) {
    std::size_t best = 0;
    double best_val = logits.empty() ? 0.0 : logits[0];
    for (std::size_t i = 1; i < logits.size(); ++i) {
        if (logits[i] > best_val) {
            best_val = logits[i];
            best = i;
        }
    }
    return static_cast<TokenId>(best);
}

namespace detail {

inline std::vector<TokenId> rank_descending(const LogitVector& logits) {
    std::vector<TokenId> order(logits.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](TokenId a, TokenId b) {
        return logits[static_cast<std::size_t>(a)] > logits[static_cast<std::size_t>(b)];
    });
    return order;
}

// Enumerates candidates in (logit desc, id asc) order without sorting the
// whole vocabulary; MemFree rarely looks past the first couple. Falls back
// to a full sort if an unusual number of candidates gets rejected.
class LazyRanker {
public:
    explicit LazyRanker(const LogitVector& logits) : logits_(logits) {}

    std::optional<TokenId> next() {
        if (yielded_ >= logits_.size()) return std::nullopt;
        if (!sorted_.empty()) return sorted_[yielded_++];
        std::size_t best;
        if (yielded_ == 0) {
            // The unfiltered top candidate is plain greedy argmax.
            best = static_cast<std::size_t>(greedy_argmax(logits_));
        } else {
            if (yielded_ >= kScanLimit) {
                sorted_ = rank_descending(logits_);
                return sorted_[yielded_++];
            }
            best = logits_.size();
            double best_val = 0.0;
            for (std::size_t i = 0; i < logits_.size(); ++i) {
                double l = logits_[i];
                bool after_last = l < last_val_ || (l == last_val_ && i > last_id_);
                if (!after_last) continue;
                if (best == logits_.size() || l > best_val) {
                    best = i;
                    best_val = l;
                }
            }
        }
        last_val_ = logits_[best];
        last_id_ = best;
        ++yielded_;
        return static_cast<TokenId>(best);
    }

private:
    static constexpr std::size_t kScanLimit = 64;

    const LogitVector& logits_;
    std::vector<TokenId> sorted_;
    std::size_t yielded_ = 0;
    double last_val_ = 0.0;
    std::size_t last_id_ = 0;
};

}  // namespace detail

// Applies any SystemPromptCfg entries, in declared order, to a word prompt.
inline std::vector<std::string> assemble_prompt_words(std::vector<std::string> prompt,
                                                      std::span<const InterventionConfig> interventions) {
    for (const auto& iv : interventions)
        if (const auto* sp = std::get_if<SystemPromptCfg>(&iv))
            if (!sp->preset_id.empty()) prompt = apply_system_prompt(prompt, sp->preset_id);
    return prompt;
}

// `retrieval_query` is the text R-CAD retrieves against (the user prompt);
// empty means "use nothing" and leaves R-CAD at vanilla.
inline GenerationResult generate(const LanguageModel& model, std::span<const TokenId> prompt,
                                 std::span<const InterventionConfig> interventions,
                                 const GenerateOptions& opts, std::string_view retrieval_query = {}) {
    GenerationResult result;
    const Vocab& vocab = model.vocab();
    std::mt19937_64 rng(opts.seed);

    // R-CAD setup: fetch the nearest blocklisted document once, then run a
    // second logit stream conditioned on it, advancing with the same
    // committed token each step.
    struct RcadStream {
        const RcadCfg* cfg;
        std::unique_ptr<LanguageModel> model;
        TokenSeq history;
    };
    std::vector<RcadStream> rcad_streams;
    for (const auto& iv : interventions) {
        const auto* rc = std::get_if<RcadCfg>(&iv);
        if (!rc) continue;
        if (rc->alpha == 0.0 || !rc->store || !rc->embedder || retrieval_query.empty()) {
            rcad_streams.push_back({rc, nullptr, {}});
            continue;
        }
        std::optional<StoreHit> hit =
            rcad_prepare(retrieval_query, *rc->store, *rc->embedder, rc->distance_threshold);
        if (!hit || hit->text.empty()) {
            rcad_streams.push_back({rc, nullptr, {}});
            continue;
        }
        result.rcad_triggered = true;
        result.rcad_doc_id = hit->doc_id;
        TokenSeq ctx = vocab.encode(split_whitespace(hit->text));
        RcadStream stream{rc, model.conditioned_on(ctx, rc->context_weight), ctx};
        rcad_streams.push_back(std::move(stream));
    }

    // Normalized word tail for MemFree window checks. Multiple filters check
    // jointly: a candidate survives only if no filter blocks it.
    std::vector<const NgramMembership*> memfree_filters;
    std::size_t max_ngram = 1;
    for (const auto& iv : interventions) {
        if (const auto* mf = std::get_if<MemFreeCfg>(&iv)) {
            if (mf->filter) {
                memfree_filters.push_back(mf->filter.get());
                max_ngram = std::max(max_ngram, mf->filter->ngram_size());
            }
        }
    }
    std::vector<std::string> norm_tail;

    TokenSeq history(prompt.begin(), prompt.end());
    result.tokens.reserve(opts.max_new);
    result.logprobs.reserve(opts.max_new);

    // Only top-k perturbation and R-CAD rewrite logit values; system prompts
    // and MemFree leave the model distribution intact, so the logprob record
    // can read it without keeping a copy.
    bool has_logit_transforms = false;
    for (const auto& iv : interventions)
        if (std::holds_alternative<TopKPerturbCfg>(iv) || std::holds_alternative<RcadCfg>(iv))
            has_logit_transforms = true;

    for (std::size_t step = 0; step < opts.max_new; ++step) {
        LogitVector logits = model.logits(history);
        LogitVector model_logits;  // the untransformed distribution, kept for logprobs
        if (has_logit_transforms) model_logits = logits;
        std::size_t rcad_idx = 0;
        for (const auto& iv : interventions) {
            if (const auto* tk = std::get_if<TopKPerturbCfg>(&iv)) {
                logits = topk_perturb(std::move(logits), *tk, rng);
            } else if (std::holds_alternative<RcadCfg>(iv)) {
                RcadStream& stream = rcad_streams[rcad_idx++];
                if (stream.model) {
                    LogitVector ctx_logits = stream.model->logits(stream.history);
                    logits = rcad_logits(logits, ctx_logits, stream.cfg->alpha);
                }
            }
        }

        TokenId chosen = -1;
        if (!memfree_filters.empty()) {
            auto blocked_by = [&](TokenId cand, const NgramMembership& filter) {
                std::size_t n = filter.ngram_size();
                std::size_t tail_len = std::min(norm_tail.size(), n - 1);
                std::span<const std::string> tail(norm_tail.data() + (norm_tail.size() - tail_len), tail_len);
                MemFreeChoice c = memfree_step(std::span<const TokenId>(&cand, 1), tail, vocab, filter);
                return c.exhausted;
            };
            detail::LazyRanker ranker(logits);
            TokenId lowest_ranked = -1;
            bool found = false;
            while (std::optional<TokenId> cand = ranker.next()) {
                lowest_ranked = *cand;
                bool blocked = false;
                for (const auto* f : memfree_filters) blocked = blocked || blocked_by(*cand, *f);
                if (!blocked) {
                    chosen = *cand;
                    found = true;
                    break;
                }
            }
            if (!found) {
                chosen = lowest_ranked;
                ++result.memfree_exhausted;
            }
        } else {
            chosen = greedy_argmax(logits);
        }

        result.tokens.push_back(chosen);
        result.logprobs.push_back(has_logit_transforms ? model_logits[static_cast<std::size_t>(chosen)]
                                                       : logits[static_cast<std::size_t>(chosen)]);
        history.push_back(chosen);
        for (auto& stream : rcad_streams)
            if (stream.model) stream.history.push_back(chosen);
        if (max_ngram > 1) {
            std::vector<std::string> words = normalize_words(vocab.token_of(chosen));
            norm_tail.insert(norm_tail.end(), words.begin(), words.end());
            if (norm_tail.size() > max_ngram)
                norm_tail.erase(norm_tail.begin(),
                                norm_tail.begin() + static_cast<std::ptrdiff_t>(norm_tail.size() - max_ngram));
        }
    }
    return result;
}

}  // namespace takedown
