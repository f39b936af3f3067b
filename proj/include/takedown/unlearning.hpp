#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "takedown/corpus.hpp"
#include "takedown/toylm.hpp"

// The four unlearning objectives as loss calculators over any model exposing
// per-token log-probs, plus a gradient-free count analog for the n-gram
// model so the memorization pipeline has a working unlearning arm.
//
// An example's loss is the mean per-token cross-entropy of its ground-truth
// continuation given the hint (teacher forcing).

namespace takedown {

struct UnlearningBatch {
    std::vector<Example> forget;
    std::vector<Example> retain;
};

struct UnlearnHyperparams {
    double lr_analog = 1.0;
    std::size_t epochs = 1;
};

namespace detail {

inline double example_cross_entropy(const LanguageModel& model, const Example& ex) {
    const Vocab& vocab = model.vocab();
    TokenSeq history = vocab.encode(ex.hint);
    TokenSeq truth = vocab.encode(ex.ground_truth);
    if (truth.empty()) throw std::invalid_argument("example \"" + ex.doc_id + "\" has no ground truth tokens");
    double total = 0.0;
    for (TokenId tok : truth) {
        LogitVector logits = model.logits(history);
        double mx = *std::max_element(logits.begin(), logits.end());
        double sum = 0.0;
        for (double l : logits) sum += std::exp(l - mx);
        total -= logits[static_cast<std::size_t>(tok)] - mx - std::log(sum);
        history.push_back(tok);
    }
    return total / static_cast<double>(truth.size());
}

inline double mean_cross_entropy(const LanguageModel& model, const std::vector<Example>& examples) {
    double total = 0.0;
    for (const auto& ex : examples) total += example_cross_entropy(model, ex);
    return total / static_cast<double>(examples.size());
}

}  // namespace detail

// Gradient-ascent objective: the negated mean forget-set loss.
inline double loss_ga(const LanguageModel& model, const UnlearningBatch& batch) {
    if (batch.forget.empty()) throw std::invalid_argument("loss_ga: forget set is empty");
    return -detail::mean_cross_entropy(model, batch.forget);
}

// Gradient difference: gradient ascent plus the retain-set loss.
inline double loss_gd(const LanguageModel& model, const UnlearningBatch& batch) {
    if (batch.retain.empty()) throw std::invalid_argument("loss_gd: retain set is empty");
    return loss_ga(model, batch) + detail::mean_cross_entropy(model, batch.retain);
}

// KL minimization: gradient ascent plus, per retain token, the divergence
// KL(p_ref || p_model) averaged within each example then across examples.
inline double loss_kl(const LanguageModel& model, const LanguageModel& ref_model,
                      const UnlearningBatch& batch) {
    if (batch.retain.empty()) throw std::invalid_argument("loss_kl: retain set is empty");
    if (!(model.vocab() == ref_model.vocab()))
        throw std::invalid_argument("loss_kl: models do not share a vocabulary");
    auto softmax = [](const LogitVector& logits) {
        std::vector<double> p(logits.size());
        double mx = *std::max_element(logits.begin(), logits.end());
        double sum = 0.0;
        for (std::size_t i = 0; i < logits.size(); ++i) {
            p[i] = std::exp(logits[i] - mx);
            sum += p[i];
        }
        for (double& x : p) x /= sum;
        return p;
    };
    double kl_total = 0.0;
    for (const auto& ex : batch.retain) {
        const Vocab& vocab = model.vocab();
        TokenSeq history = vocab.encode(ex.hint);
        TokenSeq truth = vocab.encode(ex.ground_truth);
        if (truth.empty()) throw std::invalid_argument("example \"" + ex.doc_id + "\" has no ground truth tokens");
        double ex_kl = 0.0;
        for (TokenId tok : truth) {
            std::vector<double> p_ref = softmax(ref_model.logits(history));
            std::vector<double> p_model = softmax(model.logits(history));
            double kl = 0.0;
            for (std::size_t i = 0; i < p_ref.size(); ++i)
                if (p_ref[i] > 0.0) kl += p_ref[i] * std::log(p_ref[i] / std::max(p_model[i], kMinProb));
            ex_kl += kl;
            history.push_back(tok);
        }
        kl_total += ex_kl / static_cast<double>(truth.size());
    }
    return loss_ga(model, batch) + kl_total / static_cast<double>(batch.retain.size());
}

// Preference optimization: forget targets replaced by the refusal response,
// positive loss on both sets.
inline double loss_po(const LanguageModel& model, const UnlearningBatch& batch,
                      const std::vector<std::string>& idk_response) {
    if (idk_response.empty()) throw std::invalid_argument("loss_po: idk_response is empty");
    if (batch.forget.empty()) throw std::invalid_argument("loss_po: forget set is empty");
    if (batch.retain.empty()) throw std::invalid_argument("loss_po: retain set is empty");
    std::vector<Example> rewritten = batch.forget;
    for (auto& ex : rewritten) ex.ground_truth = idk_response;
    return detail::mean_cross_entropy(model, rewritten) + detail::mean_cross_entropy(model, batch.retain);
}

inline std::vector<std::string> default_idk_response() { return split_whitespace("I don't know."); }

enum class CountUnlearnMode { ga, gd };

// Count-table analog: subtract lr_analog * epochs times the forget-set
// n-gram counts (floored at zero); GD mode also adds the retain-set counts
// at the same scale. Returns a fresh model.
inline NGramLM count_unlearn(const NGramLM& model, const UnlearningBatch& batch,
                             const UnlearnHyperparams& hp, CountUnlearnMode mode = CountUnlearnMode::ga) {
    if (hp.lr_analog < 0.0) throw std::invalid_argument("lr_analog must be >= 0");
    if (hp.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    NGramLM out = model;
    const double scale = hp.lr_analog * static_cast<double>(hp.epochs);
    const std::size_t order = model.order();

    auto example_ids = [&](const Example& ex) {
        TokenSeq ids(order - 1, Vocab::kBegin);
        for (const auto& w : ex.hint) ids.push_back(out.vocab().id_of(w));
        for (const auto& w : ex.ground_truth) ids.push_back(out.vocab().id_of(w));
        ids.push_back(Vocab::kEnd);
        return ids;
    };

    for (const auto& ex : batch.forget) {
        TokenSeq ids = example_ids(ex);
        if (ids.size() < order) continue;
        for (std::size_t i = 0; i + order <= ids.size(); ++i) {
            std::string key = NGramLM::context_key(std::span(ids).subspan(i, order - 1));
            auto it = out.mutable_counts().find(key);
            if (it == out.mutable_counts().end()) continue;
            auto jt = it->second.next.find(ids[i + order - 1]);
            if (jt == it->second.next.end()) continue;
            double removed = std::min(jt->second, scale);
            jt->second -= removed;
            it->second.total -= removed;
            if (jt->second <= 0.0) it->second.next.erase(jt);
        }
    }
    if (mode == CountUnlearnMode::gd) {
        for (const auto& ex : batch.retain) {
            TokenSeq ids = example_ids(ex);
            out.add_sequence(ids, scale);
        }
    }
    return out;
}

}  // namespace takedown
