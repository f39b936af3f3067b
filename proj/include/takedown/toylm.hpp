#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "takedown/corpus.hpp"
#include "takedown/text.hpp"

// Deterministic desk-scale language model. An additively smoothed word
// n-gram model stands in for the parametric model (training and fine-tuning
// are count addition), and a copy-augmented wrapper stands in for
// context-conditioned generation: with probability lambda the next token is
// copied from wherever the longest suffix of the history reappears in the
// provided context. Fine-tuned n-gram counts make memorization observable;
// the copy component makes retrieval-augmented regurgitation observable.

namespace takedown {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;
using LogitVector = std::vector<double>;

class Vocab {
public:
    static constexpr TokenId kBegin = 0;
    static constexpr TokenId kEnd = 1;
    static constexpr TokenId kUnk = 2;

    Vocab() : tokens_{"<s>", "</s>", "<unk>"} {
        for (std::size_t i = 0; i < tokens_.size(); ++i) ids_[tokens_[i]] = static_cast<TokenId>(i);
    }

    std::size_t size() const { return tokens_.size(); }

    TokenId add(const std::string& token) {
        auto it = ids_.find(token);
        if (it != ids_.end()) return it->second;
        TokenId id = static_cast<TokenId>(tokens_.size());
        tokens_.push_back(token);
        ids_.emplace(token, id);
        return id;
    }

    TokenId id_of(const std::string& token) const {
        auto it = ids_.find(token);
        return it == ids_.end() ? kUnk : it->second;
    }

    const std::string& token_of(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }

    TokenSeq encode(std::span<const std::string> words) const {
        TokenSeq ids;
        ids.reserve(words.size());
        for (const auto& w : words) ids.push_back(id_of(w));
        return ids;
    }

    std::vector<std::string> decode(std::span<const TokenId> ids) const {
        std::vector<std::string> words;
        words.reserve(ids.size());
        for (TokenId id : ids) words.push_back(token_of(id));
        return words;
    }

    bool operator==(const Vocab& o) const { return tokens_ == o.tokens_; }

    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> ids_;
};

// Probabilities are clamped away from zero before the log so logit vectors
// stay finite even at smoothing_k = 0.
constexpr double kMinProb = 1e-300;

class LanguageModel {
public:
    virtual ~LanguageModel() = default;
    virtual const Vocab& vocab() const = 0;
    // Log next-token distribution given the history; normalized.
    virtual LogitVector logits(std::span<const TokenId> history) const = 0;
    // The same model conditioned on additional context, advancing the copy
    // mixture weight to `copy_weight`.
    virtual std::unique_ptr<LanguageModel> conditioned_on(TokenSeq context, double copy_weight) const = 0;
};

class NGramLM final : public LanguageModel {
public:
    struct ContextCounts {
        std::unordered_map<TokenId, double> next;
        double total = 0.0;
    };

    NGramLM(std::size_t order, double smoothing_k) : order_(order), k_(smoothing_k) {
        if (order < 2) throw std::invalid_argument("order must be >= 2");
        if (smoothing_k < 0.0) throw std::invalid_argument("smoothing_k must be >= 0");
    }

    std::size_t order() const { return order_; }
    double smoothing_k() const { return k_; }
    const Vocab& vocab() const override { return vocab_; }

    static NGramLM train(const std::vector<Document>& corpus, std::size_t order = 4, double smoothing_k = 0.01) {
        if (corpus.empty()) throw std::runtime_error("cannot train on an empty corpus");
        NGramLM lm(order, smoothing_k);
        for (const auto& doc : corpus) lm.add_text(doc.text, 1.0);
        return lm;
    }

    // Count addition, `repeats` passes over the blocklist; returns a new model.
    NGramLM finetuned(const std::vector<Document>& blocklist, std::size_t repeats) const {
        if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
        NGramLM lm = *this;
        for (const auto& doc : blocklist) lm.add_text(doc.text, static_cast<double>(repeats));
        return lm;
    }

    void add_text(const std::string& text, double weight) {
        std::vector<std::string> words = split_whitespace(text);
        TokenSeq ids;
        ids.reserve(words.size() + order_);
        for (std::size_t i = 0; i + 1 < order_; ++i) ids.push_back(Vocab::kBegin);
        for (const auto& w : words) ids.push_back(vocab_.add(w));
        ids.push_back(Vocab::kEnd);
        add_sequence(ids, weight);
    }

    // Adds every order-gram of an already padded id sequence.
    void add_sequence(std::span<const TokenId> ids, double weight) {
        if (ids.size() < order_) return;
        for (std::size_t i = 0; i + order_ <= ids.size(); ++i) {
            std::string key = context_key(ids.subspan(i, order_ - 1));
            ContextCounts& cc = counts_[key];
            cc.next[ids[i + order_ - 1]] += weight;
            cc.total += weight;
        }
    }

    LogitVector logits(std::span<const TokenId> history) const override {
        const std::size_t v = vocab_.size();
        LogitVector out(v);
        std::string key = history_key(history);
        auto it = counts_.find(key);
        if (it == counts_.end() || it->second.total <= 0.0) {
            // Unseen context: uniform fallback.
            double logp = std::log(1.0 / static_cast<double>(v));
            std::fill(out.begin(), out.end(), logp);
            return out;
        }
        const ContextCounts& cc = it->second;
        double denom = cc.total + k_ * static_cast<double>(v);
        if (denom <= 0.0) {
            double logp = std::log(1.0 / static_cast<double>(v));
            std::fill(out.begin(), out.end(), logp);
            return out;
        }
        double base = std::log(std::max(k_ / denom, kMinProb));
        std::fill(out.begin(), out.end(), base);
        for (const auto& [tok, cnt] : cc.next)
            out[static_cast<std::size_t>(tok)] = std::log(std::max((cnt + k_) / denom, kMinProb));
        return out;
    }

    // Smoothed probability of one continuation token; same arithmetic as
    // logits() without materializing the whole vector.
    double prob(std::span<const TokenId> history, TokenId token) const {
        const double v = static_cast<double>(vocab_.size());
        auto it = counts_.find(history_key(history));
        if (it == counts_.end() || it->second.total <= 0.0) return 1.0 / v;
        double denom = it->second.total + k_ * v;
        if (denom <= 0.0) return 1.0 / v;
        auto jt = it->second.next.find(token);
        double cnt = jt == it->second.next.end() ? 0.0 : jt->second;
        return std::max((cnt + k_) / denom, kMinProb);
    }

    std::unique_ptr<LanguageModel> conditioned_on(TokenSeq context, double copy_weight) const override;

    // Count-table access for the unlearning analog.
    const std::unordered_map<std::string, ContextCounts>& counts() const { return counts_; }
    std::unordered_map<std::string, ContextCounts>& mutable_counts() { return counts_; }
    Vocab& mutable_vocab() { return vocab_; }

    static std::string context_key(std::span<const TokenId> ctx) {
        std::string key(ctx.size() * sizeof(TokenId), '\0');
        std::memcpy(key.data(), ctx.data(), key.size());
        return key;
    }

    std::string history_key(std::span<const TokenId> history) const {
        TokenSeq ctx(order_ - 1, Vocab::kBegin);
        std::size_t take = std::min(history.size(), order_ - 1);
        for (std::size_t i = 0; i < take; ++i)
            ctx[order_ - 1 - take + i] = history[history.size() - take + i];
        return context_key(ctx);
    }

    // JSON count-table model format (documented in the README): a single
    // object {order, smoothing_k, vocab, counts} where counts maps the
    // space-joined context ids to {token id: count}.
    void save(const std::string& path) const {
        nlohmann::json j;
        j["format"] = "ngram-counts-v1";
        j["order"] = order_;
        j["smoothing_k"] = k_;
        j["vocab"] = vocab_.tokens();
        nlohmann::json cj = nlohmann::json::object();
        for (const auto& [key, cc] : counts_) {
            nlohmann::json next = nlohmann::json::object();
            for (const auto& [tok, cnt] : cc.next) next[std::to_string(tok)] = cnt;
            cj[readable_key(key)] = std::move(next);
        }
        j["counts"] = std::move(cj);
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write model file: " + path);
        out << j.dump();
    }

    static NGramLM load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open model file: " + path);
        nlohmann::json j = nlohmann::json::parse(in);
        if (j.value("format", "") != "ngram-counts-v1")
            throw std::runtime_error("unrecognized model format in " + path);
        NGramLM lm(j.at("order").get<std::size_t>(), j.at("smoothing_k").get<double>());
        std::vector<std::string> tokens = j.at("vocab").get<std::vector<std::string>>();
        for (std::size_t i = 3; i < tokens.size(); ++i) lm.vocab_.add(tokens[i]);
        for (auto it = j.at("counts").begin(); it != j.at("counts").end(); ++it) {
            TokenSeq ctx;
            for (const auto& part : split_whitespace(it.key())) ctx.push_back(std::stoi(part));
            std::string key = context_key(ctx);
            ContextCounts& cc = lm.counts_[key];
            for (auto nt = it.value().begin(); nt != it.value().end(); ++nt) {
                double cnt = nt.value().get<double>();
                cc.next[static_cast<TokenId>(std::stoi(nt.key()))] = cnt;
                cc.total += cnt;
            }
        }
        return lm;
    }

private:
    static std::string readable_key(const std::string& packed) {
        std::string out;
        for (std::size_t i = 0; i + sizeof(TokenId) <= packed.size(); i += sizeof(TokenId)) {
            TokenId id;
            std::memcpy(&id, packed.data() + i, sizeof(TokenId));
            if (!out.empty()) out.push_back(' ');
            out += std::to_string(id);
        }
        return out;
    }

    std::size_t order_;
    double k_;
    Vocab vocab_;
    std::unordered_map<std::string, ContextCounts> counts_;
};

// Copy-augmented wrapper: p = (1-lambda) * p_base + lambda * p_copy when the
// longest suffix of the history (length >= min_match) reappears in the
// context with a successor token; otherwise p = p_base. Ties among
// equal-length matches resolve to the earliest context position.
class CopyAugmentedLM final : public LanguageModel {
public:
    CopyAugmentedLM(const NGramLM* base, TokenSeq context, double copy_weight, std::size_t min_match = 3)
        : base_(base), context_(std::move(context)), lambda_(copy_weight), min_match_(min_match) {
        if (copy_weight < 0.0 || copy_weight > 1.0)
            throw std::invalid_argument("copy_weight must be in [0,1]");
        if (min_match < 1) throw std::invalid_argument("min_match must be >= 1");
    }

    const Vocab& vocab() const override { return base_->vocab(); }
    const NGramLM& base() const { return *base_; }
    const TokenSeq& context() const { return context_; }
    double copy_weight() const { return lambda_; }
    std::size_t min_match() const { return min_match_; }

    // Successor of the earliest longest suffix match, or -1 if no match of
    // at least min_match tokens exists.
    TokenId copy_prediction(std::span<const TokenId> history) const {
        if (history.empty() || context_.size() < 2) return -1;
        std::size_t best_len = 0;
        std::size_t best_end = 0;
        // end = index in context of the last matched token; it needs a successor.
        for (std::size_t end = 0; end + 1 < context_.size(); ++end) {
            if (context_[end] != history.back()) continue;
            // Cheap pre-check: extending the current best by one must match.
            if (best_len > 0) {
                if (end < best_len) continue;
                if (history.size() <= best_len) continue;
                if (context_[end - best_len] != history[history.size() - 1 - best_len]) continue;
            }
            std::size_t len = 0;
            std::size_t max_len = std::min(history.size(), end + 1);
            while (len < max_len && context_[end - len] == history[history.size() - 1 - len]) ++len;
            if (len > best_len) {
                best_len = len;
                best_end = end;
            }
        }
        if (best_len < min_match_) return -1;
        return context_[best_end + 1];
    }

    LogitVector logits(std::span<const TokenId> history) const override {
        LogitVector base_logits = base_->logits(history);
        TokenId copied = copy_prediction(history);
        if (copied < 0 || lambda_ == 0.0) return base_logits;
        LogitVector out(base_logits.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            double p_base = std::exp(base_logits[i]);
            double p_copy = static_cast<TokenId>(i) == copied ? 1.0 : 0.0;
            out[i] = std::log(std::max((1.0 - lambda_) * p_base + lambda_ * p_copy, kMinProb));
        }
        return out;
    }

    std::unique_ptr<LanguageModel> conditioned_on(TokenSeq context, double copy_weight) const override {
        return std::make_unique<CopyAugmentedLM>(base_, std::move(context), copy_weight, min_match_);
    }

private:
    const NGramLM* base_;
    TokenSeq context_;
    double lambda_;
    std::size_t min_match_;
};

inline std::unique_ptr<LanguageModel> NGramLM::conditioned_on(TokenSeq context, double copy_weight) const {
    return std::make_unique<CopyAugmentedLM>(this, std::move(context), copy_weight);
}

}  // namespace takedown
