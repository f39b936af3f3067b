#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "takedown/hash.hpp"
#include "takedown/text.hpp"

// Text embedding interface. The built-in embedder is a deterministic hashed
// character-3-gram term-frequency vector; real sentence embeddings can be
// plugged in through the HTTP protocol in retrieval.hpp.

namespace takedown {

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::size_t dim() const = 0;
    // Unit L2 norm, or all-zeros for text with no features.
    virtual std::vector<double> embed(std::string_view text) const = 0;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double l2_norm(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

// Cosine similarity; zero vectors compare as 0.
inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double na = l2_norm(a), nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

constexpr std::uint64_t kDefaultEmbedSeed = 0x7ab1e5eedull;

// Feature-hashed character-3-gram bag. Text is lowercased with whitespace
// collapsed to single spaces, so the vector depends only on the 3-gram
// multiset. Texts shorter than 3 code points use the whole text as the one
// feature; empty text maps to the zero vector.
class BuiltinEmbedder final : public Embedder {
public:
    explicit BuiltinEmbedder(std::size_t dim = 384, std::uint64_t seed = kDefaultEmbedSeed)
        : dim_(dim), seed_(seed) {}

    std::size_t dim() const override { return dim_; }

    // Bucket index for one 3-gram; exposed so tests can check for collisions.
    std::size_t bucket(std::string_view gram) const { return hash_bytes(gram, seed_) % dim_; }

    std::vector<double> embed(std::string_view text) const override {
        std::vector<double> v(dim_, 0.0);
        std::vector<char32_t> cps = canonical_cps(text);
        if (cps.empty()) return v;
        std::string gram;
        if (cps.size() < 3) {
            for (char32_t cp : cps) encode_utf8(cp, gram);
            v[bucket(gram)] += 1.0;
        } else {
            for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
                gram.clear();
                encode_utf8(cps[i], gram);
                encode_utf8(cps[i + 1], gram);
                encode_utf8(cps[i + 2], gram);
                v[bucket(gram)] += 1.0;
            }
        }
        double n = l2_norm(v);
        if (n > 0.0)
            for (double& x : v) x /= n;
        return v;
    }

private:
    static std::vector<char32_t> canonical_cps(std::string_view text) {
        std::vector<char32_t> out;
        out.reserve(text.size());
        bool pending_space = false;
        for (std::size_t i = 0; i < text.size();) {
            char32_t cp = decode_utf8(text, i);
            if (is_space_cp(cp)) {
                pending_space = !out.empty();
                continue;
            }
            if (pending_space) {
                out.push_back(U' ');
                pending_space = false;
            }
            out.push_back(to_lower_cp(cp));
        }
        return out;
    }

    std::size_t dim_;
    std::uint64_t seed_;
};

}  // namespace takedown
