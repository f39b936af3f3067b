#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "takedown/corpus.hpp"
#include "takedown/hash.hpp"
#include "takedown/text.hpp"

// Word n-gram membership store backing the blocklist lookups during
// decoding. Two implementations share one interface: a Bloom filter (compact,
// bounded false positives, never false negatives) and an exact hash set
// (false-positive free, used when the hard no-regurgitation guarantee must
// hold and for tests).
//
// N-grams are canonicalized as normalize_words() tokens joined by single
// spaces, matching the preprocessing of the similarity metrics.

namespace takedown {

class NgramMembership {
public:
    virtual ~NgramMembership() = default;
    virtual std::size_t ngram_size() const = 0;
    virtual bool contains_key(const std::string& key) const = 0;

    bool contains(std::span<const std::string> ngram) const {
        if (ngram.size() != ngram_size())
            throw std::invalid_argument("n-gram arity " + std::to_string(ngram.size()) +
                                        " does not match filter n=" + std::to_string(ngram_size()));
        return contains_key(join_key(ngram));
    }

    static std::string join_key(std::span<const std::string> words) {
        std::string key;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i) key.push_back(' ');
            key += words[i];
        }
        return key;
    }
};

namespace detail {

template <typename Insert>
void insert_doc_ngrams(const Document& doc, std::size_t n, Insert&& insert) {
    std::vector<std::string> words = normalize_words(doc.text);
    if (words.size() < n) return;
    for (std::size_t i = 0; i + n <= words.size(); ++i)
        insert(NgramMembership::join_key(std::span(words).subspan(i, n)));
}

}  // namespace detail

// Fixed hash seeds so identical corpora always produce identical bit arrays.
constexpr std::uint64_t kBloomSeed1 = 0x42f0e1eba9ea3693ull;
constexpr std::uint64_t kBloomSeed2 = 0x6c62272e07bb0142ull;

class BloomFilter final : public NgramMembership {
public:
    // Sizing from the standard formulas: m = ceil(-c ln p / (ln 2)^2),
    // h = round((m/c) ln 2).
    BloomFilter(std::size_t capacity_hint, double fp_target, std::size_t ngram_size)
        : capacity_(std::max<std::size_t>(capacity_hint, 1)),
          fp_target_(fp_target),
          n_(ngram_size) {
        if (!(fp_target > 0.0 && fp_target < 1.0))
            throw std::invalid_argument("fp_target must be in (0,1)");
        if (ngram_size < 1) throw std::invalid_argument("ngram size must be >= 1");
        const double ln2 = std::log(2.0);
        double m = std::ceil(-static_cast<double>(capacity_) * std::log(fp_target) / (ln2 * ln2));
        bits_ = std::max<std::uint64_t>(static_cast<std::uint64_t>(m), 64);
        double h = std::round(static_cast<double>(bits_) / static_cast<double>(capacity_) * ln2);
        num_hashes_ = std::max<std::uint64_t>(static_cast<std::uint64_t>(h), 1);
        words_.assign((bits_ + 63) / 64, 0);
    }

    std::size_t ngram_size() const override { return n_; }
    std::uint64_t bit_count() const { return bits_; }
    std::uint64_t hash_count() const { return num_hashes_; }
    std::size_t capacity_hint() const { return capacity_; }
    double fp_target() const { return fp_target_; }

    void insert_key(const std::string& key) {
        std::uint64_t h1 = hash_bytes(key, kBloomSeed1);
        std::uint64_t h2 = hash_bytes(key, kBloomSeed2) | 1ull;
        std::uint64_t h = h1;
        for (std::uint64_t i = 0; i < num_hashes_; ++i, h += h2) set_bit(h % bits_);
    }

    bool contains_key(const std::string& key) const override {
        std::uint64_t h1 = hash_bytes(key, kBloomSeed1);
        std::uint64_t h2 = hash_bytes(key, kBloomSeed2) | 1ull;
        std::uint64_t h = h1;
        for (std::uint64_t i = 0; i < num_hashes_; ++i, h += h2)
            if (!get_bit(h % bits_)) return false;
        return true;
    }

    // Every word n-gram of every document, canonicalized, inserted once.
    static BloomFilter build(const std::vector<Document>& docs, std::size_t n, double fp_target) {
        std::size_t total = 0;
        for (const auto& d : docs) {
            std::size_t w = normalize_words(d.text).size();
            if (w >= n) total += w - n + 1;
        }
        BloomFilter f(total, fp_target, n);
        for (const auto& d : docs)
            detail::insert_doc_ngrams(d, n, [&](const std::string& key) { f.insert_key(key); });
        return f;
    }

    // Binary format, little-endian, documented for cross-language reuse:
    //   bytes 0..5   magic "CTEBF1"
    //   u64 m        bit count
    //   u64 h        hash count
    //   u64 n        n-gram size
    //   u64 c        capacity hint
    //   f64 p        fp target
    //   ceil(m/8) bytes of bit array, bit i at byte i/8, mask 1<<(i%8)
    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write bloom filter: " + path);
        out.write(kMagic, 6);
        write_u64(out, bits_);
        write_u64(out, num_hashes_);
        write_u64(out, n_);
        write_u64(out, capacity_);
        double p = fp_target_;
        std::uint64_t pbits;
        static_assert(sizeof(p) == sizeof(pbits));
        std::memcpy(&pbits, &p, sizeof(pbits));
        write_u64(out, pbits);
        std::uint64_t nbytes = (bits_ + 7) / 8;
        for (std::uint64_t i = 0; i < nbytes; ++i) {
            unsigned char b = 0;
            for (int k = 0; k < 8; ++k) {
                std::uint64_t bit = i * 8 + k;
                if (bit < bits_ && get_bit(bit)) b |= static_cast<unsigned char>(1u << k);
            }
            out.put(static_cast<char>(b));
        }
        if (!out) throw std::runtime_error("short write saving bloom filter: " + path);
    }

    static BloomFilter load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open bloom filter: " + path);
        char magic[6];
        in.read(magic, 6);
        if (!in || std::string_view(magic, 6) != kMagic)
            throw std::runtime_error("not a bloom filter file (bad magic): " + path);
        std::uint64_t m = read_u64(in), h = read_u64(in), n = read_u64(in), c = read_u64(in);
        std::uint64_t pbits = read_u64(in);
        double p;
        std::memcpy(&p, &pbits, sizeof(p));
        if (m == 0 || h == 0 || n == 0)
            throw std::runtime_error("corrupt bloom filter header in " + path);
        BloomFilter f(static_cast<std::size_t>(c), p, static_cast<std::size_t>(n));
        f.bits_ = m;
        f.num_hashes_ = h;
        f.words_.assign((m + 63) / 64, 0);
        std::uint64_t nbytes = (m + 7) / 8;
        for (std::uint64_t i = 0; i < nbytes; ++i) {
            int ch = in.get();
            if (ch == EOF) throw std::runtime_error("truncated bloom filter file: " + path);
            for (int k = 0; k < 8; ++k) {
                std::uint64_t bit = i * 8 + k;
                if (bit < m && (ch & (1 << k))) f.set_bit(bit);
            }
        }
        return f;
    }

    bool operator==(const BloomFilter& o) const {
        return bits_ == o.bits_ && num_hashes_ == o.num_hashes_ && n_ == o.n_ &&
               capacity_ == o.capacity_ && fp_target_ == o.fp_target_ && words_ == o.words_;
    }

private:
    static constexpr const char* kMagic = "CTEBF1";

    void set_bit(std::uint64_t i) { words_[i >> 6] |= 1ull << (i & 63); }
    bool get_bit(std::uint64_t i) const { return (words_[i >> 6] >> (i & 63)) & 1ull; }

    static void write_u64(std::ostream& out, std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    static std::uint64_t read_u64(std::istream& in) {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            int ch = in.get();
            if (ch == EOF) throw std::runtime_error("truncated bloom filter file");
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(ch)) << (8 * i);
        }
        return v;
    }

    std::size_t capacity_;
    double fp_target_;
    std::size_t n_;
    std::uint64_t bits_ = 0;
    std::uint64_t num_hashes_ = 0;
    std::vector<std::uint64_t> words_;
};

// Exact membership, no false positives. MemFree driven by this store gives
// the hard guarantee that no stored n-gram appears in the output.
class ExactNgramSet final : public NgramMembership {
public:
    explicit ExactNgramSet(std::size_t ngram_size) : n_(ngram_size) {
        if (ngram_size < 1) throw std::invalid_argument("ngram size must be >= 1");
    }

    std::size_t ngram_size() const override { return n_; }
    bool contains_key(const std::string& key) const override { return keys_.count(key) > 0; }
    void insert_key(const std::string& key) { keys_.insert(key); }
    std::size_t size() const { return keys_.size(); }

    static ExactNgramSet build(const std::vector<Document>& docs, std::size_t n) {
        ExactNgramSet s(n);
        for (const auto& d : docs)
            detail::insert_doc_ngrams(d, n, [&](const std::string& key) { s.insert_key(key); });
        return s;
    }

private:
    std::size_t n_;
    std::unordered_set<std::string> keys_;
};

}  // namespace takedown
