#pragma once

#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "takedown/corpus.hpp"
#include "takedown/embed.hpp"

// Cosine-similarity vector store over blocklisted documents, plus the HTTP
// wire protocol for plugging in an external embedding model.
//
// External embedder protocol (v1): POST one JSON object {"text": "..."} to
// the endpoint; the response body is one JSON object {"vector": [...]}.
// Vectors are L2-normalized on receipt. The endpoint defaults to the
// TAKEDOWN_EMBED_ENDPOINT environment variable.

namespace takedown {

struct StoreHit {
    std::string doc_id;
    double distance = 0.0;  // 1 - cosine, in [0, 2]
    std::string text;       // empty if texts were not attached after load
};

class VectorStore {
public:
    std::size_t size() const { return entries_.size(); }
    std::size_t dimension() const { return dim_; }

    void add(const std::string& doc_id, std::vector<double> vec, std::string text = {}) {
        if (!ids_.insert(doc_id).second)
            throw std::invalid_argument("duplicate doc_id in vector store: " + doc_id);
        if (entries_.empty())
            dim_ = vec.size();
        else if (vec.size() != dim_)
            throw std::invalid_argument("vector dimension mismatch: expected " + std::to_string(dim_) +
                                        ", got " + std::to_string(vec.size()));
        entries_.push_back(Entry{doc_id, std::move(vec), std::move(text)});
    }

    static VectorStore build(const std::vector<Document>& docs, const Embedder& embedder) {
        VectorStore store;
        for (const auto& d : docs) store.add(d.id, embedder.embed(d.text), d.text);
        return store;
    }

    // Nearest entry by 1 - cosine; ties break to the earliest insertion.
    std::optional<StoreHit> query_vector(const std::vector<double>& qv) const {
        if (entries_.empty()) return std::nullopt;
        if (qv.size() != dim_)
            throw std::invalid_argument("query dimension mismatch: expected " + std::to_string(dim_) +
                                        ", got " + std::to_string(qv.size()));
        std::size_t best = 0;
        double best_dist = 2.0;
        bool found = false;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            double dist = 1.0 - cosine(qv, entries_[i].vec);
            if (!found || dist < best_dist) {
                best = i;
                best_dist = dist;
                found = true;
            }
        }
        return StoreHit{entries_[best].doc_id, best_dist, entries_[best].text};
    }

    std::optional<StoreHit> query(std::string_view text, const Embedder& embedder) const {
        if (entries_.empty()) return std::nullopt;
        return query_vector(embedder.embed(text));
    }

    // Persisted as JSONL of {"doc_id", "vector"}; texts live in the corpus
    // files and are re-attached after load.
    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write vector store: " + path);
        for (const auto& e : entries_) {
            nlohmann::json j;
            j["doc_id"] = e.doc_id;
            j["vector"] = e.vec;
            out << j.dump() << "\n";
        }
    }

    static VectorStore load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open vector store: " + path);
        VectorStore store;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded())
                throw std::runtime_error(path + ": malformed JSON on line " + std::to_string(lineno));
            store.add(j.at("doc_id").get<std::string>(), j.at("vector").get<std::vector<double>>());
        }
        return store;
    }

    void attach_texts(const std::vector<Document>& docs) {
        std::unordered_map<std::string, const Document*> by_id;
        for (const auto& d : docs) by_id[d.id] = &d;
        for (auto& e : entries_) {
            auto it = by_id.find(e.doc_id);
            if (it != by_id.end()) e.text = it->second->text;
        }
    }

private:
    struct Entry {
        std::string doc_id;
        std::vector<double> vec;
        std::string text;
    };

    std::size_t dim_ = 0;
    std::vector<Entry> entries_;
    std::unordered_set<std::string> ids_;
};

}  // namespace takedown
