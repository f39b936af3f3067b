#pragma once

#include <algorithm>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "takedown/text.hpp"

// Corpus ingestion and the blocklisted / retain / in-domain split.
//
// JSONL schema, one object per line:
//   { "id": str, "domain": "news"|"books", "text": str,
//     "questions": [{"question": str, "answer": str}]?,   (news)
//     "reference_summary": str?,                          (books)
//     "rank_score": number? }
// Unknown fields are preserved verbatim in Document::extra.

namespace takedown {

struct QAPair {
    std::string question;
    std::string answer;
};

enum class Domain { news, books };

struct Document {
    std::string id;
    Domain domain = Domain::news;
    std::string text;
    std::vector<QAPair> questions;
    std::optional<std::string> reference_summary;
    std::optional<double> rank_score;
    nlohmann::json extra = nlohmann::json::object();
};

struct Example {
    std::string doc_id;
    std::vector<std::string> hint;
    std::vector<std::string> ground_truth;
    std::string full_text;

    std::string hint_text() const { return join_words(hint); }
    std::string truth_text() const { return join_words(ground_truth); }
};

struct CorpusSplit {
    std::vector<Document> blocklisted;
    std::vector<Document> retain;
    std::vector<Document> in_domain;
};

inline const char* domain_name(Domain d) {
    return d == Domain::news ? "news" : "books";
}

inline Domain parse_domain(const std::string& s) {
    if (s == "news") return Domain::news;
    if (s == "books") return Domain::books;
    throw std::runtime_error("unknown domain \"" + s + "\" (expected \"news\" or \"books\")");
}

inline Document document_from_json(const nlohmann::json& j) {
    Document d;
    if (!j.is_object()) throw std::runtime_error("expected a JSON object");
    if (!j.contains("id") || !j["id"].is_string()) throw std::runtime_error("missing string field \"id\"");
    if (!j.contains("domain") || !j["domain"].is_string()) throw std::runtime_error("missing string field \"domain\"");
    if (!j.contains("text") || !j["text"].is_string()) throw std::runtime_error("missing string field \"text\"");
    d.id = j["id"].get<std::string>();
    d.domain = parse_domain(j["domain"].get<std::string>());
    d.text = j["text"].get<std::string>();
    if (d.text.empty()) throw std::runtime_error("document \"" + d.id + "\" has empty text");
    if (j.contains("questions")) {
        for (const auto& q : j["questions"]) {
            QAPair qa{q.at("question").get<std::string>(), q.at("answer").get<std::string>()};
            if (qa.question.empty() || qa.answer.empty())
                throw std::runtime_error("document \"" + d.id + "\" has an empty question or answer");
            d.questions.push_back(std::move(qa));
        }
    }
    if (j.contains("reference_summary")) d.reference_summary = j["reference_summary"].get<std::string>();
    if (j.contains("rank_score")) d.rank_score = j["rank_score"].get<double>();
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k != "id" && k != "domain" && k != "text" && k != "questions" &&
            k != "reference_summary" && k != "rank_score")
            d.extra[k] = it.value();
    }
    return d;
}

inline nlohmann::json document_to_json(const Document& d) {
    nlohmann::json j = d.extra;
    j["id"] = d.id;
    j["domain"] = domain_name(d.domain);
    j["text"] = d.text;
    if (!d.questions.empty()) {
        nlohmann::json qs = nlohmann::json::array();
        for (const auto& q : d.questions) qs.push_back({{"question", q.question}, {"answer", q.answer}});
        j["questions"] = std::move(qs);
    }
    if (d.reference_summary) j["reference_summary"] = *d.reference_summary;
    if (d.rank_score) j["rank_score"] = *d.rank_score;
    return j;
}

// Reads a JSONL corpus in file order. Errors name the offending line or id.
inline std::vector<Document> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw std::runtime_error(path + ": malformed JSON on line " + std::to_string(lineno));
        Document d;
        try {
            d = document_from_json(j);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ": line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!seen.insert(d.id).second)
            throw std::runtime_error(path + ": duplicate document id \"" + d.id + "\" on line " +
                                     std::to_string(lineno));
        docs.push_back(std::move(d));
    }
    return docs;
}

inline void save_corpus(const std::vector<Document>& docs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write corpus file: " + path);
    for (const auto& d : docs) out << document_to_json(d).dump() << "\n";
}

// Blocklisted = first n_block, retain = next n_retain, in-domain = rest.
// Documents are ordered by rank_score ascending when present (stable, missing
// scores sort last), otherwise kept in file order.
inline CorpusSplit split_corpus(std::vector<Document> docs, std::size_t n_block, std::size_t n_retain) {
    if (n_block + n_retain > docs.size())
        throw std::runtime_error("split requires " + std::to_string(n_block + n_retain) +
                                 " documents but corpus has " + std::to_string(docs.size()));
    bool any_rank = false;
    for (const auto& d : docs) any_rank |= d.rank_score.has_value();
    if (any_rank) {
        std::stable_sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) {
            double ra = a.rank_score.value_or(std::numeric_limits<double>::infinity());
            double rb = b.rank_score.value_or(std::numeric_limits<double>::infinity());
            return ra < rb;
        });
    }
    CorpusSplit split;
    split.blocklisted.assign(docs.begin(), docs.begin() + n_block);
    split.retain.assign(docs.begin() + n_block, docs.begin() + n_block + n_retain);
    split.in_domain.assign(docs.begin() + n_block + n_retain, docs.end());
    return split;
}

// Hint = first hint_len raw word tokens, ground truth = next span_len (or
// fewer if the text runs out, but at least one token).
inline Example make_example(const Document& doc, std::size_t hint_len, std::size_t span_len) {
    std::vector<std::string> tokens = split_whitespace(doc.text);
    if (tokens.size() < hint_len + 1)
        throw std::runtime_error("document \"" + doc.id + "\" has " + std::to_string(tokens.size()) +
                                 " tokens, need at least " + std::to_string(hint_len + 1) +
                                 " for hint length " + std::to_string(hint_len));
    Example ex;
    ex.doc_id = doc.id;
    ex.full_text = doc.text;
    ex.hint.assign(tokens.begin(), tokens.begin() + hint_len);
    std::size_t truth_len = std::min(span_len, tokens.size() - hint_len);
    ex.ground_truth.assign(tokens.begin() + hint_len, tokens.begin() + hint_len + truth_len);
    return ex;
}

}  // namespace takedown
