#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "takedown/embed.hpp"

// HTTP client for the external embedder protocol (see retrieval.hpp).
// Separate header so that only binaries that opt into external embeddings
// compile against httplib.

namespace takedown {

inline const char* kEmbedEndpointEnvVar = "TAKEDOWN_EMBED_ENDPOINT";

// Resolves an endpoint "host:port/path" into its parts.
struct EmbedEndpoint {
    std::string host;
    int port = 80;
    std::string path = "/v1/embed";

    static EmbedEndpoint parse(const std::string& spec) {
        EmbedEndpoint ep;
        std::string rest = spec;
        if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
        auto slash = rest.find('/');
        if (slash != std::string::npos) {
            ep.path = rest.substr(slash);
            rest = rest.substr(0, slash);
        }
        auto colon = rest.find(':');
        if (colon != std::string::npos) {
            ep.host = rest.substr(0, colon);
            ep.port = std::stoi(rest.substr(colon + 1));
        } else {
            ep.host = rest;
        }
        if (ep.host.empty()) throw std::invalid_argument("embedder endpoint has no host: " + spec);
        return ep;
    }
};

class HttpEmbedder final : public Embedder {
public:
    explicit HttpEmbedder(const std::string& endpoint_spec)
        : endpoint_(EmbedEndpoint::parse(endpoint_spec)) {}

    // Uses TAKEDOWN_EMBED_ENDPOINT.
    static HttpEmbedder from_env() {
        const char* spec = std::getenv(kEmbedEndpointEnvVar);
        if (!spec || !*spec)
            throw std::runtime_error(std::string(kEmbedEndpointEnvVar) + " is not set");
        return HttpEmbedder(spec);
    }

    std::size_t dim() const override {
        if (dim_ == 0) dim_ = embed("").size();
        return dim_;
    }

    std::vector<double> embed(std::string_view text) const override {
        httplib::Client client(endpoint_.host, endpoint_.port);
        nlohmann::json req;
        req["text"] = std::string(text);
        auto res = client.Post(endpoint_.path, req.dump() + "\n", "application/json");
        if (!res)
            throw std::runtime_error("embedder endpoint unreachable: " + endpoint_.host + ":" +
                                     std::to_string(endpoint_.port));
        if (res->status != 200)
            throw std::runtime_error("embedder endpoint returned status " + std::to_string(res->status));
        nlohmann::json resp = nlohmann::json::parse(res->body, nullptr, false);
        if (resp.is_discarded() || !resp.contains("vector"))
            throw std::runtime_error("embedder response is not a {\"vector\": [...]} object");
        std::vector<double> v = resp["vector"].get<std::vector<double>>();
        if (dim_ == 0)
            dim_ = v.size();
        else if (v.size() != dim_)
            throw std::runtime_error("embedder returned inconsistent dimension " + std::to_string(v.size()) +
                                     " (expected " + std::to_string(dim_) + ")");
        double n = l2_norm(v);
        if (n > 0.0)
            for (double& x : v) x /= n;
        return v;
    }

private:
    EmbedEndpoint endpoint_;
    mutable std::size_t dim_ = 0;
};

}  // namespace takedown
