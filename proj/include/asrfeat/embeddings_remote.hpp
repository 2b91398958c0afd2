#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "asrfeat/embeddings.hpp"
#include "asrfeat/errors.hpp"

namespace asrfeat {

// HTTP client for an embedding service. Request: POST {"texts": [...],
// "mode": "tokens"|"sentence"}; response: {"dimension": d, "embeddings":
// [[...]...]}. A fresh connection is made per request.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
public:
    RemoteEmbeddingProvider(const std::string& url, std::size_t dimension, double timeout_seconds = 10.0,
                            int retries = 2)
        : dimension_(dimension), timeout_seconds_(timeout_seconds), retries_(retries) {
        if (dimension_ == 0) throw ConfigError("embedding dimension must be positive");
        if (retries_ < 0) throw ConfigError("embedding retries must be non-negative");
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) throw ConfigError("embedding url must include a scheme: " + url);
        const auto path_start = url.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            base_ = url;
            path_ = "/";
        } else {
            base_ = url.substr(0, path_start);
            path_ = url.substr(path_start);
        }
    }

    TokenEmbeddings embed_tokens(const std::string& text) override {
        TokenEmbeddings out;
        out.tokens = detail::whitespace_tokens(text);
        if (out.tokens.empty()) throw ValidationError("embed_tokens: no tokens in input");
        out.dimension = dimension_;
        out.vectors = request(text, "tokens");
        if (out.tokens.size() != out.vectors.size()) {
            out.tokens.resize(out.vectors.size());
            for (std::size_t i = 0; i < out.tokens.size(); ++i) out.tokens[i] = "token_" + std::to_string(i);
        }
        return out;
    }

    SentenceEmbedding embed_sentence(const std::string& text) override {
        if (detail::whitespace_tokens(text).empty()) throw ValidationError("embed_sentence: no tokens in input");
        auto vectors = request(text, "sentence");
        if (vectors.size() != 1)
            throw TransportError("embedding service returned " + std::to_string(vectors.size()) +
                                 " vectors for one sentence");
        return {std::move(vectors.front())};
    }

    std::size_t dimension() const override { return dimension_; }
    std::string name() const override { return "remote"; }

private:
    std::vector<std::vector<double>> request(const std::string& text, const char* mode) const {
        nlohmann::json body;
        body["texts"] = {text};
        body["mode"] = mode;
        const std::string payload = body.dump();

        std::string last_error;
        for (int attempt = 0; attempt <= retries_; ++attempt) {
            httplib::Client client(base_);
            const auto timeout = std::chrono::duration<double>(timeout_seconds_);
            client.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
            client.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
            auto res = client.Post(path_, payload, "application/json");
            if (!res) {
                last_error = "connection to " + base_ + " failed: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status != 200) {
                last_error = "embedding service returned status " + std::to_string(res->status);
                continue;
            }
            return parse_response(res->body);
        }
        throw TransportError("embedding request failed after " + std::to_string(retries_ + 1) +
                             " attempts: " + last_error);
    }

    std::vector<std::vector<double>> parse_response(const std::string& body) const {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("malformed embedding response: ") + e.what());
        }
        std::size_t dimension = 0;
        std::vector<std::vector<double>> vectors;
        try {
            dimension = j.at("dimension").get<std::size_t>();
            vectors = j.at("embeddings").get<std::vector<std::vector<double>>>();
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("malformed embedding response: ") + e.what());
        }
        if (dimension != dimension_)
            throw ValidationError("embedding service dimension " + std::to_string(dimension) + " != configured " +
                                  std::to_string(dimension_));
        if (vectors.empty()) throw TransportError("embedding service returned no vectors");
        for (auto& v : vectors) {
            if (v.size() != dimension_)
                throw ValidationError("embedding vector dimension " + std::to_string(v.size()) + " != configured " +
                                      std::to_string(dimension_));
            detail::l2_normalize(v, "embedding response");
        }
        return vectors;
    }

    std::size_t dimension_;
    double timeout_seconds_;
    int retries_;
    std::string base_;
    std::string path_;
};

inline std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingConfig& config) {
    if (config.provider == "fallback") return std::make_unique<TrigramHashProvider>(config.dimension);
    if (config.provider == "file") {
        if (config.file_path.empty()) throw ConfigError("file embedding provider requires a file path");
        return std::make_unique<FileEmbeddingProvider>(config.file_path, config.dimension);
    }
    if (config.provider == "remote") {
        if (config.url.empty()) throw ConfigError("remote embedding provider requires a url");
        return std::make_unique<RemoteEmbeddingProvider>(config.url, config.dimension, config.timeout_seconds,
                                                         config.retries);
    }
    throw ConfigError("unknown embedding provider: " + config.provider);
}

}  // namespace asrfeat
