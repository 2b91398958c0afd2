#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "asrfeat/errors.hpp"
#include "asrfeat/rng.hpp"
#include "asrfeat/unicode.hpp"

namespace asrfeat {

struct TokenEmbeddings {
    std::vector<std::string> tokens;
    std::vector<std::vector<double>> vectors;
    std::size_t dimension = 0;
};

struct SentenceEmbedding {
    std::vector<double> vector;
};

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("cosine_similarity: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw ValidationError("cosine_similarity: zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace detail {

inline void l2_normalize(std::vector<double>& v, const char* what) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm == 0.0) throw ValidationError(std::string(what) + ": zero vector cannot be normalized");
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
}

inline std::vector<std::string> whitespace_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (is_space(c)) {
            if (!current.empty()) out.push_back(std::move(current)), current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

}  // namespace detail

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual TokenEmbeddings embed_tokens(const std::string& text) = 0;
    virtual SentenceEmbedding embed_sentence(const std::string& text) = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::string name() const = 0;
};

// Offline fallback: each whitespace token becomes a hashed count vector of
// its character trigrams (code points, wrapped in ^ and $ sentinels), then
// L2-normalized. Sentence vectors are the normalized mean of token vectors.
class TrigramHashProvider final : public EmbeddingProvider {
public:
    explicit TrigramHashProvider(std::size_t dimension = 256) : dimension_(dimension) {
        if (dimension_ == 0) throw ConfigError("embedding dimension must be positive");
    }

    TokenEmbeddings embed_tokens(const std::string& text) override {
        TokenEmbeddings out;
        out.tokens = detail::whitespace_tokens(text);
        if (out.tokens.empty()) throw ValidationError("embed_tokens: no tokens in input");
        out.dimension = dimension_;
        for (const std::string& token : out.tokens) out.vectors.push_back(token_vector(token));
        return out;
    }

    SentenceEmbedding embed_sentence(const std::string& text) override {
        const TokenEmbeddings tokens = embed_tokens(text);
        std::vector<double> mean(dimension_, 0.0);
        for (const auto& v : tokens.vectors)
            for (std::size_t i = 0; i < dimension_; ++i) mean[i] += v[i];
        for (double& x : mean) x /= static_cast<double>(tokens.vectors.size());
        detail::l2_normalize(mean, "embed_sentence");
        return {std::move(mean)};
    }

    std::size_t dimension() const override { return dimension_; }
    std::string name() const override { return "trigram-hash"; }

private:
    std::vector<double> token_vector(const std::string& token) const {
        std::vector<char32_t> cps = decode_utf8(token);
        cps.insert(cps.begin(), U'^');
        cps.push_back(U'$');
        std::vector<double> v(dimension_, 0.0);
        for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
            std::string trigram;
            for (std::size_t k = 0; k < 3; ++k) trigram += encode_utf8(cps[i + k]);
            v[fnv1a64(trigram) % dimension_] += 1.0;
        }
        detail::l2_normalize(v, "embed_tokens");
        return v;
    }

    std::size_t dimension_;
};

// Precomputed embeddings, line-delimited {"text": ..., "vectors": [[...]...]}.
// Lookup is by exact text; a missing key is an error.
class FileEmbeddingProvider final : public EmbeddingProvider {
public:
    FileEmbeddingProvider(const std::string& path, std::size_t dimension) : dimension_(dimension) {
        if (dimension_ == 0) throw ConfigError("embedding dimension must be positive");
        std::ifstream in(path);
        if (!in) throw IoError("cannot open embedding file: " + path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const std::string context = "embedding file line " + std::to_string(line_no);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(context + ": " + e.what());
            }
            try {
                std::string text = j.at("text").get<std::string>();
                auto vectors = j.at("vectors").get<std::vector<std::vector<double>>>();
                if (vectors.empty()) throw ValidationError(context + ": vectors must be non-empty");
                for (auto& v : vectors) {
                    if (v.size() != dimension_)
                        throw ValidationError(context + ": vector dimension " + std::to_string(v.size()) +
                                              " != configured " + std::to_string(dimension_));
                    detail::l2_normalize(v, context.c_str());
                }
                entries_[std::move(text)] = std::move(vectors);
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError(context + ": " + e.what());
            }
        }
    }

    TokenEmbeddings embed_tokens(const std::string& text) override {
        const auto& vectors = lookup(text);
        TokenEmbeddings out;
        out.dimension = dimension_;
        out.vectors = vectors;
        out.tokens = detail::whitespace_tokens(text);
        if (out.tokens.size() != out.vectors.size()) {
            out.tokens.resize(out.vectors.size());
            for (std::size_t i = 0; i < out.tokens.size(); ++i) out.tokens[i] = "token_" + std::to_string(i);
        }
        return out;
    }

    SentenceEmbedding embed_sentence(const std::string& text) override {
        const auto& vectors = lookup(text);
        std::vector<double> mean(dimension_, 0.0);
        for (const auto& v : vectors)
            for (std::size_t i = 0; i < dimension_; ++i) mean[i] += v[i];
        for (double& x : mean) x /= static_cast<double>(vectors.size());
        detail::l2_normalize(mean, "embed_sentence");
        return {std::move(mean)};
    }

    std::size_t dimension() const override { return dimension_; }
    std::string name() const override { return "file"; }

private:
    const std::vector<std::vector<double>>& lookup(const std::string& text) const {
        auto it = entries_.find(text);
        if (it == entries_.end()) throw LookupError("embedding file has no entry for text: " + text);
        return it->second;
    }

    std::size_t dimension_;
    std::unordered_map<std::string, std::vector<std::vector<double>>> entries_;
};

struct EmbeddingConfig {
    std::string provider = "fallback";  // fallback | file | remote
    std::size_t dimension = 256;
    std::string file_path;
    std::string url;
    double timeout_seconds = 10.0;
    int retries = 2;
};

}  // namespace asrfeat
