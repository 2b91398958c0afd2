#pragma once

#include <string>
#include <vector>

#include "asrfeat/align.hpp"
#include "asrfeat/corpus.hpp"
#include "asrfeat/embeddings.hpp"
#include "asrfeat/errors.hpp"
#include "asrfeat/unicode.hpp"

namespace asrfeat {

inline std::vector<std::string> default_fillers() { return {"어", "음", "으", "그"}; }

struct PronunciationFeatures {
    std::int64_t insertion = 0;
    std::int64_t deletion = 0;
    std::int64_t substitution = 0;
    std::int64_t hits = 0;
    double wer = 0.0;
    double mer = 0.0;
    double wil = 0.0;
    double wip = 0.0;
    double bert_score_f1 = 0.0;
    std::int64_t max_repetition = 0;
    double filler_similarity = 0.0;
};

// Word-level alignment metrics; pause markers are dropped from the
// hypothesis before aligning.
inline ErrorMetrics syntactic_features(const std::string& reference_text, const std::string& hypothesis_text) {
    const std::vector<std::string> reference = tokenize(reference_text, Granularity::word);
    if (reference.empty()) throw ValidationError("syntactic_features: empty reference");
    std::vector<std::string> hypothesis;
    for (std::string& token : tokenize(hypothesis_text, Granularity::word))
        if (token != kPauseMarker) hypothesis.push_back(std::move(token));
    return error_metrics(align_sequences(reference, hypothesis));
}

struct BertScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Greedy token matching over provider embeddings: recall averages, over
// reference tokens, the best cosine against any hypothesis token;
// precision is the mirror image; f1 is their harmonic mean.
inline BertScore bert_score(const std::string& reference_text, const std::string& hypothesis_text,
                            EmbeddingProvider& provider) {
    const TokenEmbeddings ref = provider.embed_tokens(reference_text);
    const TokenEmbeddings hyp = provider.embed_tokens(hypothesis_text);

    auto greedy_mean = [](const TokenEmbeddings& from, const TokenEmbeddings& against) {
        double total = 0.0;
        for (const auto& v : from.vectors) {
            double best = -1.0;
            for (const auto& w : against.vectors) best = std::max(best, cosine_similarity(v, w));
            total += best;
        }
        return total / static_cast<double>(from.vectors.size());
    };

    BertScore score;
    score.recall = greedy_mean(ref, hyp);
    score.precision = greedy_mean(hyp, ref);
    const double denom = score.precision + score.recall;
    score.f1 = denom == 0.0 ? 0.0 : 2.0 * score.precision * score.recall / denom;
    return score;
}

// Longest run of one code point after removing whitespace; runs may span
// what were token boundaries.
inline std::int64_t max_repetition(const std::string& hypothesis_text) {
    std::vector<char32_t> kept;
    for (char32_t cp : decode_utf8(hypothesis_text))
        if (!(cp < 0x80 && is_space(static_cast<char>(cp)))) kept.push_back(cp);
    if (kept.empty()) return 0;
    std::int64_t best = 1, run = 1;
    for (std::size_t i = 1; i < kept.size(); ++i) {
        run = kept[i] == kept[i - 1] ? run + 1 : 1;
        best = std::max(best, run);
    }
    return best;
}

inline double filler_similarity(const std::string& hypothesis_text, const std::vector<std::string>& fillers,
                                EmbeddingProvider& provider) {
    if (fillers.empty()) throw ValidationError("filler_similarity: empty filler list");
    const SentenceEmbedding hyp = provider.embed_sentence(hypothesis_text);
    double total = 0.0;
    for (const std::string& filler : fillers)
        total += cosine_similarity(provider.embed_sentence(filler).vector, hyp.vector);
    return total / static_cast<double>(fillers.size());
}

inline PronunciationFeatures pronunciation_features(const std::string& reference_text,
                                                    const std::string& hypothesis_text,
                                                    const std::vector<std::string>& fillers,
                                                    EmbeddingProvider& provider) {
    PronunciationFeatures out;
    const ErrorMetrics metrics = syntactic_features(reference_text, hypothesis_text);
    out.insertion = metrics.insertions;
    out.deletion = metrics.deletions;
    out.substitution = metrics.substitutions;
    out.hits = metrics.hits;
    out.wer = metrics.wer;
    out.mer = metrics.mer;
    out.wil = metrics.wil;
    out.wip = metrics.wip;

    std::string words;
    for (std::string& token : tokenize(hypothesis_text, Granularity::word)) {
        if (token == kPauseMarker) continue;
        if (!words.empty()) words.push_back(' ');
        words += token;
    }
    if (words.empty()) throw ValidationError("pronunciation_features: hypothesis has no word tokens");
    out.bert_score_f1 = bert_score(reference_text, words, provider).f1;
    out.max_repetition = max_repetition(words);
    out.filler_similarity = filler_similarity(words, fillers, provider);
    return out;
}

}  // namespace asrfeat
