#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "asrfeat/config.hpp"
#include "asrfeat/corpus.hpp"
#include "asrfeat/embeddings.hpp"
#include "asrfeat/errors.hpp"
#include "asrfeat/feature_matrix.hpp"
#include "asrfeat/rng.hpp"

namespace asrfeat {

// One profile per sentence, averaged from that sentence's severity-0 reads.
inline std::map<std::string, ReferenceProfile> build_profiles(const std::vector<UtteranceRecord>& records,
                                                              const std::vector<SentenceReference>& references) {
    std::map<std::string, std::vector<UtteranceRecord>> healthy;
    for (const UtteranceRecord& r : records)
        if (r.severity.level() == 0) healthy[r.sentence_id].push_back(r);

    std::map<std::string, ReferenceProfile> profiles;
    for (const SentenceReference& ref : references) {
        auto it = healthy.find(ref.sentence_id);
        if (it == healthy.end())
            throw ValidationError("sentence " + ref.sentence_id + " has no severity-0 records to profile");
        profiles[ref.sentence_id] = build_reference_profile(it->second, ref.tokens, ref.canonical_pauses);
    }
    for (const UtteranceRecord& r : records)
        if (profiles.find(r.sentence_id) == profiles.end())
            throw ValidationError("utterance " + r.utterance_id + " reads sentence '" + r.sentence_id +
                                  "' which has no reference");
    return profiles;
}

// Fans extraction out over worker threads. Slots are indexed, so the output
// order matches the record order no matter how work interleaves; the
// lowest-index failure wins error reporting.
inline std::vector<FeatureVector> extract_all(const std::vector<UtteranceRecord>& records,
                                              const std::map<std::string, ReferenceProfile>& profiles,
                                              EmbeddingProvider& provider, const ExtractionConfig& config,
                                              int workers = 0) {
    std::vector<FeatureVector> out(records.size());
    std::vector<std::exception_ptr> failures(records.size());
    std::size_t thread_count = workers > 0 ? static_cast<std::size_t>(workers)
                                           : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    thread_count = std::min(thread_count, std::max<std::size_t>(1, records.size()));

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= records.size()) return;
            try {
                const auto it = profiles.find(records[i].sentence_id);
                if (it == profiles.end())
                    throw ValidationError("utterance " + records[i].utterance_id + ": no profile for sentence '" +
                                          records[i].sentence_id + "'");
                out[i] = extract_features(records[i], it->second, provider, config);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };

    if (thread_count == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(thread_count);
        for (std::size_t t = 0; t < thread_count; ++t) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }

    for (const std::exception_ptr& failure : failures)
        if (failure) std::rethrow_exception(failure);
    return out;
}

// Rows for the given utterance ids, in the order the ids are listed.
inline FeatureMatrix select_rows(const FeatureMatrix& matrix, const std::vector<std::string>& ids) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < matrix.utterance_ids.size(); ++r) index[matrix.utterance_ids[r]] = r;

    FeatureMatrix out;
    out.manifest = matrix.manifest;
    for (const std::string& id : ids) {
        auto it = index.find(id);
        if (it == index.end()) throw LookupError("utterance " + id + " is not in the feature matrix");
        out.utterance_ids.push_back(id);
        out.rows.push_back(matrix.rows[it->second]);
        out.labels.push_back(matrix.labels[it->second]);
    }
    return out;
}

inline std::vector<int> shuffled_labels(const std::vector<int>& labels, std::uint64_t seed) {
    std::vector<int> out = labels;
    Rng rng(seed);
    rng.shuffle(out);
    return out;
}

}  // namespace asrfeat
