#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "asrfeat/align.hpp"
#include "asrfeat/corpus.hpp"
#include "asrfeat/dtw.hpp"
#include "asrfeat/errors.hpp"
#include "asrfeat/unicode.hpp"

namespace asrfeat {

struct ProsodyConfig {
    double ratio_cap = 1e6;
    double top_fraction = 0.3;
};

struct ProsodyFeatures {
    std::int64_t pause_ins = 0;
    std::int64_t pause_del = 0;
    std::int64_t pause_sub = 0;
    std::int64_t pause_hits = 0;
    double pause_cer = 0.0;
    double pause_mer = 0.0;
    double pause_wil = 0.0;
    double pause_wip = 0.0;
    double pause_dtw = 0.0;
    std::int64_t pause_num = 0;
    double pause_sum = 0.0;
    double pause_mean = 0.0;
    double pause_sd = 0.0;
    double pause_max = 0.0;
    double pause_min = 0.0;
    double ws_dtw = 0.0;
    double ws_dur_sum = 0.0;
    double ws_dur_mean = 0.0;
    double ws_dur_sd = 0.0;
    double ws_dur_max = 0.0;
    double ws_dur_min = 0.0;
    double speech_pause_ratio = 0.0;
    double top30_short_ws = 0.0;
    double top30_long_ws = 0.0;
    double abnormal_speed = 0.0;
    double speed_change_rate_mean = 0.0;
    double sps = 0.0;
    double increasing_speed = 0.0;
    bool speech_pause_ratio_capped = false;
};

// 0 per word token, 1 per pause token, in stream order.
inline std::vector<int> pause_sequence(const std::vector<Token>& tokens) {
    std::vector<int> bits;
    bits.reserve(tokens.size());
    for (const Token& t : tokens) bits.push_back(t.kind == TokenKind::pause ? 1 : 0);
    return bits;
}

// Interleaves the gap flags of a reference profile with its word positions
// into the same 0/1 stream shape pause_sequence produces.
inline std::vector<int> expand_reference_pauses(const ReferenceProfile& profile) {
    std::vector<int> bits;
    const std::size_t words = profile.reference_tokens.size();
    for (std::size_t i = 0; i <= words; ++i) {
        if (profile.canonical_pause_sequence[i] == 1) bits.push_back(1);
        if (i < words) bits.push_back(0);
    }
    return bits;
}

struct PauseLocationFeatures {
    std::int64_t ins = 0;
    std::int64_t del = 0;
    std::int64_t sub = 0;
    std::int64_t hits = 0;
    double cer = 0.0;
    double mer = 0.0;
    double wil = 0.0;
    double wip = 0.0;
    double dtw = 0.0;
    std::int64_t num = 0;
};

inline PauseLocationFeatures pause_location_features(const std::vector<int>& reference_pauses,
                                                     const std::vector<int>& hypothesis_pauses) {
    if (reference_pauses.empty()) throw ValidationError("pause_location_features: empty reference sequence");
    const Alignment alignment = align_sequences(reference_pauses, hypothesis_pauses);
    const ErrorMetrics metrics = error_metrics(alignment);

    PauseLocationFeatures out;
    out.ins = metrics.insertions;
    out.del = metrics.deletions;
    out.sub = metrics.substitutions;
    out.hits = metrics.hits;
    out.cer = metrics.wer;
    out.mer = metrics.mer;
    out.wil = metrics.wil;
    out.wip = metrics.wip;

    std::vector<double> ref_real(reference_pauses.begin(), reference_pauses.end());
    std::vector<double> hyp_real(hypothesis_pauses.begin(), hypothesis_pauses.end());
    out.dtw = hyp_real.empty() ? static_cast<double>(ref_real.size()) : dtw_distance(ref_real, hyp_real).distance;
    for (int bit : hypothesis_pauses) out.num += bit;
    return out;
}

struct PauseDurationStats {
    double sum = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    double max = 0.0;
    double min = 0.0;
    std::int64_t count = 0;
};

inline PauseDurationStats pause_duration_features(const std::vector<Token>& tokens) {
    std::vector<double> durations;
    for (const Token& t : tokens)
        if (t.kind == TokenKind::pause) durations.push_back(t.pause_duration);
    PauseDurationStats out;
    out.count = static_cast<std::int64_t>(durations.size());
    if (durations.empty()) return out;
    out.max = *std::max_element(durations.begin(), durations.end());
    out.min = *std::min_element(durations.begin(), durations.end());
    for (double d : durations) out.sum += d;
    out.mean = out.sum / static_cast<double>(durations.size());
    double var = 0.0;
    for (double d : durations) var += (d - out.mean) * (d - out.mean);
    out.sd = std::sqrt(var / static_cast<double>(durations.size()));
    return out;
}

struct ArticulationFeatures {
    double ws_dtw = 0.0;
    double ws_dur_sum = 0.0;
    double ws_dur_mean = 0.0;
    double ws_dur_sd = 0.0;
    double ws_dur_max = 0.0;
    double ws_dur_min = 0.0;
    double speech_pause_ratio = 0.0;
    double top30_short_ws = 0.0;
    double top30_long_ws = 0.0;
    bool ratio_capped = false;
};

// Word-segment duration features. Sum, mean, and sd are each divided by the
// segment count; max and min stay raw.
inline ArticulationFeatures articulation_features(const UtteranceRecord& record, const ReferenceProfile& profile,
                                                  const ProsodyConfig& config = {}) {
    std::vector<double> durations;
    durations.reserve(record.word_segments.size());
    for (const WordSegment& s : record.word_segments) durations.push_back(s.duration());
    if (durations.empty()) throw ValidationError("articulation_features: record has no word segments");
    const double n = static_cast<double>(durations.size());

    ArticulationFeatures out;
    out.ws_dtw = dtw_distance(durations, profile.healthy_duration_sequence).distance;

    double sum = 0.0;
    for (double d : durations) sum += d;
    const double mean = sum / n;
    double var = 0.0;
    for (double d : durations) var += (d - mean) * (d - mean);
    const double sd = std::sqrt(var / n);
    out.ws_dur_sum = sum / n;
    out.ws_dur_mean = mean / n;
    out.ws_dur_sd = sd / n;
    out.ws_dur_max = *std::max_element(durations.begin(), durations.end());
    out.ws_dur_min = *std::min_element(durations.begin(), durations.end());

    double pause_total = 0.0;
    for (const Token& t : record.tokens)
        if (t.kind == TokenKind::pause) pause_total += t.pause_duration;
    if (pause_total == 0.0) {
        out.speech_pause_ratio = config.ratio_cap;
        out.ratio_capped = true;
    } else {
        out.speech_pause_ratio = sum / pause_total;
    }

    std::vector<double> sorted = durations;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(config.top_fraction * n + 0.5)));
    double short_sum = 0.0, long_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        short_sum += sorted[i];
        long_sum += sorted[sorted.size() - 1 - i];
    }
    out.top30_short_ws = short_sum / static_cast<double>(k);
    out.top30_long_ws = long_sum / static_cast<double>(k);
    return out;
}

// Hangul syllable blocks count one each; elsewhere each maximal ASCII vowel
// run counts one.
inline std::int64_t count_syllables(const std::string& text) {
    std::int64_t count = 0;
    bool in_vowel_run = false;
    for (char32_t cp : decode_utf8(text)) {
        if (is_hangul_syllable(cp)) {
            ++count;
            in_vowel_run = false;
        } else if (cp < 0x80 && is_ascii_vowel(static_cast<char>(cp))) {
            if (!in_vowel_run) ++count;
            in_vowel_run = true;
        } else {
            in_vowel_run = false;
        }
    }
    return count;
}

struct RhythmFeatures {
    double abnormal_speed = 0.0;
    double speed_change_rate_mean = 0.0;
    double sps = 0.0;
    double increasing_speed = 0.0;
};

inline RhythmFeatures rhythm_features(const UtteranceRecord& record, const ReferenceProfile& profile) {
    std::vector<double> durations;
    durations.reserve(record.word_segments.size());
    for (const WordSegment& s : record.word_segments) durations.push_back(s.duration());
    if (durations.empty()) throw ValidationError("rhythm_features: record has no word segments");

    double total = 0.0;
    for (double d : durations) total += d;

    RhythmFeatures out;
    out.abnormal_speed = total - profile.healthy_total_duration;

    if (durations.size() >= 2) {
        double change_sum = 0.0, positive_sum = 0.0;
        for (std::size_t i = 0; i + 1 < durations.size(); ++i) {
            const double rate = (durations[i + 1] - durations[i]) / durations[i];
            change_sum += rate;
            positive_sum += std::max(0.0, rate);
        }
        const double pairs = static_cast<double>(durations.size() - 1);
        out.speed_change_rate_mean = change_sum / pairs;
        out.increasing_speed = out.speed_change_rate_mean < 0.0 ? 0.0 : positive_sum / pairs;
    }

    std::int64_t syllables = 0;
    for (const Token& t : record.tokens)
        if (t.kind == TokenKind::word) syllables += count_syllables(t.text);
    out.sps = static_cast<double>(syllables) / total;
    return out;
}

inline ProsodyFeatures prosody_features(const UtteranceRecord& record, const ReferenceProfile& profile,
                                        const ProsodyConfig& config = {}) {
    ProsodyFeatures out;

    const PauseLocationFeatures location =
        pause_location_features(expand_reference_pauses(profile), pause_sequence(record.tokens));
    out.pause_ins = location.ins;
    out.pause_del = location.del;
    out.pause_sub = location.sub;
    out.pause_hits = location.hits;
    out.pause_cer = location.cer;
    out.pause_mer = location.mer;
    out.pause_wil = location.wil;
    out.pause_wip = location.wip;
    out.pause_dtw = location.dtw;
    out.pause_num = location.num;

    const PauseDurationStats stats = pause_duration_features(record.tokens);
    out.pause_sum = stats.sum;
    out.pause_mean = stats.mean;
    out.pause_sd = stats.sd;
    out.pause_max = stats.max;
    out.pause_min = stats.min;

    const ArticulationFeatures articulation = articulation_features(record, profile, config);
    out.ws_dtw = articulation.ws_dtw;
    out.ws_dur_sum = articulation.ws_dur_sum;
    out.ws_dur_mean = articulation.ws_dur_mean;
    out.ws_dur_sd = articulation.ws_dur_sd;
    out.ws_dur_max = articulation.ws_dur_max;
    out.ws_dur_min = articulation.ws_dur_min;
    out.speech_pause_ratio = articulation.speech_pause_ratio;
    out.top30_short_ws = articulation.top30_short_ws;
    out.top30_long_ws = articulation.top30_long_ws;
    out.speech_pause_ratio_capped = articulation.ratio_capped;

    const RhythmFeatures rhythm = rhythm_features(record, profile);
    out.abnormal_speed = rhythm.abnormal_speed;
    out.speed_change_rate_mean = rhythm.speed_change_rate_mean;
    out.sps = rhythm.sps;
    out.increasing_speed = rhythm.increasing_speed;
    return out;
}

}  // namespace asrfeat
