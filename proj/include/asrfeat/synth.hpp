#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "asrfeat/corpus.hpp"
#include "asrfeat/pronunciation.hpp"
#include "asrfeat/prosody.hpp"
#include "asrfeat/rng.hpp"
#include "asrfeat/unicode.hpp"

namespace asrfeat {

struct SynthConfig {
    int utterances = 540;
    std::uint64_t seed = 13;
};

struct SynthCorpus {
    std::vector<SentenceReference> references;
    std::vector<UtteranceRecord> records;
};

namespace detail {

// Severity knobs. Every statistic shifts monotonically with the level, with
// per-utterance noise wide enough that single features overlap between
// neighboring levels. The stutter run length is the exception: its ranges
// are disjoint on purpose.
struct SeverityParams {
    double rate_mult;
    double p_sub;
    double p_del;
    double p_ins;
    double extra_pause_p1;
    double extra_pause_p2;
    double pause_mean;
    int run_min;
    int run_max;
};

inline constexpr std::array<SeverityParams, 3> kSeverityParams = {{
    {1.00, 0.04, 0.02, 0.02, 0.20, 0.05, 0.35, 2, 3},
    {1.15, 0.09, 0.05, 0.05, 0.50, 0.18, 0.60, 4, 6},
    {1.55, 0.22, 0.18, 0.16, 0.95, 0.70, 1.30, 7, 9},
}};

inline const std::vector<std::vector<std::string>>& synth_sentences() {
    static const std::vector<std::vector<std::string>> sentences = {
        {"가을", "하늘", "아래", "단풍", "잎이", "붉게", "물든다"},
        {"아침", "바람", "살짝", "불어", "창문", "틈이", "시원하다"},
        {"겨울", "눈이", "소복", "쌓여", "마을", "길이", "하얗다"},
        {"여름", "바다", "파도", "소리", "멀리", "퍼져", "나간다"},
        {"봄비", "내려", "들판", "근처", "새싹", "돋아", "자란다"},
        {"저녁", "노을", "붉은", "빛이", "강물", "위에", "번진다"},
    };
    return sentences;
}

inline const std::vector<char32_t>& corruption_pool() {
    static const std::vector<char32_t> pool = decode_utf8("고나도루미보수오주초");
    return pool;
}

inline const std::vector<std::string>& insertion_pool() {
    static const std::vector<std::string> pool = {"어", "음", "그"};
    return pool;
}

inline std::string corrupt_word(const std::string& word, Rng& rng) {
    std::vector<char32_t> cps = decode_utf8(word);
    const std::size_t at = static_cast<std::size_t>(rng.below(cps.size()));
    const auto& pool = corruption_pool();
    std::size_t pick = static_cast<std::size_t>(rng.below(pool.size()));
    for (std::size_t tries = 0; tries < pool.size(); ++tries, pick = (pick + 1) % pool.size()) {
        const char32_t candidate = pool[pick];
        if (candidate == cps[at]) continue;
        if (at > 0 && cps[at - 1] == candidate) continue;
        if (at + 1 < cps.size() && cps[at + 1] == candidate) continue;
        cps[at] = candidate;
        break;
    }
    std::string out;
    for (char32_t cp : cps) out += encode_utf8(cp);
    return out;
}

inline std::string join_words(const std::vector<std::pair<std::string, std::int64_t>>& words) {
    std::string out;
    for (const auto& [text, syllables] : words) {
        if (!out.empty()) out.push_back(' ');
        out += text;
    }
    return out;
}

struct StretchPlan {
    std::string word;
    bool ok = false;
};

// Repeats one code point of the word so the whole hypothesis carries a
// longest run of exactly `run`.
inline StretchPlan plan_stretch(std::vector<std::pair<std::string, std::int64_t>> words, std::size_t index, int run,
                                Rng& rng) {
    const std::vector<char32_t> cps = decode_utf8(words[index].first);
    const std::size_t offset = static_cast<std::size_t>(rng.below(cps.size()));
    for (std::size_t step = 0; step < cps.size(); ++step) {
        const std::size_t p = (offset + step) % cps.size();
        std::string stretched;
        for (std::size_t i = 0; i < cps.size(); ++i) {
            stretched += encode_utf8(cps[i]);
            if (i == p)
                for (int r = 1; r < run; ++r) stretched += encode_utf8(cps[i]);
        }
        words[index].first = stretched;
        if (max_repetition(join_words(words)) == run) return {stretched, true};
    }
    return {};
}

}  // namespace detail

inline std::array<std::size_t, 3> synth_class_counts(std::size_t total) {
    // Severity mix of the clinical corpus this generator stands in for:
    // 431 / 1950 / 186 records over the three levels.
    return split_counts(total, {431.0 / 2567.0, 1950.0 / 2567.0, 186.0 / 2567.0});
}

inline SynthCorpus synth_corpus(const SynthConfig& config = {}) {
    if (config.utterances < 30) throw ValidationError("synth_corpus: need at least 30 utterances");
    const auto& sentences = detail::synth_sentences();

    SynthCorpus out;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
        SentenceReference ref;
        ref.sentence_id = "s" + std::to_string(s + 1);
        ref.tokens = sentences[s];
        ref.canonical_pauses.assign(ref.tokens.size() + 1, 0);
        ref.canonical_pauses[(ref.tokens.size() + 1) / 2] = 1;
        out.references.push_back(std::move(ref));
    }

    const std::array<std::size_t, 3> counts = synth_class_counts(static_cast<std::size_t>(config.utterances));
    std::size_t global = 0;
    for (int level = 0; level < 3; ++level) {
        const detail::SeverityParams& params = detail::kSeverityParams[static_cast<std::size_t>(level)];
        for (std::size_t local = 0; local < counts[static_cast<std::size_t>(level)]; ++local, ++global) {
            const std::size_t sentence_index = local % sentences.size();
            const SentenceReference& ref = out.references[sentence_index];

            UtteranceRecord record;
            char id[16];
            std::snprintf(id, sizeof id, "u%04zu", global);
            record.utterance_id = id;
            char spk[32];
            std::snprintf(spk, sizeof spk, "spk%d_%03zu", level, local / sentences.size());
            record.speaker_id = spk;
            record.sentence_id = ref.sentence_id;
            record.severity = SeverityLabel(level);

            Rng rng(derive_seed(config.seed, global));
            Rng speaker_rng(derive_seed(config.seed, fnv1a64(record.speaker_id)));
            const double speaker_factor = std::clamp(1.0 + 0.05 * speaker_rng.normal(), 0.87, 1.13);
            const double rate = params.rate_mult * std::clamp(1.0 + 0.07 * rng.normal(), 0.82, 1.18);

            // Word-level ASR noise, sparing one word that will carry the stutter.
            const std::size_t stretch_target = static_cast<std::size_t>(rng.below(ref.tokens.size()));
            std::vector<std::pair<std::string, std::int64_t>> words;
            std::size_t stretch_position = 0;
            for (std::size_t i = 0; i < ref.tokens.size(); ++i) {
                const std::string& word = ref.tokens[i];
                const std::int64_t syllables = count_syllables(word);
                if (i == stretch_target) {
                    stretch_position = words.size();
                    words.emplace_back(word, syllables);
                } else if (rng.unit() < params.p_del) {
                    continue;
                } else if (rng.unit() < params.p_sub) {
                    words.emplace_back(detail::corrupt_word(word, rng), syllables);
                } else {
                    words.emplace_back(word, syllables);
                }
                if (rng.unit() < params.p_ins) {
                    const auto& pool = detail::insertion_pool();
                    words.emplace_back(pool[static_cast<std::size_t>(rng.below(pool.size()))], 1);
                }
            }

            const int run = params.run_min + static_cast<int>(rng.below(
                                                 static_cast<std::uint64_t>(params.run_max - params.run_min + 1)));
            detail::StretchPlan plan = detail::plan_stretch(words, stretch_position, run, rng);
            std::size_t plan_index = stretch_position;
            for (std::size_t alt = 0; !plan.ok && alt < words.size(); ++alt) {
                if (alt == stretch_position) continue;
                plan = detail::plan_stretch(words, alt, run, rng);
                if (plan.ok) plan_index = alt;
            }
            if (plan.ok) {
                words[plan_index].first = plan.word;
            } else {
                // No word position can carry the run; emit it as a trailing
                // stutter fragment instead.
                for (char32_t cp : detail::corruption_pool()) {
                    std::string stutter;
                    for (int r = 0; r < run; ++r) stutter += encode_utf8(cp);
                    auto trial = words;
                    trial.emplace_back(stutter, 1);
                    if (max_repetition(detail::join_words(trial)) == run) {
                        words.emplace_back(std::move(stutter), 1);
                        break;
                    }
                }
            }

            // Pause placement over the gaps between surviving words; healthy
            // speakers usually pause at the canonical gap.
            std::vector<std::size_t> gaps;
            if (words.size() > 1) {
                std::size_t count = 1;
                if (rng.unit() < params.extra_pause_p1) ++count;
                if (rng.unit() < params.extra_pause_p2) ++count;
                std::vector<std::size_t> candidates;
                for (std::size_t g = 1; g < words.size(); ++g) candidates.push_back(g);
                count = std::min(count, candidates.size());
                if (level == 0 && rng.unit() < 0.8) {
                    std::size_t canonical = 0;
                    for (std::size_t g = 0; g < ref.canonical_pauses.size(); ++g)
                        if (ref.canonical_pauses[g] == 1) canonical = g;
                    canonical = std::clamp<std::size_t>(canonical, 1, words.size() - 1);
                    gaps.push_back(canonical);
                    candidates.erase(std::find(candidates.begin(), candidates.end(), canonical));
                }
                while (gaps.size() < count && !candidates.empty()) {
                    const std::size_t pick = static_cast<std::size_t>(rng.below(candidates.size()));
                    gaps.push_back(candidates[pick]);
                    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
                }
                std::sort(gaps.begin(), gaps.end());
            }

            // Timeline. The stutter word keeps its original syllable count,
            // so run length never leaks into the durations.
            double t = 0.05 + 0.05 * rng.unit();
            std::size_t gap_at = 0;
            for (std::size_t i = 0; i < words.size(); ++i) {
                const double noise = std::clamp(1.0 + 0.06 * rng.normal(), 0.8, 1.2);
                const double duration =
                    std::max(0.05, static_cast<double>(words[i].second) * 0.17 * speaker_factor * rate * noise);
                record.tokens.push_back(Token::make_word(words[i].first));
                record.word_segments.push_back({t, t + duration});
                t += duration;
                if (i + 1 < words.size()) {
                    if (gap_at < gaps.size() && gaps[gap_at] == i + 1) {
                        ++gap_at;
                        const double pause =
                            std::clamp(params.pause_mean * (1.0 + 0.3 * rng.normal()), 0.08, 2.5);
                        record.tokens.push_back(Token::make_pause(pause));
                        t += pause + 0.02;
                    } else {
                        t += 0.03 + 0.02 * rng.unit();
                    }
                }
            }
            validate_record(record, record.utterance_id);
            out.records.push_back(std::move(record));
        }
    }
    return out;
}

}  // namespace asrfeat
