#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "asrfeat/align.hpp"
#include "asrfeat/errors.hpp"
#include "asrfeat/rng.hpp"

namespace asrfeat {

using ordered_json = nlohmann::ordered_json;

// Hypothesis-text stand-in for a pause token when tokens are joined into a
// plain string. Word features strip it before alignment.
inline constexpr const char* kPauseMarker = "<pause>";

enum class TokenKind { word, pause };

struct Token {
    TokenKind kind = TokenKind::word;
    std::string text;             // empty for pause tokens
    double pause_duration = 0.0;  // seconds, > 0 iff kind == pause

    static Token make_word(std::string text) { return {TokenKind::word, std::move(text), 0.0}; }
    static Token make_pause(double duration) { return {TokenKind::pause, {}, duration}; }
};

struct WordSegment {
    double start = 0.0;
    double end = 0.0;

    double duration() const { return end - start; }
};

// Three-level severity: 0 none, 2 most severe.
class SeverityLabel {
public:
    SeverityLabel() = default;
    explicit SeverityLabel(int level) : level_(level) {
        if (level < 0 || level > 2) throw ValidationError("severity must be 0, 1, or 2 (got " + std::to_string(level) + ")");
    }

    int level() const { return level_; }
    bool operator==(const SeverityLabel& other) const { return level_ == other.level_; }

private:
    int level_ = 0;
};

inline constexpr int kNumSeverityLevels = 3;

// One read sentence by one speaker: the transcript token stream (words and
// pause tokens) plus one timed segment per word token.
struct UtteranceRecord {
    std::string utterance_id;
    std::string speaker_id;
    std::string sentence_id;
    SeverityLabel severity;
    std::vector<Token> tokens;
    std::vector<WordSegment> word_segments;

    std::vector<std::string> word_texts() const {
        std::vector<std::string> out;
        for (const Token& t : tokens)
            if (t.kind == TokenKind::word) out.push_back(t.text);
        return out;
    }
};

// Checks the UtteranceRecord invariants; `context` prefixes error messages.
inline void validate_record(const UtteranceRecord& record, const std::string& context) {
    std::size_t words = 0;
    for (std::size_t i = 0; i < record.tokens.size(); ++i) {
        const Token& t = record.tokens[i];
        if (t.kind == TokenKind::word) {
            if (t.text.empty()) throw ValidationError(context + ": word token " + std::to_string(i) + " has empty text");
            ++words;
        } else {
            if (!(t.pause_duration > 0.0))
                throw ValidationError(context + ": pause token " + std::to_string(i) + " must have positive pause_duration");
        }
    }
    if (words != record.word_segments.size())
        throw ValidationError(context + ": segment/token count mismatch (" + std::to_string(words) + " word tokens, " +
                              std::to_string(record.word_segments.size()) + " segments)");
    for (std::size_t i = 0; i < record.word_segments.size(); ++i) {
        const WordSegment& s = record.word_segments[i];
        if (!(s.end > s.start))
            throw ValidationError(context + ": segment " + std::to_string(i) + " must have end > start");
        if (i > 0 && record.word_segments[i - 1].end > s.start)
            throw ValidationError(context + ": segment " + std::to_string(i) + " overlaps previous segment");
    }
}

// Per canonical sentence: the reference word sequence, the clinician pause
// flags over gaps (length tokens+1: leading, between-words, trailing), the
// healthy mean duration per word and the healthy total duration.
struct ReferenceProfile {
    std::string sentence_id;
    std::vector<std::string> reference_tokens;
    std::vector<int> canonical_pause_sequence;  // length reference_tokens.size() + 1
    std::vector<double> healthy_duration_sequence;
    double healthy_total_duration = 0.0;
};

inline void validate_profile(const ReferenceProfile& p) {
    if (p.reference_tokens.empty()) throw ValidationError("reference profile " + p.sentence_id + ": empty reference_tokens");
    if (p.canonical_pause_sequence.size() != p.reference_tokens.size() + 1)
        throw ValidationError("reference profile " + p.sentence_id + ": canonical_pause_sequence must have length tokens+1");
    for (int bit : p.canonical_pause_sequence)
        if (bit != 0 && bit != 1) throw ValidationError("reference profile " + p.sentence_id + ": pause flags must be 0 or 1");
    if (p.healthy_duration_sequence.size() != p.reference_tokens.size())
        throw ValidationError("reference profile " + p.sentence_id + ": healthy_duration_sequence length mismatch");
    double sum = 0.0;
    for (double d : p.healthy_duration_sequence) {
        if (!(d > 0.0)) throw ValidationError("reference profile " + p.sentence_id + ": durations must be positive");
        sum += d;
    }
    if (std::fabs(sum - p.healthy_total_duration) > 1e-9)
        throw ValidationError("reference profile " + p.sentence_id + ": healthy_total_duration does not match duration sum");
}

struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
};

// ---------------------------------------------------------------------------
// Corpus stream format: UTF-8 JSON lines, one record per line, keys in
// canonical order. parse -> serialize is byte-identical for canonical input.

inline ordered_json record_to_json(const UtteranceRecord& r) {
    ordered_json tokens = ordered_json::array();
    for (const Token& t : r.tokens) {
        ordered_json jt;
        jt["kind"] = t.kind == TokenKind::word ? "word" : "pause";
        jt["text"] = t.text;
        if (t.kind == TokenKind::pause) jt["pause_duration"] = t.pause_duration;
        tokens.push_back(std::move(jt));
    }
    ordered_json segments = ordered_json::array();
    for (const WordSegment& s : r.word_segments) {
        ordered_json js;
        js["start"] = s.start;
        js["end"] = s.end;
        segments.push_back(std::move(js));
    }
    ordered_json j;
    j["utterance_id"] = r.utterance_id;
    j["speaker_id"] = r.speaker_id;
    j["sentence_id"] = r.sentence_id;
    j["severity"] = r.severity.level();
    j["tokens"] = std::move(tokens);
    j["segments"] = std::move(segments);
    return j;
}

inline std::string serialize_record(const UtteranceRecord& r) { return record_to_json(r).dump(); }

inline void serialize_corpus(const std::vector<UtteranceRecord>& records, std::ostream& out) {
    for (const UtteranceRecord& r : records) out << serialize_record(r) << '\n';
}

namespace detail {

inline const ordered_json& require_key(const ordered_json& j, const char* key, const std::string& context) {
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError(context + ": missing key '" + key + "'");
    return *it;
}

}  // namespace detail

inline UtteranceRecord record_from_json(const ordered_json& j, const std::string& context) {
    UtteranceRecord r;
    try {
        r.utterance_id = detail::require_key(j, "utterance_id", context).get<std::string>();
        r.speaker_id = detail::require_key(j, "speaker_id", context).get<std::string>();
        r.sentence_id = detail::require_key(j, "sentence_id", context).get<std::string>();
        const int level = detail::require_key(j, "severity", context).get<int>();
        if (level < 0 || level > 2) throw ValidationError(context + ": severity must be in {0,1,2}");
        r.severity = SeverityLabel(level);
        for (const auto& jt : detail::require_key(j, "tokens", context)) {
            const std::string kind = detail::require_key(jt, "kind", context).get<std::string>();
            if (kind == "word") {
                r.tokens.push_back(Token::make_word(detail::require_key(jt, "text", context).get<std::string>()));
            } else if (kind == "pause") {
                r.tokens.push_back(Token::make_pause(detail::require_key(jt, "pause_duration", context).get<double>()));
            } else {
                throw ValidationError(context + ": token kind must be 'word' or 'pause'");
            }
        }
        for (const auto& js : detail::require_key(j, "segments", context)) {
            r.word_segments.push_back({detail::require_key(js, "start", context).get<double>(),
                                       detail::require_key(js, "end", context).get<double>()});
        }
    } catch (const ordered_json::exception& e) {
        throw ValidationError(context + ": " + e.what());
    }
    validate_record(r, context);
    return r;
}

// Parses a line-delimited corpus stream. Blank lines are skipped; a
// malformed line raises ParseError naming the line, an invariant violation
// raises ValidationError naming the field.
inline std::vector<UtteranceRecord> parse_corpus(std::istream& in) {
    std::vector<UtteranceRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string context = "corpus line " + std::to_string(line_no);
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const ordered_json::exception& e) {
            throw ParseError(context + ": " + e.what());
        }
        out.push_back(record_from_json(j, context));
    }
    return out;
}

inline std::vector<UtteranceRecord> parse_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path);
    return parse_corpus(in);
}

// ---------------------------------------------------------------------------
// Reference sentences (words + clinician pause flags), one JSON object per line.

struct SentenceReference {
    std::string sentence_id;
    std::vector<std::string> tokens;
    std::vector<int> canonical_pauses;  // stored as length tokens+1
};

inline std::vector<SentenceReference> parse_references(std::istream& in) {
    std::vector<SentenceReference> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string context = "reference line " + std::to_string(line_no);
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const ordered_json::exception& e) {
            throw ParseError(context + ": " + e.what());
        }
        SentenceReference ref;
        try {
            ref.sentence_id = detail::require_key(j, "sentence_id", context).get<std::string>();
            ref.tokens = detail::require_key(j, "tokens", context).get<std::vector<std::string>>();
            ref.canonical_pauses = detail::require_key(j, "canonical_pauses", context).get<std::vector<int>>();
        } catch (const ordered_json::exception& e) {
            throw ValidationError(context + ": " + e.what());
        }
        if (ref.tokens.empty()) throw ValidationError(context + ": tokens must be non-empty");
        // Gap-only arrays (length tokens-1) are accepted and padded with
        // explicit leading/trailing zeros to the canonical tokens+1 form.
        if (ref.canonical_pauses.size() == ref.tokens.size() - 1) {
            ref.canonical_pauses.insert(ref.canonical_pauses.begin(), 0);
            ref.canonical_pauses.push_back(0);
        } else if (ref.canonical_pauses.size() != ref.tokens.size() + 1) {
            throw ValidationError(context + ": canonical_pauses must have length tokens-1 or tokens+1");
        }
        for (int bit : ref.canonical_pauses)
            if (bit != 0 && bit != 1) throw ValidationError(context + ": canonical_pauses entries must be 0 or 1");
        out.push_back(std::move(ref));
    }
    return out;
}

inline std::vector<SentenceReference> parse_references_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open reference file: " + path);
    return parse_references(in);
}

inline void serialize_references(const std::vector<SentenceReference>& refs, std::ostream& out) {
    for (const SentenceReference& ref : refs) {
        ordered_json j;
        j["sentence_id"] = ref.sentence_id;
        j["tokens"] = ref.tokens;
        j["canonical_pauses"] = ref.canonical_pauses;
        out << j.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Stratified split.

// Largest-remainder seat assignment of n items to the three ratios;
// leftover seats go to the largest fractional parts, ties resolved toward
// the earlier split (train first).
inline std::array<std::size_t, 3> split_counts(std::size_t n, const std::array<double, 3>& ratios) {
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> fractional{};
    std::size_t assigned = 0;
    for (int k = 0; k < 3; ++k) {
        const double ideal = ratios[k] * static_cast<double>(n);
        counts[k] = static_cast<std::size_t>(std::floor(ideal + 1e-12));
        fractional[k] = ideal - static_cast<double>(counts[k]);
        assigned += counts[k];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fractional[a] > fractional[b]; });
    for (std::size_t leftover = n - assigned, k = 0; leftover > 0; --leftover, ++k) counts[order[k % 3]] += 1;
    return counts;
}

// Index-level stratified split over integer class labels.
inline std::array<std::vector<std::size_t>, 3> stratified_split_indices(const std::vector<int>& labels,
                                                                        const std::array<double, 3>& ratios,
                                                                        std::uint64_t seed) {
    double ratio_sum = 0.0;
    for (double r : ratios) {
        if (r < 0.0) throw ValidationError("split ratios must be non-negative");
        ratio_sum += r;
    }
    if (std::fabs(ratio_sum - 1.0) > 1e-9) throw ValidationError("split ratios must sum to 1");

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    std::array<std::vector<std::size_t>, 3> out;
    Rng rng(seed);
    for (auto& [label, members] : by_class) {
        if (members.size() < 3)
            throw ValidationError("class " + std::to_string(label) + " has fewer records than splits (" +
                                  std::to_string(members.size()) + " < 3)");
        rng.shuffle(members);
        const auto counts = split_counts(members.size(), ratios);
        std::size_t pos = 0;
        for (int k = 0; k < 3; ++k)
            for (std::size_t c = 0; c < counts[k]; ++c) out[k].push_back(members[pos++]);
    }
    for (auto& part : out) std::sort(part.begin(), part.end());
    return out;
}

// Deterministic per-class 8:1:1-style split over utterance ids.
inline DatasetSplit stratified_split(const std::vector<UtteranceRecord>& records, const std::array<double, 3>& ratios,
                                     std::uint64_t seed) {
    std::vector<int> labels;
    labels.reserve(records.size());
    for (const UtteranceRecord& r : records) labels.push_back(r.severity.level());
    const auto idx = stratified_split_indices(labels, ratios, seed);
    DatasetSplit split;
    for (std::size_t i : idx[0]) split.train.push_back(records[i].utterance_id);
    for (std::size_t i : idx[1]) split.validation.push_back(records[i].utterance_id);
    for (std::size_t i : idx[2]) split.test.push_back(records[i].utterance_id);
    return split;
}

inline void write_split_file(const DatasetSplit& split, const std::string& path) {
    ordered_json j;
    j["train"] = split.train;
    j["validation"] = split.validation;
    j["test"] = split.test;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write split file: " + path);
    out << j.dump(2) << '\n';
}

inline DatasetSplit read_split_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open split file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const ordered_json::exception& e) {
        throw ParseError(std::string("split file: ") + e.what());
    }
    DatasetSplit split;
    try {
        split.train = detail::require_key(j, "train", "split file").get<std::vector<std::string>>();
        split.validation = detail::require_key(j, "validation", "split file").get<std::vector<std::string>>();
        split.test = detail::require_key(j, "test", "split file").get<std::vector<std::string>>();
    } catch (const ordered_json::exception& e) {
        throw ValidationError(std::string("split file: ") + e.what());
    }
    return split;
}

// ---------------------------------------------------------------------------
// Healthy reference profile.

// Averages healthy word durations per reference position. Each record is
// aligned to the reference with the edit-distance aligner; hit and
// substitution positions contribute their segment duration. Positions no
// record realized fall back to the global mean duration. The total is the
// sum of the averaged sequence.
inline ReferenceProfile build_reference_profile(const std::vector<UtteranceRecord>& healthy_records,
                                                const std::vector<std::string>& reference_tokens,
                                                const std::vector<int>& canonical_pauses) {
    if (healthy_records.empty()) throw ValidationError("build_reference_profile: no healthy records");
    if (reference_tokens.empty()) throw ValidationError("build_reference_profile: reference_tokens must be non-empty");

    const std::string& sentence_id = healthy_records.front().sentence_id;
    for (const UtteranceRecord& r : healthy_records) {
        if (r.severity.level() != 0)
            throw ValidationError("build_reference_profile: record " + r.utterance_id + " is not severity 0");
        if (r.sentence_id != sentence_id)
            throw ValidationError("build_reference_profile: record " + r.utterance_id + " has sentence_id '" +
                                  r.sentence_id + "', expected '" + sentence_id + "'");
    }

    std::vector<double> sums(reference_tokens.size(), 0.0);
    std::vector<std::size_t> counts(reference_tokens.size(), 0);
    double global_sum = 0.0;
    std::size_t global_count = 0;

    for (const UtteranceRecord& r : healthy_records) {
        const std::vector<std::string> words = r.word_texts();
        for (const WordSegment& s : r.word_segments) {
            global_sum += s.duration();
            ++global_count;
        }
        const Alignment alignment = align_sequences(reference_tokens, words);
        for (const EditOp& op : alignment.ops) {
            if (op.kind == EditOpKind::hit || op.kind == EditOpKind::substitution) {
                sums[*op.ref_index] += r.word_segments[*op.hyp_index].duration();
                counts[*op.ref_index] += 1;
            }
        }
    }
    if (global_count == 0) throw ValidationError("build_reference_profile: healthy records contain no word segments");
    const double global_mean = global_sum / static_cast<double>(global_count);

    ReferenceProfile profile;
    profile.sentence_id = sentence_id;
    profile.reference_tokens = reference_tokens;
    profile.canonical_pause_sequence = canonical_pauses;
    if (profile.canonical_pause_sequence.size() == reference_tokens.size() - 1) {
        profile.canonical_pause_sequence.insert(profile.canonical_pause_sequence.begin(), 0);
        profile.canonical_pause_sequence.push_back(0);
    }
    profile.healthy_duration_sequence.resize(reference_tokens.size());
    for (std::size_t i = 0; i < reference_tokens.size(); ++i)
        profile.healthy_duration_sequence[i] =
            counts[i] > 0 ? sums[i] / static_cast<double>(counts[i]) : global_mean;
    profile.healthy_total_duration =
        std::accumulate(profile.healthy_duration_sequence.begin(), profile.healthy_duration_sequence.end(), 0.0);
    validate_profile(profile);
    return profile;
}

}  // namespace asrfeat
