#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "asrfeat/corpus.hpp"
#include "asrfeat/embeddings.hpp"
#include "asrfeat/errors.hpp"
#include "asrfeat/pronunciation.hpp"
#include "asrfeat/prosody.hpp"
#include "asrfeat/rng.hpp"

namespace asrfeat {

struct ExtractionConfig {
    std::vector<std::string> fillers = default_fillers();
    ProsodyConfig prosody;
};

struct FeatureEntry {
    std::string name;
    std::string category;  // pronunciation | prosody
    std::string note;
};

inline std::vector<FeatureEntry> feature_manifest(const ExtractionConfig& config = {}) {
    std::string filler_list;
    for (const std::string& f : config.fillers) {
        if (!filler_list.empty()) filler_list += " ";
        filler_list += f;
    }
    std::ostringstream cap;
    cap << config.prosody.ratio_cap;
    std::ostringstream frac;
    frac << config.prosody.top_fraction;

    return {
        {"insertion", "pronunciation", "word insertions against the reference"},
        {"deletion", "pronunciation", "word deletions against the reference"},
        {"substitution", "pronunciation", "word substitutions against the reference"},
        {"hits", "pronunciation", "exact word matches"},
        {"wer", "pronunciation", "(S+D+I)/(H+S+D)"},
        {"mer", "pronunciation", "(S+D+I)/(H+S+D+I)"},
        {"wil", "pronunciation", "1 - WIP"},
        {"wip", "pronunciation", "(H/(H+S+D)) * (H/(H+S+I))"},
        {"bert_score_f1", "pronunciation",
         "harmonic mean of greedy token-matching precision and recall over provider embeddings"},
        {"max_repetition", "pronunciation",
         "longest single-character run with whitespace removed; runs may span token boundaries"},
        {"filler_similarity", "pronunciation", "mean sentence-embedding cosine against fillers: " + filler_list},
        {"pause_ins", "prosody", "pause-bit insertions against the expanded canonical pause sequence"},
        {"pause_del", "prosody", "pause-bit deletions"},
        {"pause_sub", "prosody", "pause-bit substitutions"},
        {"pause_hits", "prosody", "pause-bit matches"},
        {"pause_cer", "prosody", "(S+D+I)/(H+S+D) over pause bits"},
        {"pause_mer", "prosody", "(S+D+I)/(H+S+D+I) over pause bits"},
        {"pause_wil", "prosody", "1 - pause WIP"},
        {"pause_wip", "prosody", "(H/(H+S+D)) * (H/(H+S+I)) over pause bits"},
        {"pause_dtw", "prosody",
         "DTW distance between pause-bit sequences; a pauseless empty stream scores the reference length"},
        {"pause_num", "prosody", "pause tokens in the hypothesis"},
        {"pause_sum", "prosody", "total pause duration; 0 when no pauses"},
        {"pause_mean", "prosody", "mean pause duration; 0 when no pauses"},
        {"pause_sd", "prosody", "population sd of pause durations; 0 when no pauses"},
        {"pause_max", "prosody", "longest pause duration; 0 when no pauses"},
        {"pause_min", "prosody", "shortest pause duration; 0 when no pauses"},
        {"ws_dtw", "prosody", "DTW distance between segment durations and the healthy duration sequence"},
        {"ws_dur_sum", "prosody", "segment duration sum divided by segment count"},
        {"ws_dur_mean", "prosody", "segment duration mean divided by segment count"},
        {"ws_dur_sd", "prosody", "segment duration population sd divided by segment count"},
        {"ws_dur_max", "prosody", "longest segment duration"},
        {"ws_dur_min", "prosody", "shortest segment duration"},
        {"speech_pause_ratio", "prosody",
         "speech total over pause total; " + cap.str() + " when the pause total is zero"},
        {"top30_short_ws", "prosody",
         "mean of the k shortest segment durations, k = max(1, round(" + frac.str() + "*n))"},
        {"top30_long_ws", "prosody",
         "mean of the k longest segment durations, k = max(1, round(" + frac.str() + "*n))"},
        {"abnormal_speed", "prosody", "speech total minus the healthy total duration"},
        {"speed_change_rate_mean", "prosody", "mean of (d[i+1]-d[i])/d[i] over consecutive segments"},
        {"sps", "prosody", "word syllables per second of articulated speech"},
        {"increasing_speed", "prosody", "mean positive duration change; 0 when the mean change is negative"},
    };
}

inline void serialize_manifest(const std::vector<FeatureEntry>& manifest, std::ostream& out) {
    for (const FeatureEntry& entry : manifest) {
        ordered_json j;
        j["name"] = entry.name;
        j["category"] = entry.category;
        j["note"] = entry.note;
        out << j.dump() << '\n';
    }
}

inline std::string manifest_hash(const std::vector<FeatureEntry>& manifest) {
    std::ostringstream buffer;
    serialize_manifest(manifest, buffer);
    const std::uint64_t h = fnv1a64(buffer.str());
    std::array<char, 17> hex{};
    std::snprintf(hex.data(), hex.size(), "%016llx", static_cast<unsigned long long>(h));
    return std::string(hex.data(), 16);
}

struct FeatureVector {
    std::string utterance_id;
    std::vector<std::pair<std::string, double>> values;
    SeverityLabel label;
};

inline FeatureVector extract_features(const UtteranceRecord& record, const ReferenceProfile& profile,
                                      EmbeddingProvider& provider, const ExtractionConfig& config = {}) {
    if (record.sentence_id != profile.sentence_id)
        throw ValidationError("utterance " + record.utterance_id + ": profile is for sentence '" +
                              profile.sentence_id + "', record reads '" + record.sentence_id + "'");

    std::string reference_text;
    for (const std::string& token : profile.reference_tokens) {
        if (!reference_text.empty()) reference_text.push_back(' ');
        reference_text += token;
    }
    std::string hypothesis_text;
    for (const Token& token : record.tokens) {
        if (!hypothesis_text.empty()) hypothesis_text.push_back(' ');
        hypothesis_text += token.kind == TokenKind::word ? token.text : kPauseMarker;
    }

    PronunciationFeatures pron;
    ProsodyFeatures pros;
    try {
        pron = pronunciation_features(reference_text, hypothesis_text, config.fillers, provider);
        pros = prosody_features(record, profile, config.prosody);
    } catch (const TransportError& e) {
        throw TransportError("utterance " + record.utterance_id + ": " + e.what());
    } catch (const LookupError& e) {
        throw LookupError("utterance " + record.utterance_id + ": " + e.what());
    } catch (const Error& e) {
        throw ValidationError("utterance " + record.utterance_id + ": " + e.what());
    }

    FeatureVector out;
    out.utterance_id = record.utterance_id;
    out.label = record.severity;
    out.values = {
        {"insertion", static_cast<double>(pron.insertion)},
        {"deletion", static_cast<double>(pron.deletion)},
        {"substitution", static_cast<double>(pron.substitution)},
        {"hits", static_cast<double>(pron.hits)},
        {"wer", pron.wer},
        {"mer", pron.mer},
        {"wil", pron.wil},
        {"wip", pron.wip},
        {"bert_score_f1", pron.bert_score_f1},
        {"max_repetition", static_cast<double>(pron.max_repetition)},
        {"filler_similarity", pron.filler_similarity},
        {"pause_ins", static_cast<double>(pros.pause_ins)},
        {"pause_del", static_cast<double>(pros.pause_del)},
        {"pause_sub", static_cast<double>(pros.pause_sub)},
        {"pause_hits", static_cast<double>(pros.pause_hits)},
        {"pause_cer", pros.pause_cer},
        {"pause_mer", pros.pause_mer},
        {"pause_wil", pros.pause_wil},
        {"pause_wip", pros.pause_wip},
        {"pause_dtw", pros.pause_dtw},
        {"pause_num", static_cast<double>(pros.pause_num)},
        {"pause_sum", pros.pause_sum},
        {"pause_mean", pros.pause_mean},
        {"pause_sd", pros.pause_sd},
        {"pause_max", pros.pause_max},
        {"pause_min", pros.pause_min},
        {"ws_dtw", pros.ws_dtw},
        {"ws_dur_sum", pros.ws_dur_sum},
        {"ws_dur_mean", pros.ws_dur_mean},
        {"ws_dur_sd", pros.ws_dur_sd},
        {"ws_dur_max", pros.ws_dur_max},
        {"ws_dur_min", pros.ws_dur_min},
        {"speech_pause_ratio", pros.speech_pause_ratio},
        {"top30_short_ws", pros.top30_short_ws},
        {"top30_long_ws", pros.top30_long_ws},
        {"abnormal_speed", pros.abnormal_speed},
        {"speed_change_rate_mean", pros.speed_change_rate_mean},
        {"sps", pros.sps},
        {"increasing_speed", pros.increasing_speed},
    };
    for (const auto& [name, value] : out.values)
        if (!std::isfinite(value))
            throw ValidationError("utterance " + record.utterance_id + ": feature " + name + " is not finite");
    return out;
}

struct FeatureMatrix {
    std::vector<std::string> utterance_ids;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::vector<FeatureEntry> manifest;
};

inline FeatureMatrix to_matrix(const std::vector<FeatureVector>& vectors, const ExtractionConfig& config = {}) {
    FeatureMatrix matrix;
    matrix.manifest = feature_manifest(config);
    for (const FeatureVector& v : vectors) {
        if (v.values.size() != matrix.manifest.size())
            throw ValidationError("utterance " + v.utterance_id + ": expected " +
                                  std::to_string(matrix.manifest.size()) + " features, got " +
                                  std::to_string(v.values.size()));
        std::vector<double> row;
        row.reserve(v.values.size());
        for (std::size_t i = 0; i < v.values.size(); ++i) {
            if (v.values[i].first != matrix.manifest[i].name)
                throw ValidationError("utterance " + v.utterance_id + ": feature " + std::to_string(i) +
                                      " is '" + v.values[i].first + "', manifest expects '" +
                                      matrix.manifest[i].name + "'");
            row.push_back(v.values[i].second);
        }
        matrix.utterance_ids.push_back(v.utterance_id);
        matrix.rows.push_back(std::move(row));
        matrix.labels.push_back(v.label.level());
    }
    return matrix;
}

// Shortest decimal that round-trips the exact double.
inline std::string format_double(double value) {
    std::array<char, 40> buffer{};
    const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    return std::string(buffer.data(), result.ptr);
}

inline void write_matrix_csv(const FeatureMatrix& matrix, std::ostream& out) {
    out << "utterance_id,label";
    for (const FeatureEntry& entry : matrix.manifest) out << ',' << entry.name;
    out << '\n';
    for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
        out << matrix.utterance_ids[r] << ',' << matrix.labels[r];
        for (double v : matrix.rows[r]) out << ',' << format_double(v);
        out << '\n';
    }
}

inline void write_matrix_csv_file(const FeatureMatrix& matrix, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write feature matrix: " + path);
    write_matrix_csv(matrix, out);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

inline double parse_double(const std::string& text, const std::string& context) {
    double value = 0.0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc() || result.ptr != text.data() + text.size())
        throw ParseError(context + ": bad numeric field '" + text + "'");
    return value;
}

}  // namespace detail

inline FeatureMatrix read_matrix_csv(std::istream& in, const ExtractionConfig& config = {}) {
    FeatureMatrix matrix;
    matrix.manifest = feature_manifest(config);

    std::string line;
    if (!std::getline(in, line)) throw ParseError("feature matrix: empty input");
    const std::vector<std::string> header = detail::split_csv_line(line);
    if (header.size() != matrix.manifest.size() + 2)
        throw ParseError("feature matrix: header has " + std::to_string(header.size()) + " columns, expected " +
                         std::to_string(matrix.manifest.size() + 2));
    if (header[0] != "utterance_id" || header[1] != "label")
        throw ParseError("feature matrix: header must start with utterance_id,label");
    for (std::size_t i = 0; i < matrix.manifest.size(); ++i)
        if (header[i + 2] != matrix.manifest[i].name)
            throw ParseError("feature matrix: column " + std::to_string(i + 2) + " is '" + header[i + 2] +
                             "', manifest expects '" + matrix.manifest[i].name + "'");

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string context = "feature matrix line " + std::to_string(line_no);
        const std::vector<std::string> fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError(context + ": has " + std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(header.size()));
        matrix.utterance_ids.push_back(fields[0]);
        const double label = detail::parse_double(fields[1], context);
        if (label != 0.0 && label != 1.0 && label != 2.0) throw ValidationError(context + ": label must be 0, 1, or 2");
        matrix.labels.push_back(static_cast<int>(label));
        std::vector<double> row;
        row.reserve(matrix.manifest.size());
        for (std::size_t i = 2; i < fields.size(); ++i) row.push_back(detail::parse_double(fields[i], context));
        matrix.rows.push_back(std::move(row));
    }
    return matrix;
}

inline FeatureMatrix read_matrix_csv_file(const std::string& path, const ExtractionConfig& config = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open feature matrix: " + path);
    return read_matrix_csv(in, config);
}

}  // namespace asrfeat
