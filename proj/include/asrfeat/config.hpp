#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "asrfeat/embeddings.hpp"
#include "asrfeat/errors.hpp"
#include "asrfeat/feature_matrix.hpp"
#include "asrfeat/forest.hpp"

namespace asrfeat {

// One master seed drives every randomized stage through fixed derivations,
// so a whole pipeline run is reproducible from a single number.
enum class SeedPurpose : std::uint64_t {
    split = 1,
    train = 2,
    importance = 3,
    label_shuffle = 4,
};

inline std::uint64_t seed_for(std::uint64_t master, SeedPurpose purpose) {
    return derive_seed(master, static_cast<std::uint64_t>(purpose));
}

struct PipelineConfig {
    std::string corpus_path = "corpus.jsonl";
    std::string references_path = "references.jsonl";
    std::string output_dir = "run";
    std::array<double, 3> split_ratios = {0.8, 0.1, 0.1};
    std::uint64_t seed = 1;
    int workers = 0;  // 0 uses the hardware thread count
    int importance_repeats = 10;
    int synth_utterances = 540;
    EmbeddingConfig embedding;
    ExtractionConfig extraction;
    ForestConfig forest;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& known,
                                const std::string& context) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool found = false;
        for (const std::string& key : known)
            if (it.key() == key) found = true;
        if (!found) throw ConfigError(context + ": unknown key '" + it.key() + "'");
    }
}

}  // namespace detail

inline PipelineConfig parse_config(const nlohmann::json& j) {
    PipelineConfig config;
    detail::reject_unknown_keys(j,
                                {"corpus", "references", "output_dir", "split_ratios", "seed", "workers",
                                 "importance_repeats", "synth_utterances", "embedding", "features", "forest"},
                                "config");
    try {
        if (j.contains("corpus")) config.corpus_path = j.at("corpus").get<std::string>();
        if (j.contains("references")) config.references_path = j.at("references").get<std::string>();
        if (j.contains("output_dir")) config.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("split_ratios")) {
            auto ratios = j.at("split_ratios").get<std::vector<double>>();
            if (ratios.size() != 3) throw ConfigError("config: split_ratios must have 3 entries");
            std::copy(ratios.begin(), ratios.end(), config.split_ratios.begin());
        }
        if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("workers")) config.workers = j.at("workers").get<int>();
        if (j.contains("importance_repeats")) config.importance_repeats = j.at("importance_repeats").get<int>();
        if (j.contains("synth_utterances")) config.synth_utterances = j.at("synth_utterances").get<int>();
        if (j.contains("embedding")) {
            const auto& je = j.at("embedding");
            detail::reject_unknown_keys(je, {"provider", "dimension", "file", "url", "timeout_seconds", "retries"},
                                        "config.embedding");
            if (je.contains("provider")) config.embedding.provider = je.at("provider").get<std::string>();
            if (je.contains("dimension")) config.embedding.dimension = je.at("dimension").get<std::size_t>();
            if (je.contains("file")) config.embedding.file_path = je.at("file").get<std::string>();
            if (je.contains("url")) config.embedding.url = je.at("url").get<std::string>();
            if (je.contains("timeout_seconds")) config.embedding.timeout_seconds = je.at("timeout_seconds").get<double>();
            if (je.contains("retries")) config.embedding.retries = je.at("retries").get<int>();
        }
        if (j.contains("features")) {
            const auto& jf = j.at("features");
            detail::reject_unknown_keys(jf, {"fillers", "ratio_cap", "top_fraction"}, "config.features");
            if (jf.contains("fillers")) {
                config.extraction.fillers = jf.at("fillers").get<std::vector<std::string>>();
                if (config.extraction.fillers.empty()) throw ConfigError("config: fillers must be non-empty");
            }
            if (jf.contains("ratio_cap")) config.extraction.prosody.ratio_cap = jf.at("ratio_cap").get<double>();
            if (jf.contains("top_fraction")) {
                config.extraction.prosody.top_fraction = jf.at("top_fraction").get<double>();
                if (config.extraction.prosody.top_fraction <= 0.0 || config.extraction.prosody.top_fraction > 1.0)
                    throw ConfigError("config: top_fraction must be in (0,1]");
            }
        }
        if (j.contains("forest")) {
            const auto& jt = j.at("forest");
            detail::reject_unknown_keys(jt, {"trees", "max_depth", "min_leaf", "feature_fraction", "class_weights"},
                                        "config.forest");
            if (jt.contains("trees")) config.forest.trees = jt.at("trees").get<int>();
            if (jt.contains("max_depth")) config.forest.max_depth = jt.at("max_depth").get<int>();
            if (jt.contains("min_leaf")) config.forest.min_leaf = jt.at("min_leaf").get<int>();
            if (jt.contains("feature_fraction")) config.forest.feature_fraction = jt.at("feature_fraction").get<double>();
            if (jt.contains("class_weights")) config.forest.class_weights = jt.at("class_weights").get<bool>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return config;
}

inline PipelineConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("config file " + path + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace asrfeat
