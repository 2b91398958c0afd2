#include <array>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asrfeat/align.hpp"
#include "asrfeat/config.hpp"
#include "asrfeat/corpus.hpp"
#include "asrfeat/embeddings_remote.hpp"
#include "asrfeat/errors.hpp"
#include "asrfeat/feature_matrix.hpp"
#include "asrfeat/forest.hpp"
#include "asrfeat/pipeline.hpp"
#include "asrfeat/report.hpp"
#include "asrfeat/synth.hpp"
#include "asrfeat/version.hpp"

namespace fs = std::filesystem;
using namespace asrfeat;

namespace {

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for digest: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(buffer.str())));
    return hex;
}

// One line per command invocation: version, seed, input and output digests.
void append_run_manifest(const std::string& out_dir, const std::string& command, std::uint64_t seed,
                         const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
    ordered_json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["seed"] = seed;
    ordered_json in_entries = ordered_json::array();
    for (const std::string& path : inputs) {
        ordered_json e;
        e["path"] = path;
        e["digest"] = file_digest(path);
        in_entries.push_back(std::move(e));
    }
    j["inputs"] = std::move(in_entries);
    ordered_json out_entries = ordered_json::array();
    for (const std::string& path : outputs) {
        ordered_json e;
        e["path"] = path;
        e["digest"] = file_digest(path);
        out_entries.push_back(std::move(e));
    }
    j["outputs"] = std::move(out_entries);

    const std::string manifest_path = (fs::path(out_dir) / "run_manifest.jsonl").string();
    std::ofstream out(manifest_path, std::ios::app);
    if (!out) throw IoError("cannot write run manifest: " + manifest_path);
    out << j.dump() << '\n';
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

struct SplitPart {
    FeatureMatrix matrix;
};

FeatureMatrix load_part(const FeatureMatrix& matrix, const DatasetSplit& split, const std::string& part) {
    if (part == "train") return select_rows(matrix, split.train);
    if (part == "validation") return select_rows(matrix, split.validation);
    if (part == "test") return select_rows(matrix, split.test);
    throw ConfigError("unknown split part: " + part + " (expected train, validation, or test)");
}

int error_exit(const char* category, const std::exception& e) {
    std::cerr << "error: " << category << ": " << e.what() << std::endl;
    const std::string cat = category;
    return cat == "transport" || cat == "internal" ? 1 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"speech-recognition feature pipeline for severity classification"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path;
    if (const char* env = std::getenv("ASRFEAT_CONFIG")) config_path = env;
    app.add_option("--config", config_path, "pipeline config file (json)");

    PipelineConfig config;
    std::function<void()> run;

    // Shared option targets; each subcommand applies the ones it registered
    // after the config file loads, so flags beat the file.
    std::string out_dir, corpus_path, references_path, features_path, split_path, model_path, part = "test";
    std::uint64_t seed = 0;
    int utterances = 0, workers = -1, repeats = 0;
    std::vector<double> ratios;
    std::string provider, embedding_file, embedding_url;
    std::size_t dimension = 0;
    double timeout_seconds = -1.0, ratio_cap = -1.0, top_fraction = -1.0, feature_fraction = -1.0;
    int retries = -1, trees = 0, max_depth = 0, min_leaf = 0;
    bool shuffle = false;
    std::vector<std::string> fillers;

    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus and its references");
    auto* synth_out = synth_cmd->add_option("--out-dir", out_dir, "output directory");
    auto* synth_n = synth_cmd->add_option("--utterances", utterances, "number of utterances");
    auto* synth_seed = synth_cmd->add_option("--seed", seed, "master seed");

    auto* extract_cmd = app.add_subcommand("extract", "extract the feature matrix from a corpus");
    auto* ex_corpus = extract_cmd->add_option("--corpus", corpus_path, "corpus jsonl");
    auto* ex_refs = extract_cmd->add_option("--references", references_path, "reference jsonl");
    auto* ex_out = extract_cmd->add_option("--out-dir", out_dir, "output directory");
    auto* ex_provider = extract_cmd->add_option("--provider", provider, "embedding provider: fallback, file, remote");
    auto* ex_dim = extract_cmd->add_option("--dimension", dimension, "embedding dimension");
    auto* ex_file = extract_cmd->add_option("--embedding-file", embedding_file, "precomputed embedding jsonl");
    auto* ex_url = extract_cmd->add_option("--embedding-url", embedding_url, "embedding service url");
    auto* ex_timeout = extract_cmd->add_option("--timeout", timeout_seconds, "embedding request timeout (s)");
    auto* ex_retries = extract_cmd->add_option("--retries", retries, "embedding request retries");
    auto* ex_fillers = extract_cmd->add_option("--fillers", fillers, "filler word list")->delimiter(',');
    auto* ex_cap = extract_cmd->add_option("--ratio-cap", ratio_cap, "speech/pause ratio cap");
    auto* ex_frac = extract_cmd->add_option("--top-fraction", top_fraction, "short/long duration fraction");
    auto* ex_workers = extract_cmd->add_option("--workers", workers, "extraction worker threads (0 = auto)");

    auto* split_cmd = app.add_subcommand("split", "stratified train/validation/test split");
    auto* sp_features = split_cmd->add_option("--features", features_path, "feature matrix csv");
    auto* sp_out = split_cmd->add_option("--out-dir", out_dir, "output directory");
    auto* sp_ratios = split_cmd->add_option("--ratios", ratios, "train,validation,test ratios")->delimiter(',');
    auto* sp_seed = split_cmd->add_option("--seed", seed, "master seed");

    auto* train_cmd = app.add_subcommand("train", "train the forest on the train split");
    auto* tr_features = train_cmd->add_option("--features", features_path, "feature matrix csv");
    auto* tr_split = train_cmd->add_option("--split", split_path, "split json");
    auto* tr_out = train_cmd->add_option("--out-dir", out_dir, "output directory");
    auto* tr_trees = train_cmd->add_option("--trees", trees, "tree count");
    auto* tr_depth = train_cmd->add_option("--max-depth", max_depth, "maximum tree depth");
    auto* tr_leaf = train_cmd->add_option("--min-leaf", min_leaf, "minimum samples per leaf");
    auto* tr_frac = train_cmd->add_option("--feature-fraction", feature_fraction,
                                          "features per split as a fraction (0 = sqrt)");
    auto* tr_weights = train_cmd->add_flag("--class-weights,!--no-class-weights", config.forest.class_weights,
                                           "inverse-frequency class weights");
    auto* tr_seed = train_cmd->add_option("--seed", seed, "master seed");
    auto* tr_shuffle = train_cmd->add_flag("--shuffle-labels", shuffle, "shuffle labels before training");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a split part");
    auto* ev_features = eval_cmd->add_option("--features", features_path, "feature matrix csv");
    auto* ev_split = eval_cmd->add_option("--split", split_path, "split json");
    auto* ev_model = eval_cmd->add_option("--model", model_path, "model json");
    auto* ev_out = eval_cmd->add_option("--out-dir", out_dir, "output directory");
    eval_cmd->add_option("--part", part, "train, validation, or test");
    auto* ev_seed = eval_cmd->add_option("--seed", seed, "master seed");
    auto* ev_shuffle = eval_cmd->add_flag("--shuffle-labels", shuffle, "apply the training-time label shuffle");

    auto* imp_cmd = app.add_subcommand("importance", "permutation feature importance");
    auto* im_features = imp_cmd->add_option("--features", features_path, "feature matrix csv");
    auto* im_split = imp_cmd->add_option("--split", split_path, "split json");
    auto* im_model = imp_cmd->add_option("--model", model_path, "model json");
    auto* im_out = imp_cmd->add_option("--out-dir", out_dir, "output directory");
    imp_cmd->add_option("--part", part, "train, validation, or test");
    auto* im_repeats = imp_cmd->add_option("--repeats", repeats, "shuffles per feature");
    auto* im_seed = imp_cmd->add_option("--seed", seed, "master seed");

    auto* report_cmd = app.add_subcommand("report", "assemble a markdown run report");
    auto* rp_dir = report_cmd->add_option("--run-dir", out_dir, "directory with run artifacts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!config_path.empty()) {
            const bool keep_weights = tr_weights->count() > 0;
            const bool weights_flag = config.forest.class_weights;
            config = load_config_file(config_path);
            if (keep_weights) config.forest.class_weights = weights_flag;
        }
        if (synth_out->count() || ex_out->count() || sp_out->count() || tr_out->count() || ev_out->count() ||
            im_out->count() || rp_dir->count())
            config.output_dir = out_dir;
        if (synth_seed->count() || sp_seed->count() || tr_seed->count() || ev_seed->count() || im_seed->count())
            config.seed = seed;
        if (synth_n->count()) config.synth_utterances = utterances;
        if (ex_corpus->count()) config.corpus_path = corpus_path;
        if (ex_refs->count()) config.references_path = references_path;
        if (ex_provider->count()) config.embedding.provider = provider;
        if (ex_dim->count()) config.embedding.dimension = dimension;
        if (ex_file->count()) config.embedding.file_path = embedding_file;
        if (ex_url->count()) config.embedding.url = embedding_url;
        if (ex_timeout->count()) config.embedding.timeout_seconds = timeout_seconds;
        if (ex_retries->count()) config.embedding.retries = retries;
        if (ex_fillers->count()) config.extraction.fillers = fillers;
        if (ex_cap->count()) config.extraction.prosody.ratio_cap = ratio_cap;
        if (ex_frac->count()) config.extraction.prosody.top_fraction = top_fraction;
        if (ex_workers->count()) config.workers = workers;
        if (sp_ratios->count()) {
            if (ratios.size() != 3) throw ConfigError("--ratios needs exactly 3 values");
            std::copy(ratios.begin(), ratios.end(), config.split_ratios.begin());
        }
        if (tr_trees->count()) config.forest.trees = trees;
        if (tr_depth->count()) config.forest.max_depth = max_depth;
        if (tr_leaf->count()) config.forest.min_leaf = min_leaf;
        if (tr_frac->count()) config.forest.feature_fraction = feature_fraction;
        if (im_repeats->count()) config.importance_repeats = repeats;

        const fs::path run_dir(config.output_dir);

        if (synth_cmd->parsed()) {
            ensure_dir(config.output_dir);
            SynthConfig synth_config;
            synth_config.utterances = config.synth_utterances;
            synth_config.seed = config.seed;
            const SynthCorpus corpus = synth_corpus(synth_config);

            const std::string corpus_out = (run_dir / "corpus.jsonl").string();
            std::ofstream corpus_stream(corpus_out);
            if (!corpus_stream) throw IoError("cannot write corpus: " + corpus_out);
            serialize_corpus(corpus.records, corpus_stream);
            corpus_stream.close();

            const std::string refs_out = (run_dir / "references.jsonl").string();
            std::ofstream refs_stream(refs_out);
            if (!refs_stream) throw IoError("cannot write references: " + refs_out);
            serialize_references(corpus.references, refs_stream);
            refs_stream.close();

            append_run_manifest(config.output_dir, "synth", config.seed, {}, {corpus_out, refs_out});
            std::cout << "wrote " << corpus.records.size() << " utterances to " << corpus_out << std::endl;
        } else if (extract_cmd->parsed()) {
            ensure_dir(config.output_dir);
            const std::vector<UtteranceRecord> records = parse_corpus_file(config.corpus_path);
            const std::vector<SentenceReference> references = parse_references_file(config.references_path);
            const auto profiles = build_profiles(records, references);
            const auto provider_ptr = make_provider(config.embedding);
            const std::vector<FeatureVector> vectors =
                extract_all(records, profiles, *provider_ptr, config.extraction, config.workers);
            const FeatureMatrix matrix = to_matrix(vectors, config.extraction);

            const std::string features_out = (run_dir / "features.csv").string();
            write_matrix_csv_file(matrix, features_out);
            const std::string manifest_out = (run_dir / "feature_manifest.jsonl").string();
            std::ofstream manifest_stream(manifest_out);
            if (!manifest_stream) throw IoError("cannot write feature manifest: " + manifest_out);
            serialize_manifest(matrix.manifest, manifest_stream);
            manifest_stream.close();

            append_run_manifest(config.output_dir, "extract", config.seed,
                                {config.corpus_path, config.references_path}, {features_out, manifest_out});
            std::cout << "extracted " << matrix.rows.size() << " x " << matrix.manifest.size() << " matrix to "
                      << features_out << std::endl;
        } else if (split_cmd->parsed()) {
            ensure_dir(config.output_dir);
            if (features_path.empty()) features_path = (run_dir / "features.csv").string();
            const FeatureMatrix matrix = read_matrix_csv_file(features_path, config.extraction);
            const auto indices =
                stratified_split_indices(matrix.labels, config.split_ratios, seed_for(config.seed, SeedPurpose::split));
            DatasetSplit split;
            for (std::size_t i : indices[0]) split.train.push_back(matrix.utterance_ids[i]);
            for (std::size_t i : indices[1]) split.validation.push_back(matrix.utterance_ids[i]);
            for (std::size_t i : indices[2]) split.test.push_back(matrix.utterance_ids[i]);

            const std::string split_out = (run_dir / "split.json").string();
            write_split_file(split, split_out);
            append_run_manifest(config.output_dir, "split", config.seed, {features_path}, {split_out});
            std::cout << "split " << split.train.size() << "/" << split.validation.size() << "/"
                      << split.test.size() << " to " << split_out << std::endl;
        } else if (train_cmd->parsed()) {
            ensure_dir(config.output_dir);
            if (features_path.empty()) features_path = (run_dir / "features.csv").string();
            if (split_path.empty()) split_path = (run_dir / "split.json").string();
            FeatureMatrix matrix = read_matrix_csv_file(features_path, config.extraction);
            if (shuffle) matrix.labels = shuffled_labels(matrix.labels, seed_for(config.seed, SeedPurpose::label_shuffle));
            const DatasetSplit split = read_split_file(split_path);
            const FeatureMatrix train_part = select_rows(matrix, split.train);

            ForestModel model =
                train(train_part.rows, train_part.labels, config.forest, seed_for(config.seed, SeedPurpose::train));
            model.manifest_hash = manifest_hash(matrix.manifest);
            const std::string model_out = (run_dir / "model.json").string();
            write_model_file(model, model_out);
            append_run_manifest(config.output_dir, "train", config.seed, {features_path, split_path}, {model_out});
            std::cout << "trained " << model.trees.size() << " trees on " << train_part.rows.size() << " rows to "
                      << model_out << std::endl;
        } else if (eval_cmd->parsed()) {
            ensure_dir(config.output_dir);
            if (features_path.empty()) features_path = (run_dir / "features.csv").string();
            if (split_path.empty()) split_path = (run_dir / "split.json").string();
            if (model_path.empty()) model_path = (run_dir / "model.json").string();
            FeatureMatrix matrix = read_matrix_csv_file(features_path, config.extraction);
            if (shuffle) matrix.labels = shuffled_labels(matrix.labels, seed_for(config.seed, SeedPurpose::label_shuffle));
            const DatasetSplit split = read_split_file(split_path);
            const ForestModel model = read_model_file(model_path);
            if (model.manifest_hash != manifest_hash(matrix.manifest))
                throw ValidationError("model manifest hash " + model.manifest_hash +
                                      " does not match the feature matrix manifest");
            const FeatureMatrix part_matrix = load_part(matrix, split, part);

            const EvalReport report = evaluate(predict_labels(model, part_matrix.rows), part_matrix.labels);
            const std::string json_out = (run_dir / "eval.json").string();
            const std::string text_out = (run_dir / "eval.txt").string();
            write_eval_files(report, json_out, text_out);
            append_run_manifest(config.output_dir, "eval", config.seed, {features_path, split_path, model_path},
                                {json_out, text_out});
            std::cout << confusion_text(report);
        } else if (imp_cmd->parsed()) {
            ensure_dir(config.output_dir);
            if (features_path.empty()) features_path = (run_dir / "features.csv").string();
            if (split_path.empty()) split_path = (run_dir / "split.json").string();
            if (model_path.empty()) model_path = (run_dir / "model.json").string();
            const FeatureMatrix matrix = read_matrix_csv_file(features_path, config.extraction);
            const DatasetSplit split = read_split_file(split_path);
            const ForestModel model = read_model_file(model_path);
            if (model.manifest_hash != manifest_hash(matrix.manifest))
                throw ValidationError("model manifest hash " + model.manifest_hash +
                                      " does not match the feature matrix manifest");
            const FeatureMatrix part_matrix = load_part(matrix, split, part);

            std::vector<std::string> names;
            for (const FeatureEntry& entry : matrix.manifest) names.push_back(entry.name);
            const ImportanceReport report =
                permutation_importance(model, part_matrix.rows, part_matrix.labels, names,
                                       config.importance_repeats, seed_for(config.seed, SeedPurpose::importance));

            const std::string jsonl_out = (run_dir / "importance.jsonl").string();
            write_importance_file(report, jsonl_out);
            const std::string csv_out = (run_dir / "importance_top5.csv").string();
            write_top_features_csv(report, 5, csv_out);
            const std::string svg_out = (run_dir / "importance_top5.svg").string();
            write_top_features_svg(report, 5, svg_out);
            append_run_manifest(config.output_dir, "importance", config.seed,
                                {features_path, split_path, model_path}, {jsonl_out, csv_out, svg_out});
            for (std::size_t i = 0; i < std::min<std::size_t>(5, report.entries.size()); ++i)
                std::cout << i + 1 << ". " << report.entries[i].feature << " " << format_double(report.entries[i].mean)
                          << std::endl;
        } else if (report_cmd->parsed()) {
            const FeatureMatrix matrix = read_matrix_csv_file((run_dir / "features.csv").string(), config.extraction);
            const DatasetSplit split = read_split_file((run_dir / "split.json").string());
            std::ifstream eval_in((run_dir / "eval.json").string());
            if (!eval_in) throw IoError("cannot open eval report: " + (run_dir / "eval.json").string());
            ordered_json eval_json;
            try {
                eval_in >> eval_json;
            } catch (const ordered_json::exception& e) {
                throw ParseError(std::string("eval report: ") + e.what());
            }
            const EvalReport eval_report = eval_from_json(eval_json);
            const ImportanceReport importance = read_importance_file((run_dir / "importance.jsonl").string());

            std::array<std::size_t, 3> class_counts{};
            for (int label : matrix.labels) class_counts[static_cast<std::size_t>(label)] += 1;

            const std::string report_out = (run_dir / "report.md").string();
            std::ofstream out(report_out);
            if (!out) throw IoError("cannot write report: " + report_out);
            out << "# Severity classification run\n\n";
            out << "## Data\n\n";
            out << "- utterances: " << matrix.rows.size() << " (severity 0: " << class_counts[0] << ", severity 1: "
                << class_counts[1] << ", severity 2: " << class_counts[2] << ")\n";
            out << "- features: " << matrix.manifest.size() << "\n";
            out << "- split: train " << split.train.size() << " / validation " << split.validation.size()
                << " / test " << split.test.size() << "\n\n";
            out << "## Evaluation\n\n";
            out << "- accuracy: " << detail::percent(eval_report.accuracy) << "\n";
            out << "- balanced accuracy: " << detail::percent(eval_report.balanced_accuracy) << "\n\n";
            out << "```\n" << confusion_text(eval_report) << "```\n\n";
            out << "## Top features (permutation importance)\n\n";
            out << "| rank | feature | mean drop | sd |\n|---|---|---|---|\n";
            for (std::size_t i = 0; i < std::min<std::size_t>(5, importance.entries.size()); ++i)
                out << "| " << i + 1 << " | " << importance.entries[i].feature << " | "
                    << format_double(importance.entries[i].mean) << " | " << format_double(importance.entries[i].sd)
                    << " |\n";
            out.close();

            append_run_manifest(config.output_dir, "report", config.seed, {}, {report_out});
            std::cout << "wrote " << report_out << std::endl;
        }
    } catch (const ParseError& e) {
        return error_exit("parse", e);
    } catch (const ValidationError& e) {
        return error_exit("validation", e);
    } catch (const ConfigError& e) {
        return error_exit("config", e);
    } catch (const LookupError& e) {
        return error_exit("lookup", e);
    } catch (const IoError& e) {
        return error_exit("io", e);
    } catch (const TransportError& e) {
        return error_exit("transport", e);
    } catch (const std::exception& e) {
        return error_exit("internal", e);
    }
    return 0;
}
