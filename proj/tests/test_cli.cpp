#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const std::string kCli = ASRFEAT_CLI_PATH;

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    static int counter = 0;
    const fs::path out_path = "cli_stdout_" + std::to_string(counter) + ".txt";
    const fs::path err_path = "cli_stderr_" + std::to_string(counter) + ".txt";
    ++counter;

    const std::string command =
        env_prefix + "\"" + kCli + "\" " + args + " > " + out_path.string() + " 2> " + err_path.string();
    const int status = std::system(command.c_str());

    RunResult result;
    result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    fs::remove(out_path);
    fs::remove(err_path);
    return result;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("version and help exit cleanly") {
    CHECK(run_cli("--version").code == 0);
    const RunResult help = run_cli("--help");
    CHECK(help.code == 0);
    CHECK(help.out.find("synth") != std::string::npos);
    CHECK(run_cli("no_such_command").code == 2);
    CHECK(run_cli("").code == 2);
}

TEST_CASE("synth writes a deterministic corpus") {
    const fs::path a = fresh_dir("cli_synth_a");
    const fs::path b = fresh_dir("cli_synth_b");

    const RunResult first = run_cli("synth --out-dir " + a.string() + " --utterances 120 --seed 5");
    REQUIRE(first.code == 0);
    CHECK(first.out.find("120") != std::string::npos);
    REQUIRE(fs::exists(a / "corpus.jsonl"));
    REQUIRE(fs::exists(a / "references.jsonl"));
    REQUIRE(fs::exists(a / "run_manifest.jsonl"));

    REQUIRE(run_cli("synth --out-dir " + b.string() + " --utterances 120 --seed 5").code == 0);
    CHECK(slurp(a / "corpus.jsonl") == slurp(b / "corpus.jsonl"));
    CHECK(slurp(a / "references.jsonl") == slurp(b / "references.jsonl"));

    const fs::path c = fresh_dir("cli_synth_c");
    REQUIRE(run_cli("synth --out-dir " + c.string() + " --utterances 120 --seed 6").code == 0);
    CHECK(slurp(a / "corpus.jsonl") != slurp(c / "corpus.jsonl"));
}

TEST_CASE("config file values apply, flags win, env names the default config") {
    const fs::path flags = fresh_dir("cli_cfg_flags");
    REQUIRE(run_cli("synth --out-dir " + flags.string() + " --utterances 90 --seed 5").code == 0);

    const fs::path cfg_path = "cli_cfg.json";
    {
        std::ofstream cfg(cfg_path);
        cfg << R"({"seed": 5, "synth_utterances": 90})" << '\n';
    }

    const fs::path via_option = fresh_dir("cli_cfg_option");
    REQUIRE(run_cli("--config " + cfg_path.string() + " synth --out-dir " + via_option.string()).code == 0);
    CHECK(slurp(flags / "corpus.jsonl") == slurp(via_option / "corpus.jsonl"));

    const fs::path via_env = fresh_dir("cli_cfg_env");
    REQUIRE(run_cli("synth --out-dir " + via_env.string(), "ASRFEAT_CONFIG=" + cfg_path.string() + " ").code == 0);
    CHECK(slurp(flags / "corpus.jsonl") == slurp(via_env / "corpus.jsonl"));

    const fs::path overridden = fresh_dir("cli_cfg_override");
    REQUIRE(run_cli("synth --out-dir " + overridden.string() + " --seed 6",
                    "ASRFEAT_CONFIG=" + cfg_path.string() + " ")
                .code == 0);
    CHECK(slurp(flags / "corpus.jsonl") != slurp(overridden / "corpus.jsonl"));

    fs::remove(cfg_path);
}

TEST_CASE("the full pipeline runs end to end") {
    const fs::path dir = fresh_dir("cli_pipeline");

    REQUIRE(run_cli("synth --out-dir " + dir.string() + " --utterances 150 --seed 3").code == 0);
    REQUIRE(run_cli("extract --corpus " + (dir / "corpus.jsonl").string() + " --references " +
                    (dir / "references.jsonl").string() + " --out-dir " + dir.string() + " --workers 2")
                .code == 0);
    REQUIRE(fs::exists(dir / "features.csv"));
    REQUIRE(fs::exists(dir / "feature_manifest.jsonl"));

    REQUIRE(run_cli("split --out-dir " + dir.string() + " --seed 3").code == 0);
    REQUIRE(fs::exists(dir / "split.json"));

    REQUIRE(run_cli("train --out-dir " + dir.string() + " --seed 3 --trees 50").code == 0);
    REQUIRE(fs::exists(dir / "model.json"));

    const RunResult eval = run_cli("eval --out-dir " + dir.string() + " --seed 3 --part test");
    REQUIRE(eval.code == 0);
    CHECK(eval.out.find("balanced accuracy") != std::string::npos);
    REQUIRE(fs::exists(dir / "eval.json"));
    REQUIRE(fs::exists(dir / "eval.txt"));

    const RunResult imp = run_cli("importance --out-dir " + dir.string() + " --seed 3 --repeats 3 --part test");
    REQUIRE(imp.code == 0);
    REQUIRE(fs::exists(dir / "importance.jsonl"));
    REQUIRE(fs::exists(dir / "importance_top5.csv"));
    REQUIRE(fs::exists(dir / "importance_top5.svg"));

    const RunResult report = run_cli("report --run-dir " + dir.string());
    REQUIRE(report.code == 0);
    REQUIRE(fs::exists(dir / "report.md"));
    const std::string markdown = slurp(dir / "report.md");
    CHECK(markdown.find("## Evaluation") != std::string::npos);
    CHECK(markdown.find("| 1 |") != std::string::npos);

    SECTION("re-extraction is byte-identical") {
        const fs::path again = fresh_dir("cli_pipeline_again");
        REQUIRE(run_cli("extract --corpus " + (dir / "corpus.jsonl").string() + " --references " +
                        (dir / "references.jsonl").string() + " --out-dir " + again.string() + " --workers 4")
                    .code == 0);
        CHECK(slurp(dir / "features.csv") == slurp(again / "features.csv"));
        CHECK(slurp(dir / "feature_manifest.jsonl") == slurp(again / "feature_manifest.jsonl"));
    }

    SECTION("a model trained under one manifest refuses another") {
        const fs::path config_path = dir / "other_fillers.json";
        std::ofstream config(config_path);
        config << R"({"features": {"fillers": ["어"]}})";
        config.close();
        const RunResult mismatch =
            run_cli("--config " + config_path.string() + " eval --out-dir " + dir.string() + " --seed 3");
        CHECK(mismatch.code == 2);
        CHECK(mismatch.err.find("error: validation") != std::string::npos);
    }
}

TEST_CASE("errors are categorized on stderr") {
    const fs::path dir = fresh_dir("cli_errors");

    SECTION("malformed corpus") {
        std::ofstream corpus(dir / "corpus.jsonl");
        corpus << "{broken\n";
        corpus.close();
        std::ofstream refs(dir / "references.jsonl");
        refs << R"({"sentence_id":"s1","tokens":["가을"],"canonical_pauses":[0,0]})" << "\n";
        refs.close();
        const RunResult r = run_cli("extract --corpus " + (dir / "corpus.jsonl").string() + " --references " +
                                    (dir / "references.jsonl").string() + " --out-dir " + dir.string());
        CHECK(r.code == 2);
        CHECK(r.err.find("error: parse") != std::string::npos);
        CHECK(r.err.find("corpus line 1") != std::string::npos);
    }

    SECTION("missing input file") {
        const RunResult r = run_cli("split --features " + (dir / "nope.csv").string() + " --out-dir " + dir.string());
        CHECK(r.code == 2);
        CHECK(r.err.find("error: io") != std::string::npos);
    }

    SECTION("bad provider name") {
        REQUIRE(run_cli("synth --out-dir " + dir.string() + " --utterances 60 --seed 1").code == 0);
        const RunResult r = run_cli("extract --corpus " + (dir / "corpus.jsonl").string() + " --references " +
                                    (dir / "references.jsonl").string() + " --out-dir " + dir.string() +
                                    " --provider nonsense");
        CHECK(r.code == 2);
        CHECK(r.err.find("error: config") != std::string::npos);
    }

    SECTION("unreachable embedding service") {
        REQUIRE(run_cli("synth --out-dir " + dir.string() + " --utterances 60 --seed 1").code == 0);
        const RunResult r = run_cli("extract --corpus " + (dir / "corpus.jsonl").string() + " --references " +
                                    (dir / "references.jsonl").string() + " --out-dir " + dir.string() +
                                    " --provider remote --embedding-url http://127.0.0.1:9/embed" +
                                    " --timeout 0.2 --retries 0 --workers 1");
        CHECK(r.code == 1);
        CHECK(r.err.find("error: transport") != std::string::npos);
    }
}
