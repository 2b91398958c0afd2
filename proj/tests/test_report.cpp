#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>

#include "asrfeat/report.hpp"

using namespace asrfeat;
using Catch::Matchers::ContainsSubstring;

namespace {

EvalReport sample_report() {
    EvalReport report;
    report.confusion = {{{46, 8, 0}, {4, 296, 0}, {0, 18, 0}}};
    report.accuracy = 342.0 / 372.0;
    report.balanced_accuracy = (46.0 / 54.0 + 296.0 / 300.0 + 0.0) / 3.0;
    report.per_class_recall = {46.0 / 54.0, 296.0 / 300.0, 0.0};
    return report;
}

ImportanceReport sample_importance() {
    ImportanceReport report;
    report.baseline_balanced_accuracy = 0.95;
    report.entries = {{"max_repetition", 0.41, 0.02}, {"pause_sum", 0.08, 0.01}, {"wer", 0.0125, 0.005}};
    return report;
}

}  // namespace

TEST_CASE("confusion text uses percent (count/total) cells") {
    const std::string text = confusion_text(sample_report());
    CHECK_THAT(text, ContainsSubstring("85.19% (46/54)"));
    CHECK_THAT(text, ContainsSubstring("98.67% (296/300)"));
    CHECK_THAT(text, ContainsSubstring("0.00% (0/18)"));
    CHECK_THAT(text, ContainsSubstring("pred 0"));
    CHECK_THAT(text, ContainsSubstring("true 2"));
    CHECK_THAT(text, ContainsSubstring("accuracy 91.94%"));
    CHECK_THAT(text, ContainsSubstring("balanced accuracy 61.28%"));
}

TEST_CASE("confusion text marks empty truth rows") {
    EvalReport report = sample_report();
    report.confusion[2] = {0, 0, 0};
    const std::string text = confusion_text(report);
    const std::size_t row_start = text.find("true 2");
    REQUIRE(row_start != std::string::npos);
    const std::string row = text.substr(row_start, text.find('\n', row_start) - row_start);
    CHECK_THAT(row, ContainsSubstring("-"));
    CHECK_THAT(row, !ContainsSubstring("%"));
}

TEST_CASE("eval report json round trip") {
    const EvalReport report = sample_report();
    const EvalReport back = eval_from_json(eval_to_json(report));
    CHECK(back.accuracy == report.accuracy);
    CHECK(back.balanced_accuracy == report.balanced_accuracy);
    CHECK(back.confusion == report.confusion);
    CHECK(back.per_class_recall == report.per_class_recall);

    ordered_json j = eval_to_json(report);
    j.erase("confusion");
    CHECK_THROWS_AS(eval_from_json(j), ValidationError);
}

TEST_CASE("importance file round trip keeps order and baseline") {
    const std::filesystem::path path = "report_importance.jsonl";
    const ImportanceReport report = sample_importance();
    write_importance_file(report, path.string());

    const ImportanceReport back = read_importance_file(path.string());
    CHECK(back.baseline_balanced_accuracy == report.baseline_balanced_accuracy);
    REQUIRE(back.entries.size() == report.entries.size());
    for (std::size_t i = 0; i < back.entries.size(); ++i) {
        CHECK(back.entries[i].feature == report.entries[i].feature);
        CHECK(back.entries[i].mean == report.entries[i].mean);
        CHECK(back.entries[i].sd == report.entries[i].sd);
    }
    std::filesystem::remove(path);
}

TEST_CASE("importance file errors name the line") {
    const std::filesystem::path path = "report_importance_bad.jsonl";
    {
        std::ofstream out(path);
        out << R"({"baseline_balanced_accuracy": 0.9})" << '\n';
        out << "not json\n";
    }
    CHECK_THROWS_MATCHES(read_importance_file(path.string()), ParseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("importance line 2")));
    {
        std::ofstream out(path);
        out << R"({"feature": "wer"})" << '\n';
    }
    CHECK_THROWS_AS(read_importance_file(path.string()), ValidationError);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(read_importance_file("no_such_importance.jsonl"), IoError);
}

TEST_CASE("top feature csv lists ranked rows") {
    const std::filesystem::path path = "report_top.csv";
    write_top_features_csv(sample_importance(), 2, path.string());
    std::ifstream in(path);
    std::string header, row1, row2, extra;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    const bool more = static_cast<bool>(std::getline(in, extra));
    CHECK(header == "rank,feature,mean,sd");
    CHECK(row1 == "1,max_repetition,0.41,0.02");
    CHECK(row2 == "2,pause_sum,0.08,0.01");
    CHECK_FALSE(more);
    std::filesystem::remove(path);
}

TEST_CASE("top feature svg draws one bar per entry") {
    const std::filesystem::path path = "report_top.svg";
    write_top_features_svg(sample_importance(), 5, path.string());
    std::ifstream in(path);
    std::string svg((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK_THAT(svg, ContainsSubstring("<svg"));
    CHECK_THAT(svg, ContainsSubstring("max_repetition"));
    CHECK_THAT(svg, ContainsSubstring("pause_sum"));
    CHECK_THAT(svg, ContainsSubstring("wer"));
    std::size_t rects = 0;
    for (std::size_t at = svg.find("<rect"); at != std::string::npos; at = svg.find("<rect", at + 1)) ++rects;
    CHECK(rects == 3);
    std::filesystem::remove(path);
}

TEST_CASE("eval files cannot be written to a missing directory") {
    CHECK_THROWS_AS(write_eval_files(sample_report(), "no_such_dir/eval.json", "no_such_dir/eval.txt"), IoError);
}
