#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "asrfeat/corpus.hpp"
#include "asrfeat/errors.hpp"
#include "asrfeat/feature_matrix.hpp"
#include "asrfeat/forest.hpp"

namespace asrfeat {

namespace detail {

inline std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", fraction * 100.0);
    return buf;
}

inline std::string pad(const std::string& text, std::size_t width) {
    return text.size() >= width ? text : text + std::string(width - text.size(), ' ');
}

}  // namespace detail

// Confusion matrix as percent (count/total) cells, rows true, columns
// predicted.
inline std::string confusion_text(const EvalReport& report) {
    std::array<std::string, 3> row_names = {"true 0", "true 1", "true 2"};
    std::array<std::array<std::string, 3>, 3> cells;
    for (std::size_t r = 0; r < 3; ++r) {
        std::int64_t total = 0;
        for (std::size_t c = 0; c < 3; ++c) total += report.confusion[r][c];
        for (std::size_t c = 0; c < 3; ++c) {
            if (total == 0) {
                cells[r][c] = "-";
                continue;
            }
            const double fraction = static_cast<double>(report.confusion[r][c]) / static_cast<double>(total);
            cells[r][c] = detail::percent(fraction) + " (" + std::to_string(report.confusion[r][c]) + "/" +
                          std::to_string(total) + ")";
        }
    }
    std::size_t width = 12;
    for (const auto& row : cells)
        for (const std::string& cell : row) width = std::max(width, cell.size() + 2);

    std::ostringstream out;
    out << detail::pad("", 8);
    for (std::size_t c = 0; c < 3; ++c) out << detail::pad("pred " + std::to_string(c), width);
    out << '\n';
    for (std::size_t r = 0; r < 3; ++r) {
        out << detail::pad(row_names[r], 8);
        for (std::size_t c = 0; c < 3; ++c) out << detail::pad(cells[r][c], width);
        out << '\n';
    }
    out << "accuracy " << detail::percent(report.accuracy) << ", balanced accuracy "
        << detail::percent(report.balanced_accuracy) << '\n';
    return out.str();
}

inline ordered_json eval_to_json(const EvalReport& report) {
    ordered_json j;
    j["accuracy"] = report.accuracy;
    j["balanced_accuracy"] = report.balanced_accuracy;
    ordered_json confusion = ordered_json::array();
    for (const auto& row : report.confusion) confusion.push_back(row);
    j["confusion"] = std::move(confusion);
    j["per_class_recall"] = report.per_class_recall;
    return j;
}

inline EvalReport eval_from_json(const ordered_json& j) {
    EvalReport report;
    try {
        report.accuracy = j.at("accuracy").get<double>();
        report.balanced_accuracy = j.at("balanced_accuracy").get<double>();
        for (std::size_t r = 0; r < 3; ++r)
            report.confusion[r] = j.at("confusion").at(r).get<std::array<std::int64_t, 3>>();
        report.per_class_recall = j.at("per_class_recall").get<std::array<double, 3>>();
    } catch (const ordered_json::exception& e) {
        throw ValidationError(std::string("eval report: ") + e.what());
    }
    return report;
}

inline void write_eval_files(const EvalReport& report, const std::string& json_path, const std::string& text_path) {
    std::ofstream json_out(json_path);
    if (!json_out) throw IoError("cannot write eval report: " + json_path);
    json_out << eval_to_json(report).dump(2) << '\n';
    std::ofstream text_out(text_path);
    if (!text_out) throw IoError("cannot write eval report: " + text_path);
    text_out << confusion_text(report);
}

inline void write_importance_file(const ImportanceReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write importance report: " + path);
    ordered_json header;
    header["baseline_balanced_accuracy"] = report.baseline_balanced_accuracy;
    out << header.dump() << '\n';
    for (const ImportanceEntry& entry : report.entries) {
        ordered_json j;
        j["feature"] = entry.feature;
        j["mean"] = entry.mean;
        j["sd"] = entry.sd;
        out << j.dump() << '\n';
    }
}

inline ImportanceReport read_importance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open importance report: " + path);
    ImportanceReport report;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const ordered_json::exception& e) {
            throw ParseError("importance line " + std::to_string(line_no) + ": " + e.what());
        }
        try {
            if (j.contains("baseline_balanced_accuracy")) {
                report.baseline_balanced_accuracy = j.at("baseline_balanced_accuracy").get<double>();
                continue;
            }
            ImportanceEntry entry;
            entry.feature = j.at("feature").get<std::string>();
            entry.mean = j.at("mean").get<double>();
            entry.sd = j.at("sd").get<double>();
            report.entries.push_back(std::move(entry));
        } catch (const ordered_json::exception& e) {
            throw ValidationError("importance line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return report;
}

inline void write_top_features_csv(const ImportanceReport& report, std::size_t top, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write importance csv: " + path);
    out << "rank,feature,mean,sd\n";
    for (std::size_t i = 0; i < std::min(top, report.entries.size()); ++i)
        out << i + 1 << ',' << report.entries[i].feature << ',' << format_double(report.entries[i].mean) << ','
            << format_double(report.entries[i].sd) << '\n';
}

// Static horizontal bar chart of the top features by mean importance.
inline void write_top_features_svg(const ImportanceReport& report, std::size_t top, const std::string& path) {
    const std::size_t n = std::min(top, report.entries.size());
    const int bar_height = 24, gap = 10, left = 190, right = 80, top_margin = 34;
    const int width = 640;
    const int height = top_margin + static_cast<int>(n) * (bar_height + gap) + 16;
    double max_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_mean = std::max(max_mean, report.entries[i].mean);
    if (max_mean <= 0.0) max_mean = 1.0;

    std::ofstream out(path);
    if (!out) throw IoError("cannot write importance chart: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
    out << "  <text x=\"" << left << "\" y=\"20\" font-size=\"15\">Permutation importance (balanced accuracy drop)"
        << "</text>\n";
    for (std::size_t i = 0; i < n; ++i) {
        const ImportanceEntry& entry = report.entries[i];
        const int y = top_margin + static_cast<int>(i) * (bar_height + gap);
        const double span = std::max(0.0, entry.mean) / max_mean;
        const int bar = static_cast<int>(span * (width - left - right));
        char value[32];
        std::snprintf(value, sizeof value, "%.4f", entry.mean);
        out << "  <text x=\"" << left - 8 << "\" y=\"" << y + bar_height - 7
            << "\" text-anchor=\"end\">" << entry.feature << "</text>\n";
        out << "  <rect x=\"" << left << "\" y=\"" << y << "\" width=\"" << std::max(bar, 1) << "\" height=\""
            << bar_height << "\" fill=\"#4878a8\"/>\n";
        out << "  <text x=\"" << left + std::max(bar, 1) + 6 << "\" y=\"" << y + bar_height - 7 << "\">" << value
            << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace asrfeat
