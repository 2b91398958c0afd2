#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asrfeat/errors.hpp"
#include "asrfeat/unicode.hpp"

namespace asrfeat {

enum class EditOpKind { hit, substitution, deletion, insertion };

struct EditOp {
    EditOpKind kind;
    std::optional<std::size_t> ref_index;  // present for hit, substitution, deletion
    std::optional<std::size_t> hyp_index;  // present for hit, substitution, insertion
};

// Minimum-cost edit script between a reference and a hypothesis with unit
// substitution/deletion/insertion costs. H + S + D == |ref| and
// H + S + I == |hyp| always hold; `ops` replays both sequences in order.
struct Alignment {
    std::int64_t hits = 0;
    std::int64_t substitutions = 0;
    std::int64_t deletions = 0;
    std::int64_t insertions = 0;
    std::vector<EditOp> ops;
};

// Among equal-cost scripts the hit count is maximized, which pins every
// count uniquely (given cost and H, the identities force S, D, I). That
// keeps counts invariant under swapping reference and hypothesis; the
// backtrace tie-break (substitution over deletion over insertion) then only
// decides op order, never counts.
template <typename T>
Alignment align_sequences(const std::vector<T>& reference, const std::vector<T>& hypothesis) {
    const std::size_t m = reference.size();
    const std::size_t n = hypothesis.size();
    const std::size_t w = n + 1;

    std::vector<std::int32_t> cost((m + 1) * w);
    std::vector<std::int32_t> hits((m + 1) * w);
    auto at = [w](std::size_t i, std::size_t j) { return i * w + j; };

    for (std::size_t j = 0; j <= n; ++j) {
        cost[at(0, j)] = static_cast<std::int32_t>(j);
        hits[at(0, j)] = 0;
    }
    for (std::size_t i = 1; i <= m; ++i) {
        cost[at(i, 0)] = static_cast<std::int32_t>(i);
        hits[at(i, 0)] = 0;
    }

    // Lexicographic minimum over (cost, -hits).
    auto better = [](std::int32_t c1, std::int32_t h1, std::int32_t c2, std::int32_t h2) {
        return c1 < c2 || (c1 == c2 && h1 > h2);
    };

    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            const bool eq = reference[i - 1] == hypothesis[j - 1];
            std::int32_t c = cost[at(i - 1, j - 1)] + (eq ? 0 : 1);
            std::int32_t h = hits[at(i - 1, j - 1)] + (eq ? 1 : 0);
            if (better(cost[at(i - 1, j)] + 1, hits[at(i - 1, j)], c, h)) {
                c = cost[at(i - 1, j)] + 1;
                h = hits[at(i - 1, j)];
            }
            if (better(cost[at(i, j - 1)] + 1, hits[at(i, j - 1)], c, h)) {
                c = cost[at(i, j - 1)] + 1;
                h = hits[at(i, j - 1)];
            }
            cost[at(i, j)] = c;
            hits[at(i, j)] = h;
        }
    }

    Alignment out;
    out.ops.reserve(m + n);
    std::size_t i = m, j = n;
    while (i > 0 || j > 0) {
        const std::int32_t c = cost[at(i, j)];
        const std::int32_t h = hits[at(i, j)];
        if (i > 0 && j > 0) {
            const bool eq = reference[i - 1] == hypothesis[j - 1];
            if (c == cost[at(i - 1, j - 1)] + (eq ? 0 : 1) && h == hits[at(i - 1, j - 1)] + (eq ? 1 : 0)) {
                out.ops.push_back({eq ? EditOpKind::hit : EditOpKind::substitution, i - 1, j - 1});
                --i;
                --j;
                continue;
            }
        }
        if (i > 0 && c == cost[at(i - 1, j)] + 1 && h == hits[at(i - 1, j)]) {
            out.ops.push_back({EditOpKind::deletion, i - 1, std::nullopt});
            --i;
            continue;
        }
        out.ops.push_back({EditOpKind::insertion, std::nullopt, j - 1});
        --j;
    }
    std::reverse(out.ops.begin(), out.ops.end());

    for (const EditOp& op : out.ops) {
        switch (op.kind) {
            case EditOpKind::hit: ++out.hits; break;
            case EditOpKind::substitution: ++out.substitutions; break;
            case EditOpKind::deletion: ++out.deletions; break;
            case EditOpKind::insertion: ++out.insertions; break;
        }
    }
    return out;
}

// WER, MER, WIL, WIP plus the raw counts they are derived from. The same
// bundle serves words, characters, and binary pause symbols.
struct ErrorMetrics {
    double wer = 0.0;
    double mer = 0.0;
    double wil = 0.0;
    double wip = 0.0;
    std::int64_t hits = 0;
    std::int64_t insertions = 0;
    std::int64_t deletions = 0;
    std::int64_t substitutions = 0;
};

// WER=(S+D+I)/(H+S+D), MER=(S+D+I)/(H+S+D+I), WIP=(H/(H+S+D))*(H/(H+S+I)),
// WIL=1-WIP. Zero denominators: empty reference gives WER=MER=0 when the
// hypothesis is empty too, else 1; H over an empty-side denominator is 0.
inline ErrorMetrics error_metrics(const Alignment& a) {
    ErrorMetrics em;
    em.hits = a.hits;
    em.insertions = a.insertions;
    em.deletions = a.deletions;
    em.substitutions = a.substitutions;

    const double errors = static_cast<double>(a.substitutions + a.deletions + a.insertions);
    const double ref_len = static_cast<double>(a.hits + a.substitutions + a.deletions);
    const double hyp_len = static_cast<double>(a.hits + a.substitutions + a.insertions);
    const double h = static_cast<double>(a.hits);

    if (ref_len > 0.0) {
        em.wer = errors / ref_len;
        em.mer = errors / (ref_len + static_cast<double>(a.insertions));
    } else {
        em.wer = hyp_len > 0.0 ? 1.0 : 0.0;
        em.mer = em.wer;
    }
    const double ref_frac = ref_len > 0.0 ? h / ref_len : 0.0;
    const double hyp_frac = hyp_len > 0.0 ? h / hyp_len : 0.0;
    em.wip = ref_frac * hyp_frac;
    em.wil = 1.0 - em.wip;
    return em;
}

enum class Granularity { word, character };

// Word granularity splits on whitespace; character granularity yields one
// token per Unicode scalar value, whitespace dropped. No other
// normalization is applied.
inline std::vector<std::string> tokenize(std::string_view text, Granularity granularity) {
    std::vector<std::string> out;
    if (granularity == Granularity::word) {
        std::string current;
        for (char32_t cp : decode_utf8(text)) {
            if (is_space(cp)) {
                if (!current.empty()) {
                    out.push_back(std::move(current));
                    current.clear();
                }
            } else {
                current += encode_utf8(cp);
            }
        }
        if (!current.empty()) out.push_back(std::move(current));
    } else {
        for (char32_t cp : decode_utf8(text)) {
            if (!is_space(cp)) out.push_back(encode_utf8(cp));
        }
    }
    return out;
}

}  // namespace asrfeat
