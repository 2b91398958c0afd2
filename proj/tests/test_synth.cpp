#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "asrfeat/corpus.hpp"
#include "asrfeat/errors.hpp"
#include "asrfeat/pronunciation.hpp"
#include "asrfeat/synth.hpp"

using namespace asrfeat;

namespace {

std::string joined_words(const UtteranceRecord& r) {
    std::string out;
    for (const Token& t : r.tokens) {
        if (t.kind != TokenKind::word) continue;
        if (!out.empty()) out.push_back(' ');
        out += t.text;
    }
    return out;
}

}  // namespace

TEST_CASE("class counts follow the severity mix") {
    const std::array<std::size_t, 3> counts = synth_class_counts(540);
    CHECK(counts[0] == 91);
    CHECK(counts[1] == 410);
    CHECK(counts[2] == 39);
    CHECK(counts[0] + counts[1] + counts[2] == 540);

    const std::array<std::size_t, 3> small = synth_class_counts(30);
    CHECK(small[0] + small[1] + small[2] == 30);
    CHECK(small[1] > small[0]);
    CHECK(small[0] > small[2]);
}

TEST_CASE("generated corpus has the requested shape") {
    const SynthCorpus corpus = synth_corpus({540, 13});
    REQUIRE(corpus.records.size() == 540);
    REQUIRE(corpus.references.size() == 6);

    std::array<std::size_t, 3> by_level{};
    std::set<std::string> ids;
    for (const UtteranceRecord& r : corpus.records) {
        by_level[static_cast<std::size_t>(r.severity.level())] += 1;
        ids.insert(r.utterance_id);
        validate_record(r, r.utterance_id);
    }
    CHECK(by_level[0] == 91);
    CHECK(by_level[1] == 410);
    CHECK(by_level[2] == 39);
    CHECK(ids.size() == 540);

    for (const SentenceReference& ref : corpus.references) {
        CHECK(ref.tokens.size() == 7);
        CHECK(ref.canonical_pauses.size() == 8);
        int flags = 0;
        for (int bit : ref.canonical_pauses) flags += bit;
        CHECK(flags == 1);
    }
}

TEST_CASE("every severity level reads every sentence") {
    const SynthCorpus corpus = synth_corpus({540, 13});
    std::map<int, std::set<std::string>> sentences_by_level;
    for (const UtteranceRecord& r : corpus.records) sentences_by_level[r.severity.level()].insert(r.sentence_id);
    for (int level = 0; level < 3; ++level) CHECK(sentences_by_level[level].size() == 6);
}

TEST_CASE("generation is byte-deterministic") {
    const SynthCorpus a = synth_corpus({120, 29});
    const SynthCorpus b = synth_corpus({120, 29});
    std::ostringstream sa, sb;
    serialize_corpus(a.records, sa);
    serialize_corpus(b.records, sb);
    CHECK(sa.str() == sb.str());
    std::ostringstream ra, rb;
    serialize_references(a.references, ra);
    serialize_references(b.references, rb);
    CHECK(ra.str() == rb.str());

    const SynthCorpus c = synth_corpus({120, 30});
    std::ostringstream sc;
    serialize_corpus(c.records, sc);
    CHECK(sa.str() != sc.str());
}

TEST_CASE("stutter run lengths stay inside their severity bands") {
    const SynthCorpus corpus = synth_corpus({540, 13});
    const std::array<std::pair<std::int64_t, std::int64_t>, 3> bands = {{{2, 3}, {4, 6}, {7, 9}}};
    std::size_t checked = 0;
    for (const UtteranceRecord& r : corpus.records) {
        const std::int64_t run = max_repetition(joined_words(r));
        const auto [lo, hi] = bands[static_cast<std::size_t>(r.severity.level())];
        REQUIRE(run >= lo);
        REQUIRE(run <= hi);
        ++checked;
    }
    CHECK(checked == 540);
}

TEST_CASE("pause durations grow with severity") {
    const SynthCorpus corpus = synth_corpus({540, 13});
    std::array<double, 3> pause_sum{};
    std::array<std::size_t, 3> pause_count{};
    for (const UtteranceRecord& r : corpus.records)
        for (const Token& t : r.tokens)
            if (t.kind == TokenKind::pause) {
                pause_sum[static_cast<std::size_t>(r.severity.level())] += t.pause_duration;
                pause_count[static_cast<std::size_t>(r.severity.level())] += 1;
            }
    const double mean0 = pause_sum[0] / static_cast<double>(pause_count[0]);
    const double mean1 = pause_sum[1] / static_cast<double>(pause_count[1]);
    const double mean2 = pause_sum[2] / static_cast<double>(pause_count[2]);
    CHECK(mean0 < mean1);
    CHECK(mean1 < mean2);
}

TEST_CASE("speech slows down with severity") {
    const SynthCorpus corpus = synth_corpus({540, 13});
    std::array<double, 3> total{};
    std::array<std::size_t, 3> n{};
    for (const UtteranceRecord& r : corpus.records) {
        double speech = 0.0;
        for (const WordSegment& s : r.word_segments) speech += s.duration();
        total[static_cast<std::size_t>(r.severity.level())] += speech;
        n[static_cast<std::size_t>(r.severity.level())] += 1;
    }
    CHECK(total[0] / static_cast<double>(n[0]) < total[2] / static_cast<double>(n[2]));
}

TEST_CASE("severity zero still reads the reference mostly verbatim") {
    const SynthCorpus corpus = synth_corpus({540, 13});
    std::map<std::string, std::vector<std::string>> ref_tokens;
    for (const SentenceReference& ref : corpus.references) ref_tokens[ref.sentence_id] = ref.tokens;

    std::size_t healthy = 0, with_all_words = 0;
    for (const UtteranceRecord& r : corpus.records) {
        if (r.severity.level() != 0) continue;
        ++healthy;
        const std::vector<std::string>& expected = ref_tokens[r.sentence_id];
        std::size_t kept = 0;
        for (const Token& t : r.tokens)
            if (t.kind == TokenKind::word)
                for (const std::string& w : expected)
                    if (t.text == w) {
                        ++kept;
                        break;
                    }
        if (kept >= expected.size() - 1) ++with_all_words;
    }
    REQUIRE(healthy == 91);
    CHECK(with_all_words > healthy / 2);
}

TEST_CASE("tiny corpora are rejected") {
    CHECK_THROWS_AS(synth_corpus({29, 1}), ValidationError);
    CHECK_THROWS_AS(synth_corpus({0, 1}), ValidationError);
}
