#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "asrfeat/corpus.hpp"
#include "asrfeat/errors.hpp"
#include "asrfeat/prosody.hpp"

using namespace asrfeat;

namespace {

UtteranceRecord record_with_durations(const std::vector<double>& durations, const std::vector<double>& pauses = {}) {
    UtteranceRecord r;
    r.utterance_id = "u";
    r.speaker_id = "spk";
    r.sentence_id = "s0";
    r.severity = SeverityLabel(1);
    double clock = 0.0;
    for (std::size_t i = 0; i < durations.size(); ++i) {
        r.tokens.push_back(Token::make_word("가" + std::to_string(i)));
        r.word_segments.push_back({clock, clock + durations[i]});
        clock += durations[i] + 0.1;
    }
    for (double p : pauses) r.tokens.push_back(Token::make_pause(p));
    return r;
}

ReferenceProfile profile_with_durations(const std::vector<double>& durations) {
    ReferenceProfile p;
    p.sentence_id = "s0";
    double total = 0.0;
    for (std::size_t i = 0; i < durations.size(); ++i) {
        p.reference_tokens.push_back("가" + std::to_string(i));
        total += durations[i];
    }
    p.canonical_pause_sequence.assign(durations.size() + 1, 0);
    p.healthy_duration_sequence = durations;
    p.healthy_total_duration = total;
    return p;
}

}  // namespace

TEST_CASE("pause sequence mirrors the token stream") {
    std::vector<Token> tokens = {Token::make_word("가을"), Token::make_pause(0.4), Token::make_word("하늘")};
    CHECK(pause_sequence(tokens) == std::vector<int>{0, 1, 0});
    CHECK(pause_sequence({}).empty());
}

TEST_CASE("reference pause flags expand into the token stream shape") {
    ReferenceProfile p = profile_with_durations({0.3, 0.4});
    p.canonical_pause_sequence = {0, 1, 0};
    CHECK(expand_reference_pauses(p) == std::vector<int>{0, 1, 0});
    p.canonical_pause_sequence = {1, 0, 1};
    CHECK(expand_reference_pauses(p) == std::vector<int>{1, 0, 0, 1});
    p.canonical_pause_sequence = {0, 0, 0};
    CHECK(expand_reference_pauses(p) == std::vector<int>{0, 0});
}

TEST_CASE("pause location features") {
    SECTION("missing pause is a substitution") {
        const PauseLocationFeatures f = pause_location_features({0, 1, 0}, {0, 0, 0});
        CHECK(f.sub == 1);
        CHECK(f.hits == 2);
        CHECK(f.cer == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(f.num == 0);
        CHECK(f.dtw == 1.0);
    }
    SECTION("extra pause is an insertion") {
        const PauseLocationFeatures f = pause_location_features({0, 1, 0}, {0, 1, 0, 1});
        CHECK(f.ins == 1);
        CHECK(f.hits == 3);
        CHECK(f.num == 2);
        CHECK(f.dtw == 1.0);
    }
    SECTION("identical sequences are clean") {
        const PauseLocationFeatures f = pause_location_features({0, 1, 0}, {0, 1, 0});
        CHECK(f.cer == 0.0);
        CHECK(f.wip == 1.0);
        CHECK(f.dtw == 0.0);
        CHECK(f.num == 1);
    }
    SECTION("empty hypothesis deletes everything") {
        const PauseLocationFeatures f = pause_location_features({0, 1, 0}, {});
        CHECK(f.del == 3);
        CHECK(f.cer == 1.0);
        CHECK(f.dtw == 3.0);
        CHECK(f.num == 0);
    }
    SECTION("empty reference is rejected") {
        CHECK_THROWS_AS(pause_location_features({}, {0, 1}), ValidationError);
    }
}

TEST_CASE("pause duration statistics") {
    SECTION("three pauses") {
        std::vector<Token> tokens = {Token::make_word("가"), Token::make_pause(0.5), Token::make_pause(1.0),
                                     Token::make_pause(1.5)};
        const PauseDurationStats s = pause_duration_features(tokens);
        CHECK(s.count == 3);
        CHECK(s.sum == Catch::Approx(3.0).epsilon(1e-12));
        CHECK(s.mean == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(s.sd == Catch::Approx(std::sqrt(1.0 / 6.0)).epsilon(1e-9));
        CHECK(s.max == 1.5);
        CHECK(s.min == 0.5);
    }
    SECTION("single pause has zero spread") {
        std::vector<Token> tokens = {Token::make_pause(0.7)};
        const PauseDurationStats s = pause_duration_features(tokens);
        CHECK(s.count == 1);
        CHECK(s.sum == 0.7);
        CHECK(s.mean == 0.7);
        CHECK(s.sd == 0.0);
        CHECK(s.max == 0.7);
        CHECK(s.min == 0.7);
    }
    SECTION("no pauses yields all zeros") {
        std::vector<Token> tokens = {Token::make_word("가")};
        const PauseDurationStats s = pause_duration_features(tokens);
        CHECK(s.count == 0);
        CHECK(s.sum == 0.0);
        CHECK(s.mean == 0.0);
        CHECK(s.sd == 0.0);
    }
}

TEST_CASE("articulation features") {
    SECTION("top fraction picks the extreme segments") {
        std::vector<double> durations;
        for (int i = 1; i <= 10; ++i) durations.push_back(static_cast<double>(i));
        const UtteranceRecord r = record_with_durations(durations, {1.0});
        const ArticulationFeatures f = articulation_features(r, profile_with_durations(durations));
        CHECK(f.top30_short_ws == Catch::Approx(2.0).epsilon(1e-12));
        CHECK(f.top30_long_ws == Catch::Approx(9.0).epsilon(1e-12));
        CHECK(f.ws_dtw == 0.0);
        CHECK(f.ws_dur_max == 10.0);
        CHECK(f.ws_dur_min == 1.0);
    }
    SECTION("sum, mean, and sd are divided by the segment count") {
        const std::vector<double> durations = {1.0, 2.0, 3.0};
        const UtteranceRecord r = record_with_durations(durations, {0.5});
        const ArticulationFeatures f = articulation_features(r, profile_with_durations(durations));
        CHECK(f.ws_dur_sum == Catch::Approx(2.0).epsilon(1e-12));
        CHECK(f.ws_dur_mean == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(f.ws_dur_sd == Catch::Approx(std::sqrt(2.0 / 3.0) / 3.0).epsilon(1e-9));
    }
    SECTION("speech to pause ratio") {
        const UtteranceRecord r = record_with_durations({3.0, 5.0}, {1.5, 0.5});
        const ArticulationFeatures f = articulation_features(r, profile_with_durations({3.0, 5.0}));
        CHECK(f.speech_pause_ratio == Catch::Approx(4.0).epsilon(1e-12));
        CHECK(!f.ratio_capped);
    }
    SECTION("no pauses caps the ratio and flags it") {
        const UtteranceRecord r = record_with_durations({3.0, 5.0});
        ProsodyConfig config;
        config.ratio_cap = 1e6;
        const ArticulationFeatures f = articulation_features(r, profile_with_durations({3.0, 5.0}), config);
        CHECK(f.speech_pause_ratio == 1e6);
        CHECK(f.ratio_capped);
    }
    SECTION("single segment still defines the top fraction") {
        const UtteranceRecord r = record_with_durations({2.5}, {0.3});
        const ArticulationFeatures f = articulation_features(r, profile_with_durations({2.5}));
        CHECK(f.top30_short_ws == 2.5);
        CHECK(f.top30_long_ws == 2.5);
    }
    SECTION("warping distance reflects slower reading") {
        const UtteranceRecord r = record_with_durations({2.0, 2.0}, {0.3});
        const ArticulationFeatures f = articulation_features(r, profile_with_durations({1.0, 1.0}));
        CHECK(f.ws_dtw == Catch::Approx(2.0).epsilon(1e-12));
    }
    SECTION("record without segments is rejected") {
        UtteranceRecord r;
        r.tokens.push_back(Token::make_pause(0.5));
        CHECK_THROWS_AS(articulation_features(r, profile_with_durations({1.0})), ValidationError);
    }
}

TEST_CASE("syllable counting") {
    CHECK(count_syllables("가을") == 2);
    CHECK(count_syllables("") == 0);
    CHECK(count_syllables("hello there") == 4);
    CHECK(count_syllables("xyz") == 0);
    CHECK(count_syllables("aeiou") == 1);
    CHECK(count_syllables("a b") == 1);
    CHECK(count_syllables("a e") == 2);
    CHECK(count_syllables("가을하늘아래") == 6);
    CHECK(count_syllables("강1물") == 2);
}

TEST_CASE("rhythm features") {
    SECTION("change rates average over consecutive pairs") {
        const UtteranceRecord r = record_with_durations({1.0, 1.5, 1.2});
        const RhythmFeatures f = rhythm_features(r, profile_with_durations({1.0, 1.5, 1.2}));
        CHECK(f.speed_change_rate_mean == Catch::Approx(0.15).epsilon(1e-9));
        CHECK(f.increasing_speed == Catch::Approx(0.25).epsilon(1e-9));
        CHECK(f.abnormal_speed == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("slowing down zeroes the increasing component") {
        const UtteranceRecord r = record_with_durations({1.0, 0.5});
        const RhythmFeatures f = rhythm_features(r, profile_with_durations({1.0, 0.5}));
        CHECK(f.speed_change_rate_mean == Catch::Approx(-0.5).epsilon(1e-12));
        CHECK(f.increasing_speed == 0.0);
    }
    SECTION("total duration against the healthy profile") {
        const UtteranceRecord r = record_with_durations({6.0, 6.0});
        ReferenceProfile p = profile_with_durations({5.0, 4.5});
        const RhythmFeatures f = rhythm_features(r, p);
        CHECK(f.abnormal_speed == Catch::Approx(2.5).epsilon(1e-12));
    }
    SECTION("syllables per second") {
        UtteranceRecord r = record_with_durations({2.0, 2.0});
        r.tokens[0] = Token::make_word("가을하늘아");
        r.tokens[1] = Token::make_word("단풍잎이붉");
        const RhythmFeatures f = rhythm_features(r, profile_with_durations({2.0, 2.0}));
        CHECK(f.sps == Catch::Approx(2.5).epsilon(1e-12));
    }
    SECTION("single segment has no change rate") {
        const UtteranceRecord r = record_with_durations({2.0});
        const RhythmFeatures f = rhythm_features(r, profile_with_durations({2.0}));
        CHECK(f.speed_change_rate_mean == 0.0);
        CHECK(f.increasing_speed == 0.0);
    }
}

TEST_CASE("assembled prosody features match their components") {
    const UtteranceRecord r = record_with_durations({1.0, 1.5, 1.2}, {0.5, 1.0});
    ReferenceProfile p = profile_with_durations({1.0, 1.4, 1.1});
    p.canonical_pause_sequence = {0, 1, 0, 0};

    const ProsodyFeatures f = prosody_features(r, p);
    const PauseLocationFeatures location = pause_location_features(expand_reference_pauses(p), pause_sequence(r.tokens));
    const PauseDurationStats stats = pause_duration_features(r.tokens);
    const ArticulationFeatures articulation = articulation_features(r, p);
    const RhythmFeatures rhythm = rhythm_features(r, p);

    CHECK(f.pause_ins == location.ins);
    CHECK(f.pause_hits == location.hits);
    CHECK(f.pause_dtw == location.dtw);
    CHECK(f.pause_num == location.num);
    CHECK(f.pause_sum == stats.sum);
    CHECK(f.pause_sd == stats.sd);
    CHECK(f.ws_dtw == articulation.ws_dtw);
    CHECK(f.ws_dur_sum == articulation.ws_dur_sum);
    CHECK(f.speech_pause_ratio == articulation.speech_pause_ratio);
    CHECK(f.top30_long_ws == articulation.top30_long_ws);
    CHECK(f.abnormal_speed == rhythm.abnormal_speed);
    CHECK(f.sps == rhythm.sps);
    CHECK(f.increasing_speed == rhythm.increasing_speed);
    CHECK(!f.speech_pause_ratio_capped);
}
