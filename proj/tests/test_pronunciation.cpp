#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "asrfeat/embeddings.hpp"
#include "asrfeat/errors.hpp"
#include "asrfeat/pronunciation.hpp"

using namespace asrfeat;

TEST_CASE("syntactic features on identical texts") {
    const ErrorMetrics m = syntactic_features("가을 하늘 아래", "가을 하늘 아래");
    CHECK(m.wer == 0.0);
    CHECK(m.mer == 0.0);
    CHECK(m.wip == 1.0);
    CHECK(m.wil == 0.0);
    CHECK(m.hits == 3);
}

TEST_CASE("syntactic features count one deletion") {
    const ErrorMetrics m = syntactic_features("가을 하늘 참", "가을 하늘");
    CHECK(m.hits == 2);
    CHECK(m.deletions == 1);
    CHECK(m.wer == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("pause markers are stripped from the hypothesis") {
    const ErrorMetrics with_pause = syntactic_features("가을 하늘", "가을 <pause> 하늘");
    CHECK(with_pause.wer == 0.0);
    CHECK(with_pause.hits == 2);

    const ErrorMetrics only_pause = syntactic_features("가을 하늘", "<pause>");
    CHECK(only_pause.deletions == 2);
    CHECK(only_pause.wer == 1.0);
}

TEST_CASE("empty reference is rejected") {
    CHECK_THROWS_AS(syntactic_features("", "가을"), ValidationError);
    CHECK_THROWS_AS(syntactic_features("   ", "가을"), ValidationError);
}

TEST_CASE("identical texts score f1 of one") {
    TrigramHashProvider provider(256);
    const BertScore s = bert_score("가을 하늘 아래 단풍", "가을 하늘 아래 단풍", provider);
    CHECK(s.precision == Catch::Approx(1.0).margin(1e-9));
    CHECK(s.recall == Catch::Approx(1.0).margin(1e-9));
    CHECK(s.f1 == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("an extra hypothesis word keeps recall at one") {
    TrigramHashProvider provider(256);
    const BertScore s = bert_score("가을 하늘", "가을 하늘 아래", provider);
    CHECK(s.recall == Catch::Approx(1.0).margin(1e-9));
    CHECK(s.precision < 1.0 - 1e-9);
    CHECK(s.f1 < 1.0 - 1e-9);
    CHECK(s.f1 > 0.5);
}

TEST_CASE("unrelated texts score low") {
    TrigramHashProvider provider(256);
    const BertScore s = bert_score("가을 하늘", "xyzzy quux", provider);
    CHECK(s.f1 < 0.5);
}

TEST_CASE("token matching ignores hypothesis order") {
    TrigramHashProvider provider(256);
    const BertScore a = bert_score("가을 하늘 아래", "아래 가을 하늘", provider);
    const BertScore b = bert_score("가을 하늘 아래", "가을 하늘 아래", provider);
    CHECK(a.f1 == Catch::Approx(b.f1).margin(1e-12));
}

TEST_CASE("max repetition counts the longest code point run") {
    CHECK(max_repetition("aaab") == 3);
    CHECK(max_repetition("abc") == 1);
    CHECK(max_repetition("어어어어 가을") == 4);
    CHECK(max_repetition("") == 0);
    CHECK(max_repetition("   ") == 0);
}

TEST_CASE("runs span token boundaries after whitespace removal") {
    CHECK(max_repetition("가 가나") == 2);
    CHECK(max_repetition("어어 어어") == 4);
    CHECK(max_repetition("아 나 다") == 1);
}

TEST_CASE("surrounding text does not reduce the longest run") {
    const std::int64_t base = max_repetition("어어어");
    CHECK(max_repetition("가을 어어어") == base);
    CHECK(max_repetition("어어어 하늘") == base);
}

TEST_CASE("filler similarity averages per-filler cosines") {
    TrigramHashProvider provider(256);

    CHECK(filler_similarity("어", {"어"}, provider) == Catch::Approx(1.0).margin(1e-9));

    const double cross = cosine_similarity(provider.embed_sentence("어").vector, provider.embed_sentence("음").vector);
    const double expected = (1.0 + cross) / 2.0;
    CHECK(filler_similarity("어", {"어", "음"}, provider) == Catch::Approx(expected).margin(1e-12));
    CHECK(filler_similarity("어", {"음", "어"}, provider) == Catch::Approx(expected).margin(1e-12));

    CHECK_THROWS_AS(filler_similarity("어", {}, provider), ValidationError);
}

TEST_CASE("assembled pronunciation features") {
    TrigramHashProvider provider(256);
    const std::vector<std::string> fillers = default_fillers();

    SECTION("identical reading") {
        const PronunciationFeatures f =
            pronunciation_features("가을 하늘 아래", "가을 <pause> 하늘 아래", fillers, provider);
        CHECK(f.hits == 3);
        CHECK(f.insertion == 0);
        CHECK(f.wer == 0.0);
        CHECK(f.wip == 1.0);
        CHECK(f.bert_score_f1 == Catch::Approx(1.0).margin(1e-9));
        CHECK(f.max_repetition == 1);
    }

    SECTION("repetition feeds through from the joined words") {
        const PronunciationFeatures f = pronunciation_features("가을 하늘", "가을 어어어 하늘", fillers, provider);
        CHECK(f.max_repetition == 3);
        CHECK(f.insertion == 1);
    }

    SECTION("hypothesis with no word tokens is rejected") {
        CHECK_THROWS_AS(pronunciation_features("가을", "<pause>", fillers, provider), ValidationError);
    }
}

TEST_CASE("default filler inventory") {
    const std::vector<std::string> fillers = default_fillers();
    REQUIRE(fillers.size() == 4);
    CHECK(fillers[0] == "어");
    CHECK(fillers[1] == "음");
    CHECK(fillers[2] == "으");
    CHECK(fillers[3] == "그");
}
