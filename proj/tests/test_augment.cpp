#include <doctest.h>

#include <map>
#include <string>

#include "xcoqa/augment.hpp"

using namespace xcoqa;

TEST_CASE("filter_qa_pair heuristics") {
    SUBCASE("answer is a number") {
        CHECK(filter_qa_pair("When was an American in Paris written?", "1928") ==
              FilterLabel::Number);
        CHECK(filter_qa_pair("How much?", "1,234.5") == FilterLabel::Number);
    }
    SUBCASE("question starts with who") {
        CHECK(filter_qa_pair("Who was the conductor of 'An American in Paris'?",
                             "Walter Damrosch") == FilterLabel::Who);
        CHECK(filter_qa_pair("who did it", "Somebody") == FilterLabel::Who);
        // "who" must be a whole word
        CHECK(filter_qa_pair("Whose idea was it?", "Hers") == std::nullopt);
    }
    SUBCASE("question starts with how many") {
        CHECK(filter_qa_pair("How many parts were produced?", "billions") ==
              FilterLabel::HowMany);
    }
    SUBCASE("answer is a date") {
        CHECK(filter_qa_pair("When did Gershwin complete the orchestration?",
                             "November 18") == FilterLabel::Date);
        CHECK(filter_qa_pair("When?", "13/12/1928") == FilterLabel::Date);
        CHECK(filter_qa_pair("When?", "in 1928 he left") == FilterLabel::Date);
    }
    SUBCASE("answer contains a number") {
        CHECK(filter_qa_pair("When did George Gershwin write an American in Paris?",
                             "the 1920s") == FilterLabel::ContainsNumber);
        CHECK(filter_qa_pair("What brand?", "600 billion Lego parts") ==
              FilterLabel::ContainsNumber);
    }
    SUBCASE("no rule matches") {
        CHECK(filter_qa_pair("What was the name of the instrument that Gershwin scored for?",
                             "automobile horns") == std::nullopt);
        CHECK(filter_qa_pair("What was the name of the orchestral piece?",
                             "New York Philharmonic") == std::nullopt);
    }
    SUBCASE("rule order: number wins over who") {
        CHECK(filter_qa_pair("Who scored 1928 points?", "1928") == FilterLabel::Number);
    }
    SUBCASE("empty inputs rejected") {
        CHECK_THROWS_AS(filter_qa_pair("", "x"), argument_error);
        CHECK_THROWS_AS(filter_qa_pair("x", ""), argument_error);
    }
}

namespace {

std::vector<SubPassage> make_pool(std::size_t n, const std::string& filler) {
    std::vector<SubPassage> pool;
    for (std::size_t i = 0; i < n; ++i)
        pool.push_back({"seed" + std::to_string(i), 0,
                        filler + " passage number " + std::to_string(i), 4, false});
    return pool;
}

} // namespace

TEST_CASE("sample_negative_contexts") {
    SUBCASE("samples n distinct trimmed passages") {
        auto negs = sample_negative_contexts(make_pool(5, "neutral text"), "answer", 3, 100, 1);
        CHECK(negs.size() == 3);
        std::set<std::string> ids;
        for (const auto& p : negs) ids.insert(p.id);
        CHECK(ids.size() == 3);
    }
    SUBCASE("candidates containing the answer are never selected") {
        auto pool = make_pool(6, "neutral text");
        pool[2].text = "this has The Answer inside";
        pool[4].text = "THE ANSWER again";
        for (int seed = 0; seed < 20; ++seed) {
            auto negs = sample_negative_contexts(pool, "the answer", 4, 100, seed);
            for (const auto& p : negs)
                CHECK(utf8::to_lower_copy(p.text).find("the answer") == std::string::npos);
        }
    }
    SUBCASE("exhausted pool reports the deficit") {
        auto pool = make_pool(3, "the answer everywhere");
        try {
            sample_negative_contexts(pool, "the answer", 2, 100, 0);
            FAIL("expected argument_error");
        } catch (const argument_error& e) {
            CHECK(std::string(e.what()).find("0 of 2") != std::string::npos);
        }
    }
    SUBCASE("texts trimmed to max_tokens") {
        std::string longtext;
        for (int i = 0; i < 200; ++i) longtext += "w" + std::to_string(i) + " ";
        std::vector<SubPassage> pool{{"s", 0, longtext, 200, false}};
        auto negs = sample_negative_contexts(pool, "zzz", 1, 100, 0);
        std::istringstream ss(negs[0].text);
        std::string w;
        std::size_t count = 0;
        while (ss >> w) ++count;
        CHECK(count == 100);
    }
}

TEST_CASE("translate_pairs") {
    std::vector<QAPair> pairs = {
        {"q1", "Who founded it?", "Ole Kirk", "en", FilterLabel::Who, std::nullopt},
        {"q2", "When was it made?", "1949", "en", FilterLabel::Number, std::nullopt}};
    SUBCASE("identity mock: one copy per pair per target") {
        auto out = translate_pairs(pairs, {"ja", "fi", "ru"}, identity_translator());
        CHECK(out.size() == 6);
        std::map<std::string, int> per_lang;
        for (const auto& p : out) ++per_lang[p.lang];
        for (const auto& [lang, n] : per_lang) CHECK(n == 2);
    }
    SUBCASE("no targets, no output") {
        CHECK(translate_pairs(pairs, {}, identity_translator()).empty());
    }
    SUBCASE("a pair failing one target is dropped from all targets") {
        TranslatorContract flaky = [](const std::string& text, const std::string&,
                                      const std::string& tgt) -> std::string {
            if (tgt == "fi" && text == "1949") throw std::runtime_error("mt outage");
            return text;
        };
        auto out = translate_pairs(pairs, {"ja", "fi"}, flaky);
        CHECK(out.size() == 2); // only q1, in both languages
        for (const auto& p : out) CHECK(p.id.rfind("q1", 0) == 0);
    }
    SUBCASE("non-English input rejected") {
        std::vector<QAPair> bad = {{"x", "q", "a", "ja", std::nullopt, std::nullopt}};
        CHECK_THROWS_AS(translate_pairs(bad, {"fi"}, identity_translator()),
                        argument_error);
    }
}

namespace {

std::map<std::string, Passage> make_seeds() {
    std::map<std::string, Passage> seeds;
    for (int i = 0; i < 4; ++i) {
        const std::string id = "seed" + std::to_string(i);
        std::string text;
        for (int s = 0; s < 3; ++s)
            text += "Filler sentence number " + std::to_string(s) + " of passage " +
                    std::to_string(i) + ". ";
        text.pop_back();
        seeds[id] = {id, "en", "Title " + std::to_string(i), text};
    }
    return seeds;
}

std::vector<QAPair> make_pairs(std::size_t n) {
    std::vector<QAPair> pairs;
    for (std::size_t i = 0; i < n; ++i)
        pairs.push_back({"q" + std::to_string(i), "Who did thing " + std::to_string(i) + "?",
                         "Person" + std::to_string(i), "ja", FilterLabel::Who,
                         "seed" + std::to_string(i % 4)});
    return pairs;
}

} // namespace

TEST_CASE("build_aug_dataset") {
    auto seeds = make_seeds();
    SUBCASE("AUG-QA keeps the English positive") {
        auto out = build_aug_dataset(make_pairs(4), seeds, identity_translator(),
                                     AugVariant::AugQA, 2, PositivePlacement::Top, 5);
        REQUIRE(out.size() == 4);
        for (const auto& ex : out) {
            CHECK(ex.positive_passage.lang == "en");
            CHECK(ex.positive_passage.text == seeds.at(*ex.qa.source_passage_id).text);
            CHECK(ex.positive_position == 0);
        }
    }
    SUBCASE("AUG-QAP with identity mock relabels the language only") {
        auto out = build_aug_dataset(make_pairs(4), seeds, identity_translator(),
                                     AugVariant::AugQAP, 2, PositivePlacement::Top, 5);
        for (const auto& ex : out) {
            CHECK(ex.positive_passage.lang == "ja");
            CHECK(ex.positive_passage.text == seeds.at(*ex.qa.source_passage_id).text);
        }
    }
    SUBCASE("shuffle placement stays within the top 3") {
        auto out = build_aug_dataset(make_pairs(12), seeds, identity_translator(),
                                     AugVariant::AugQA, 1, PositivePlacement::Shuffle, 9);
        for (const auto& ex : out) CHECK(ex.positive_position < 3);
    }
    SUBCASE("deterministic under seed") {
        auto a = build_aug_dataset(make_pairs(6), seeds, identity_translator(),
                                   AugVariant::AugQA, 2, PositivePlacement::Shuffle, 42);
        auto b = build_aug_dataset(make_pairs(6), seeds, identity_translator(),
                                   AugVariant::AugQA, 2, PositivePlacement::Shuffle, 42);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].positive_position == b[i].positive_position);
            REQUIRE(a[i].negative_passages.size() == b[i].negative_passages.size());
            for (std::size_t j = 0; j < a[i].negative_passages.size(); ++j)
                CHECK(a[i].negative_passages[j].id == b[i].negative_passages[j].id);
        }
    }
    SUBCASE("missing seed passage is a reference error") {
        std::vector<QAPair> pairs = {{"q", "Who?", "X", "ja", FilterLabel::Who, "nope"}};
        CHECK_THROWS_AS(build_aug_dataset(pairs, seeds, identity_translator(),
                                          AugVariant::AugQA, 1, PositivePlacement::Top, 0),
                        conflict_error);
    }
}
