#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "xcoqa/tokenize.hpp"

using namespace xcoqa;

TEST_CASE("spacing tokenization lowercases and drops punctuation") {
    CHECK(tokenize("The Lego Group", "en") ==
          std::vector<std::string>{"the", "lego", "group"});
    CHECK(tokenize("", "en").empty());
    CHECK(tokenize("Hello, world!", "en") ==
          std::vector<std::string>{"hello", "world"});
}

TEST_CASE("non-spacing tokenization is per codepoint with digit runs kept") {
    CHECK(tokenize("レゴは1949年", "ja") ==
          std::vector<std::string>{"レ", "ゴ", "は", "1949", "年"});
    CHECK(tokenize("", "ja").empty());
    CHECK(tokenize("彼は来た。", "ja") ==
          std::vector<std::string>{"彼", "は", "来", "た"});
}

TEST_CASE("unsupported language is a configuration error") {
    CHECK_THROWS_AS(tokenize("x", "xx"), config_error);
    CHECK(tokenizer_for("ja").mode == TokenizerMode::NonSpacing);
    CHECK(tokenizer_for("km").mode == TokenizerMode::NonSpacing);
    CHECK(tokenizer_for("zh-cn").mode == TokenizerMode::NonSpacing);
    CHECK(tokenizer_for("ko").mode == TokenizerMode::Spacing);
}

TEST_CASE("tokenize never yields empty tokens; whitespace-run invariant") {
    std::mt19937_64 rng(7);
    const std::string alphabet = "ab c.,!  d\te";
    for (int it = 0; it < 200; ++it) {
        std::string s;
        const std::size_t len = rng() % 30;
        for (std::size_t i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
        auto tokens = tokenize(s, "en");
        for (const auto& t : tokens) CHECK(!t.empty());
        // doubling every space must not change the output
        std::string doubled;
        for (char c : s) {
            doubled += c;
            if (c == ' ') doubled += ' ';
        }
        CHECK(tokenize(doubled, "en") == tokens);
    }
}

TEST_CASE("sentence splitting") {
    CHECK(split_sentences("A. B? C", "en") ==
          std::vector<std::string>{"A.", "B?", "C"});
    CHECK(split_sentences("no terminator", "en") ==
          std::vector<std::string>{"no terminator"});
    CHECK(split_sentences("彼は来た。帰った。", "ja") ==
          std::vector<std::string>{"彼は来た。", "帰った。"});
    // mid-token dots do not split
    CHECK(split_sentences("pi is 3.14 roughly", "en") ==
          std::vector<std::string>{"pi is 3.14 roughly"});
    CHECK(split_sentences("", "en").empty());
}

TEST_CASE("sentence splitting loses no text") {
    const std::string text = "First one. Second two! Third? And a tail";
    auto sents = split_sentences(text, "en");
    std::string rejoined;
    for (const auto& s : sents) {
        if (!rejoined.empty()) rejoined += ' ';
        rejoined += s;
    }
    CHECK(rejoined == text);
}

TEST_CASE("script-based language detection") {
    CHECK(detect_language("Кто основал компанию?") == "ru");
    CHECK(detect_language("누가 설립했습니까") == "ko");
    CHECK(detect_language("who founded the company") == "en");
    CHECK(detect_language("¿Quién fue el fundador de la empresa?") == "es");
    CHECK(detect_language("レゴグループを設立したのは誰ですか") == "ja");
    CHECK(detect_language("தமிழ்") == "ta");
    CHECK_THROWS_AS(detect_language("12345 !!"), config_error);
    CHECK_THROWS_AS(detect_language(""), argument_error);
}

TEST_CASE("detection is deterministic") {
    const std::string text = "siapa yang menubuhkan syarikat itu";
    const auto first = detect_language(text);
    for (int i = 0; i < 5; ++i) CHECK(detect_language(text) == first);
}

TEST_CASE("stopword tables load from disk and match built-ins") {
    const std::string path = std::string(XCOQA_DATA_DIR) + "/stopwords/en.txt";
    auto table = load_stopword_table(path);
    CHECK(table.count("the") == 1);
    CHECK(table.count("who") == 1);
    CHECK_THROWS_AS(load_stopword_table("/nonexistent/sw.txt"), config_error);
}
