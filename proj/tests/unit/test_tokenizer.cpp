#include <doctest.h>

#include "xref/porter.hpp"
#include "xref/tokenizer.hpp"

#include <cstdio>
#include <fstream>
#include <string>

using namespace xref;

TEST_CASE("stoplist and stemming") {
    const TokenizerConfig cfg;
    CHECK(tokenize("He will swallow up death", cfg) == std::vector<std::string>{"swallow", "death"});
    CHECK(tokenize("", cfg).empty());
    CHECK(tokenize("Death death DEATH", cfg) == std::vector<std::string>{"death", "death", "death"});
}

TEST_CASE("archaic forms are stopwords") {
    const TokenizerConfig cfg;
    CHECK(tokenize("thou hast said unto thee that thy God hath spoken", cfg) ==
          std::vector<std::string>{"said", "god", "spoken"});
}

TEST_CASE("punctuation and digits split words") {
    TokenizerConfig cfg;
    cfg.stopwords.clear();
    cfg.stemmer = Stemmer::none;
    CHECK(tokenize("Lord's 12 tribes;and-kings", cfg) == std::vector<std::string>{"lord", "s", "tribes", "and", "kings"});
}

TEST_CASE("lowercase can be disabled") {
    TokenizerConfig cfg;
    cfg.lowercase = false;
    cfg.stopwords.clear();
    cfg.stemmer = Stemmer::none;
    CHECK(tokenize("Moses spake", cfg) == std::vector<std::string>{"Moses", "spake"});
}

TEST_CASE("non-ASCII bytes stay inside words") {
    TokenizerConfig cfg;
    cfg.stopwords.clear();
    cfg.stemmer = Stemmer::none;
    CHECK(tokenize("caf\xc3\xa9 na\xc3\xafve", cfg) == std::vector<std::string>{"caf\xc3\xa9", "na\xc3\xafve"});
}

TEST_CASE("tokenize is deterministic") {
    const TokenizerConfig cfg;
    const std::string text = "And God said, Let there be light: and there was light.";
    CHECK(tokenize(text, cfg) == tokenize(text, cfg));
}

TEST_CASE("stopword file replaces the built-in list") {
    const std::string path = "test_tokenizer_stop.txt";
    {
        std::ofstream out(path);
        out << "light\nsaid\n";
    }
    TokenizerConfig cfg;
    cfg.stopwords = load_stopwords(path);
    cfg.stemmer = Stemmer::none;
    CHECK(tokenize("God said let there be light", cfg) == std::vector<std::string>{"god", "let", "there", "be"});
    std::remove(path.c_str());
}

// Expected stems were produced once by an independent Porter implementation
// over every distinct word of the KJV plus the classic Porter test words.
TEST_CASE("porter matches the frozen reference stems") {
    std::ifstream in(XREF_TEST_DATA "/porter_frozen.tsv");
    REQUIRE(in);
    std::string word, stem;
    std::size_t total = 0, wrong = 0;
    while (in >> word >> stem) {
        ++total;
        if (porter_stem(word) != stem) {
            if (++wrong < 10) MESSAGE(word << " -> " << porter_stem(word) << ", expected " << stem);
        }
    }
    CHECK(total > 12000);
    CHECK(wrong == 0);
}

TEST_CASE("porter spot checks") {
    CHECK(porter_stem("caresses") == "caress");
    CHECK(porter_stem("ponies") == "poni");
    CHECK(porter_stem("relational") == "relat");
    CHECK(porter_stem("generalization") == "gener");
    CHECK(porter_stem("swallow") == "swallow");
    CHECK(porter_stem("a") == "a");
    CHECK(porter_stem("") == "");
}
