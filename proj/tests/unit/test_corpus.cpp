#include <doctest.h>

#include "xref/corpus.hpp"

#include <algorithm>
#include <random>
#include <sstream>

using namespace xref;

namespace {

Corpus parse(const std::string& text, CorpusFormat format = CorpusFormat::tsv) {
    std::istringstream in(text);
    return parse_corpus(in, format);
}

std::size_t error_line(const std::string& text, CorpusFormat format = CorpusFormat::tsv) {
    try {
        parse(text, format);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

TokenizerConfig plain() {
    TokenizerConfig cfg;
    cfg.stopwords.clear();
    cfg.stemmer = Stemmer::none;
    return cfg;
}

}  // namespace

TEST_CASE("tsv record") {
    const auto c = parse("Isaiah.25.8\tHe will swallow up death forever\n");
    REQUIRE(c.size() == 1);
    CHECK(c[0].id == PassageId::parse("Isaiah.25.8"));
    CHECK(c[0].raw_text == "He will swallow up death forever");
}

TEST_CASE("empty input gives an empty corpus") {
    CHECK(parse("").empty());
    CHECK(parse("\n\n  \n").empty());
}

TEST_CASE("passages keep file order and CRLF is tolerated") {
    const auto c = parse("Gen.1.2\tsecond\r\nGen.1.1\tfirst\r\n");
    REQUIRE(c.size() == 2);
    CHECK(c[0].id.str() == "Gen.1.2");
    CHECK(c[1].raw_text == "first");
}

TEST_CASE("duplicate id fails at the second line") {
    CHECK(error_line("Gen.1.1\ta\nGen.1.2\tb\nGen.1.1\tc\n") == 3);
}

TEST_CASE("malformed records report their line") {
    CHECK(error_line("Gen.1.1\tok\nno tab here\n") == 2);
    CHECK(error_line("Gen.1.1\tok\n\tmissing id\n") == 2);
    CHECK(error_line("{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\"}\n", CorpusFormat::jsonl) == 2);
    CHECK(error_line("{\"id\":\"a\",\"text\":\"x\"}\nnot json\n", CorpusFormat::jsonl) == 2);
    CHECK(error_line("Gen.1.1\tok\nGen.1.2\tbad \xff byte\n") == 2);
    CHECK(error_line("Gen.1.1\ttruncated \xe2\x82\n") == 1);
}

TEST_CASE("jsonl and verse-per-line") {
    const auto j = parse("{\"id\":\"emma-1\",\"text\":\"Emma Woodhouse\"}\n{\"id\":7,\"text\":\"x\"}\n", CorpusFormat::jsonl);
    REQUIRE(j.size() == 2);
    CHECK(j[0].id.str() == "emma-1");
    CHECK(j[1].id.str() == "7");
    const auto v = parse("John.3.16 For God so loved the world\n", CorpusFormat::verse_per_line);
    REQUIRE(v.size() == 1);
    CHECK(v[0].raw_text == "For God so loved the world");
    CHECK(parse_corpus_format("jsonl") == CorpusFormat::jsonl);
    CHECK_THROWS_AS(parse_corpus_format("xml"), Error);
}

TEST_CASE("corpus lookup by exact id and by resolution key") {
    const auto c = parse("Isa.25.8\ta\n1Cor.15.54\tb\n");
    CHECK(c.position(PassageId::parse("Isa.25.8")) == DocIndex{0});
    CHECK_FALSE(c.position(PassageId::parse("Isaiah.25.8")).has_value());
    CHECK(c.resolve(PassageId::parse("Isaiah.25.8")) == DocIndex{0});
    CHECK(c.resolve(PassageId::parse("1 Corinthians.15.54")) == DocIndex{1});
    CHECK_FALSE(c.resolve(PassageId::parse("Gen.1.1")).has_value());
}

TEST_CASE("vocabulary pruning and ordering") {
    auto c = parse("a\tdeath life\nb\tdeath zeal\nc\tdeath life\nd\tonce\n");
    const auto v = build_vocabulary(c, plain(), 2);
    CHECK(v.terms == std::vector<std::string>{"death", "life"});
    CHECK(v.doc_freq == std::vector<std::uint32_t>{3, 2});
    CHECK_FALSE(v.find("once").has_value());
    CHECK_FALSE(v.find("zeal").has_value());

    auto tie = parse("a\tzeal bread\nb\tzeal bread\n");
    const auto tv = build_vocabulary(tie, plain(), 1);
    CHECK(tv.terms == std::vector<std::string>{"bread", "zeal"});

    const auto capped = build_vocabulary(c, plain(), 1, 2);
    CHECK(capped.size() == 2);
    CHECK_THROWS_WITH_AS(build_vocabulary(c, plain(), 10), "vocabulary empty after pruning", Error);
    CHECK_THROWS_AS(build_vocabulary(c, plain(), 0), Error);
}

TEST_CASE("doc-term counts") {
    auto c = parse("a\tx x y\nb\tqqq\nc\ty z\n");
    // Vocabulary without "qqq", so passage b is entirely out of vocabulary.
    const auto v = build_vocabulary(parse("a\tx x y\nc\ty z\n"), plain(), 1);
    assign_tokens(c, v, plain());
    const auto m = build_doc_term(c, v);
    REQUIRE(m.docs() == 3);
    const auto x = *v.find("x");
    const auto y = *v.find("y");
    std::vector<std::pair<WordIndex, std::uint32_t>> row0;
    for (std::size_t i = 0; i < m.row_cols(0).size(); ++i) row0.emplace_back(m.row_cols(0)[i], m.row_vals(0)[i]);
    std::sort(row0.begin(), row0.end());
    auto expect = std::vector<std::pair<WordIndex, std::uint32_t>>{{x, 2}, {y, 1}};
    std::sort(expect.begin(), expect.end());
    CHECK(row0 == expect);
    CHECK(m.lengths[0] == 3);
    CHECK(m.row_cols(1).empty());
    CHECK(m.lengths[1] == 0);
}

TEST_CASE("count invariants on a random corpus") {
    std::mt19937_64 rng(3);
    const char* words[] = {"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"};
    std::string text;
    for (int d = 0; d < 60; ++d) {
        text += "p" + std::to_string(d) + "\t";
        const int n = static_cast<int>(rng() % 9);
        for (int i = 0; i < n; ++i) text += std::string(words[rng() % 8]) + " ";
        text += "\n";
    }
    auto c = parse(text);
    const auto v = build_vocabulary(c, plain(), 2);
    assign_tokens(c, v, plain());
    const auto m = build_doc_term(c, v);
    std::vector<std::uint32_t> df(v.size(), 0);
    std::size_t distinct = 0;
    for (DocIndex d = 0; d < m.docs(); ++d) {
        std::uint64_t sum = 0;
        const auto cols = m.row_cols(d);
        CHECK(std::is_sorted(cols.begin(), cols.end()));
        for (std::size_t i = 0; i < cols.size(); ++i) {
            sum += m.row_vals(d)[i];
            ++df[cols[i]];
        }
        CHECK(sum == m.lengths[d]);
        CHECK(m.lengths[d] == c[d].tokens.size());
        std::vector<WordIndex> t = c[d].tokens;
        std::sort(t.begin(), t.end());
        distinct += static_cast<std::size_t>(std::unique(t.begin(), t.end()) - t.begin());
    }
    CHECK(df == v.doc_freq);
    CHECK(m.nonzeros() == distinct);
}
