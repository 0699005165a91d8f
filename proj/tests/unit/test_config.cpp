#include <doctest.h>

#include "planted.hpp"
#include "xref/config.hpp"

#include <cstdio>
#include <sstream>

using namespace xref;

TEST_CASE("defaults") {
    const PipelineConfig c;
    CHECK(c.anchors.method == "tandem");
    CHECK(c.anchors.candidate_min_df == 10);
    CHECK(c.anchors.tandem_min_tokens == 2);
    CHECK(c.inference.alpha == 0.01);
    CHECK(c.candidates.sparsity == 50);
    CHECK(c.eval.price == 0.05);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("json round trip") {
    PipelineConfig c;
    c.corpus.path = "data/kjv.tsv";
    c.corpus.stemmer = "none";
    c.anchors.method = "gram-schmidt";
    c.anchors.k = 77;
    c.solver.max_iters = 9;
    c.inference.tol = 1e-4;
    c.candidates.threshold = 0.25;
    c.eval.min_votes = 5;
    const auto back = config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK(back.anchors.k == 77);
    CHECK(back.candidates.threshold == 0.25);
    CHECK_FALSE(back.candidates.top_n.has_value());
    CHECK(back.eval.min_votes == 5);

    const std::string path = "test_config_roundtrip.json";
    save_config(c, path);
    CHECK(to_json(load_config(path)) == to_json(c));
    std::remove(path.c_str());
}

TEST_CASE("partial files keep defaults") {
    const auto c = config_from_json(nlohmann::json::parse(R"({"anchors": {"k": 12}})"));
    CHECK(c.anchors.k == 12);
    CHECK(c.anchors.method == "tandem");
    CHECK(c.solver.step_size == 50.0);
}

TEST_CASE("unknown keys, bad types and bad values are rejected") {
    CHECK_THROWS_WITH_AS(config_from_json(nlohmann::json::parse(R"({"anchors": {"kk": 3}})")),
                         "unknown config key 'anchors.kk'", Error);
    CHECK_THROWS_WITH_AS(config_from_json(nlohmann::json::parse(R"({"anchor": {}})")),
                         "unknown config section 'anchor'", Error);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"anchors": {"k": "ten"}})")), Error);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"([1, 2])")), Error);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"candidates": {"top_n": 5, "threshold": 0.1}})")).validate(), Error);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"anchors": {"method": "lda"}})")).validate(), Error);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"inference": {"alpha": 0}})")).validate(), Error);
    CHECK_THROWS_AS(load_config("no/such/config.json"), Error);
}

TEST_CASE("topic count defaults") {
    PipelineConfig::AnchorSection a;
    std::istringstream verses("Gen.1.1\tx\nGen.1.2\ty\n");
    const auto bible = parse_corpus(verses, CorpusFormat::tsv);
    CHECK(resolve_topic_count(a, bible) == 3000);

    const auto generic = testing::corpus_from_tokens(std::vector<std::vector<WordIndex>>(95));
    CHECK(resolve_topic_count(a, generic) == 10);

    a.method = "coarse-proxy";
    CHECK(resolve_topic_count(a, bible) == 100);
    a.k = 7;
    CHECK(resolve_topic_count(a, generic) == 7);
}
