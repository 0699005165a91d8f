#include <doctest.h>

#include "planted.hpp"
#include "xref/anchors.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace xref;

namespace {

CooccurrenceMatrix from_conditional(const RowMatrix& qbar) {
    CooccurrenceMatrix c;
    c.conditional = qbar;
    c.joint = qbar / static_cast<double>(qbar.rows());
    c.marginal = c.joint.rowwise().sum();
    for (Eigen::Index i = 0; i < qbar.rows(); ++i) {
        if (qbar.row(i).sum() == 0.0) c.excluded.push_back(static_cast<WordIndex>(i));
    }
    return c;
}

std::vector<std::uint32_t> all_df(std::size_t n, std::uint32_t df = 100) { return std::vector<std::uint32_t>(n, df); }

}  // namespace

TEST_CASE("orthogonal rows are all selected, lower index first on ties") {
    const auto c = from_conditional(RowMatrix::Identity(4, 4));
    const auto a = gram_schmidt_anchors(c, 4, 10, all_df(4));
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(*a.provenance[i].word == i);
    CHECK(a.vectors == RowMatrix::Identity(4, 4));
}

TEST_CASE("K = 1 takes the row of largest norm") {
    RowMatrix q(3, 3);
    q << 0.4, 0.3, 0.3, 0.0, 0.9, 0.1, 0.5, 0.5, 0.0;
    const auto a = gram_schmidt_anchors(from_conditional(q), 1, 1, all_df(3));
    CHECK(*a.provenance[0].word == 1);
    CHECK(a.residual_norms[0] == doctest::Approx(std::sqrt(0.82)));
}

TEST_CASE("candidate floor and excluded words") {
    RowMatrix q = RowMatrix::Identity(4, 4);
    q(3, 3) = 0.0;
    const auto c = from_conditional(q);
    std::vector<std::uint32_t> df{50, 3, 50, 50};
    const auto a = gram_schmidt_anchors(c, 2, 10, df);
    CHECK(*a.provenance[0].word == 0);
    CHECK(*a.provenance[1].word == 2);
    CHECK(a.candidate_min_df == 10);
    CHECK_THROWS_WITH_AS(gram_schmidt_anchors(c, 3, 10, df),
                         "only 2 anchor candidates with document frequency >= 10, need 3 (short by 1)", Error);
    CHECK_THROWS_AS(gram_schmidt_anchors(c, 0, 10, df), Error);
}

TEST_CASE("planted anchors are recovered and residual norms never increase") {
    const auto p = testing::make_planted({});
    const auto c = build_cooccurrence(p.counts);
    const auto a = gram_schmidt_anchors(c, 10, 10, p.vocab.doc_freq);
    std::set<WordIndex> picked;
    for (const auto& prov : a.provenance) picked.insert(*prov.word);
    CHECK(picked.size() == 10);
    std::size_t hits = 0;
    for (const auto w : p.anchors) hits += picked.count(w);
    CHECK(hits >= 9);
    for (std::size_t i = 1; i < a.residual_norms.size(); ++i) {
        CHECK(a.residual_norms[i] <= a.residual_norms[i - 1] + 1e-12);
    }
}

TEST_CASE("residual norms never increase on random matrices") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        RowMatrix q = RowMatrix::Zero(30, 12);
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
            const auto row = testing::dirichlet(rng, 12, 0.5);
            for (Eigen::Index j = 0; j < 12; ++j) q(i, j) = row[static_cast<std::size_t>(j)];
        }
        const auto a = gram_schmidt_anchors(from_conditional(q), 12, 1, all_df(30));
        for (std::size_t i = 1; i < a.residual_norms.size(); ++i) {
            CHECK(a.residual_norms[i] <= a.residual_norms[i - 1] + 1e-12);
        }
    }
}

TEST_CASE("harmonic mean examples") {
    RowMatrix two(2, 2);
    two << 1.0, 1.0, 1.0, 1.0 / 3;
    const auto hm = harmonic_mean_rows(two);
    CHECK(hm(0) == doctest::Approx(1.0));
    CHECK(hm(1) == doctest::Approx(0.5));

    RowMatrix one(1, 3);
    one << 0.2, 0.5, 0.3;
    CHECK(harmonic_mean_rows(one).isApprox(one.row(0).transpose()));

    RowMatrix zero(2, 2);
    zero << 1.0, 0.0, 1.0, 1.0;
    const auto z = harmonic_mean_rows(zero);
    CHECK(z(1) == doctest::Approx(2.0 / (1.0 / 1e-10 + 1.0)).epsilon(1e-12));
}

TEST_CASE("harmonic mean is bounded by the row minimum and permutation invariant") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % 5);
        RowMatrix rows(m, 6);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto r = testing::dirichlet(rng, 6, 0.3);
            for (Eigen::Index j = 0; j < 6; ++j) rows(i, j) = r[static_cast<std::size_t>(j)];
        }
        const auto hm = harmonic_mean_rows(rows);
        RowMatrix reversed = rows.colwise().reverse();
        CHECK((harmonic_mean_rows(reversed) - hm).cwiseAbs().maxCoeff() < 1e-15);
        for (Eigen::Index j = 0; j < 6; ++j) {
            const double lo = rows.col(j).minCoeff();
            CHECK(hm(j) <= std::max(lo, 1e-10) * static_cast<double>(m) + 1e-15);
            CHECK(hm(j) >= std::max(lo, 1e-10) - 1e-15);
        }
        if (m > 1) {
            RowMatrix same = rows.row(0).replicate(m, 1);
            CHECK((harmonic_mean_rows(same).transpose() - rows.row(0).cwiseMax(1e-10)).cwiseAbs().maxCoeff() < 1e-15);
        }
    }
}

TEST_CASE("tandem anchors are deterministic and draw distinct passages") {
    testing::PlantedSpec spec;
    spec.docs = 200;
    spec.doc_length = 50;
    const auto p = testing::make_planted(spec);
    const auto c = build_cooccurrence(p.counts);
    const auto a = tandem_anchors(c, p.corpus, 40, 42);
    const auto b = tandem_anchors(c, p.corpus, 40, 42);
    const auto other = tandem_anchors(c, p.corpus, 40, 43);
    REQUIRE(a.size() == 40);
    CHECK(a.vectors == b.vectors);
    CHECK(a.vectors != other.vectors);
    std::set<DocIndex> passages;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& prov = a.provenance[i];
        REQUIRE(prov.passage.has_value());
        passages.insert(*prov.passage);
        CHECK(prov.words.size() >= 2);
        CHECK(std::is_sorted(prov.words.begin(), prov.words.end()));
        RowMatrix rows(static_cast<Eigen::Index>(prov.words.size()), c.conditional.cols());
        for (std::size_t w = 0; w < prov.words.size(); ++w) rows.row(static_cast<Eigen::Index>(w)) = c.conditional.row(prov.words[w]);
        CHECK((harmonic_mean_rows(rows).transpose() - a.vectors.row(static_cast<Eigen::Index>(i))).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(a.vectors.row(static_cast<Eigen::Index>(i)).maxCoeff() > 0.0);
    }
    CHECK(passages.size() == 40);
}

TEST_CASE("tandem rejects short passages and fails when too few qualify") {
    const auto corpus = testing::corpus_from_tokens({{0, 1}, {2}, {1, 2, 2}, {0}});
    const auto c = build_cooccurrence(build_doc_term(corpus, testing::plain_vocabulary(corpus, 3)));
    const auto a = tandem_anchors(c, corpus, 2, 1);
    std::set<DocIndex> used;
    for (const auto& prov : a.provenance) used.insert(*prov.passage);
    CHECK(used == std::set<DocIndex>{0, 2});
    CHECK_THROWS_AS(tandem_anchors(c, corpus, 3, 1), Error);
    CHECK(tandem_anchors(c, corpus, 4, 1, 1).size() == 4);
}

TEST_CASE("uniform_below stays in range and covers it") {
    std::mt19937_64 rng(1);
    std::vector<int> seen(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const auto v = uniform_below(rng, 7);
        REQUIRE(v < 7);
        ++seen[v];
    }
    for (const int s : seen) CHECK(s > 800);
    CHECK(uniform_below(rng, 1) == 0);
}
