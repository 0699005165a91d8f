#include "xref/candidates.hpp"

#include <algorithm>

namespace xref {

namespace {

struct InvertedIndex {
    std::vector<std::uint64_t> offsets;
    std::vector<DocIndex> docs;
};

InvertedIndex invert(const DocTermCounts& counts) {
    InvertedIndex index;
    index.offsets.assign(counts.vocab_size + 1, 0);
    for (WordIndex w : counts.cols) ++index.offsets[w + 1];
    for (std::size_t w = 0; w < counts.vocab_size; ++w) index.offsets[w + 1] += index.offsets[w];
    index.docs.resize(counts.cols.size());
    std::vector<std::uint64_t> fill(index.offsets.begin(), index.offsets.end() - 1);
    for (std::size_t d = 0; d < counts.docs(); ++d) {
        for (WordIndex w : counts.row_cols(static_cast<DocIndex>(d))) {
            index.docs[fill[w]++] = static_cast<DocIndex>(d);
        }
    }
    return index;
}

// Calls `partners(d, out)` to collect targets for each source passage d;
// `out` is sorted and deduplicated before it is handed to the visitor.
template <typename Collect>
void visit_each(std::size_t docs, const PartnerVisitor& visit, Collect&& partners) {
    std::vector<DocIndex> out;
    for (std::size_t d = 0; d < docs; ++d) {
        out.clear();
        partners(static_cast<DocIndex>(d), out);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        visit(static_cast<DocIndex>(d), out);
    }
}

CandidateSet materialize(Method method, std::size_t docs,
                         const std::function<void(const PartnerVisitor&)>& run) {
    CandidateSet set;
    set.method = method;
    set.docs = docs;
    set.generation = "unranked set";
    std::uint64_t rank = 0;
    run([&](DocIndex from, std::span<const DocIndex> to) {
        for (DocIndex t : to) set.pairs.push_back(CandidatePair{from, t, 0.0, ++rank});
    });
    return set;
}

}  // namespace

void visit_word_match(const DocTermCounts& counts, const PartnerVisitor& visit) {
    const auto index = invert(counts);
    std::vector<DocIndex> stamp(counts.docs(), static_cast<DocIndex>(-1));
    visit_each(counts.docs(), visit, [&](DocIndex d, std::vector<DocIndex>& out) {
        for (WordIndex w : counts.row_cols(d)) {
            for (auto p = index.offsets[w]; p < index.offsets[w + 1]; ++p) {
                const DocIndex other = index.docs[p];
                if (other == d || stamp[other] == d) continue;
                stamp[other] = d;
                out.push_back(other);
            }
        }
    });
}

void visit_topic_match(std::span<const std::uint32_t> assignment, const PartnerVisitor& visit) {
    std::uint32_t topics = 0;
    for (auto a : assignment) topics = std::max(topics, a + 1);
    std::vector<std::vector<DocIndex>> members(topics);
    for (std::size_t d = 0; d < assignment.size(); ++d) members[assignment[d]].push_back(static_cast<DocIndex>(d));
    visit_each(assignment.size(), visit, [&](DocIndex d, std::vector<DocIndex>& out) {
        for (DocIndex other : members[assignment[d]]) {
            if (other != d) out.push_back(other);
        }
    });
}

void visit_topic_word_match(std::span<const std::uint32_t> assignment, const DocTermCounts& counts,
                            const PartnerVisitor& visit) {
    if (assignment.size() != counts.docs()) throw Error("topic assignment and counts cover different corpora");
    const auto index = invert(counts);
    std::vector<DocIndex> stamp(counts.docs(), static_cast<DocIndex>(-1));
    visit_each(counts.docs(), visit, [&](DocIndex d, std::vector<DocIndex>& out) {
        for (WordIndex w : counts.row_cols(d)) {
            for (auto p = index.offsets[w]; p < index.offsets[w + 1]; ++p) {
                const DocIndex other = index.docs[p];
                if (other == d || stamp[other] == d || assignment[other] != assignment[d]) continue;
                stamp[other] = d;
                out.push_back(other);
            }
        }
    });
}

CandidateSet word_match_pairs(const DocTermCounts& counts) {
    return materialize(Method::word_match, counts.docs(),
                       [&](const PartnerVisitor& v) { visit_word_match(counts, v); });
}

CandidateSet topic_match_pairs(std::span<const std::uint32_t> assignment) {
    return materialize(Method::topic_match, assignment.size(),
                       [&](const PartnerVisitor& v) { visit_topic_match(assignment, v); });
}

CandidateSet topic_word_match_pairs(std::span<const std::uint32_t> assignment, const DocTermCounts& counts) {
    return materialize(Method::topic_word_match, counts.docs(),
                       [&](const PartnerVisitor& v) { visit_topic_word_match(assignment, counts, v); });
}

}  // namespace xref
