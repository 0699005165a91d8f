#pragma once

#include "xref/corpus.hpp"
#include "xref/inference.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xref {

enum class Metric { cosine, euclidean, cityblock, chebyshev };

enum class Method { cosine, euclidean, cityblock, chebyshev, word_match, topic_match, topic_word_match };

std::string to_string(Metric metric);
std::string to_string(Method method);
Metric parse_metric(const std::string& name);
Method parse_method(const std::string& name);
Method method_for(Metric metric);
bool is_metric_method(Method method);

/// A directed pair of passages. Lower scores mean more related; baselines
/// carry a score of 0.
struct CandidatePair {
    DocIndex from = 0;
    DocIndex to = 0;
    double score = 0.0;
    std::uint64_t rank = 0;  // 1-based

    friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
};

struct CandidateSet {
    Method method = Method::cosine;
    std::vector<CandidatePair> pairs;
    std::size_t docs = 0;
    std::string generation;       // human-readable selection summary
    std::vector<std::string> warnings;

    std::uint64_t universe() const noexcept {
        return static_cast<std::uint64_t>(docs) * (docs == 0 ? 0 : docs - 1);
    }
};

/// Distance between two equal-length dense vectors. Cosine distance is
/// 1 - <a,b>/(|a||b|) clamped to [0, 2], or 1 when either norm is zero.
double pair_distance(std::span<const double> a, std::span<const double> b, Metric metric);

/// Same as pair_distance for sparse vectors; bit-identical to the dense form.
double sparse_distance(const SparseTheta& a, const SparseTheta& b, Metric metric);

struct Selection {
    std::optional<std::uint64_t> top_n;
    std::optional<double> threshold;
};

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{256} << 20;

/// Scores every unordered pair once and emits both directions. Returns the
/// top_n lowest-distance ordered pairs, or all pairs with score <= threshold,
/// ordered by (score, from, to) in corpus order. Rows are processed in blocks
/// whose score buffers fit in `memory_budget` bytes.
CandidateSet generate_candidates(std::span<const SparseTheta> thetas, Metric metric,
                                 const Selection& selection,
                                 std::size_t memory_budget = kDefaultMemoryBudget);

/// Receives, for each source passage in corpus order, the ascending list of
/// targets it is linked to.
using PartnerVisitor = std::function<void(DocIndex from, std::span<const DocIndex> to)>;

/// Passages sharing at least one vocabulary term, via an inverted index.
void visit_word_match(const DocTermCounts& counts, const PartnerVisitor& visit);
/// Passages whose most probable topic (lowest index on ties) is the same.
void visit_topic_match(std::span<const std::uint32_t> assignment, const PartnerVisitor& visit);
/// Pairs that share both a most probable topic and a term.
void visit_topic_word_match(std::span<const std::uint32_t> assignment, const DocTermCounts& counts,
                            const PartnerVisitor& visit);

CandidateSet word_match_pairs(const DocTermCounts& counts);
CandidateSet topic_match_pairs(std::span<const std::uint32_t> assignment);
CandidateSet topic_word_match_pairs(std::span<const std::uint32_t> assignment, const DocTermCounts& counts);

/// Argmax topic per row, ties to the lower index.
std::vector<std::uint32_t> topic_assignment(const RowMatrix& theta);
std::vector<std::uint32_t> topic_assignment(std::span<const SparseTheta> thetas);

struct DuplicateFlag {
    std::size_t index = 0;  // position in the candidate list
    double jaccard = 0.0;
    bool flagged = false;
};

/// Token-set Jaccard similarity of each candidate pair; pairs at or above the
/// threshold are flagged as likely duplicate passages.
std::vector<DuplicateFlag> duplicate_pair_report(const CandidateSet& set, const Corpus& corpus,
                                                 double jaccard_threshold);

double token_jaccard(const Passage& a, const Passage& b);

/// Candidate CSV: `rank,from,to,score,method` with a header row.
void write_candidates_csv(std::ostream& out, const CandidateSet& set, const Corpus& corpus);
CandidateSet read_candidates_csv(std::istream& in, const Corpus& corpus);

}  // namespace xref
