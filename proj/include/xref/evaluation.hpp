#pragma once

#include "xref/candidates.hpp"
#include "xref/corpus.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace xref {

enum class GroundTruthFormat { pairs_tsv, openbible_votes };

GroundTruthFormat parse_ground_truth_format(const std::string& name);

/// Reference cross-references as directed passage pairs.
class GroundTruth {
public:
    GroundTruth() = default;
    GroundTruth(std::vector<std::pair<DocIndex, DocIndex>> pairs, std::vector<int> votes);

    std::size_t size() const noexcept { return pairs_.size(); }
    const std::vector<std::pair<DocIndex, DocIndex>>& pairs() const noexcept { return pairs_; }
    /// Net vote per pair, parallel to pairs(); empty for vote-less formats.
    const std::vector<int>& votes() const noexcept { return votes_; }
    bool contains(DocIndex from, DocIndex to) const {
        return members_.contains(key(from, to));
    }

    std::string source;
    std::optional<int> min_votes;
    std::size_t lines = 0;
    std::size_t unresolved = 0;
    std::size_t collapsed_ranges = 0;
    std::size_t self_pairs = 0;
    std::size_t below_min_votes = 0;

private:
    static std::uint64_t key(DocIndex a, DocIndex b) {
        return (static_cast<std::uint64_t>(a) << 32) | b;
    }

    std::vector<std::pair<DocIndex, DocIndex>> pairs_;  // sorted, unique
    std::vector<int> votes_;
    std::unordered_set<std::uint64_t> members_;
};

inline constexpr double kMaxUnresolvedFraction = 0.10;

/// Reads `from\tto` (pairs-tsv) or `from\tto\tvotes` (openbible-votes)
/// lines. Range endpoints collapse to their first verse; duplicate pairs keep
/// their largest vote; pairs below `min_votes` are dropped. Header and `#`
/// comment lines are skipped.
GroundTruth load_ground_truth(std::istream& in, GroundTruthFormat format, const Corpus& corpus,
                              std::optional<int> min_votes = std::nullopt, std::string source = {});

/// pairs-tsv output, readable by load_ground_truth.
void write_pairs_tsv(std::ostream& out, const std::vector<std::pair<DocIndex, DocIndex>>& pairs,
                     const Corpus& corpus);

struct CurvePoint {
    std::uint64_t k = 0;
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double fpr = 0.0;
};

struct EvalCurve {
    std::vector<CurvePoint> points;
    std::uint64_t universe = 0;   // D(D-1) ordered pairs
    std::uint64_t positives = 0;  // |ground truth|
    bool downsampled = false;
};

CurvePoint make_point(std::uint64_t k, std::uint64_t tp, std::uint64_t universe, std::uint64_t positives);

/// One point per rank, accumulating true and false positives down the list.
EvalCurve curve(const CandidateSet& ranked, const GroundTruth& gt);

/// The single endpoint of an unranked pair set, streamed through a visitor
/// so very large sets are never materialized.
EvalCurve set_endpoint(const std::function<void(const PartnerVisitor&)>& run, std::size_t docs,
                       const GroundTruth& gt);

/// Every `stride`-th point plus the first and last.
EvalCurve downsample(const EvalCurve& c, std::uint64_t stride);

enum class AucKind { roc, prc };

/// Trapezoidal area. ROC runs over (fpr, recall) from (0,0) and is closed at
/// (1,1); PRC runs over (recall, precision) starting at recall 0 with the
/// first point's precision.
double auc(const EvalCurve& c, AucKind kind);

struct CostEstimate {
    std::uint64_t k_needed = 0;
    double dollars = 0.0;
};

/// Smallest k with TP(k) >= target_tp, and its annotation cost.
CostEstimate cost_estimate(const EvalCurve& c, std::uint64_t target_tp, double price_per_annotation);

/// |fpr * (D(D-1) - P) - reported_fp| / reported_fp.
double consistency_check(std::uint64_t positives, std::uint64_t docs, double fpr, double reported_fp);

void write_curve_csv(std::ostream& out, const EvalCurve& c);

}  // namespace xref
