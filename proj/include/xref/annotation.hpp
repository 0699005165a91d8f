#pragma once

#include "xref/candidates.hpp"
#include "xref/corpus.hpp"

#include <cstdint>
#include <map>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace xref {

struct Vote {
    std::string annotator;
    int value = 0;  // +1 helpful, -1 not helpful
    std::string timestamp;
};

struct AnnotationRecord {
    CandidatePair candidate;
    std::vector<Vote> votes;  // one per annotator, latest wins
    int net = 0;
};

struct BatchItem {
    std::size_t index = 0;
    CandidatePair candidate;
    bool duplicate = false;
    double jaccard = 0.0;
};

struct Batch {
    std::vector<BatchItem> items;
    std::size_t cursor = 0;  // resume position; equals the candidate count when done
    bool done = false;
};

struct Progress {
    std::size_t candidates = 0;
    std::size_t voted_candidates = 0;
    std::size_t votes = 0;
    std::size_t annotators = 0;
};

inline constexpr double kDefaultDuplicateJaccard = 0.8;

/// Votes on a ranked candidate list. The JSON-lines vote log is the only
/// durable state: every accepted vote is appended and flushed to disk before
/// the caller sees the new tally, and the in-memory index is rebuilt by
/// replaying the log on construction.
class AnnotationStore {
public:
    AnnotationStore(CandidateSet candidates, const Corpus& corpus, std::string log_path,
                    double duplicate_jaccard = kDefaultDuplicateJaccard);
    ~AnnotationStore();

    AnnotationStore(const AnnotationStore&) = delete;
    AnnotationStore& operator=(const AnnotationStore&) = delete;

    /// Up to `limit` candidates at or after `cursor`, in rank order, that the
    /// annotator has not voted on.
    Batch next_batch(std::size_t cursor, std::size_t limit, const std::string& annotator) const;

    /// Records a vote and returns the candidate's new net tally. Repeating the
    /// same vote is a no-op; a changed vote replaces the earlier one.
    int record_vote(const PassageId& from, const PassageId& to, const std::string& annotator, int vote);

    /// Candidates with at least one vote and net >= min_net, in rank order.
    std::vector<std::pair<DocIndex, DocIndex>> export_curated(int min_net) const;

    AnnotationRecord record(std::size_t index) const;
    Progress progress() const;
    std::size_t size() const noexcept { return candidates_.pairs.size(); }
    const Corpus& corpus() const noexcept { return corpus_; }
    const CandidateSet& candidates() const noexcept { return candidates_; }
    std::size_t replayed_votes() const noexcept { return replayed_; }

private:
    std::size_t find(DocIndex from, DocIndex to) const;
    int apply(std::size_t index, const std::string& annotator, int vote, const std::string& ts);
    void replay();
    void append(const std::string& line);

    CandidateSet candidates_;
    const Corpus& corpus_;
    std::string log_path_;
    int fd_ = -1;
    std::vector<DuplicateFlag> duplicates_;
    std::unordered_map<std::uint64_t, std::size_t> by_pair_;
    std::vector<std::map<std::string, std::pair<int, std::string>>> votes_;  // annotator -> (vote, ts)
    std::vector<int> net_;
    std::unordered_map<std::string, std::unordered_set<std::size_t>> voted_by_;
    std::size_t replayed_ = 0;
    mutable std::shared_mutex mutex_;
};

}  // namespace xref
