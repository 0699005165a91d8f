#pragma once

#include "xref/cooccurrence.hpp"
#include "xref/corpus.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xref {

enum class AnchorMethod { gram_schmidt, tandem };

std::string to_string(AnchorMethod method);

/// Where an anchor came from: a single word, or the distinct terms of one
/// sampled passage.
struct AnchorProvenance {
    std::optional<WordIndex> word;
    std::optional<DocIndex> passage;
    std::vector<WordIndex> words;
};

struct AnchorSet {
    AnchorMethod method = AnchorMethod::gram_schmidt;
    RowMatrix vectors;  // K x V, rows in Qbar row space
    std::vector<AnchorProvenance> provenance;
    std::uint32_t candidate_min_df = 0;
    std::vector<double> residual_norms;  // Gram-Schmidt selection sequence

    std::size_t size() const noexcept { return static_cast<std::size_t>(vectors.rows()); }
};

inline constexpr std::uint32_t kDefaultCandidateMinDf = 10;
inline constexpr std::size_t kDefaultTandemMinTokens = 2;
inline constexpr double kHarmonicEpsilon = 1e-10;

/// Greedy pivoted Gram-Schmidt over the Qbar rows of candidate words (doc
/// frequency >= candidate_min_df, not excluded): repeatedly takes the row with
/// the largest residual norm, then removes its direction from every remaining
/// residual. Ties go to the lower word index.
AnchorSet gram_schmidt_anchors(const CooccurrenceMatrix& cooc, std::size_t k,
                               std::uint32_t candidate_min_df,
                               std::span<const std::uint32_t> doc_freqs);

/// Element-wise harmonic mean of the given rows, each component floored at
/// epsilon: m / sum_i 1 / max(x_ij, epsilon).
Eigen::VectorXd harmonic_mean_rows(const RowMatrix& rows, double epsilon = kHarmonicEpsilon);

/// Forms K anchors from K distinct passages sampled uniformly without
/// replacement. Each anchor is the harmonic mean of the Qbar rows of the
/// passage's distinct in-vocabulary terms; passages with fewer than
/// `min_tokens` usable terms are skipped and another one is drawn.
AnchorSet tandem_anchors(const CooccurrenceMatrix& cooc, const Corpus& corpus, std::size_t k,
                         std::uint64_t seed, std::size_t min_tokens = kDefaultTandemMinTokens);

/// Deterministic uniform integer in [0, bound) from a 64-bit stream; unlike
/// std::uniform_int_distribution its output is the same on every platform.
template <typename Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - bound + 1) % bound;
    while (true) {
        const std::uint64_t x = rng();
        if (x >= limit) return x % bound;
    }
}

}  // namespace xref
