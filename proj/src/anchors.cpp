#include "xref/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace xref {

std::string to_string(AnchorMethod method) {
    return method == AnchorMethod::gram_schmidt ? "gram-schmidt" : "tandem";
}

AnchorSet gram_schmidt_anchors(const CooccurrenceMatrix& cooc, std::size_t k,
                               std::uint32_t candidate_min_df,
                               std::span<const std::uint32_t> doc_freqs) {
    const auto V = static_cast<Eigen::Index>(cooc.vocab_size());
    if (doc_freqs.size() != static_cast<std::size_t>(V)) {
        throw Error("document frequencies do not match the co-occurrence vocabulary");
    }
    if (k == 0) throw Error("number of anchors must be positive");

    std::vector<WordIndex> candidates;
    for (Eigen::Index w = 0; w < V; ++w) {
        const auto word = static_cast<WordIndex>(w);
        if (doc_freqs[word] >= candidate_min_df && !cooc.is_excluded(word)) candidates.push_back(word);
    }
    if (candidates.size() < k) {
        throw Error("only " + std::to_string(candidates.size()) + " anchor candidates with document frequency >= " +
                    std::to_string(candidate_min_df) + ", need " + std::to_string(k) + " (short by " +
                    std::to_string(k - candidates.size()) + ")");
    }

    const auto C = static_cast<Eigen::Index>(candidates.size());
    RowMatrix residual(C, V);
    for (Eigen::Index c = 0; c < C; ++c) residual.row(c) = cooc.conditional.row(candidates[c]);
    Eigen::VectorXd norms2 = residual.rowwise().squaredNorm();
    std::vector<char> chosen(static_cast<std::size_t>(C), 0);
    RowMatrix basis(static_cast<Eigen::Index>(k), V);
    Eigen::Index basis_size = 0;

    AnchorSet out;
    out.method = AnchorMethod::gram_schmidt;
    out.candidate_min_df = candidate_min_df;
    out.vectors.resize(static_cast<Eigen::Index>(k), V);

    for (std::size_t step = 0; step < k; ++step) {
        Eigen::Index pick = -1;
        for (Eigen::Index c = 0; c < C; ++c) {
            if (chosen[c]) continue;
            if (pick < 0 || norms2(c) > norms2(pick)) pick = c;
        }
        chosen[pick] = 1;
        const double norm = std::sqrt(std::max(norms2(pick), 0.0));
        out.residual_norms.push_back(norm);
        out.vectors.row(static_cast<Eigen::Index>(step)) = cooc.conditional.row(candidates[pick]);
        out.provenance.push_back(AnchorProvenance{candidates[pick], std::nullopt, {candidates[pick]}});
        if (norm <= 0.0 || step + 1 == k) continue;

        // New direction, re-orthogonalized against the accepted basis to
        // undo the drift accumulated by repeated projections.
        Eigen::VectorXd direction = residual.row(pick).transpose() / norm;
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index j = 0; j < basis_size; ++j) {
                direction -= basis.row(j).dot(direction) * basis.row(j).transpose();
            }
        }
        const double dnorm = direction.norm();
        if (dnorm <= 0.0) continue;
        direction /= dnorm;
        basis.row(basis_size++) = direction.transpose();

        parallel_for(static_cast<std::size_t>(C), [&](std::size_t begin, std::size_t end, std::size_t) {
            for (auto c = static_cast<Eigen::Index>(begin); c < static_cast<Eigen::Index>(end); ++c) {
                if (chosen[c]) continue;
                auto row = residual.row(c);
                const double coef = row.dot(direction.transpose());
                row -= coef * direction.transpose();
                norms2(c) = row.squaredNorm();
            }
        });
    }
    return out;
}

Eigen::VectorXd harmonic_mean_rows(const RowMatrix& rows, double epsilon) {
    if (rows.rows() == 0) throw Error("harmonic mean of zero rows");
    Eigen::VectorXd inv_sum = Eigen::VectorXd::Zero(rows.cols());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        for (Eigen::Index j = 0; j < rows.cols(); ++j) {
            inv_sum(j) += 1.0 / std::max(rows(i, j), epsilon);
        }
    }
    return static_cast<double>(rows.rows()) * inv_sum.cwiseInverse();
}

AnchorSet tandem_anchors(const CooccurrenceMatrix& cooc, const Corpus& corpus, std::size_t k,
                         std::uint64_t seed, std::size_t min_tokens) {
    if (k == 0) throw Error("number of anchors must be positive");
    const auto V = static_cast<Eigen::Index>(cooc.vocab_size());

    auto usable_terms = [&](DocIndex d) {
        std::vector<WordIndex> terms;
        for (WordIndex w : corpus[d].tokens) {
            if (static_cast<Eigen::Index>(w) < V && !cooc.is_excluded(w)) terms.push_back(w);
        }
        std::sort(terms.begin(), terms.end());
        terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
        return terms;
    };

    // Lazy Fisher-Yates: visiting a random permutation and skipping
    // ineligible passages samples eligible passages without replacement.
    std::mt19937_64 rng(seed);
    std::vector<DocIndex> order(corpus.size());
    std::iota(order.begin(), order.end(), DocIndex{0});
    std::vector<DocIndex> picked;
    std::vector<std::vector<WordIndex>> picked_terms;
    for (std::size_t i = 0; i < order.size() && picked.size() < k; ++i) {
        const auto j = i + uniform_below(rng, order.size() - i);
        std::swap(order[i], order[j]);
        auto terms = usable_terms(order[i]);
        if (terms.size() < min_tokens) continue;
        picked.push_back(order[i]);
        picked_terms.push_back(std::move(terms));
    }
    if (picked.size() < k) {
        throw Error("only " + std::to_string(picked.size()) + " passages have at least " +
                    std::to_string(min_tokens) + " usable terms; cannot form " + std::to_string(k) +
                    " tandem anchors");
    }

    AnchorSet out;
    out.method = AnchorMethod::tandem;
    out.vectors.resize(static_cast<Eigen::Index>(k), V);
    out.provenance.resize(k);
    parallel_for(k, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t a = begin; a < end; ++a) {
            const auto& terms = picked_terms[a];
            RowMatrix rows(static_cast<Eigen::Index>(terms.size()), V);
            for (std::size_t t = 0; t < terms.size(); ++t) {
                rows.row(static_cast<Eigen::Index>(t)) = cooc.conditional.row(terms[t]);
            }
            out.vectors.row(static_cast<Eigen::Index>(a)) = harmonic_mean_rows(rows).transpose();
            out.provenance[a] = AnchorProvenance{std::nullopt, picked[a], terms};
        }
    });
    return out;
}

}  // namespace xref
