#pragma once

#include "xref/corpus.hpp"
#include "xref/topics.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace xref {

struct InferenceConfig {
    double alpha = 0.01;  // symmetric Dirichlet concentration
    int max_iters = 100;
    double tol = 1e-5;    // on mean |delta gamma| per topic

    void validate() const;
};

struct DocTopicVector {
    Eigen::VectorXd theta;
    bool degenerate = false;  // empty document, theta is uniform
    bool converged = false;
    int iterations = 0;
    double final_change = 0.0;
};

/// Topic proportions of one document (given as its count row) under a fixed
/// topic-word matrix, by mean-field coordinate ascent:
///   phi_ik  ∝ A_ik exp(digamma(gamma_k))
///   gamma_k = alpha + sum_i w_i phi_ik
/// theta is the normalized gamma - alpha. `label` names the passage in errors.
DocTopicVector infer_doc_topics(std::span<const WordIndex> cols, std::span<const std::uint32_t> vals,
                                const TopicModel& model, const InferenceConfig& config,
                                const std::string& label = {});

/// Per-passage results for a whole corpus.
struct ThetaMatrix {
    RowMatrix theta;  // D x K
    std::vector<char> degenerate;
    std::vector<std::int32_t> iterations;
    std::vector<char> converged;
};

ThetaMatrix infer_corpus(const DocTermCounts& counts, const TopicModel& model,
                         const InferenceConfig& config, const Corpus* corpus = nullptr);

/// Top-S components of a topic vector, renormalized.
struct SparseTheta {
    std::vector<std::pair<std::uint32_t, double>> entries;  // ascending topic
};

inline constexpr std::size_t kDefaultSparsity = 50;

/// Keeps the S largest components (ties to the lower topic index) and
/// renormalizes them to sum to one; entries come back in topic order.
SparseTheta sparsify(const Eigen::Ref<const Eigen::VectorXd>& theta, std::size_t support);

/// Dense vector as a SparseTheta holding every nonzero component.
SparseTheta to_sparse(const Eigen::Ref<const Eigen::VectorXd>& theta);

}  // namespace xref
