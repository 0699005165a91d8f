#pragma once

#include "xref/anchors.hpp"
#include "xref/cooccurrence.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace xref {

struct SolverConfig {
    double step_size = 50.0;
    double tolerance = 1e-7;
    int max_iters = 500;
};

/// Result of minimizing ||q - x S||^2 over the probability simplex.
struct SimplexSolution {
    Eigen::VectorXd x;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Called after every accepted update with (column, iteration, objective, x).
using IterateObserver = std::function<void(Eigen::Index, int, double, const Eigen::VectorXd&)>;

/// Exponentiated-gradient solver for a batch of simplex-constrained least
/// squares problems sharing one anchor matrix S. The problems are given in
/// Gram form: `gram` = S S^T (K x K), column j of `linear` = S q_j and
/// `constant(j)` = q_j . q_j. Each step multiplies x by exp(-eta * grad) and
/// renormalizes, halving eta until the objective does not increase. Stops
/// when the Frank-Wolfe gap grad.x - min(grad) drops below the tolerance.
std::vector<SimplexSolution> solve_simplex_batch(const Eigen::MatrixXd& gram,
                                                 const Eigen::MatrixXd& linear,
                                                 const Eigen::VectorXd& constant,
                                                 const SolverConfig& config,
                                                 const IterateObserver* observer = nullptr);

struct TopicModel {
    RowMatrix topic_word;        // A, V x K, columns are p(word | topic)
    Eigen::VectorXd topic_weights;  // p(topic)
    RowMatrix coefficients;      // C, V x K, rows are p(topic | word)
    AnchorSet anchors;
    std::vector<double> residuals;   // ||Qbar_i - C_i S|| at the solution
    std::vector<std::int32_t> iterations;
    std::vector<char> converged;
    std::vector<WordIndex> flagged;  // excluded words given uniform C

    std::size_t vocab_size() const noexcept { return static_cast<std::size_t>(topic_word.rows()); }
    std::size_t topics() const noexcept { return static_cast<std::size_t>(topic_word.cols()); }
};

TopicModel recover_topics(const CooccurrenceMatrix& cooc, AnchorSet anchors,
                          const SolverConfig& config = {});

/// ||Qbar_i - C_i S||_2 for every word, computed directly.
Eigen::VectorXd per_word_residual(const TopicModel& model, const RowMatrix& conditional);

/// Indices of the `n` highest-probability words of topic k (ties by index).
std::vector<WordIndex> top_words(const TopicModel& model, std::size_t k, std::size_t n);

}  // namespace xref
