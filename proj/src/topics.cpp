#include "xref/topics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xref {

namespace {

constexpr int kMaxHalvings = 60;
// After an accepted step the next trial step grows, up to this multiple of
// the configured step size.
constexpr double kStepGrowth = 2.0;
constexpr double kMaxStepMultiple = 1024.0;
constexpr double kArmijo = 1e-4;
constexpr Eigen::Index kBatchColumns = 128;

double quadratic_objective(double constant, const Eigen::Ref<const Eigen::VectorXd>& linear,
                           const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& gram_x) {
    return constant - 2.0 * linear.dot(x) + x.dot(gram_x);
}

}  // namespace

std::vector<SimplexSolution> solve_simplex_batch(const Eigen::MatrixXd& gram,
                                                 const Eigen::MatrixXd& linear,
                                                 const Eigen::VectorXd& constant,
                                                 const SolverConfig& config,
                                                 const IterateObserver* observer) {
    const Eigen::Index K = gram.rows();
    const Eigen::Index n = linear.cols();
    if (gram.cols() != K || linear.rows() != K || constant.size() != n) {
        throw Error("solve_simplex_batch: inconsistent shapes");
    }
    std::vector<SimplexSolution> out(static_cast<std::size_t>(n));
    if (n == 0) return out;

    Eigen::MatrixXd X = Eigen::MatrixXd::Constant(K, n, 1.0 / static_cast<double>(K));
    Eigen::MatrixXd GX = gram * X;
    Eigen::VectorXd objective(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        objective(j) = quadratic_objective(constant(j), linear.col(j), X.col(j), GX.col(j));
    }

    std::vector<Eigen::Index> active(static_cast<std::size_t>(n));
    std::iota(active.begin(), active.end(), Eigen::Index{0});
    std::vector<double> step(static_cast<std::size_t>(n), config.step_size);
    const double max_step = config.step_size * kMaxStepMultiple;
    std::vector<Eigen::Index> stepping;
    Eigen::MatrixXd grads;
    Eigen::MatrixXd trial;
    Eigen::MatrixXd gram_trial;

    while (!active.empty()) {
        stepping.clear();
        for (const auto j : active) {
            auto& sol = out[static_cast<std::size_t>(j)];
            const Eigen::VectorXd g = 2.0 * (GX.col(j) - linear.col(j));
            const double gap = g.dot(X.col(j)) - g.minCoeff();
            if (!std::isfinite(gap)) throw Error("non-finite gradient in column " + std::to_string(j));
            if (gap < config.tolerance) {
                sol.converged = true;
                continue;
            }
            if (sol.iterations >= config.max_iters) continue;
            stepping.push_back(j);
        }
        if (stepping.empty()) break;

        const auto m = static_cast<Eigen::Index>(stepping.size());
        grads.resize(K, m);
        for (Eigen::Index t = 0; t < m; ++t) {
            const auto j = stepping[static_cast<std::size_t>(t)];
            grads.col(t) = 2.0 * (GX.col(j) - linear.col(j));
            grads.col(t).array() -= grads.col(t).minCoeff();
        }
        std::vector<double> eta(static_cast<std::size_t>(m));
        for (Eigen::Index t = 0; t < m; ++t) eta[static_cast<std::size_t>(t)] = step[static_cast<std::size_t>(stepping[static_cast<std::size_t>(t)])];
        std::vector<Eigen::Index> pending(static_cast<std::size_t>(m));
        std::iota(pending.begin(), pending.end(), Eigen::Index{0});
        std::vector<Eigen::Index> accepted;

        for (int halving = 0; halving <= kMaxHalvings && !pending.empty(); ++halving) {
            const auto p = static_cast<Eigen::Index>(pending.size());
            trial.resize(K, p);
            for (Eigen::Index s = 0; s < p; ++s) {
                const auto t = pending[static_cast<std::size_t>(s)];
                const auto j = stepping[static_cast<std::size_t>(t)];
                trial.col(s) = X.col(j).array() * (-eta[static_cast<std::size_t>(t)] * grads.col(t).array()).exp();
                trial.col(s) /= trial.col(s).sum();
            }
            gram_trial.noalias() = gram * trial;
            std::vector<Eigen::Index> still;
            for (Eigen::Index s = 0; s < p; ++s) {
                const auto t = pending[static_cast<std::size_t>(s)];
                const auto j = stepping[static_cast<std::size_t>(t)];
                const double value = quadratic_objective(constant(j), linear.col(j), trial.col(s), gram_trial.col(s));
                if (!std::isfinite(value)) throw Error("non-finite objective in column " + std::to_string(j));
                // Armijo condition; the plain "no increase" test lets large
                // steps bounce across the minimum indefinitely.
                const double predicted = grads.col(t).dot(trial.col(s) - X.col(j));
                if (value <= objective(j) + kArmijo * predicted) {
                    X.col(j) = trial.col(s);
                    GX.col(j) = gram_trial.col(s);
                    objective(j) = value;
                    step[static_cast<std::size_t>(j)] = std::min(eta[static_cast<std::size_t>(t)] * kStepGrowth, max_step);
                    auto& sol = out[static_cast<std::size_t>(j)];
                    ++sol.iterations;
                    if (observer != nullptr) (*observer)(j, sol.iterations, value, X.col(j));
                    accepted.push_back(j);
                } else {
                    eta[static_cast<std::size_t>(t)] *= 0.5;
                    still.push_back(t);
                }
            }
            pending.swap(still);
        }
        // Columns that found no descent step are at the numerical floor.
        active = std::move(accepted);
    }

    for (Eigen::Index j = 0; j < n; ++j) {
        auto& sol = out[static_cast<std::size_t>(j)];
        sol.x = X.col(j);
        sol.objective = objective(j);
    }
    return out;
}

TopicModel recover_topics(const CooccurrenceMatrix& cooc, AnchorSet anchors, const SolverConfig& config) {
    const auto V = static_cast<Eigen::Index>(cooc.vocab_size());
    const auto K = static_cast<Eigen::Index>(anchors.size());
    if (K == 0) throw Error("anchor set is empty");
    if (anchors.vectors.cols() != V) throw Error("anchor vectors do not match the vocabulary size");
    for (Eigen::Index k = 0; k < K; ++k) {
        if (!(anchors.vectors.row(k).array() > 0.0).any()) {
            throw Error("anchor " + std::to_string(k) + " is an all-zero vector");
        }
    }

    const Eigen::MatrixXd S = anchors.vectors;
    const Eigen::MatrixXd gram = S * S.transpose();

    std::vector<WordIndex> solve_words;
    for (Eigen::Index w = 0; w < V; ++w) {
        if (!cooc.is_excluded(static_cast<WordIndex>(w))) solve_words.push_back(static_cast<WordIndex>(w));
    }

    TopicModel model;
    model.coefficients = RowMatrix::Constant(V, K, 1.0 / static_cast<double>(K));
    model.residuals.assign(static_cast<std::size_t>(V), 0.0);
    model.iterations.assign(static_cast<std::size_t>(V), 0);
    model.converged.assign(static_cast<std::size_t>(V), 0);
    model.flagged = cooc.excluded;

    const auto total = static_cast<Eigen::Index>(solve_words.size());
    const std::size_t batches = static_cast<std::size_t>((total + kBatchColumns - 1) / kBatchColumns);
    parallel_for(batches, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t b = begin; b < end; ++b) {
            const Eigen::Index first = static_cast<Eigen::Index>(b) * kBatchColumns;
            const Eigen::Index count = std::min(kBatchColumns, total - first);
            Eigen::MatrixXd targets(V, count);
            Eigen::VectorXd constant(count);
            for (Eigen::Index c = 0; c < count; ++c) {
                const auto w = solve_words[static_cast<std::size_t>(first + c)];
                targets.col(c) = cooc.conditional.row(w).transpose();
                constant(c) = targets.col(c).squaredNorm();
            }
            const Eigen::MatrixXd linear = S * targets;
            auto solutions = solve_simplex_batch(gram, linear, constant, config);
            for (Eigen::Index c = 0; c < count; ++c) {
                const auto w = solve_words[static_cast<std::size_t>(first + c)];
                auto& sol = solutions[static_cast<std::size_t>(c)];
                if (!sol.x.allFinite()) throw Error("non-finite solution for word " + std::to_string(w));
                model.coefficients.row(w) = sol.x.transpose();
                model.residuals[w] = std::sqrt(std::max(sol.objective, 0.0));
                model.iterations[w] = sol.iterations;
                model.converged[w] = sol.converged ? 1 : 0;
            }
        }
    });

    // Bayes rule: p(word | topic) is proportional to p(topic | word) p(word).
    model.topic_word = model.coefficients;
    for (Eigen::Index w = 0; w < V; ++w) model.topic_word.row(w) *= cooc.marginal(w);
    Eigen::VectorXd mass = model.topic_word.colwise().sum().transpose();
    for (Eigen::Index k = 0; k < K; ++k) {
        if (mass(k) > 0.0) {
            model.topic_word.col(k) /= mass(k);
        } else {
            model.topic_word.col(k).setConstant(1.0 / static_cast<double>(V));
        }
    }
    const double total_mass = mass.sum();
    model.topic_weights = total_mass > 0.0 ? Eigen::VectorXd(mass / total_mass)
                                           : Eigen::VectorXd::Constant(K, 1.0 / static_cast<double>(K));
    model.anchors = std::move(anchors);
    return model;
}

Eigen::VectorXd per_word_residual(const TopicModel& model, const RowMatrix& conditional) {
    if (conditional.rows() != model.coefficients.rows() ||
        conditional.cols() != model.anchors.vectors.cols()) {
        throw Error("per_word_residual: shape mismatch");
    }
    const auto V = conditional.rows();
    Eigen::VectorXd out(V);
    parallel_for(static_cast<std::size_t>(V), [&](std::size_t begin, std::size_t end, std::size_t) {
        for (auto i = static_cast<Eigen::Index>(begin); i < static_cast<Eigen::Index>(end); ++i) {
            const Eigen::RowVectorXd fit = model.coefficients.row(i) * model.anchors.vectors;
            out(i) = (conditional.row(i) - fit).norm();
        }
    });
    return out;
}

std::vector<WordIndex> top_words(const TopicModel& model, std::size_t k, std::size_t n) {
    if (k >= model.topics()) throw Error("topic index out of range");
    std::vector<WordIndex> words(model.vocab_size());
    std::iota(words.begin(), words.end(), WordIndex{0});
    n = std::min(n, words.size());
    const auto col = static_cast<Eigen::Index>(k);
    std::partial_sort(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(n), words.end(),
                      [&](WordIndex a, WordIndex b) {
                          const double pa = model.topic_word(a, col);
                          const double pb = model.topic_word(b, col);
                          return pa != pb ? pa > pb : a < b;
                      });
    words.resize(n);
    return words;
}

}  // namespace xref
