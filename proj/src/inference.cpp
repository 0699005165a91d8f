#include "xref/inference.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xref {

void InferenceConfig::validate() const {
    if (!(alpha > 0.0)) throw Error("alpha must be positive");
    if (!(tol > 0.0)) throw Error("inference tolerance must be positive");
    if (max_iters < 1) throw Error("max_iters must be at least 1");
}

DocTopicVector infer_doc_topics(std::span<const WordIndex> cols, std::span<const std::uint32_t> vals,
                                const TopicModel& model, const InferenceConfig& config,
                                const std::string& label) {
    config.validate();
    const auto K = static_cast<Eigen::Index>(model.topics());
    DocTopicVector out;
    double n = 0.0;
    for (auto v : vals) n += v;
    if (n == 0.0) {
        out.theta = Eigen::VectorXd::Constant(K, 1.0 / static_cast<double>(K));
        out.degenerate = true;
        out.converged = true;
        return out;
    }
    auto fail = [&](const char* what) {
        return Error(std::string(what) + " during inference for passage " +
                     (label.empty() ? std::string("<unnamed>") : label));
    };

    Eigen::VectorXd gamma = Eigen::VectorXd::Constant(K, config.alpha + n / static_cast<double>(K));
    Eigen::VectorXd next(K);
    Eigen::VectorXd weight(K);
    Eigen::VectorXd phi(K);
    for (int it = 1; it <= config.max_iters; ++it) {
        for (Eigen::Index k = 0; k < K; ++k) weight(k) = std::exp(boost::math::digamma(gamma(k)));
        next.setConstant(config.alpha);
        for (std::size_t t = 0; t < cols.size(); ++t) {
            phi = model.topic_word.row(cols[t]).transpose().cwiseProduct(weight);
            const double z = phi.sum();
            if (!(z > 0.0) || !std::isfinite(z)) throw fail("non-finite update");
            next += (static_cast<double>(vals[t]) / z) * phi;
        }
        if (!next.allFinite()) throw fail("non-finite update");
        out.final_change = (next - gamma).cwiseAbs().sum() / static_cast<double>(K);
        gamma.swap(next);
        out.iterations = it;
        if (out.final_change < config.tol) {
            out.converged = true;
            break;
        }
    }
    out.theta = (gamma.array() - config.alpha).max(0.0).matrix();
    const double total = out.theta.sum();
    if (!(total > 0.0)) throw fail("degenerate topic mass");
    out.theta /= total;
    return out;
}

ThetaMatrix infer_corpus(const DocTermCounts& counts, const TopicModel& model,
                         const InferenceConfig& config, const Corpus* corpus) {
    config.validate();
    const auto D = counts.docs();
    const auto K = static_cast<Eigen::Index>(model.topics());
    ThetaMatrix out;
    out.theta.resize(static_cast<Eigen::Index>(D), K);
    out.degenerate.assign(D, 0);
    out.iterations.assign(D, 0);
    out.converged.assign(D, 0);
    parallel_for(D, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t d = begin; d < end; ++d) {
            const auto doc = static_cast<DocIndex>(d);
            const std::string label = corpus != nullptr ? (*corpus)[doc].id.str() : std::to_string(d);
            auto result = infer_doc_topics(counts.row_cols(doc), counts.row_vals(doc), model, config, label);
            out.theta.row(static_cast<Eigen::Index>(d)) = result.theta.transpose();
            out.degenerate[d] = result.degenerate ? 1 : 0;
            out.iterations[d] = result.iterations;
            out.converged[d] = result.converged ? 1 : 0;
        }
    });
    return out;
}

SparseTheta sparsify(const Eigen::Ref<const Eigen::VectorXd>& theta, std::size_t support) {
    if (support < 1) throw Error("sparsity must be at least 1");
    std::vector<std::uint32_t> nonzero;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        if (theta(k) != 0.0) nonzero.push_back(static_cast<std::uint32_t>(k));
    }
    SparseTheta out;
    if (nonzero.size() <= support) {
        for (auto k : nonzero) out.entries.emplace_back(k, theta(k));
        return out;
    }
    std::partial_sort(nonzero.begin(), nonzero.begin() + static_cast<std::ptrdiff_t>(support), nonzero.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          return theta(a) != theta(b) ? theta(a) > theta(b) : a < b;
                      });
    nonzero.resize(support);
    std::sort(nonzero.begin(), nonzero.end());
    double total = 0.0;
    for (auto k : nonzero) total += theta(k);
    for (auto k : nonzero) out.entries.emplace_back(k, theta(k) / total);
    return out;
}

SparseTheta to_sparse(const Eigen::Ref<const Eigen::VectorXd>& theta) {
    SparseTheta out;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        if (theta(k) != 0.0) out.entries.emplace_back(static_cast<std::uint32_t>(k), theta(k));
    }
    return out;
}

}  // namespace xref
