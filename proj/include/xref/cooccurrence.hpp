#pragma once

#include "xref/common.hpp"
#include "xref/corpus.hpp"

#include <Eigen/Dense>

#include <vector>

namespace xref {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Word co-occurrence statistics.
///
/// `joint` is Q, the V x V matrix of joint probabilities that two distinct
/// token positions of a document hold words i and j, averaged uniformly over
/// documents with at least two tokens. `conditional` is Qbar, Q with each row
/// divided by its sum `marginal` (p_w); words with a zero row are listed in
/// `excluded` and keep an all-zero Qbar row.
struct CooccurrenceMatrix {
    RowMatrix joint;
    RowMatrix conditional;
    Eigen::VectorXd marginal;
    std::vector<WordIndex> excluded;
    std::size_t documents_used = 0;

    std::size_t vocab_size() const noexcept { return static_cast<std::size_t>(joint.rows()); }
    bool is_excluded(WordIndex w) const;
};

CooccurrenceMatrix build_cooccurrence(const DocTermCounts& counts);

struct RowNormalized {
    RowMatrix conditional;
    Eigen::VectorXd marginal;
    std::vector<WordIndex> excluded;
};

RowNormalized row_normalize(const RowMatrix& joint);

}  // namespace xref
