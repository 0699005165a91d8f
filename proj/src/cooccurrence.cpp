#include "xref/cooccurrence.hpp"

#include <algorithm>

namespace xref {

bool CooccurrenceMatrix::is_excluded(WordIndex w) const {
    return std::binary_search(excluded.begin(), excluded.end(), w);
}

CooccurrenceMatrix build_cooccurrence(const DocTermCounts& counts) {
    const auto V = static_cast<Eigen::Index>(counts.vocab_size);
    std::vector<DocIndex> used;
    for (std::size_t d = 0; d < counts.docs(); ++d) {
        if (counts.lengths[d] >= 2) used.push_back(static_cast<DocIndex>(d));
    }
    if (used.empty()) throw Error("no co-occurrence evidence: no passage has two or more tokens");

    CooccurrenceMatrix out;
    out.joint = RowMatrix::Zero(V, V);
    out.documents_used = used.size();

    // Each worker owns a band of rows, so every entry is accumulated over
    // documents in corpus order regardless of the worker count. Q_ij and Q_ji
    // see identical terms, which keeps Q exactly symmetric.
    parallel_for(static_cast<std::size_t>(V), [&](std::size_t row_begin, std::size_t row_end, std::size_t) {
        for (const DocIndex d : used) {
            const auto cols = counts.row_cols(d);
            const auto vals = counts.row_vals(d);
            const double n = counts.lengths[d];
            const double norm = 1.0 / (n * (n - 1.0));
            const auto first = std::lower_bound(cols.begin(), cols.end(), static_cast<WordIndex>(row_begin));
            for (auto it = first; it != cols.end() && *it < row_end; ++it) {
                const std::size_t a = static_cast<std::size_t>(it - cols.begin());
                const double wa = vals[a];
                double* row = out.joint.row(cols[a]).data();
                for (std::size_t b = 0; b < cols.size(); ++b) {
                    const double wb = vals[b];
                    const double pairs = (a == b) ? wa * (wa - 1.0) : wa * wb;
                    row[cols[b]] += pairs * norm;
                }
            }
        }
    });
    out.joint /= static_cast<double>(used.size());

    auto normalized = row_normalize(out.joint);
    out.conditional = std::move(normalized.conditional);
    out.marginal = std::move(normalized.marginal);
    out.excluded = std::move(normalized.excluded);
    return out;
}

RowNormalized row_normalize(const RowMatrix& joint) {
    RowNormalized out;
    const auto V = joint.rows();
    out.conditional = RowMatrix::Zero(V, joint.cols());
    out.marginal = joint.rowwise().sum();
    for (Eigen::Index i = 0; i < V; ++i) {
        if (out.marginal(i) > 0.0) {
            out.conditional.row(i) = joint.row(i) / out.marginal(i);
        } else {
            out.excluded.push_back(static_cast<WordIndex>(i));
        }
    }
    return out;
}

}  // namespace xref
