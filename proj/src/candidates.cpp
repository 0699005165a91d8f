#include "xref/candidates.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <mutex>
#include <ostream>
#include <queue>
#include <sstream>

namespace xref {

std::string to_string(Metric metric) {
    switch (metric) {
        case Metric::cosine: return "cosine";
        case Metric::euclidean: return "euclidean";
        case Metric::cityblock: return "cityblock";
        case Metric::chebyshev: return "chebyshev";
    }
    return "unknown";
}

std::string to_string(Method method) {
    switch (method) {
        case Method::cosine: return "cosine";
        case Method::euclidean: return "euclidean";
        case Method::cityblock: return "cityblock";
        case Method::chebyshev: return "chebyshev";
        case Method::word_match: return "word-match";
        case Method::topic_match: return "topic-match";
        case Method::topic_word_match: return "topic-word-match";
    }
    return "unknown";
}

Metric parse_metric(const std::string& name) {
    if (name == "cosine") return Metric::cosine;
    if (name == "euclidean") return Metric::euclidean;
    if (name == "cityblock" || name == "manhattan") return Metric::cityblock;
    if (name == "chebyshev") return Metric::chebyshev;
    throw Error("unknown metric '" + name + "'");
}

Method parse_method(const std::string& name) {
    for (auto m : {Method::cosine, Method::euclidean, Method::cityblock, Method::chebyshev,
                   Method::word_match, Method::topic_match, Method::topic_word_match}) {
        if (to_string(m) == name) return m;
    }
    throw Error("unknown method '" + name + "'");
}

Method method_for(Metric metric) {
    switch (metric) {
        case Metric::cosine: return Method::cosine;
        case Metric::euclidean: return Method::euclidean;
        case Metric::cityblock: return Method::cityblock;
        case Metric::chebyshev: return Method::chebyshev;
    }
    return Method::cosine;
}

bool is_metric_method(Method method) {
    return method == Method::cosine || method == Method::euclidean || method == Method::cityblock ||
           method == Method::chebyshev;
}

namespace {

double cosine_from(double dot, double norm_a, double norm_b) {
    if (norm_a == 0.0 || norm_b == 0.0) return 1.0;
    // Rounding can push identical directions just below zero.
    return std::clamp(1.0 - dot / (norm_a * norm_b), 0.0, 2.0);
}

double sparse_norm(const SparseTheta& a) {
    double s = 0.0;
    for (const auto& [k, w] : a.entries) s += w * w;
    return std::sqrt(s);
}

// Merged walk over the union of supports in ascending topic order, so sums
// accumulate in the same order as the dense loop.
template <typename Fn>
void merge_walk(const SparseTheta& a, const SparseTheta& b, Fn&& fn) {
    auto ia = a.entries.begin();
    auto ib = b.entries.begin();
    while (ia != a.entries.end() || ib != b.entries.end()) {
        if (ib == b.entries.end() || (ia != a.entries.end() && ia->first < ib->first)) {
            fn(ia->second, 0.0);
            ++ia;
        } else if (ia == a.entries.end() || ib->first < ia->first) {
            fn(0.0, ib->second);
            ++ib;
        } else {
            fn(ia->second, ib->second);
            ++ia;
            ++ib;
        }
    }
}

double sparse_non_cosine(const SparseTheta& a, const SparseTheta& b, Metric metric) {
    double acc = 0.0;
    switch (metric) {
        case Metric::euclidean:
            merge_walk(a, b, [&](double x, double y) { acc += (x - y) * (x - y); });
            return std::sqrt(acc);
        case Metric::cityblock:
            merge_walk(a, b, [&](double x, double y) { acc += std::abs(x - y); });
            return acc;
        case Metric::chebyshev:
            merge_walk(a, b, [&](double x, double y) { acc = std::max(acc, std::abs(x - y)); });
            return acc;
        case Metric::cosine:
            break;
    }
    throw Error("sparse_non_cosine called with cosine");
}

struct ScoredPair {
    double score;
    DocIndex a;
    DocIndex b;

    friend bool operator<(const ScoredPair& x, const ScoredPair& y) {
        if (x.score != y.score) return x.score < y.score;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    }
};

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

double pair_distance(std::span<const double> a, std::span<const double> b, Metric metric) {
    if (a.size() != b.size()) {
        throw Error("dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    switch (metric) {
        case Metric::cosine: {
            double dot = 0.0, na = 0.0, nb = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                dot += a[i] * b[i];
                na += a[i] * a[i];
                nb += b[i] * b[i];
            }
            return cosine_from(dot, std::sqrt(na), std::sqrt(nb));
        }
        case Metric::euclidean: {
            double s = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
            return std::sqrt(s);
        }
        case Metric::cityblock: {
            double s = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
            return s;
        }
        case Metric::chebyshev: {
            double s = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
            return s;
        }
    }
    return 0.0;
}

double sparse_distance(const SparseTheta& a, const SparseTheta& b, Metric metric) {
    if (metric != Metric::cosine) return sparse_non_cosine(a, b, metric);
    double dot = 0.0;
    merge_walk(a, b, [&](double x, double y) {
        if (x != 0.0 && y != 0.0) dot += x * y;
    });
    return cosine_from(dot, sparse_norm(a), sparse_norm(b));
}

CandidateSet generate_candidates(std::span<const SparseTheta> thetas, Metric metric,
                                 const Selection& selection, std::size_t memory_budget) {
    const std::size_t D = thetas.size();
    if (D < 2) throw Error("candidate generation needs at least two passages");
    if (selection.top_n.has_value() == selection.threshold.has_value()) {
        throw Error("choose exactly one of top_n or threshold");
    }

    CandidateSet out;
    out.method = method_for(metric);
    out.docs = D;
    const std::uint64_t universe = out.universe();
    std::uint64_t limit = 0;
    if (selection.top_n) {
        limit = *selection.top_n;
        if (limit > universe) {
            out.warnings.push_back("top_n " + std::to_string(limit) + " exceeds the " + std::to_string(universe) +
                                   " ordered pairs; clamped");
            limit = universe;
        }
        out.generation = "top_n=" + std::to_string(limit);
    } else {
        out.generation = "threshold=" + format_double(*selection.threshold);
    }
    if (selection.top_n && limit == 0) return out;

    std::size_t K = 0;
    for (const auto& t : thetas) {
        if (!t.entries.empty()) K = std::max<std::size_t>(K, t.entries.back().first + 1);
    }
    std::vector<double> norms(D);
    for (std::size_t i = 0; i < D; ++i) norms[i] = sparse_norm(thetas[i]);

    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(thread_count(), D));
    const std::size_t row_bytes = D * sizeof(double);
    const std::size_t block_rows =
        std::clamp<std::size_t>(memory_budget / std::max<std::size_t>(1, row_bytes * workers), 1, D);
    const std::size_t blocks = (D + block_rows - 1) / block_rows;
    // Unordered pairs (score, min, max) sort ahead of any ordered pair they
    // could be displaced by, so keeping `limit` of them is always enough.
    const std::size_t keep = static_cast<std::size_t>(limit);

    std::vector<std::vector<ScoredPair>> kept(workers);
    std::atomic<std::size_t> next_block{0};

    parallel_for(workers, [&](std::size_t wbegin, std::size_t wend, std::size_t) {
        for (std::size_t w = wbegin; w < wend; ++w) {
            std::priority_queue<ScoredPair> heap;  // max-heap of the best `keep`
            std::vector<ScoredPair>& found = kept[w];
            std::vector<double> buffer(block_rows * D);
            std::vector<double> dense(K, 0.0);
            while (true) {
                const std::size_t blk = next_block.fetch_add(1);
                if (blk >= blocks) break;
                const std::size_t r0 = blk * block_rows;
                const std::size_t r1 = std::min(D, r0 + block_rows);
                for (std::size_t i = r0; i < r1; ++i) {
                    double* scores = buffer.data() + (i - r0) * D;
                    const auto& a = thetas[i];
                    if (metric == Metric::cosine) {
                        for (const auto& [k, v] : a.entries) dense[k] = v;
                        for (std::size_t j = i + 1; j < D; ++j) {
                            double dot = 0.0;
                            for (const auto& [k, v] : thetas[j].entries) {
                                if (dense[k] != 0.0) dot += dense[k] * v;
                            }
                            scores[j] = cosine_from(dot, norms[i], norms[j]);
                        }
                        for (const auto& [k, v] : a.entries) dense[k] = 0.0;
                    } else {
                        for (std::size_t j = i + 1; j < D; ++j) scores[j] = sparse_non_cosine(a, thetas[j], metric);
                    }
                }
                for (std::size_t i = r0; i < r1; ++i) {
                    const double* scores = buffer.data() + (i - r0) * D;
                    for (std::size_t j = i + 1; j < D; ++j) {
                        const ScoredPair p{scores[j], static_cast<DocIndex>(i), static_cast<DocIndex>(j)};
                        if (selection.threshold) {
                            if (p.score <= *selection.threshold) found.push_back(p);
                        } else if (heap.size() < keep) {
                            heap.push(p);
                        } else if (p < heap.top()) {
                            heap.pop();
                            heap.push(p);
                        }
                    }
                }
            }
            while (!heap.empty()) {
                found.push_back(heap.top());
                heap.pop();
            }
        }
    });

    std::vector<ScoredPair> merged;
    for (auto& v : kept) merged.insert(merged.end(), v.begin(), v.end());
    std::sort(merged.begin(), merged.end());
    if (selection.top_n && merged.size() > keep) merged.resize(keep);

    std::vector<ScoredPair> directed;
    directed.reserve(merged.size() * 2);
    for (const auto& p : merged) {
        directed.push_back(p);
        directed.push_back(ScoredPair{p.score, p.b, p.a});
    }
    std::sort(directed.begin(), directed.end());
    if (selection.top_n && directed.size() > limit) directed.resize(static_cast<std::size_t>(limit));

    out.pairs.reserve(directed.size());
    std::uint64_t rank = 0;
    for (const auto& p : directed) out.pairs.push_back(CandidatePair{p.a, p.b, p.score, ++rank});
    return out;
}

std::vector<std::uint32_t> topic_assignment(const RowMatrix& theta) {
    std::vector<std::uint32_t> out(static_cast<std::size_t>(theta.rows()));
    for (Eigen::Index d = 0; d < theta.rows(); ++d) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < theta.cols(); ++k) {
            if (theta(d, k) > theta(d, best)) best = k;
        }
        out[static_cast<std::size_t>(d)] = static_cast<std::uint32_t>(best);
    }
    return out;
}

std::vector<std::uint32_t> topic_assignment(std::span<const SparseTheta> thetas) {
    std::vector<std::uint32_t> out(thetas.size(), 0);
    for (std::size_t d = 0; d < thetas.size(); ++d) {
        double best = -1.0;
        for (const auto& [k, w] : thetas[d].entries) {
            if (w > best) {
                best = w;
                out[d] = k;
            }
        }
    }
    return out;
}

double token_jaccard(const Passage& a, const Passage& b) {
    std::vector<WordIndex> x = a.tokens;
    std::vector<WordIndex> y = b.tokens;
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    std::sort(y.begin(), y.end());
    y.erase(std::unique(y.begin(), y.end()), y.end());
    std::vector<WordIndex> common;
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
    const std::size_t united = x.size() + y.size() - common.size();
    if (united == 0) return a.raw_text == b.raw_text ? 1.0 : 0.0;
    return static_cast<double>(common.size()) / static_cast<double>(united);
}

std::vector<DuplicateFlag> duplicate_pair_report(const CandidateSet& set, const Corpus& corpus,
                                                 double jaccard_threshold) {
    if (!(jaccard_threshold >= 0.0 && jaccard_threshold <= 1.0)) {
        throw Error("jaccard threshold must lie in [0, 1]");
    }
    std::vector<DuplicateFlag> out(set.pairs.size());
    for (std::size_t i = 0; i < set.pairs.size(); ++i) {
        const auto& p = set.pairs[i];
        const double j = token_jaccard(corpus[p.from], corpus[p.to]);
        out[i] = DuplicateFlag{i, j, j >= jaccard_threshold};
    }
    return out;
}

void write_candidates_csv(std::ostream& out, const CandidateSet& set, const Corpus& corpus) {
    out << "rank,from,to,score,method\n";
    const std::string method = to_string(set.method);
    for (const auto& p : set.pairs) {
        out << p.rank << ',' << corpus[p.from].id.str() << ',' << corpus[p.to].id.str() << ','
            << format_double(p.score) << ',' << method << '\n';
    }
}

CandidateSet read_candidates_csv(std::istream& in, const Corpus& corpus) {
    CandidateSet set;
    set.docs = corpus.size();
    std::string line;
    std::size_t lineno = 0;
    bool have_method = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            if (line != "rank,from,to,score,method") throw ParseError(lineno, "unexpected candidate CSV header");
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 5) throw ParseError(lineno, "expected 5 fields");
        CandidatePair p;
        try {
            p.rank = std::stoull(fields[0]);
            p.score = std::stod(fields[3]);
        } catch (const std::exception&) {
            throw ParseError(lineno, "bad rank or score");
        }
        auto from = corpus.position(PassageId::parse(fields[1]));
        auto to = corpus.position(PassageId::parse(fields[2]));
        if (!from || !to) throw ParseError(lineno, "passage id not in corpus");
        p.from = *from;
        p.to = *to;
        const Method m = parse_method(fields[4]);
        if (have_method && m != set.method) throw ParseError(lineno, "mixed methods in one candidate file");
        set.method = m;
        have_method = true;
        set.pairs.push_back(p);
    }
    return set;
}

}  // namespace xref
