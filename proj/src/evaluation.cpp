#include "xref/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

namespace xref {

GroundTruthFormat parse_ground_truth_format(const std::string& name) {
    if (name == "pairs-tsv") return GroundTruthFormat::pairs_tsv;
    if (name == "openbible-votes") return GroundTruthFormat::openbible_votes;
    throw Error("unknown ground-truth format '" + name + "' (expected pairs-tsv or openbible-votes)");
}

GroundTruth::GroundTruth(std::vector<std::pair<DocIndex, DocIndex>> pairs, std::vector<int> votes)
    : pairs_(std::move(pairs)), votes_(std::move(votes)) {
    if (!votes_.empty() && votes_.size() != pairs_.size()) throw Error("votes do not match pairs");
    members_.reserve(pairs_.size());
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
        if (i > 0 && !(pairs_[i - 1] < pairs_[i])) throw Error("ground-truth pairs must be sorted and unique");
        members_.insert(key(pairs_[i].first, pairs_[i].second));
    }
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return out;
}

std::optional<int> parse_int(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

bool is_header_field(std::string_view s) {
    return s.size() >= 4 && (s.substr(0, 4) == "from" || s.substr(0, 4) == "From" || s.substr(0, 4) == "FROM");
}

}  // namespace

GroundTruth load_ground_truth(std::istream& in, GroundTruthFormat format, const Corpus& corpus,
                              std::optional<int> min_votes, std::string source) {
    if (min_votes && format != GroundTruthFormat::openbible_votes) {
        throw Error("min_votes requires a vote-bearing ground-truth format");
    }
    std::map<std::pair<DocIndex, DocIndex>, int> merged;
    std::size_t records = 0;
    std::size_t unresolved = 0;
    std::size_t collapsed = 0;
    std::size_t self_pairs = 0;
    std::string line;
    std::size_t lineno = 0;
    const bool with_votes = format == GroundTruthFormat::openbible_votes;

    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view(line);
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (view.empty() || view.front() == '#') continue;
        const auto fields = split_tabs(view);
        if (fields.size() < (with_votes ? 3u : 2u) || fields[0].empty() || fields[1].empty()) {
            if (lineno == 1) continue;  // header
            throw ParseError(lineno, with_votes ? "expected from<TAB>to<TAB>votes" : "expected from<TAB>to");
        }
        int votes = 0;
        if (with_votes) {
            auto v = parse_int(fields[2]);
            if (!v) {
                if (lineno == 1) continue;  // header
                throw ParseError(lineno, "vote count is not an integer");
            }
            votes = *v;
        } else if (lineno == 1 && is_header_field(fields[0]) &&
                   !corpus.resolve(PassageId::parse(fields[0]))) {
            continue;
        }
        ++records;
        bool range_a = false;
        bool range_b = false;
        std::optional<DocIndex> from;
        std::optional<DocIndex> to;
        try {
            from = corpus.resolve(parse_reference(fields[0], &range_a));
            to = corpus.resolve(parse_reference(fields[1], &range_b));
        } catch (const Error& e) {
            throw ParseError(lineno, e.what());
        }
        collapsed += (range_a ? 1 : 0) + (range_b ? 1 : 0);
        if (!from || !to) {
            ++unresolved;
            continue;
        }
        if (*from == *to) {
            ++self_pairs;
            continue;
        }
        auto [it, inserted] = merged.emplace(std::make_pair(*from, *to), votes);
        if (!inserted) it->second = std::max(it->second, votes);
    }

    if (records > 0 && static_cast<double>(unresolved) > kMaxUnresolvedFraction * static_cast<double>(records)) {
        throw Error(std::to_string(unresolved) + " of " + std::to_string(records) +
                    " references do not resolve against the corpus (likely an id-scheme mismatch)");
    }

    std::vector<std::pair<DocIndex, DocIndex>> pairs;
    std::vector<int> votes;
    std::size_t below = 0;
    for (const auto& [pair, v] : merged) {
        if (min_votes && v < *min_votes) {
            ++below;
            continue;
        }
        pairs.push_back(pair);
        if (with_votes) votes.push_back(v);
    }
    if (pairs.empty()) throw Error("ground truth is empty");

    GroundTruth gt(std::move(pairs), std::move(votes));
    gt.source = std::move(source);
    gt.min_votes = min_votes;
    gt.lines = records;
    gt.unresolved = unresolved;
    gt.collapsed_ranges = collapsed;
    gt.self_pairs = self_pairs;
    gt.below_min_votes = below;
    return gt;
}

void write_pairs_tsv(std::ostream& out, const std::vector<std::pair<DocIndex, DocIndex>>& pairs,
                     const Corpus& corpus) {
    for (const auto& [a, b] : pairs) out << corpus[a].id.str() << '\t' << corpus[b].id.str() << '\n';
}

CurvePoint make_point(std::uint64_t k, std::uint64_t tp, std::uint64_t universe, std::uint64_t positives) {
    CurvePoint p;
    p.k = k;
    p.tp = tp;
    p.fp = k - tp;
    p.fn = positives - tp;
    p.tn = universe - positives - p.fp;
    p.precision = k > 0 ? static_cast<double>(tp) / static_cast<double>(k) : 0.0;
    p.recall = positives > 0 ? static_cast<double>(tp) / static_cast<double>(positives) : 0.0;
    const auto negatives = universe - positives;
    p.fpr = negatives > 0 ? static_cast<double>(p.fp) / static_cast<double>(negatives) : 0.0;
    return p;
}

EvalCurve curve(const CandidateSet& ranked, const GroundTruth& gt) {
    if (gt.size() == 0) throw Error("empty ground truth");
    EvalCurve c;
    c.universe = ranked.universe();
    c.positives = gt.size();
    c.points.reserve(ranked.pairs.size());
    std::uint64_t tp = 0;
    std::uint64_t k = 0;
    for (const auto& p : ranked.pairs) {
        ++k;
        if (gt.contains(p.from, p.to)) ++tp;
        c.points.push_back(make_point(k, tp, c.universe, c.positives));
    }
    return c;
}

EvalCurve set_endpoint(const std::function<void(const PartnerVisitor&)>& run, std::size_t docs,
                       const GroundTruth& gt) {
    if (gt.size() == 0) throw Error("empty ground truth");
    std::uint64_t k = 0;
    std::uint64_t tp = 0;
    run([&](DocIndex from, std::span<const DocIndex> to) {
        k += to.size();
        for (DocIndex t : to) {
            if (gt.contains(from, t)) ++tp;
        }
    });
    EvalCurve c;
    c.universe = static_cast<std::uint64_t>(docs) * (docs == 0 ? 0 : docs - 1);
    c.positives = gt.size();
    c.points.push_back(make_point(k, tp, c.universe, c.positives));
    return c;
}

EvalCurve downsample(const EvalCurve& c, std::uint64_t stride) {
    if (stride <= 1) return c;
    EvalCurve out;
    out.universe = c.universe;
    out.positives = c.positives;
    out.downsampled = true;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        if (i == 0 || i + 1 == c.points.size() || c.points[i].k % stride == 0) out.points.push_back(c.points[i]);
    }
    return out;
}

double auc(const EvalCurve& c, AucKind kind) {
    if (c.points.empty()) throw Error("auc of an empty curve");
    double area = 0.0;
    if (kind == AucKind::roc) {
        double x0 = 0.0, y0 = 0.0;
        for (const auto& p : c.points) {
            area += (p.fpr - x0) * (p.recall + y0) * 0.5;
            x0 = p.fpr;
            y0 = p.recall;
        }
        area += (1.0 - x0) * (1.0 + y0) * 0.5;
    } else {
        double x0 = 0.0, y0 = c.points.front().precision;
        for (const auto& p : c.points) {
            area += (p.recall - x0) * (p.precision + y0) * 0.5;
            x0 = p.recall;
            y0 = p.precision;
        }
    }
    return std::clamp(area, 0.0, 1.0);
}

CostEstimate cost_estimate(const EvalCurve& c, std::uint64_t target_tp, double price_per_annotation) {
    if (target_tp > c.positives) {
        throw Error("target of " + std::to_string(target_tp) + " true positives exceeds the " +
                    std::to_string(c.positives) + " available");
    }
    if (c.downsampled) throw Error("cost estimates need the full-resolution curve");
    if (target_tp == 0) return CostEstimate{0, 0.0};
    for (const auto& p : c.points) {
        if (p.tp >= target_tp) {
            return CostEstimate{p.k, static_cast<double>(p.k) * price_per_annotation};
        }
    }
    const std::uint64_t best = c.points.empty() ? 0 : c.points.back().tp;
    throw Error("curve never reaches " + std::to_string(target_tp) + " true positives (max achievable " +
                std::to_string(best) + ")");
}

double consistency_check(std::uint64_t positives, std::uint64_t docs, double fpr, double reported_fp) {
    if (!(reported_fp > 0.0)) throw Error("reported false positives must be positive");
    const double universe = static_cast<double>(docs) * static_cast<double>(docs - 1);
    const double negatives = universe - static_cast<double>(positives);
    return std::abs(fpr * negatives - reported_fp) / reported_fp;
}

void write_curve_csv(std::ostream& out, const EvalCurve& c) {
    out << "k,tp,fp,fn,tn,precision,recall,fpr\n";
    char buf[256];
    for (const auto& p : c.points) {
        std::snprintf(buf, sizeof buf, "%llu,%llu,%llu,%llu,%llu,%.10g,%.10g,%.10g\n",
                      static_cast<unsigned long long>(p.k), static_cast<unsigned long long>(p.tp),
                      static_cast<unsigned long long>(p.fp), static_cast<unsigned long long>(p.fn),
                      static_cast<unsigned long long>(p.tn), p.precision, p.recall, p.fpr);
        out << buf;
    }
}

}  // namespace xref
