#include "xref/config.hpp"

#include "xref/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace xref {

using nlohmann::json;

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

// Reads the keys of `j` into their fields, rejecting keys nobody reads so a
// misspelled knob does not silently fall back to its default.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw Error("config section '" + name_ + "' must be an object");
    }
    ~Section() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.contains(key)) throw Error("unknown config key '" + name_ + "." + key + "'");
        }
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw Error("config key '" + name_ + "." + key + "' has the wrong type");
        }
    }
    template <typename T>
    void read(const char* key, std::optional<T>& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        if (j_.at(key).is_null()) {
            out.reset();
            return;
        }
        T v{};
        read(key, v);
        out = v;
    }

private:
    const json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

const json& section(const json& j, const char* name) {
    static const json empty = json::object();
    return j.contains(name) ? j.at(name) : empty;
}

}  // namespace

void PipelineConfig::validate() const {
    parse_corpus_format(corpus.format);
    if (corpus.stemmer != "porter" && corpus.stemmer != "none") {
        throw Error("stemmer must be porter or none, got '" + corpus.stemmer + "'");
    }
    if (corpus.vocab_cap == 0) throw Error("vocab_cap must be positive");
    if (anchors.method != "gram-schmidt" && anchors.method != "tandem" && anchors.method != "coarse-proxy") {
        throw Error("anchor method must be gram-schmidt, tandem or coarse-proxy, got '" + anchors.method + "'");
    }
    if (anchors.tandem_min_tokens == 0) throw Error("tandem_min_tokens must be positive");
    if (!(solver.step_size > 0.0) || !(solver.tolerance > 0.0) || solver.max_iters < 1) {
        throw Error("solver step_size and tolerance must be positive and max_iters at least 1");
    }
    inference.validate();
    parse_metric(candidates.metric);
    if (candidates.top_n && candidates.threshold) throw Error("top_n and threshold are mutually exclusive");
    if (candidates.top_n && *candidates.top_n == 0) throw Error("top_n must be positive");
    if (candidates.sparsity == 0) throw Error("sparsity must be positive");
    parse_ground_truth_format(eval.format);
    if (eval.stride == 0) throw Error("stride must be positive");
    if (!(eval.price >= 0.0)) throw Error("price must be non-negative");
}

json to_json(const PipelineConfig& c) {
    return json{
        {"corpus",
         {{"path", c.corpus.path},
          {"format", c.corpus.format},
          {"lowercase", c.corpus.lowercase},
          {"stemmer", c.corpus.stemmer},
          {"stopwords", c.corpus.stopwords},
          {"min_doc_freq", c.corpus.min_doc_freq},
          {"vocab_cap", c.corpus.vocab_cap}}},
        {"anchors",
         {{"method", c.anchors.method},
          {"k", c.anchors.k},
          {"seed", c.anchors.seed},
          {"candidate_min_df", c.anchors.candidate_min_df},
          {"tandem_min_tokens", c.anchors.tandem_min_tokens}}},
        {"solver",
         {{"step_size", c.solver.step_size}, {"tolerance", c.solver.tolerance}, {"max_iters", c.solver.max_iters}}},
        {"inference",
         {{"alpha", c.inference.alpha}, {"tol", c.inference.tol}, {"max_iters", c.inference.max_iters}}},
        {"candidates",
         {{"metric", c.candidates.metric},
          {"top_n", optional_json(c.candidates.top_n)},
          {"threshold", optional_json(c.candidates.threshold)},
          {"sparsity", c.candidates.sparsity},
          {"memory_budget", c.candidates.memory_budget}}},
        {"eval",
         {{"ground_truth", c.eval.ground_truth},
          {"format", c.eval.format},
          {"min_votes", optional_json(c.eval.min_votes)},
          {"stride", c.eval.stride},
          {"price", c.eval.price}}},
    };
}

PipelineConfig config_from_json(const json& j) {
    if (!j.is_object()) throw Error("config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        static const std::set<std::string> known{"corpus", "anchors", "solver", "inference", "candidates", "eval"};
        if (!known.contains(key)) throw Error("unknown config section '" + key + "'");
    }
    PipelineConfig c;
    {
        Section s(section(j, "corpus"), "corpus");
        s.read("path", c.corpus.path);
        s.read("format", c.corpus.format);
        s.read("lowercase", c.corpus.lowercase);
        s.read("stemmer", c.corpus.stemmer);
        s.read("stopwords", c.corpus.stopwords);
        s.read("min_doc_freq", c.corpus.min_doc_freq);
        s.read("vocab_cap", c.corpus.vocab_cap);
    }
    {
        Section s(section(j, "anchors"), "anchors");
        s.read("method", c.anchors.method);
        s.read("k", c.anchors.k);
        s.read("seed", c.anchors.seed);
        s.read("candidate_min_df", c.anchors.candidate_min_df);
        s.read("tandem_min_tokens", c.anchors.tandem_min_tokens);
    }
    {
        Section s(section(j, "solver"), "solver");
        s.read("step_size", c.solver.step_size);
        s.read("tolerance", c.solver.tolerance);
        s.read("max_iters", c.solver.max_iters);
    }
    {
        Section s(section(j, "inference"), "inference");
        s.read("alpha", c.inference.alpha);
        s.read("tol", c.inference.tol);
        s.read("max_iters", c.inference.max_iters);
    }
    {
        Section s(section(j, "candidates"), "candidates");
        s.read("metric", c.candidates.metric);
        s.read("top_n", c.candidates.top_n);
        s.read("threshold", c.candidates.threshold);
        s.read("sparsity", c.candidates.sparsity);
        s.read("memory_budget", c.candidates.memory_budget);
    }
    {
        Section s(section(j, "eval"), "eval");
        s.read("ground_truth", c.eval.ground_truth);
        s.read("format", c.eval.format);
        s.read("min_votes", c.eval.min_votes);
        s.read("stride", c.eval.stride);
        s.read("price", c.eval.price);
    }
    return c;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("config " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

void save_config(const PipelineConfig& c, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << to_json(c).dump(2) << '\n';
}

TokenizerConfig tokenizer_config(const PipelineConfig::CorpusSection& c) {
    TokenizerConfig t;
    t.lowercase = c.lowercase;
    t.stemmer = c.stemmer == "none" ? Stemmer::none : Stemmer::porter;
    if (!c.stopwords.empty()) t.stopwords = load_stopwords(c.stopwords);
    return t;
}

std::size_t resolve_topic_count(const PipelineConfig::AnchorSection& a, const Corpus& corpus) {
    if (a.k > 0) return a.k;
    if (a.method == "coarse-proxy") return kCoarseProxyTopics;
    const bool verses = !corpus.empty() && std::all_of(corpus.passages().begin(), corpus.passages().end(),
                                                       [](const Passage& p) { return p.id.is_verse(); });
    if (verses) return kBibleTopics;
    return std::max<std::size_t>(1, (corpus.size() + 9) / 10);
}

}  // namespace xref
