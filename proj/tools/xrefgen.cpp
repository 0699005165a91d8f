// xrefgen: cross-reference generation pipeline.
//
// Each subcommand reads its upstream artifacts from --out (then from any
// --in directories), writes its own outputs into --out and refreshes
// --out/config.json with the resolved configuration.

#include "xref/annotation.hpp"
#include "xref/artifact.hpp"
#include "xref/candidates.hpp"
#include "xref/config.hpp"
#include "xref/cooccurrence.hpp"
#include "xref/corpus.hpp"
#include "xref/evaluation.hpp"
#include "xref/inference.hpp"
#include "xref/service.hpp"
#include "xref/topics.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace xref;

namespace {

constexpr const char* kCorpusFile = "corpus.art";
constexpr const char* kCoocFile = "cooc.art";
constexpr const char* kAnchorsFile = "anchors.art";
constexpr const char* kTopicsFile = "topics.art";
constexpr const char* kThetaFile = "theta.art";
constexpr const char* kCandidatesFile = "candidates.csv";
constexpr const char* kCurveFile = "curve.csv";

class MissingStage : public Error {
public:
    using Error::Error;
};

struct Context {
    PipelineConfig cfg;
    fs::path out = "out";
    std::vector<fs::path> inputs;
    bool force = false;
    bool quiet = false;

    void log(const std::string& msg) const {
        if (!quiet) std::cerr << msg << '\n';
    }
};

fs::path locate(const Context& ctx, const char* file, const char* stage, const char* producer) {
    if (fs::exists(ctx.out / file)) return ctx.out / file;
    for (const auto& dir : ctx.inputs) {
        if (fs::exists(dir / file)) return dir / file;
    }
    throw MissingStage(std::string("missing ") + stage + " artifact " + file + " (run `xrefgen " + producer +
                       "` first)");
}

Artifact load_stage(const Context& ctx, const char* file, const char* kind, const char* producer) {
    return Artifact::load(locate(ctx, file, kind, producer).string(), kind);
}

// Stage -> key over the given artifacts and everything upstream of them;
// two artifacts that disagree about a shared stage were built from
// different inputs.
std::map<std::string, std::string> lineage(std::initializer_list<const Artifact*> parts) {
    std::map<std::string, std::string> out;
    auto add = [&](const std::string& stage, const std::string& key) {
        auto [it, inserted] = out.emplace(stage, key);
        if (!inserted && it->second != key) {
            throw Error("stale " + stage + " artifact: upstream artifacts were built from different " + stage +
                        " outputs; rerun the downstream stages");
        }
    };
    for (const auto* a : parts) {
        add(a->kind, a->key);
        for (const auto& [stage, key] : a->upstream) add(stage, key);
    }
    return out;
}

bool up_to_date(const Context& ctx, const fs::path& path, const std::string& key) {
    return !ctx.force && Artifact::peek_key(path.string()) == key;
}

void write_config(const Context& ctx) { save_config(ctx.cfg, (ctx.out / "config.json").string()); }

// Writes a text output through a temp file so a failed run leaves nothing behind.
template <typename Fn>
void write_atomic(const fs::path& path, Fn&& fill) {
    const fs::path tmp = path.string() + ".tmp";
    try {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        fill(out);
        out.flush();
        if (!out) throw Error("failed writing " + tmp.string());
        out.close();
        fs::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

void save_stage(const Context& ctx, Artifact& a, const std::string& key, std::map<std::string, std::string> upstream,
                const json& stage_config, const fs::path& path) {
    a.key = key;
    a.upstream = std::move(upstream);
    a.meta["config"] = stage_config;
    a.save(path.string());
    write_config(ctx);
    ctx.log("wrote " + path.string());
}

template <typename Fn>
double timed(Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- stages ------------------------------------------------------------

void run_ingest(Context& ctx) {
    auto& c = ctx.cfg.corpus;
    if (c.path.empty()) throw Error("ingest needs --corpus");
    const json stage{{"format", c.format},
                     {"lowercase", c.lowercase},
                     {"stemmer", c.stemmer},
                     {"min_doc_freq", c.min_doc_freq},
                     {"vocab_cap", c.vocab_cap}};
    std::vector<std::string> hashes{sha256_file(c.path)};
    if (!c.stopwords.empty()) hashes.push_back(sha256_file(c.stopwords));
    const auto key = content_key("corpus", stage, {}, hashes);
    const auto path = ctx.out / kCorpusFile;
    if (up_to_date(ctx, path, key)) return ctx.log(path.string() + " is up to date");

    std::ifstream in(c.path, std::ios::binary);
    if (!in) throw Error("cannot open corpus " + c.path);
    CorpusBundle b;
    b.corpus = parse_corpus(in, parse_corpus_format(c.format));
    const auto tok = tokenizer_config(c);
    b.vocab = build_vocabulary(b.corpus, tok, c.min_doc_freq, c.vocab_cap);
    assign_tokens(b.corpus, b.vocab, tok);
    b.counts = build_doc_term(b.corpus, b.vocab);
    ctx.log(std::to_string(b.corpus.size()) + " passages, vocabulary " + std::to_string(b.vocab.size()));
    auto a = pack_corpus(b);
    a.meta["source"] = fs::path(c.path).filename().string();
    save_stage(ctx, a, key, {}, stage, path);
}

void run_cooc(Context& ctx) {
    const auto corpus = load_stage(ctx, kCorpusFile, "corpus", "ingest");
    auto up = lineage({&corpus});
    const auto key = content_key("cooccurrence", json::object(), up);
    const auto path = ctx.out / kCoocFile;
    if (up_to_date(ctx, path, key)) return ctx.log(path.string() + " is up to date");
    const auto b = unpack_corpus(corpus);
    CooccurrenceMatrix cooc;
    const double secs = timed([&] { cooc = build_cooccurrence(b.counts); });
    ctx.log("co-occurrence over " + std::to_string(cooc.documents_used) + " documents, " +
            std::to_string(cooc.excluded.size()) + " excluded words (" + std::to_string(secs) + " s)");
    auto a = pack_cooccurrence(cooc);
    save_stage(ctx, a, key, std::move(up), json::object(), path);
}

void run_anchors(Context& ctx) {
    const auto corpus_art = load_stage(ctx, kCorpusFile, "corpus", "ingest");
    const auto cooc_art = load_stage(ctx, kCoocFile, "cooccurrence", "cooc");
    auto up = lineage({&corpus_art, &cooc_art});
    const auto b = unpack_corpus(corpus_art);
    const auto& ac = ctx.cfg.anchors;
    const std::size_t k = resolve_topic_count(ac, b.corpus);
    const bool tandem = ac.method == "tandem";
    json stage{{"method", ac.method}, {"k", k}};
    if (tandem) {
        stage["seed"] = ac.seed;
        stage["min_tokens"] = ac.tandem_min_tokens;
    } else {
        stage["candidate_min_df"] = ac.candidate_min_df;
    }
    const auto key = content_key("anchors", stage, up);
    const auto path = ctx.out / kAnchorsFile;
    if (up_to_date(ctx, path, key)) return ctx.log(path.string() + " is up to date");

    const auto cooc = unpack_cooccurrence(cooc_art);
    AnchorSet anchors;
    const double secs = timed([&] {
        anchors = tandem ? tandem_anchors(cooc, b.corpus, k, ac.seed, ac.tandem_min_tokens)
                         : gram_schmidt_anchors(cooc, k, ac.candidate_min_df, b.vocab.doc_freq);
    });
    ctx.log(std::to_string(anchors.size()) + " " + ac.method + " anchors (" + std::to_string(secs) + " s)");
    auto a = pack_anchors(anchors);
    a.meta["variant"] = ac.method;
    save_stage(ctx, a, key, std::move(up), stage, path);
}

void run_topics(Context& ctx) {
    const auto cooc_art = load_stage(ctx, kCoocFile, "cooccurrence", "cooc");
    const auto anchors_art = load_stage(ctx, kAnchorsFile, "anchors", "anchors");
    auto up = lineage({&cooc_art, &anchors_art});
    const auto& s = ctx.cfg.solver;
    const json stage{{"step_size", s.step_size}, {"tolerance", s.tolerance}, {"max_iters", s.max_iters}};
    const auto key = content_key("topics", stage, up);
    const auto path = ctx.out / kTopicsFile;
    if (up_to_date(ctx, path, key)) return ctx.log(path.string() + " is up to date");

    const auto cooc = unpack_cooccurrence(cooc_art);
    TopicModel model;
    const double secs = timed([&] { model = recover_topics(cooc, unpack_anchors(anchors_art), s); });
    std::size_t unconverged = 0;
    for (char c : model.converged) unconverged += c ? 0 : 1;
    ctx.log(std::to_string(model.topics()) + " topics recovered (" + std::to_string(secs) + " s), " +
            std::to_string(unconverged) + " words hit max_iters, " + std::to_string(model.flagged.size()) +
            " excluded words flagged");
    auto a = pack_topics(model);
    save_stage(ctx, a, key, std::move(up), stage, path);
}

void run_topics_show(Context& ctx, std::size_t topic, std::size_t top) {
    const auto corpus_art = load_stage(ctx, kCorpusFile, "corpus", "ingest");
    const auto topics_art = load_stage(ctx, kTopicsFile, "topics", "topics");
    lineage({&corpus_art, &topics_art});
    const auto b = unpack_corpus(corpus_art);
    const auto model = unpack_topics(topics_art);
    if (topic >= model.topics()) {
        throw Error("topic " + std::to_string(topic) + " out of range (model has " + std::to_string(model.topics()) +
                    ")");
    }
    std::printf("topic %zu  weight %.6g\n", topic, model.topic_weights(static_cast<Eigen::Index>(topic)));
    const auto& prov = model.anchors.provenance[topic];
    if (prov.word) std::printf("anchor word: %s\n", b.vocab.terms[*prov.word].c_str());
    if (prov.passage) std::printf("anchor passage: %s\n", b.corpus[*prov.passage].id.str().c_str());
    for (WordIndex w : top_words(model, topic, top)) {
        std::printf("%-20s %.6f\n", b.vocab.terms[w].c_str(),
                    model.topic_word(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(topic)));
    }
}

void run_infer(Context& ctx) {
    const auto corpus_art = load_stage(ctx, kCorpusFile, "corpus", "ingest");
    const auto topics_art = load_stage(ctx, kTopicsFile, "topics", "topics");
    auto up = lineage({&corpus_art, &topics_art});
    const auto& ic = ctx.cfg.inference;
    const json stage{{"alpha", ic.alpha}, {"tol", ic.tol}, {"max_iters", ic.max_iters}};
    const auto key = content_key("theta", stage, up);
    const auto path = ctx.out / kThetaFile;
    if (up_to_date(ctx, path, key)) return ctx.log(path.string() + " is up to date");

    const auto b = unpack_corpus(corpus_art);
    const auto model = unpack_topics(topics_art);
    ThetaMatrix theta;
    const double secs = timed([&] { theta = infer_corpus(b.counts, model, ic, &b.corpus); });
    std::size_t degenerate = 0, unconverged = 0;
    for (std::size_t d = 0; d < theta.degenerate.size(); ++d) {
        degenerate += theta.degenerate[d] ? 1 : 0;
        unconverged += theta.converged[d] ? 0 : 1;
    }
    ctx.log("inferred " + std::to_string(theta.theta.rows()) + " passages (" + std::to_string(secs) + " s), " +
            std::to_string(degenerate) + " empty, " + std::to_string(unconverged) + " hit max_iters");
    auto a = pack_theta(theta);
    save_stage(ctx, a, key, std::move(up), stage, path);
}

std::vector<SparseTheta> sparse_rows(const RowMatrix& theta, std::size_t support) {
    std::vector<SparseTheta> out(static_cast<std::size_t>(theta.rows()));
    parallel_for(out.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t d = begin; d < end; ++d) {
            out[d] = sparsify(theta.row(static_cast<Eigen::Index>(d)).transpose(), support);
        }
    });
    return out;
}

void run_candidates(Context& ctx, const fs::path& output) {
    const auto corpus_art = load_stage(ctx, kCorpusFile, "corpus", "ingest");
    const auto theta_art = load_stage(ctx, kThetaFile, "theta", "infer");
    auto up = lineage({&corpus_art, &theta_art});
    const auto& cc = ctx.cfg.candidates;
    if (!cc.top_n && !cc.threshold) throw Error("candidates needs --top-n or --threshold");
    const auto metric = parse_metric(cc.metric);
    const auto b = unpack_corpus(corpus_art);
    const auto theta = unpack_theta(theta_art);
    if (static_cast<std::size_t>(theta.theta.rows()) != b.corpus.size()) throw Error("theta and corpus disagree");

    CandidateSet set;
    const double secs = timed([&] {
        const auto rows = sparse_rows(theta.theta, cc.sparsity);
        set = generate_candidates(rows, metric, Selection{cc.top_n, cc.threshold}, cc.memory_budget);
    });
    for (const auto& w : set.warnings) std::cerr << "warning: " << w << '\n';
    ctx.log(std::to_string(set.pairs.size()) + " " + cc.metric + " candidates (" + std::to_string(secs) + " s)");
    write_atomic(output, [&](std::ostream& out) { write_candidates_csv(out, set, b.corpus); });
    const json sidecar{{"metric", cc.metric},
                       {"top_n", cc.top_n ? json(*cc.top_n) : json(nullptr)},
                       {"threshold", cc.threshold ? json(*cc.threshold) : json(nullptr)},
                       {"sparsity", cc.sparsity},
                       {"generation", set.generation},
                       {"warnings", set.warnings},
                       {"upstream", up},
                       {"rows", set.pairs.size()}};
    write_atomic(fs::path(output.string() + ".json"), [&](std::ostream& out) { out << sidecar.dump(2) << '\n'; });
    write_config(ctx);
    ctx.log("wrote " + output.string());
}

// Runs a baseline through its visitor; word-match needs only the corpus.
void with_baseline(const Context& ctx, Method method, const CorpusBundle& b,
                   const std::function<void(const std::function<void(const PartnerVisitor&)>&)>& use) {
    if (method == Method::word_match) {
        use([&](const PartnerVisitor& v) { visit_word_match(b.counts, v); });
        return;
    }
    if (method != Method::topic_match && method != Method::topic_word_match) {
        throw Error("baseline method must be word-match, topic-match or topic-word-match");
    }
    const auto theta = unpack_theta(load_stage(ctx, kThetaFile, "theta", "infer"));
    const auto assignment = topic_assignment(theta.theta);
    if (method == Method::topic_match) {
        use([&](const PartnerVisitor& v) { visit_topic_match(assignment, v); });
    } else {
        use([&](const PartnerVisitor& v) { visit_topic_word_match(assignment, b.counts, v); });
    }
}

void run_baseline(Context& ctx, const std::string& method_name, std::optional<fs::path> output) {
    const auto method = parse_method(method_name);
    const auto b = unpack_corpus(load_stage(ctx, kCorpusFile, "corpus", "ingest"));
    const fs::path path = output.value_or(ctx.out / ("baseline-" + method_name + ".csv"));
    std::uint64_t rows = 0;
    write_atomic(path, [&](std::ostream& out) {
        out << "rank,from,to,score,method\n";
        with_baseline(ctx, method, b, [&](const std::function<void(const PartnerVisitor&)>& run) {
            run([&](DocIndex from, std::span<const DocIndex> to) {
                const auto& f = b.corpus[from].id.str();
                for (DocIndex t : to) out << ++rows << ',' << f << ',' << b.corpus[t].id.str() << ",0," << method_name << '\n';
            });
        });
    });
    write_config(ctx);
    ctx.log("wrote " + std::to_string(rows) + " pairs to " + path.string());
}

GroundTruth load_gt(const Context& ctx, const Corpus& corpus) {
    const auto& e = ctx.cfg.eval;
    if (e.ground_truth.empty()) throw Error("eval needs --gt");
    std::ifstream in(e.ground_truth);
    if (!in) throw Error("cannot open ground truth " + e.ground_truth);
    return load_ground_truth(in, parse_ground_truth_format(e.format), corpus, e.min_votes, e.ground_truth);
}

void run_eval(Context& ctx, std::optional<fs::path> candidates, std::optional<std::string> baseline,
              std::optional<fs::path> curve_out) {
    const auto b = unpack_corpus(load_stage(ctx, kCorpusFile, "corpus", "ingest"));
    const auto gt = load_gt(ctx, b.corpus);
    ctx.log("ground truth: " + std::to_string(gt.size()) + " pairs from " + std::to_string(gt.lines) + " records (" +
            std::to_string(gt.unresolved) + " unresolved, " + std::to_string(gt.collapsed_ranges) +
            " range endpoints collapsed, " + std::to_string(gt.below_min_votes) + " below min votes)");

    EvalCurve c;
    std::string label;
    if (baseline) {
        label = *baseline;
        with_baseline(ctx, parse_method(*baseline), b, [&](const std::function<void(const PartnerVisitor&)>& run) {
            c = set_endpoint(run, b.corpus.size(), gt);
        });
    } else {
        const fs::path path = candidates.value_or(locate(ctx, kCandidatesFile, "candidates", "candidates"));
        std::ifstream in(path);
        if (!in) throw Error("cannot open candidates " + path.string());
        const auto set = read_candidates_csv(in, b.corpus);
        label = to_string(set.method);
        c = curve(set, gt);
    }
    const auto& last = c.points.back();
    const json summary{{"method", label},
                       {"positives", c.positives},
                       {"universe", c.universe},
                       {"k", last.k},
                       {"tp", last.tp},
                       {"precision", last.precision},
                       {"recall", last.recall},
                       {"fpr", last.fpr},
                       {"roc_auc", auc(c, AucKind::roc)},
                       {"prc_auc", auc(c, AucKind::prc)},
                       {"ground_truth",
                        {{"source", gt.source},
                         {"min_votes", gt.min_votes ? json(*gt.min_votes) : json(nullptr)},
                         {"records", gt.lines},
                         {"unresolved", gt.unresolved},
                         {"collapsed_ranges", gt.collapsed_ranges},
                         {"self_pairs", gt.self_pairs}}}};
    const fs::path curve_path = curve_out.value_or(ctx.out / kCurveFile);
    write_atomic(curve_path, [&](std::ostream& out) { write_curve_csv(out, downsample(c, ctx.cfg.eval.stride)); });
    write_atomic(fs::path(curve_path.string() + ".json"), [&](std::ostream& out) { out << summary.dump(2) << '\n'; });
    write_config(ctx);
    std::cout << summary.dump(2) << '\n';
}

EvalCurve read_curve_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingStage("missing curve " + path.string() + " (run `xrefgen eval` first)");
    std::string line;
    std::getline(in, line);
    if (line.rfind("k,tp,fp,fn,tn", 0) != 0) throw Error(path.string() + " is not a curve CSV");
    EvalCurve c;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        CurvePoint p;
        char comma = 0;
        if (!(row >> p.k >> comma >> p.tp >> comma >> p.fp >> comma >> p.fn >> comma >> p.tn)) {
            throw ParseError(lineno, "malformed curve row");
        }
        if (c.points.empty()) {
            c.positives = p.tp + p.fn;
            c.universe = p.tp + p.fp + p.fn + p.tn;
        }
        if (p.k != c.points.size() + 1) c.downsampled = true;
        c.points.push_back(make_point(p.k, p.tp, c.universe, c.positives));
    }
    if (c.points.empty()) throw Error(path.string() + " has no points");
    return c;
}

int run_cost(Context& ctx, std::optional<fs::path> curve_path, std::uint64_t target) {
    const auto c = read_curve_csv(curve_path.value_or(ctx.out / kCurveFile));
    const auto est = cost_estimate(c, target, ctx.cfg.eval.price);
    std::cout << json{{"target_tp", target}, {"k_needed", est.k_needed}, {"price", ctx.cfg.eval.price},
                      {"dollars", est.dollars}}
                     .dump(2)
              << '\n';
    return 0;
}

AnnotationServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

int run_serve(Context& ctx, std::optional<fs::path> candidates, std::optional<fs::path> log_path,
              ServiceConfig service, double jaccard) {
    const auto b = unpack_corpus(load_stage(ctx, kCorpusFile, "corpus", "ingest"));
    const fs::path path = candidates.value_or(locate(ctx, kCandidatesFile, "candidates", "candidates"));
    std::ifstream in(path);
    if (!in) throw Error("cannot open candidates " + path.string());
    auto set = read_candidates_csv(in, b.corpus);
    AnnotationStore store(std::move(set), b.corpus, log_path.value_or(ctx.out / "votes.jsonl").string(), jaccard);
    AnnotationServer server(store, service);
    const int port = server.bind();
    std::cerr << "serving " << store.size() << " candidates on http://" << service.host << ':' << port << " ("
              << store.replayed_votes() << " votes replayed)\n";
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.run();
    g_server = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-reference generation with anchor-word topic models"};
    app.require_subcommand(1);
    app.fallthrough();

    Context ctx;
    std::optional<std::string> config_path;
    std::string out_dir = "out";
    std::vector<std::string> in_dirs;
    unsigned threads = 0;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "JSON config file; flags override it");
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--in", in_dirs, "Extra directories searched for upstream artifacts");
    app.add_option("--threads", threads, "Worker cap (0 = all cores)");
    app.add_option("--seed", seed, "Random seed for tandem anchors");
    app.add_flag("--force", ctx.force, "Recompute even when the output is up to date");
    app.add_flag("-q,--quiet", ctx.quiet, "Suppress progress messages");

    // Flag values stay unset unless given, so they only override the config file.
    struct Overrides {
        std::optional<std::string> corpus, format, stemmer, stopwords;
        std::optional<std::uint32_t> min_df;
        std::optional<std::size_t> vocab_cap;
        bool no_lowercase = false;
        std::optional<std::string> method;
        std::optional<std::size_t> k;
        std::optional<std::uint32_t> candidate_min_df;
        std::optional<std::size_t> min_tokens;
        std::optional<double> step, solver_tol;
        std::optional<int> solver_iters;
        std::optional<double> alpha, infer_tol;
        std::optional<int> infer_iters;
        std::optional<std::string> metric;
        std::optional<std::uint64_t> top_n;
        std::optional<double> threshold;
        std::optional<std::size_t> sparsity, memory_budget;
        std::optional<std::string> gt, gt_format;
        std::optional<int> min_votes;
        std::optional<std::uint64_t> stride;
        std::optional<double> price;
    } o;

    auto* ingest = app.add_subcommand("ingest", "Parse a corpus, build the vocabulary and counts");
    ingest->add_option("--corpus", o.corpus, "Corpus file");
    ingest->add_option("--format", o.format, "verse-per-line, tsv or jsonl");
    ingest->add_option("--min-df", o.min_df, "Minimum document frequency");
    ingest->add_option("--vocab-cap", o.vocab_cap, "Maximum vocabulary size");
    ingest->add_option("--stemmer", o.stemmer, "porter or none");
    ingest->add_option("--stopwords", o.stopwords, "Stopword file replacing the built-in list");
    ingest->add_flag("--no-lowercase", o.no_lowercase, "Keep letter case");

    app.add_subcommand("cooc", "Build the word co-occurrence matrix");

    auto* anchors = app.add_subcommand("anchors", "Select anchors");
    anchors->add_option("--method", o.method, "gram-schmidt, tandem or coarse-proxy");
    anchors->add_option("--k", o.k, "Number of anchors / topics");
    anchors->add_option("--candidate-min-df", o.candidate_min_df, "Gram-Schmidt candidate document frequency");
    anchors->add_option("--min-tokens", o.min_tokens, "Tandem passage eligibility");

    auto* topics = app.add_subcommand("topics", "Recover the topic-word matrix");
    topics->add_option("--step", o.step, "Exponentiated-gradient step size");
    topics->add_option("--tol", o.solver_tol, "Solver tolerance");
    topics->add_option("--max-iters", o.solver_iters, "Solver iteration cap");
    auto* show = topics->add_subcommand("show", "Print the top words of a topic");
    std::size_t show_topic = 0, show_top = 10;
    show->add_option("--topic", show_topic, "Topic index")->required();
    show->add_option("--top", show_top, "Number of words")->capture_default_str();

    auto* infer = app.add_subcommand("infer", "Infer per-passage topic vectors");
    infer->add_option("--alpha", o.alpha, "Dirichlet concentration");
    infer->add_option("--tol", o.infer_tol, "Convergence tolerance");
    infer->add_option("--max-iters", o.infer_iters, "Iteration cap");

    auto* cands = app.add_subcommand("candidates", "Rank passage pairs by topic-vector distance");
    std::optional<std::string> cand_output;
    cands->add_option("--metric", o.metric, "cosine, euclidean, cityblock or chebyshev");
    cands->add_option("--top-n", o.top_n, "Keep the N closest ordered pairs");
    cands->add_option("--threshold", o.threshold, "Keep pairs with distance <= threshold");
    cands->add_option("--sparsity", o.sparsity, "Topics kept per passage");
    cands->add_option("--memory-budget", o.memory_budget, "Score buffer bytes");
    cands->add_option("--output", cand_output, "CSV path (default OUT/candidates.csv)");

    auto* baseline = app.add_subcommand("baseline", "Emit a baseline pair set");
    std::string baseline_method;
    std::optional<std::string> baseline_output;
    baseline->add_option("--method", baseline_method, "word-match, topic-match or topic-word-match")->required();
    baseline->add_option("--output", baseline_output, "CSV path");

    auto* eval = app.add_subcommand("eval", "Score a ranking against ground truth");
    std::optional<std::string> eval_candidates, eval_baseline, eval_curve;
    eval->add_option("--gt", o.gt, "Ground-truth file");
    eval->add_option("--gt-format", o.gt_format, "pairs-tsv or openbible-votes");
    eval->add_option("--min-votes", o.min_votes, "Minimum net votes");
    eval->add_option("--stride", o.stride, "Curve emission stride");
    eval->add_option("--candidates", eval_candidates, "Candidate CSV (default OUT/candidates.csv)");
    eval->add_option("--baseline", eval_baseline, "Evaluate a baseline set instead of a CSV");
    eval->add_option("--curve", eval_curve, "Curve CSV output (default OUT/curve.csv)");

    auto* cost = app.add_subcommand("cost", "Annotation cost to reach a number of true positives");
    std::optional<std::string> cost_curve;
    std::uint64_t target_tp = 12000;
    cost->add_option("--curve", cost_curve, "Full-resolution curve CSV (default OUT/curve.csv)");
    cost->add_option("--target-tp", target_tp, "True positives wanted")->capture_default_str();
    cost->add_option("--price", o.price, "Dollars per annotated candidate");

    auto* check = app.add_subcommand("check", "Recompute the false-positive count implied by a reported FPR");
    std::uint64_t check_docs = 31085, check_positives = 670796;
    double check_fpr = 0.196, check_reported = 188974806.0, check_tol = 0.005;
    check->add_option("--docs", check_docs)->capture_default_str();
    check->add_option("--positives", check_positives)->capture_default_str();
    check->add_option("--fpr", check_fpr)->capture_default_str();
    check->add_option("--reported", check_reported)->capture_default_str();
    check->add_option("--tolerance", check_tol)->capture_default_str();

    auto* serve = app.add_subcommand("serve", "Run the annotation service");
    ServiceConfig service;
    std::optional<std::string> serve_candidates, serve_log;
    double jaccard = kDefaultDuplicateJaccard;
    serve->add_option("--candidates", serve_candidates, "Candidate CSV (default OUT/candidates.csv)");
    serve->add_option("--log", serve_log, "Vote log (default OUT/votes.jsonl)");
    serve->add_option("--host", service.host)->capture_default_str();
    serve->add_option("--port", service.port)->capture_default_str();
    serve->add_option("--static", service.static_dir, "Directory of UI assets served at /");
    serve->add_option("--max-batch", service.max_batch)->capture_default_str();
    serve->add_option("--duplicate-jaccard", jaccard, "Token Jaccard at which pairs are flagged")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (config_path) ctx.cfg = load_config(*config_path);
        auto& c = ctx.cfg;
        auto set = [](auto& field, const auto& opt) {
            if (opt) field = *opt;
        };
        set(c.corpus.path, o.corpus);
        set(c.corpus.format, o.format);
        set(c.corpus.stemmer, o.stemmer);
        set(c.corpus.stopwords, o.stopwords);
        set(c.corpus.min_doc_freq, o.min_df);
        set(c.corpus.vocab_cap, o.vocab_cap);
        if (o.no_lowercase) c.corpus.lowercase = false;
        set(c.anchors.method, o.method);
        set(c.anchors.k, o.k);
        set(c.anchors.seed, seed);
        set(c.anchors.candidate_min_df, o.candidate_min_df);
        set(c.anchors.tandem_min_tokens, o.min_tokens);
        set(c.solver.step_size, o.step);
        set(c.solver.tolerance, o.solver_tol);
        set(c.solver.max_iters, o.solver_iters);
        set(c.inference.alpha, o.alpha);
        set(c.inference.tol, o.infer_tol);
        set(c.inference.max_iters, o.infer_iters);
        set(c.candidates.metric, o.metric);
        if (o.top_n && o.threshold) throw Error("--top-n and --threshold are mutually exclusive");
        if (o.top_n) {
            c.candidates.top_n = o.top_n;
            c.candidates.threshold.reset();
        }
        if (o.threshold) {
            c.candidates.threshold = o.threshold;
            c.candidates.top_n.reset();
        }
        set(c.candidates.sparsity, o.sparsity);
        set(c.candidates.memory_budget, o.memory_budget);
        set(c.eval.ground_truth, o.gt);
        set(c.eval.format, o.gt_format);
        if (o.min_votes) c.eval.min_votes = o.min_votes;
        set(c.eval.stride, o.stride);
        set(c.eval.price, o.price);
        c.validate();

        set_thread_count(threads);
        ctx.out = out_dir;
        for (const auto& d : in_dirs) ctx.inputs.emplace_back(d);
        fs::create_directories(ctx.out);

        if (*ingest) run_ingest(ctx);
        else if (app.got_subcommand("cooc")) run_cooc(ctx);
        else if (*anchors) run_anchors(ctx);
        else if (*show) run_topics_show(ctx, show_topic, show_top);
        else if (*topics) run_topics(ctx);
        else if (*infer) run_infer(ctx);
        else if (*cands) run_candidates(ctx, cand_output ? fs::path(*cand_output) : ctx.out / kCandidatesFile);
        else if (*baseline) run_baseline(ctx, baseline_method, baseline_output);
        else if (*eval) {
            run_eval(ctx, eval_candidates, eval_baseline, eval_curve);
        } else if (*cost) {
            return run_cost(ctx, cost_curve, target_tp);
        } else if (*check) {
            const double rel = consistency_check(check_positives, check_docs, check_fpr, check_reported);
            std::printf("implied false positives %.0f, reported %.0f, relative error %.6f\n",
                        check_fpr * (static_cast<double>(check_docs) * static_cast<double>(check_docs - 1) -
                                     static_cast<double>(check_positives)),
                        check_reported, rel);
            return rel < check_tol ? 0 : 1;
        } else if (*serve) {
            return run_serve(ctx, serve_candidates, serve_log, service, jaccard);
        }
        return 0;
    } catch (const MissingStage& e) {
        std::cerr << "xrefgen: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "xrefgen: error: " << e.what() << '\n';
        return 1;
    }
}
