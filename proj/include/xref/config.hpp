#pragma once

#include "xref/anchors.hpp"
#include "xref/candidates.hpp"
#include "xref/corpus.hpp"
#include "xref/inference.hpp"
#include "xref/tokenizer.hpp"
#include "xref/topics.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace xref {

inline constexpr std::size_t kBibleTopics = 3000;
inline constexpr std::size_t kCoarseProxyTopics = 100;

/// Every experiment knob of the pipeline. Serializes to one JSON file; each
/// stage hashes only the sections it reads.
struct PipelineConfig {
    struct CorpusSection {
        std::string path;
        std::string format = "tsv";
        bool lowercase = true;
        std::string stemmer = "porter";
        std::string stopwords;  // file path; empty means the built-in list
        std::uint32_t min_doc_freq = 2;
        std::size_t vocab_cap = kDefaultVocabularyCap;
    } corpus;

    struct AnchorSection {
        std::string method = "tandem";  // gram-schmidt, tandem or coarse-proxy
        std::size_t k = 0;              // 0 picks a default from the corpus
        std::uint64_t seed = 42;
        std::uint32_t candidate_min_df = kDefaultCandidateMinDf;
        std::size_t tandem_min_tokens = kDefaultTandemMinTokens;
    } anchors;

    SolverConfig solver;
    InferenceConfig inference;

    struct CandidateSection {
        std::string metric = "cosine";
        std::optional<std::uint64_t> top_n;
        std::optional<double> threshold;
        std::size_t sparsity = kDefaultSparsity;
        std::size_t memory_budget = kDefaultMemoryBudget;
    } candidates;

    struct EvalSection {
        std::string ground_truth;
        std::string format = "pairs-tsv";
        std::optional<int> min_votes;
        std::uint64_t stride = 1;
        double price = 0.05;
    } eval;

    void validate() const;
};

nlohmann::json to_json(const PipelineConfig& c);
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& c, const std::string& path);

TokenizerConfig tokenizer_config(const PipelineConfig::CorpusSection& c);

/// The anchor count actually used: an explicit k, 100 for coarse-proxy, 3000
/// for a corpus of verse ids, otherwise ceil(D / 10).
std::size_t resolve_topic_count(const PipelineConfig::AnchorSection& a, const Corpus& corpus);

}  // namespace xref
