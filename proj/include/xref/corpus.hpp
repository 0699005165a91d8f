#pragma once

#include "xref/common.hpp"
#include "xref/passage_id.hpp"
#include "xref/tokenizer.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace xref {

struct Passage {
    PassageId id;
    std::string raw_text;
    std::vector<WordIndex> tokens;  // vocabulary indices, filled by assign_tokens
};

enum class CorpusFormat { verse_per_line, tsv, jsonl };

CorpusFormat parse_corpus_format(const std::string& name);

/// Passages in file order with an id lookup table.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<Passage> passages);

    std::size_t size() const noexcept { return passages_.size(); }
    bool empty() const noexcept { return passages_.empty(); }
    const Passage& operator[](DocIndex d) const { return passages_[d]; }
    Passage& operator[](DocIndex d) { return passages_[d]; }
    const std::vector<Passage>& passages() const noexcept { return passages_; }

    /// Corpus position of an id, matching on the exact id string.
    std::optional<DocIndex> position(const PassageId& id) const;

    /// Corpus position of an id, tolerating alternate book spellings.
    std::optional<DocIndex> resolve(const PassageId& id) const;

private:
    std::vector<Passage> passages_;
    std::unordered_map<std::string, DocIndex> by_id_;
    std::unordered_map<std::string, DocIndex> by_key_;
};

/// Reads passages from `in`. Errors carry the 1-based line number of the
/// offending record.
Corpus parse_corpus(std::istream& in, CorpusFormat format);

struct Vocabulary {
    std::vector<std::string> terms;
    std::unordered_map<std::string, WordIndex> index;
    std::vector<std::uint32_t> doc_freq;
    std::vector<std::uint64_t> corpus_freq;

    std::size_t size() const noexcept { return terms.size(); }
    std::optional<WordIndex> find(const std::string& term) const;
};

inline constexpr std::size_t kDefaultVocabularyCap = 15000;

/// Keeps terms appearing in at least `min_doc_freq` passages, at most
/// `max_size` of them. Indices follow descending corpus frequency, ties by
/// term. Throws when nothing survives.
Vocabulary build_vocabulary(const Corpus& corpus, const TokenizerConfig& config,
                            std::uint32_t min_doc_freq,
                            std::size_t max_size = kDefaultVocabularyCap);

/// Fills every passage's token list with in-vocabulary indices.
void assign_tokens(Corpus& corpus, const Vocabulary& vocab, const TokenizerConfig& config);

/// Sparse D x V counts in CSR layout; columns ascend within a row.
struct DocTermCounts {
    std::size_t vocab_size = 0;
    std::vector<std::uint64_t> row_ptr{0};
    std::vector<WordIndex> cols;
    std::vector<std::uint32_t> vals;
    std::vector<std::uint32_t> lengths;  // n_d

    std::size_t docs() const noexcept { return lengths.size(); }
    std::size_t nonzeros() const noexcept { return cols.size(); }
    std::span<const WordIndex> row_cols(DocIndex d) const {
        return {cols.data() + row_ptr[d], cols.data() + row_ptr[d + 1]};
    }
    std::span<const std::uint32_t> row_vals(DocIndex d) const {
        return {vals.data() + row_ptr[d], vals.data() + row_ptr[d + 1]};
    }
};

DocTermCounts build_doc_term(const Corpus& corpus, const Vocabulary& vocab);

}  // namespace xref
