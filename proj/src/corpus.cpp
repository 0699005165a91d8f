#include "xref/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <istream>
#include <map>

namespace xref {

namespace {

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t extra = 0;
        if (c < 0x80) {
            extra = 0;
        } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
            extra = 1;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
        } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
            extra = 3;
        } else {
            return false;
        }
        if (i + extra >= s.size() && extra > 0) return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        }
        i += extra + 1;
    }
    return true;
}

std::string_view trim_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

}  // namespace

CorpusFormat parse_corpus_format(const std::string& name) {
    if (name == "verse-per-line") return CorpusFormat::verse_per_line;
    if (name == "tsv") return CorpusFormat::tsv;
    if (name == "jsonl") return CorpusFormat::jsonl;
    throw Error("unknown corpus format '" + name + "' (expected verse-per-line, tsv or jsonl)");
}

Corpus::Corpus(std::vector<Passage> passages) : passages_(std::move(passages)) {
    for (std::size_t d = 0; d < passages_.size(); ++d) {
        const auto key = passages_[d].id.str();
        if (!by_id_.emplace(key, static_cast<DocIndex>(d)).second) {
            throw Error("duplicate passage id " + key);
        }
        by_key_.emplace(passages_[d].id.resolution_key(), static_cast<DocIndex>(d));
    }
}

std::optional<DocIndex> Corpus::position(const PassageId& id) const {
    auto it = by_id_.find(id.str());
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

std::optional<DocIndex> Corpus::resolve(const PassageId& id) const {
    if (auto exact = position(id)) return exact;
    auto it = by_key_.find(id.resolution_key());
    if (it == by_key_.end()) return std::nullopt;
    return it->second;
}

Corpus parse_corpus(std::istream& in, CorpusFormat format) {
    std::vector<Passage> passages;
    std::map<std::string, std::size_t> seen;  // id -> line
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view view = trim_cr(line);
        if (view.find_first_not_of(" \t") == std::string_view::npos) continue;
        if (!valid_utf8(view)) throw ParseError(lineno, "invalid UTF-8");

        std::string id_text;
        std::string text;
        if (format == CorpusFormat::jsonl) {
            nlohmann::json record;
            try {
                record = nlohmann::json::parse(view);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(lineno, std::string("malformed JSON record: ") + e.what());
            }
            if (!record.is_object() || !record.contains("id") || !record.contains("text") ||
                !record["text"].is_string()) {
                throw ParseError(lineno, "record needs an \"id\" and a string \"text\" field");
            }
            const auto& id = record["id"];
            if (id.is_string()) {
                id_text = id.get<std::string>();
            } else if (id.is_number_integer()) {
                id_text = std::to_string(id.get<long long>());
            } else {
                throw ParseError(lineno, "\"id\" must be a string or integer");
            }
            text = record["text"].get<std::string>();
        } else {
            const char sep = format == CorpusFormat::tsv ? '\t' : ' ';
            const auto cut = format == CorpusFormat::tsv ? view.find(sep) : view.find_first_of(" \t");
            if (cut == std::string_view::npos || cut == 0) {
                throw ParseError(lineno, "expected <id><separator><text>");
            }
            id_text = std::string(view.substr(0, cut));
            text = std::string(view.substr(cut + 1));
        }
        if (id_text.empty()) throw ParseError(lineno, "empty passage id");
        PassageId id = PassageId::parse(id_text);
        auto [it, inserted] = seen.emplace(id.str(), lineno);
        if (!inserted) {
            throw ParseError(lineno, "duplicate id " + id.str() + " (first seen on line " +
                                         std::to_string(it->second) + ")");
        }
        passages.push_back(Passage{std::move(id), std::move(text), {}});
    }
    return Corpus(std::move(passages));
}

std::optional<WordIndex> Vocabulary::find(const std::string& term) const {
    auto it = index.find(term);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

Vocabulary build_vocabulary(const Corpus& corpus, const TokenizerConfig& config,
                            std::uint32_t min_doc_freq, std::size_t max_size) {
    if (min_doc_freq < 1) throw Error("min_doc_freq must be at least 1");

    std::vector<std::vector<std::string>> tokens(corpus.size());
    parallel_for(corpus.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t d = begin; d < end; ++d) {
            tokens[d] = tokenize(corpus[static_cast<DocIndex>(d)].raw_text, config);
        }
    });

    struct Stats {
        std::uint32_t df = 0;
        std::uint64_t cf = 0;
        std::size_t last_doc = static_cast<std::size_t>(-1);
    };
    std::unordered_map<std::string, Stats> stats;
    for (std::size_t d = 0; d < tokens.size(); ++d) {
        for (const auto& t : tokens[d]) {
            auto& s = stats[t];
            s.cf += 1;
            if (s.last_doc != d) {
                s.df += 1;
                s.last_doc = d;
            }
        }
    }

    std::vector<std::pair<std::string, Stats>> kept;
    for (auto& [term, s] : stats) {
        if (s.df >= min_doc_freq) kept.emplace_back(term, s);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second.cf != b.second.cf) return a.second.cf > b.second.cf;
        return a.first < b.first;
    });
    if (kept.size() > max_size) kept.resize(max_size);
    if (kept.empty()) throw Error("vocabulary empty after pruning");

    Vocabulary vocab;
    vocab.terms.reserve(kept.size());
    for (auto& [term, s] : kept) {
        vocab.index.emplace(term, static_cast<WordIndex>(vocab.terms.size()));
        vocab.terms.push_back(term);
        vocab.doc_freq.push_back(s.df);
        vocab.corpus_freq.push_back(s.cf);
    }
    return vocab;
}

void assign_tokens(Corpus& corpus, const Vocabulary& vocab, const TokenizerConfig& config) {
    parallel_for(corpus.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t d = begin; d < end; ++d) {
            auto& passage = corpus[static_cast<DocIndex>(d)];
            passage.tokens.clear();
            for (const auto& t : tokenize(passage.raw_text, config)) {
                if (auto w = vocab.find(t)) passage.tokens.push_back(*w);
            }
        }
    });
}

DocTermCounts build_doc_term(const Corpus& corpus, const Vocabulary& vocab) {
    DocTermCounts counts;
    counts.vocab_size = vocab.size();
    counts.row_ptr.reserve(corpus.size() + 1);
    counts.lengths.reserve(corpus.size());
    std::vector<WordIndex> sorted;
    for (const auto& passage : corpus.passages()) {
        sorted = passage.tokens;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size();) {
            std::size_t j = i;
            while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
            if (sorted[i] >= vocab.size()) throw Error("token index out of vocabulary range");
            counts.cols.push_back(sorted[i]);
            counts.vals.push_back(static_cast<std::uint32_t>(j - i));
            i = j;
        }
        counts.row_ptr.push_back(counts.cols.size());
        counts.lengths.push_back(static_cast<std::uint32_t>(sorted.size()));
    }
    return counts;
}

}  // namespace xref
