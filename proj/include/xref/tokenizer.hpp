#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace xref {

enum class Stemmer { none, porter };

struct TokenizerConfig {
    bool lowercase = true;
    std::unordered_set<std::string> stopwords = default_stopwords();
    Stemmer stemmer = Stemmer::porter;

    /// Built-in English stoplist: common function words plus the archaic
    /// pronoun and verb forms of Early Modern English (thee, hath, ...).
    static std::unordered_set<std::string> default_stopwords();
};

/// Splits on every byte that is not an ASCII letter (bytes >= 0x80 are kept
/// as word characters), drops stopwords, then stems. Deterministic.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config);

/// Reads a whitespace-separated stoplist file.
std::unordered_set<std::string> load_stopwords(const std::string& path);

}  // namespace xref
