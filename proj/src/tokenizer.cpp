#include "xref/tokenizer.hpp"

#include "xref/common.hpp"
#include "xref/porter.hpp"

#include <fstream>

namespace xref {

namespace {

constexpr const char* kStopwords[] = {
    "a", "about", "above", "after", "again", "against", "ain", "all", "am", "an", "and", "any",
    "are", "aren", "as", "at", "be", "because", "been", "before", "being", "below", "between",
    "both", "but", "by", "can", "couldn", "d", "did", "didn", "do", "does", "doesn", "doing",
    "don", "down", "during", "each", "few", "for", "from", "further", "had", "hadn", "has",
    "hasn", "have", "haven", "having", "he", "her", "here", "hers", "herself", "him",
    "himself", "his", "how", "i", "if", "in", "into", "is", "isn", "it", "its", "itself",
    "just", "ll", "m", "ma", "me", "mightn", "more", "most", "mustn", "my", "myself", "needn",
    "no", "nor", "not", "now", "o", "of", "off", "on", "once", "only", "or", "other", "our",
    "ours", "ourselves", "out", "over", "own", "re", "s", "same", "shan", "she", "should",
    "shouldn", "so", "some", "such", "t", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
    "under", "until", "up", "ve", "very", "was", "wasn", "we", "were", "weren", "what", "when",
    "where", "which", "while", "who", "whom", "why", "will", "with", "won", "wouldn", "y",
    "you", "your", "yours", "yourself", "yourselves",
    // Early Modern English forms
    "art", "canst", "didst", "doth", "dost", "hast", "hath", "shalt", "shall", "thee", "thou",
    "thy", "thine", "thyself", "unto", "ye", "wilt", "wouldest", "yea", "hadst", "saith",
    "upon", "also", "let", "even", "may", "might", "would", "could", "must",
};

bool is_word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

std::unordered_set<std::string> TokenizerConfig::default_stopwords() {
    return {std::begin(kStopwords), std::end(kStopwords)};
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        const std::size_t start = i;
        while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        if (start == i) break;
        std::string word(text.substr(start, i - start));
        if (config.lowercase) {
            for (char& c : word) {
                if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            }
        }
        if (config.stopwords.contains(word)) continue;
        if (config.stemmer == Stemmer::porter) word = porter_stem(std::move(word));
        out.push_back(std::move(word));
    }
    return out;
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open stoplist " + path);
    std::unordered_set<std::string> words;
    std::string w;
    while (in >> w) words.insert(w);
    return words;
}

}  // namespace xref
