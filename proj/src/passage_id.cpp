#include "xref/passage_id.hpp"

#include "xref/common.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <unordered_map>

namespace xref {

namespace {

struct BookNames {
    const char* code;
    std::array<const char*, 4> aliases;
};

// OSIS codes with the full names and abbreviations seen in common datasets.
constexpr std::array<BookNames, 66> kBooks{{
    {"Gen", {"Genesis", "Gn", "Ge", nullptr}},
    {"Exod", {"Exodus", "Ex", "Exo", nullptr}},
    {"Lev", {"Leviticus", "Lv", nullptr, nullptr}},
    {"Num", {"Numbers", "Nm", "Nu", nullptr}},
    {"Deut", {"Deuteronomy", "Dt", "Deu", nullptr}},
    {"Josh", {"Joshua", "Jos", nullptr, nullptr}},
    {"Judg", {"Judges", "Jdg", "Jg", nullptr}},
    {"Ruth", {"Ru", "Rth", nullptr, nullptr}},
    {"1Sam", {"1 Samuel", "1Sa", "1Sm", nullptr}},
    {"2Sam", {"2 Samuel", "2Sa", "2Sm", nullptr}},
    {"1Kgs", {"1 Kings", "1Ki", "1Kg", nullptr}},
    {"2Kgs", {"2 Kings", "2Ki", "2Kg", nullptr}},
    {"1Chr", {"1 Chronicles", "1Ch", nullptr, nullptr}},
    {"2Chr", {"2 Chronicles", "2Ch", nullptr, nullptr}},
    {"Ezra", {"Ezr", nullptr, nullptr, nullptr}},
    {"Neh", {"Nehemiah", "Ne", nullptr, nullptr}},
    {"Esth", {"Esther", "Est", nullptr, nullptr}},
    {"Job", {"Jb", nullptr, nullptr, nullptr}},
    {"Ps", {"Psalms", "Psalm", "Psa", nullptr}},
    {"Prov", {"Proverbs", "Pr", "Pro", nullptr}},
    {"Eccl", {"Ecclesiastes", "Ecc", "Qoh", nullptr}},
    {"Song", {"Song of Solomon", "Solomon's Song", "Song of Songs", "SS"}},
    {"Isa", {"Isaiah", "Is", nullptr, nullptr}},
    {"Jer", {"Jeremiah", "Je", nullptr, nullptr}},
    {"Lam", {"Lamentations", "La", nullptr, nullptr}},
    {"Ezek", {"Ezekiel", "Eze", "Ezk", nullptr}},
    {"Dan", {"Daniel", "Da", "Dn", nullptr}},
    {"Hos", {"Hosea", "Ho", nullptr, nullptr}},
    {"Joel", {"Jl", nullptr, nullptr, nullptr}},
    {"Amos", {"Am", nullptr, nullptr, nullptr}},
    {"Obad", {"Obadiah", "Ob", "Oba", nullptr}},
    {"Jonah", {"Jon", "Jnh", nullptr, nullptr}},
    {"Mic", {"Micah", "Mi", nullptr, nullptr}},
    {"Nah", {"Nahum", "Na", nullptr, nullptr}},
    {"Hab", {"Habakkuk", nullptr, nullptr, nullptr}},
    {"Zeph", {"Zephaniah", "Zep", nullptr, nullptr}},
    {"Hag", {"Haggai", nullptr, nullptr, nullptr}},
    {"Zech", {"Zechariah", "Zec", nullptr, nullptr}},
    {"Mal", {"Malachi", nullptr, nullptr, nullptr}},
    {"Matt", {"Matthew", "Mt", "Mat", nullptr}},
    {"Mark", {"Mk", "Mr", "Mar", nullptr}},
    {"Luke", {"Lk", "Lu", "Luk", nullptr}},
    {"John", {"Jn", "Joh", "Jhn", nullptr}},
    {"Acts", {"Ac", "Act", nullptr, nullptr}},
    {"Rom", {"Romans", "Ro", "Rm", nullptr}},
    {"1Cor", {"1 Corinthians", "1Co", nullptr, nullptr}},
    {"2Cor", {"2 Corinthians", "2Co", nullptr, nullptr}},
    {"Gal", {"Galatians", "Ga", nullptr, nullptr}},
    {"Eph", {"Ephesians", nullptr, nullptr, nullptr}},
    {"Phil", {"Philippians", "Php", "Pp", nullptr}},
    {"Col", {"Colossians", nullptr, nullptr, nullptr}},
    {"1Thess", {"1 Thessalonians", "1Th", "1Thes", nullptr}},
    {"2Thess", {"2 Thessalonians", "2Th", "2Thes", nullptr}},
    {"1Tim", {"1 Timothy", "1Ti", "1Tm", nullptr}},
    {"2Tim", {"2 Timothy", "2Ti", "2Tm", nullptr}},
    {"Titus", {"Tit", nullptr, nullptr, nullptr}},
    {"Phlm", {"Philemon", "Phm", "Philem", nullptr}},
    {"Heb", {"Hebrews", nullptr, nullptr, nullptr}},
    {"Jas", {"James", "Jm", nullptr, nullptr}},
    {"1Pet", {"1 Peter", "1Pe", "1Pt", nullptr}},
    {"2Pet", {"2 Peter", "2Pe", "2Pt", nullptr}},
    {"1John", {"1 John", "1Jn", "1Jo", nullptr}},
    {"2John", {"2 John", "2Jn", "2Jo", nullptr}},
    {"3John", {"3 John", "3Jn", "3Jo", nullptr}},
    {"Jude", {"Jud", "Jd", nullptr, nullptr}},
    {"Rev", {"Revelation", "Re", "Rv", nullptr}},
}};

std::string fold_book(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (unsigned char c : name) {
        if (std::isalnum(c)) out += static_cast<char>(std::tolower(c));
    }
    return out;
}

const std::unordered_map<std::string, std::string>& book_table() {
    static const auto table = [] {
        std::unordered_map<std::string, std::string> t;
        for (const auto& b : kBooks) {
            t.emplace(fold_book(b.code), b.code);
            for (const char* alias : b.aliases) {
                if (alias != nullptr) t.emplace(fold_book(alias), b.code);
            }
        }
        return t;
    }();
    return table;
}

// Positive decimal without leading zeros or sign.
std::optional<int> canonical_positive(std::string_view s) {
    if (s.empty() || s.size() > 9 || s.front() == '0') return std::nullopt;
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || value <= 0) return std::nullopt;
    return value;
}

}  // namespace

PassageId PassageId::verse(std::string book, int chapter, int verse) {
    if (book.empty() || chapter <= 0 || verse <= 0) {
        throw Error("invalid verse id: book must be non-empty, chapter and verse positive");
    }
    PassageId id;
    id.book_ = std::move(book);
    id.chapter_ = chapter;
    id.verse_ = verse;
    return id;
}

PassageId PassageId::generic(std::string id) {
    if (id.empty()) throw Error("empty passage id");
    PassageId out;
    out.book_ = std::move(id);
    return out;
}

PassageId PassageId::parse(std::string_view text) {
    if (text.empty()) throw Error("empty passage id");
    const auto last = text.rfind('.');
    if (last != std::string_view::npos && last > 0) {
        const auto mid = text.rfind('.', last - 1);
        if (mid != std::string_view::npos && mid > 0) {
            auto chapter = canonical_positive(text.substr(mid + 1, last - mid - 1));
            auto verse = canonical_positive(text.substr(last + 1));
            if (chapter && verse) {
                return PassageId::verse(std::string(text.substr(0, mid)), *chapter, *verse);
            }
        }
    }
    return PassageId::generic(std::string(text));
}

std::string PassageId::str() const {
    if (!is_verse()) return book_;
    return book_ + "." + std::to_string(chapter_) + "." + std::to_string(verse_);
}

std::string PassageId::resolution_key() const {
    if (!is_verse()) return book_;
    const auto code = canonical_book(book_);
    return (code ? *code : fold_book(book_)) + "." + std::to_string(chapter_) + "." +
           std::to_string(verse_);
}

std::optional<std::string> canonical_book(std::string_view name) {
    const auto& table = book_table();
    auto it = table.find(fold_book(name));
    if (it == table.end()) return std::nullopt;
    return it->second;
}

PassageId parse_reference(std::string_view text, bool* collapsed) {
    const auto dash = text.find('-');
    if (collapsed != nullptr) *collapsed = dash != std::string_view::npos;
    return PassageId::parse(text.substr(0, dash));
}

}  // namespace xref
