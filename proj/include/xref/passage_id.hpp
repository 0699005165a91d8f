#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace xref {

/// Identifier of a passage. Scripture-style ids carry book, chapter and verse
/// (`Isaiah.25.8`); anything else is kept as an opaque generic id.
class PassageId {
public:
    PassageId() = default;

    static PassageId verse(std::string book, int chapter, int verse);
    static PassageId generic(std::string id);

    /// Parses `Book.C.V` (positive, canonical decimal C and V); any other
    /// non-empty string becomes a generic id. Throws on an empty string.
    static PassageId parse(std::string_view text);

    bool is_verse() const noexcept { return chapter_ > 0; }
    const std::string& book() const noexcept { return book_; }
    int chapter() const noexcept { return chapter_; }
    int verse_number() const noexcept { return verse_; }

    std::string str() const;

    /// Key used to match ids across datasets that spell book names differently
    /// (`Isaiah.25.8`, `Isa.25.8` and `isa.25.8` share a key).
    std::string resolution_key() const;

    friend bool operator==(const PassageId&, const PassageId&) = default;
    friend auto operator<=>(const PassageId&, const PassageId&) = default;

private:
    std::string book_;  // whole id for generic ids
    int chapter_ = 0;
    int verse_ = 0;
};

/// Canonical short book code (OSIS style, e.g. `1Cor`) for a book name or
/// abbreviation, if known.
std::optional<std::string> canonical_book(std::string_view name);

/// Parses one endpoint of a reference that may be a range (`Gen.1.1-Gen.1.3`);
/// ranges collapse to their first verse. `collapsed` reports whether a range
/// was seen.
PassageId parse_reference(std::string_view text, bool* collapsed = nullptr);

}  // namespace xref
