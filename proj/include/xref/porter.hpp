#pragma once

#include <string>

namespace xref {

/// Porter (1980) suffix-stripping stemmer for lowercase ASCII words. Words of
/// two letters or fewer are returned unchanged.
std::string porter_stem(std::string word);

}  // namespace xref
