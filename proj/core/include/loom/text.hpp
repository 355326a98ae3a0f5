#pragma once

#include <string>
#include <string_view>

namespace loom {

// Case folding covers ASCII letters; other bytes pass through unchanged.
std::string fold_case(std::string_view s);

// Collapses runs of whitespace to a single space and trims both ends.
std::string normalize_whitespace(std::string_view s);

std::string trim(std::string_view s);

// Substring match on whitespace-normalized text, case-folded unless
// case_sensitive. Empty phrases never match.
bool contains_phrase(std::string_view text, std::string_view phrase, bool case_sensitive = false);

bool starts_with(std::string_view s, std::string_view prefix);

}  // namespace loom
