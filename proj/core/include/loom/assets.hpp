#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "loom/types.hpp"

namespace loom {

// Text assets (phrase banks and prompt templates) compiled into the library.
// Names are paths relative to the asset root, e.g. "phrases/diary_events.txt".

// Returns the full content of a named asset. Throws IoError if unknown.
std::string_view asset_text(std::string_view name);

// Sorted names of all embedded assets.
std::vector<std::string> asset_names();

// Non-empty trimmed lines of a named asset.
std::vector<std::string> asset_lines(std::string_view name);

// Scenario phrase banks. Events are the distinctive phrases constraints
// schedule; fillers are the mundane padding that must never contain one.
const std::vector<std::string>& scenario_events(Scenario scenario);
const std::vector<std::string>& scenario_fillers(Scenario scenario);

}  // namespace loom
