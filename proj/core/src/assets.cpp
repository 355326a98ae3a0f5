#include "loom/assets.hpp"

#include <map>

#include "loom/errors.hpp"
#include "loom/text.hpp"

namespace loom {
namespace {

const std::map<std::string, std::string_view, std::less<>>& asset_table() {
  static const std::map<std::string, std::string_view, std::less<>> table = {
#include "embedded_assets.inc"
  };
  return table;
}

}  // namespace

std::string_view asset_text(std::string_view name) {
  const auto& table = asset_table();
  auto it = table.find(name);
  if (it == table.end()) {
    throw IoError("unknown asset: " + std::string(name));
  }
  return it->second;
}

std::vector<std::string> asset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : asset_table()) {
    names.push_back(name);
  }
  return names;
}

const std::vector<std::string>& scenario_events(Scenario scenario) {
  static const auto diary = asset_lines("phrases/diary_events.txt");
  static const auto floor = asset_lines("phrases/floor_events.txt");
  static const auto menu = asset_lines("phrases/menu_events.txt");
  static const auto block = asset_lines("phrases/block_events.txt");
  switch (scenario) {
    case Scenario::Diary: return diary;
    case Scenario::Floor: return floor;
    case Scenario::Menu: return menu;
    case Scenario::Block: return block;
  }
  return diary;
}

const std::vector<std::string>& scenario_fillers(Scenario scenario) {
  static const auto diary = asset_lines("phrases/diary_fillers.txt");
  static const auto floor = asset_lines("phrases/floor_fillers.txt");
  static const auto menu = asset_lines("phrases/menu_fillers.txt");
  static const auto block = asset_lines("phrases/block_fillers.txt");
  switch (scenario) {
    case Scenario::Diary: return diary;
    case Scenario::Floor: return floor;
    case Scenario::Menu: return menu;
    case Scenario::Block: return block;
  }
  return diary;
}

std::vector<std::string> asset_lines(std::string_view name) {
  std::string_view text = asset_text(name);
  std::vector<std::string> lines;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    size_t end = nl == std::string_view::npos ? text.size() : nl;
    std::string line = trim(std::string(text.substr(pos, end - pos)));
    if (!line.empty()) {
      lines.push_back(std::move(line));
    }
    if (nl == std::string_view::npos) {
      break;
    }
    pos = nl + 1;
  }
  return lines;
}

}  // namespace loom
