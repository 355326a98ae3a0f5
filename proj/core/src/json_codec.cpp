#include "loom/json_codec.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "loom/errors.hpp"
#include "loom/text.hpp"

namespace loom {
namespace {

using ordered_json = nlohmann::ordered_json;

// SAX pass that records every key of the object stored under the top-level
// "units" key, duplicates included. The DOM parser silently keeps only the
// last value for a repeated key, so duplicate detection has to happen here.
struct UnitKeyCollector : nlohmann::json::json_sax_t {
  int depth = 0;
  bool in_units = false;
  int units_depth = -1;
  std::string pending_key;
  std::vector<std::string> unit_keys;

  bool record_scalar() { return true; }
  bool null() override { return record_scalar(); }
  bool boolean(bool) override { return record_scalar(); }
  bool number_integer(number_integer_t) override { return record_scalar(); }
  bool number_unsigned(number_unsigned_t) override { return record_scalar(); }
  bool number_float(number_float_t, const string_t&) override { return record_scalar(); }
  bool string(string_t&) override { return record_scalar(); }
  bool binary(binary_t&) override { return record_scalar(); }

  bool start_object(std::size_t) override {
    if (depth == 1 && pending_key == "units" && !in_units) {
      in_units = true;
      units_depth = depth + 1;
    }
    ++depth;
    return true;
  }
  bool key(string_t& val) override {
    pending_key = val;
    if (in_units && depth == units_depth) unit_keys.push_back(val);
    return true;
  }
  bool end_object() override {
    --depth;
    if (in_units && depth < units_depth) in_units = false;
    return true;
  }
  bool start_array(std::size_t) override {
    ++depth;
    return true;
  }
  bool end_array() override {
    --depth;
    return true;
  }
  bool parse_error(std::size_t, const std::string&,
                   const nlohmann::detail::exception& ex) override {
    throw ParseError(std::string("plan JSON malformed: ") + ex.what());
  }
};

int parse_unit_key(const std::string& key) {
  int value = 0;
  const char* begin = key.data();
  const char* end = begin + key.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw SchemaError("non-integer unit key: \"" + key + "\"");
  }
  return value;
}

std::string join_units(const std::vector<int>& units) {
  std::string out;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(units[i]);
  }
  return out;
}

ordered_json parse_block(const std::string& raw, const char* what) {
  const std::string block = extract_json_block(raw);
  ordered_json doc = ordered_json::parse(block, nullptr, false);
  if (doc.is_discarded()) throw ParseError(std::string(what) + " JSON malformed");
  if (!doc.is_object()) throw ParseError(std::string(what) + " JSON is not an object");
  return doc;
}

}  // namespace

std::string extract_json_block(std::string_view raw) {
  std::size_t start = std::string_view::npos;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char ch = raw[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (ch == '\\') {
        escaped = true;
      } else if (ch == '"') {
        in_string = false;
      }
      continue;
    }
    if (ch == '"' && depth > 0) {
      in_string = true;
    } else if (ch == '{') {
      if (depth == 0) start = i;
      ++depth;
    } else if (ch == '}') {
      if (depth > 0 && --depth == 0) {
        return std::string(raw.substr(start, i - start + 1));
      }
    }
  }
  throw ParseError("no JSON object found in output");
}

GlobalPlan parse_plan_json(const std::string& raw, int num_units) {
  const std::string block = extract_json_block(raw);

  UnitKeyCollector collector;
  nlohmann::json::sax_parse(block, &collector);

  ordered_json doc = ordered_json::parse(block, nullptr, false);
  if (doc.is_discarded()) throw ParseError("plan JSON malformed");
  if (!doc.is_object()) throw ParseError("plan JSON is not an object");
  if (!doc.contains("units") || !doc["units"].is_object()) {
    std::vector<int> all(static_cast<std::size_t>(num_units));
    for (int u = 1; u <= num_units; ++u) all[static_cast<std::size_t>(u - 1)] = u;
    throw SchemaError("plan JSON has no \"units\" object", all);
  }

  std::set<int> seen;
  std::vector<int> duplicates;
  std::vector<int> out_of_range;
  for (const auto& key : collector.unit_keys) {
    const int unit = parse_unit_key(key);
    if (unit < 1 || unit > num_units) {
      out_of_range.push_back(unit);
    } else if (!seen.insert(unit).second) {
      duplicates.push_back(unit);
    }
  }
  if (!out_of_range.empty()) {
    std::sort(out_of_range.begin(), out_of_range.end());
    throw SchemaError("plan units out of range: " + join_units(out_of_range), out_of_range);
  }
  if (!duplicates.empty()) {
    std::sort(duplicates.begin(), duplicates.end());
    throw SchemaError("duplicate plan units: " + join_units(duplicates), duplicates);
  }

  std::map<int, std::string> contents;
  std::vector<int> empty_units;
  for (const auto& [key, value] : doc["units"].items()) {
    const int unit = parse_unit_key(key);
    if (!value.is_string()) {
      throw SchemaError("plan unit " + std::to_string(unit) + " content is not a string",
                        {unit});
    }
    const std::string content = value.get<std::string>();
    if (trim(content).empty()) empty_units.push_back(unit);
    contents[unit] = content;
  }
  if (!empty_units.empty()) {
    std::sort(empty_units.begin(), empty_units.end());
    throw SchemaError("empty plan content for units: " + join_units(empty_units), empty_units);
  }

  std::vector<int> missing;
  for (int u = 1; u <= num_units; ++u) {
    if (!contents.count(u)) missing.push_back(u);
  }
  if (!missing.empty()) {
    throw SchemaError("plan missing units: " + join_units(missing), missing);
  }

  GlobalPlan plan;
  plan.items.reserve(contents.size());
  for (auto& [unit, content] : contents) {
    plan.items.push_back({unit, std::move(content)});
  }
  return plan;
}

std::string serialize_plan(const GlobalPlan& plan) {
  ordered_json units = ordered_json::object();
  for (const auto& item : plan.items) {
    units[std::to_string(item.unit_index)] = item.content;
  }
  ordered_json doc;
  doc["units"] = std::move(units);
  return doc.dump();
}

Segment parse_segment_json(const std::string& raw) {
  ordered_json doc = parse_block(raw, "segment");

  static constexpr const char* kIdAliases[] = {"unit_id", "unit", "week", "floor", "block"};
  Segment segment;
  bool found_id = false;
  for (const char* alias : kIdAliases) {
    if (!doc.contains(alias)) continue;
    const auto& value = doc[alias];
    if (value.is_number_integer()) {
      segment.unit_id = value.get<int>();
    } else if (value.is_string()) {
      segment.unit_id = parse_unit_key(value.get<std::string>());
    } else {
      throw SchemaError("segment identifier is not an integer");
    }
    found_id = true;
    break;
  }
  if (!found_id) throw SchemaError("segment missing identifier");
  if (segment.unit_id < 1) {
    throw SchemaError("segment identifier must be positive", {segment.unit_id});
  }

  if (doc.contains("check") && doc["check"].is_string()) {
    segment.check = doc["check"].get<std::string>();
  }
  if (!doc.contains("text") || !doc["text"].is_string() ||
      trim(doc["text"].get<std::string>()).empty()) {
    throw SchemaError("segment missing text", {segment.unit_id});
  }
  segment.text = doc["text"].get<std::string>();
  return segment;
}

SubPlanItem parse_unit_revision(const std::string& raw) {
  ordered_json doc = parse_block(raw, "revision");

  static constexpr const char* kIdAliases[] = {"unit_id", "unit", "week", "floor", "block"};
  SubPlanItem item;
  bool found_id = false;
  for (const char* alias : kIdAliases) {
    if (!doc.contains(alias)) continue;
    const auto& value = doc[alias];
    if (value.is_number_integer()) {
      item.unit_index = value.get<int>();
    } else if (value.is_string()) {
      item.unit_index = parse_unit_key(value.get<std::string>());
    } else {
      throw SchemaError("revision identifier is not an integer");
    }
    found_id = true;
    break;
  }
  if (!found_id) throw SchemaError("revision missing identifier");
  if (item.unit_index < 1) {
    throw SchemaError("revision identifier must be positive", {item.unit_index});
  }

  if (!doc.contains("content") || !doc["content"].is_string() ||
      trim(doc["content"].get<std::string>()).empty()) {
    throw SchemaError("revision missing content", {item.unit_index});
  }
  item.content = doc["content"].get<std::string>();
  return item;
}

std::string serialize_segment(const Segment& segment) {
  ordered_json doc;
  doc["unit_id"] = segment.unit_id;
  doc["check"] = segment.check;
  doc["text"] = segment.text;
  return doc.dump();
}

std::string task_to_json(const TaskSpec& task) {
  ordered_json doc;
  doc["task_id"] = task.task_id;
  doc["scenario"] = to_string(task.scenario);
  doc["num_units"] = task.num_units;
  ordered_json constraints = ordered_json::array();
  for (const auto& c : task.constraints) {
    ordered_json item;
    item["kind"] = to_string(c.kind);
    item["event"] = c.event;
    switch (c.kind) {
      case ConstraintKind::Once:
        item["unit"] = c.unit;
        break;
      case ConstraintKind::Range:
        item["start"] = c.start;
        item["end"] = c.end;
        break;
      case ConstraintKind::Periodic:
        item["start"] = c.start;
        item["interval"] = c.interval;
        break;
    }
    constraints.push_back(std::move(item));
  }
  doc["constraints"] = std::move(constraints);
  doc["prompt"] = task.prompt;
  return doc.dump();
}

TaskSpec task_from_json(const std::string& line) {
  ordered_json doc = ordered_json::parse(line, nullptr, false);
  if (doc.is_discarded()) throw ParseError("task JSON malformed");
  if (!doc.is_object()) throw ParseError("task JSON is not an object");

  TaskSpec task;
  try {
    task.task_id = doc.at("task_id").get<std::string>();
    task.scenario = scenario_from(doc.at("scenario").get<std::string>());
    task.num_units = doc.at("num_units").get<int>();
    for (const auto& item : doc.at("constraints")) {
      ConstraintSpec c;
      c.kind = constraint_kind_from(item.at("kind").get<std::string>());
      c.event = item.at("event").get<std::string>();
      switch (c.kind) {
        case ConstraintKind::Once:
          c.unit = item.at("unit").get<int>();
          break;
        case ConstraintKind::Range:
          c.start = item.at("start").get<int>();
          c.end = item.at("end").get<int>();
          break;
        case ConstraintKind::Periodic:
          c.start = item.at("start").get<int>();
          c.interval = item.at("interval").get<int>();
          break;
      }
      task.constraints.push_back(std::move(c));
    }
    if (doc.contains("prompt")) task.prompt = doc["prompt"].get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("task JSON field error: ") + ex.what());
  }
  return task;
}

}  // namespace loom
