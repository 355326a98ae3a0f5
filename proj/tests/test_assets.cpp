#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "loom/assets.hpp"
#include "loom/errors.hpp"
#include "loom/prompts.hpp"
#include "loom/text.hpp"

using namespace loom;

namespace {

const std::vector<Scenario> kScenarios = {Scenario::Diary, Scenario::Floor, Scenario::Menu,
                                          Scenario::Block};

}  // namespace

TEST_CASE("every scenario ships a large bank of distinct events") {
  for (Scenario s : kScenarios) {
    const auto& events = scenario_events(s);
    CHECK(events.size() >= 50);
    const std::set<std::string> unique(events.begin(), events.end());
    CHECK(unique.size() == events.size());
    for (const auto& e : events) CHECK(!trim(e).empty());
  }
}

TEST_CASE("event phrases are substring-free against each other") {
  // If one event contained another, writing the longer one would accidentally
  // satisfy the shorter one's constraint.
  for (Scenario s : kScenarios) {
    const auto& events = scenario_events(s);
    for (std::size_t i = 0; i < events.size(); ++i) {
      for (std::size_t j = 0; j < events.size(); ++j) {
        if (i == j) continue;
        CHECK_MESSAGE(!contains_phrase(events[j], events[i]),
                      "\"", events[i], "\" hides inside \"", events[j], "\"");
      }
    }
  }
}

TEST_CASE("filler padding never mentions an event") {
  for (Scenario s : kScenarios) {
    const auto& events = scenario_events(s);
    const auto& fillers = scenario_fillers(s);
    CHECK(!fillers.empty());
    for (const auto& filler : fillers) {
      for (const auto& event : events) {
        CHECK_MESSAGE(!contains_phrase(filler, event),
                      "filler \"", filler, "\" contains event \"", event, "\"");
      }
    }
  }
}

TEST_CASE("unknown asset names throw and known ones resolve") {
  CHECK_THROWS_AS(asset_text("no/such/asset.txt"), IoError);
  const char* expected[] = {
      "phrases/diary_events.txt",  "phrases/diary_fillers.txt", "phrases/floor_events.txt",
      "phrases/floor_fillers.txt", "phrases/menu_events.txt",   "phrases/menu_fillers.txt",
      "phrases/block_events.txt",  "phrases/block_fillers.txt", "prompts/judge.txt",
      "prompts/rollout.txt",       "prompts/refine.txt",
  };
  for (const char* name : expected) CHECK(!asset_text(name).empty());
  for (const char* stage : {"plan", "write"}) {
    for (const char* scenario : {"diary", "floor", "menu", "block"}) {
      const std::string name = std::string("prompts/") + stage + "_" + scenario + ".txt";
      CHECK(!asset_text(name).empty());
    }
  }
}

TEST_CASE("asset_names lists everything asset_text can serve") {
  const auto names = asset_names();
  CHECK(names.size() >= 19);
  for (const auto& name : names) CHECK(!asset_text(name).empty());
}

TEST_CASE("each stage template carries exactly its own dispatch marker") {
  struct Expectation {
    std::string name;
    std::string_view own;
  };
  std::vector<Expectation> cases;
  for (const char* scenario : {"diary", "floor", "menu", "block"}) {
    cases.push_back({std::string("prompts/plan_") + scenario + ".txt", markers::kPlan});
    cases.push_back({std::string("prompts/write_") + scenario + ".txt", markers::kWrite});
  }
  cases.push_back({"prompts/judge.txt", markers::kJudge});
  cases.push_back({"prompts/rollout.txt", markers::kRollout});
  cases.push_back({"prompts/refine.txt", markers::kRefine});

  const std::string_view all[] = {markers::kPlan, markers::kWrite, markers::kJudge,
                                  markers::kRollout, markers::kRefine};
  for (const auto& c : cases) {
    const std::string_view text = asset_text(c.name);
    for (std::string_view marker : all) {
      const bool found = text.find(marker) != std::string_view::npos;
      CHECK_MESSAGE(found == (marker == c.own), c.name, " vs marker \"", marker, "\"");
    }
  }
}

TEST_CASE("templates that embed a plan carry the plan prefix") {
  for (const char* scenario : {"diary", "floor", "menu", "block"}) {
    const std::string name = std::string("prompts/write_") + scenario + ".txt";
    CHECK(asset_text(name).find(markers::kPlanPrefix) != std::string_view::npos);
  }
  for (const char* name : {"prompts/judge.txt", "prompts/rollout.txt", "prompts/refine.txt"}) {
    CHECK(asset_text(name).find(markers::kPlanPrefix) != std::string_view::npos);
  }
  for (const char* scenario : {"diary", "floor", "menu", "block"}) {
    const std::string name = std::string("prompts/plan_") + scenario + ".txt";
    CHECK(asset_text(name).find(markers::kPlanPrefix) == std::string_view::npos);
  }
}

TEST_CASE("phrase bank lines are lowercase ascii") {
  for (Scenario s : kScenarios) {
    for (const auto* bank : {&scenario_events(s), &scenario_fillers(s)}) {
      for (const auto& line : *bank) {
        for (const char ch : line) {
          const bool ok = (ch >= 'a' && ch <= 'z') || ch == ' ';
          CHECK_MESSAGE(ok, "unexpected character in \"", line, "\"");
          if (!ok) break;
        }
      }
    }
  }
}
