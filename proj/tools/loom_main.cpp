#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "loom/config.hpp"
#include "loom/constraints.hpp"
#include "loom/digest.hpp"
#include "loom/dpo.hpp"
#include "loom/errors.hpp"
#include "loom/json_codec.hpp"
#include "loom/parallel.hpp"
#include "loom/prompts.hpp"
#include "loom/reward.hpp"
#include "loom/rng.hpp"
#include "loom/rollout.hpp"
#include "loom/taskgen.hpp"
#include "loom/text.hpp"
#include "loom/types.hpp"
#include "loom/workflow.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fixed4(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", v);
  return buffer;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw loom::IoError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw loom::IoError("cannot open " + path + " for writing");
  out << content;
  out.flush();
  if (!out) throw loom::IoError("failed while writing " + path);
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::vector<loom::Scenario> parse_scenarios(const std::string& csv) {
  std::vector<loom::Scenario> out;
  std::stringstream stream(csv);
  std::string token;
  while (std::getline(stream, token, ',')) {
    const std::string name = loom::trim(token);
    if (!name.empty()) out.push_back(loom::scenario_from(name));
  }
  if (out.empty()) throw loom::ConfigError("scenario list is empty");
  return out;
}

// Run files in a directory, sorted by name. report.json is the eval output
// format, never a run, so it is skipped even when written next to the runs.
std::vector<std::string> list_run_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw loom::IoError("not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    if (p.extension() != ".json" || p.filename() == "report.json") continue;
    files.push_back(p.string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

struct GenTasksOpts {
  int count = 100;
  std::uint64_t seed = 0;
  std::string scenarios = "diary,floor,menu,block";
  int once = 2;
  int range = 1;
  int periodic = 1;
  int open_units = 100;
  std::string out;
  std::string witness_dir;
};

int cmd_gen_tasks(const GenTasksOpts& o) {
  loom::TaskGenConfig cfg;
  cfg.count = o.count;
  cfg.seed = o.seed;
  cfg.scenarios = parse_scenarios(o.scenarios);
  cfg.once_count = o.once;
  cfg.range_count = o.range;
  cfg.periodic_count = o.periodic;
  cfg.open_unit_count = o.open_units;

  const auto tasks = loom::generate_tasks(cfg);
  ensure_parent_dir(o.out);
  loom::write_dataset(tasks, o.out);
  if (!o.witness_dir.empty()) {
    fs::create_directories(o.witness_dir);
    for (const auto& task : tasks) {
      const loom::GlobalPlan witness = loom::witness_plan(task);
      write_text(o.witness_dir + "/" + task.task_id + ".plan.json",
                 loom::serialize_plan(witness) + "\n");
    }
  }
  std::cout << "wrote " << tasks.size() << " tasks to " << o.out << "\n";
  return 0;
}

struct RunOpts {
  std::string tasks;
  std::string config;
  std::string out;
  int parallel = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool quiet = false;
};

int cmd_run(const RunOpts& o) {
  loom::EngineConfig engine = loom::load_config(o.config);
  if (o.seed_set) {
    engine.pipeline.seed = o.seed;
    engine.pipeline.config_digest = loom::config_digest(engine);
  }
  const auto factory = loom::make_backend_factory(engine.backend);
  const auto tasks = loom::load_dataset(o.tasks);
  if (tasks.empty()) {
    std::cerr << "no tasks in " << o.tasks << "\n";
    return 1;
  }
  fs::create_directories(o.out);

  std::vector<std::string> lines(tasks.size());
  std::vector<char> failed(tasks.size(), 0);
  loom::parallel_for(tasks.size(), o.parallel, [&](std::size_t i) {
    const loom::TaskSpec& task = tasks[i];
    std::ostringstream line;
    try {
      const loom::RunResult run = loom::run_pipeline(task, *factory, engine.pipeline);
      const std::string path = o.out + "/" + task.task_id + ".json";
      write_text(path, loom::serialize_run(run));
      const auto satisfied = std::count_if(run.verdicts.begin(), run.verdicts.end(),
                                           [](const auto& v) { return v.satisfied; });
      line << "task=" << task.task_id << " status=ok accuracy=" << fixed4(run.accuracy.avg)
           << " satisfied=" << satisfied << "/" << run.verdicts.size()
           << " selected=" << run.selected_candidate << " file=" << path;
    } catch (const std::exception& e) {
      failed[i] = 1;
      line << "task=" << task.task_id << " status=error message=" << e.what();
    }
    lines[i] = line.str();
  });

  const auto n_failed = std::count(failed.begin(), failed.end(), char{1});
  if (!o.quiet) {
    for (const auto& line : lines) std::cout << line << "\n";
  }
  std::cout << "ran=" << tasks.size() << " failed=" << n_failed << "\n";
  return n_failed == 0 ? 0 : 1;
}

int cmd_eval(const std::string& runs_dir, const std::string& out_path) {
  const auto files = list_run_files(runs_dir);
  if (files.empty()) {
    std::cerr << "no run files in " << runs_dir << "\n";
    return 1;
  }

  double sum_avg = 0.0;
  std::map<std::string, std::pair<long, long>> kind_counts;  // kind -> {satisfied, total}
  std::map<std::string, std::pair<int, double>> by_scenario;  // name -> {runs, sum accuracy}
  int fallback_runs = 0;
  long total_rounds = 0;
  for (const auto& file : files) {
    loom::RunResult run;
    try {
      run = loom::run_from_json(read_text(file));
    } catch (const loom::Error& e) {
      throw loom::ParseError(file + ": " + e.what());
    }
    sum_avg += run.accuracy.avg;
    for (const auto& verdict : run.verdicts) {
      auto& slot = kind_counts[loom::to_string(verdict.constraint.kind)];
      slot.first += verdict.satisfied ? 1 : 0;
      slot.second += 1;
    }
    auto& scen = by_scenario[loom::to_string(run.task.scenario)];
    scen.first += 1;
    scen.second += run.accuracy.avg;
    if (run.filter.fallback_used) ++fallback_runs;
    total_rounds += run.filter.rounds;
  }

  const double n = static_cast<double>(files.size());
  long satisfied_all = 0;
  long total_all = 0;
  json constraints = json::object();
  for (const auto& [kind, counts] : kind_counts) {
    satisfied_all += counts.first;
    total_all += counts.second;
    constraints[kind] = {{"satisfied", counts.first},
                         {"total", counts.second},
                         {"fraction", static_cast<double>(counts.first) /
                                          static_cast<double>(counts.second)}};
  }
  constraints["satisfied"] = satisfied_all;
  constraints["total"] = total_all;
  constraints["fraction"] =
      total_all == 0 ? 1.0 : static_cast<double>(satisfied_all) / static_cast<double>(total_all);

  json scenarios = json::object();
  for (const auto& [name, acc] : by_scenario) {
    scenarios[name] = {{"runs", acc.first}, {"accuracy", acc.second / acc.first}};
  }

  json report;
  report["n_runs"] = files.size();
  report["accuracy"] = {{"avg", sum_avg / n}};
  report["constraints"] = constraints;
  report["filter"] = {{"fallback_runs", fallback_runs}, {"mean_rounds", total_rounds / n}};
  report["scenarios"] = scenarios;

  ensure_parent_dir(out_path);
  write_text(out_path, report.dump(2) + "\n");
  std::cout << "runs=" << files.size() << " avg_accuracy=" << fixed4(sum_avg / n)
            << " constraints=" << satisfied_all << "/" << total_all << " report=" << out_path
            << "\n";
  return 0;
}

struct PairsOpts {
  std::string runs;
  std::string out;
  double margin = 0.0;
  std::string level = "both";
  std::string strategy = "all-pairs";
};

json pair_to_json(const loom::PreferencePair& p) {
  json j;
  j["context"] = p.prompt_context;
  j["winner"] = p.winner_text;
  j["winner_reward"] = p.winner_reward;
  j["loser"] = p.loser_text;
  j["loser_reward"] = p.loser_reward;
  j["level"] = loom::to_string(p.level);
  j["label_prob"] = p.label_prob;
  return j;
}

int cmd_pairs(const PairsOpts& o) {
  const bool want_plan = o.level == "both" || o.level == "plan";
  const bool want_generation = o.level == "both" || o.level == "generation";
  if (!want_plan && !want_generation) {
    throw loom::ConfigError("level must be plan, generation or both");
  }
  const loom::PairStrategy strategy = loom::pair_strategy_from(o.strategy);

  const auto files = list_run_files(o.runs);
  if (files.empty()) {
    std::cerr << "no run files in " << o.runs << "\n";
    return 1;
  }

  ensure_parent_dir(o.out);
  std::ofstream out(o.out);
  if (!out) throw loom::IoError("cannot open " + o.out + " for writing");

  long written = 0;
  long skipped = 0;
  for (const auto& file : files) {
    const loom::RunResult run = loom::run_from_json(read_text(file));
    if (want_plan) {
      std::vector<loom::ScoredCandidate> cands;
      for (const auto& c : run.candidates) {
        if (c.reward) cands.push_back({loom::serialize_plan(c.plan), *c.reward});
      }
      if (cands.size() >= 2) {
        const std::string context = loom::plan_prompt(run.task, "");
        const auto built = loom::build_preference_pairs(cands, context, o.margin,
                                                        loom::PairLevel::Plan, strategy);
        for (const auto& p : built.pairs) out << pair_to_json(p).dump() << "\n";
        written += static_cast<long>(built.pairs.size());
        skipped += built.skipped;
      }
    }
    if (want_generation) {
      for (const auto& c : run.candidates) {
        if (!c.reward || c.rollout_replies.empty()) continue;
        const std::size_t n = std::min(c.rollout_replies.size(), c.reward->per_rollout.size());
        if (n < 2) continue;
        std::vector<loom::ScoredCandidate> cands;
        for (std::size_t r = 0; r < n; ++r) {
          const double reward = c.reward->per_rollout[r];
          cands.push_back({c.rollout_replies[r], loom::RewardEstimate{reward, 1, {reward}}});
        }
        const std::string context = loom::rollout_prompt(run.task, c.plan, 1, "");
        const auto built = loom::build_preference_pairs(cands, context, o.margin,
                                                        loom::PairLevel::Generation, strategy);
        for (const auto& p : built.pairs) out << pair_to_json(p).dump() << "\n";
        written += static_cast<long>(built.pairs.size());
        skipped += built.skipped;
      }
    }
  }
  out.flush();
  if (!out) throw loom::IoError("failed while writing " + o.out);
  std::cout << "wrote " << written << " pairs to " << o.out << " (skipped " << skipped
            << " below margin)\n";
  return 0;
}

struct DpoCheckOpts {
  double beta = 0.1;
  double learning_rate = 0.05;
  int steps = 200;
};

// Synthetic pair set over a toy vocabulary, addressed by a seed so the table
// is reproducible.
std::vector<loom::PreferencePair> synthetic_pairs(const std::vector<std::string>& vocab,
                                                  int n_pairs, std::uint64_t seed) {
  std::vector<loom::PreferencePair> pairs;
  for (int i = 0; i < n_pairs; ++i) {
    const auto w = loom::counter_pick(vocab.size(), seed, loom::Stream::Generic, 1,
                                      static_cast<std::uint64_t>(i));
    auto l = loom::counter_pick(vocab.size() - 1, seed, loom::Stream::Generic, 2,
                                static_cast<std::uint64_t>(i));
    if (l >= w) ++l;
    loom::PreferencePair p;
    p.winner_text = vocab[w];
    p.loser_text = vocab[l];
    pairs.push_back(std::move(p));
  }
  return pairs;
}

int cmd_dpo_check(const DpoCheckOpts& o) {
  bool all_ok = true;
  const auto verdict = [&](bool ok) {
    all_ok = all_ok && ok;
    return ok ? "PASS" : "FAIL";
  };

  std::cout << "gradient check: analytic vs central difference\n";
  struct Case {
    int vocab;
    int n_pairs;
    double beta;
  };
  const Case cases[] = {{3, 4, 0.1}, {5, 8, 0.5}, {8, 16, 1.0}, {4, 6, 2.0}};
  int case_index = 0;
  for (const auto& c : cases) {
    const std::uint64_t seed = static_cast<std::uint64_t>(1000 + case_index++);
    std::vector<std::string> vocab;
    for (int v = 0; v < c.vocab; ++v) vocab.push_back("tok" + std::to_string(v));
    std::vector<double> logits;
    for (int v = 0; v < c.vocab; ++v) {
      logits.push_back(2.0 * loom::counter_uniform(seed, loom::Stream::Generic, 3,
                                                   static_cast<std::uint64_t>(v)) -
                       1.0);
    }
    loom::ToyPolicy policy(vocab, logits);
    const loom::ToyPolicy reference = loom::ToyPolicy::uniform(vocab);
    const auto pairs = synthetic_pairs(vocab, c.n_pairs, seed);
    loom::DpoConfig cfg;
    cfg.beta = c.beta;

    const auto analytic = loom::dpo_grad(pairs, policy, reference, cfg);
    const auto loss_at = [&](const std::vector<double>& point) {
      loom::ToyPolicy probe(vocab, point);
      return loom::dpo_loss(pairs, probe, reference, cfg);
    };
    const auto numeric = loom::finite_diff_grad(loss_at, logits, 1e-5);
    double max_rel = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      const double scale = std::max({std::fabs(analytic[i]), std::fabs(numeric[i]), 1e-4});
      max_rel = std::max(max_rel, std::fabs(analytic[i] - numeric[i]) / scale);
    }
    const bool ok = max_rel < 1e-5;
    std::cout << "  vocab=" << c.vocab << " pairs=" << c.n_pairs << " beta=" << c.beta
              << " max_rel_err=" << max_rel << " " << verdict(ok) << "\n";
  }

  {
    std::vector<std::string> vocab = {"north", "south", "east"};
    const loom::ToyPolicy policy = loom::ToyPolicy::uniform(vocab);
    const loom::ToyPolicy reference = loom::ToyPolicy::uniform(vocab);
    const auto pairs = synthetic_pairs(vocab, 6, 7);
    loom::DpoConfig cfg;
    cfg.beta = o.beta;
    const double loss = loom::dpo_loss(pairs, policy, reference, cfg);
    const double ln2 = std::log(2.0);
    const bool ok = std::fabs(loss - ln2) < 1e-9;
    std::cout << "identical policies: loss=" << loss << " expected=ln(2) " << verdict(ok) << "\n";
  }

  std::cout << "toy preference training: lr=" << o.learning_rate << " steps=" << o.steps << "\n";
  {
    std::vector<std::string> vocab = {"north", "south", "east", "west"};
    loom::ToyPolicy policy = loom::ToyPolicy::uniform(vocab);
    const loom::ToyPolicy reference = loom::ToyPolicy::uniform(vocab);
    std::vector<loom::PreferencePair> pairs;
    for (const char* loser : {"south", "east", "west"}) {
      loom::PreferencePair p;
      p.winner_text = "north";
      p.loser_text = loser;
      pairs.push_back(std::move(p));
    }
    loom::DpoConfig cfg;
    cfg.beta = o.beta;

    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    double first = 0.0;
    double last = 0.0;
    for (int step = 0; step < o.steps; ++step) {
      const double loss = loom::toy_train_step(policy, pairs, reference, o.learning_rate, cfg);
      if (step == 0) first = loss;
      if (loss > prev + 1e-12) monotone = false;
      prev = loss;
      last = loss;
    }
    std::cout << "  loss " << first << " -> " << last << " monotone=" << (monotone ? "yes" : "no")
              << " " << verdict(monotone && last < first) << "\n";

    int correct = 0;
    for (const auto& p : pairs) {
      if (loom::dpo_delta(p, policy, reference, cfg.beta) > 0.0) ++correct;
    }
    const bool ok = correct == static_cast<int>(pairs.size());
    std::cout << "  winner ratio above loser ratio for " << correct << "/" << pairs.size()
              << " pairs " << verdict(ok) << "\n";
  }

  std::cout << (all_ok ? "all checks passed" : "checks FAILED") << "\n";
  return all_ok ? 0 : 1;
}

void flatten_json(const json& j, const std::string& prefix,
                  std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      flatten_json(value, prefix.empty() ? key : prefix + "." + key, rows);
    }
  } else {
    rows.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
  }
}

int cmd_report(const std::string& in_path) {
  json doc;
  try {
    doc = json::parse(read_text(in_path));
  } catch (const json::exception& e) {
    throw loom::ParseError(in_path + ": " + e.what());
  }
  std::vector<std::pair<std::string, std::string>> rows;
  flatten_json(doc, "", rows);
  std::size_t width = 0;
  for (const auto& [key, value] : rows) width = std::max(width, key.size());
  for (const auto& [key, value] : rows) {
    std::cout << key << std::string(width - key.size() + 2, ' ') << value << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"offline-verifiable workflow engine for constrained long-form generation"};
  app.name("loom");
  app.require_subcommand(1);

  std::function<int()> action;

  GenTasksOpts gen;
  auto* gen_cmd = app.add_subcommand("gen-tasks", "generate a synthetic task dataset");
  gen_cmd->add_option("--count", gen.count, "number of tasks")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "dataset seed")->capture_default_str();
  gen_cmd->add_option("--scenarios", gen.scenarios, "comma list: diary,floor,menu,block")
      ->capture_default_str();
  gen_cmd->add_option("--once", gen.once, "one-time constraints per task")->capture_default_str();
  gen_cmd->add_option("--range", gen.range, "range constraints per task")->capture_default_str();
  gen_cmd->add_option("--periodic", gen.periodic, "periodic constraints per task")
      ->capture_default_str();
  gen_cmd->add_option("--open-units", gen.open_units, "unit count for open scenarios")
      ->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "output JSONL path")->required();
  gen_cmd->add_option("--witness-dir", gen.witness_dir,
                      "also write one satisfying plan per task here");
  gen_cmd->callback([&] { action = [&] { return cmd_gen_tasks(gen); }; });

  RunOpts run;
  auto* run_cmd = app.add_subcommand("run", "run the pipeline over a task dataset");
  run_cmd->add_option("--tasks", run.tasks, "task JSONL path")->required();
  run_cmd->add_option("--config", run.config, "config JSON path (defaults apply when omitted)");
  run_cmd->add_option("--out", run.out, "output directory for run records")->required();
  run_cmd->add_option("--parallel", run.parallel, "worker threads")->capture_default_str();
  auto* seed_opt = run_cmd->add_option("--seed", run.seed, "override pipeline.seed");
  run_cmd->add_flag("--quiet", run.quiet, "suppress per-task lines");
  run_cmd->callback([&, seed_opt] {
    run.seed_set = seed_opt->count() > 0;
    action = [&] { return cmd_run(run); };
  });

  std::string eval_runs;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "aggregate run records into a report");
  eval_cmd->add_option("--runs", eval_runs, "directory of run records")->required();
  eval_cmd->add_option("--out", eval_out, "report JSON path")->required();
  eval_cmd->callback([&] { action = [&] { return cmd_eval(eval_runs, eval_out); }; });

  PairsOpts pairs;
  auto* pairs_cmd = app.add_subcommand("pairs", "build preference pairs from run records");
  pairs_cmd->add_option("--runs", pairs.runs, "directory of run records")->required();
  pairs_cmd->add_option("--out", pairs.out, "output JSONL path")->required();
  pairs_cmd->add_option("--margin", pairs.margin, "minimum reward gap")->capture_default_str();
  pairs_cmd->add_option("--level", pairs.level, "plan, generation or both")
      ->capture_default_str();
  pairs_cmd->add_option("--strategy", pairs.strategy, "all-pairs or best-vs-rest")
      ->capture_default_str();
  pairs_cmd->callback([&] { action = [&] { return cmd_pairs(pairs); }; });

  DpoCheckOpts dpo;
  auto* dpo_cmd = app.add_subcommand("dpo-check", "verify preference loss math end to end");
  dpo_cmd->add_option("--beta", dpo.beta, "preference temperature")->capture_default_str();
  dpo_cmd->add_option("--lr", dpo.learning_rate, "toy training learning rate")
      ->capture_default_str();
  dpo_cmd->add_option("--steps", dpo.steps, "toy training steps")->capture_default_str();
  dpo_cmd->callback([&] { action = [&] { return cmd_dpo_check(dpo); }; });

  std::string report_in;
  auto* report_cmd = app.add_subcommand("report", "render a report JSON as text");
  report_cmd->add_option("--in", report_in, "report JSON path")->required();
  report_cmd->callback([&] { action = [&] { return cmd_report(report_in); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return action();
  } catch (const loom::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
