// Copyright 2026 The Bagcell Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bagcell/cli.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "bagcell/config.hpp"
#include "bagcell/errors.hpp"
#include "bagcell/report.hpp"
#include "bagcell/simulation.hpp"
#include "bagcell/trace.hpp"
#include "bagcell/vision.hpp"

namespace bagcell {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;  // pointer=value
  std::string out_dir;
};

// "timing.slot_overhead_s=40" or "/timing/slot_overhead_s=40". The value is
// parsed as JSON when it can be, as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigInvalid(item, "override must look like key=value");
  }
  std::string key = item.substr(0, eq);
  if (key.front() != '/') {
    std::replace(key.begin(), key.end(), '.', '/');
    key.insert(key.begin(), '/');
  }
  const std::string raw = item.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  const nlohmann::json::json_pointer ptr(key);
  if (!j.contains(ptr)) throw ConfigInvalid(key, "unknown config key");
  j[ptr] = value;
}

CellConfig effective_config(const Common& c) {
  nlohmann::json j = c.config_path.empty() ? to_json(CellConfig{}) : to_json(load_config(c.config_path));
  for (const auto& o : c.overrides) apply_override(j, o);
  if (c.seed) j["seed"] = *c.seed;
  return config_from_json(j);
}

fs::path output_dir(const Common& c) {
  std::string dir = c.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv(kOutputDirEnv);
    dir = env != nullptr && *env != '\0' ? env : kDefaultOutputDir;
  }
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << text;
}

std::string trace_name(int test) { return fmt::format("trace-test-{:02d}.jsonl", test); }

int emit_campaign(const CampaignResult& result, const fs::path& dir, TableStyle style,
                  std::ostream& out, std::ostream& err) {
  for (const auto& t : result.tests) {
    save_trace((dir / trace_name(t.test)).string(), t.trace);
    for (const auto& e : t.unused_script_entries) {
      err << "warning: test " << t.test << ": script line " << e.line << " never used\n";
    }
  }
  write_file(dir / "report.csv", render_table(result.report, TableStyle::Csv));
  write_file(dir / "report.md", render_table(result.report, TableStyle::Markdown));
  out << render_table(result.report, style) << '\n' << render_summary(result.report);
  if (result.report.aborted) {
    err << "simulation aborted\n";
    return kExitAborted;
  }
  return kExitOk;
}

int max_script_test(const FaultScript& script) {
  int n = 1;
  for (const auto& e : script.entries()) n = std::max(n, e.selector.test.value_or(1));
  return n;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bag unpacking cell simulator", "bagcell"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("-c,--config", common.config_path, "JSON config file");
    sub->add_option("--seed", common.seed, fmt::format("RNG seed (default {})", kDefaultSeed));
    sub->add_option("--set", common.overrides, "Override a config key, e.g. timing.grip_timeout_s=3");
    sub->add_option("-o,--out", common.out_dir,
                    fmt::format("Output directory (default ${} or {})", kOutputDirEnv,
                                kDefaultOutputDir));
  };

  std::string script_path;
  std::string style_name = "md";
  int test = 1;
  int cycles = 3;
  int campaign_cycles = 1;
  int tests = 10;
  int workers = 1;
  const std::map<std::string, TableStyle> styles{{"md", TableStyle::Markdown},
                                                 {"csv", TableStyle::Csv}};

  auto* run = app.add_subcommand("run", "Simulate one test of several feeding cycles");
  add_common(run);
  run->add_option("--test", test, "Test index")->check(CLI::PositiveNumber);
  run->add_option("--cycles", cycles, "Feeding cycles")->check(CLI::PositiveNumber);
  run->add_option("--fault-script", script_path, "Fault script");
  run->add_option("--style", style_name, "Table style")->transform(CLI::IsMember(styles));

  auto* campaign = app.add_subcommand("campaign", "Simulate independent tests and tabulate them");
  add_common(campaign);
  campaign->add_option("--tests", tests, "Number of tests")->check(CLI::PositiveNumber);
  campaign->add_option("--cycles", campaign_cycles, "Feeding cycles per test")->check(CLI::PositiveNumber);
  campaign->add_option("--workers", workers, "Parallel workers")->check(CLI::PositiveNumber);
  campaign->add_option("--fault-script", script_path, "Fault script");
  campaign->add_option("--style", style_name, "Table style")->transform(CLI::IsMember(styles));

  auto* replay = app.add_subcommand("replay", "Run one cycle per test named in a fault script");
  add_common(replay);
  replay->add_option("fault-script", script_path, "Fault script")->required();
  replay->add_option("--style", style_name, "Table style")->transform(CLI::IsMember(styles));

  std::string preds_path;
  std::string gts_path;
  double iou_threshold = 0.5;
  auto* eval = app.add_subcommand("eval", "Score detections against ground truth box files");
  eval->add_option("--preds", preds_path, "Predicted boxes")->required();
  eval->add_option("--gts", gts_path, "Ground truth boxes")->required();
  eval->add_option("--iou", iou_threshold, "IoU match threshold");

  auto* dump = app.add_subcommand("dump-config", "Print the effective config as JSON");
  dump->add_option("-c,--config", common.config_path, "JSON config file");
  dump->add_option("--seed", common.seed, "RNG seed");
  dump->add_option("--set", common.overrides, "Override a config key");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*eval) {
      const auto images = pair_by_frame(load_box_file(preds_path), load_box_file(gts_path));
      const DetectionMetrics m = evaluate(images, iou_threshold);
      out << fmt::format("precision: {:.6f}\nrecall: {:.6f}\nf1: {:.6f}\nap50: {:.6f}\n",
                         m.precision, m.recall, m.f1, m.ap50);
      return kExitOk;
    }

    const CellConfig config = effective_config(common);
    if (*dump) {
      out << to_json(config).dump(2) << '\n';
      return kExitOk;
    }

    const FaultScript script = script_path.empty() ? FaultScript{} : FaultScript::load(script_path);
    const TableStyle style = styles.at(style_name);
    const fs::path dir = output_dir(common);

    if (*run) {
      SimOptions so;
      so.test = test;
      so.cycles = cycles;
      Simulation sim(config, script.for_test(test), so);
      CampaignResult result;
      TestResult t;
      t.test = test;
      t.rows = sim.run();
      t.trace = sim.trace();
      t.aborted = sim.aborted();
      t.unused_script_entries = sim.script().unconsumed();
      result.report = summarize_campaign(t.rows);
      result.tests.push_back(std::move(t));
      return emit_campaign(result, dir, style, out, err);
    }

    CampaignOptions co;
    if (*campaign) {
      co.tests = tests;
      co.cycles_per_test = campaign_cycles;
      co.workers = workers;
    } else {
      co.tests = max_script_test(script);
      co.cycles_per_test = 1;
    }
    return emit_campaign(run_full_campaign(config, script, co), dir, style, out, err);
  } catch (const AbortRequested& e) {
    err << "aborted: " << e.what() << '\n';
    return kExitAborted;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace bagcell
