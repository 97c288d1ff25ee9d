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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bagcell {

using Rng = std::mt19937_64;

/// Stochastic failure model. Per-attempt probabilities are drawn every time
/// an action is tried. The `stack_*` probabilities are drawn once per stack
/// and, when they hit, make every attempt of that action on that stack fail.
struct FaultProfile {
  double pick_grip_fail_prob = 0.0;
  double place_drop_fail_prob = 0.0;
  double detection_miss_prob = 0.0;
  double detection_jitter_sigma_px = 0.0;
  double spurious_box_prob = 0.0;
  double bottom_suction_fail_prob = 0.0;
  double pressure_noise_sigma_kpa = 0.0;
  double ultrasonic_noise_sigma_cm = 0.0;
  double plan_failure_prob = 0.0;

  double stack_detect_fail_prob = 0.0;
  double stack_pick_fail_prob = 0.0;
  double stack_place_fail_prob = 0.0;

  // Detector confidence is sampled uniformly from this range.
  double confidence_min = 0.80;
  double confidence_max = 0.99;

  bool operator==(const FaultProfile&) const = default;

  /// Persistent per-stack failure probabilities whose marginal success rates
  /// (detected, picked, placed as fractions of attempted stacks) equal the
  /// given values. Requires place <= pick <= detect.
  static FaultProfile from_stack_success_rates(double detect, double pick,
                                               double place);
};

enum class FaultClass {
  Detect,
  Pick,
  Place,
  Plan,
  BottomSuction,
  Remove,
  PusherStall,
  DoorStall,
};

std::string_view to_string(FaultClass c);
std::optional<FaultClass> fault_class_from_string(std::string_view s);

enum class Outcome { Succeed, Fail };

/// Where in a run an outcome is being decided.
struct FaultContext {
  FaultClass cls = FaultClass::Pick;
  int test = 1;      // 1-based
  int cycle = 1;     // 1-based, within the test
  int slot = -1;     // enclosure index 0..7, or device index for stalls
  int stack = -1;    // stack id, -1 when not applicable
  int attempt = 1;   // 1-based
};

struct FaultSelector {
  FaultClass cls = FaultClass::Pick;
  std::optional<int> test;
  std::optional<int> cycle;
  std::optional<int> slot;
  std::optional<int> stack;
  std::optional<int> attempt;

  bool matches(const FaultContext& ctx) const;
};

struct ScriptEntry {
  FaultSelector selector;
  Outcome outcome = Outcome::Fail;
  std::size_t line = 0;
};

/// Ordered forced outcomes. Each lookup consumes the first unconsumed entry
/// (in file order) whose selector matches.
///
/// Text format, one entry per line, `#` starts a comment:
///
///     <class> [test=N] [cycle=N] [slot=N] [stack=N] [attempt=N] <fail|succeed> [xK]
///
/// `xK` expands to K identical entries. An entry without `test=` belongs to
/// test 1.
class FaultScript {
 public:
  FaultScript() = default;
  explicit FaultScript(std::vector<ScriptEntry> entries);

  static FaultScript parse(std::istream& in);
  static FaultScript load(const std::string& path);

  std::optional<Outcome> take(const FaultContext& ctx);

  /// Entries belonging to one test, in order, all unconsumed.
  FaultScript for_test(int test) const;

  std::vector<ScriptEntry> unconsumed() const;
  const std::vector<ScriptEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<ScriptEntry> entries_;
  std::vector<bool> consumed_;
};

/// Resolves action outcomes. Script entries take precedence over the
/// profile; given the same seed the sequence of outcomes is reproducible.
class FaultInjector {
 public:
  FaultInjector() = default;
  FaultInjector(FaultProfile profile, FaultScript script)
      : profile_(profile), script_(std::move(script)) {}

  Outcome resolve(const FaultContext& ctx, Rng& rng);

  const FaultProfile& profile() const { return profile_; }
  FaultProfile& profile() { return profile_; }
  const FaultScript& script() const { return script_; }

 private:
  double attempt_probability(FaultClass cls) const;
  double stack_probability(FaultClass cls) const;

  FaultProfile profile_;
  FaultScript script_;
  std::map<std::pair<FaultClass, int>, bool> persistent_;
};

/// Bernoulli draw that always consumes exactly one value from the engine,
/// so the draw count does not depend on the probability.
bool bernoulli(Rng& rng, double p);
double gaussian(Rng& rng, double sigma);

}  // namespace bagcell
