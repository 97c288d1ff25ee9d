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

#include "bagcell/faults.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bagcell/errors.hpp"

namespace bagcell {

namespace {

constexpr std::array<std::pair<FaultClass, std::string_view>, 8> kClassNames{{
    {FaultClass::Detect, "detect"},
    {FaultClass::Pick, "pick"},
    {FaultClass::Place, "place"},
    {FaultClass::Plan, "plan"},
    {FaultClass::BottomSuction, "bottom_suction"},
    {FaultClass::Remove, "remove"},
    {FaultClass::PusherStall, "pusher_stall"},
    {FaultClass::DoorStall, "door_stall"},
}};

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

double uniform01(Rng& rng) {
  return std::generate_canonical<double, 53>(rng);
}

}  // namespace

std::string_view to_string(FaultClass c) {
  for (const auto& [cls, name] : kClassNames) {
    if (cls == c) return name;
  }
  return "unknown";
}

std::optional<FaultClass> fault_class_from_string(std::string_view s) {
  for (const auto& [cls, name] : kClassNames) {
    if (name == s) return cls;
  }
  return std::nullopt;
}

bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

double gaussian(Rng& rng, double sigma) {
  // Box-Muller; always consumes two draws.
  double u1 = 1.0 - uniform01(rng);  // (0, 1]
  double u2 = uniform01(rng);
  return sigma * std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

FaultProfile FaultProfile::from_stack_success_rates(double detect, double pick,
                                                    double place) {
  if (!(detect > 0.0 && detect <= 1.0) || !(pick > 0.0 && pick <= detect) ||
      !(place >= 0.0 && place <= pick)) {
    throw ConfigInvalid("faults", "success rates must satisfy 0 <= place <= pick <= detect <= 1");
  }
  FaultProfile p;
  p.stack_detect_fail_prob = 1.0 - detect;
  p.stack_pick_fail_prob = 1.0 - pick / detect;
  p.stack_place_fail_prob = 1.0 - place / pick;
  return p;
}

bool FaultSelector::matches(const FaultContext& ctx) const {
  if (cls != ctx.cls) return false;
  if (test && *test != ctx.test) return false;
  if (cycle && *cycle != ctx.cycle) return false;
  if (slot && *slot != ctx.slot) return false;
  if (stack && *stack != ctx.stack) return false;
  if (attempt && *attempt != ctx.attempt) return false;
  return true;
}

FaultScript::FaultScript(std::vector<ScriptEntry> entries)
    : entries_(std::move(entries)), consumed_(entries_.size(), false) {}

FaultScript FaultScript::parse(std::istream& in) {
  std::vector<ScriptEntry> entries;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream tokens(raw);
    std::string tok;
    if (!(tokens >> tok)) continue;

    auto cls = fault_class_from_string(tok);
    if (!cls) throw MalformedScript(line_no, "unknown fault class '" + tok + "'");
    ScriptEntry entry;
    entry.selector.cls = *cls;
    entry.line = line_no;
    std::optional<Outcome> outcome;
    int repeat = 1;

    while (tokens >> tok) {
      if (tok == "fail" || tok == "succeed") {
        if (outcome) throw MalformedScript(line_no, "outcome given twice");
        outcome = tok == "fail" ? Outcome::Fail : Outcome::Succeed;
        continue;
      }
      if (tok.size() > 1 && tok[0] == 'x') {
        auto n = parse_int(std::string_view(tok).substr(1));
        if (!n || *n < 1) throw MalformedScript(line_no, "bad repeat '" + tok + "'");
        repeat = *n;
        continue;
      }
      auto eq = tok.find('=');
      if (eq == std::string::npos) {
        throw MalformedScript(line_no, "unexpected token '" + tok + "'");
      }
      std::string key = tok.substr(0, eq);
      auto value = parse_int(std::string_view(tok).substr(eq + 1));
      if (!value) throw MalformedScript(line_no, "non-integer value in '" + tok + "'");
      if (key == "test") {
        entry.selector.test = *value;
      } else if (key == "cycle") {
        entry.selector.cycle = *value;
      } else if (key == "slot") {
        entry.selector.slot = *value;
      } else if (key == "stack") {
        entry.selector.stack = *value;
      } else if (key == "attempt") {
        entry.selector.attempt = *value;
      } else {
        throw MalformedScript(line_no, "unknown selector '" + key + "'");
      }
    }
    if (!outcome) throw MalformedScript(line_no, "missing outcome (fail|succeed)");
    entry.outcome = *outcome;
    if (!entry.selector.test) entry.selector.test = 1;
    for (int i = 0; i < repeat; ++i) entries.push_back(entry);
  }
  return FaultScript(std::move(entries));
}

FaultScript FaultScript::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("fault_script", "cannot open '" + path + "'");
  return parse(in);
}

std::optional<Outcome> FaultScript::take(const FaultContext& ctx) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!consumed_[i] && entries_[i].selector.matches(ctx)) {
      consumed_[i] = true;
      return entries_[i].outcome;
    }
  }
  return std::nullopt;
}

FaultScript FaultScript::for_test(int test) const {
  std::vector<ScriptEntry> subset;
  for (const auto& e : entries_) {
    if (e.selector.test.value_or(1) == test) subset.push_back(e);
  }
  return FaultScript(std::move(subset));
}

std::vector<ScriptEntry> FaultScript::unconsumed() const {
  std::vector<ScriptEntry> out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!consumed_[i]) out.push_back(entries_[i]);
  }
  return out;
}

double FaultInjector::attempt_probability(FaultClass cls) const {
  switch (cls) {
    case FaultClass::Pick:
    case FaultClass::Remove:
      return profile_.pick_grip_fail_prob;
    case FaultClass::Place:
      return profile_.place_drop_fail_prob;
    case FaultClass::Plan:
      return profile_.plan_failure_prob;
    case FaultClass::BottomSuction:
      return profile_.bottom_suction_fail_prob;
    case FaultClass::Detect:  // box-level misses come from the observation model
    case FaultClass::PusherStall:
    case FaultClass::DoorStall:
      return 0.0;
  }
  return 0.0;
}

double FaultInjector::stack_probability(FaultClass cls) const {
  switch (cls) {
    case FaultClass::Detect:
      return profile_.stack_detect_fail_prob;
    case FaultClass::Pick:
      return profile_.stack_pick_fail_prob;
    case FaultClass::Place:
      return profile_.stack_place_fail_prob;
    default:
      return 0.0;
  }
}

Outcome FaultInjector::resolve(const FaultContext& ctx, Rng& rng) {
  if (auto forced = script_.take(ctx)) return *forced;

  if (ctx.stack >= 0) {
    double p = stack_probability(ctx.cls);
    if (p > 0.0) {
      auto key = std::make_pair(ctx.cls, ctx.stack);
      auto it = persistent_.find(key);
      if (it == persistent_.end()) {
        it = persistent_.emplace(key, bernoulli(rng, p)).first;
      }
      if (it->second) return Outcome::Fail;
    }
  }

  double p = attempt_probability(ctx.cls);
  if (p <= 0.0) return Outcome::Succeed;
  if (p >= 1.0) return Outcome::Fail;
  return bernoulli(rng, p) ? Outcome::Fail : Outcome::Succeed;
}

}  // namespace bagcell
