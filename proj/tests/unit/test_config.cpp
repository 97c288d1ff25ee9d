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

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "bagcell/config.hpp"
#include "bagcell/errors.hpp"

namespace bagcell {
namespace {

TEST(Config, DefaultsValidate) { EXPECT_NO_THROW(validate(CellConfig{})); }

TEST(Config, JsonRoundTrip) {
  CellConfig c;
  c.timing.grip_timeout_s = 2.5;
  c.layout.zone_sizes = {6, 6, 6, 6};
  c.faults.pick_grip_fail_prob = 0.25;
  c.seed = 42;
  const CellConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_DOUBLE_EQ(back.timing.grip_timeout_s, 2.5);
  EXPECT_EQ(back.seed, 42u);
}

TEST(Config, PartialJsonKeepsDefaults) {
  const CellConfig c = config_from_json(nlohmann::json{{"timing", {{"grip_dwell_s", 2.0}}}});
  EXPECT_DOUBLE_EQ(c.timing.grip_dwell_s, 2.0);
  EXPECT_DOUBLE_EQ(c.timing.release_dwell_s, CellConfig{}.timing.release_dwell_s);
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_THROW(config_from_json(nlohmann::json{{"timing", {{"grip_dwel_s", 2.0}}}}),
               ConfigInvalid);
}

TEST(Config, NamesTheBadField) {
  CellConfig c;
  c.timing.grip_timeout_s = -1.0;
  try {
    validate(c);
    FAIL() << "expected ConfigInvalid";
  } catch (const ConfigInvalid& e) {
    EXPECT_EQ(e.field(), "timing.grip_timeout_s");
  }
}

TEST(Config, ProbabilitiesBounded) {
  CellConfig c;
  c.faults.place_drop_fail_prob = 1.5;
  EXPECT_THROW(validate(c), ConfigInvalid);
}

TEST(Config, MissingFileNamesPath) {
  try {
    load_config("/nonexistent/cell.json");
    FAIL() << "expected ConfigInvalid";
  } catch (const ConfigInvalid& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/cell.json"), std::string::npos);
  }
}

TEST(Config, LoadsFromFile) {
  const std::string path = testing::TempDir() + "bagcell_config_test.json";
  {
    std::ofstream f(path);
    f << R"({"motion": {"base_acceleration": 10.0}, "seed": 7})";
  }
  const CellConfig c = load_config(path);
  EXPECT_DOUBLE_EQ(c.motion.base_acceleration, 10.0);
  EXPECT_EQ(c.seed, 7u);
  std::remove(path.c_str());
}

}  // namespace
}  // namespace bagcell
