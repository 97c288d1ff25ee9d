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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bagcell/cli.hpp"

namespace bagcell {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("bagcell-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir;
};

TEST_F(Cli, EvalIdenticalFiles) {
  const auto boxes = write("boxes.txt", "f1 0 0.9 0 0 10 10\nf1 0 0.8 20 20 40 40\nf2 0 0.7 5 5 9 9\n");
  const auto r = cli({"eval", "--preds", boxes.string(), "--gts", boxes.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, "precision: 1.000000\nrecall: 1.000000\nf1: 1.000000\nap50: 1.000000\n");
}

TEST_F(Cli, EvalMalformedFile) {
  const auto bad = write("bad.txt", "f1 0 0.9 0 0\n");
  const auto r = cli({"eval", "--preds", bad.string(), "--gts", bad.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"run", "--cycles", "0"}).code, kExitUsage);
  EXPECT_EQ(cli({"run", "--style", "html"}).code, kExitUsage);
}

TEST_F(Cli, MissingConfigNamesPath) {
  const auto r = cli({"run", "-c", "/nonexistent/cell.json", "-o", dir.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("/nonexistent/cell.json"), std::string::npos) << r.err;
}

TEST_F(Cli, DumpConfigWithOverride) {
  const auto r = cli({"dump-config", "--set", "timing.grip_timeout_s=3.5", "--seed", "42"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("3.5"), std::string::npos);
  EXPECT_NE(r.out.find("\"seed\": 42"), std::string::npos);
  EXPECT_EQ(cli({"dump-config", "--set", "timing.nope=1"}).code, kExitUsage);
}

TEST_F(Cli, RunWritesTraceAndReports) {
  const auto r = cli({"run", "--cycles", "1", "-o", dir.string(), "--style", "csv"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "trace-test-01.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "report.csv"));
  EXPECT_TRUE(fs::exists(dir / "report.md"));
  EXPECT_EQ(r.out.rfind("Test,Detected", 0), 0u);
}

TEST_F(Cli, ReplayIsReproducible) {
  const auto script = write("s.script", "pick test=1 slot=2 fail x3\nplace test=2 slot=0 fail\n");
  const fs::path a = dir / "a";
  const fs::path b = dir / "b";
  ASSERT_EQ(cli({"replay", script.string(), "-o", a.string()}).code, kExitOk);
  ASSERT_EQ(cli({"replay", script.string(), "-o", b.string()}).code, kExitOk);
  for (const char* f : {"trace-test-01.jsonl", "trace-test-02.jsonl", "report.csv", "report.md"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_FALSE(slurp(a / f).empty()) << f;
  }
}

TEST_F(Cli, UnusedScriptLineWarns) {
  const auto script = write("s.script", "pick test=1 slot=2 attempt=9 fail\n");
  const auto r = cli({"replay", script.string(), "-o", dir.string()});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.err.find("never used"), std::string::npos);
}

TEST_F(Cli, MalformedScript) {
  const auto script = write("s.script", "pick slot=two fail\n");
  const auto r = cli({"replay", script.string(), "-o", dir.string()});
  EXPECT_EQ(r.code, kExitUsage);
}

TEST_F(Cli, OutputDirFromEnvironment) {
  const fs::path env_dir = dir / "env";
  setenv(kOutputDirEnv, env_dir.c_str(), 1);
  const auto r = cli({"run", "--cycles", "1"});
  unsetenv(kOutputDirEnv);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(env_dir / "report.csv"));
}

}  // namespace
}  // namespace bagcell
