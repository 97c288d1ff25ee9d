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

#include <sstream>

#include "bagcell/errors.hpp"
#include "bagcell/report.hpp"

namespace bagcell {
namespace {

RunReport row(int test, int d, int p, int pl, double seconds) {
  RunReport r;
  r.test = test;
  r.detected = d;
  r.picked = p;
  r.placed = pl;
  r.detected_first_attempt = d;
  r.total_time_s = seconds;
  return r;
}

std::vector<RunReport> ten_rows() {
  const int counts[10][3] = {{8, 7, 5}, {8, 8, 8}, {7, 5, 5}, {8, 6, 6}, {8, 8, 8},
                             {8, 7, 6}, {6, 6, 6}, {8, 8, 8}, {8, 6, 6}, {8, 8, 8}};
  std::vector<RunReport> rows;
  for (int i = 0; i < 10; ++i) {
    rows.push_back(row(i + 1, counts[i][0], counts[i][1], counts[i][2], 480.0 + 3.0 * i));
  }
  return rows;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

TEST(Stat, MeanAndSampleDeviation) {
  const auto s = compute_stat({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0});
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_NEAR(s.stddev, 2.138089935, 1e-9);
  EXPECT_EQ(s.n, 8);
  EXPECT_EQ(compute_stat({3.0}).stddev, 0.0);
}

TEST(Summary, Means) {
  const auto c = summarize_campaign(ten_rows());
  EXPECT_DOUBLE_EQ(c.mean_detected, 7.7);
  EXPECT_DOUBLE_EQ(c.mean_picked, 6.9);
  EXPECT_DOUBLE_EQ(c.mean_placed, 6.6);
  EXPECT_NEAR(c.mean_detection_rate, 96.25, 1e-9);
  EXPECT_NEAR(c.mean_picking_rate, 86.25, 1e-9);
  EXPECT_NEAR(c.mean_placing_rate, 82.50, 1e-9);
  EXPECT_NEAR(c.total_time_min.mean, (480.0 + 13.5) / 60.0, 1e-12);
  EXPECT_FALSE(c.aborted);
}

TEST(Summary, Empty) { EXPECT_THROW(summarize_campaign({}), EmptyCampaign); }

TEST(Table, CsvMeansRecomputable) {
  const auto c = summarize_campaign(ten_rows());
  const auto rows = parse_csv(render_table(c, TableStyle::Csv));
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0][0], "Test");
  EXPECT_EQ(rows[0][1], "Detected");
  EXPECT_EQ(rows.back()[0], "Mean");
  double sums[3] = {0, 0, 0};
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    for (int k = 0; k < 3; ++k) sums[k] += std::stod(rows[i][1 + k]);
  }
  EXPECT_NEAR(100.0 * sums[0] / 10 / 8, c.mean_detection_rate, 1e-9);
  EXPECT_NEAR(100.0 * sums[1] / 10 / 8, c.mean_picking_rate, 1e-9);
  EXPECT_NEAR(100.0 * sums[2] / 10 / 8, c.mean_placing_rate, 1e-9);
  EXPECT_EQ(rows.back()[5], "96.25");
  EXPECT_EQ(rows.back()[6], "86.25");
  EXPECT_EQ(rows.back()[7], "82.50");
}

TEST(Table, Stable) {
  const auto c = summarize_campaign(ten_rows());
  EXPECT_EQ(render_table(c, TableStyle::Csv), render_table(c, TableStyle::Csv));
  EXPECT_EQ(render_table(c, TableStyle::Markdown), render_table(c, TableStyle::Markdown));
}

TEST(Table, TimingColumnsOnlyWhenPresent) {
  auto rows = ten_rows();
  EXPECT_EQ(render_table(summarize_campaign(rows), TableStyle::Csv).find("Cutting"),
            std::string::npos);
  rows[0].phases.cutting_s = 15.7;
  const std::string text = render_table(summarize_campaign(rows), TableStyle::Csv);
  EXPECT_NE(text.find("Cutting (s)"), std::string::npos);
  EXPECT_NE(text.find("15.7"), std::string::npos);
}

TEST(Table, MarkdownHasSeparator) {
  const std::string md = render_table(summarize_campaign(ten_rows()), TableStyle::Markdown);
  std::istringstream in(md);
  std::string header, sep;
  std::getline(in, header);
  std::getline(in, sep);
  EXPECT_EQ(header.front(), '|');
  EXPECT_NE(sep.find("---"), std::string::npos);
}

TEST(Table, CycleColumnForMultiCycleRows) {
  auto rows = ten_rows();
  rows[1].cycle = 2;
  const auto parsed = parse_csv(render_table(summarize_campaign(rows), TableStyle::Csv));
  EXPECT_EQ(parsed[0][1], "Cycle");
}

TEST(Summary, Text) {
  const std::string s = render_summary(summarize_campaign(ten_rows()));
  EXPECT_NE(s.find("detection: 96.25%"), std::string::npos);
  EXPECT_EQ(s.find("aborted"), std::string::npos);
}

}  // namespace
}  // namespace bagcell
