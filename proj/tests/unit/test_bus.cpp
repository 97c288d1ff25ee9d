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

#include "bagcell/bus.hpp"
#include "bagcell/errors.hpp"

namespace bagcell {
namespace {

StatusPayload status(const std::string& s) { return {s, -1, -1}; }

TEST(Bus, FifoPerSubscriber) {
  Bus bus;
  bus.add_subscriber("robot");
  bus.subscribe("robot", topics::kDrop);
  EXPECT_EQ(bus.publish(topics::kDrop, status("A"), 1.0), 1u);
  EXPECT_EQ(bus.publish(topics::kDrop, status("B"), 2.0), 2u);
  const auto got = bus.poll("robot");
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(std::get<StatusPayload>(got[0].payload).status, "A");
  EXPECT_EQ(std::get<StatusPayload>(got[1].payload).status, "B");
  EXPECT_DOUBLE_EQ(got[1].timestamp, 2.0);
  EXPECT_TRUE(bus.poll("robot").empty());
}

TEST(Bus, UnknownTopic) {
  Bus bus;
  EXPECT_THROW(bus.publish("foo", status("x"), 0.0), UnknownTopic);
}

TEST(Bus, UnknownSubscriber) {
  Bus bus;
  EXPECT_THROW(bus.poll("nobody"), UnknownSubscriber);
}

TEST(Bus, InterleavedTopicsKeepPerTopicOrder) {
  Bus bus;
  bus.add_subscriber("s");
  bus.subscribe("s", topics::kDrop);
  bus.subscribe("s", topics::kPressure);
  bus.publish(topics::kDrop, status("A1"), 0.0);
  bus.publish(topics::kPressure, SensorPayload{"cobot_suction", -40.0}, 0.0);
  bus.publish(topics::kDrop, status("A2"), 0.0);
  const auto got = bus.poll("s");
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[0].topic, topics::kDrop);
  EXPECT_EQ(got[0].seq, 1u);
  EXPECT_EQ(got[1].topic, topics::kPressure);
  EXPECT_EQ(got[1].seq, 1u);
  EXPECT_EQ(got[2].seq, 2u);
}

TEST(Bus, NoRetroactiveDelivery) {
  Bus bus;
  bus.publish(topics::kDrop, status("early"), 0.0);
  bus.add_subscriber("late");
  bus.subscribe("late", topics::kDrop);
  EXPECT_TRUE(bus.poll("late").empty());
  bus.publish(topics::kDrop, status("later"), 1.0);
  const auto got = bus.poll("late");
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].seq, 2u);
}

TEST(Bus, FanOutIsIdentical) {
  Bus bus;
  for (const char* s : {"a", "b"}) {
    bus.add_subscriber(s);
    bus.subscribe(s, topics::kDelivery);
  }
  bus.publish(topics::kDelivery, status("delivered"), 3.0);
  bus.publish(topics::kDelivery, status("reset"), 4.0);
  EXPECT_EQ(bus.poll("a"), bus.poll("b"));
}

TEST(Bus, ObserverSeesEveryPublish) {
  Bus bus;
  std::vector<Message> seen;
  bus.set_observer([&](const Message& m) { seen.push_back(m); });
  bus.publish(topics::kSystemReady, status("ready"), 0.0);
  bus.publish(topics::kSuctionCmd, CommandPayload{"on", "cobot_suction"}, 0.5);
  ASSERT_EQ(seen.size(), 2u);
  EXPECT_EQ(seen[1].topic, topics::kSuctionCmd);
}

TEST(Bus, RegisteredTopicBecomesUsable) {
  Bus bus;
  bus.register_topic("lamp");
  EXPECT_TRUE(bus.has_topic("lamp"));
  EXPECT_EQ(bus.publish("lamp", status("on"), 0.0), 1u);
}

TEST(Bus, DeterministicAcrossRuns) {
  auto run = [] {
    Bus bus;
    bus.add_subscriber("s");
    for (const auto& t : default_topics()) bus.subscribe("s", t);
    for (int i = 0; i < 50; ++i) {
      const auto& topics = default_topics();
      bus.publish(topics[static_cast<std::size_t>(i * 7) % topics.size()], status(std::to_string(i)), i);
    }
    return bus.poll("s");
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace bagcell
