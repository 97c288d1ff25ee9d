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

#include "bagcell/bus.hpp"

#include "bagcell/errors.hpp"

namespace bagcell {

std::vector<std::string> default_topics() {
  return {topics::kSystemReady,      topics::kReadyForPicking, topics::kSuctionCmd,
          topics::kPressure,         topics::kUltrasonic,      topics::kDrop,
          topics::kPlacementFeedback, topics::kFinishedCycle,  topics::kCutComplete,
          topics::kStartRemoval,     topics::kReadyForRemoval, topics::kRemovingBag,
          topics::kDelivery};
}

Bus::Bus() : Bus(default_topics()) {}

Bus::Bus(const std::vector<std::string>& topics) {
  for (const auto& t : topics) register_topic(t);
}

void Bus::register_topic(const std::string& topic) {
  if (topic.empty()) throw UnknownTopic(topic);
  topics_.try_emplace(topic, 0);
}

void Bus::add_subscriber(const std::string& name) {
  if (subscribers_.try_emplace(name).second) subscription_order_.push_back(name);
}

void Bus::subscribe(const std::string& subscriber, const std::string& topic) {
  auto it = subscribers_.find(subscriber);
  if (it == subscribers_.end()) throw UnknownSubscriber(subscriber);
  if (!has_topic(topic)) throw UnknownTopic(topic);
  it->second.topics.insert(topic);
}

std::uint64_t Bus::publish(const std::string& topic, Payload payload, double now) {
  auto it = topics_.find(topic);
  if (it == topics_.end()) throw UnknownTopic(topic);
  Message msg{topic, ++it->second, now, std::move(payload)};
  for (const auto& name : subscription_order_) {
    auto& sub = subscribers_.at(name);
    if (sub.topics.count(topic)) sub.queue.push_back(msg);
  }
  if (observer_) observer_(msg);
  return msg.seq;
}

std::vector<Message> Bus::poll(const std::string& subscriber) {
  auto it = subscribers_.find(subscriber);
  if (it == subscribers_.end()) throw UnknownSubscriber(subscriber);
  std::vector<Message> out(it->second.queue.begin(), it->second.queue.end());
  it->second.queue.clear();
  return out;
}

}  // namespace bagcell
