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
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace bagcell {

namespace topics {
inline constexpr const char* kSystemReady = "system_ready";
inline constexpr const char* kReadyForPicking = "ready_for_picking";
inline constexpr const char* kSuctionCmd = "suction_cmd";
inline constexpr const char* kPressure = "pressure";
inline constexpr const char* kUltrasonic = "ultrasonic";
inline constexpr const char* kDrop = "drop";
inline constexpr const char* kPlacementFeedback = "placement_feedback";
inline constexpr const char* kFinishedCycle = "finished_cycle";
inline constexpr const char* kCutComplete = "cut_complete";
inline constexpr const char* kStartRemoval = "start_removal";
inline constexpr const char* kReadyForRemoval = "ready_for_removal";
inline constexpr const char* kRemovingBag = "removing_bag";
inline constexpr const char* kDelivery = "delivery";
}  // namespace topics

/// The topic set used by the cell controller and the robot controller.
std::vector<std::string> default_topics();

struct CommandPayload {
  std::string command;
  std::string target;
  bool operator==(const CommandPayload&) const = default;
};

struct SensorPayload {
  std::string sensor;
  double value = 0.0;
  bool operator==(const SensorPayload&) const = default;
};

struct StatusPayload {
  std::string status;
  int stack = -1;
  int enclosure = -1;
  bool operator==(const StatusPayload&) const = default;
};

using Payload = std::variant<CommandPayload, SensorPayload, StatusPayload>;

struct Message {
  std::string topic;
  std::uint64_t seq = 0;  // per topic, starting at 1
  double timestamp = 0.0;
  Payload payload;
  bool operator==(const Message&) const = default;
};

/// In-process topic bus with synchronous queued delivery. Subscribers only
/// see messages published after they subscribed.
class Bus {
 public:
  Bus();
  explicit Bus(const std::vector<std::string>& topics);

  void register_topic(const std::string& topic);
  bool has_topic(const std::string& topic) const { return topics_.count(topic) > 0; }

  void add_subscriber(const std::string& name);
  void subscribe(const std::string& subscriber, const std::string& topic);

  std::uint64_t publish(const std::string& topic, Payload payload, double now);

  /// Drains the subscriber's queue in publish order.
  std::vector<Message> poll(const std::string& subscriber);

  /// Called for every published message (trace mirroring).
  void set_observer(std::function<void(const Message&)> observer) {
    observer_ = std::move(observer);
  }

 private:
  struct Subscriber {
    std::set<std::string> topics;
    std::deque<Message> queue;
  };

  std::map<std::string, std::uint64_t> topics_;  // topic -> last seq
  std::map<std::string, Subscriber> subscribers_;
  std::vector<std::string> subscription_order_;
  std::function<void(const Message&)> observer_;
};

}  // namespace bagcell
