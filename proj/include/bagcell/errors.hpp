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

#include <stdexcept>
#include <string>

namespace bagcell {

// Base of every error thrown by the library. Simulation-level failures that
// are part of normal operation (plan failures, suction timeouts, stalls) are
// reported as values, not thrown.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigInvalid : public Error {
 public:
  ConfigInvalid(std::string field, std::string reason)
      : Error("invalid config field '" + field + "': " + reason),
        field_(std::move(field)),
        reason_(std::move(reason)) {}

  const std::string& field() const { return field_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string field_;
  std::string reason_;
};

class UnknownTopic : public Error {
 public:
  explicit UnknownTopic(const std::string& topic)
      : Error("unknown topic '" + topic + "'") {}
};

class UnknownSubscriber : public Error {
 public:
  explicit UnknownSubscriber(const std::string& name)
      : Error("unknown subscriber '" + name + "'") {}
};

class InvalidBox : public Error {
 public:
  using Error::Error;
};

class EmptyGroundTruth : public Error {
 public:
  EmptyGroundTruth()
      : Error("ground truth is empty but predictions are not; recall undefined") {}
};

class QRNotVisible : public Error {
 public:
  explicit QRNotVisible(int zone)
      : Error("no QR observation for zone " + std::to_string(zone)), zone_(zone) {}
  int zone() const { return zone_; }

 private:
  int zone_;
};

class NoDetections : public Error {
 public:
  NoDetections() : Error("no detections to select a pick target from") {}
};

class NonPositiveDepth : public Error {
 public:
  explicit NonPositiveDepth(double depth)
      : Error("depth must be positive, got " + std::to_string(depth)) {}
};

class InvalidCamera : public Error {
 public:
  using Error::Error;
};

class InvalidKinematics : public Error {
 public:
  using Error::Error;
};

class OutOfDomain : public Error {
 public:
  using Error::Error;
};

class TooFewWaypoints : public Error {
 public:
  explicit TooFewWaypoints(std::size_t n)
      : Error("need at least 2 waypoints, got " + std::to_string(n)) {}
};

class UnknownDevice : public Error {
 public:
  explicit UnknownDevice(const std::string& name)
      : Error("unknown device '" + name + "'") {}
};

class DeviceBusy : public Error {
 public:
  explicit DeviceBusy(const std::string& name)
      : Error("device '" + name + "' is executing a conflicting command") {}
};

class LifecycleViolation : public Error {
 public:
  using Error::Error;
};

class MalformedScript : public Error {
 public:
  MalformedScript(std::size_t line, const std::string& reason)
      : Error("fault script line " + std::to_string(line) + ": " + reason),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class MalformedTrace : public Error {
 public:
  MalformedTrace(std::size_t line, const std::string& reason)
      : Error("trace line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class MalformedBoxFile : public Error {
 public:
  MalformedBoxFile(std::size_t line, const std::string& reason)
      : Error("box file line " + std::to_string(line) + ": " + reason),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyCampaign : public Error {
 public:
  EmptyCampaign() : Error("campaign has no rows to summarize") {}
};

class AbortRequested : public Error {
 public:
  using Error::Error;
};

}  // namespace bagcell
