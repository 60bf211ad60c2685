// Copyright 2026 The GAS Curriculum Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Discretised-action classic control tasks with a sparse goal reward, a
// timeout penalty, a per-step actuation cost and a remaining-time feature.

#include <memory>
#include <random>
#include <string>
#include <vector>

namespace gas::control {

inline constexpr int kDefaultTimeLimit = 500;
inline constexpr double kActuationCost = 0.05;
inline constexpr double kGoalReward = 1.0;
inline constexpr double kTimeoutPenalty = -1.0;

struct ControlState {
  std::vector<double> physical;  // task-specific raw state
  double remaining_time = 1.0;   // (T_max - t) / T_max
  int step = 0;
  bool terminal = false;
};

struct StepOutcome {
  ControlState next;
  double reward = 0.0;
  bool done = false;
  bool reached_goal = false;
};

class ControlEnv {
 public:
  explicit ControlEnv(int time_limit) : time_limit_(time_limit) {}
  virtual ~ControlEnv() = default;

  virtual std::string name() const = 0;
  virtual ControlState reset(std::mt19937_64& rng) const = 0;

  // Throws UsageError when state.terminal or |force| > 1.
  StepOutcome step(const ControlState& state, double force) const;

  virtual bool goal(const ControlState& state) const = 0;

  // Normalised network input; the last entry is the remaining-time feature.
  virtual std::vector<float> features(const ControlState& state) const = 0;
  virtual int feature_width() const = 0;

  int time_limit() const { return time_limit_; }

 protected:
  // Advance the physical state by one decision with the given force.
  virtual std::vector<double> dynamics(const std::vector<double>& physical,
                                       double force) const = 0;
  ControlState initial(std::vector<double> physical) const;

 private:
  int time_limit_;
};

// position, velocity
class MountainCar final : public ControlEnv {
 public:
  static constexpr double kMinPosition = -1.2;
  static constexpr double kMaxPosition = 0.6;
  static constexpr double kMaxSpeed = 0.07;
  static constexpr double kGoalPosition = 0.5;
  static constexpr double kForce = 0.001;
  static constexpr double kGravity = 0.0025;

  explicit MountainCar(int time_limit = kDefaultTimeLimit)
      : ControlEnv(time_limit) {}

  std::string name() const override { return "mountain_car"; }
  ControlState reset(std::mt19937_64& rng) const override;
  bool goal(const ControlState& state) const override;
  std::vector<float> features(const ControlState& state) const override;
  int feature_width() const override { return 3; }

 protected:
  std::vector<double> dynamics(const std::vector<double>& physical,
                               double force) const override;
};

// theta1, theta2, dtheta1, dtheta2
class Acrobot final : public ControlEnv {
 public:
  static constexpr double kDt = 0.2;
  static constexpr int kSubsteps = 1;
  static constexpr double kLinkLength1 = 1.0;
  static constexpr double kLinkMass1 = 1.0;
  static constexpr double kLinkMass2 = 1.0;
  static constexpr double kLinkCom1 = 0.5;
  static constexpr double kLinkCom2 = 0.5;
  static constexpr double kLinkMoi = 1.0;
  static constexpr double kGravity = 9.8;
  static constexpr double kMaxVel1 = 4.0 * 3.14159265358979323846;
  static constexpr double kMaxVel2 = 9.0 * 3.14159265358979323846;

  explicit Acrobot(int time_limit = kDefaultTimeLimit)
      : ControlEnv(time_limit) {}

  std::string name() const override { return "acrobot"; }
  ControlState reset(std::mt19937_64& rng) const override;
  bool goal(const ControlState& state) const override;
  std::vector<float> features(const ControlState& state) const override;
  int feature_width() const override { return 7; }

  // Time derivative of (theta1, theta2, dtheta1, dtheta2) under torque.
  static std::vector<double> derivatives(const std::vector<double>& s,
                                         double torque);

 protected:
  std::vector<double> dynamics(const std::vector<double>& physical,
                               double force) const override;
};

std::unique_ptr<ControlEnv> make_control_env(const std::string& name,
                                             int time_limit = kDefaultTimeLimit);

}  // namespace gas::control
