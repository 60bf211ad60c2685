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

#include "gas/control_envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gas/errors.hpp"

namespace gas::control {

namespace {

double wrap_angle(double x) {
  const double two_pi = 2.0 * std::numbers::pi;
  x = std::fmod(x + std::numbers::pi, two_pi);
  if (x < 0) x += two_pi;
  return x - std::numbers::pi;
}

}  // namespace

ControlState ControlEnv::initial(std::vector<double> physical) const {
  ControlState s;
  s.physical = std::move(physical);
  s.remaining_time = 1.0;
  s.step = 0;
  s.terminal = false;
  return s;
}

StepOutcome ControlEnv::step(const ControlState& state, double force) const {
  if (state.terminal) throw UsageError("step() after the episode ended");
  if (!(std::abs(force) <= 1.0)) throw UsageError("force must lie in [-1, 1]");

  StepOutcome out;
  out.next.physical = dynamics(state.physical, force);
  out.next.step = state.step + 1;
  out.next.remaining_time =
      static_cast<double>(time_limit_ - out.next.step) / time_limit_;
  out.reached_goal = goal(out.next);
  const bool timeout = out.next.step >= time_limit_;
  out.done = out.reached_goal || timeout;
  out.next.terminal = out.done;

  out.reward = -kActuationCost * std::abs(force);
  if (out.reached_goal) {
    out.reward += kGoalReward;
  } else if (timeout) {
    out.reward += kTimeoutPenalty;
  }
  return out;
}

ControlState MountainCar::reset(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> pos(-0.6, -0.4);
  return initial({pos(rng), 0.0});
}

std::vector<double> MountainCar::dynamics(const std::vector<double>& s,
                                          double force) const {
  double position = s[0];
  double velocity = s[1];
  velocity += force * kForce - kGravity * std::cos(3.0 * position);
  velocity = std::clamp(velocity, -kMaxSpeed, kMaxSpeed);
  position += velocity;
  position = std::clamp(position, kMinPosition, kMaxPosition);
  if (position == kMinPosition && velocity < 0) velocity = 0;
  return {position, velocity};
}

bool MountainCar::goal(const ControlState& state) const {
  return state.physical[0] >= kGoalPosition;
}

std::vector<float> MountainCar::features(const ControlState& state) const {
  const double mid = 0.5 * (kMaxPosition + kMinPosition);
  const double half = 0.5 * (kMaxPosition - kMinPosition);
  return {static_cast<float>((state.physical[0] - mid) / half),
          static_cast<float>(state.physical[1] / kMaxSpeed),
          static_cast<float>(state.remaining_time)};
}

ControlState Acrobot::reset(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> angle(-0.1, 0.1);
  const double t1 = angle(rng);
  const double t2 = angle(rng);
  return initial({t1, t2, 0.0, 0.0});
}

std::vector<double> Acrobot::derivatives(const std::vector<double>& s,
                                         double torque) {
  const double m1 = kLinkMass1, m2 = kLinkMass2;
  const double l1 = kLinkLength1;
  const double lc1 = kLinkCom1, lc2 = kLinkCom2;
  const double i1 = kLinkMoi, i2 = kLinkMoi;
  const double g = kGravity;
  const double theta1 = s[0], theta2 = s[1], dtheta1 = s[2], dtheta2 = s[3];

  const double d1 = m1 * lc1 * lc1 +
                    m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * std::cos(theta2)) +
                    i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + i2;
  const double phi2 =
      m2 * lc2 * g * std::cos(theta1 + theta2 - std::numbers::pi / 2.0);
  const double phi1 =
      -m2 * l1 * lc2 * dtheta2 * dtheta2 * std::sin(theta2) -
      2 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2) +
      (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - std::numbers::pi / 2.0) +
      phi2;
  // "Book" formulation of the second joint acceleration.
  const double ddtheta2 =
      (torque + d2 / d1 * phi1 -
       m2 * l1 * lc2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2) /
      (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
  return {dtheta1, dtheta2, ddtheta1, ddtheta2};
}

std::vector<double> Acrobot::dynamics(const std::vector<double>& s,
                                      double force) const {
  // Classic fourth-order Runge-Kutta over kSubsteps slices of kDt.
  std::vector<double> x = s;
  const double h = kDt / kSubsteps;
  auto offset = [](const std::vector<double>& base, const std::vector<double>& d, double c) {
    std::vector<double> out(4);
    for (int k = 0; k < 4; ++k) out[k] = base[k] + c * d[k];
    return out;
  };
  for (int i = 0; i < kSubsteps; ++i) {
    const auto k1 = derivatives(x, force);
    const auto k2 = derivatives(offset(x, k1, h / 2), force);
    const auto k3 = derivatives(offset(x, k2, h / 2), force);
    const auto k4 = derivatives(offset(x, k3, h), force);
    for (int k = 0; k < 4; ++k) x[k] += h / 6 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
  }
  x[0] = wrap_angle(x[0]);
  x[1] = wrap_angle(x[1]);
  x[2] = std::clamp(x[2], -kMaxVel1, kMaxVel1);
  x[3] = std::clamp(x[3], -kMaxVel2, kMaxVel2);
  return x;
}

bool Acrobot::goal(const ControlState& state) const {
  const double t1 = state.physical[0];
  const double t2 = state.physical[1];
  return -std::cos(t1) - std::cos(t1 + t2) > 1.0;
}

std::vector<float> Acrobot::features(const ControlState& state) const {
  const auto& s = state.physical;
  return {static_cast<float>(std::cos(s[0])),
          static_cast<float>(std::sin(s[0])),
          static_cast<float>(std::cos(s[1])),
          static_cast<float>(std::sin(s[1])),
          static_cast<float>(s[2] / kMaxVel1),
          static_cast<float>(s[3] / kMaxVel2),
          static_cast<float>(state.remaining_time)};
}

std::unique_ptr<ControlEnv> make_control_env(const std::string& name,
                                             int time_limit) {
  if (name == "mountain_car") return std::make_unique<MountainCar>(time_limit);
  if (name == "acrobot") return std::make_unique<Acrobot>(time_limit);
  throw ConfigError("unknown control task '" + name + "'");
}

}  // namespace gas::control
