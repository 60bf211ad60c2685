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

// Acceptance suite: one PASS/FAIL line per criterion. Criteria 1-8, 10 and
// 11 gate the exit status; criterion 9 (microbattle ordering) is reported
// but never fails the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gas/action_hierarchy.hpp"
#include "gas/config.hpp"
#include "gas/curriculum.hpp"
#include "gas/grouping.hpp"
#include "gas/harness.hpp"
#include "gas/metrics.hpp"
#include "gas/nn.hpp"
#include "gas/oracle.hpp"
#include "gas/plot.hpp"
#include "gas/trainer.hpp"
#include "gas/value_model.hpp"
#include "gradcheck.hpp"

namespace fs = std::filesystem;
using namespace gas;

namespace {

// Pinned tolerances and budgets.
constexpr double kMonotoneTol = 1e-9;
constexpr double kFixedPointTol = 1e-6;
constexpr double kGradTol = 1e-4;
constexpr double kFrequencyTol = 0.01;
constexpr double kGoalRateGas = 0.5;
constexpr double kGoalRateScratch = 0.1;
constexpr int kSeedsNeeded = 8;
constexpr double kWinrateMargin = 0.05;
// Microbattle runs at this fraction of the default schedule (updates,
// curriculum and epsilon decay together) to fit the 4 h budget on one core.
constexpr double kMicrobattleScale = 0.4;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class Net>
void jitter_biases(const std::vector<Net*>& nets, std::mt19937_64& rng) {
  // Zero biases put zero-input rows exactly on a relu kink.
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (auto* net : nets) {
    for (auto& layer : net->layers()) {
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) += u(rng);
    }
  }
}

model::BattleObservation random_observation(int allies, int enemies, int width,
                                             const std::vector<int>& groups_per_level,
                                             std::mt19937_64& rng) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  model::BattleObservation o;
  o.ally_features = Eigen::MatrixXf::NullaryExpr(allies, width, [&] { return n(rng); });
  o.enemy_features = Eigen::MatrixXf::NullaryExpr(enemies, width, [&] { return n(rng); });
  const int deepest = groups_per_level.back();
  std::uniform_int_distribution<int> g(0, deepest - 1);
  std::vector<int> leaf(allies);
  for (int& x : leaf) x = g(rng);
  for (int groups : groups_per_level) {
    std::vector<int> a(allies);
    for (int i = 0; i < allies; ++i) a[i] = leaf[i] / (deepest / groups);
    o.groups.push_back(a);
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion_1_2(bool fixed_points) {
  const oracle::SuiteReport r = oracle::run_suite(100, 2024, 8);
  if (!fixed_points) {
    return {r.monotone(kMonotoneTol) && r.seconds < 10.0,
            fmt::format("{} MDPs, worst V_i - V_j = {:.3g} (tol {:g}), {:.2f}s", r.mdps,
                        r.worst_monotonicity_gap, kMonotoneTol, r.seconds)};
  }
  return {r.fixed_points_match(kFixedPointTol) && r.seconds < 30.0,
          fmt::format("{} MDPs, worst sup-norm gap = {:.3g} (tol {:g}), {:.2f}s", r.mdps,
                      r.worst_fixed_point_error, kFixedPointTol, r.seconds)};
}

Outcome criterion_3() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  double worst = 0.0;
  int checked = 0;
  std::uniform_int_distribution<int> width(1, 6);
  std::uniform_int_distribution<int> depth(1, 3);
  std::bernoulli_distribution relu(0.5);
  std::normal_distribution<double> n(0.0, 1.0);

  // Plain networks, including input gradients through a downstream net.
  for (int k = 0; k < 100; ++k) {
    std::vector<int> widths{width(rng)};
    for (int d = depth(rng); d > 0; --d) widths.push_back(width(rng));
    const auto out_act = relu(rng) ? nn::Activation::kRelu : nn::Activation::kIdentity;
    nn::DenseNet<double> net(widths, nn::Activation::kRelu, out_act, rng);
    std::vector<nn::DenseNet<double>*> nets{&net};
    jitter_biases(nets, rng);
    const nn::Matrix<double> x =
        nn::Matrix<double>::NullaryExpr(4, widths.front(), [&] { return n(rng); });
    const nn::Matrix<double> w =
        nn::Matrix<double>::NullaryExpr(4, widths.back(), [&] { return n(rng); });
    net.forward(x);
    const auto grads = net.backward(w);
    const auto r = testing::check_gradients(
        nets, {grads}, [&] { return (w.array() * net.predict(x).array()).sum(); });
    worst = std::max(worst, r.max_relative_error);
    ++checked;
  }

  // Composition through the level heads.
  for (auto comp : {model::Composition::kComposed, model::Composition::kSeparate}) {
    model::ControlModelConfig c;
    c.composition = comp;
    c.input_width = 3;
    c.encoder_widths = {8, 6};
    c.refine_width = 5;
    c.delta_init_scale = 1.0;
    model::ControlValueModel<double> m(c, ActionHierarchy::force_ladder(2), rng);
    jitter_biases(m.networks(), rng);
    const nn::Matrix<double> x = nn::Matrix<double>::NullaryExpr(5, 3, [&] { return n(rng); });
    std::vector<Eigen::MatrixXd> w;
    for (int l = 0; l < 3; ++l) {
      w.push_back(Eigen::MatrixXd::NullaryExpr(5, m.hierarchy().size(l), [&] { return n(rng); }));
    }
    m.forward(x);
    const auto grads = m.backward(w);
    const auto r = testing::check_gradients(m.networks(), grads, [&] {
      const auto q = m.predict(x);
      double s = 0.0;
      for (int l = 0; l < 3; ++l) s += (w[l].array() * q.values[l].array()).sum();
      return s;
    });
    worst = std::max(worst, r.max_relative_error);
    ++checked;
  }

  // Masked group pooling in the battle model.
  for (auto comp : {model::Composition::kComposed, model::Composition::kSeparate}) {
    model::BattleModelConfig c;
    c.composition = comp;
    c.unit_feature_width = 5;
    c.unit_embed = 6;
    c.hidden = 5;
    c.head_hidden = 4;
    c.num_orders = 3;
    c.delta_init_scale = 1.0;
    model::BattleValueModel<double> m(c, rng);
    jitter_biases(m.networks(), rng);
    const std::vector<int> groups{1, 2, 4};
    std::vector<model::BattleObservation> batch{random_observation(5, 3, 5, groups, rng),
                                                random_observation(3, 0, 5, groups, rng)};
    const auto probe = m.predict(batch);
    std::vector<std::vector<Eigen::MatrixXd>> w(batch.size());
    for (std::size_t s = 0; s < batch.size(); ++s) {
      for (int l = 0; l < 3; ++l) {
        Eigen::MatrixXd g = Eigen::MatrixXd::NullaryExpr(groups[l], 3, [&] { return n(rng); });
        for (int grp = 0; grp < groups[l]; ++grp) {
          if (!probe[s].occupied[l][grp]) g.row(grp).setZero();
        }
        w[s].push_back(g);
      }
    }
    m.forward(batch);
    const auto grads = m.backward(w);
    const auto r = testing::check_gradients(m.networks(), grads, [&] {
      const auto qs = m.predict(batch);
      double s = 0.0;
      for (std::size_t i = 0; i < qs.size(); ++i) {
        for (int l = 0; l < 3; ++l) s += (w[i][l].array() * qs[i].values[l].array()).sum();
      }
      return s;
    });
    worst = std::max(worst, r.max_relative_error);
    ++checked;
  }
  const double secs = seconds_since(t0);
  return {worst < kGradTol && secs < 60.0,
          fmt::format("{} networks/models, worst relative error {:.3g} (tol {:g}), {:.2f}s",
                      checked, worst, kGradTol, secs)};
}

Outcome criterion_4() {
  std::mt19937_64 rng(4);
  std::normal_distribution<float> n(0.0f, 1.0f);
  long mismatches = 0;
  long comparisons = 0;
  for (auto comp : {model::Composition::kComposed, model::Composition::kSeparate}) {
    model::ControlModelConfig c;
    c.composition = comp;
    c.input_width = 3;
    c.delta_init_scale = 1.0;
    model::ControlValueModel<float> m(c, ActionHierarchy::force_ladder(2), rng);
    model::BattleModelConfig bc;
    bc.composition = comp;
    bc.unit_feature_width = battle::unit_feature_width(4);
    bc.unit_embed = 16;
    bc.hidden = 16;
    bc.head_hidden = 16;
    bc.delta_init_scale = 1.0;
    model::BattleValueModel<float> bm(bc, rng);
    const auto& h = m.hierarchy();
    for (int pass = 0; pass < 500; ++pass) {
      const nn::Matrix<float> x = nn::Matrix<float>::NullaryExpr(1, 3, [&] { return n(rng); });
      const auto q = m.predict(x).at(0);
      for (int l = 0; l < q.num_levels(); ++l) {
        for (int a = 0; a < h.size(l); ++a) {
          const double base = (comp == model::Composition::kSeparate || l == 0)
                                  ? 0.0
                                  : q.values[l - 1](0, h.parent_of(l, a));
          mismatches += q.values[l](0, a) - q.deltas[l](0, a) != base;
          ++comparisons;
        }
      }
      const auto o = random_observation(2 + pass % 9, pass % 5, bc.unit_feature_width,
                                        {1, 2, 4}, rng);
      const auto bq = bm.predict(std::span(&o, 1))[0];
      for (int l = 0; l < bq.num_levels(); ++l) {
        for (int g = 0; g < bq.values[l].rows(); ++g) {
          for (int a = 0; a < bq.values[l].cols(); ++a) {
            const double base = (comp == model::Composition::kSeparate || l == 0)
                                    ? bq.state_value
                                    : bq.values[l - 1](g / 2, a);
            mismatches += bq.values[l](g, a) - bq.deltas[l](g, a) != base;
            ++comparisons;
          }
        }
      }
    }
  }
  return {mismatches == 0,
          fmt::format("1000 forward passes per model kind, {} of {} identities inexact",
                      mismatches, comparisons)};
}

Outcome criterion_5() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  std::string detail;
  for (double alpha : {0.25, 0.5, 1.3}) {
    const int draws = 100000;
    std::map<int, int> counts;
    for (int i = 0; i < draws; ++i) ++counts[curriculum::sample_level(alpha, rng)];
    const int lo = static_cast<int>(std::floor(alpha));
    const double p_hi = alpha - lo;
    for (auto [level, count] : counts) {
      const double want = level == lo ? 1.0 - p_hi : level == lo + 1 ? p_hi : 0.0;
      worst = std::max(worst, std::abs(static_cast<double>(count) / draws - want));
    }
    detail += fmt::format(" a={}:P(l={})={:.4f}", alpha, lo + 1,
                          static_cast<double>(counts[lo + 1]) / draws);
  }
  return {worst <= kFrequencyTol,
          fmt::format("worst frequency error {:.4f} (tol {:g});{}", worst, kFrequencyTol, detail)};
}

Outcome criterion_6() {
  std::mt19937_64 rng(6);
  std::normal_distribution<float> n(0.0f, 1.0f);
  int failures = 0;
  int batches = 0;
  for (auto mode : {train::LevelUpdate::kOffActionSpace, train::LevelUpdate::kOnLevelOnly}) {
    auto want_terms = [&](int tag, int per_tag) {
      std::vector<int> want(3, 0);
      for (int l = 0; l < 3; ++l) {
        const bool on = mode == train::LevelUpdate::kOnLevelOnly ? l == tag : l >= tag;
        want[l] = on ? per_tag : 0;
      }
      return want;
    };
    // Control: 12 transitions, all with one tag.
    train::ControlTrainerConfig cc;
    cc.algorithm.level_update = mode;
    cc.encoder_widths = {16, 16};
    cc.refine_width = 16;
    train::ControlTrainer ct(cc, 1);
    for (int tag = 0; tag < 3; ++tag) {
      std::vector<train::ControlTransition> data(12);
      std::vector<const train::ControlTransition*> ptrs;
      for (auto& t : data) {
        t.state = {n(rng), n(rng), n(rng)};
        t.next_state = {n(rng), n(rng), n(rng)};
        t.level = tag;
        t.action = static_cast<int>(ptrs.size()) % (2 << tag);
        t.reward = n(rng);
        ptrs.push_back(&t);
      }
      failures += ct.train_step(ptrs).level_terms != want_terms(tag, 12);
      ++batches;
    }
    // Microbattle: 3 segments of 4 steps each, all with one tag.
    train::BattleTrainerConfig bc;
    bc.algorithm.level_update = mode;
    bc.scenario.ally_count = 6;
    bc.scenario.enemy_count = 6;
    bc.unit_embed = 16;
    bc.hidden = 16;
    bc.head_hidden = 16;
    train::BattleTrainer bt(bc, 2);
    battle::BattleSim sim(bc.scenario);
    const auto depths = bc.level_depths();
    for (int tag = 0; tag < 3; ++tag) {
      std::vector<train::NStepSegment> segs(3);
      std::vector<const train::NStepSegment*> ptrs;
      for (auto& seg : segs) {
        const auto state = sim.reset(rng);
        std::vector<grouping::UnitPosition> units;
        for (const auto& u : state.units) {
          if (u.team == battle::Team::kAlly) units.push_back({u.id, u.position});
        }
        const auto tree = grouping::build_group_tree(units, depths.back());
        const auto obs = train::make_observation(state, tree, depths);
        seg.level = tag;
        for (int t = 0; t < 4; ++t) {
          seg.observations.push_back(obs);
          std::vector<int> acts(1 << depths[tag]);
          for (int g = 0; g < static_cast<int>(acts.size()); ++g) {
            acts[g] = tree.group(depths[tag], g).empty() ? -1 : (t + g) % battle::kNumOrders;
          }
          seg.actions.push_back(acts);
          seg.rewards.push_back(0.1 * t);
        }
        seg.bootstrap = obs;
        ptrs.push_back(&seg);
      }
      failures += bt.train_step(ptrs).level_terms != want_terms(tag, 12);
      ++batches;
    }
  }
  return {failures == 0, fmt::format("{} crafted batches (control + microbattle, N = 3, "
                                     "off-action-space and ON-AC), {} with wrong level terms",
                                     batches, failures)};
}

Outcome criterion_7() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> count(1, 24);
  std::uniform_int_distribution<int> depth_dist(0, 3);
  std::uniform_real_distribution<double> coord(0.0, 30.0);
  std::uniform_real_distribution<double> nudge(-0.05, 0.05);
  std::uniform_int_distribution<int> kind(0, 3);
  long violations = 0;
  int unstable = 0;
  int degenerate = 0;
  const int configs = 10000;
  for (int trial = 0; trial < configs; ++trial) {
    const int shape = kind(rng);
    const int depth = depth_dist(rng);
    int n = count(rng);
    if (shape == 0) n = 1;                                     // a single unit
    if (shape == 1) n = std::max(1, (1 << depth) - 1);         // fewer units than groups
    std::vector<grouping::UnitPosition> units;
    const Vec2 shared{coord(rng), coord(rng)};
    for (int i = 0; i < n; ++i) {
      // shape 2: every unit on one spot
      const Vec2 p = shape == 2 ? shared : Vec2{coord(rng), coord(rng)};
      units.push_back({2 * i + 5, p});
    }
    degenerate += shape < 3;
    const auto tree = grouping::build_group_tree(units, depth);
    std::vector<int> ids;
    for (const auto& u : units) ids.push_back(u.id);
    for (int l = 0; l <= depth; ++l) {
      std::vector<int> seen;
      for (int g = 0; g < tree.num_groups(l); ++g) {
        const auto& grp = tree.group(l, g);
        for (int id : grp.members) {
          seen.push_back(id);
          violations += tree.group_of(l, id) != g;
        }
        if (l > 0) {
          const auto& parent = tree.group(l - 1, tree.parent_group(l, g));
          violations += !std::includes(parent.members.begin(), parent.members.end(),
                                       grp.members.begin(), grp.members.end());
        }
      }
      std::sort(seen.begin(), seen.end());
      violations += seen != ids;  // partition: every unit exactly once
    }
    // Warm start: the same positions reproduce the tree; a tiny drift of a
    // well-separated layout keeps every assignment.
    const auto again = grouping::build_group_tree(units, depth, 2, &tree);
    unstable += !again.same_assignment(tree);
    if (shape == 3) {
      auto moved = units;
      for (auto& u : moved) u.position = u.position + Vec2{nudge(rng), nudge(rng)};
      const auto drift = grouping::build_group_tree(moved, depth, 2, &tree);
      // Drift may legitimately flip a unit near a boundary; require only that
      // the tree stays a valid refinement, counted above via `again`.
      for (int l = 0; l <= depth; ++l) {
        int total = 0;
        for (int g = 0; g < drift.num_groups(l); ++g) {
          total += static_cast<int>(drift.group(l, g).members.size());
        }
        violations += total != n;
      }
    }
  }
  return {violations == 0 && unstable == 0,
          fmt::format("{} configurations ({} degenerate): {} invariant violations, {} "
                      "warm-start fixed-point failures",
                      configs, degenerate, violations, unstable)};
}

// ---------------------------------------------------------------------------

struct SeedSummary {
  double goal_rate = 0.0;
  double mean_return = 0.0;
};

std::vector<SeedSummary> final_window(const RunResult& r, int window) {
  std::vector<SeedSummary> out;
  for (const auto& f : r.metrics_files) {
    std::ifstream in(f);
    std::vector<MetricsRow> rows;
    for (const auto& row : read_metrics(in)) {
      if (row.epsilon > 0.0) rows.push_back(row);
    }
    const std::size_t n = std::min<std::size_t>(window, rows.size());
    SeedSummary s;
    for (std::size_t i = rows.size() - n; i < rows.size(); ++i) {
      s.goal_rate += rows[i].success ? 1.0 : 0.0;
      s.mean_return += rows[i].episode_return;
    }
    if (n > 0) {
      s.goal_rate /= n;
      s.mean_return /= n;
    }
    out.push_back(s);
  }
  return out;
}

void plot(const std::vector<std::string>& aggregates, const fs::path& out, XColumn x,
          const std::string& title) {
  std::vector<Curve> curves;
  for (const auto& path : aggregates) {
    std::ifstream in(path);
    curves.push_back({curve_label(path), read_aggregate(in)});
  }
  PlotOptions opt;
  opt.x = x;
  opt.title = title;
  std::ofstream(out) << render_svg(curves, opt);
}

Outcome criterion_8(const fs::path& root) {
  const fs::path dir = root / "mountain_car";
  fs::create_directories(dir);
  std::vector<std::uint64_t> seeds(10);
  std::iota(seeds.begin(), seeds.end(), 0);
  std::map<std::string, std::vector<SeedSummary>> runs;
  std::map<std::string, double> minutes;
  std::vector<std::string> aggregates;
  for (const std::string alg : {"gas", "scratch_fixed_level"}) {
    auto cfg = default_config("mountain_car", alg);
    cfg.name = alg == "gas" ? "gas2" : "a2_scratch";
    cfg.seeds = seeds;
    cfg.output_dir = dir.string();
    const auto t0 = Clock::now();
    const auto r = run_experiment(cfg, &std::cerr);
    minutes[alg] = seconds_since(t0) / 60.0;
    runs[alg] = final_window(r, 20);
    aggregates.push_back(r.aggregate_file);
  }
  plot(aggregates, dir / "mountain_car.svg", XColumn::kEnvSteps, "Mountain Car");

  auto count_if = [](const std::vector<SeedSummary>& v, auto pred) {
    return static_cast<int>(std::count_if(v.begin(), v.end(), pred));
  };
  auto mean_return = [](const std::vector<SeedSummary>& v) {
    double s = 0.0;
    for (const auto& x : v) s += x.mean_return;
    return s / v.size();
  };
  const int gas_ok =
      count_if(runs["gas"], [](const SeedSummary& s) { return s.goal_rate >= kGoalRateGas; });
  const int scratch_ok = count_if(runs["scratch_fixed_level"], [](const SeedSummary& s) {
    return s.goal_rate <= kGoalRateScratch;
  });
  const double gas_ret = mean_return(runs["gas"]);
  const double scratch_ret = mean_return(runs["scratch_fixed_level"]);
  const bool a = gas_ok >= kSeedsNeeded;
  const bool b = scratch_ok >= kSeedsNeeded;
  const bool c = gas_ret > scratch_ret;
  const bool budget = minutes["gas"] <= 30.0 && minutes["scratch_fixed_level"] <= 30.0;
  std::string rates;
  for (const auto& [alg, v] : runs) {
    rates += fmt::format(" {}=[", alg == "gas" ? "gas" : "a2");
    for (std::size_t i = 0; i < v.size(); ++i) {
      rates += fmt::format("{}{:.2f}", i ? " " : "", v[i].goal_rate);
    }
    rates += "]";
  }
  return {a && b && c && budget,
          fmt::format("(a) GAS(2) goal>=50% in {}/10 seeds [{}]; (b) A2 goal<=10% in {}/10 "
                      "[{}]; (c) final return GAS {:.2f} vs A2 {:.2f} [{}]; {:.1f}+{:.1f} min;{}",
                      gas_ok, a ? "ok" : "FAIL", scratch_ok, b ? "ok" : "FAIL", gas_ret,
                      scratch_ret, c ? "ok" : "FAIL", minutes["gas"],
                      minutes["scratch_fixed_level"], rates)};
}

Outcome criterion_9(const fs::path& root) {
  const fs::path dir = root / "microbattle";
  fs::create_directories(dir);
  std::map<std::string, double> winrate;
  std::vector<std::string> aggregates;
  const auto t0 = Clock::now();
  const std::vector<std::pair<std::string, int>> variants = {
      {"gas", 2}, {"scratch_fixed_level", 0}, {"scratch_fixed_level", 2}};
  for (const auto& [alg, level] : variants) {
    auto cfg = default_config("microbattle", alg);
    cfg.name = alg == "gas" ? "gas2" : fmt::format("a{}_scratch", level);
    cfg.fixed_level = level;
    cfg.seeds = {0, 1, 2, 3, 4};
    cfg.output_dir = dir.string();
    auto scale = [](std::int64_t v) {
      return static_cast<std::int64_t>(std::llround(v * kMicrobattleScale));
    };
    cfg.battle.total_updates = scale(cfg.battle.total_updates);
    cfg.schedule.lead_in = scale(cfg.schedule.lead_in);
    cfg.schedule.growth = scale(cfg.schedule.growth);
    cfg.epsilon.steps = scale(cfg.epsilon.steps);
    const auto r = run_experiment(cfg, &std::cerr);
    std::ifstream in(r.aggregate_file);
    const Aggregate agg = read_aggregate(in);
    winrate[cfg.name] = agg.points.empty() ? 0.0 : agg.points.back().mean;
    aggregates.push_back(r.aggregate_file);
  }
  plot(aggregates, dir / "microbattle.svg", XColumn::kModelUpdates, "Microbattle 20v20");
  const double hours = seconds_since(t0) / 3600.0;
  const double g = winrate["gas2"];
  const bool ok = g >= winrate["a0_scratch"] + kWinrateMargin &&
                  g >= winrate["a2_scratch"] + kWinrateMargin && hours <= 4.0;
  return {ok, fmt::format("final eval winrate GAS(2) {:.3f}, A0 {:.3f}, A2 {:.3f} "
                          "(margin {:g}); {:.2f} h; report only",
                          g, winrate["a0_scratch"], winrate["a2_scratch"], kWinrateMargin,
                          hours)};
}

// ---------------------------------------------------------------------------

ExperimentConfig smoke_config(const std::string& task, const std::string& alg) {
  auto cfg = default_config(task, alg);
  cfg.seeds = {1};
  cfg.save_checkpoint = false;
  if (cfg.is_control()) {
    cfg.control.total_env_steps = 4 * 1000 + cfg.control.batch_size;
    cfg.control.encoder_widths = {32, 32};
    cfg.control.refine_width = 32;
    cfg.schedule.lead_in = 1000;
    cfg.schedule.growth = 1000;
    cfg.epsilon.steps = 2000;
  } else {
    cfg.battle.total_updates = 1000;
    cfg.battle.scenario.ally_count = 8;
    cfg.battle.scenario.enemy_count = 8;
    cfg.battle.scenario.tick_limit = 60;
    cfg.battle.unit_embed = 32;
    cfg.battle.hidden = 32;
    cfg.battle.head_hidden = 32;
    cfg.schedule.lead_in = 200;
    cfg.schedule.growth = 200;
    cfg.epsilon.steps = 400;
  }
  return cfg;
}

Outcome criterion_10() {
  int identical = 0;
  int runs = 0;
  for (const char* task : {"mountain_car", "acrobot", "microbattle"}) {
    for (const char* alg : {"gas", "sep_q"}) {
      auto cfg = smoke_config(task, alg);
      if (cfg.is_control()) cfg.control.total_env_steps = 3000;
      else cfg.battle.total_updates = 150;
      std::ostringstream a, b;
      train_seed(cfg, 9, a);
      train_seed(cfg, 9, b);
      identical += a.str() == b.str() && !a.str().empty();
      ++runs;
    }
  }
  return {identical == runs,
          fmt::format("{}/{} repeated runs byte-identical (mountain_car, acrobot, "
                      "microbattle serial; gas and sep_q)",
                      identical, runs)};
}

Outcome criterion_11(const fs::path& root) {
  const auto t0 = Clock::now();
  const fs::path dir = root / "ablations";
  fs::create_directories(dir);
  std::vector<std::string> failures;
  int runs = 0;
  for (const char* task : {"mountain_car", "microbattle"}) {
    for (const char* alg : {"sep_q", "on_ac", "max_target", "slow_epsilon", "gas3"}) {
      const bool gas3 = std::string(alg) == "gas3";
      auto cfg = smoke_config(task, gas3 ? "gas" : alg);
      cfg.name = fmt::format("{}_{}", task, alg);
      cfg.output_dir = dir.string();
      if (gas3) {
        cfg.control.max_level = 3;
        cfg.battle.max_depth = 3;
        cfg.schedule.max_level = 3;
      }
      try {
        const auto r = run_experiment(cfg);
        std::ifstream in(r.metrics_files.at(0));
        const auto rows = read_metrics(in);
        const std::int64_t updates = rows.empty() ? 0 : rows.back().model_updates;
        if (updates < 1000 - 1) {
          failures.push_back(fmt::format("{}: {} updates", cfg.name, updates));
        }
      } catch (const std::exception& e) {
        failures.push_back(fmt::format("{}: {}", cfg.name, e.what()));
      }
      ++runs;
    }
  }

  // Max-level targets dominate standard ones on shared batches.
  std::mt19937_64 rng(11);
  std::normal_distribution<float> n(0.0f, 1.0f);
  long violations = 0;
  long samples = 0;
  train::ControlTrainerConfig std_cfg;
  std_cfg.encoder_widths = {32, 32};
  std_cfg.refine_width = 32;
  auto max_cfg = std_cfg;
  max_cfg.algorithm.target = train::TargetMode::kMaxLevels;
  train::ControlTrainer standard(std_cfg, 5), maxed(max_cfg, 5);
  std::vector<train::ControlTransition> data(256);
  std::vector<const train::ControlTransition*> ptrs;
  for (auto& t : data) {
    t.state = {n(rng), n(rng), n(rng)};
    t.next_state = {n(rng), n(rng), n(rng)};
    t.reward = n(rng);
    ptrs.push_back(&t);
  }
  for (int l = 0; l < 3; ++l) {
    const auto a = standard.targets(ptrs, l);
    const auto b = maxed.targets(ptrs, l);
    for (std::size_t i = 0; i < a.size(); ++i, ++samples) violations += b[i] < a[i];
  }
  model::BattleModelConfig bc;
  bc.unit_feature_width = 9;
  bc.unit_embed = 16;
  bc.hidden = 16;
  bc.head_hidden = 16;
  model::BattleValueModel<float> bm(bc, rng);
  std::vector<model::BattleObservation> batch;
  for (int i = 0; i < 64; ++i) batch.push_back(random_observation(3 + i % 7, 4, 9, {1, 2, 4}, rng));
  for (const auto& q : bm.predict(batch)) {
    for (int l = 0; l < 3; ++l, ++samples) {
      violations += train::bootstrap_value(q, l, train::TargetMode::kMaxLevels) <
                    train::bootstrap_value(q, l, train::TargetMode::kStandard);
    }
  }
  const double secs = seconds_since(t0);
  std::string detail = fmt::format(
      "{}/{} ablation runs reached 1000 updates; max-target < standard in {}/{} samples; "
      "{:.1f} min",
      runs - static_cast<int>(failures.size()), runs, violations, samples, secs / 60.0);
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty() && violations == 0 && secs < 600.0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  std::string out = "acceptance_runs";
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
  app.add_option("--out", out, "Directory for run artifacts");
  CLI11_PARSE(app, argc, argv);
  if (only.empty()) only = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  const fs::path root(out);
  fs::create_directories(root);

  const std::map<int, std::function<Outcome()>> criteria = {
      {1, [] { return criterion_1_2(false); }},
      {2, [] { return criterion_1_2(true); }},
      {3, criterion_3},
      {4, criterion_4},
      {5, criterion_5},
      {6, criterion_6},
      {7, criterion_7},
      {8, [&] { return criterion_8(root); }},
      {9, [&] { return criterion_9(root); }},
      {10, criterion_10},
      {11, [&] { return criterion_11(root); }},
  };
  bool gate = true;
  for (int id : only) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::cerr << "unknown criterion " << id << "\n";
      return 2;
    }
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool report_only = id == 9;
    std::cout << fmt::format("criterion {:>2}: {} - {}\n", id,
                             o.pass ? "PASS" : (report_only ? "MISS (report only)" : "FAIL"),
                             o.detail)
              << std::flush;
    if (!o.pass && !report_only) gate = false;
  }
  return gate ? 0 : 1;
}
