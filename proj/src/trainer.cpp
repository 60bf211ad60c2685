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

#include "gas/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>

namespace gas::train {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int ipow(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void check_loss(double loss) {
  if (!std::isfinite(loss)) {
    throw NumericError(fmt::format("non-finite training loss {}", loss));
  }
}

}  // namespace

std::vector<int> levels_to_update(int tag, int num_levels, LevelUpdate mode) {
  if (tag < 0 || tag >= num_levels) {
    throw UsageError(fmt::format("level tag {} outside [0, {})", tag, num_levels));
  }
  if (mode == LevelUpdate::kOnLevelOnly) return {tag};
  std::vector<int> out;
  for (int l = tag; l < num_levels; ++l) out.push_back(l);
  return out;
}

std::vector<int> epsilon_greedy(const QValueSet& q, int level, double epsilon,
                                std::mt19937_64& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw UsageError(fmt::format("epsilon {} outside [0, 1]", epsilon));
  }
  auto out = model::greedy_actions(q, level);
  if (epsilon == 0.0) return out;
  const int num_actions = static_cast<int>(q.values[level].cols());
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, num_actions - 1);
  for (auto& a : out) {
    if (a < 0) continue;
    if (coin(rng) < epsilon) a = pick(rng);
  }
  return out;
}

double bootstrap_value(const QValueSet& next, int level, TargetMode mode) {
  if (mode == TargetMode::kStandard) return model::max_joint_value(next, level);
  double best = model::max_joint_value(next, 0);
  for (int i = 1; i <= level; ++i) best = std::max(best, model::max_joint_value(next, i));
  return best;
}

double td_target(double reward, bool done, double gamma, const QValueSet& next,
                 int level, int tag, TargetMode mode) {
  if (level < tag) {
    throw UsageError(fmt::format("target for level {} below the data's tag {}", level, tag));
  }
  if (done) return reward;
  return reward + gamma * bootstrap_value(next, level, mode);
}

double nstep_return(std::span<const double> rewards, bool terminal, double gamma,
                    double bootstrap) {
  double g = terminal ? 0.0 : bootstrap;
  for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) g = *it + gamma * g;
  return g;
}

// ---------------------------------------------------------------------------
// Control

void ControlTrainerConfig::validate() const {
  if (time_limit <= 0) throw ConfigError("time_limit must be positive");
  if (max_level < 0 || max_level > 8) throw ConfigError("max_level must be in [0, 8]");
  if (algorithm.fixed_level && (*algorithm.fixed_level < 0 || *algorithm.fixed_level > 8)) {
    throw ConfigError("fixed_level must be in [0, 8]");
  }
  schedule.validate();
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in (0, 1)");
  if (batch_size <= 0 || replay_capacity <= 0 || target_interval <= 0 ||
      env_steps_per_update <= 0 || total_env_steps <= 0) {
    throw ConfigError("batch, replay, interval and step counts must be positive");
  }
  if (epsilon.start < 0 || epsilon.start > 1 || epsilon.end < 0 || epsilon.end > 1) {
    throw ConfigError("epsilon values must be in [0, 1]");
  }
}

namespace {

ActionHierarchy control_hierarchy(const ControlTrainerConfig& c) {
  if (c.algorithm.fixed_level) {
    const int l = *c.algorithm.fixed_level;
    return ActionHierarchy::single_level(ActionHierarchy::force_ladder(l).payloads(l));
  }
  return ActionHierarchy::force_ladder(c.max_level);
}

model::ControlModelConfig control_model_config(const ControlTrainerConfig& c,
                                               int input_width) {
  model::ControlModelConfig m;
  m.composition = c.algorithm.composition;
  m.input_width = input_width;
  m.encoder_widths = c.encoder_widths;
  m.refine_width = c.refine_width;
  return m;
}

nn::Matrix<float> stack(std::span<const ControlTransition* const> batch, bool next) {
  const int width = static_cast<int>(batch.front()->state.size());
  nn::Matrix<float> m(static_cast<Eigen::Index>(batch.size()), width);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& v = next ? batch[i]->next_state : batch[i]->state;
    for (int j = 0; j < width; ++j) m(static_cast<Eigen::Index>(i), j) = v[j];
  }
  return m;
}

template <class M>
std::vector<nn::DenseNet<float>*> nets_of(M& m) {
  return m.networks();
}

}  // namespace

ControlTrainer::ControlTrainer(ControlTrainerConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      env_(control::make_control_env(config_.task, config_.time_limit)),
      rng_(seed),
      replay_(static_cast<std::size_t>(config_.replay_capacity)) {
  config_.validate();
  model_ = Model(control_model_config(config_, env_->feature_width()),
                 control_hierarchy(config_), rng_);
  target_ = model_.snapshot();
  auto nets = nets_of(model_);
  adam_ = nn::Adam<float>(config_.adam, nets);
}

int ControlTrainer::reported_level(int level) const {
  return config_.algorithm.fixed_level ? *config_.algorithm.fixed_level : level;
}

int ControlTrainer::act(std::span<const float> features, int level, double epsilon) {
  const int n = model_.hierarchy().size(level);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (epsilon > 0.0 && coin(rng_) < epsilon) {
    return std::uniform_int_distribution<int>(0, n - 1)(rng_);
  }
  nn::Matrix<float> x(1, static_cast<Eigen::Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j) x(0, static_cast<Eigen::Index>(j)) = features[j];
  const auto q = model_.predict(x);
  Eigen::Index best = 0;
  q.values[level].row(0).maxCoeff(&best);
  return static_cast<int>(best);
}

std::vector<double> ControlTrainer::targets(
    std::span<const ControlTransition* const> batch, int level) const {
  const auto next = target_.predict(stack(batch, true));
  std::vector<double> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto* t = batch[i];
    out.push_back(td_target(t->reward, t->done, config_.gamma,
                            next.at(static_cast<int>(i)), level, t->level,
                            config_.algorithm.target));
  }
  return out;
}

LossDiagnostics ControlTrainer::train_step(
    std::span<const ControlTransition* const> batch) {
  if (batch.empty()) throw UsageError("train_step on an empty batch");
  const int levels = model_.num_levels();
  const int b = static_cast<int>(batch.size());
  const auto next = target_.predict(stack(batch, true));
  const auto q = model_.forward(stack(batch, false));

  LossDiagnostics d;
  d.level_loss.assign(levels, 0.0);
  d.level_terms.assign(levels, 0);
  std::vector<Eigen::MatrixXd> grads;
  for (int l = 0; l < levels; ++l) {
    grads.push_back(Eigen::MatrixXd::Zero(b, model_.hierarchy().size(l)));
  }
  for (int i = 0; i < b; ++i) {
    const auto* t = batch[i];
    const auto qn = next.at(i);
    for (int l : levels_to_update(t->level, levels, config_.algorithm.level_update)) {
      const double y = td_target(t->reward, t->done, config_.gamma, qn, l, t->level,
                                 config_.algorithm.target);
      const double err = q.values[l](i, t->action) - y;
      d.level_loss[l] += err * err / b;
      ++d.level_terms[l];
      grads[l](i, t->action) += 2.0 * err / b;
    }
  }
  for (double v : d.level_loss) d.loss += v;
  check_loss(d.loss);

  const auto g = model_.backward(grads);
  auto nets = nets_of(model_);
  adam_.step(nets, g);
  ++updates_;
  if (updates_ % config_.target_interval == 0) target_ = model_.snapshot();
  return d;
}

void ControlTrainer::run(const MetricsSink& sink) {
  const auto start = Clock::now();
  const bool fixed = config_.algorithm.fixed_level.has_value();
  while (env_steps_ < config_.total_env_steps) {
    const double alpha = fixed ? static_cast<double>(*config_.algorithm.fixed_level)
                               : curriculum::alpha_at(config_.schedule, env_steps_);
    const int level = fixed ? 0 : curriculum::sample_level(alpha, rng_);
    const double eps_start = config_.epsilon.at(env_steps_);
    auto state = env_->reset(rng_);
    auto features = env_->features(state);
    double ret = 0.0;
    double loss_sum = 0.0;
    int loss_count = 0;
    bool goal = false;
    for (;;) {
      const double eps = config_.epsilon.at(env_steps_);
      const int action = act(features, level, eps);
      const auto out = env_->step(state, model_.hierarchy().payload(level, action));
      auto next_features = env_->features(out.next);
      ret += out.reward;
      goal = goal || out.reached_goal;
      replay_.push({features, action, out.reward, next_features, out.done, level});
      ++env_steps_;
      if (env_steps_ % config_.env_steps_per_update == 0 &&
          replay_.size() >= static_cast<std::size_t>(config_.batch_size)) {
        const auto batch = replay_.sample(config_.batch_size, rng_);
        loss_sum += train_step(batch).loss;
        ++loss_count;
      }
      if (out.done) break;
      state = out.next;
      features = std::move(next_features);
    }
    MetricsRow row;
    row.episode = episodes_++;
    row.env_steps = env_steps_;
    row.model_updates = updates_;
    row.alpha = alpha;
    row.level = reported_level(level);
    row.episode_return = ret;
    row.success = goal;
    row.epsilon = eps_start;
    row.mean_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
    row.wall_clock = seconds_since(start);
    if (sink) sink(row);
  }
}

std::pair<double, bool> ControlTrainer::evaluate_episode(std::mt19937_64& rng) {
  const int level = model_.num_levels() - 1;
  auto state = env_->reset(rng);
  double ret = 0.0;
  for (;;) {
    const auto f = env_->features(state);
    nn::Matrix<float> x(1, static_cast<Eigen::Index>(f.size()));
    for (std::size_t j = 0; j < f.size(); ++j) x(0, static_cast<Eigen::Index>(j)) = f[j];
    Eigen::Index best = 0;
    model_.predict(x).values[level].row(0).maxCoeff(&best);
    const auto out = env_->step(state, model_.hierarchy().payload(level, static_cast<int>(best)));
    ret += out.reward;
    if (out.done) return {ret, out.reached_goal};
    state = out.next;
  }
}

// ---------------------------------------------------------------------------
// Microbattle

void BattleTrainerConfig::validate() const {
  scenario.validate();
  if (max_depth < 0 || max_depth > 6) throw ConfigError("max_depth must be in [0, 6]");
  if (branching < 2) throw ConfigError("branching must be >= 2");
  if (algorithm.fixed_level && (*algorithm.fixed_level < 0 || *algorithm.fixed_level > 6)) {
    throw ConfigError("fixed_level must be in [0, 6]");
  }
  schedule.validate();
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in (0, 1)");
  if (n_step <= 0 || batch_segments <= 0 || target_interval <= 0 ||
      total_updates <= 0 || envs_per_actor <= 0 || workers <= 0 ||
      sync_interval <= 0 || eval_every <= 0) {
    throw ConfigError("segment, batch, interval and worker counts must be positive");
  }
  if (queue_capacity < batch_segments) {
    throw ConfigError("queue_capacity must hold at least one batch");
  }
  if (epsilon.start < 0 || epsilon.start > 1 || epsilon.end < 0 || epsilon.end > 1) {
    throw ConfigError("epsilon values must be in [0, 1]");
  }
}

std::vector<int> BattleTrainerConfig::level_depths() const {
  if (algorithm.fixed_level) return {*algorithm.fixed_level};
  std::vector<int> d;
  for (int l = 0; l <= max_depth; ++l) d.push_back(l);
  return d;
}

model::BattleObservation make_observation(const battle::BattleState& state,
                                          const grouping::GroupTree& tree,
                                          std::span<const int> level_depths) {
  const int deepest = level_depths.back();
  const int num_groups = ipow(tree.branching(), deepest);
  const int width = battle::unit_feature_width(num_groups);
  const int allies = state.count(battle::Team::kAlly);
  const int enemies = state.count(battle::Team::kEnemy);
  model::BattleObservation obs;
  obs.ally_features.resize(allies, width);
  obs.enemy_features.resize(enemies, width);
  obs.groups.assign(level_depths.size(), std::vector<int>(allies));
  int a = 0;
  int e = 0;
  for (const auto& u : state.units) {
    if (u.team == battle::Team::kAlly) {
      const auto f = unit_features(state, u, tree.group_of(deepest, u.id), num_groups);
      for (int j = 0; j < width; ++j) obs.ally_features(a, j) = f[j];
      for (std::size_t l = 0; l < level_depths.size(); ++l) {
        obs.groups[l][a] = tree.group_of(level_depths[l], u.id);
      }
      ++a;
    } else {
      const auto f = unit_features(state, u, -1, num_groups);
      for (int j = 0; j < width; ++j) obs.enemy_features(e, j) = f[j];
      ++e;
    }
  }
  return obs;
}

std::vector<int> expand_actions(std::span<const int> actions, int from_depth,
                                int to_depth, int branching) {
  if (to_depth < from_depth) throw UsageError("expand_actions: target depth is shallower");
  const int factor = ipow(branching, to_depth - from_depth);
  std::vector<int> out(actions.size() * factor);
  for (std::size_t g = 0; g < out.size(); ++g) out[g] = actions[g / factor];
  return out;
}

namespace {

std::vector<grouping::UnitPosition> ally_positions(const battle::BattleState& s) {
  std::vector<grouping::UnitPosition> out;
  for (const auto& u : s.units) {
    if (u.team == battle::Team::kAlly) out.push_back({u.id, u.position});
  }
  return out;
}

std::vector<std::vector<int>> members_at(const grouping::GroupTree& tree, int depth) {
  std::vector<std::vector<int>> out;
  for (const auto& g : tree.level(depth)) out.push_back(g.members);
  return out;
}

std::vector<battle::GroupCommand> commands_for(std::span<const int> orders) {
  std::vector<battle::GroupCommand> out;
  for (std::size_t g = 0; g < orders.size(); ++g) {
    if (orders[g] >= 0) out.push_back({static_cast<int>(g), orders[g]});
  }
  return out;
}

template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  // False once closed.
  bool push(T item) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  std::vector<T> pop_batch(std::size_t n) {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || items_.size() >= n; });
    std::vector<T> out;
    while (out.size() < n && !items_.empty()) {
      out.push_back(std::move(items_.front()));
      items_.pop_front();
    }
    not_full_.notify_all();
    return out;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_full_.notify_all();
    not_empty_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
  bool closed_ = false;
  std::mutex mu_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
};

}  // namespace

// Steps a set of environments in lockstep with one batched forward per
// decision and cuts their episodes into n-step segments.
class BattleTrainer::Actor {
 public:
  struct Episode {
    int level = 0;
    double alpha = 0.0;
    double epsilon = 0.0;
    bool eval = false;
    double ret = 0.0;
  };

  Actor(const BattleTrainer& owner, std::uint64_t seed)
      : owner_(owner), rng_(seed), slots_(owner.config_.envs_per_actor) {}

  // One decision in every environment. Finished segments go to `emit`,
  // finished episodes to `finish`.
  template <class Emit, class Finish>
  void step_all(const Model& model, std::int64_t updates, Emit&& emit, Finish&& finish) {
    const auto& cfg = owner_.config_;
    const auto& depths = owner_.depths_;
    const int deepest = depths.back();
    for (auto& s : slots_) {
      if (!s.active) begin(s, updates);
      auto positions = ally_positions(s.state);
      s.tree = grouping::build_group_tree(positions, deepest, cfg.branching,
                                          s.has_tree ? &s.tree : nullptr);
      s.has_tree = true;
      s.obs = make_observation(s.state, s.tree, depths);
      if (static_cast<int>(s.pending.rewards.size()) == cfg.n_step) {
        s.pending.bootstrap = s.obs;
        emit(std::move(s.pending));
        s.pending = fresh_segment(s.episode.level);
      }
    }
    std::vector<model::BattleObservation> batch;
    batch.reserve(slots_.size());
    for (auto& s : slots_) batch.push_back(s.obs);
    const auto q = model.predict(batch);
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      auto& s = slots_[i];
      const int level = s.episode.level;
      const double eps = s.episode.eval ? 0.0 : cfg.epsilon.at(updates);
      const auto orders = epsilon_greedy(q[i], level, eps, rng_);
      const auto cmds = commands_for(orders);
      const auto r = owner_.sim_.step(s.state, members_at(s.tree, depths[level]), cmds);
      ++env_steps_;
      s.episode.ret += r.reward;
      if (!s.episode.eval) {
        s.pending.observations.push_back(std::move(s.obs));
        s.pending.actions.push_back(orders);
        s.pending.rewards.push_back(r.reward);
      }
      if (r.done) {
        if (!s.episode.eval && !s.pending.rewards.empty()) {
          s.pending.terminal = true;
          emit(std::move(s.pending));
        }
        finish(s.episode, r.won, env_steps_);
        if (!s.episode.eval) ++train_episodes_since_eval_;
        s.active = false;
      }
    }
  }

  std::int64_t env_steps() const { return env_steps_; }

 private:
  struct Slot {
    bool active = false;
    battle::BattleState state;
    grouping::GroupTree tree;
    bool has_tree = false;
    model::BattleObservation obs;
    NStepSegment pending;
    Episode episode;
  };

  static NStepSegment fresh_segment(int level) {
    NStepSegment s;
    s.level = level;
    return s;
  }

  void begin(Slot& s, std::int64_t updates) {
    const auto& cfg = owner_.config_;
    const bool fixed = cfg.algorithm.fixed_level.has_value();
    s.episode = Episode{};
    s.episode.alpha = fixed ? static_cast<double>(*cfg.algorithm.fixed_level)
                            : curriculum::alpha_at(cfg.schedule, updates);
    s.episode.level = fixed ? 0 : curriculum::sample_level(s.episode.alpha, rng_);
    s.episode.eval = train_episodes_since_eval_ >= cfg.eval_every;
    if (s.episode.eval) train_episodes_since_eval_ = 0;
    s.episode.epsilon = s.episode.eval ? 0.0 : cfg.epsilon.at(updates);
    s.state = owner_.sim_.reset(rng_);
    s.has_tree = false;
    s.pending = fresh_segment(s.episode.level);
    s.active = true;
  }

  const BattleTrainer& owner_;
  std::mt19937_64 rng_;
  std::vector<Slot> slots_;
  std::int64_t env_steps_ = 0;
  int train_episodes_since_eval_ = 0;
};

BattleTrainer::BattleTrainer(BattleTrainerConfig config, std::uint64_t seed)
    : config_(std::move(config)), sim_(config_.scenario), rng_(seed) {
  config_.validate();
  depths_ = config_.level_depths();
  model::BattleModelConfig m;
  m.composition = config_.algorithm.composition;
  m.level_depths = depths_;
  m.branching = config_.branching;
  m.unit_feature_width = battle::unit_feature_width(ipow(config_.branching, depths_.back()));
  m.unit_embed = config_.unit_embed;
  m.hidden = config_.hidden;
  m.head_hidden = config_.head_hidden;
  m.num_orders = battle::kNumOrders;
  model_ = Model(m, rng_);
  target_ = model_.snapshot();
  auto nets = model_.networks();
  adam_ = nn::Adam<float>(config_.adam, nets);
}

int BattleTrainer::reported_level(int level) const {
  return config_.algorithm.fixed_level ? *config_.algorithm.fixed_level : level;
}

LossDiagnostics BattleTrainer::train_step(std::span<const NStepSegment* const> batch) {
  if (batch.empty()) throw UsageError("train_step on an empty batch");
  const int levels = model_.num_levels();
  std::vector<model::BattleObservation> states;
  std::vector<model::BattleObservation> boots;
  std::vector<int> first;     // first state index per segment
  std::vector<int> boot_idx;  // bootstrap index per segment, -1 if terminal
  for (const auto* seg : batch) {
    if (seg->rewards.empty() || seg->observations.size() != seg->rewards.size() ||
        seg->actions.size() != seg->rewards.size()) {
      throw UsageError("malformed n-step segment");
    }
    if (!seg->terminal && !seg->bootstrap) {
      throw UsageError("non-terminal segment without a bootstrap state");
    }
    first.push_back(static_cast<int>(states.size()));
    states.insert(states.end(), seg->observations.begin(), seg->observations.end());
    if (seg->terminal) {
      boot_idx.push_back(-1);
    } else {
      boot_idx.push_back(static_cast<int>(boots.size()));
      boots.push_back(*seg->bootstrap);
    }
  }
  const auto next = target_.predict(boots);
  const auto q = model_.forward(states);
  const int b = static_cast<int>(states.size());

  LossDiagnostics d;
  d.level_loss.assign(levels, 0.0);
  d.level_terms.assign(levels, 0);
  std::vector<std::vector<Eigen::MatrixXd>> grads(b);
  for (int i = 0; i < b; ++i) {
    for (int l = 0; l < levels; ++l) {
      grads[i].push_back(Eigen::MatrixXd::Zero(q[i].values[l].rows(), q[i].values[l].cols()));
    }
  }
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& seg = *batch[j];
    const int len = static_cast<int>(seg.rewards.size());
    for (int l : levels_to_update(seg.level, levels, config_.algorithm.level_update)) {
      double g = boot_idx[j] < 0 ? 0.0
                                 : bootstrap_value(next[boot_idx[j]], l, config_.algorithm.target);
      for (int t = len - 1; t >= 0; --t) {
        g = seg.rewards[t] + config_.gamma * g;
        const int i = first[j] + t;
        const auto acts = expand_actions(seg.actions[t], depths_[seg.level], depths_[l],
                                         config_.branching);
        const double err = model::joint_value(q[i], l, acts) - g;
        d.level_loss[l] += err * err / b;
        ++d.level_terms[l];
        const auto& occ = q[i].occupied[l];
        const int n_occ = static_cast<int>(std::count(occ.begin(), occ.end(), 1));
        for (std::size_t grp = 0; grp < occ.size(); ++grp) {
          if (occ[grp]) grads[i][l](static_cast<Eigen::Index>(grp), acts[grp]) += 2.0 * err / (b * n_occ);
        }
      }
    }
  }
  for (double v : d.level_loss) d.loss += v;
  check_loss(d.loss);

  const auto g = model_.backward(grads);
  auto nets = model_.networks();
  adam_.step(nets, g);
  finish_update();
  return d;
}

void BattleTrainer::finish_update() {
  ++updates_;
  if (updates_ % config_.target_interval == 0) target_ = model_.snapshot();
}

void BattleTrainer::run(const MetricsSink& sink) {
  if (config_.workers == 1) {
    run_serial(sink);
  } else {
    run_parallel(sink);
  }
}

void BattleTrainer::run_serial(const MetricsSink& sink) {
  const auto start = Clock::now();
  Actor actor(*this, rng_());
  std::deque<NStepSegment> queue;
  std::int64_t episodes = 0;
  double loss_sum = 0.0;
  int loss_count = 0;
  auto emit = [&](NStepSegment s) { queue.push_back(std::move(s)); };
  auto finish = [&](const Actor::Episode& e, bool won, std::int64_t env_steps) {
    MetricsRow row;
    row.episode = episodes++;
    row.env_steps = env_steps;
    row.model_updates = updates_;
    row.alpha = e.alpha;
    row.level = reported_level(e.level);
    row.episode_return = e.ret;
    row.success = won;
    row.epsilon = e.epsilon;
    row.mean_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
    row.wall_clock = seconds_since(start);
    loss_sum = 0.0;
    loss_count = 0;
    if (sink) sink(row);
  };
  while (updates_ < config_.total_updates) {
    while (queue.size() < static_cast<std::size_t>(config_.batch_segments)) {
      actor.step_all(model_, updates_, emit, finish);
    }
    std::vector<NStepSegment> batch;
    for (int i = 0; i < config_.batch_segments; ++i) {
      batch.push_back(std::move(queue.front()));
      queue.pop_front();
    }
    std::vector<const NStepSegment*> ptrs;
    for (const auto& s : batch) ptrs.push_back(&s);
    loss_sum += train_step(ptrs).loss;
    ++loss_count;
    // The short queue never holds more than its capacity of stale data.
    while (queue.size() > static_cast<std::size_t>(config_.queue_capacity)) queue.pop_front();
  }
}

void BattleTrainer::run_parallel(const MetricsSink& sink) {
  const auto start = Clock::now();
  BoundedQueue<NStepSegment> queue(static_cast<std::size_t>(config_.queue_capacity));
  std::mutex model_mu;
  std::shared_ptr<const Model> shared = std::make_shared<const Model>(model_.snapshot());
  std::atomic<std::int64_t> published_updates{0};
  std::atomic<std::int64_t> env_steps{0};
  std::atomic<bool> stop{false};
  std::mutex sink_mu;
  std::int64_t episodes = 0;
  std::exception_ptr failure;

  std::vector<std::uint64_t> seeds;
  for (int w = 0; w < config_.workers; ++w) seeds.push_back(rng_());

  std::vector<std::thread> threads;
  for (int w = 0; w < config_.workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        Actor actor(*this, seeds[w]);
        std::int64_t last = 0;
        auto emit = [&](NStepSegment s) {
          if (!queue.push(std::move(s))) stop = true;
        };
        auto finish = [&](const Actor::Episode& e, bool won, std::int64_t) {
          MetricsRow row;
          row.env_steps = env_steps.load();
          row.model_updates = published_updates.load();
          row.alpha = e.alpha;
          row.level = reported_level(e.level);
          row.episode_return = e.ret;
          row.success = won;
          row.epsilon = e.epsilon;
          row.wall_clock = seconds_since(start);
          std::lock_guard lock(sink_mu);
          row.episode = episodes++;
          if (sink) sink(row);
        };
        while (!stop) {
          std::shared_ptr<const Model> m;
          {
            std::lock_guard lock(model_mu);
            m = shared;
          }
          const auto before = actor.env_steps();
          actor.step_all(*m, published_updates.load(), emit, finish);
          env_steps += actor.env_steps() - before;
          (void)last;
        }
      } catch (...) {
        std::lock_guard lock(sink_mu);
        if (!failure) failure = std::current_exception();
        stop = true;
        queue.close();
      }
    });
  }

  try {
    while (updates_ < config_.total_updates && !stop) {
      auto batch = queue.pop_batch(static_cast<std::size_t>(config_.batch_segments));
      if (batch.size() < static_cast<std::size_t>(config_.batch_segments)) break;
      std::vector<const NStepSegment*> ptrs;
      for (const auto& s : batch) ptrs.push_back(&s);
      train_step(ptrs);
      published_updates = updates_;
      if (updates_ % config_.sync_interval == 0) {
        auto snap = std::make_shared<const Model>(model_.snapshot());
        std::lock_guard lock(model_mu);
        shared = std::move(snap);
      }
    }
  } catch (...) {
    stop = true;
    queue.close();
    for (auto& t : threads) t.join();
    throw;
  }
  stop = true;
  queue.close();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::pair<double, bool> BattleTrainer::evaluate_episode(int level, std::mt19937_64& rng,
                                                        std::ostream* trace) {
  if (level < 0 || level >= model_.num_levels()) {
    throw UsageError(fmt::format("no model level {}", level));
  }
  auto state = sim_.reset(rng);
  grouping::GroupTree tree;
  bool has_tree = false;
  double ret = 0.0;
  if (trace) battle::write_trace_header(*trace);
  for (;;) {
    if (trace) battle::write_trace(*trace, state);
    tree = grouping::build_group_tree(ally_positions(state), depths_.back(),
                                      config_.branching, has_tree ? &tree : nullptr);
    has_tree = true;
    const model::BattleObservation obs[] = {make_observation(state, tree, depths_)};
    const auto q = model_.predict(obs);
    const auto orders = model::greedy_actions(q[0], level);
    const auto r = sim_.step(state, members_at(tree, depths_[level]), commands_for(orders));
    ret += r.reward;
    if (r.done) {
      if (trace) battle::write_trace(*trace, state);
      return {ret, r.won};
    }
  }
}

}  // namespace gas::train
