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

#include "gas/harness.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "gas/errors.hpp"
#include "gas/metrics.hpp"
#include "gas/trainer.hpp"

namespace gas {

namespace fs = std::filesystem;

namespace {

constexpr char kCheckpointMagic[6] = {'G', 'A', 'S', 'C', 'K', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw ConfigError("checkpoint truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

template <class Model>
std::vector<const nn::DenseNet<float>*> const_nets(const Model& m) {
  return m.networks();
}

template <class Model>
void install(Model& m, const std::vector<nn::DenseNet<float>>& nets) {
  auto dst = m.networks();
  if (dst.size() != nets.size()) {
    throw ConfigError(fmt::format("checkpoint holds {} networks, model expects {}", nets.size(),
                                  dst.size()));
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i]->layers().size() != nets[i].layers().size()) {
      throw ConfigError(fmt::format("checkpoint network {} has the wrong depth", i));
    }
    for (std::size_t l = 0; l < nets[i].layers().size(); ++l) {
      const auto& a = dst[i]->layers()[l];
      const auto& b = nets[i].layers()[l];
      if (a.in() != b.in() || a.out() != b.out() || a.activation != b.activation) {
        throw ConfigError(fmt::format("checkpoint network {} layer {} shape mismatch", i, l));
      }
    }
    dst[i]->load_snapshot(nets[i]);
  }
}

}  // namespace

CurveKind curve_kind(const ExperimentConfig& config) {
  return config.is_control() ? CurveKind::kTrainingReturn : CurveKind::kEvalWinrate;
}

void train_seed(const ExperimentConfig& config, std::uint64_t seed, std::ostream& out,
                const std::string& checkpoint_path) {
  write_metrics_header(out);
  auto sink = [&](const MetricsRow& row) {
    write_metrics_row(out, row, config.record_wall_clock);
  };
  if (config.is_control()) {
    train::ControlTrainer trainer(config.control_trainer(), seed);
    trainer.run(sink);
    if (!checkpoint_path.empty()) {
      save_checkpoint(checkpoint_path, config, const_nets(trainer.model()));
    }
  } else {
    train::BattleTrainer trainer(config.battle_trainer(), seed);
    trainer.run(sink);
    if (!checkpoint_path.empty()) {
      save_checkpoint(checkpoint_path, config, const_nets(trainer.model()));
    }
  }
}

RunResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  RunResult result;
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  result.config_file = (dir / (config.name + ".cfg")).string();
  {
    std::ofstream cfg(result.config_file);
    cfg << serialise(config);
  }
  std::vector<std::vector<MetricsRow>> per_seed;
  for (std::uint64_t seed : config.seeds) {
    const auto stem = fmt::format("{}_seed{}", config.name, seed);
    const auto csv = (dir / (stem + ".csv")).string();
    const auto ckpt = config.save_checkpoint ? (dir / (stem + ".ckpt")).string() : std::string();
    if (log) *log << fmt::format("[{}] seed {} -> {}", config.name, seed, csv) << std::endl;
    {
      std::ofstream out(csv);
      if (!out) throw ConfigError(fmt::format("cannot write '{}'", csv));
      train_seed(config, seed, out, ckpt);
    }
    result.metrics_files.push_back(csv);
    if (!ckpt.empty()) result.checkpoints.push_back(ckpt);
    std::ifstream in(csv);
    per_seed.push_back(read_metrics(in));
  }
  const auto agg = aggregate(per_seed, curve_kind(config), config.window);
  result.aggregate_file = (dir / (config.name + "_aggregate.csv")).string();
  std::ofstream out(result.aggregate_file);
  write_aggregate(out, agg);
  if (log) *log << fmt::format("[{}] aggregate -> {}", config.name, result.aggregate_file) << std::endl;
  return result;
}

void save_checkpoint(const std::string& path, const ExperimentConfig& config,
                     const std::vector<const nn::DenseNet<float>*>& networks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write checkpoint '{}'", path));
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  const auto text = serialise(config);
  write_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_u32(out, static_cast<std::uint32_t>(networks.size()));
  for (const auto* net : networks) nn::save(*net, out);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open checkpoint '{}'", path));
  char magic[sizeof kCheckpointMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw ConfigError(fmt::format("'{}' is not a checkpoint", path));
  }
  const auto len = read_u32(in);
  std::string text(len, '\0');
  if (!in.read(text.data(), len)) throw ConfigError("checkpoint truncated");
  std::istringstream cfg(text);
  Checkpoint c{parse_config(cfg, path + "#config"), {}};
  const auto count = read_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) c.networks.push_back(nn::load<float>(in));
  return c;
}

EvalSummary evaluate_checkpoint(const Checkpoint& ck, int episodes, std::uint64_t seed,
                                std::ostream* trace) {
  if (episodes <= 0) throw UsageError("evaluation needs at least one episode");
  std::mt19937_64 rng(seed);
  EvalSummary s;
  s.episodes = episodes;
  if (ck.config.is_control()) {
    train::ControlTrainer trainer(ck.config.control_trainer(), seed);
    install(trainer.model(), ck.networks);
    for (int i = 0; i < episodes; ++i) {
      const auto [ret, ok] = trainer.evaluate_episode(rng);
      s.mean_return += ret / episodes;
      s.success_rate += (ok ? 1.0 : 0.0) / episodes;
    }
  } else {
    train::BattleTrainer trainer(ck.config.battle_trainer(), seed);
    install(trainer.model(), ck.networks);
    const int level = trainer.model().num_levels() - 1;
    for (int i = 0; i < episodes; ++i) {
      const auto [ret, won] = trainer.evaluate_episode(level, rng, i == 0 ? trace : nullptr);
      s.mean_return += ret / episodes;
      s.success_rate += (won ? 1.0 : 0.0) / episodes;
    }
  }
  return s;
}

}  // namespace gas
