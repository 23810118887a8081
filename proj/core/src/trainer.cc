// Copyright 2026 The tdil Authors.
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

#include "tdil/trainer.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tdil/hash.h"
#include "tdil/replay.h"

namespace tdil {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string Resolve(const std::string& base, const std::string& path) {
  if (base.empty() || path.empty() || std::filesystem::path(path).is_absolute()) {
    return path;
  }
  return (std::filesystem::path(base) / path).string();
}

double Mean(double sum, std::int64_t count) {
  return count > 0 ? sum / double(count) : kNaN;
}

void AppendFile(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
}

nlohmann::json Number(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double FromJson(const nlohmann::json& j) {
  return j.is_null() ? kNaN : j.get<double>();
}

const char* const kMetricColumns[] = {
    "env_steps",       "td_loss",    "disc_loss",         "bc_loss",
    "raw_return",      "relative_return", "gt_return",    "steps_per_episode",
    "success_rate",    "acc_positive", "acc_contrastive", "acc_reversed"};

}  // namespace

Task LoadTask(const EnvConfig& config, const std::string& base_dir) {
  auto make = [&]() {
    if (config.kind == "grid") {
      if (config.map_path.empty()) throw Error("env.map is required for a grid");
      return Environment::Grid(LoadMap(ReadFile(Resolve(base_dir, config.map_path))),
                               config.goal_reward);
    }
    if (config.kind == "chain") {
      return Environment::Chain(config.chain_length, config.goal_reward);
    }
    throw Error("unknown env.kind '" + config.kind + "'");
  };
  Environment env = make();
  if (!config.demo_path.empty()) {
    ExpertDemo demo = LoadDemo(Resolve(base_dir, config.demo_path), env);
    return Task{std::move(env), std::move(demo)};
  }
  if (!config.route_path.empty()) {
    const Route route = ParseRoute(env, ReadFile(Resolve(base_dir, config.route_path)));
    ExpertDemo demo = MakeExpertDemo(env, route.actions, route.start);
    return Task{std::move(env), std::move(demo)};
  }
  if (env.is_grid()) throw Error("env.route or env.demo is required for a grid");
  std::vector<Action> advance(env.num_states() - 1, Action{0});
  ExpertDemo demo = MakeExpertDemo(env, advance, State{0});
  return Task{std::move(env), std::move(demo)};
}

EvalResult EvaluatePolicy(const Policy& policy, const Environment& env,
                          std::span<const State> starts, int cap) {
  if (starts.empty()) throw Error("evaluation needs at least one episode");
  EvalResult result;
  double gt = 0.0, steps = 0.0, successes = 0.0;
  for (const State& start : starts) {
    Trajectory traj;
    State s = start;
    bool success = false;
    for (int k = 0; k < cap; ++k) {
      const Action a = policy(s);
      const StepResult r = env.Step(s, a);
      traj.transitions.push_back({s, a, r.next, r.done});
      traj.total_gt_return += r.gt_reward;
      if (r.done) {
        success = true;
        break;
      }
      s = r.next;
    }
    gt += traj.total_gt_return;
    steps += success ? double(traj.size()) : double(cap);
    successes += success ? 1.0 : 0.0;
    result.trajectories.push_back(std::move(traj));
  }
  const double n = double(starts.size());
  result.mean_gt_return = gt / n;
  result.mean_steps = steps / n;
  result.success_rate = successes / n;
  return result;
}

EvalResult Evaluate(const SoftQAgent& agent, const Environment& env,
                    int n_episodes, Rng& rng, int cap) {
  if (n_episodes < 1) throw Error("evaluation needs at least one episode");
  std::vector<State> starts;
  for (int i = 0; i < n_episodes; ++i) starts.push_back(env.SampleStart(rng));
  return EvaluatePolicy([&agent](State s) { return agent.Greedy(s); }, env,
                        starts, cap);
}

EvalResult EvaluateExhaustive(const SoftQAgent& agent, const Environment& env,
                              int cap) {
  return EvaluatePolicy([&agent](State s) { return agent.Greedy(s); }, env,
                        env.start_support(), cap);
}

double MeanShortestPath(const Environment& env, std::span<const State> starts) {
  if (starts.empty()) throw Error("no start states");
  const State goal = env.goal();
  const std::vector<int> dist = DistanceToSet(env, std::span(&goal, 1));
  double sum = 0.0;
  for (const State& s : starts) {
    if (dist[s.id] < 0) throw Error("start state cannot reach the goal");
    sum += dist[s.id];
  }
  return sum / double(starts.size());
}

RunResult RunTraining(const TrainConfig& config, const Task& task,
                      const RunOutputs& outputs) {
  config.Validate();
  const Environment& env = task.env;
  const ExpertDemo& demo = task.demo;
  const ScheduleConfig& sched = config.schedule;
  const std::uint64_t seed = config.seed;

  RewardModel model(env, demo, config.reward);
  RunResult result;
  if (model.needs_discriminator() || sched.always_train_discriminator) {
    result.discriminator = std::make_unique<TransitionDiscriminator>(
        env, config.disc, DeriveSeed(seed, 3));
  }
  model.set_discriminator(result.discriminator.get());
  std::unique_ptr<GailDiscriminator> gail;
  if (model.needs_gail()) {
    gail = std::make_unique<GailDiscriminator>(env, config.gail.hidden,
                                               config.gail.adam,
                                               DeriveSeed(seed, 4));
  }
  model.set_gail(gail.get());
  const bool can_report_tdil =
      config.reward.tdil_backend != TdilBackend::kLearnedTarget ||
      result.discriminator != nullptr;

  result.agent = std::make_unique<SoftQAgent>(env.num_states(),
                                              env.num_actions(), config.agent);
  SoftQAgent& agent = *result.agent;
  ReplayBuffer buffer(sched.replay_capacity, DeriveSeed(seed, 2));
  Rng act_rng(DeriveSeed(seed, 0));
  Rng start_rng(DeriveSeed(seed, 1));
  Rng expert_rng(DeriveSeed(seed, 5));
  const std::uint64_t accuracy_seed = DeriveSeed(seed, 7);
  std::uniform_int_distribution<std::size_t> expert_pick(
      0, demo.trajectory.size() - 1);
  std::uniform_int_distribution<int> random_action(0, env.num_actions() - 1);
  std::vector<Transition> heldout;
  std::size_t push_index = 0;

  std::vector<State> eval_starts;
  if (sched.eval_episodes == 0) {
    eval_starts = env.start_support();
  } else {
    Rng eval_rng(DeriveSeed(seed, 6));
    for (int i = 0; i < sched.eval_episodes; ++i) {
      eval_starts.push_back(env.SampleStart(eval_rng));
    }
  }
  result.convergence_bar =
      sched.convergence_ratio * MeanShortestPath(env, eval_starts);

  const std::string& dir = outputs.directory;
  if (!dir.empty()) {
    std::filesystem::create_directories(std::filesystem::path(dir) / "snapshots");
    WriteFile(dir + "/registry.jsonl", "");
    WriteFile(dir + "/metrics.csv", FormatMetricsCsv({}));
  }

  std::vector<State> all_states = env.EnumerateStates();
  double td_sum = 0.0, disc_sum = 0.0, bc_sum = 0.0;
  std::int64_t td_n = 0, disc_n = 0, bc_n = 0;

  auto checkpoint = [&](std::int64_t env_steps) {
    const EvalResult ev = EvaluatePolicy(
        [&agent](State s) { return agent.Greedy(s); }, env, eval_starts,
        sched.episode_cap);
    CheckpointRecord rec;
    rec.env_steps = env_steps;
    rec.gt_return = ev.mean_gt_return;
    rec.steps_per_episode = ev.mean_steps;
    rec.success_rate = ev.success_rate;
    rec.raw_return = kNaN;
    rec.relative_return = kNaN;
    if (can_report_tdil) {
      const std::vector<double> tdil = model.TdilForNextStates(all_states);
      auto reward = [&tdil](const Transition& t) { return tdil[t.next.id]; };
      double raw = 0.0;
      for (const Trajectory& traj : ev.trajectories) raw += RawReturn(traj, reward);
      rec.raw_return = raw / double(ev.trajectories.size());
      const double expert_raw = RawReturn(demo.trajectory, reward);
      if (expert_raw != 0.0) rec.relative_return = rec.raw_return / expert_raw;
    }
    const std::string agent_bytes = SerializeAgent(agent);
    rec.agent_snapshot = GitBlobHash(agent_bytes);
    std::string disc_bytes;
    if (result.discriminator) {
      disc_bytes = SerializeDiscriminator(*result.discriminator);
      rec.discriminator_snapshot = GitBlobHash(disc_bytes);
    }

    MetricRow row;
    row.env_steps = env_steps;
    row.td_loss = Mean(td_sum, td_n);
    row.disc_loss = Mean(disc_sum, disc_n);
    row.bc_loss = Mean(bc_sum, bc_n);
    row.raw_return = rec.raw_return;
    row.relative_return = rec.relative_return;
    row.gt_return = rec.gt_return;
    row.steps_per_episode = rec.steps_per_episode;
    row.success_rate = rec.success_rate;
    row.acc_positive = row.acc_contrastive = row.acc_reversed = kNaN;
    if (result.discriminator && !heldout.empty()) {
      const AccuracyReport acc =
          EvaluateAccuracy(*result.discriminator, env, heldout, accuracy_seed);
      row.acc_positive = acc.acc_positive;
      row.acc_contrastive = acc.acc_contrastive;
      row.acc_reversed = acc.acc_reversed;
    }
    td_sum = disc_sum = bc_sum = 0.0;
    td_n = disc_n = bc_n = 0;

    if (!dir.empty()) {
      if (env_steps % sched.checkpoint_interval == 0) {
        WriteFile(dir + "/snapshots/" + rec.agent_snapshot + ".bin", agent_bytes);
        if (!disc_bytes.empty()) {
          WriteFile(dir + "/snapshots/" + rec.discriminator_snapshot + ".bin",
                    disc_bytes);
        }
      }
      AppendFile(dir + "/registry.jsonl", FormatRegistryLine(rec) + "\n");
      std::string csv = FormatMetricsCsv(std::span(&row, 1));
      AppendFile(dir + "/metrics.csv", csv.substr(csv.find('\n') + 1));
    }
    result.registry.push_back(rec);
    result.metrics.push_back(row);
    return rec.steps_per_episode < result.convergence_bar;
  };

  std::int64_t it = 0;
  try {
    checkpoint(0);
    State s = env.SampleStart(start_rng);
    int episode_steps = 0;
    std::vector<Transition> batch;
    std::vector<State> batch_states;
    for (it = 1; it <= sched.total_env_steps; ++it) {
      const Action a = it <= sched.random_steps
                           ? Action{random_action(act_rng)}
                           : agent.Act(s, ActMode::kSample, act_rng);
      const StepResult r = env.Step(s, a);
      const Transition t{s, a, r.next, r.done};
      if (IsHeldOut(push_index++)) {
        heldout.push_back(t);
      } else {
        buffer.Push(t);
      }
      ++episode_steps;
      if (r.done || episode_steps >= sched.episode_cap) {
        s = env.SampleStart(start_rng);
        episode_steps = 0;
      } else {
        s = r.next;
      }

      if (!buffer.empty()) {
        if (result.discriminator) {
          for (int k = 0; k < sched.disc_updates_per_step; ++k) {
            disc_sum += result.discriminator->TrainFromBuffer(buffer);
            ++disc_n;
          }
        }
        if (gail) {
          std::vector<std::pair<State, Action>> expert_pairs, agent_pairs;
          for (std::size_t k = 0; k < config.gail.batch; ++k) {
            const Transition& e = demo.trajectory.transitions[expert_pick(expert_rng)];
            expert_pairs.push_back({e.s, e.a});
            const Transition& b = buffer.Sample();
            agent_pairs.push_back({b.s, b.a});
          }
          gail->TrainStep(expert_pairs, agent_pairs);
        }
        for (int u = 0; u < sched.agent_updates_per_step; ++u) {
          batch.clear();
          for (std::size_t k = 0; k < sched.agent_batch; ++k) {
            batch.push_back(buffer.Sample());
          }
          for (std::size_t k = 0; k < sched.expert_batch; ++k) {
            batch.push_back(demo.trajectory.transitions[expert_pick(expert_rng)]);
          }
          const std::vector<double> rewards = model.Rewards(batch);
          td_sum += agent.CriticUpdate(batch, rewards);
          ++td_n;
          batch_states.clear();
          for (const Transition& b : batch) batch_states.push_back(b.s);
          agent.ActorUpdate(batch_states);
        }
        bc_sum += agent.BcUpdate(demo);
        ++bc_n;
      }

      if (it % sched.eval_interval == 0) {
        const bool converged = checkpoint(it);
        if (converged && sched.stop_at_convergence) break;
      }
    }
  } catch (const TrainingError&) {
    throw;
  } catch (const std::exception& e) {
    throw TrainingError(e.what(), it, result.registry);
  }
  result.env_steps = std::min(it, sched.total_env_steps);
  return result;
}

std::optional<std::int64_t> FirstConvergence(std::span<const MetricRow> rows,
                                             double bar) {
  for (const MetricRow& r : rows) {
    if (r.steps_per_episode < bar) return r.env_steps;
  }
  return std::nullopt;
}

namespace {

const CheckpointRecord& ArgMax(std::span<const CheckpointRecord> registry,
                               double CheckpointRecord::*field) {
  if (registry.empty()) throw Error("empty checkpoint registry");
  const CheckpointRecord* best = nullptr;
  for (const CheckpointRecord& r : registry) {
    const double v = r.*field;
    if (std::isnan(v)) continue;
    if (!best || v > best->*field ||
        (v == best->*field && r.env_steps >= best->env_steps)) {
      best = &r;
    }
  }
  if (!best) throw Error("no checkpoint carries a finite selection value");
  return *best;
}

}  // namespace

const CheckpointRecord& BlindSelect(std::span<const CheckpointRecord> registry) {
  return ArgMax(registry, &CheckpointRecord::relative_return);
}

const CheckpointRecord& OracleSelect(std::span<const CheckpointRecord> registry) {
  return ArgMax(registry, &CheckpointRecord::gt_return);
}

RankCorrelation CorrelationReport(std::span<const CheckpointRecord> registry) {
  if (registry.size() < 3) {
    throw Error("correlation report needs at least three checkpoints");
  }
  std::vector<double> rel, gt;
  for (const CheckpointRecord& r : registry) {
    rel.push_back(r.relative_return);
    gt.push_back(r.gt_return);
  }
  return Spearman(rel, gt);
}

std::string FormatMetricsCsv(std::span<const MetricRow> rows) {
  std::string out;
  for (std::size_t i = 0; i < std::size(kMetricColumns); ++i) {
    if (i) out += ',';
    out += kMetricColumns[i];
  }
  out += '\n';
  for (const MetricRow& r : rows) {
    out += std::to_string(r.env_steps);
    for (double v : {r.td_loss, r.disc_loss, r.bc_loss, r.raw_return,
                     r.relative_return, r.gt_return, r.steps_per_episode,
                     r.success_rate, r.acc_positive, r.acc_contrastive,
                     r.acc_reversed}) {
      out += ',';
      out += std::isnan(v) ? "nan" : FormatDouble(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<MetricRow> ParseMetricsCsv(std::string_view text) {
  std::vector<MetricRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line.rfind("env_steps,", 0) != 0) {
        throw ParseError("missing metric header", 1, 1);
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != std::size(kMetricColumns)) {
      throw ParseError("expected " + std::to_string(std::size(kMetricColumns)) +
                           " columns", line_no, 1);
    }
    auto num = [&](std::size_t i) {
      if (cells[i] == "nan") return kNaN;
      double v = 0.0;
      auto [p, ec] = std::from_chars(cells[i].data(), cells[i].data() + cells[i].size(), v);
      if (ec != std::errc() || p != cells[i].data() + cells[i].size()) {
        throw ParseError("bad number '" + cells[i] + "'", line_no, int(i) + 1);
      }
      return v;
    };
    MetricRow r;
    r.env_steps = static_cast<std::int64_t>(num(0));
    double* fields[] = {&r.td_loss, &r.disc_loss, &r.bc_loss, &r.raw_return,
                        &r.relative_return, &r.gt_return, &r.steps_per_episode,
                        &r.success_rate, &r.acc_positive, &r.acc_contrastive,
                        &r.acc_reversed};
    for (std::size_t i = 0; i < std::size(fields); ++i) *fields[i] = num(i + 1);
    rows.push_back(r);
  }
  return rows;
}

std::string FormatRegistryLine(const CheckpointRecord& r) {
  nlohmann::json j;
  j["env_steps"] = r.env_steps;
  j["agent_snapshot"] = r.agent_snapshot;
  j["discriminator_snapshot"] = r.discriminator_snapshot;
  j["raw_return"] = Number(r.raw_return);
  j["relative_return"] = Number(r.relative_return);
  j["gt_return"] = Number(r.gt_return);
  j["steps_per_episode"] = Number(r.steps_per_episode);
  j["success_rate"] = Number(r.success_rate);
  return j.dump();
}

std::vector<CheckpointRecord> ParseRegistry(std::string_view jsonl) {
  std::vector<CheckpointRecord> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      CheckpointRecord r;
      r.env_steps = j.at("env_steps").get<std::int64_t>();
      r.agent_snapshot = j.at("agent_snapshot").get<std::string>();
      r.discriminator_snapshot = j.at("discriminator_snapshot").get<std::string>();
      r.raw_return = FromJson(j.at("raw_return"));
      r.relative_return = FromJson(j.at("relative_return"));
      r.gt_return = FromJson(j.at("gt_return"));
      r.steps_per_episode = FromJson(j.at("steps_per_episode"));
      r.success_rate = FromJson(j.at("success_rate"));
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad registry record: ") + e.what(), line_no, 1);
    }
  }
  return out;
}

std::string FormatManifest(const RunManifest& m) {
  nlohmann::json j;
  j["config"] = m.config_text;
  j["seeds"] = m.seeds;
  j["map_hash"] = m.map_hash;
  j["demo_hash"] = m.demo_hash;
  j["output_directory"] = m.output_directory;
  j["command_line"] = m.command_line;
  j["evaluation_mode"] = m.evaluation_mode;
  return j.dump(2) + "\n";
}

RunManifest ParseManifest(std::string_view json) {
  try {
    const nlohmann::json j = nlohmann::json::parse(json);
    RunManifest m;
    m.config_text = j.at("config").get<std::string>();
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.map_hash = j.at("map_hash").get<std::string>();
    m.demo_hash = j.at("demo_hash").get<std::string>();
    m.output_directory = j.at("output_directory").get<std::string>();
    m.command_line = j.at("command_line").get<std::string>();
    m.evaluation_mode = j.at("evaluation_mode").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad run manifest: ") + e.what());
  }
}

}  // namespace tdil
