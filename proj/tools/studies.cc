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

#include "studies.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

#include "tdil/config.h"

namespace tdil::cli {
namespace {

// Calls fn(i) for i in [0, n) on up to `jobs` threads. The first exception
// is rethrown after all workers stop.
void ParallelFor(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(std::size_t(jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

const char* VariantName(RewardVariant v) {
  switch (v) {
    case RewardVariant::kIrl: return "irl";
    case RewardVariant::kL2: return "l2";
    case RewardVariant::kTdil: return "tdil";
  }
  return "?";
}

TrainConfig StudyConfig(const GridStudy& study) {
  TrainConfig c;
  c.env.kind = "grid";
  c.env.map_path = study.map_path;
  c.env.route_path = study.route_path;
  c.schedule.total_env_steps = study.budget;
  c.schedule.eval_interval = study.eval_interval;
  c.schedule.checkpoint_interval = study.eval_interval;
  c.disc.backend = study.backend;
  if (study.backend == DiscriminatorBackend::kTable) {
    c.disc.adam.learning_rate = kTableLearningRate;
  }
  return c;
}

TrainConfig WithVariant(TrainConfig config, RewardVariant variant) {
  switch (variant) {
    case RewardVariant::kIrl:
      config.reward.kind = RewardKind::kAggregate;
      config.reward.beta = 1.0;
      config.reward.irl_mode = IrlMode::kIndicator;
      break;
    case RewardVariant::kL2:
      config.reward.kind = RewardKind::kL2;
      break;
    case RewardVariant::kTdil:
      config.reward.kind = RewardKind::kAggregate;
      config.reward.beta = 0.0;
      break;
  }
  return config;
}

std::vector<RunResult> RunSeeds(const TrainConfig& config, const Task& task,
                                std::span<const std::uint64_t> seeds, int jobs,
                                const std::string& out_dir) {
  config.Validate();
  std::vector<RunResult> runs(seeds.size());
  ParallelFor(seeds.size(), jobs, [&](std::size_t i) {
    TrainConfig c = config;
    c.seed = seeds[i];
    RunOutputs outputs;
    if (!out_dir.empty()) {
      outputs.directory = out_dir + "/seed-" + std::to_string(seeds[i]);
    }
    runs[i] = RunTraining(c, task, outputs);
  });
  return runs;
}

SeedSummary Summarize(std::uint64_t seed, const RunResult& run) {
  SeedSummary s;
  s.seed = seed;
  s.convergence = FirstConvergence(run.metrics, run.convergence_bar);
  if (!run.metrics.empty()) {
    s.final_steps = run.metrics.back().steps_per_episode;
    s.final_success = run.metrics.back().success_rate;
  }
  return s;
}

std::vector<SeedSummary> Summarize(std::span<const std::uint64_t> seeds,
                                   std::span<const RunResult> runs) {
  std::vector<SeedSummary> out;
  for (std::size_t i = 0; i < runs.size(); ++i) out.push_back(Summarize(seeds[i], runs[i]));
  return out;
}

double MedianConvergence(std::span<const SeedSummary> summaries) {
  std::vector<double> v;
  for (const SeedSummary& s : summaries) {
    v.push_back(s.convergence ? double(*s.convergence)
                              : std::numeric_limits<double>::infinity());
  }
  return Median(std::move(v));
}

Probe ProbeFrom(const Environment& env, const SoftQAgent& agent, State start) {
  const EvalResult r = EvaluatePolicy(
      [&agent](State s) { return agent.Greedy(s); }, env, std::span(&start, 1),
      env.episode_cap());
  Probe p;
  p.success = r.success_rate == 1.0;
  p.steps = int(r.trajectories[0].size());
  if (env.is_grid()) {
    const auto& traps = env.grid().trap_cells;
    for (const Transition& t : r.trajectories[0].transitions) {
      if (std::find(traps.begin(), traps.end(), t.next.id) != traps.end()) {
        p.entered_trap = true;
      }
    }
  }
  return p;
}

std::vector<double> RewardHeatmap(const RewardModel& model,
                                  const Environment& env,
                                  RewardVariant variant) {
  const std::vector<State> states = env.EnumerateStates();
  if (variant == RewardVariant::kTdil) return model.TdilForNextStates(states);
  std::vector<double> out;
  for (const State& s : states) {
    double best = 0.0;
    for (int a = 0; a < env.num_actions(); ++a) {
      const Transition t{s, Action{a}, env.Step(s, Action{a}).next, false};
      best = std::max(best, variant == RewardVariant::kIrl ? model.Irl(t)
                                                           : model.L2(t));
    }
    out.push_back(best);
  }
  return out;
}

std::string FormatHeatmap(const Environment& env, std::span<const double> values) {
  if (values.size() != std::size_t(env.num_states())) {
    throw Error("heatmap needs one value per state");
  }
  std::string out;
  if (!env.is_grid()) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      out += (i ? " " : "") + FormatDouble(values[i]);
    }
    return out + "\n";
  }
  const GridSpec& g = env.grid();
  for (int y = g.height - 1; y >= 0; --y) {
    for (int x = 0; x < g.width; ++x) {
      out += (x ? " " : "") + FormatDouble(values[g.CellId(x, y)]);
    }
    out += "\n";
  }
  return out;
}

SoftQAgent TrainBehaviorCloning(const Task& task, const AgentConfig& config,
                                int updates) {
  SoftQAgent agent(task.env.num_states(), task.env.num_actions(), config);
  for (int i = 0; i < updates; ++i) agent.BcUpdate(task.demo);
  return agent;
}

std::vector<DiscStudyRow> RunDiscStudy(
    std::span<const std::pair<std::string, const Environment*>> envs,
    std::span<const double> alphas, std::span<const std::uint64_t> seeds,
    const OfflineTrainingConfig& base, int jobs) {
  std::vector<DiscStudyRow> rows;
  for (const auto& [name, env] : envs) {
    for (double alpha : alphas) {
      for (std::uint64_t seed : seeds) rows.push_back({name, alpha, seed, {}});
    }
  }
  ParallelFor(rows.size(), jobs, [&](std::size_t i) {
    const Environment* env = nullptr;
    for (const auto& [name, e] : envs) {
      if (name == rows[i].env) env = e;
    }
    OfflineTrainingConfig c = base;
    c.disc.alpha = rows[i].alpha;
    c.seed = rows[i].seed;
    rows[i].result = TrainOffline(*env, c);
  });
  return rows;
}

std::vector<std::uint64_t> SeedRange(int n) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < n; ++i) seeds.push_back(std::uint64_t(i));
  return seeds;
}

}  // namespace tdil::cli
