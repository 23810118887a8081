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

#include "commands.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "studies.h"
#include "tdil/config.h"
#include "tdil/hash.h"
#include "tdil/trainer.h"

namespace tdil::cli {
namespace {

namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return FormatDouble(v);
}

std::string Fixed(double v, int digits = 4) {
  if (!std::isfinite(v)) return Num(v);
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string Absolute(const std::string& path) {
  return path.empty() ? path : fs::absolute(path).lexically_normal().string();
}

std::string Join(std::span<const std::string> args) {
  std::string out;
  for (const std::string& a : args) out += (out.empty() ? "" : " ") + a;
  return out;
}

std::string DemoHash(const Task& task) {
  return GitBlobHash(FormatTrajectory(task.env, task.demo.trajectory));
}

void WriteManifest(const std::string& dir, TrainConfig config,
                   std::vector<std::uint64_t> seeds, const Task& task,
                   std::span<const std::string> args) {
  config.env.map_path = Absolute(config.env.map_path);
  config.env.route_path = Absolute(config.env.route_path);
  config.env.demo_path = Absolute(config.env.demo_path);
  if (!seeds.empty()) config.seed = seeds.front();
  RunManifest m;
  m.config_text = FormatTrainConfig(config);
  m.seeds = std::move(seeds);
  m.map_hash = task.env.content_hash();
  m.demo_hash = DemoHash(task);
  m.output_directory = Absolute(dir);
  m.command_line = Join(args);
  fs::create_directories(dir);
  WriteFile(dir + "/manifest.json", FormatManifest(m));
}

std::string ConvergenceText(const std::optional<std::int64_t>& c) {
  return c ? std::to_string(*c) : "never";
}

// --- train -----------------------------------------------------------------

int Train(const std::string& config_path, std::vector<std::uint64_t> seeds,
          const std::string& out_dir, int jobs, bool print_config,
          std::span<const std::string> args, std::ostream& out) {
  TrainConfig config;
  std::string base_dir;
  if (!config_path.empty()) {
    config = ParseTrainConfig(ReadFile(config_path));
    base_dir = fs::path(config_path).parent_path().string();
  }
  if (seeds.empty()) seeds.push_back(config.seed);
  config.seed = seeds.front();
  if (print_config) {
    out << FormatTrainConfig(config);
    return 0;
  }
  if (config_path.empty()) throw Error("train: --config is required");
  config.Validate();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && fs::path(p).is_relative()) p = (fs::path(base_dir) / p).string();
  };
  resolve(config.env.map_path);
  resolve(config.env.route_path);
  resolve(config.env.demo_path);
  const Task task = LoadTask(config.env);
  WriteManifest(out_dir, config, seeds, task, args);

  std::vector<RunResult> runs;
  if (seeds.size() == 1) {
    runs.push_back(RunTraining(config, task, RunOutputs{out_dir}));
  } else {
    runs = RunSeeds(config, task, seeds, jobs, out_dir);
  }
  out << "seed,env_steps,first_convergence,final_steps_per_episode,"
         "final_success_rate,blind_pick_env_steps\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const SeedSummary s = Summarize(seeds[i], runs[i]);
    std::string blind = "nan";
    try {
      blind = std::to_string(BlindSelect(runs[i].registry).env_steps);
    } catch (const Error&) {
    }
    out << s.seed << "," << runs[i].env_steps << ","
        << ConvergenceText(s.convergence) << "," << Fixed(s.final_steps, 3)
        << "," << Fixed(s.final_success, 3) << "," << blind << "\n";
  }
  return 0;
}

// --- compare-rewards -------------------------------------------------------

struct StudyFlags {
  std::string map;
  std::string route;
  int seeds = 5;
  std::int64_t budget = 30000;
  std::int64_t eval_interval = 250;
  std::string backend = "table";
  int jobs = 0;

  void Register(CLI::App* app) {
    app->add_option("--map", map, "grid map file")->capture_default_str();
    app->add_option("--route", route, "expert route file")->capture_default_str();
    app->add_option("--seeds", seeds, "number of seeds (0 .. n-1)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--budget", budget, "env steps per run")->capture_default_str();
    app->add_option("--eval-interval", eval_interval, "env steps between evaluations")
        ->capture_default_str();
    app->add_option("--disc-backend", backend, "transition discriminator backend")
        ->capture_default_str()
        ->check(CLI::IsMember({"table", "network"}));
    app->add_option("--jobs", jobs, "parallel runs (0: all cores)")->capture_default_str();
  }

  GridStudy Study() const {
    GridStudy s;
    s.map_path = Absolute(map);
    s.route_path = Absolute(route);
    s.budget = budget;
    s.eval_interval = eval_interval;
    s.backend = backend == "table" ? DiscriminatorBackend::kTable
                                   : DiscriminatorBackend::kNetwork;
    s.jobs = jobs;
    return s;
  }
};

std::string CurveCsv(std::span<const RunResult> runs,
                     std::span<const std::uint64_t> seeds) {
  std::string csv = "env_steps";
  for (std::uint64_t s : seeds) csv += ",seed-" + std::to_string(s);
  csv += ",mean\n";
  std::size_t rows = std::numeric_limits<std::size_t>::max();
  for (const RunResult& r : runs) rows = std::min(rows, r.metrics.size());
  for (std::size_t i = 0; i < rows; ++i) {
    csv += std::to_string(runs[0].metrics[i].env_steps);
    double sum = 0.0;
    for (const RunResult& r : runs) {
      csv += "," + Num(r.metrics[i].steps_per_episode);
      sum += r.metrics[i].steps_per_episode;
    }
    csv += "," + Num(sum / double(runs.size())) + "\n";
  }
  return csv;
}

int CompareRewards(const StudyFlags& flags, const std::string& out_dir,
                   int bc_updates, std::span<const std::string> args,
                   std::ostream& out) {
  const GridStudy study = flags.Study();
  const TrainConfig base = StudyConfig(study);
  const Task task = LoadTask(base.env);
  if (!task.env.is_grid()) throw Error("compare-rewards needs a grid map");
  const std::vector<std::uint64_t> seeds = SeedRange(flags.seeds);
  WriteManifest(out_dir, WithVariant(base, RewardVariant::kTdil), seeds, task,
                args);
  const State bottom_left{task.env.grid().CellId(0, 0)};

  std::string summary =
      "reward,seed,first_convergence,final_steps_per_episode,final_success_rate,"
      "bottom_left_success,bottom_left_entered_trap\n";
  out << "reward  median_convergence  per_seed_convergence  "
         "mean_final_success  bottom_left_traps\n";
  for (RewardVariant v :
       {RewardVariant::kIrl, RewardVariant::kL2, RewardVariant::kTdil}) {
    const TrainConfig config = WithVariant(base, v);
    const std::vector<RunResult> runs =
        RunSeeds(config, task, seeds, study.jobs);
    const std::vector<SeedSummary> sums = Summarize(seeds, runs);
    const std::string name = VariantName(v);
    WriteFile(out_dir + "/curve_" + name + ".csv", CurveCsv(runs, seeds));

    RewardModel model(task.env, task.demo, config.reward);
    model.set_discriminator(runs[0].discriminator.get());
    WriteFile(out_dir + "/heatmap_" + name + ".txt",
              FormatHeatmap(task.env, RewardHeatmap(model, task.env, v)));
    WriteFile(out_dir + "/policy_" + name + ".txt",
              FormatPolicyArrows(task.env, *runs[0].agent));

    std::string per_seed;
    double success = 0.0;
    int traps = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const Probe p = ProbeFrom(task.env, *runs[i].agent, bottom_left);
      traps += p.entered_trap ? 1 : 0;
      success += sums[i].final_success;
      per_seed += (i ? " " : "") + ConvergenceText(sums[i].convergence);
      summary += name + "," + std::to_string(sums[i].seed) + "," +
                 ConvergenceText(sums[i].convergence) + "," +
                 Num(sums[i].final_steps) + "," + Num(sums[i].final_success) +
                 "," + (p.success ? "1" : "0") + "," +
                 (p.entered_trap ? "1" : "0") + "\n";
    }
    out << name << "  " << Num(MedianConvergence(sums)) << "  [" << per_seed
        << "]  " << Fixed(success / double(runs.size()), 3) << "  " << traps
        << "/" << runs.size() << "\n";
  }
  const SoftQAgent bc = TrainBehaviorCloning(task, base.agent, bc_updates);
  WriteFile(out_dir + "/policy_bc.txt", FormatPolicyArrows(task.env, bc));
  WriteFile(out_dir + "/summary.csv", summary);
  out << "wrote " << out_dir << "\n";
  return 0;
}

// --- sweep-beta ------------------------------------------------------------

int SweepBeta(const StudyFlags& flags, double bc_weight, const std::string& out_dir,
              std::ostream& out) {
  const GridStudy study = flags.Study();
  const TrainConfig base = WithVariant(StudyConfig(study), RewardVariant::kTdil);
  const Task task = LoadTask(base.env);
  const std::vector<std::uint64_t> seeds = SeedRange(flags.seeds);
  struct Row {
    std::string label;
    double beta;
    double bc;
  };
  std::vector<Row> rows = {{"0+BC", 0.0, 1.0}};
  for (double b : {0.0, 0.1, 0.2, 0.5, 0.8, 0.9, 0.95, 0.99, 1.0}) {
    rows.push_back({FormatDouble(b), b, bc_weight});
  }
  std::string csv =
      "beta,bc_weight,median_convergence,converged_seeds,median_final_steps,"
      "median_final_success\n";
  for (const Row& row : rows) {
    TrainConfig c = base;
    c.reward.beta = row.beta;
    c.agent.bc_weight = row.bc;
    const std::vector<RunResult> runs = RunSeeds(c, task, seeds, study.jobs);
    const std::vector<SeedSummary> sums = Summarize(seeds, runs);
    std::vector<double> steps, success;
    int converged = 0;
    for (const SeedSummary& s : sums) {
      steps.push_back(s.final_steps);
      success.push_back(s.final_success);
      converged += s.convergence ? 1 : 0;
    }
    csv += row.label + "," + FormatDouble(row.bc) + "," +
           Num(MedianConvergence(sums)) + "," + std::to_string(converged) + "/" +
           std::to_string(sums.size()) + "," + Num(Median(steps)) + "," +
           Num(Median(success)) + "\n";
  }
  out << csv;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    WriteFile(out_dir + "/sweep_beta.csv", csv);
  }
  return 0;
}

// --- disc-report / sweep-alpha ---------------------------------------------

struct DiscFlags {
  std::string map;
  std::string env = "both";
  int chain_length = 12;
  int seeds = 5;
  std::size_t steps = 20000;
  std::size_t transitions = 20000;
  std::string backend = "network";
  bool no_reversed = false;
  int jobs = 0;

  void Register(CLI::App* app) {
    app->add_option("--map", map, "grid map file")->capture_default_str();
    app->add_option("--env", env, "environments to report")
        ->capture_default_str()
        ->check(CLI::IsMember({"grid", "chain", "both"}));
    app->add_option("--chain-length", chain_length, "chain length")
        ->capture_default_str()
        ->check(CLI::Range(2, 100000));
    app->add_option("--seeds", seeds, "number of seeds (0 .. n-1)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--steps", steps, "discriminator updates")->capture_default_str();
    app->add_option("--transitions", transitions, "random-policy transitions")
        ->capture_default_str();
    app->add_option("--backend", backend, "discriminator backend")
        ->capture_default_str()
        ->check(CLI::IsMember({"table", "network"}));
    app->add_flag("--no-reversed", no_reversed, "drop reversed negatives");
    app->add_option("--jobs", jobs, "parallel fits (0: all cores)")->capture_default_str();
  }

  OfflineTrainingConfig Base() const {
    OfflineTrainingConfig c;
    c.train_steps = steps;
    c.transitions = transitions;
    c.disc.use_reversed = !no_reversed;
    if (backend == "table") {
      c.disc.backend = DiscriminatorBackend::kTable;
      c.disc.adam.learning_rate = kTableLearningRate;
    }
    return c;
  }
};

struct DiscEnvs {
  std::optional<Environment> grid;
  std::optional<Environment> chain;
  std::vector<std::pair<std::string, const Environment*>> list;
};

DiscEnvs MakeDiscEnvs(const DiscFlags& flags) {
  DiscEnvs e;
  if (flags.env != "chain") {
    e.grid = Environment::Grid(LoadMap(ReadFile(flags.map)));
    e.list.push_back({"grid", &*e.grid});
  }
  if (flags.env != "grid") {
    e.chain = Environment::Chain(flags.chain_length);
    e.list.push_back({"chain", &*e.chain});
  }
  return e;
}

struct DiscMedians {
  double pos, con, rev, agree;
};

DiscMedians Medians(std::span<const DiscStudyRow> rows) {
  std::vector<double> pos, con, rev, agree;
  for (const DiscStudyRow& r : rows) {
    pos.push_back(r.result.report.acc_positive);
    con.push_back(r.result.report.acc_contrastive);
    if (!std::isnan(r.result.report.acc_reversed)) {
      rev.push_back(r.result.report.acc_reversed);
    }
    agree.push_back(r.result.oracle_agreement);
  }
  return {Median(pos), Median(con), rev.empty() ? kNaN : Median(rev),
          Median(agree)};
}

int DiscReport(const DiscFlags& flags, double alpha, const std::string& out_dir,
               std::ostream& out) {
  const DiscEnvs envs = MakeDiscEnvs(flags);
  const std::vector<std::uint64_t> seeds = SeedRange(flags.seeds);
  const std::vector<double> alphas = {alpha};
  const std::vector<DiscStudyRow> rows =
      RunDiscStudy(envs.list, alphas, seeds, flags.Base(), flags.jobs);
  std::string csv =
      "env,alpha,seed,acc_positive,acc_contrastive,acc_reversed,n_positive,"
      "n_contrastive,n_reversed,contrastive_excluded,reversed_excluded,"
      "oracle_agreement\n";
  for (const auto& [name, env] : envs.list) {
    std::vector<DiscStudyRow> mine;
    for (const DiscStudyRow& r : rows) {
      if (r.env != name) continue;
      mine.push_back(r);
      const AccuracyReport& a = r.result.report;
      csv += name + "," + Num(r.alpha) + "," + std::to_string(r.seed) + "," +
             Fixed(a.acc_positive) + "," + Fixed(a.acc_contrastive) + "," +
             Fixed(a.acc_reversed) + "," + std::to_string(a.n_positive) + "," +
             std::to_string(a.n_contrastive) + "," +
             std::to_string(a.n_reversed) + "," +
             std::to_string(a.n_contrastive_excluded) + "," +
             std::to_string(a.n_reversed_excluded) + "," +
             Fixed(r.result.oracle_agreement) + "\n";
    }
    const DiscMedians m = Medians(mine);
    csv += name + "," + Num(alpha) + ",median," + Fixed(m.pos) + "," +
           Fixed(m.con) + "," + Fixed(m.rev) + ",,,,,," + Fixed(m.agree) + "\n";
  }
  out << csv;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    WriteFile(out_dir + "/disc_report.csv", csv);
  }
  return 0;
}

int SweepAlpha(const DiscFlags& flags, const std::string& out_dir,
               std::ostream& out) {
  const DiscEnvs envs = MakeDiscEnvs(flags);
  const std::vector<std::uint64_t> seeds = SeedRange(flags.seeds);
  const std::vector<double> alphas = {0.5, 0.67, 0.9, 0.99};
  const std::vector<DiscStudyRow> rows =
      RunDiscStudy(envs.list, alphas, seeds, flags.Base(), flags.jobs);
  std::string csv =
      "env,alpha,median_acc_positive,median_acc_contrastive,"
      "median_acc_reversed,median_oracle_agreement\n";
  for (const auto& [name, env] : envs.list) {
    for (double alpha : alphas) {
      std::vector<DiscStudyRow> mine;
      for (const DiscStudyRow& r : rows) {
        if (r.env == name && r.alpha == alpha) mine.push_back(r);
      }
      const DiscMedians m = Medians(mine);
      csv += name + "," + Num(alpha) + "," + Fixed(m.pos) + "," + Fixed(m.con) +
             "," + Fixed(m.rev) + "," + Fixed(m.agree) + "\n";
    }
  }
  out << csv;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    WriteFile(out_dir + "/sweep_alpha.csv", csv);
  }
  return 0;
}

// --- blind-select / export -------------------------------------------------

struct Selection {
  CheckpointRecord blind;
  CheckpointRecord oracle;
  double regret = kNaN;
  double rho = kNaN;
  bool degenerate = false;
};

Selection Select(std::span<const CheckpointRecord> registry) {
  Selection s;
  s.blind = BlindSelect(registry);
  s.oracle = OracleSelect(registry);
  if (s.oracle.gt_return != 0.0) {
    s.regret = (s.blind.gt_return - s.oracle.gt_return) / s.oracle.gt_return;
  }
  if (registry.size() >= 3) {
    try {
      const RankCorrelation rc = CorrelationReport(registry);
      s.rho = rc.rho;
      s.degenerate = rc.degenerate;
    } catch (const Error&) {
    }
  }
  return s;
}

int BlindSelectCommand(const std::vector<std::string>& run_dirs, std::ostream& out) {
  out << "run,checkpoints,blind_env_steps,blind_relative_return,blind_gt_return,"
         "oracle_env_steps,oracle_gt_return,regret,spearman_rho\n";
  for (const std::string& dir : run_dirs) {
    const std::vector<CheckpointRecord> registry =
        ParseRegistry(ReadFile(dir + "/registry.jsonl"));
    const Selection s = Select(registry);
    out << dir << "," << registry.size() << "," << s.blind.env_steps << ","
        << Num(s.blind.relative_return) << "," << Num(s.blind.gt_return) << ","
        << s.oracle.env_steps << "," << Num(s.oracle.gt_return) << ","
        << Num(s.regret) << "," << Num(s.rho) << (s.degenerate ? " (degenerate)" : "")
        << "\n";
  }
  return 0;
}

nlohmann::json RecordJson(const CheckpointRecord& r) {
  return nlohmann::json::parse(FormatRegistryLine(r));
}

int Export(const std::string& run_dir, const std::string& out_dir,
           std::ostream& out) {
  const RunManifest manifest = ParseManifest(ReadFile(run_dir + "/manifest.json"));
  const TrainConfig config = ParseTrainConfig(manifest.config_text);
  const Task task = LoadTask(config.env);
  const std::vector<CheckpointRecord> registry =
      ParseRegistry(ReadFile(run_dir + "/registry.jsonl"));
  const std::vector<MetricRow> metrics =
      ParseMetricsCsv(ReadFile(run_dir + "/metrics.csv"));
  fs::create_directories(out_dir);
  WriteFile(out_dir + "/metrics.csv", FormatMetricsCsv(metrics));

  std::string curve =
      "env_steps,steps_per_episode,success_rate,gt_return,raw_return,"
      "relative_return\n";
  for (const MetricRow& m : metrics) {
    curve += std::to_string(m.env_steps) + "," + Num(m.steps_per_episode) + "," +
             Num(m.success_rate) + "," + Num(m.gt_return) + "," +
             Num(m.raw_return) + "," + Num(m.relative_return) + "\n";
  }
  WriteFile(out_dir + "/curve.csv", curve);

  nlohmann::json bundle;
  bundle["manifest"] = nlohmann::json::parse(FormatManifest(manifest));
  bundle["registry"] = nlohmann::json::array();
  for (const CheckpointRecord& r : registry) bundle["registry"].push_back(RecordJson(r));
  if (!registry.empty()) {
    const Selection s = Select(registry);
    bundle["blind_select"] = RecordJson(s.blind);
    bundle["oracle_select"] = RecordJson(s.oracle);
    bundle["regret"] = std::isfinite(s.regret) ? nlohmann::json(s.regret) : nlohmann::json(nullptr);
    bundle["spearman_rho"] = std::isfinite(s.rho) ? nlohmann::json(s.rho) : nlohmann::json(nullptr);
    bundle["spearman_degenerate"] = s.degenerate;
  }
  WriteFile(out_dir + "/bundle.json", bundle.dump(2) + "\n");

  // Latest checkpoint whose snapshot files were written.
  const CheckpointRecord* latest = nullptr;
  for (const CheckpointRecord& r : registry) {
    if (fs::exists(run_dir + "/snapshots/" + r.agent_snapshot + ".bin")) latest = &r;
  }
  if (latest) {
    const SoftQAgent agent = DeserializeAgent(
        ReadFile(run_dir + "/snapshots/" + latest->agent_snapshot + ".bin"));
    WriteFile(out_dir + "/policy.txt", FormatPolicyArrows(task.env, agent));
    RewardModel model(task.env, task.demo, config.reward);
    std::optional<TransitionDiscriminator> disc;
    if (!latest->discriminator_snapshot.empty()) {
      disc.emplace(DeserializeDiscriminator(
          task.env, ReadFile(run_dir + "/snapshots/" +
                             latest->discriminator_snapshot + ".bin")));
      model.set_discriminator(&*disc);
      WriteFile(out_dir + "/heatmap_tdil.txt",
                FormatHeatmap(task.env, RewardHeatmap(model, task.env,
                                                      RewardVariant::kTdil)));
    }
    if (model.needs_gail()) {
      out << "reward trace skipped: the learned IRL reward is not snapshotted\n";
    } else if (!model.needs_discriminator() || disc) {
      const State start = task.demo.trajectory.transitions.front().s;
      const EvalResult ev = EvaluatePolicy(
          [&agent](State s) { return agent.Greedy(s); }, task.env,
          std::span(&start, 1), config.schedule.episode_cap);
      if (disc || config.reward.tdil_backend != TdilBackend::kLearnedTarget) {
        WriteFile(out_dir + "/reward_trace.csv",
                  FormatRewardTrace(model, task.env, ev.trajectories[0]));
      }
    }
  }
  out << "exported " << run_dir << " to " << out_dir << "\n";
  return 0;
}

}  // namespace

std::string DefaultDataDir() {
#ifdef TDIL_DATA_DIR
  return TDIL_DATA_DIR;
#else
  return "data";
#endif
}

int RunCommand(std::span<const std::string> args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Transition-discriminator imitation learning experiments", "tdil"};
  app.require_subcommand(1);
  const std::string data = DefaultDataDir();

  auto* train = app.add_subcommand("train", "one training run from a config file");
  std::string config_path, train_out = "tdil-run";
  std::vector<std::uint64_t> train_seeds;
  int train_jobs = 0;
  bool print_config = false;
  train->add_option("--config", config_path, "config file")->check(CLI::ExistingFile);
  train->add_option("--seed", train_seeds, "seed (repeatable; overrides the config)");
  train->add_option("--out", train_out, "output directory")->capture_default_str();
  train->add_option("--jobs", train_jobs, "parallel runs for several seeds");
  train->add_flag("--print-config", print_config,
                  "print the effective configuration and exit");

  StudyFlags study;
  study.map = data + "/maze.grid";
  study.route = data + "/maze.route";
  auto* compare = app.add_subcommand(
      "compare-rewards", "indicator IRL vs L2 vs TDIL on a grid map");
  study.Register(compare);
  std::string compare_out = "compare-rewards";
  int bc_updates = 200;
  compare->add_option("--out", compare_out, "output directory")->capture_default_str();
  compare->add_option("--bc-updates", bc_updates, "updates of the BC-only panel")
      ->capture_default_str();

  StudyFlags beta_study = study;
  auto* sweep_beta = app.add_subcommand("sweep-beta", "R_agg mixture weight sweep");
  beta_study.Register(sweep_beta);
  double bc_weight = 1.0;
  std::string beta_out;
  sweep_beta->add_option("--bc-weight", bc_weight, "BC weight of the plain rows")
      ->capture_default_str();
  sweep_beta->add_option("--out", beta_out, "directory for sweep_beta.csv");

  DiscFlags disc_flags;
  disc_flags.map = data + "/maze.grid";
  auto* disc_report = app.add_subcommand("disc-report", "discriminator accuracy table");
  disc_flags.Register(disc_report);
  double alpha = 0.99;
  std::string disc_out;
  disc_report->add_option("--alpha", alpha, "positive weight")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  disc_report->add_option("--out", disc_out, "directory for disc_report.csv");

  DiscFlags alpha_flags = disc_flags;
  auto* sweep_alpha = app.add_subcommand("sweep-alpha", "positive-weight sweep");
  alpha_flags.Register(sweep_alpha);
  std::string alpha_out;
  sweep_alpha->add_option("--out", alpha_out, "directory for sweep_alpha.csv");

  auto* blind = app.add_subcommand("blind-select",
                                   "checkpoint picked by relative return");
  std::vector<std::string> run_dirs;
  blind->add_option("--run", run_dirs, "run directory (repeatable)")
      ->required()
      ->check(CLI::ExistingDirectory);

  auto* exporter = app.add_subcommand("export", "plot-ready CSV/JSON bundle of a run");
  std::string export_run, export_out;
  exporter->add_option("--run", export_run, "run directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  exporter->add_option("--out", export_out, "bundle directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (train->parsed()) {
      return Train(config_path, train_seeds, train_out, train_jobs, print_config,
                   args, out);
    }
    if (compare->parsed()) return CompareRewards(study, compare_out, bc_updates, args, out);
    if (sweep_beta->parsed()) return SweepBeta(beta_study, bc_weight, beta_out, out);
    if (disc_report->parsed()) return DiscReport(disc_flags, alpha, disc_out, out);
    if (sweep_alpha->parsed()) return SweepAlpha(alpha_flags, alpha_out, out);
    if (blind->parsed()) return BlindSelectCommand(run_dirs, out);
    if (exporter->parsed()) return Export(export_run, export_out, out);
  } catch (const std::exception& e) {
    err << "tdil: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace tdil::cli
