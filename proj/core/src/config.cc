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

#include "tdil/config.h"

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

namespace tdil {
namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Conversion failures carry only a message; the caller attaches the line.
struct ValueError {
  std::string what;
};

double ToDouble(const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ValueError{"expected a real number, got '" + v + "'"};
  }
  return out;
}

std::int64_t ToInt(const std::string& v) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ValueError{"expected an integer, got '" + v + "'"};
  }
  return out;
}

std::uint64_t ToUnsigned(const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ValueError{"expected a nonnegative integer, got '" + v + "'"};
  }
  return out;
}

bool ToBool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValueError{"expected true or false, got '" + v + "'"};
}

std::vector<std::string> SplitList(const std::string& v) {
  std::vector<std::string> out;
  if (Trim(v).empty()) return out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(Trim(item));
  return out;
}

std::string JoinInts(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string JoinDoubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += FormatDouble(v[i]);
  }
  return out;
}

std::string Bool(bool b) { return b ? "true" : "false"; }

struct Field {
  const char* section;
  const char* key;
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

#define TDIL_DOUBLE(sec, name, member)                                        \
  Field{sec, name, [](TrainConfig& c, const std::string& v) { c.member = ToDouble(v); }, \
        [](const TrainConfig& c) { return FormatDouble(c.member); }}
#define TDIL_INT(sec, name, member, type)                                     \
  Field{sec, name,                                                            \
        [](TrainConfig& c, const std::string& v) { c.member = static_cast<type>(ToInt(v)); }, \
        [](const TrainConfig& c) { return std::to_string(c.member); }}
#define TDIL_SIZE(sec, name, member)                                          \
  Field{sec, name,                                                            \
        [](TrainConfig& c, const std::string& v) { c.member = static_cast<std::size_t>(ToUnsigned(v)); }, \
        [](const TrainConfig& c) { return std::to_string(c.member); }}
#define TDIL_BOOL(sec, name, member)                                          \
  Field{sec, name, [](TrainConfig& c, const std::string& v) { c.member = ToBool(v); }, \
        [](const TrainConfig& c) { return Bool(c.member); }}
#define TDIL_STRING(sec, name, member)                                        \
  Field{sec, name, [](TrainConfig& c, const std::string& v) { c.member = v; }, \
        [](const TrainConfig& c) { return c.member; }}
#define TDIL_INTS(sec, name, member)                                          \
  Field{sec, name,                                                            \
        [](TrainConfig& c, const std::string& v) {                            \
          c.member.clear();                                                   \
          for (const auto& s : SplitList(v)) c.member.push_back(static_cast<int>(ToInt(s))); \
        },                                                                    \
        [](const TrainConfig& c) { return JoinInts(c.member); }}

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      Field{"", "seed",
            [](TrainConfig& c, const std::string& v) { c.seed = ToUnsigned(v); },
            [](const TrainConfig& c) { return std::to_string(c.seed); }},

      TDIL_STRING("env", "kind", env.kind),
      TDIL_STRING("env", "map", env.map_path),
      TDIL_STRING("env", "route", env.route_path),
      TDIL_STRING("env", "demo", env.demo_path),
      TDIL_INT("env", "chain_length", env.chain_length, int),
      TDIL_DOUBLE("env", "goal_reward", env.goal_reward),

      Field{"reward", "kind",
            [](TrainConfig& c, const std::string& v) {
              if (v == "aggregate") c.reward.kind = RewardKind::kAggregate;
              else if (v == "l2") c.reward.kind = RewardKind::kL2;
              else throw ValueError{"expected aggregate or l2, got '" + v + "'"};
            },
            [](const TrainConfig& c) {
              return std::string(c.reward.kind == RewardKind::kL2 ? "l2" : "aggregate");
            }},
      TDIL_DOUBLE("reward", "beta", reward.beta),
      Field{"reward", "irl_mode",
            [](TrainConfig& c, const std::string& v) {
              if (v == "indicator") c.reward.irl_mode = IrlMode::kIndicator;
              else if (v == "learned") c.reward.irl_mode = IrlMode::kLearned;
              else throw ValueError{"expected indicator or learned, got '" + v + "'"};
            },
            [](const TrainConfig& c) {
              return std::string(c.reward.irl_mode == IrlMode::kLearned ? "learned"
                                                                        : "indicator");
            }},
      TDIL_DOUBLE("reward", "l2_scale", reward.l2_scale),
      Field{"reward", "tdil_backend",
            [](TrainConfig& c, const std::string& v) {
              if (v == "learned_target") c.reward.tdil_backend = TdilBackend::kLearnedTarget;
              else if (v == "oracle") c.reward.tdil_backend = TdilBackend::kOracle;
              else if (v == "oracle_multistep") c.reward.tdil_backend = TdilBackend::kOracleMultistep;
              else throw ValueError{"expected learned_target, oracle or oracle_multistep, got '" + v + "'"};
            },
            [](const TrainConfig& c) {
              switch (c.reward.tdil_backend) {
                case TdilBackend::kOracle: return std::string("oracle");
                case TdilBackend::kOracleMultistep: return std::string("oracle_multistep");
                default: return std::string("learned_target");
              }
            }},
      TDIL_INT("reward", "k_max", reward.k_max, int),
      Field{"reward", "multistep_weights",
            [](TrainConfig& c, const std::string& v) {
              c.reward.multistep_weights.clear();
              for (const auto& s : SplitList(v)) c.reward.multistep_weights.push_back(ToDouble(s));
            },
            [](const TrainConfig& c) { return JoinDoubles(c.reward.multistep_weights); }},
      TDIL_BOOL("reward", "normalize_tdil", reward.normalize_tdil),

      Field{"discriminator", "backend",
            [](TrainConfig& c, const std::string& v) {
              if (v == "network") c.disc.backend = DiscriminatorBackend::kNetwork;
              else if (v == "table") c.disc.backend = DiscriminatorBackend::kTable;
              else throw ValueError{"expected network or table, got '" + v + "'"};
            },
            [](const TrainConfig& c) {
              return std::string(c.disc.backend == DiscriminatorBackend::kTable ? "table"
                                                                                : "network");
            }},
      TDIL_INTS("discriminator", "hidden", disc.hidden),
      TDIL_DOUBLE("discriminator", "alpha", disc.alpha),
      TDIL_DOUBLE("discriminator", "lambda", disc.lambda),
      TDIL_DOUBLE("discriminator", "learning_rate", disc.adam.learning_rate),
      TDIL_SIZE("discriminator", "positive_batch", disc.positive_batch),
      TDIL_SIZE("discriminator", "negative_batch", disc.negative_batch),
      TDIL_DOUBLE("discriminator", "reversed_fraction", disc.reversed_fraction),
      TDIL_BOOL("discriminator", "use_reversed", disc.use_reversed),

      TDIL_INTS("gail", "hidden", gail.hidden),
      TDIL_DOUBLE("gail", "learning_rate", gail.adam.learning_rate),
      TDIL_SIZE("gail", "batch", gail.batch),

      TDIL_DOUBLE("agent", "gamma", agent.gamma),
      TDIL_DOUBLE("agent", "temperature", agent.temperature),
      TDIL_DOUBLE("agent", "lr_q", agent.lr_q),
      TDIL_DOUBLE("agent", "lr_pi", agent.lr_pi),
      TDIL_DOUBLE("agent", "lr_bc", agent.lr_bc),
      TDIL_DOUBLE("agent", "bc_weight", agent.bc_weight),

      TDIL_INT("schedule", "total_env_steps", schedule.total_env_steps, std::int64_t),
      TDIL_INT("schedule", "eval_interval", schedule.eval_interval, std::int64_t),
      TDIL_INT("schedule", "eval_episodes", schedule.eval_episodes, int),
      TDIL_INT("schedule", "checkpoint_interval", schedule.checkpoint_interval, std::int64_t),
      TDIL_INT("schedule", "episode_cap", schedule.episode_cap, int),
      TDIL_INT("schedule", "random_steps", schedule.random_steps, std::int64_t),
      TDIL_SIZE("schedule", "replay_capacity", schedule.replay_capacity),
      TDIL_SIZE("schedule", "agent_batch", schedule.agent_batch),
      TDIL_SIZE("schedule", "expert_batch", schedule.expert_batch),
      TDIL_INT("schedule", "agent_updates_per_step", schedule.agent_updates_per_step, int),
      TDIL_INT("schedule", "disc_updates_per_step", schedule.disc_updates_per_step, int),
      TDIL_BOOL("schedule", "always_train_discriminator", schedule.always_train_discriminator),
      TDIL_BOOL("schedule", "stop_at_convergence", schedule.stop_at_convergence),
      TDIL_DOUBLE("schedule", "convergence_ratio", schedule.convergence_ratio),
  };
  return fields;
}

#undef TDIL_DOUBLE
#undef TDIL_INT
#undef TDIL_SIZE
#undef TDIL_BOOL
#undef TDIL_STRING
#undef TDIL_INTS

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

ConfigSections ParseConfigSections(std::string_view text) {
  ConfigSections out;
  std::string section;
  out[section];
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) {
      raw = raw.substr(0, hash);
    }
    const std::string line = Trim(raw);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ParseError("malformed section header", line_no, 1);
      }
      section = Trim(std::string_view(line).substr(1, line.size() - 2));
      out[section];
    } else {
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParseError("expected 'key = value'", line_no, 1);
      }
      const std::string key = Trim(std::string_view(line).substr(0, eq));
      if (key.empty()) throw ParseError("empty key", line_no, 1);
      auto [it, inserted] = out[section].emplace(
          key, ConfigEntry{Trim(std::string_view(line).substr(eq + 1)), line_no});
      if (!inserted) {
        throw ParseError("duplicate key '" + key + "'", line_no, 1);
      }
    }
    if (end == text.size()) break;
  }
  return out;
}

TrainConfig ParseTrainConfig(std::string_view text) {
  TrainConfig config;
  const ConfigSections sections = ParseConfigSections(text);
  for (const auto& [section, entries] : sections) {
    for (const auto& [key, entry] : entries) {
      const Field* field = nullptr;
      for (const Field& f : Fields()) {
        if (section == f.section && key == f.key) field = &f;
      }
      if (!field) {
        const std::string name = section.empty() ? key : section + "." + key;
        throw ParseError("unknown config key '" + name + "'", entry.line, 1);
      }
      try {
        field->set(config, entry.value);
      } catch (const ValueError& e) {
        throw ParseError(section + "." + key + ": " + e.what, entry.line, 1);
      }
    }
  }
  return config;
}

std::string FormatTrainConfig(const TrainConfig& config) {
  std::string out;
  std::string current = "";
  for (const Field& f : Fields()) {
    if (f.section != current) {
      current = f.section;
      out += "\n[" + current + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(config) + "\n";
  }
  return out;
}

void TrainConfig::Validate() const {
  if (env.kind != "grid" && env.kind != "chain") {
    throw Error("env.kind must be grid or chain");
  }
  if (env.kind == "chain" && env.chain_length < 2) {
    throw Error("env.chain_length must be >= 2");
  }
  if (!std::isfinite(env.goal_reward)) throw Error("env.goal_reward must be finite");
  reward.Validate();
  if (!(disc.alpha > 0.0 && disc.alpha < 1.0)) {
    throw Error("discriminator.alpha must lie in (0, 1)");
  }
  if (!(disc.lambda >= 0.0 && disc.lambda <= 1.0)) {
    throw Error("discriminator.lambda must lie in [0, 1]");
  }
  if (!(disc.adam.learning_rate > 0.0)) {
    throw Error("discriminator.learning_rate must be positive");
  }
  if (disc.positive_batch == 0) throw Error("discriminator.positive_batch must be positive");
  if (!(disc.reversed_fraction >= 0.0 && disc.reversed_fraction <= 1.0)) {
    throw Error("discriminator.reversed_fraction must lie in [0, 1]");
  }
  for (int h : disc.hidden) {
    if (h <= 0) throw Error("discriminator.hidden widths must be positive");
  }
  for (int h : gail.hidden) {
    if (h <= 0) throw Error("gail.hidden widths must be positive");
  }
  if (!(gail.adam.learning_rate > 0.0)) throw Error("gail.learning_rate must be positive");
  if (gail.batch == 0) throw Error("gail.batch must be positive");
  agent.Validate();
  if (schedule.total_env_steps < 0) throw Error("schedule.total_env_steps must be >= 0");
  if (schedule.eval_interval <= 0) throw Error("schedule.eval_interval must be positive");
  if (schedule.eval_episodes < 0) throw Error("schedule.eval_episodes must be >= 0");
  if (schedule.checkpoint_interval <= 0 ||
      schedule.checkpoint_interval % schedule.eval_interval != 0) {
    throw Error("schedule.checkpoint_interval must be a positive multiple of eval_interval");
  }
  if (schedule.episode_cap != 50) {
    throw Error("schedule.episode_cap must match the environment cap (50)");
  }
  if (schedule.random_steps < 0) throw Error("schedule.random_steps must be >= 0");
  if (schedule.replay_capacity == 0) throw Error("schedule.replay_capacity must be positive");
  if (schedule.agent_batch == 0) throw Error("schedule.agent_batch must be positive");
  if (schedule.agent_updates_per_step < 1 || schedule.disc_updates_per_step < 1) {
    throw Error("updates per step must be >= 1");
  }
  if (!(schedule.convergence_ratio > 0.0)) {
    throw Error("schedule.convergence_ratio must be positive");
  }
}

}  // namespace tdil
