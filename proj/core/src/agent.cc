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

#include "tdil/agent.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tdil/nn.h"

namespace tdil {
namespace {

double LogSumExp(std::span<const double> x) {
  const double m = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - m);
  return m + std::log(sum);
}

char Arrow(ActionLabel label) {
  switch (label) {
    case ActionLabel::kUp: return '^';
    case ActionLabel::kDown: return 'v';
    case ActionLabel::kLeft: return '<';
    case ActionLabel::kRight: return '>';
    case ActionLabel::kAdvance: return '>';
    case ActionLabel::kBrake: return 'o';
  }
  return '?';
}

}  // namespace

void AgentConfig::Validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error("gamma must lie in (0, 1)");
  if (!(temperature > 0.0)) throw Error("temperature must be positive");
  if (!(lr_q > 0.0) || !(lr_pi > 0.0) || !(lr_bc > 0.0)) {
    throw Error("agent learning rates must be positive");
  }
  if (!(bc_weight >= 0.0)) throw Error("bc_weight must be nonnegative");
}

std::vector<double> Softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  const double m = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

double KlDivergence(std::span<const double> p, std::span<const double> q) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return kl;
}

SoftQAgent::SoftQAgent(int num_states, int num_actions, AgentConfig config)
    : config_(config), num_states_(num_states), num_actions_(num_actions) {
  config_.Validate();
  if (num_states <= 0 || num_actions <= 0) {
    throw Error("agent needs at least one state and one action");
  }
  q_.assign(std::size_t(num_states) * num_actions, 0.0);
  logits_.assign(q_.size(), 0.0);
}

void SoftQAgent::CheckState(State s) const {
  if (s.id < 0 || s.id >= num_states_) {
    throw Error("state id out of range: " + std::to_string(s.id));
  }
}

std::size_t SoftQAgent::Index(State s, Action a) const {
  CheckState(s);
  if (a.id < 0 || a.id >= num_actions_) {
    throw Error("action id out of range: " + std::to_string(a.id));
  }
  return std::size_t(s.id) * num_actions_ + a.id;
}

std::vector<double> SoftQAgent::Policy(State s) const {
  CheckState(s);
  return Softmax(std::span(logits_).subspan(std::size_t(s.id) * num_actions_,
                                            num_actions_));
}

std::vector<double> SoftQAgent::Boltzmann(State s) const {
  CheckState(s);
  std::vector<double> z(num_actions_);
  for (int a = 0; a < num_actions_; ++a) {
    z[a] = q_[std::size_t(s.id) * num_actions_ + a] / config_.temperature;
  }
  return Softmax(z);
}

double SoftQAgent::SoftValue(State s) const {
  CheckState(s);
  std::vector<double> z(num_actions_);
  for (int a = 0; a < num_actions_; ++a) {
    z[a] = q_[std::size_t(s.id) * num_actions_ + a] / config_.temperature;
  }
  return config_.temperature * LogSumExp(z);
}

Action SoftQAgent::Greedy(State s) const {
  CheckState(s);
  const double* z = &logits_[std::size_t(s.id) * num_actions_];
  int best = 0;
  for (int a = 1; a < num_actions_; ++a) {
    if (z[a] > z[best]) best = a;
  }
  return Action{best};
}

Action SoftQAgent::Act(State s, ActMode mode, Rng& rng) const {
  if (mode == ActMode::kGreedy) return Greedy(s);
  const std::vector<double> p = Policy(s);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cum = 0.0;
  for (int a = 0; a < num_actions_; ++a) {
    cum += p[a];
    if (u < cum) return Action{a};
  }
  // Rounding left u above the cumulative sum; take the last positive entry.
  for (int a = num_actions_ - 1; a >= 0; --a) {
    if (p[a] > 0.0) return Action{a};
  }
  return Action{0};
}

double SoftQAgent::CriticUpdate(std::span<const Transition> batch,
                                std::span<const double> rewards) {
  if (batch.size() != rewards.size()) {
    throw Error("critic update: " + std::to_string(batch.size()) +
                " transitions but " + std::to_string(rewards.size()) +
                " rewards");
  }
  if (batch.empty()) return 0.0;
  std::vector<double> targets(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = batch[i];
    const double bootstrap = t.terminal ? 0.0 : SoftValue(t.next);
    targets[i] = rewards[i] + config_.gamma * bootstrap;
    if (!std::isfinite(targets[i])) {
      std::ostringstream msg;
      msg << "non-finite critic target at batch index " << i << " (s="
          << t.s.id << ", a=" << t.a.id << ", next=" << t.next.id
          << ", reward=" << rewards[i] << ")";
      throw NumericError(msg.str());
    }
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double err = targets[i] - q_[Index(batch[i].s, batch[i].a)];
    loss += err * err;
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    double& q = q_[Index(batch[i].s, batch[i].a)];
    q += config_.lr_q * (targets[i] - q);
  }
  return loss / double(batch.size());
}

double SoftQAgent::ActorUpdate(std::span<const State> states) {
  if (states.empty()) return 0.0;
  double loss = 0.0;
  for (const State& s : states) {
    const std::vector<double> target = Boltzmann(s);
    const std::vector<double> pi = Policy(s);
    loss += KlDivergence(pi, target);
    double* z = &logits_[std::size_t(s.id) * num_actions_];
    for (int a = 0; a < num_actions_; ++a) {
      z[a] += config_.lr_pi * (target[a] - pi[a]);
    }
  }
  return loss / double(states.size());
}

double SoftQAgent::BcUpdate(const ExpertDemo& demo) {
  if (demo.trajectory.empty()) throw Error("behavior cloning needs a nonempty demo");
  double loss = 0.0;
  for (const Transition& t : demo.trajectory.transitions) {
    loss -= std::log(std::max(Policy(t.s)[t.a.id], 1e-300));
  }
  loss /= double(demo.trajectory.size());
  if (config_.bc_weight == 0.0) return loss;
  const double step = config_.lr_bc * config_.bc_weight;
  for (const Transition& t : demo.trajectory.transitions) {
    const std::vector<double> pi = Policy(t.s);
    double* z = &logits_[std::size_t(t.s.id) * num_actions_];
    for (int a = 0; a < num_actions_; ++a) {
      z[a] += step * ((a == t.a.id ? 1.0 : 0.0) - pi[a]);
    }
  }
  return loss;
}

std::string SerializeAgent(const SoftQAgent& agent) {
  std::string out = "TDAG";
  PutU32(&out, 1);
  PutU32(&out, static_cast<std::uint32_t>(agent.num_states()));
  PutU32(&out, static_cast<std::uint32_t>(agent.num_actions()));
  PutF64(&out, agent.config().gamma);
  PutF64(&out, agent.config().temperature);
  for (double v : agent.q_table()) PutF64(&out, v);
  for (double v : agent.logit_table()) PutF64(&out, v);
  return out;
}

SoftQAgent DeserializeAgent(std::string_view bytes) {
  if (bytes.substr(0, 4) != "TDAG") throw DataError("not an agent snapshot");
  bytes.remove_prefix(4);
  if (GetU32(&bytes) != 1) throw DataError("unsupported snapshot version");
  const std::uint32_t ns = GetU32(&bytes);
  const std::uint32_t na = GetU32(&bytes);
  if (ns == 0 || na == 0 || ns > (1u << 20) || na > 1024) {
    throw DataError("implausible agent table size");
  }
  AgentConfig cfg;
  cfg.gamma = GetF64(&bytes);
  cfg.temperature = GetF64(&bytes);
  if (bytes.size() != std::size_t(ns) * na * 16) {
    throw DataError("agent snapshot size does not match its header");
  }
  SoftQAgent agent(int(ns), int(na), cfg);
  for (int s = 0; s < int(ns); ++s) {
    for (int a = 0; a < int(na); ++a) agent.set_q(State{s}, Action{a}, GetF64(&bytes));
  }
  for (int s = 0; s < int(ns); ++s) {
    for (int a = 0; a < int(na); ++a) {
      agent.set_logit(State{s}, Action{a}, GetF64(&bytes));
    }
  }
  return agent;
}

std::string FormatPolicyArrows(const Environment& env,
                               const SoftQAgent& agent) {
  auto cell = [&](int id) {
    if (id == env.goal().id) return 'G';
    return Arrow(env.label(agent.Greedy(State{id})));
  };
  std::string out;
  if (!env.is_grid()) {
    for (int s = 0; s < env.num_states(); ++s) out.push_back(cell(s));
    out.push_back('\n');
    return out;
  }
  const GridSpec& g = env.grid();
  for (int y = g.height - 1; y >= 0; --y) {
    for (int x = 0; x < g.width; ++x) out.push_back(cell(g.CellId(x, y)));
    out.push_back('\n');
  }
  return out;
}

}  // namespace tdil
