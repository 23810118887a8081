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

#ifndef TDIL_AGENT_H_
#define TDIL_AGENT_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdil/common.h"
#include "tdil/env.h"

namespace tdil {

struct AgentConfig {
  double gamma = 0.97;
  double temperature = 0.05;
  double lr_q = 0.5;
  double lr_pi = 0.1;
  double lr_bc = 1.0;
  double bc_weight = 1.0;

  void Validate() const;
};

enum class ActMode { kSample, kGreedy };

// Tabular discrete soft actor-critic: a soft Q table and a table of policy
// logits.
class SoftQAgent {
 public:
  SoftQAgent(int num_states, int num_actions, AgentConfig config);

  const AgentConfig& config() const { return config_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  // Greedy ties resolve to the lowest action id.
  Action Act(State s, ActMode mode, Rng& rng) const;
  Action Greedy(State s) const;
  std::vector<double> Policy(State s) const;
  // softmax(Q(s, .) / temperature).
  std::vector<double> Boltzmann(State s) const;
  // temperature * log sum_a exp(Q(s, a) / temperature).
  double SoftValue(State s) const;

  // Moves each Q(s, a) toward r + gamma * (1 - terminal) * V_soft(s') with
  // targets computed before any write. Returns the mean squared TD error.
  double CriticUpdate(std::span<const Transition> batch,
                      std::span<const double> rewards);
  // Cross-entropy step of the logits toward Boltzmann(Q / temperature);
  // returns the mean KL(pi || Boltzmann) before the step.
  double ActorUpdate(std::span<const State> states);
  // Cross-entropy step toward the expert action at every demo pair; returns
  // the mean -log pi(a_e | s_e) before the step.
  double BcUpdate(const ExpertDemo& demo);

  double q(State s, Action a) const { return q_[Index(s, a)]; }
  double logit(State s, Action a) const { return logits_[Index(s, a)]; }
  void set_q(State s, Action a, double v) { q_[Index(s, a)] = v; }
  void set_logit(State s, Action a, double v) { logits_[Index(s, a)] = v; }
  std::span<const double> q_table() const { return q_; }
  std::span<const double> logit_table() const { return logits_; }

  friend bool operator==(const SoftQAgent& a, const SoftQAgent& b) {
    return a.num_states_ == b.num_states_ && a.num_actions_ == b.num_actions_ &&
           a.q_ == b.q_ && a.logits_ == b.logits_;
  }

 private:
  std::size_t Index(State s, Action a) const;
  void CheckState(State s) const;

  AgentConfig config_;
  int num_states_;
  int num_actions_;
  std::vector<double> q_;
  std::vector<double> logits_;
};

// Numerically stable softmax.
std::vector<double> Softmax(std::span<const double> logits);
// sum_a p_a log(p_a / q_a); terms with p_a = 0 contribute 0.
double KlDivergence(std::span<const double> p, std::span<const double> q);

// Snapshot: "TDAG", u32 version, u32 states, u32 actions, f64 gamma,
// f64 temperature, then the Q table and the logits as little-endian doubles.
std::string SerializeAgent(const SoftQAgent& agent);
SoftQAgent DeserializeAgent(std::string_view bytes);

// Greedy action per cell as arrow glyphs; the goal shows 'G'. Grid rows run
// top to bottom; the chain prints one row.
std::string FormatPolicyArrows(const Environment& env, const SoftQAgent& agent);

}  // namespace tdil

#endif  // TDIL_AGENT_H_
