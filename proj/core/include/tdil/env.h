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

#ifndef TDIL_ENV_H_
#define TDIL_ENV_H_

#include <compare>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tdil/common.h"

namespace tdil {

// Environment-local state index. Features are a pure function of the id and
// are looked up through the owning Environment.
struct State {
  int id = 0;
  friend auto operator<=>(const State&, const State&) = default;
};

struct Action {
  int id = 0;
  friend auto operator<=>(const Action&, const Action&) = default;
};

enum class ActionLabel { kUp, kDown, kLeft, kRight, kAdvance, kBrake };

struct Transition {
  State s;
  Action a;
  State next;
  bool terminal = false;
  friend bool operator==(const Transition&, const Transition&) = default;
};

struct Trajectory {
  std::vector<Transition> transitions;
  // Ground-truth return; evaluation only, never consumed by learning code.
  double total_gt_return = 0.0;

  std::size_t size() const { return transitions.size(); }
  bool empty() const { return transitions.empty(); }
};

struct ExpertDemo {
  Trajectory trajectory;
  // s_0 ... s_T in visiting order, duplicates kept.
  std::vector<State> states;
  // `states` deduplicated by id, first-visit order.
  std::vector<State> unique_states;
  // (state id, action id) pairs of the trajectory.
  std::set<std::pair<int, int>> pairs;

  bool ContainsPair(State s, Action a) const {
    return pairs.contains({s.id, a.id});
  }
};

// Builds the membership indexes of a demo from its trajectory.
ExpertDemo DemoFromTrajectory(Trajectory trajectory);

// Grid-world layout. Cell ids are y * width + x with y = 0 the bottom row.
struct GridSpec {
  int width = 0;
  int height = 0;
  // Unordered 4-adjacent cell pairs, stored as (min id, max id).
  std::set<std::pair<int, int>> barriers;
  int goal = 0;
  // Absent means uniform over free (non-goal) cells.
  std::optional<int> fixed_start;
  // Cells annotated with 'T'; carries no dynamics, used for reporting.
  std::vector<int> trap_cells;

  int num_cells() const { return width * height; }
  int CellId(int x, int y) const { return y * width + x; }
  int X(int cell) const { return cell % width; }
  int Y(int cell) const { return cell / width; }
  bool Blocked(int a, int b) const {
    return barriers.contains({std::min(a, b), std::max(a, b)});
  }
};

// Parses the double-resolution map format:
//
//   +-+-+        '+' lattice corners, '-' / '|' barrier edges,
//   |G  |        ' ' open edge, 'G' goal, 'S' fixed start,
//   + +-+        'T' trap annotation, ' ' or '.' free cell.
//   |  S|
//   +-+-+
//
// Rows are listed top (y = height - 1) to bottom. The outer frame must be
// closed. Throws ParseError on malformed text and ConnectivityError when a
// start cell cannot reach the goal.
GridSpec LoadMap(std::string_view text);

// Inverse of LoadMap for canonical input.
std::string FormatMap(const GridSpec& spec);

struct StepResult {
  State next;
  bool done = false;
  double gt_reward = 0.0;
};

// Deterministic discrete MDP, either a barrier grid-world or the one-way
// "highway" chain. Dynamics are tabulated at construction; the object is
// immutable afterwards and safe to share across threads.
class Environment {
 public:
  enum class Kind { kGrid, kChain };

  static Environment Grid(GridSpec spec, double goal_reward = 1.0);
  // Positions 0 .. length-1; reaching the last position ends the episode.
  static Environment Chain(int length, double goal_reward = 1.0);

  Kind kind() const { return kind_; }
  bool is_grid() const { return kind_ == Kind::kGrid; }
  const GridSpec& grid() const;
  // "grid" or "chain".
  const std::string& name() const { return name_; }
  // Git-style hash of the map text (grid) or of "chain:<length>".
  const std::string& content_hash() const { return content_hash_; }

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int feature_dim() const { return feature_dim_; }
  int episode_cap() const { return 50; }
  State goal() const { return State{goal_}; }

  std::span<const double> features(State s) const;
  ActionLabel label(Action a) const;
  char glyph(Action a) const;
  std::string ActionName(Action a) const;
  // Inverse of glyph(); throws DataError for unknown glyphs.
  Action ActionFromGlyph(char glyph) const;

  StepResult Step(State s, Action a) const;
  // True iff some action moves `s` to `s_next`.
  bool TransitionSupport(State s, State s_next) const;

  std::vector<State> EnumerateStates() const;
  const std::vector<State>& start_support() const { return start_support_; }
  State SampleStart(Rng& rng) const;

  bool Valid(State s) const { return s.id >= 0 && s.id < num_states_; }
  bool Valid(Action a) const { return a.id >= 0 && a.id < num_actions_; }

 private:
  Environment() = default;
  void Tabulate();
  StepResult RawStep(int s, int a) const;

  Kind kind_ = Kind::kGrid;
  std::string name_;
  std::string content_hash_;
  GridSpec grid_;
  int chain_length_ = 0;
  double goal_reward_ = 1.0;
  int num_states_ = 0;
  int num_actions_ = 0;
  int feature_dim_ = 0;
  int goal_ = 0;
  std::vector<double> features_;
  std::vector<int> next_;       // num_states * num_actions
  std::vector<char> done_;      // num_states * num_actions
  std::vector<State> start_support_;
};

// Minimal number of actions (>= 1) to go from every state to every state,
// -1 when unreachable. Row-major [from * n + to].
std::vector<int> AllPairsActionDistance(const Environment& env);

// BFS distance (>= 0 actions) from every state to the nearest state of
// `targets`; -1 when unreachable.
std::vector<int> DistanceToSet(const Environment& env,
                               std::span<const State> targets);

// Replays `route` from `s0`. Rejects bumps (s_next == s), early termination,
// and routes that do not end in a terminal transition.
ExpertDemo MakeExpertDemo(const Environment& env, std::span<const Action> route,
                          State s0);

// Route file: "start=<x>,<y>" (grid) or "start=<pos>" (chain) and
// "actions=<glyphs>", one key per line; '#' starts a comment.
struct Route {
  State start;
  std::vector<Action> actions;
};
Route ParseRoute(const Environment& env, std::string_view text);

// Trajectory file: a header line "# tdil-trajectory v1 env=<name>
// hash=<content hash>" followed by one CSV record per transition:
// step_index,state_id,action_id,next_state_id,terminal
std::string FormatTrajectory(const Environment& env, const Trajectory& traj);
Trajectory ParseTrajectory(const Environment& env, std::string_view text);

void SaveDemo(const std::string& path, const Environment& env,
              const ExpertDemo& demo);
ExpertDemo LoadDemo(const std::string& path, const Environment& env);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

}  // namespace tdil

#endif  // TDIL_ENV_H_
