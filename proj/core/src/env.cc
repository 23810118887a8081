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

#include "tdil/env.h"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <sstream>

#include "tdil/hash.h"

namespace tdil {
namespace {

std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = end + 1;
  }
  return lines;
}

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

bool ParseInt(std::string_view s, long long* out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, *out);
  return ec == std::errc() && ptr == end;
}

std::string CellName(const GridSpec& spec, int cell) {
  return "(" + std::to_string(spec.X(cell)) + ", " +
         std::to_string(spec.Y(cell)) + ")";
}

// Cells reachable from `from` through open edges.
std::vector<char> FloodFill(const GridSpec& spec, int from) {
  std::vector<char> seen(spec.num_cells(), 0);
  std::deque<int> queue{from};
  seen[from] = 1;
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    const int x = spec.X(c), y = spec.Y(c);
    const int nbrs[4][2] = {{x, y + 1}, {x, y - 1}, {x - 1, y}, {x + 1, y}};
    for (const auto& n : nbrs) {
      if (n[0] < 0 || n[0] >= spec.width || n[1] < 0 || n[1] >= spec.height) {
        continue;
      }
      const int d = spec.CellId(n[0], n[1]);
      if (seen[d] || spec.Blocked(c, d)) continue;
      seen[d] = 1;
      queue.push_back(d);
    }
  }
  return seen;
}

}  // namespace

ExpertDemo DemoFromTrajectory(Trajectory trajectory) {
  ExpertDemo demo;
  for (const Transition& t : trajectory.transitions) {
    demo.states.push_back(t.s);
    demo.pairs.insert({t.s.id, t.a.id});
  }
  if (!trajectory.transitions.empty()) {
    demo.states.push_back(trajectory.transitions.back().next);
  }
  std::set<int> seen;
  for (State s : demo.states) {
    if (seen.insert(s.id).second) demo.unique_states.push_back(s);
  }
  demo.trajectory = std::move(trajectory);
  return demo;
}

GridSpec LoadMap(std::string_view text) {
  std::vector<std::string> lines = SplitLines(text);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() < 3 || lines.size() % 2 == 0) {
    throw ParseError("map must have 2*height+1 lines",
                     static_cast<int>(lines.size()), 1);
  }
  const std::size_t cols = lines[0].size();
  if (cols < 3 || cols % 2 == 0) {
    throw ParseError("map lines must have 2*width+1 characters", 1,
                     static_cast<int>(cols));
  }
  for (std::size_t r = 0; r < lines.size(); ++r) {
    if (lines[r].size() != cols) {
      throw ParseError("ragged map line: expected " + std::to_string(cols) +
                           " characters, found " +
                           std::to_string(lines[r].size()),
                       static_cast<int>(r + 1),
                       static_cast<int>(std::min(cols, lines[r].size()) + 1));
    }
  }

  GridSpec spec;
  spec.height = static_cast<int>(lines.size() / 2);
  spec.width = static_cast<int>(cols / 2);
  const int last_row = static_cast<int>(lines.size()) - 1;
  const int last_col = static_cast<int>(cols) - 1;
  int goals = 0;
  int starts = 0;

  for (int r = 0; r <= last_row; ++r) {
    for (int c = 0; c <= last_col; ++c) {
      const char ch = lines[r][c];
      const bool boundary =
          r == 0 || r == last_row || c == 0 || c == last_col;
      auto fail = [&](const std::string& what) {
        throw ParseError(what + ": '" + std::string(1, ch) + "'", r + 1,
                         c + 1);
      };
      if (r % 2 == 0 && c % 2 == 0) {
        if (ch != '+') fail("expected '+' at lattice corner");
      } else if (r % 2 == 0) {
        // Horizontal edge between the cell rows above and below.
        if (ch != '-' && ch != ' ') fail("expected '-' or ' ' on wall row");
        if (boundary) {
          if (ch != '-') fail("outer frame must be closed");
          continue;
        }
        if (ch == '-') {
          const int x = (c - 1) / 2;
          const int k = r / 2;
          const int above = spec.CellId(x, spec.height - k);
          const int below = spec.CellId(x, spec.height - 1 - k);
          spec.barriers.insert({std::min(above, below), std::max(above, below)});
        }
      } else if (c % 2 == 0) {
        if (ch != '|' && ch != ' ') fail("expected '|' or ' ' between cells");
        if (boundary) {
          if (ch != '|') fail("outer frame must be closed");
          continue;
        }
        if (ch == '|') {
          const int y = spec.height - 1 - (r - 1) / 2;
          const int left = spec.CellId(c / 2 - 1, y);
          const int right = spec.CellId(c / 2, y);
          spec.barriers.insert({left, right});
        }
      } else {
        const int cell =
            spec.CellId((c - 1) / 2, spec.height - 1 - (r - 1) / 2);
        switch (ch) {
          case ' ':
          case '.':
            break;
          case 'G':
            spec.goal = cell;
            ++goals;
            break;
          case 'S':
            spec.fixed_start = cell;
            ++starts;
            break;
          case 'T':
            spec.trap_cells.push_back(cell);
            break;
          default:
            fail("unknown cell marker");
        }
      }
    }
  }
  if (goals != 1) {
    throw ParseError("map must contain exactly one 'G' (found " +
                         std::to_string(goals) + ")",
                     0, 0);
  }
  if (starts > 1) throw ParseError("map contains more than one 'S'", 0, 0);
  std::sort(spec.trap_cells.begin(), spec.trap_cells.end());

  // Barriers are symmetric, so reachability of the goal equals membership in
  // the goal's connected component.
  const std::vector<char> reach = FloodFill(spec, spec.goal);
  if (spec.fixed_start) {
    if (!reach[*spec.fixed_start]) {
      throw ConnectivityError("start cell " + CellName(spec, *spec.fixed_start) +
                                  " cannot reach the goal",
                              *spec.fixed_start);
    }
  } else {
    for (int cell = 0; cell < spec.num_cells(); ++cell) {
      if (!reach[cell]) {
        throw ConnectivityError(
            "cell " + CellName(spec, cell) + " cannot reach the goal", cell);
      }
    }
  }
  return spec;
}

std::string FormatMap(const GridSpec& spec) {
  const int rows = 2 * spec.height + 1;
  const int cols = 2 * spec.width + 1;
  std::vector<std::string> lines(rows, std::string(cols, ' '));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const bool boundary = r == 0 || r == rows - 1 || c == 0 || c == cols - 1;
      char& ch = lines[r][c];
      if (r % 2 == 0 && c % 2 == 0) {
        ch = '+';
      } else if (r % 2 == 0) {
        const int x = (c - 1) / 2, k = r / 2;
        ch = boundary || spec.Blocked(spec.CellId(x, spec.height - k),
                                      spec.CellId(x, spec.height - 1 - k))
                 ? '-'
                 : ' ';
      } else if (c % 2 == 0) {
        const int y = spec.height - 1 - (r - 1) / 2;
        ch = boundary || spec.Blocked(spec.CellId(c / 2 - 1, y),
                                      spec.CellId(c / 2, y))
                 ? '|'
                 : ' ';
      } else {
        const int cell =
            spec.CellId((c - 1) / 2, spec.height - 1 - (r - 1) / 2);
        if (cell == spec.goal) {
          ch = 'G';
        } else if (spec.fixed_start && cell == *spec.fixed_start) {
          ch = 'S';
        } else if (std::binary_search(spec.trap_cells.begin(),
                                      spec.trap_cells.end(), cell)) {
          ch = 'T';
        }
      }
    }
  }
  std::string out;
  for (const auto& line : lines) out += line + "\n";
  return out;
}

Environment Environment::Grid(GridSpec spec, double goal_reward) {
  if (spec.width <= 0 || spec.height <= 0) {
    throw Error("grid dimensions must be positive");
  }
  if (spec.goal < 0 || spec.goal >= spec.num_cells()) {
    throw Error("goal outside the grid");
  }
  for (const auto& [a, b] : spec.barriers) {
    const int dx = std::abs(spec.X(a) - spec.X(b));
    const int dy = std::abs(spec.Y(a) - spec.Y(b));
    if (a < 0 || b >= spec.num_cells() || dx + dy != 1) {
      throw Error("barrier must join two in-bounds 4-adjacent cells");
    }
  }
  Environment env;
  env.kind_ = Kind::kGrid;
  env.name_ = "grid";
  env.grid_ = std::move(spec);
  env.content_hash_ = GitBlobHash(FormatMap(env.grid_));
  env.goal_reward_ = goal_reward;
  env.num_states_ = env.grid_.num_cells();
  env.num_actions_ = 4;
  env.feature_dim_ = 2;
  env.goal_ = env.grid_.goal;
  const GridSpec& g = env.grid_;
  env.features_.resize(2 * env.num_states_);
  for (int c = 0; c < env.num_states_; ++c) {
    env.features_[2 * c] = g.width > 1 ? double(g.X(c)) / (g.width - 1) : 0.0;
    env.features_[2 * c + 1] =
        g.height > 1 ? double(g.Y(c)) / (g.height - 1) : 0.0;
  }
  if (g.fixed_start) {
    env.start_support_.push_back(State{*g.fixed_start});
  } else {
    for (int c = 0; c < env.num_states_; ++c) {
      if (c != g.goal) env.start_support_.push_back(State{c});
    }
  }
  env.Tabulate();
  return env;
}

Environment Environment::Chain(int length, double goal_reward) {
  if (length < 2) throw Error("chain length must be at least 2");
  Environment env;
  env.kind_ = Kind::kChain;
  env.name_ = "chain";
  env.chain_length_ = length;
  env.content_hash_ = GitBlobHash("chain:" + std::to_string(length));
  env.goal_reward_ = goal_reward;
  env.num_states_ = length;
  env.num_actions_ = 2;
  env.feature_dim_ = 1;
  env.goal_ = length - 1;
  env.features_.resize(length);
  for (int p = 0; p < length; ++p) env.features_[p] = double(p) / (length - 1);
  for (int p = 0; p + 1 < length; ++p) env.start_support_.push_back(State{p});
  env.Tabulate();
  return env;
}

void Environment::Tabulate() {
  next_.resize(num_states_ * num_actions_);
  done_.resize(num_states_ * num_actions_);
  for (int s = 0; s < num_states_; ++s) {
    for (int a = 0; a < num_actions_; ++a) {
      const StepResult r = RawStep(s, a);
      next_[s * num_actions_ + a] = r.next.id;
      done_[s * num_actions_ + a] = r.done;
    }
  }
}

StepResult Environment::RawStep(int s, int a) const {
  int next = s;
  if (kind_ == Kind::kGrid) {
    const int x = grid_.X(s), y = grid_.Y(s);
    int nx = x, ny = y;
    switch (a) {
      case 0: ++ny; break;
      case 1: --ny; break;
      case 2: --nx; break;
      default: ++nx; break;
    }
    if (nx >= 0 && nx < grid_.width && ny >= 0 && ny < grid_.height) {
      const int cand = grid_.CellId(nx, ny);
      if (!grid_.Blocked(s, cand)) next = cand;
    }
  } else if (a == 0) {
    next = std::min(s + 1, chain_length_ - 1);
  }
  const bool done = next == goal_;
  return StepResult{State{next}, done, done ? goal_reward_ : 0.0};
}

const GridSpec& Environment::grid() const {
  if (kind_ != Kind::kGrid) throw Error("environment is not a grid-world");
  return grid_;
}

std::span<const double> Environment::features(State s) const {
  if (!Valid(s)) throw Error("state id out of range: " + std::to_string(s.id));
  return {features_.data() + s.id * feature_dim_,
          static_cast<std::size_t>(feature_dim_)};
}

ActionLabel Environment::label(Action a) const {
  if (!Valid(a)) throw Error("action id out of range: " + std::to_string(a.id));
  if (kind_ == Kind::kChain) {
    return a.id == 0 ? ActionLabel::kAdvance : ActionLabel::kBrake;
  }
  static constexpr ActionLabel kGrid[] = {ActionLabel::kUp, ActionLabel::kDown,
                                          ActionLabel::kLeft,
                                          ActionLabel::kRight};
  return kGrid[a.id];
}

char Environment::glyph(Action a) const {
  switch (label(a)) {
    case ActionLabel::kUp: return 'U';
    case ActionLabel::kDown: return 'D';
    case ActionLabel::kLeft: return 'L';
    case ActionLabel::kRight: return 'R';
    case ActionLabel::kAdvance: return 'A';
    case ActionLabel::kBrake: return 'B';
  }
  return '?';
}

std::string Environment::ActionName(Action a) const {
  switch (label(a)) {
    case ActionLabel::kUp: return "Up";
    case ActionLabel::kDown: return "Down";
    case ActionLabel::kLeft: return "Left";
    case ActionLabel::kRight: return "Right";
    case ActionLabel::kAdvance: return "Advance";
    case ActionLabel::kBrake: return "Brake";
  }
  return "?";
}

Action Environment::ActionFromGlyph(char g) const {
  for (int a = 0; a < num_actions_; ++a) {
    if (glyph(Action{a}) == g) return Action{a};
  }
  throw DataError(std::string("unknown action glyph '") + g + "' for " + name_);
}

StepResult Environment::Step(State s, Action a) const {
  if (!Valid(s)) throw Error("state id out of range: " + std::to_string(s.id));
  if (!Valid(a)) throw Error("action id out of range: " + std::to_string(a.id));
  const int idx = s.id * num_actions_ + a.id;
  const bool done = done_[idx];
  return StepResult{State{next_[idx]}, done, done ? goal_reward_ : 0.0};
}

bool Environment::TransitionSupport(State s, State s_next) const {
  if (!Valid(s) || !Valid(s_next)) throw Error("state id out of range");
  for (int a = 0; a < num_actions_; ++a) {
    if (next_[s.id * num_actions_ + a] == s_next.id) return true;
  }
  return false;
}

std::vector<State> Environment::EnumerateStates() const {
  std::vector<State> states(num_states_);
  for (int i = 0; i < num_states_; ++i) states[i] = State{i};
  return states;
}

State Environment::SampleStart(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, start_support_.size() - 1);
  return start_support_[pick(rng)];
}

std::vector<int> AllPairsActionDistance(const Environment& env) {
  const int n = env.num_states();
  std::vector<int> dist(static_cast<std::size_t>(n) * n, -1);
  std::deque<int> queue;
  for (int src = 0; src < n; ++src) {
    int* row = dist.data() + static_cast<std::size_t>(src) * n;
    queue.clear();
    for (int a = 0; a < env.num_actions(); ++a) {
      const int nx = env.Step(State{src}, Action{a}).next.id;
      if (row[nx] < 0) {
        row[nx] = 1;
        queue.push_back(nx);
      }
    }
    while (!queue.empty()) {
      const int c = queue.front();
      queue.pop_front();
      for (int a = 0; a < env.num_actions(); ++a) {
        const int nx = env.Step(State{c}, Action{a}).next.id;
        if (row[nx] < 0) {
          row[nx] = row[c] + 1;
          queue.push_back(nx);
        }
      }
    }
  }
  return dist;
}

std::vector<int> DistanceToSet(const Environment& env,
                               std::span<const State> targets) {
  const int n = env.num_states();
  // Reverse adjacency.
  std::vector<std::vector<int>> preds(n);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < env.num_actions(); ++a) {
      const int nx = env.Step(State{s}, Action{a}).next.id;
      if (nx != s) preds[nx].push_back(s);
    }
  }
  std::vector<int> dist(n, -1);
  std::deque<int> queue;
  for (State t : targets) {
    if (dist[t.id] < 0) {
      dist[t.id] = 0;
      queue.push_back(t.id);
    }
  }
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    for (int p : preds[c]) {
      if (dist[p] < 0) {
        dist[p] = dist[c] + 1;
        queue.push_back(p);
      }
    }
  }
  return dist;
}

ExpertDemo MakeExpertDemo(const Environment& env, std::span<const Action> route,
                          State s0) {
  if (!env.Valid(s0)) throw DataError("route start state out of range");
  if (route.empty()) throw DataError("route is empty");
  Trajectory traj;
  State s = s0;
  for (std::size_t k = 0; k < route.size(); ++k) {
    const StepResult r = env.Step(s, route[k]);
    if (r.next == s) {
      throw DataError("route bumps at step " + std::to_string(k) + " (" +
                      env.ActionName(route[k]) + " from state " +
                      std::to_string(s.id) + ")");
    }
    if (r.done && k + 1 != route.size()) {
      throw DataError("route terminates early at step " + std::to_string(k));
    }
    if (!r.done && k + 1 == route.size()) {
      throw DataError("route does not reach a terminal state");
    }
    traj.transitions.push_back(Transition{s, route[k], r.next, r.done});
    traj.total_gt_return += r.gt_reward;
    s = r.next;
  }
  return DemoFromTrajectory(std::move(traj));
}

Route ParseRoute(const Environment& env, std::string_view text) {
  Route route;
  bool have_start = false, have_actions = false;
  int line_no = 0;
  for (const std::string& raw : SplitLines(text)) {
    ++line_no;
    const std::string line = Trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected key=value", line_no, 1);
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key == "start") {
      long long x = 0, y = 0;
      if (env.is_grid()) {
        const auto comma = value.find(',');
        if (comma == std::string::npos ||
            !ParseInt(Trim(value.substr(0, comma)), &x) ||
            !ParseInt(Trim(value.substr(comma + 1)), &y) || x < 0 ||
            y < 0 || x >= env.grid().width || y >= env.grid().height) {
          throw ParseError("start must be an in-bounds 'x,y'", line_no,
                           static_cast<int>(eq + 2));
        }
        route.start = State{env.grid().CellId(int(x), int(y))};
      } else {
        if (!ParseInt(value, &x) || x < 0 || x >= env.num_states()) {
          throw ParseError("start must be an in-range position", line_no,
                           static_cast<int>(eq + 2));
        }
        route.start = State{int(x)};
      }
      have_start = true;
    } else if (key == "actions") {
      for (char g : value) {
        if (g == ' ' || g == ',') continue;
        route.actions.push_back(env.ActionFromGlyph(g));
      }
      have_actions = true;
    } else {
      throw ParseError("unknown route key '" + key + "'", line_no, 1);
    }
  }
  if (!have_start || !have_actions) {
    throw ParseError("route needs both 'start' and 'actions'", line_no, 0);
  }
  return route;
}

std::string FormatTrajectory(const Environment& env, const Trajectory& traj) {
  std::ostringstream out;
  out << "# tdil-trajectory v1 env=" << env.name()
      << " hash=" << env.content_hash() << "\n";
  for (std::size_t k = 0; k < traj.transitions.size(); ++k) {
    const Transition& t = traj.transitions[k];
    out << k << ',' << t.s.id << ',' << t.a.id << ',' << t.next.id << ','
        << (t.terminal ? 1 : 0) << "\n";
  }
  return out.str();
}

Trajectory ParseTrajectory(const Environment& env, std::string_view text) {
  std::vector<std::string> lines = SplitLines(text);
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw DataError("trajectory file is empty");
  const std::string expected_header = "# tdil-trajectory v1 env=" +
                                      env.name() +
                                      " hash=" + env.content_hash();
  if (lines[0] != expected_header) {
    throw DataError("trajectory header mismatch: expected '" +
                    expected_header + "', found '" + lines[0] + "'");
  }
  Trajectory traj;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i + 1);
    long long f[5];
    std::size_t pos = 0;
    for (int k = 0; k < 5; ++k) {
      std::size_t end = lines[i].find(',', pos);
      if (k == 4) end = lines[i].size();
      if (end == std::string::npos) {
        throw ParseError("expected 5 comma-separated fields", line_no,
                         static_cast<int>(pos + 1));
      }
      if (!ParseInt(std::string_view(lines[i]).substr(pos, end - pos),
                    &f[k])) {
        throw ParseError("field is not an integer", line_no,
                         static_cast<int>(pos + 1));
      }
      pos = end + 1;
    }
    const std::size_t step = traj.transitions.size();
    if (f[0] != static_cast<long long>(step)) {
      throw DataError("step_index " + std::to_string(f[0]) + " on line " +
                      std::to_string(line_no) + ", expected " +
                      std::to_string(step));
    }
    const State s{int(f[1])};
    const Action a{int(f[2])};
    const State next{int(f[3])};
    if (!env.Valid(s) || !env.Valid(next) || !env.Valid(a) ||
        (f[4] != 0 && f[4] != 1)) {
      throw DataError("record out of range on line " + std::to_string(line_no));
    }
    if (step > 0 && traj.transitions.back().next != s) {
      throw DataError("chain violation at step " + std::to_string(step) +
                      ": state " + std::to_string(s.id) +
                      " does not follow next_state " +
                      std::to_string(traj.transitions.back().next.id));
    }
    const StepResult r = env.Step(s, a);
    if (r.next != next || r.done != (f[4] == 1)) {
      throw DataError("record on line " + std::to_string(line_no) +
                      " contradicts the environment dynamics");
    }
    traj.transitions.push_back(Transition{s, a, next, f[4] == 1});
    traj.total_gt_return += r.gt_reward;
  }
  return traj;
}

void SaveDemo(const std::string& path, const Environment& env,
              const ExpertDemo& demo) {
  WriteFile(path, FormatTrajectory(env, demo.trajectory));
}

ExpertDemo LoadDemo(const std::string& path, const Environment& env) {
  Trajectory traj = ParseTrajectory(env, ReadFile(path));
  if (traj.empty()) throw DataError("demo has no transitions: " + path);
  return DemoFromTrajectory(std::move(traj));
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write failed: " + path);
}

}  // namespace tdil
