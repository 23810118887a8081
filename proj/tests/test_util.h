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


#ifndef TDIL_TESTS_TEST_UTIL_H_
#define TDIL_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <string>

#include <unistd.h>

#include "tdil/env.h"
#include "tdil/trainer.h"

namespace tdil::test {

inline std::string DataPath(const std::string& name) {
  return std::string(TDIL_DATA_DIR) + "/" + name;
}

inline Task ShippedTask() {
  EnvConfig c;
  c.map_path = DataPath("maze.grid");
  c.route_path = DataPath("maze.route");
  return LoadTask(c);
}

// Barrier-free width x height grid with the goal at (gx, gy).
inline Environment OpenGrid(int width, int height, int gx, int gy) {
  GridSpec g;
  g.width = width;
  g.height = height;
  g.goal = g.CellId(gx, gy);
  return Environment::Grid(g);
}

// Fresh per-process scratch path.
inline std::string TempPath(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("tdil-test-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace tdil::test

#endif  // TDIL_TESTS_TEST_UTIL_H_
