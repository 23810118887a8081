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

#ifndef TDIL_TOOLS_COMMANDS_H_
#define TDIL_TOOLS_COMMANDS_H_

#include <ostream>
#include <span>
#include <string>

namespace tdil::cli {

// Entry point of the `tdil` tool. args[0] is the program name. Returns the
// process exit code; errors are reported on `err`.
int RunCommand(std::span<const std::string> args, std::ostream& out,
               std::ostream& err);

// Directory holding the shipped map and route.
std::string DefaultDataDir();

}  // namespace tdil::cli

#endif  // TDIL_TOOLS_COMMANDS_H_
