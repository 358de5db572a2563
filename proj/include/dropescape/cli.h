//
// Copyright 2026 The DropEscape Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DROPESCAPE_CLI_H_
#define DROPESCAPE_CLI_H_

#include <ostream>

namespace dropescape {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitGateFailure = 3;

// Entry point of the `dropescape` tool. Subcommands: sgd-train, dp-simplex
// (run | audit), dp-glm, escape, bench, and audit (same as dp-simplex audit).
// Every subcommand takes --config, --out, --seed and --threads. The seed
// falls back to the config key `seed`, then to DROPESCAPE_SEED, then to 1.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace dropescape

#endif  // DROPESCAPE_CLI_H_
