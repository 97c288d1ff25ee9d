// Copyright 2026 The Bagcell Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bagcell {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitAborted = 2;

/// Environment variable naming the output directory when --out is absent.
inline constexpr const char* kOutputDirEnv = "BAGCELL_OUT_DIR";
inline constexpr const char* kDefaultOutputDir = "bagcell-out";

/// Entry point of the `bagcell` tool. `args` excludes the program name.
/// Returns one of the kExit* codes.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bagcell
