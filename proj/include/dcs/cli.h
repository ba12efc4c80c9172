// Copyright 2026 The DCS Authors.
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

#ifndef DCS_CLI_H_
#define DCS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

#include "dcs/metagraph.h"

namespace dcs {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitUsage = 2;

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "imagenet", "cifar10", "cell:N", or a meta-graph document path. Edge sets
// of the result are cleared.
MetaGraph resolve_space(const std::string& name);

}  // namespace dcs

#endif  // DCS_CLI_H_
