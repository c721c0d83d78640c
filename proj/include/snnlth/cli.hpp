// Copyright 2026 The snnlth Authors
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

#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace snnlth {

struct CommandOptions {
  std::string name;  // train, search, prune, verify-lth, prob-report, plot
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
};

const std::vector<std::string>& subcommand_names();

// Runs one subcommand and writes its artifacts. Throws on any error.
void run_subcommand(const CommandOptions& opts);

// Machine-readable reason for an exception thrown by run_subcommand, e.g.
// "infeasible-bound" or "config-error".
std::string error_reason(const std::exception& e);

// "error: <reason>: <detail>" on a single line.
std::string error_line(const std::exception& e);

}  // namespace snnlth
