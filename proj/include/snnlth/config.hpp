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

// key = value configuration with [section] headers. Each subcommand declares
// the keys it understands; anything else is rejected.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace snnlth {

class Config {
 public:
  using Schema = std::map<std::string, std::set<std::string>>;

  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  // Throws ConfigError naming the first section or key not in `schema`.
  void check(const Schema& schema) const;

  bool has(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, std::string value);

  std::string str(const std::string& section, const std::string& key) const;
  std::string str(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double real(const std::string& section, const std::string& key, double fallback) const;
  std::uint64_t u64(const std::string& section, const std::string& key,
                    std::uint64_t fallback) const;
  bool flag(const std::string& section, const std::string& key, bool fallback) const;
  // Comma separated unsigned integers; empty string gives an empty list.
  std::vector<std::size_t> sizes(const std::string& section, const std::string& key,
                                 const std::vector<std::size_t>& fallback) const;

 private:
  std::optional<std::string> lookup(const std::string& section, const std::string& key) const;
  std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace snnlth
