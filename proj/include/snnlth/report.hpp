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

// CSV tables and SVG scatter plots for experiment artifacts.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace snnlth {

// Shortest round-trip text for a double.
std::string format_number(double v);

class CsvTable {
 public:
  using Cell = std::variant<std::string, double, std::uint64_t>;

  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<Cell> row);  // must match the header width
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // ConfigError if absent
};

// Plain comma separated text; no quoting.
CsvData read_csv(const std::filesystem::path& path);

struct PlotSpec {
  std::string x;
  std::string y;
  std::string title;
};

// One circle per row of (x, y), axes labeled with the column names.
std::string scatter_svg(const CsvData& data, const PlotSpec& spec);

}  // namespace snnlth
