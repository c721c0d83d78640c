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

#include "snnlth/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <boost/algorithm/string.hpp>

#include "snnlth/errors.hpp"

namespace snnlth {

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), p);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != header_.size()) throw DomainError("csv row width differs from header");
  rows_.push_back(std::move(row));
}

void CsvTable::write(std::ostream& out) const {
  out << boost::join(header_, ",") << '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) {
              out << format_number(v);
            } else {
              out << v;
            }
          },
          row[c]);
    }
    out << '\n';
  }
}

void CsvTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write(out);
}

std::size_t CsvData::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ConfigError("csv has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvData read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError(path.string());
  CsvData data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    boost::trim_right_if(line, boost::is_any_of("\r"));
    if (line.empty()) continue;
    std::vector<std::string> cells;
    boost::split(cells, line, boost::is_any_of(","));
    if (data.header.empty()) {
      data.header = std::move(cells);
      continue;
    }
    if (cells.size() != data.header.size()) {
      throw ParseError("expected " + std::to_string(data.header.size()) + " columns", line_no);
    }
    data.rows.push_back(std::move(cells));
  }
  if (data.header.empty()) throw ParseError("empty csv: " + path.string());
  return data;
}

namespace {

double cell_number(const std::string& s, std::size_t row) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError("not a number: '" + s + "'", row + 2);
  }
  return v;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Pads a degenerate range so points land inside the frame.
std::pair<double, double> padded(double lo, double hi) {
  if (lo == hi) return {lo - 0.5, hi + 0.5};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string scatter_svg(const CsvData& data, const PlotSpec& spec) {
  const auto xc = data.column(spec.x);
  const auto yc = data.column(spec.y);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    pts.emplace_back(cell_number(data.rows[r][xc], r), cell_number(data.rows[r][yc], r));
  }

  constexpr double kW = 640, kH = 480, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!pts.empty()) {
    auto [xa, xb] = std::minmax_element(pts.begin(), pts.end(),
                                        [](auto a, auto b) { return a.first < b.first; });
    auto [ya, yb] = std::minmax_element(pts.begin(), pts.end(),
                                        [](auto a, auto b) { return a.second < b.second; });
    std::tie(xmin, xmax) = padded(xa->first, xb->first);
    std::tie(ymin, ymax) = padded(ya->second, yb->second);
  }
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * (kW - kLeft - kRight); };
  auto py = [&](double y) { return kH - kBottom - (y - ymin) / (ymax - ymin) * (kH - kTop - kBottom); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    svg << "<text class=\"title\" x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\">"
        << escape(spec.title) << "</text>\n";
  }
  const double x0 = kLeft, x1 = kW - kRight, y0 = kH - kBottom, y1 = kTop;
  svg << "<line class=\"axis\" x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\""
      << y0 << "\" stroke=\"black\"/>\n";
  svg << "<line class=\"axis\" x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\""
      << y1 << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4, yv = ymin + (ymax - ymin) * i / 4;
    char xs[32], ys[32];
    std::snprintf(xs, sizeof xs, "%.3g", xv);
    std::snprintf(ys, sizeof ys, "%.3g", yv);
    svg << "<text class=\"tick\" x=\"" << px(xv) << "\" y=\"" << y0 + 16
        << "\" text-anchor=\"middle\" font-size=\"10\">" << xs << "</text>\n";
    svg << "<text class=\"tick\" x=\"" << x0 - 6 << "\" y=\"" << py(yv) + 3
        << "\" text-anchor=\"end\" font-size=\"10\">" << ys << "</text>\n";
  }
  svg << "<text class=\"xlabel\" x=\"" << (x0 + x1) / 2 << "\" y=\"" << kH - 16
      << "\" text-anchor=\"middle\">" << escape(spec.x) << "</text>\n";
  svg << "<text class=\"ylabel\" x=\"18\" y=\"" << (y0 + y1) / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << (y0 + y1) / 2 << ")\">"
      << escape(spec.y) << "</text>\n";
  for (const auto& [x, y] : pts) {
    svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"4\" fill=\"steelblue\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace snnlth
