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

#include "snnlth/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

#include "snnlth/errors.hpp"

namespace snnlth {

namespace pt = boost::property_tree;

namespace {

std::string where(const std::string& section, const std::string& key) {
  return "[" + section + "] " + key;
}

}  // namespace

Config Config::parse(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.message(), e.line());
  }
  Config cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("key '" + section + "' outside of any section");
    }
    auto& dst = cfg.values_[section];
    for (const auto& [key, value] : body) dst[key] = boost::trim_copy(value.data());
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError(path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void Config::check(const Schema& schema) const {
  for (const auto& [section, keys] : values_) {
    auto it = schema.find(section);
    if (it == schema.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      if (!it->second.contains(key)) throw ConfigError("unknown key " + where(section, key));
    }
  }
}

bool Config::has(const std::string& section, const std::string& key) const {
  return lookup(section, key).has_value();
}

void Config::set(const std::string& section, const std::string& key, std::string value) {
  values_[section][key] = std::move(value);
}

std::optional<std::string> Config::lookup(const std::string& section,
                                          const std::string& key) const {
  auto s = values_.find(section);
  if (s == values_.end()) return std::nullopt;
  auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::string Config::str(const std::string& section, const std::string& key) const {
  auto v = lookup(section, key);
  if (!v) throw ConfigError("missing key " + where(section, key));
  return *v;
}

std::string Config::str(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  return lookup(section, key).value_or(fallback);
}

double Config::real(const std::string& section, const std::string& key, double fallback) const {
  auto v = lookup(section, key);
  if (!v) return fallback;
  double out = 0.0;
  auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size()) {
    throw ConfigError(where(section, key) + ": expected a number, got '" + *v + "'");
  }
  return out;
}

std::uint64_t Config::u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const {
  auto v = lookup(section, key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size()) {
    throw ConfigError(where(section, key) + ": expected an unsigned integer, got '" + *v + "'");
  }
  return out;
}

bool Config::flag(const std::string& section, const std::string& key, bool fallback) const {
  auto v = lookup(section, key);
  if (!v) return fallback;
  const auto s = boost::to_lower_copy(*v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(where(section, key) + ": expected a boolean, got '" + *v + "'");
}

std::vector<std::size_t> Config::sizes(const std::string& section, const std::string& key,
                                       const std::vector<std::size_t>& fallback) const {
  auto v = lookup(section, key);
  if (!v) return fallback;
  std::vector<std::size_t> out;
  if (boost::trim_copy(*v).empty()) return out;
  std::vector<std::string> parts;
  boost::split(parts, *v, boost::is_any_of(","));
  for (auto& part : parts) {
    boost::trim(part);
    std::size_t n = 0;
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), n);
    if (part.empty() || ec != std::errc() || p != part.data() + part.size()) {
      throw ConfigError(where(section, key) + ": expected a list of integers, got '" + *v + "'");
    }
    out.push_back(n);
  }
  return out;
}

}  // namespace snnlth
