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

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "snnlth/cli.hpp"

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("snnlth");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lv = std::getenv("SNNLTH_LOG")) spdlog::set_level(spdlog::level::from_str(lv));

  CLI::App app{"Spiking network lottery-ticket experiments"};
  app.require_subcommand(1);
  snnlth::CommandOptions opts;
  std::string out;
  std::uint64_t seed = 0;
  for (const auto& name : snnlth::subcommand_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config, "experiment config file")->required();
    sub->add_option("--out", out, "output directory (overrides [output] dir)");
    sub->add_option("--seed", seed, "base seed (overrides [run] seed)");
    sub->callback([&, sub, name] {
      opts.name = name;
      if (sub->count("--out")) opts.out = out;
      if (sub->count("--seed")) opts.seed = seed;
    });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    snnlth::run_subcommand(opts);
  } catch (const std::exception& e) {
    std::cerr << snnlth::error_line(e) << '\n';
    return 1;
  }
  return 0;
}
