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

#include "snnlth/cli.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "snnlth/checkpoint.hpp"
#include "snnlth/config.hpp"
#include "snnlth/digest.hpp"
#include "snnlth/encode.hpp"
#include "snnlth/errors.hpp"
#include "snnlth/lth.hpp"
#include "snnlth/prob_model.hpp"
#include "snnlth/prune.hpp"
#include "snnlth/report.hpp"
#include "snnlth/rng.hpp"
#include "snnlth/subnet_search.hpp"
#include "snnlth/train.hpp"

namespace snnlth {

namespace fs = std::filesystem;

namespace {

// Stream tags for seeds derived from [run] seed when a section omits its own.
enum SeedTag : std::uint64_t {
  kDataSeed = 1,
  kEvalSeed,
  kNetworkSeed,
  kTrainSeed,
  kScoreSeed,
  kLthSeed,
};

const std::set<std::string> kDataKeys = {"kind",     "classes",        "width",     "timesteps",
                                         "noise",    "per_class",      "seed",      "eval_per_class",
                                         "eval_seed", "path",          "eval_path"};
const std::set<std::string> kNetworkKeys = {"hidden", "beta", "u_th", "v_reset",
                                            "init_scale", "norm", "seed"};
const std::set<std::string> kTrainKeys = {"learning_rate", "epochs", "batch_size",
                                          "momentum", "surrogate_width", "seed"};

Config::Schema schema_for(const std::string& name) {
  Config::Schema s = {{"run", {"seed"}}, {"output", {"dir"}}};
  if (name == "train" || name == "search" || name == "prune") {
    s["data"] = kDataKeys;
    s["network"] = kNetworkKeys;
    s["train"] = kTrainKeys;
  }
  if (name == "search") s["search"] = {"keep_percent", "score_seed"};
  if (name == "prune") {
    s["prune"] = {"rate", "iterations", "rewind_epoch", "epochs", "criterion", "scope"};
  }
  if (name == "verify-lth") {
    s["lth"] = {"width",   "depth",        "timesteps",  "epsilon", "eps_fraction",
                "delta",   "u_th",         "beta",       "v_reset", "C",
                "targets", "pilot_targets", "input_rate", "seed",    "compact", "selection"};
  }
  if (name == "prob-report") {
    s["prob"] = {"checkpoint"};
    s["data"] = kDataKeys;
  }
  if (name == "plot") s["plot"] = {"csv", "x", "y", "title", "output"};
  return s;
}

struct Context {
  Config cfg;
  fs::path out;
  std::uint64_t seed = 0;

  std::uint64_t seed_of(const std::string& section, const std::string& key, SeedTag tag) const {
    return cfg.u64(section, key, derive_seed(seed, {tag}));
  }
  fs::path artifact(const std::string& name) const { return out / name; }
};

Context make_context(const CommandOptions& opts) {
  Context ctx{Config::load(opts.config), {}, 0};
  ctx.cfg.check(schema_for(opts.name));
  if (opts.seed) {
    ctx.seed = *opts.seed;
  } else if (ctx.cfg.has("run", "seed")) {
    ctx.seed = ctx.cfg.u64("run", "seed", 0);
  } else {
    throw ConfigError("no seed: set [run] seed or pass --seed");
  }
  ctx.out = opts.out ? *opts.out : fs::path(ctx.cfg.str("output", "dir", "out"));
  if (ctx.out.is_relative() && !opts.out && ctx.cfg.has("output", "dir")) {
    ctx.out = opts.config.parent_path() / ctx.out;
  }
  fs::create_directories(ctx.out);
  return ctx;
}

fs::path resolve(const CommandOptions& opts, const std::string& p) {
  fs::path path(p);
  return path.is_relative() ? opts.config.parent_path() / path : path;
}

struct Datasets {
  LabeledSpikeDataset train;
  LabeledSpikeDataset eval;
};

Datasets load_data(const Context& ctx, const CommandOptions& opts) {
  const auto& c = ctx.cfg;
  const auto kind = c.str("data", "kind", "synthetic");
  Datasets d;
  if (kind == "synthetic") {
    SyntheticSpec spec;
    spec.n_classes = c.u64("data", "classes", spec.n_classes);
    spec.width = c.u64("data", "width", spec.width);
    spec.timesteps = c.u64("data", "timesteps", spec.timesteps);
    spec.flip_noise = c.real("data", "noise", spec.flip_noise);
    spec.count_per_class = c.u64("data", "per_class", spec.count_per_class);
    spec.seed = ctx.seed_of("data", "seed", kDataSeed);
    d.train = synthetic_patterns(spec);
    SyntheticSpec eval = spec;
    eval.count_per_class = c.u64("data", "eval_per_class", spec.count_per_class);
    // Same prototypes, fresh noise.
    eval.first_sample = spec.count_per_class;
    d.eval = synthetic_patterns(eval);
  } else if (kind == "csv") {
    const auto T = c.u64("data", "timesteps", 4);
    d.train = load_feature_csv(resolve(opts, c.str("data", "path")), T,
                               ctx.seed_of("data", "seed", kDataSeed));
    if (c.has("data", "eval_path")) {
      d.eval = load_feature_csv(resolve(opts, c.str("data", "eval_path")), T,
                                ctx.seed_of("data", "eval_seed", kEvalSeed));
    }
  } else {
    throw ConfigError("[data] kind: expected synthetic or csv, got '" + kind + "'");
  }
  if (d.train.empty()) throw DomainError("training data is empty");
  return d;
}

SpikingNetwork build_network(const Context& ctx, const LabeledSpikeDataset& data) {
  const auto& c = ctx.cfg;
  NetworkShape shape;
  shape.widths.push_back(data.width);
  for (auto h : c.sizes("network", "hidden", {32})) shape.widths.push_back(h);
  shape.widths.push_back(data.n_classes);
  shape.params.beta = c.real("network", "beta", shape.params.beta);
  shape.params.u_th = c.real("network", "u_th", shape.params.u_th);
  shape.params.v_reset = c.real("network", "v_reset", shape.params.v_reset);
  shape.init_scale = c.real("network", "init_scale", shape.init_scale);
  const auto norm = c.str("network", "norm", "none");
  if (norm == "hidden") {
    shape.hidden_norm = true;
  } else if (norm == "all") {
    shape.all_norm = true;
  } else if (norm != "none") {
    throw ConfigError("[network] norm: expected none, hidden or all, got '" + norm + "'");
  }
  auto net = make_network(shape, ctx.seed_of("network", "seed", kNetworkSeed));
  if (shape.hidden_norm || shape.all_norm) calibrate_norm(net, data);
  return net;
}

TrainConfig train_config(const Context& ctx) {
  const auto& c = ctx.cfg;
  TrainConfig t;
  t.learning_rate = c.real("train", "learning_rate", t.learning_rate);
  t.epochs = c.u64("train", "epochs", t.epochs);
  t.batch_size = c.u64("train", "batch_size", t.batch_size);
  t.momentum = c.real("train", "momentum", t.momentum);
  t.seed = ctx.seed_of("train", "seed", kTrainSeed);
  t.validate();
  return t;
}

SurrogateSpec surrogate(const Context& ctx) {
  SurrogateSpec s;
  s.width = ctx.cfg.real("train", "surrogate_width", s.width);
  s.validate();
  return s;
}

// Digest of every seed that fed the run, stored in checkpoints.
std::uint64_t seed_digest(const Context& ctx, std::initializer_list<SeedTag> tags) {
  Digest d;
  d.add_u64(ctx.seed);
  for (auto t : tags) d.add_u64(derive_seed(ctx.seed, {t}));
  return d.value();
}

void cmd_train(const Context& ctx, const CommandOptions& opts) {
  auto data = load_data(ctx, opts);
  auto net = build_network(ctx, data.train);
  const auto tcfg = train_config(ctx);
  Trainer trainer(tcfg, surrogate(ctx));
  CsvTable csv({"epoch", "loss", "train_acc", "eval_acc"});
  for (std::size_t e = 0; e < tcfg.epochs; ++e) {
    const auto st = trainer.train_epoch(net, data.train, e);
    const double eval = data.eval.empty() ? 0.0 : accuracy(net, data.eval);
    csv.add_row({std::uint64_t{e + 1}, st.loss, st.train_acc, eval});
    spdlog::info("epoch {} loss {:.4f} train {:.3f} eval {:.3f}", e + 1, st.loss, st.train_acc, eval);
  }
  csv.save(ctx.artifact("train_metrics.csv"));
  save_checkpoint(ctx.artifact("model.ckpt"),
                  {net, std::nullopt, seed_digest(ctx, {kDataSeed, kNetworkSeed, kTrainSeed})});
}

void cmd_search(const Context& ctx, const CommandOptions& opts) {
  auto data = load_data(ctx, opts);
  auto net = build_network(ctx, data.train);
  SearchConfig sc;
  sc.keep_percent = ctx.cfg.real("search", "keep_percent", sc.keep_percent);
  sc.train = train_config(ctx);
  auto scores = init_scores(net, ctx.seed_of("search", "score_seed", kScoreSeed));
  std::uint64_t before = 0;
  for (const auto& l : net.layers) before ^= digest_of(l.weights);
  const auto result = edge_popup_train(net, scores, data.train, data.eval, sc, surrogate(ctx));
  std::uint64_t after = 0;
  for (const auto& l : net.layers) after ^= digest_of(l.weights);
  if (before != after) throw std::logic_error("search changed frozen weights");

  CsvTable csv({"epoch", "train_acc", "eval_acc", "sparsity"});
  for (const auto& e : result.trace) {
    csv.add_row({std::uint64_t{e.epoch + 1}, e.train_acc, e.eval_acc, e.sparsity});
  }
  csv.save(ctx.artifact("search_metrics.csv"));
  save_checkpoint(ctx.artifact("search_mask.ckpt"),
                  {net, result.scores,
                   seed_digest(ctx, {kDataSeed, kNetworkSeed, kTrainSeed, kScoreSeed})});
}

void cmd_prune(const Context& ctx, const CommandOptions& opts) {
  auto data = load_data(ctx, opts);
  auto net = build_network(ctx, data.train);
  const auto& c = ctx.cfg;
  ImpConfig ic;
  ic.rate = c.real("prune", "rate", ic.rate);
  ic.iterations = c.u64("prune", "iterations", ic.iterations);
  ic.rewind_epoch = c.u64("prune", "rewind_epoch", ic.rewind_epoch);
  ic.epochs = c.u64("prune", "epochs", ic.epochs);
  ic.criterion = parse_criterion(c.str("prune", "criterion", "magnitude"));
  const auto scope = c.str("prune", "scope", "global");
  if (scope == "global") {
    ic.scope = PruneScope::kGlobal;
  } else if (scope == "layer") {
    ic.scope = PruneScope::kPerLayer;
  } else {
    throw ConfigError("[prune] scope: expected global or layer, got '" + scope + "'");
  }
  auto tcfg = train_config(ctx);
  tcfg.epochs = ic.epochs;

  const auto traj = imp_run(net, data.train, data.eval, ic, tcfg, surrogate(ctx));
  CsvTable csv({"iteration", "sparsity", "eval_acc", "criterion"});
  const auto digest = seed_digest(ctx, {kDataSeed, kNetworkSeed, kTrainSeed});
  for (const auto& it : traj.iterations) {
    csv.add_row({std::uint64_t{it.iteration}, it.sparsity, it.eval_acc, to_string(traj.criterion)});
    // Ticket = rewind weights under this iteration's mask.
    SpikingNetwork ticket = net;
    for (std::size_t l = 0; l < ticket.depth(); ++l) {
      ticket.layers[l].weights = traj.rewind_weights[l];
      ticket.layers[l].mask = it.masks[l];
    }
    char name[32];
    std::snprintf(name, sizeof name, "mask_iter_%02zu.ckpt", it.iteration);
    save_checkpoint(ctx.artifact(name), {ticket, std::nullopt, digest});
  }
  csv.save(ctx.artifact("trajectory.csv"));
}

std::string lth_report(const LthExperimentConfig& cfg, const LthExperimentResult& r) {
  const auto& b = r.bounds;
  std::vector<std::pair<std::string, std::string>> rows = {
      {"N", std::to_string(b.width)},
      {"L", std::to_string(b.depth)},
      {"T", std::to_string(b.timesteps)},
      {"eps", format_number(b.eps)},
      {"delta", format_number(b.delta)},
      {"u_th", format_number(b.u_th)},
      {"C", format_number(b.C) + (cfg.measure_c ? " (measured)" : "")},
      {"p_sup", format_number(r.p_sup)},
      {"slack delta-NCLTeps",
       format_number(b.delta - static_cast<double>(b.width * b.depth * b.timesteps) * b.C * b.eps)},
      {"k single", std::to_string(r.k_single)},
      {"k layer", std::to_string(r.k_layer)},
      {"k layer-to-layer", std::to_string(r.k_layer_to_layer)},
      {"k layer-to-layer (log N/delta)", std::to_string(r.k_layer_to_layer_short_log)},
      {"k activation", std::to_string(r.k_activation)},
      {"k network (used)", std::to_string(r.k_network)},
      {"targets", std::to_string(cfg.targets)},
      {"blocks attempted", std::to_string(r.blocks)},
      {"blocks failed", std::to_string(r.failed_blocks)},
      {"targets with failed blocks", std::to_string(r.trials_with_failed_blocks)},
      {"agreement fraction", format_number(r.agreement.fraction)},
      {"bound 1-delta", format_number(1.0 - b.delta)},
      {"bound met", r.agreement.fraction >= 1.0 - b.delta ? "yes" : "no"},
      {"mean output l2", format_number(r.agreement.mean_l2)},
  };
  std::size_t w = 0;
  for (const auto& [k, v] : rows) w = std::max(w, k.size());
  std::ostringstream out;
  for (const auto& [k, v] : rows) out << k << std::string(w - k.size() + 2, ' ') << v << '\n';
  return out.str();
}

void cmd_verify_lth(const Context& ctx, const CommandOptions&) {
  const auto& c = ctx.cfg;
  LthExperimentConfig e;
  e.bounds.width = c.u64("lth", "width", 4);
  e.bounds.depth = c.u64("lth", "depth", 2);
  e.bounds.timesteps = c.u64("lth", "timesteps", 3);
  e.bounds.delta = c.real("lth", "delta", 0.2);
  e.lif.u_th = c.real("lth", "u_th", e.lif.u_th);
  e.lif.beta = c.real("lth", "beta", e.lif.beta);
  e.lif.v_reset = c.real("lth", "v_reset", e.lif.v_reset);
  const auto eps = c.str("lth", "epsilon", "auto");
  e.auto_eps = eps == "auto";
  if (!e.auto_eps) e.bounds.eps = c.real("lth", "epsilon", 0.0);
  e.eps_fraction = c.real("lth", "eps_fraction", e.eps_fraction);
  const auto C = c.str("lth", "C", "measure");
  e.measure_c = C == "measure";
  if (!e.measure_c) e.bounds.C = c.real("lth", "C", 0.0);
  e.targets = c.u64("lth", "targets", e.targets);
  e.pilot_targets = c.u64("lth", "pilot_targets", e.pilot_targets);
  e.input_rate = c.real("lth", "input_rate", e.input_rate);
  e.compact = c.flag("lth", "compact", e.compact);
  const auto rule = c.str("lth", "selection", "first");
  if (rule == "best") {
    e.rule = SelectionRule::kBestError;
  } else if (rule != "first") {
    throw ConfigError("lth selection must be first or best, got '" + rule + "'");
  }
  e.seed = ctx.seed_of("lth", "seed", kLthSeed);

  const auto r = run_lth_experiment(e);
  const auto text = lth_report(e, r);
  std::ofstream(ctx.artifact("lth_report.txt"), std::ios::trunc) << text;
  std::cout << text;
}

void cmd_prob_report(const Context& ctx, const CommandOptions& opts) {
  auto ck = load_checkpoint(resolve(opts, ctx.cfg.str("prob", "checkpoint")));
  auto data = load_data(ctx, opts);
  if (data.train.width != ck.net.input_width()) {
    throw DomainError("data width " + std::to_string(data.train.width) +
                      " differs from network input width " + std::to_string(ck.net.input_width()));
  }
  const auto stats = estimate_membrane_stats(ck.net, data.train);
  CsvTable csv({"layer", "out_idx", "in_idx", "|w|", "e_act_absw", "gamma_scale", "mu", "var", "P"});
  for (const auto& r : flip_report(ck.net, stats)) {
    csv.add_row({std::uint64_t{r.layer}, std::uint64_t{r.out_idx}, std::uint64_t{r.in_idx}, r.abs_w,
                 r.e_act_absw, r.gamma_scale, r.mu, r.var, r.p});
  }
  csv.save(ctx.artifact("prob_report.csv"));
}

void cmd_plot(const Context& ctx, const CommandOptions& opts) {
  const auto& c = ctx.cfg;
  const auto data = read_csv(resolve(opts, c.str("plot", "csv")));
  PlotSpec spec{c.str("plot", "x"), c.str("plot", "y"), c.str("plot", "title", "")};
  std::ofstream out(ctx.artifact(c.str("plot", "output", "plot.svg")), std::ios::trunc);
  out << scatter_svg(data, spec);
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {"train",      "search",      "prune",
                                                 "verify-lth", "prob-report", "plot"};
  return names;
}

void run_subcommand(const CommandOptions& opts) {
  const auto& names = subcommand_names();
  if (std::find(names.begin(), names.end(), opts.name) == names.end()) {
    throw ConfigError("unknown subcommand '" + opts.name + "'");
  }
  const auto ctx = make_context(opts);
  spdlog::info("{}: output in {}", opts.name, ctx.out.string());
  if (opts.name == "train") cmd_train(ctx, opts);
  if (opts.name == "search") cmd_search(ctx, opts);
  if (opts.name == "prune") cmd_prune(ctx, opts);
  if (opts.name == "verify-lth") cmd_verify_lth(ctx, opts);
  if (opts.name == "prob-report") cmd_prob_report(ctx, opts);
  if (opts.name == "plot") cmd_plot(ctx, opts);
}

std::string error_reason(const std::exception& e) {
  if (dynamic_cast<const InfeasibleBoundError*>(&e)) return "infeasible-bound";
  if (dynamic_cast<const ConfigError*>(&e)) return "config-error";
  if (dynamic_cast<const ParseError*>(&e)) return "parse-error";
  if (dynamic_cast<const VersionError*>(&e)) return "version-error";
  if (dynamic_cast<const MissingFileError*>(&e)) return "missing-file";
  if (dynamic_cast<const DomainError*>(&e)) return "domain-error";
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return "io-error";
  return "internal-error";
}

std::string error_line(const std::exception& e) {
  std::string detail = e.what();
  std::replace(detail.begin(), detail.end(), '\n', ' ');
  const auto reason = error_reason(e);
  if (detail.starts_with(reason + ": ")) detail.erase(0, reason.size() + 2);
  return "error: " + reason + ": " + detail;
}

}  // namespace snnlth
