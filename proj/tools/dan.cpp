// Copyright 2026 The dansim Authors
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

// dan: scenario runner and forecaster CLI.
//   dan run <scenario.toml> --seed <u64> --out <dir>
//   dan validate <scenario.toml>
//   dan forecast <dataset-dir> [--config <toml>] [--generate]
//   dan gradcheck
//   dan report <dir>
// Exit codes: 0 success, 1 validation/parse error, 2 runtime error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "dan/harness.hpp"
#include "dan/log.hpp"
#include "dan/scenario.hpp"
#include "dan/tensor.hpp"
#include "dan/ynet.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int cmd_run(const std::string& scenario_path, std::uint64_t seed,
            bool seed_given, const std::string& out_dir) {
  dan::scenario sc;
  try {
    sc = dan::load_scenario(scenario_path);
    if (seed_given) sc.seed = seed;
    sc.validate();
  } catch (const dan::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  try {
    dan::log_info("running scenario '" + sc.name + "' with seed " +
                  std::to_string(sc.seed));
    auto artifacts = dan::run_scenario(sc);
    dan::export_artifacts(artifacts, out_dir);
    std::cout << "wrote " << artifacts.report.rows.size() << " epoch(s) to "
              << out_dir << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_validate(const std::string& scenario_path) {
  try {
    dan::scenario sc = dan::load_scenario(scenario_path);
    std::cout << "ok: " << sc.name << " (" << sc.citizens << " citizens, "
              << sc.duration << " ticks)\n";
    return kExitOk;
  } catch (const dan::error& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kExitValidation;
  }
}

struct forecast_options {
  std::size_t n = 10, t = 12, h = 3, sequences = 200;
  std::size_t hidden = 6, blocks = 2, kernel = 2, diffusion = 2;
  std::size_t steps = 500, batch = 16;
  double lr = 0.01;
  double holdout = 0.2;
  std::uint64_t seed = 42;
};

forecast_options load_forecast_options(const std::string& config_path) {
  forecast_options o;
  if (config_path.empty()) return o;
  auto t = dan::toml::table::parse_file(config_path);
  auto sz = [](std::int64_t v) { return static_cast<std::size_t>(v); };
  o.n = sz(t.get_int("data.nodes", static_cast<std::int64_t>(o.n)));
  o.t = sz(t.get_int("data.history", static_cast<std::int64_t>(o.t)));
  o.h = sz(t.get_int("data.horizon", static_cast<std::int64_t>(o.h)));
  o.sequences =
      sz(t.get_int("data.sequences", static_cast<std::int64_t>(o.sequences)));
  o.seed = static_cast<std::uint64_t>(
      t.get_int("data.seed", static_cast<std::int64_t>(o.seed)));
  o.hidden = sz(t.get_int("model.hidden", static_cast<std::int64_t>(o.hidden)));
  o.blocks = sz(t.get_int("model.st_blocks", static_cast<std::int64_t>(o.blocks)));
  o.kernel = sz(t.get_int("model.kernel", static_cast<std::int64_t>(o.kernel)));
  o.diffusion =
      sz(t.get_int("model.diffusion", static_cast<std::int64_t>(o.diffusion)));
  o.steps = sz(t.get_int("train.steps", static_cast<std::int64_t>(o.steps)));
  o.batch = sz(t.get_int("train.batch", static_cast<std::int64_t>(o.batch)));
  o.lr = t.get_double("train.learning_rate", o.lr);
  o.holdout = t.get_double("train.holdout", o.holdout);
  auto leftovers = t.untouched();
  if (!leftovers.empty())
    throw dan::validation_error("unknown key: " + leftovers.front());
  return o;
}

int cmd_forecast(const std::string& dataset_dir, const std::string& config,
                 bool generate) {
  forecast_options o;
  try {
    o = load_forecast_options(config);
  } catch (const dan::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  try {
    const fs::path dir(dataset_dir);
    const fs::path bin = dir / "dataset.bin";
    dan::forecast_dataset ds;
    if (generate || !fs::exists(bin)) {
      if (!generate) {
        std::cerr << "error: " << bin.string()
                  << " not found (pass --generate to create it)\n";
        return kExitValidation;
      }
      fs::create_directories(dir);
      ds = dan::generate_synthetic(o.n, o.t, o.h, o.sequences, o.seed);
      std::ofstream os(bin, std::ios::binary | std::ios::trunc);
      ds.save(os);
      nlohmann::json meta{{"N", ds.N},         {"T", ds.T},
                          {"H", ds.H},         {"delta", ds.delta},
                          {"seed", ds.seed},   {"sequences", ds.samples.size()}};
      std::ofstream ms(dir / "dataset.json", std::ios::trunc);
      ms << meta.dump(2) << "\n";
      std::cout << "generated " << ds.samples.size() << " sequences\n";
    } else {
      std::ifstream is(bin, std::ios::binary);
      if (!is) throw dan::io_error("cannot open " + bin.string());
      ds = dan::forecast_dataset::load(is);
    }
    if (ds.samples.empty()) throw dan::error("dataset is empty");

    const std::size_t n_test = std::max<std::size_t>(
        1, static_cast<std::size_t>(static_cast<double>(ds.samples.size()) *
                                    o.holdout));
    const std::size_t n_train = ds.samples.size() - n_test;
    std::span<const dan::forecast_sample> train_set(ds.samples.data(), n_train);
    std::span<const dan::forecast_sample> test_set(
        ds.samples.data() + n_train, n_test);

    dan::model_config mc;
    mc.L = o.blocks;
    mc.K_t = o.kernel;
    mc.C_prime = o.hidden;
    mc.K_diff = o.diffusion;
    mc.H = ds.H;
    mc.T = ds.T;
    dan::ynet_model model(ds.N, ds.samples[0].seq.channels(), mc, o.seed);

    dan::train_config tc;
    tc.steps = o.steps;
    tc.batch = o.batch;
    tc.lr = o.lr;
    tc.seed = o.seed;
    auto result = dan::train(model, train_set, tc);

    const double model_mse = dan::evaluate_mse(model, test_set);
    const double base_mse = dan::persistence_mse(test_set);
    std::cout << "train sequences: " << n_train << "\n"
              << "test sequences: " << n_test << "\n"
              << "final train loss: " << dan::fmt_double(result.loss_curve.back())
              << "\n"
              << "test mse: " << dan::fmt_double(model_mse) << "\n"
              << "persistence mse: " << dan::fmt_double(base_mse) << "\n";

    std::ofstream ls(dir / "loss.csv", std::ios::trunc);
    ls << "step,loss\n";
    for (std::size_t i = 0; i < result.loss_curve.size(); ++i)
      ls << i << ',' << dan::fmt_double(result.loss_curve[i]) << "\n";
    std::ofstream ck(dir / "model.ckpt", std::ios::binary | std::ios::trunc);
    model.save(ck);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_gradcheck() {
  try {
    dan::model_config mc;
    mc.L = 2;
    mc.K_t = 2;
    mc.C_prime = 3;
    mc.K_diff = 1;
    mc.H = 2;
    mc.T = 6;
    dan::ynet_model model(4, 2, mc, 7);

    dan::rng stream = dan::substream(7, "gradcheck.input");
    dan::tensor v({6, 4, 2});
    for (auto& x : v.data) x = stream.uniform(-1.0, 1.0);
    dan::tensor a({6, 4, 4});
    for (auto& x : a.data) x = stream.uniform(0.5, 1.5);
    dan::tensor target({2, 4});
    for (auto& x : target.data) x = stream.uniform(0.0, 2.0);

    dan::graph g;
    auto run = [&](bool with_grad) {
      g.reset();
      auto pred = model.forward_node(g, g.input(v), g.input(a), false);
      auto diff = g.sub(pred, g.input(target));
      auto loss = g.mean(g.mul(diff, diff));
      if (with_grad) g.backward(loss);
      return g.value(loss)[0];
    };
    auto params = model.parameters();
    auto rep = dan::finite_difference_check(params, run, 1e-5);
    std::cout << "checked " << rep.coords_checked << " coordinates\n"
              << "max relative error: " << dan::fmt_double(rep.max_rel_error)
              << "\n";
    if (rep.max_rel_error < 1e-4) {
      std::cout << "gradcheck passed (threshold 1e-4)\n";
      return kExitOk;
    }
    std::cerr << "gradcheck failed (threshold 1e-4)\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_report(const std::string& dir) {
  try {
    std::ifstream is(fs::path(dir) / "metrics.csv");
    if (!is) throw dan::io_error("cannot open " + dir + "/metrics.csv");
    auto rep = dan::metrics_report::from_csv(is);
    if (rep.rows.empty()) {
      std::cout << "no epochs recorded\n";
      return kExitOk;
    }
    const auto& last = rep.rows.back();
    double gini_sum = 0.0, fin_sum = 0.0;
    std::size_t tx_total = 0;
    for (const auto& r : rep.rows) {
      gini_sum += r.gini_coeff;
      fin_sum += r.finalization_rate;
      tx_total += r.tx_count;
    }
    const double n = static_cast<double>(rep.rows.size());
    std::cout << "epochs: " << rep.rows.size() << "\n"
              << "chain height: " << last.chain_height << "\n"
              << "mean finalization rate: " << dan::fmt_double(fin_sum / n)
              << "\n"
              << "transactions: " << tx_total << "\n"
              << "final total supply: " << last.total_supply << "\n"
              << "mean gini: " << dan::fmt_double(gini_sum / n) << "\n"
              << "final entropy: " << dan::fmt_double(last.holdings_entropy)
              << "\n"
              << "last game class: " << last.game
              << (last.ponzi ? " (Ponzi-suspect)" : "") << "\n";
    if (last.forecast_valid)
      std::cout << "last forecast mse: " << dan::fmt_double(last.forecast_mse)
                << " vs persistence " << dan::fmt_double(last.baseline_mse)
                << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dan: deterministic autonomous-nation simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", dataset_dir, config_path,
              report_dir;
  std::uint64_t seed = 0;
  bool generate = false;

  auto* run = app.add_subcommand("run", "run a scenario and export artifacts");
  run->add_option("scenario", scenario_path, "scenario TOML file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "master seed (u64)");
  run->add_option("--out", out_dir, "output directory");

  auto* validate =
      app.add_subcommand("validate", "parse and validate a scenario file");
  validate->add_option("scenario", scenario_path, "scenario TOML file")
      ->required();

  auto* forecast =
      app.add_subcommand("forecast", "train the forecaster on a dataset");
  forecast->add_option("dataset", dataset_dir, "dataset directory")->required();
  forecast->add_option("--config", config_path, "training config TOML");
  forecast->add_flag("--generate", generate,
                     "generate a synthetic dataset first");

  app.add_subcommand("gradcheck",
                     "verify model gradients against finite differences");

  auto* report = app.add_subcommand("report", "summarize run metrics");
  report->add_option("dir", report_dir, "run output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand("run"))
    return cmd_run(scenario_path, seed, seed_opt->count() > 0, out_dir);
  if (app.got_subcommand("validate")) return cmd_validate(scenario_path);
  if (app.got_subcommand("forecast"))
    return cmd_forecast(dataset_dir, config_path, generate);
  if (app.got_subcommand("gradcheck")) return cmd_gradcheck();
  if (app.got_subcommand("report")) return cmd_report(report_dir);
  return kExitValidation;
}
