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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dan/common.hpp"
#include "dan/consensus.hpp"
#include "dan/toml.hpp"

namespace dan {

class validation_error : public error {
 public:
  using error::error;
};

/// Full description of one reproducible run. Every field has a default; a
/// scenario file may set any subset and must not contain unknown keys.
struct scenario {
  std::string name = "scenario";

  // [population]
  std::size_t citizens = 40;
  ydr_t initial_balance = 1'200'000;
  ydr_t initial_spread = 0;  // uniform jitter, +- around initial_balance
  std::size_t communities = 2;

  // [time]
  tick_t duration = 2000;
  tick_t epoch_ticks = 200;
  tick_t snapshot_every = 10;  // graph-sequence granularity (delta)

  // [network]
  network_config net;

  // [consensus]
  consensus_config consensus;

  // [interaction]
  double tx_rate = 3.0;  // Poisson mean transactions per tick
  double satisfaction_probability = 0.9;
  ydr_t fee = 2;               // spent by the initiator
  ydr_t reward_satisfied = 3;  // minted to the counterparty when satisfied
  double bond_intra = 1.0;     // pair-selection weight inside a community
  double bond_inter = 0.1;     // and across communities

  // [governance]
  double participation = 0.8;
  double approval_mean = 0.6;
  double approval_spread = 0.2;
  double quorum_fraction = 0.25;
  double pass_threshold = 0.5;

  // [gating]
  bool gating_enabled = true;
  double applicant_rate = 0.2;  // Poisson mean applicants per tick
  double eta_short = 0.05;
  double eta_long = 0.01;

  // [econ]
  double enthalpy_satisfied = 1.5;  // formation enthalpy per satisfied tx

  // [forecaster]
  bool forecaster_enabled = true;
  std::size_t history = 12;   // T, in snapshots
  std::size_t horizon = 3;    // H
  std::size_t hidden = 6;     // C'
  std::size_t st_blocks = 2;  // L
  std::size_t kernel = 2;     // K_t
  std::size_t diffusion = 1;  // K_diff
  std::size_t train_steps = 40;
  std::size_t train_batch = 8;
  double learning_rate = 0.01;

  // [faults] citizen indices (0-based) that misbehave when sealing
  std::vector<std::size_t> equivocators;
  std::vector<std::size_t> invalid_proposers;

  std::uint64_t seed = 0;

  void validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
      throw validation_error(field + ": " + why);
    };
    if (citizens < 1) fail("population.citizens", "must be positive");
    if (initial_balance < 0) fail("population.initial_balance", "must be >= 0");
    if (initial_spread < 0 || initial_spread > initial_balance)
      fail("population.initial_spread", "must be in [0, initial_balance]");
    if (communities < 1 || communities > citizens)
      fail("population.communities", "must be in [1, citizens]");
    if (duration < 1) fail("time.duration", "must be positive");
    if (epoch_ticks < 1 || epoch_ticks > duration)
      fail("time.epoch_ticks", "must be in [1, duration]");
    if (snapshot_every < 1 || snapshot_every > duration)
      fail("time.snapshot_every", "must be in [1, duration]");
    if (net.latency_min < 0 || net.latency_max < net.latency_min)
      fail("network.latency", "need 0 <= latency_min <= latency_max");
    if (net.drop_probability < 0.0 || net.drop_probability > 1.0)
      fail("network.drop_probability", "must be in [0, 1]");
    if (consensus.reward_seal < 0) fail("consensus.reward_seal", "must be >= 0");
    if (consensus.slash_amount < 0)
      fail("consensus.slash_amount", "must be >= 0");
    if (consensus.epoch_blocks < 1)
      fail("consensus.epoch_blocks", "must be positive");
    if (consensus.block_interval < 0)
      fail("consensus.block_interval", "must be >= 0");
    if (consensus.round_timeout < 1)
      fail("consensus.round_timeout", "must be positive");
    if (consensus.max_attempts < 1)
      fail("consensus.max_attempts", "must be positive");
    if (tx_rate < 0.0) fail("interaction.tx_rate", "must be >= 0");
    if (satisfaction_probability < 0.0 || satisfaction_probability > 1.0)
      fail("interaction.satisfaction_probability", "must be in [0, 1]");
    if (fee < 0) fail("interaction.fee", "must be >= 0");
    if (reward_satisfied < 0)
      fail("interaction.reward_satisfied", "must be >= 0");
    if (bond_intra < 0.0) fail("interaction.bond_intra", "must be >= 0");
    if (bond_inter < 0.0) fail("interaction.bond_inter", "must be >= 0");
    if (bond_intra + bond_inter <= 0.0)
      fail("interaction.bond_intra", "bond weights cannot both be zero");
    if (participation < 0.0 || participation > 1.0)
      fail("governance.participation", "must be in [0, 1]");
    if (approval_mean < 0.0 || approval_mean > 1.0)
      fail("governance.approval_mean", "must be in [0, 1]");
    if (approval_spread < 0.0 || approval_spread > 0.5)
      fail("governance.approval_spread", "must be in [0, 0.5]");
    if (quorum_fraction < 0.0 || quorum_fraction > 1.0)
      fail("governance.quorum_fraction", "must be in [0, 1]");
    if (pass_threshold < 0.0 || pass_threshold > 1.0)
      fail("governance.pass_threshold", "must be in [0, 1]");
    if (applicant_rate < 0.0) fail("gating.applicant_rate", "must be >= 0");
    if (eta_short < 0.0) fail("gating.eta_short", "must be >= 0");
    if (eta_long < 0.0) fail("gating.eta_long", "must be >= 0");
    if (forecaster_enabled) {
      if (history < 1) fail("forecaster.history", "must be positive");
      if (horizon < 1) fail("forecaster.horizon", "must be positive");
      if (hidden < 1) fail("forecaster.hidden", "must be positive");
      if (st_blocks < 1) fail("forecaster.st_blocks", "must be positive");
      if (kernel < 1) fail("forecaster.kernel", "must be positive");
      if (train_batch < 1) fail("forecaster.train_batch", "must be positive");
      if (learning_rate <= 0.0)
        fail("forecaster.learning_rate", "must be positive");
    }
    for (std::size_t idx : equivocators)
      if (idx >= citizens) fail("faults.equivocators", "index out of range");
    for (std::size_t idx : invalid_proposers)
      if (idx >= citizens) fail("faults.invalid_proposers", "index out of range");
  }
};

inline scenario scenario_from_table(const toml::table& t) {
  scenario sc;
  auto sz = [](std::int64_t v, const char* field) {
    if (v < 0) throw validation_error(std::string(field) + ": must be >= 0");
    return static_cast<std::size_t>(v);
  };

  sc.name = t.get_string("name", sc.name);
  sc.seed = static_cast<std::uint64_t>(t.get_int("seed", 0));

  sc.citizens = sz(t.get_int("population.citizens",
                             static_cast<std::int64_t>(sc.citizens)),
                   "population.citizens");
  sc.initial_balance =
      t.get_int("population.initial_balance", sc.initial_balance);
  sc.initial_spread = t.get_int("population.initial_spread", sc.initial_spread);
  sc.communities = sz(t.get_int("population.communities",
                                static_cast<std::int64_t>(sc.communities)),
                      "population.communities");

  sc.duration = t.get_int("time.duration", sc.duration);
  sc.epoch_ticks = t.get_int("time.epoch_ticks", sc.epoch_ticks);
  sc.snapshot_every = t.get_int("time.snapshot_every", sc.snapshot_every);

  sc.net.latency_min = t.get_int("network.latency_min", sc.net.latency_min);
  sc.net.latency_max = t.get_int("network.latency_max", sc.net.latency_max);
  sc.net.drop_probability =
      t.get_double("network.drop_probability", sc.net.drop_probability);

  sc.consensus.reward_seal =
      t.get_int("consensus.reward_seal", sc.consensus.reward_seal);
  sc.consensus.slash_amount =
      t.get_int("consensus.slash_amount", sc.consensus.slash_amount);
  sc.consensus.epoch_blocks = static_cast<int>(
      t.get_int("consensus.epoch_blocks", sc.consensus.epoch_blocks));
  sc.consensus.block_interval =
      t.get_int("consensus.block_interval", sc.consensus.block_interval);
  sc.consensus.round_timeout =
      t.get_int("consensus.round_timeout", sc.consensus.round_timeout);
  sc.consensus.max_attempts = static_cast<int>(
      t.get_int("consensus.max_attempts", sc.consensus.max_attempts));

  sc.tx_rate = t.get_double("interaction.tx_rate", sc.tx_rate);
  sc.satisfaction_probability = t.get_double(
      "interaction.satisfaction_probability", sc.satisfaction_probability);
  sc.fee = t.get_int("interaction.fee", sc.fee);
  sc.reward_satisfied =
      t.get_int("interaction.reward_satisfied", sc.reward_satisfied);
  sc.bond_intra = t.get_double("interaction.bond_intra", sc.bond_intra);
  sc.bond_inter = t.get_double("interaction.bond_inter", sc.bond_inter);

  sc.participation = t.get_double("governance.participation", sc.participation);
  sc.approval_mean = t.get_double("governance.approval_mean", sc.approval_mean);
  sc.approval_spread =
      t.get_double("governance.approval_spread", sc.approval_spread);
  sc.quorum_fraction =
      t.get_double("governance.quorum_fraction", sc.quorum_fraction);
  sc.pass_threshold =
      t.get_double("governance.pass_threshold", sc.pass_threshold);

  sc.gating_enabled = t.get_bool("gating.enabled", sc.gating_enabled);
  sc.applicant_rate = t.get_double("gating.applicant_rate", sc.applicant_rate);
  sc.eta_short = t.get_double("gating.eta_short", sc.eta_short);
  sc.eta_long = t.get_double("gating.eta_long", sc.eta_long);

  sc.enthalpy_satisfied =
      t.get_double("econ.enthalpy_satisfied", sc.enthalpy_satisfied);

  sc.forecaster_enabled =
      t.get_bool("forecaster.enabled", sc.forecaster_enabled);
  sc.history = sz(t.get_int("forecaster.history",
                            static_cast<std::int64_t>(sc.history)),
                  "forecaster.history");
  sc.horizon = sz(t.get_int("forecaster.horizon",
                            static_cast<std::int64_t>(sc.horizon)),
                  "forecaster.horizon");
  sc.hidden = sz(t.get_int("forecaster.hidden",
                           static_cast<std::int64_t>(sc.hidden)),
                 "forecaster.hidden");
  sc.st_blocks = sz(t.get_int("forecaster.st_blocks",
                              static_cast<std::int64_t>(sc.st_blocks)),
                    "forecaster.st_blocks");
  sc.kernel = sz(t.get_int("forecaster.kernel",
                           static_cast<std::int64_t>(sc.kernel)),
                 "forecaster.kernel");
  sc.diffusion = sz(t.get_int("forecaster.diffusion",
                              static_cast<std::int64_t>(sc.diffusion)),
                    "forecaster.diffusion");
  sc.train_steps = sz(t.get_int("forecaster.train_steps",
                                static_cast<std::int64_t>(sc.train_steps)),
                      "forecaster.train_steps");
  sc.train_batch = sz(t.get_int("forecaster.train_batch",
                                static_cast<std::int64_t>(sc.train_batch)),
                      "forecaster.train_batch");
  sc.learning_rate =
      t.get_double("forecaster.learning_rate", sc.learning_rate);

  for (std::int64_t v : t.get_int_array("faults.equivocators"))
    sc.equivocators.push_back(sz(v, "faults.equivocators"));
  for (std::int64_t v : t.get_int_array("faults.invalid_proposers"))
    sc.invalid_proposers.push_back(sz(v, "faults.invalid_proposers"));

  auto leftovers = t.untouched();
  if (!leftovers.empty())
    throw validation_error("unknown key: " + leftovers.front());
  sc.validate();
  return sc;
}

inline scenario load_scenario(const std::string& path) {
  return scenario_from_table(toml::table::parse_file(path));
}

}  // namespace dan
