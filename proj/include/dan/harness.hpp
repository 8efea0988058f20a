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

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dan/common.hpp"
#include "dan/consensus.hpp"
#include "dan/econodynamics.hpp"
#include "dan/gating.hpp"
#include "dan/governance.hpp"
#include "dan/identity.hpp"
#include "dan/ledger.hpp"
#include "dan/log.hpp"
#include "dan/scenario.hpp"
#include "dan/ynet.hpp"

namespace dan {

class io_error : public error {
 public:
  using error::error;
};

// ---------------------------------------------------------------------------
// Per-epoch metrics.

struct epoch_row {
  std::size_t epoch = 0;
  tick_t tick = 0;
  std::uint64_t chain_height = 0;
  std::size_t blocks_finalized = 0;
  double finalization_rate = 0.0;
  std::size_t validator_count = 0;
  std::size_t tx_count = 0;
  std::size_t satisfied_count = 0;
  std::size_t active_citizens = 0;
  ydr_t total_supply = 0;
  ydr_t total_earned = 0;
  ydr_t total_spent = 0;
  ydr_t total_slashed = 0;
  ydr_t total_liquidated = 0;
  double gini_coeff = 0.0;
  double holdings_entropy = 0.0;
  double dh_formation = 0.0;
  double dh_atomization = 0.0;
  std::string game = "zero_sum";
  bool ponzi = true;
  double gov_weighted_mean = 0.0;
  bool gov_quorum = false;
  bool gov_passed = false;
  std::size_t gate_accepted = 0;
  std::size_t gate_rejected = 0;
  double gate_mean_p = 0.0;
  double gate_theta0 = 0.0;
  double gate_theta1 = 0.0;
  double gate_theta2 = 0.0;
  double gate_mean_outcome = 0.0;
  bool forecast_valid = false;
  double forecast_mse = 0.0;
  double baseline_mse = 0.0;
};

struct metrics_report {
  std::vector<epoch_row> rows;

  static const char* header() {
    return "epoch,tick,chain_height,blocks_finalized,finalization_rate,"
           "validator_count,tx_count,satisfied_count,active_citizens,"
           "total_supply,total_earned,total_spent,total_slashed,"
           "total_liquidated,gini,entropy,dh_formation,dh_atomization,game,"
           "ponzi_suspect,gov_weighted_mean,gov_quorum,gov_passed,"
           "gate_accepted,gate_rejected,gate_mean_p,gate_theta0,gate_theta1,"
           "gate_theta2,gate_mean_outcome,forecast_valid,"
           "forecast_mse,baseline_mse";
  }

  void to_csv(std::ostream& os) const {
    os << header() << "\n";
    for (const auto& r : rows) {
      os << r.epoch << ',' << r.tick << ',' << r.chain_height << ','
         << r.blocks_finalized << ',' << fmt_double(r.finalization_rate) << ','
         << r.validator_count << ',' << r.tx_count << ',' << r.satisfied_count
         << ',' << r.active_citizens << ',' << r.total_supply << ','
         << r.total_earned << ',' << r.total_spent << ',' << r.total_slashed
         << ',' << r.total_liquidated << ',' << fmt_double(r.gini_coeff) << ','
         << fmt_double(r.holdings_entropy) << ',' << fmt_double(r.dh_formation)
         << ',' << fmt_double(r.dh_atomization) << ',' << r.game << ','
         << (r.ponzi ? 1 : 0) << ',' << fmt_double(r.gov_weighted_mean) << ','
         << (r.gov_quorum ? 1 : 0) << ',' << (r.gov_passed ? 1 : 0) << ','
         << r.gate_accepted << ',' << r.gate_rejected << ','
         << fmt_double(r.gate_mean_p) << ',' << fmt_double(r.gate_theta0)
         << ',' << fmt_double(r.gate_theta1) << ',' << fmt_double(r.gate_theta2)
         << ',' << fmt_double(r.gate_mean_outcome) << ','
         << (r.forecast_valid ? 1 : 0)
         << ',' << fmt_double(r.forecast_mse) << ','
         << fmt_double(r.baseline_mse) << "\n";
    }
  }

  static metrics_report from_csv(std::istream& is) {
    metrics_report rep;
    std::string line;
    if (!std::getline(is, line)) throw io_error("empty metrics file");
    if (line != header()) throw io_error("unexpected metrics header");
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) f.push_back(cell);
      if (f.size() != 33) throw io_error("bad metrics row");
      epoch_row r;
      std::size_t i = 0;
      r.epoch = std::stoull(f[i++]);
      r.tick = std::stoll(f[i++]);
      r.chain_height = std::stoull(f[i++]);
      r.blocks_finalized = std::stoull(f[i++]);
      r.finalization_rate = std::stod(f[i++]);
      r.validator_count = std::stoull(f[i++]);
      r.tx_count = std::stoull(f[i++]);
      r.satisfied_count = std::stoull(f[i++]);
      r.active_citizens = std::stoull(f[i++]);
      r.total_supply = std::stoll(f[i++]);
      r.total_earned = std::stoll(f[i++]);
      r.total_spent = std::stoll(f[i++]);
      r.total_slashed = std::stoll(f[i++]);
      r.total_liquidated = std::stoll(f[i++]);
      r.gini_coeff = std::stod(f[i++]);
      r.holdings_entropy = std::stod(f[i++]);
      r.dh_formation = std::stod(f[i++]);
      r.dh_atomization = std::stod(f[i++]);
      r.game = f[i++];
      r.ponzi = f[i++] == "1";
      r.gov_weighted_mean = std::stod(f[i++]);
      r.gov_quorum = f[i++] == "1";
      r.gov_passed = f[i++] == "1";
      r.gate_accepted = std::stoull(f[i++]);
      r.gate_rejected = std::stoull(f[i++]);
      r.gate_mean_p = std::stod(f[i++]);
      r.gate_theta0 = std::stod(f[i++]);
      r.gate_theta1 = std::stod(f[i++]);
      r.gate_theta2 = std::stod(f[i++]);
      r.gate_mean_outcome = std::stod(f[i++]);
      r.forecast_valid = f[i++] == "1";
      r.forecast_mse = std::stod(f[i++]);
      r.baseline_mse = std::stod(f[i++]);
      rep.rows.push_back(std::move(r));
    }
    return rep;
  }
};

struct forecast_loss_row {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double loss = 0.0;
};

struct run_artifacts {
  metrics_report report;
  chain_trace trace;
  std::vector<std::string> events;  // JSONL lines, in emission order
  std::vector<forecast_loss_row> forecast_losses;
  std::string model_checkpoint;  // serialized ynet parameters; may be empty
  nlohmann::json registry_json;
  std::string ledger_csv;
};

// ---------------------------------------------------------------------------
// The event loop.

class simulation {
 public:
  explicit simulation(scenario sc)
      : sc_(std::move(sc)),
        ledger_(),
        registry_(ledger_),
        gate_(sc_.eta_short, sc_.eta_long) {
    sc_.validate();
  }

  run_artifacts run() {
    setup();
    const std::size_t n_epochs =
        static_cast<std::size_t>(sc_.duration / sc_.epoch_ticks);
    for (tick_t t = 0; t < sc_.duration; ++t) {
      stage(t, "interaction", [&] { tick_interactions(t); });
      stage(t, "gating", [&] { tick_gating(t); });
      stage(t, "consensus", [&] { tick_consensus(t); });
      if ((t + 1) % sc_.snapshot_every == 0)
        stage(t, "snapshot", [&] { close_snapshot(); });
      if ((t + 1) % sc_.epoch_ticks == 0 &&
          artifacts_.report.rows.size() < n_epochs)
        stage(t, "epoch", [&] { close_epoch(t); });
    }
    finish();
    return std::move(artifacts_);
  }

 private:
  struct citizen {
    std::uint64_t token = 0;
    address addr;
    std::size_t community = 0;
  };

  template <typename F>
  void stage(tick_t t, const char* name, F&& body) {
    try {
      body();
    } catch (const error& e) {
      throw error("tick " + std::to_string(t) + " [" + name + "]: " + e.what());
    }
  }

  bool is_active(std::size_t i) const {
    return registry_.token(citizens_[i].token).state == token_state::active;
  }

  void setup() {
    rng id_stream = substream(sc_.seed, "identity");
    for (std::size_t i = 0; i < sc_.citizens; ++i) {
      profile p;
      p.tolerance = id_stream.next_unit();
      p.credibility = id_stream.next_unit();
      p.maturity = id_stream.next_unit();
      p.autonomy = id_stream.next_unit();
      p.emotional_state = id_stream.next_unit();
      p.worthiness = id_stream.next_unit();
      p.w_range = id_stream.next_unit();
      p.age = static_cast<int>(18 + id_stream.uniform_int(63));
      p.gender_id = static_cast<gender>(id_stream.uniform_int(4));
      p.ambition_id = static_cast<ambition>(id_stream.uniform_int(3));
      p.job = static_cast<job_level>(id_stream.uniform_int(4));
      p.education = static_cast<education_level>(id_stream.uniform_int(5));
      face_vector f;
      for (auto& v : f.values) v = id_stream.normal();
      const auto& tok = registry_.mint(p, f, 0);
      ydr_t amount = sc_.initial_balance;
      if (sc_.initial_spread > 0)
        amount += id_stream.uniform_i64(-sc_.initial_spread, sc_.initial_spread);
      if (amount > 0) ledger_.earn(tok.owner, amount, "genesis", 0);
      citizens_.push_back({tok.id, tok.owner, i % sc_.communities});
    }

    fault_plan faults;
    for (std::size_t idx : sc_.equivocators)
      faults.equivocators.insert(citizens_[idx].addr);
    for (std::size_t idx : sc_.invalid_proposers)
      faults.invalid_proposers.insert(citizens_[idx].addr);

    network_config net = sc_.net;
    net.seed = sc_.seed;
    std::vector<address> candidates;
    for (const auto& c : citizens_) candidates.push_back(c.addr);
    engine_ = std::make_unique<consensus_engine>(
        ledger_, [candidates]() { return candidates; }, net, sc_.consensus,
        std::move(faults));
    engine_->start(0);
    if (engine_->validators().below_recommended_size())
      log_warn("validator set below the recommended size of 23 (" +
               std::to_string(engine_->validators().size()) + ")");

    inter_stream_ = std::make_unique<rng>(substream(sc_.seed, "interaction"));
    gov_stream_ = std::make_unique<rng>(substream(sc_.seed, "governance"));
    gate_stream_ = std::make_unique<rng>(substream(sc_.seed, "gating"));

    const std::size_t n = sc_.citizens;
    adj_window_.assign(n * n, 0.0);
    fee_window_.assign(n, 0.0);
    epoch_pair_count_.assign(n * n, 0);
    epoch_balance_base_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      epoch_balance_base_[i] = ledger_.balance(citizens_[i].addr);
  }

  void tick_interactions(tick_t t) {
    const std::size_t n = sc_.citizens;
    const std::uint64_t k = inter_stream_->poisson(sc_.tx_rate);
    for (std::uint64_t m = 0; m < k; ++m) {
      const std::size_t i = inter_stream_->uniform_int(n);
      // Counterparty draw weighted by community bonds; burned rows get 0.
      double total = 0.0;
      weights_.assign(n, 0.0);
      if (!is_active(i)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || !is_active(j)) continue;
        weights_[j] = citizens_[i].community == citizens_[j].community
                          ? sc_.bond_intra
                          : sc_.bond_inter;
        total += weights_[j];
      }
      if (total <= 0.0) continue;
      double x = inter_stream_->next_unit() * total;
      std::size_t j = 0;
      for (; j < n; ++j) {
        x -= weights_[j];
        if (x < 0.0 && weights_[j] > 0.0) break;
      }
      if (j >= n) {
        for (j = n; j-- > 0;)
          if (weights_[j] > 0.0) break;
      }

      if (sc_.fee > 0) {
        if (ledger_.balance(citizens_[i].addr) < sc_.fee) continue;
        ledger_.spend(citizens_[i].addr, sc_.fee, "fee", t);
      }
      const bool satisfied =
          inter_stream_->bernoulli(sc_.satisfaction_probability);
      if (satisfied && sc_.reward_satisfied > 0)
        ledger_.earn(citizens_[j].addr, sc_.reward_satisfied, "satisfied", t);

      adj_window_[i * n + j] += 1.0;
      fee_window_[i] += static_cast<double>(sc_.fee);
      epoch_pair_count_[i * n + j] += 1;
      ++epoch_tx_;
      if (satisfied) ++epoch_satisfied_;
      engine_->add_pending_tx(++tx_counter_);

      artifacts_.events.push_back(
          "{\"tick\":" + std::to_string(t) + ",\"type\":\"tx\",\"from\":\"" +
          citizens_[i].addr + "\",\"to\":\"" + citizens_[j].addr +
          "\",\"fee\":" + std::to_string(sc_.fee) +
          ",\"satisfied\":" + (satisfied ? "true" : "false") +
          ",\"reward\":" + std::to_string(satisfied ? sc_.reward_satisfied : 0) +
          "}");
    }
  }

  void tick_gating(tick_t t) {
    if (!sc_.gating_enabled) return;
    const std::uint64_t k = gate_stream_->poisson(sc_.applicant_rate);
    for (std::uint64_t m = 0; m < k; ++m) {
      gate_signal s;
      s.performance_score = gate_stream_->next_unit();
      s.timing = 0.5 + 1.5 * gate_stream_->next_unit();
      const gate_decision d = gate_.decide(s, *gate_stream_);
      // Ground truth: an applicant is worthwhile with probability equal to
      // its performance score.
      const bool good = gate_stream_->bernoulli(s.performance_score);
      const double outcome = d.accepted ? (good ? 1.0 : -1.0) : 0.0;
      gate_.short_loop_update(s, d.accepted, outcome);
      if (d.accepted) {
        ++epoch_gate_accepted_;
        epoch_gate_outcome_ += outcome;
      } else {
        ++epoch_gate_rejected_;
      }
      epoch_gate_p_sum_ += d.probability;
      artifacts_.events.push_back(
          "{\"tick\":" + std::to_string(t) + ",\"type\":\"gate\",\"score\":" +
          fmt_double(s.performance_score) + ",\"timing\":" +
          fmt_double(s.timing) + ",\"p\":" + fmt_double(d.probability) +
          ",\"accepted\":" + (d.accepted ? "true" : "false") + "}");
    }
  }

  void tick_consensus(tick_t t) {
    auto finalized = engine_->step(t);
    epoch_blocks_ += finalized.size();
    if (engine_->stalled())
      throw stalled_chain_error("consensus stalled; no sealer could finalize");
  }

  void close_snapshot() {
    snap_fees_.push_back(fee_window_);
    snap_adj_.push_back(adj_window_);
    const std::size_t n = sc_.citizens;
    std::fill(fee_window_.begin(), fee_window_.end(), 0.0);
    std::fill(adj_window_.begin(), adj_window_.end(), 0.0);
    (void)n;
  }

  void close_epoch(tick_t t) {
    const std::size_t n = sc_.citizens;
    const std::size_t epoch = artifacts_.report.rows.size();
    epoch_row row;
    row.epoch = epoch;
    row.tick = t;
    row.chain_height = engine_->chain().head().height;
    row.blocks_finalized = epoch_blocks_;
    const std::size_t rounds = engine_->proposal_rounds() - last_rounds_;
    row.finalization_rate =
        rounds == 0 ? 0.0
                    : static_cast<double>(epoch_blocks_) /
                          static_cast<double>(rounds);
    row.validator_count = engine_->validators().size();
    row.tx_count = epoch_tx_;
    row.satisfied_count = epoch_satisfied_;
    row.active_citizens = registry_.active_count();

    row.total_supply = ledger_.total_supply();
    row.total_earned = ledger_.total_earned();
    row.total_spent = ledger_.total_spent();
    row.total_slashed = ledger_.total_slashed();
    row.total_liquidated = ledger_.total_liquidated();

    std::vector<double> balances;
    std::vector<double> payoffs;
    for (std::size_t i = 0; i < n; ++i) {
      const ydr_t b = ledger_.balance(citizens_[i].addr);
      if (is_active(i)) balances.push_back(static_cast<double>(b));
      payoffs.push_back(static_cast<double>(b - epoch_balance_base_[i]));
      epoch_balance_base_[i] = b;
    }
    row.gini_coeff = gini(balances);
    row.holdings_entropy = entropy_of_balances(balances);

    row.dh_formation =
        sc_.enthalpy_satisfied * static_cast<double>(epoch_satisfied_);
    std::vector<community_bond> bonds;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (epoch_pair_count_[i * n + j] > 0)
          bonds.push_back({citizens_[i].addr, citizens_[j].addr,
                           sc_.enthalpy_satisfied *
                               static_cast<double>(epoch_pair_count_[i * n + j])});
    row.dh_atomization = enthalpy_of_atomization(bonds);

    const game_class g = classify_game(payoffs);
    row.game = to_string(g);
    row.ponzi = ponzi_suspect(g);

    // Governance: one proposal per epoch, votes weighted by YDR balances.
    std::vector<vote> votes;
    double total_weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_active(i)) continue;
      const double w = static_cast<double>(ledger_.balance(citizens_[i].addr));
      total_weight += w;
      const bool participates = gov_stream_->bernoulli(sc_.participation);
      const double v = std::min(
          1.0, std::max(0.0, sc_.approval_mean +
                                 gov_stream_->uniform(-sc_.approval_spread,
                                                      sc_.approval_spread)));
      if (participates && w > 0.0)
        votes.push_back({citizens_[i].addr, v, w});
    }
    if (!votes.empty()) {
      tally_config tc{sc_.quorum_fraction, sc_.pass_threshold};
      auto d = tally("epoch-" + std::to_string(epoch), votes, total_weight, t,
                     nullptr, tc);
      row.gov_weighted_mean = d.weighted_mean;
      row.gov_quorum = d.quorum_met;
      row.gov_passed = d.passed;
      artifacts_.events.push_back(
          "{\"tick\":" + std::to_string(t) +
          ",\"type\":\"governance\",\"proposal\":\"" + d.proposal_id +
          "\",\"weighted_mean\":" + fmt_double(d.weighted_mean) +
          ",\"quorum\":" + (d.quorum_met ? "true" : "false") +
          ",\"passed\":" + (d.passed ? "true" : "false") + "}");
    }

    // Gating long loop: retrospective signal is the epoch's mean outcome of
    // accepted requests.
    if (sc_.gating_enabled) {
      const std::size_t decisions = epoch_gate_accepted_ + epoch_gate_rejected_;
      const double retro =
          epoch_gate_accepted_ > 0
              ? epoch_gate_outcome_ / static_cast<double>(epoch_gate_accepted_)
              : 0.0;
      gate_.long_loop_update(retro);
      row.gate_accepted = epoch_gate_accepted_;
      row.gate_rejected = epoch_gate_rejected_;
      row.gate_mean_p =
          decisions > 0 ? epoch_gate_p_sum_ / static_cast<double>(decisions)
                        : 0.0;
      row.gate_theta0 = gate_.theta()[0];
      row.gate_theta1 = gate_.theta()[1];
      row.gate_theta2 = gate_.theta()[2];
      row.gate_mean_outcome =
          decisions > 0 ? epoch_gate_outcome_ / static_cast<double>(decisions)
                        : 0.0;
    }

    // Epoch summary: cumulative seal counts and the active balance histogram
    // (ten equal-width bins over [min, max]).
    {
      std::string line = "{\"tick\":" + std::to_string(t) +
                         ",\"type\":\"epoch\",\"epoch\":" +
                         std::to_string(epoch) + ",\"seal_counts\":{";
      bool first = true;
      for (const auto& [addr, c] : engine_->trace().seal_counts()) {
        if (!first) line += ',';
        line += "\"" + addr + "\":" + std::to_string(c);
        first = false;
      }
      line += "},\"balance_histogram\":[";
      std::array<std::size_t, 10> hist{};
      if (!balances.empty()) {
        const auto [lo_it, hi_it] =
            std::minmax_element(balances.begin(), balances.end());
        const double lo = *lo_it, span = *hi_it - *lo_it;
        for (double b : balances) {
          std::size_t bin =
              span > 0.0 ? static_cast<std::size_t>((b - lo) / span * 10.0) : 0;
          ++hist[std::min<std::size_t>(bin, 9)];
        }
      }
      for (std::size_t b = 0; b < hist.size(); ++b) {
        if (b) line += ',';
        line += std::to_string(hist[b]);
      }
      line += "]}";
      artifacts_.events.push_back(std::move(line));
    }

    if (sc_.forecaster_enabled) retrain_forecaster(epoch, row);

    artifacts_.report.rows.push_back(std::move(row));

    epoch_blocks_ = 0;
    epoch_tx_ = 0;
    epoch_satisfied_ = 0;
    epoch_gate_accepted_ = 0;
    epoch_gate_rejected_ = 0;
    epoch_gate_p_sum_ = 0.0;
    epoch_gate_outcome_ = 0.0;
    last_rounds_ = engine_->proposal_rounds();
    std::fill(epoch_pair_count_.begin(), epoch_pair_count_.end(), 0);
  }

  /// Builds sliding (T history, H target) windows over the accumulated
  /// snapshots and fits the model a little further each epoch (warm start).
  void retrain_forecaster(std::size_t epoch, epoch_row& row) {
    const std::size_t n = sc_.citizens;
    const std::size_t T = sc_.history, H = sc_.horizon;
    if (snap_fees_.size() < T + H) return;

    std::vector<forecast_sample> samples;
    const std::size_t max_windows = 64;
    const std::size_t first =
        snap_fees_.size() - T - H >= max_windows
            ? snap_fees_.size() - T - H + 1 - max_windows
            : 0;
    for (std::size_t k = first; k + T + H <= snap_fees_.size(); ++k) {
      forecast_sample s;
      s.seq.V = tensor({T, n, 2});
      s.seq.A = tensor({T, n, n});
      s.seq.delta = sc_.snapshot_every;
      s.seq.t0 = static_cast<tick_t>(k) * sc_.snapshot_every;
      for (std::size_t tt = 0; tt < T; ++tt) {
        const auto& fees = snap_fees_[k + tt];
        const auto& adj = snap_adj_[k + tt];
        for (std::size_t i = 0; i < n; ++i) {
          s.seq.V.at({tt, i, 0}) = fees[i];
          double strength = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            s.seq.A.at({tt, i, j}) = adj[i * n + j];
            strength += adj[i * n + j];
          }
          s.seq.V.at({tt, i, 1}) = strength / static_cast<double>(n);
        }
      }
      s.target = tensor({H, n});
      for (std::size_t hh = 0; hh < H; ++hh)
        for (std::size_t i = 0; i < n; ++i)
          s.target.at({hh, i}) = snap_fees_[k + T + hh][i];
      samples.push_back(std::move(s));
    }
    if (samples.empty()) return;

    if (!model_) {
      model_config mc;
      mc.L = sc_.st_blocks;
      mc.K_t = sc_.kernel;
      mc.C_prime = sc_.hidden;
      mc.K_diff = sc_.diffusion;
      mc.H = H;
      mc.T = T;
      model_ = std::make_unique<ynet_model>(n, 2, mc, sc_.seed);
    }
    train_config tc;
    tc.steps = sc_.train_steps;
    tc.batch = sc_.train_batch;
    tc.lr = sc_.learning_rate;
    tc.seed = splitmix64(sc_.seed ^ fnv1a64_u64(epoch));
    auto result = train(*model_, samples, tc);
    for (std::size_t s = 0; s < result.loss_curve.size(); ++s)
      artifacts_.forecast_losses.push_back({epoch, s, result.loss_curve[s]});

    const auto& last = samples.back();
    row.forecast_valid = true;
    row.forecast_mse = mse_loss(model_->forward(last.seq), last.target);
    row.baseline_mse =
        mse_loss(persistence_baseline(last.seq, H), last.target);
  }

  void finish() {
    artifacts_.trace = std::move(engine_->trace());
    artifacts_.registry_json = registry_.to_json();
    std::ostringstream ledger_csv;
    ledger_.export_csv(ledger_csv);
    artifacts_.ledger_csv = ledger_csv.str();
    if (model_) {
      std::ostringstream ckpt(std::ios::binary);
      model_->save(ckpt);
      artifacts_.model_checkpoint = ckpt.str();
    }
  }

  scenario sc_;
  reputation_ledger ledger_;
  identity_registry registry_;
  gate_agent gate_;
  std::vector<citizen> citizens_;
  std::unique_ptr<consensus_engine> engine_;
  std::unique_ptr<rng> inter_stream_, gov_stream_, gate_stream_;
  std::unique_ptr<ynet_model> model_;

  run_artifacts artifacts_;
  std::vector<double> adj_window_, fee_window_, weights_;
  std::vector<std::vector<double>> snap_fees_, snap_adj_;
  std::vector<std::size_t> epoch_pair_count_;
  std::vector<ydr_t> epoch_balance_base_;
  std::size_t epoch_blocks_ = 0, epoch_tx_ = 0, epoch_satisfied_ = 0;
  std::size_t epoch_gate_accepted_ = 0, epoch_gate_rejected_ = 0;
  double epoch_gate_p_sum_ = 0.0, epoch_gate_outcome_ = 0.0;
  std::size_t last_rounds_ = 0;
  std::uint64_t tx_counter_ = 0;
};

inline run_artifacts run_scenario(const scenario& sc) {
  simulation sim(sc);
  return sim.run();
}

// ---------------------------------------------------------------------------
// Export. Stable filenames, deterministic bytes.

inline void export_artifacts(const run_artifacts& a, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create " + dir + ": " + ec.message());

  auto open = [&](const char* name, std::ios::openmode extra =
                                        std::ios::openmode{}) {
    std::ofstream os(fs::path(dir) / name, std::ios::trunc | extra);
    if (!os) throw io_error(std::string("cannot write ") + name);
    return os;
  };

  {
    auto os = open("metrics.csv");
    a.report.to_csv(os);
  }
  {
    auto os = open("trace.jsonl");
    a.trace.export_jsonl(os);
  }
  {
    auto os = open("events.jsonl");
    for (const auto& line : a.events) os << line << "\n";
  }
  {
    auto os = open("forecast_loss.csv");
    os << "epoch,step,loss\n";
    for (const auto& r : a.forecast_losses)
      os << r.epoch << ',' << r.step << ',' << fmt_double(r.loss) << "\n";
  }
  {
    auto os = open("ledger.csv");
    os << a.ledger_csv;
  }
  {
    auto os = open("registry.json");
    os << a.registry_json.dump(2) << "\n";
  }
  if (!a.model_checkpoint.empty()) {
    auto os = open("model.ckpt", std::ios::binary);
    os.write(a.model_checkpoint.data(),
             static_cast<std::streamsize>(a.model_checkpoint.size()));
  }
}

}  // namespace dan
