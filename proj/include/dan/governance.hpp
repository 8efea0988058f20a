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

#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dan/common.hpp"

namespace dan {

class empty_vote_set_error : public error {
 public:
  using error::error;
};
class all_weights_zero_error : public error {
 public:
  using error::error;
};
class duplicate_voter_error : public error {
 public:
  using error::error;
};
class ineligible_voter_error : public error {
 public:
  using error::error;
};

/// A single cast vote: value in [0,1] (binary proposals use 0/1), weight is
/// the voter's YDR balance snapshotted at tally time.
struct vote {
  address voter;
  double value = 0.0;
  double weight = 0.0;
};

struct governance_decision {
  std::string proposal_id;
  double weighted_mean = 0.0;
  bool passed = false;
  bool quorum_met = false;
  tick_t tick = 0;
};

/// Reputation-weighted arithmetic mean: sum(w_i * x_i) / sum(w_i).
/// Higher-reputation voters contribute proportionally more; the result lies
/// in [min x_i, max x_i].
inline double weighted_mean(std::span<const vote> votes) {
  if (votes.empty()) throw empty_vote_set_error("no votes");
  double num = 0.0, den = 0.0;
  for (const auto& v : votes) {
    num += v.weight * v.value;
    den += v.weight;
  }
  if (den == 0.0) throw all_weights_zero_error("all vote weights are zero");
  return num / den;
}

struct tally_config {
  double quorum_fraction = 0.25;  // participating weight / total active weight
  double pass_threshold = 0.5;    // strict: W must exceed this
};

/// Decides a proposal. `is_eligible` must hold for every voter (active,
/// non-frozen token holder); each voter may appear at most once. Quorum is
/// met when participating weight reaches quorum_fraction of
/// total_active_weight; the proposal passes when quorum is met and the
/// weighted mean strictly exceeds pass_threshold.
inline governance_decision tally(
    const std::string& proposal_id, std::span<const vote> votes,
    double total_active_weight, tick_t tick,
    const std::function<bool(const address&)>& is_eligible = nullptr,
    const tally_config& cfg = {}) {
  std::set<address> seen;
  double participating = 0.0;
  for (const auto& v : votes) {
    if (!seen.insert(v.voter).second)
      throw duplicate_voter_error("duplicate voter " + v.voter);
    if (is_eligible && !is_eligible(v.voter))
      throw ineligible_voter_error("ineligible voter " + v.voter);
    participating += v.weight;
  }
  governance_decision d;
  d.proposal_id = proposal_id;
  d.tick = tick;
  d.weighted_mean = weighted_mean(votes);
  d.quorum_met = participating >= cfg.quorum_fraction * total_active_weight;
  d.passed = d.quorum_met && d.weighted_mean > cfg.pass_threshold;
  return d;
}

}  // namespace dan
