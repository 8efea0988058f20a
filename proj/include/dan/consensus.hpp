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
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dan/common.hpp"
#include "dan/ledger.hpp"

namespace dan {

class no_eligible_sealer_error : public error {
 public:
  using error::error;
};
class empty_head_set_error : public error {
 public:
  using error::error;
};
class stalled_chain_error : public error {
 public:
  using error::error;
};

// ---------------------------------------------------------------------------
// Blocks and chain state.

struct block {
  std::uint64_t height = 0;
  std::uint64_t parent_id = 0;
  address sealer;  // empty for genesis
  std::vector<std::uint64_t> tx_ids;
  tick_t tick = 0;
  std::uint64_t id = 0;  // content hash, excluding itself
};

/// Deterministic 64-bit content hash. Simulation fidelity, not security.
inline std::uint64_t compute_block_id(const block& b) {
  std::uint64_t h = fnv1a64_u64(b.height);
  h = fnv1a64_u64(b.parent_id, h);
  h = fnv1a64(b.sealer, h);
  for (std::uint64_t tx : b.tx_ids) h = fnv1a64_u64(tx, h);
  h = fnv1a64_u64(static_cast<std::uint64_t>(b.tick), h);
  return h;
}

inline block make_genesis() {
  block g;
  g.height = 0;
  g.parent_id = 0;
  g.tick = 0;
  g.id = compute_block_id(g);
  return g;
}

class chain_state {
 public:
  chain_state() {
    block g = make_genesis();
    head_ = g.id;
    blocks_.emplace(g.id, std::move(g));
  }

  bool contains(std::uint64_t id) const { return blocks_.count(id) != 0; }

  const block& at(std::uint64_t id) const {
    auto it = blocks_.find(id);
    if (it == blocks_.end())
      throw error("unknown block " + hex16(id));
    return it->second;
  }

  const block& head() const { return at(head_); }
  const block& genesis() const {
    for (const auto& [id, b] : blocks_)
      if (b.height == 0) return b;
    throw error("no genesis");
  }

  /// Appends a finalized block extending the head.
  void append(const block& b) {
    blocks_.emplace(b.id, b);
    if (b.height > at(head_).height) head_ = b.id;
  }

  std::size_t size() const { return blocks_.size(); }

 private:
  std::map<std::uint64_t, block> blocks_;
  std::uint64_t head_;
};

// ---------------------------------------------------------------------------
// Validators and sealing schedule.

constexpr std::size_t kRecommendedValidators = 23;

/// Eligible sealers, ascending by address, duplicate-free.
struct validator_set {
  std::vector<address> members;

  static validator_set from(std::vector<address> candidates,
                            const reputation_ledger& ledger) {
    validator_set vs;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());
    for (auto& a : candidates)
      if (ledger.is_validator_eligible(a)) vs.members.push_back(std::move(a));
    return vs;
  }

  std::size_t size() const { return members.size(); }
  bool empty() const { return members.empty(); }
  bool contains(const address& a) const {
    return std::binary_search(members.begin(), members.end(), a);
  }

  /// PoA robustness grows with the validator count; below 23 is flagged as a
  /// warning, not an error.
  bool below_recommended_size() const {
    return members.size() < kRecommendedValidators;
  }
};

/// Round-robin schedule with skip-on-collision: validators[height mod n],
/// advancing one slot if that equals the previous sealer. Guarantees a
/// non-consecutive sealer whenever n >= 2.
inline address next_sealer(const validator_set& validators, std::uint64_t height,
                           const address& last_sealer) {
  const std::size_t n = validators.size();
  if (n == 0) throw no_eligible_sealer_error("empty validator set");
  if (n == 1) {
    if (validators.members[0] == last_sealer)
      throw no_eligible_sealer_error(
          "single validator cannot seal consecutive blocks");
    return validators.members[0];
  }
  std::size_t idx = static_cast<std::size_t>(height % n);
  if (validators.members[idx] == last_sealer) idx = (idx + 1) % n;
  return validators.members[idx];
}

enum class block_violation {
  none,
  unknown_parent,
  ineligible_sealer,
  consecutive_sealer,
  bad_height,
  bad_hash,
  equivocation  // two blocks, same sealer and height; trace-only
};

inline const char* to_string(block_violation v) {
  switch (v) {
    case block_violation::none: return "none";
    case block_violation::unknown_parent: return "unknown_parent";
    case block_violation::ineligible_sealer: return "ineligible_sealer";
    case block_violation::consecutive_sealer: return "consecutive_sealer";
    case block_violation::bad_height: return "bad_height";
    case block_violation::bad_hash: return "bad_hash";
    case block_violation::equivocation: return "equivocation";
  }
  return "?";
}

inline block_violation validate_block(const block& b, const chain_state& chain,
                                      const validator_set& validators) {
  if (!chain.contains(b.parent_id)) return block_violation::unknown_parent;
  const block& parent = chain.at(b.parent_id);
  if (!validators.contains(b.sealer)) return block_violation::ineligible_sealer;
  if (!parent.sealer.empty() && parent.sealer == b.sealer)
    return block_violation::consecutive_sealer;
  if (b.height != parent.height + 1) return block_violation::bad_height;
  if (b.id != compute_block_id(b)) return block_violation::bad_hash;
  return block_violation::none;
}

/// Longest chain; ties broken by the smallest block id (ids compare the same
/// numerically and as fixed-width hex).
inline std::uint64_t fork_choice(std::span<const block> heads) {
  if (heads.empty()) throw empty_head_set_error("no chain tips");
  const block* best = &heads[0];
  for (const block& h : heads.subspan(1)) {
    if (h.height > best->height ||
        (h.height == best->height && h.id < best->id))
      best = &h;
  }
  return best->id;
}

// ---------------------------------------------------------------------------
// Network model and trace.

struct network_config {
  tick_t latency_min = 1;
  tick_t latency_max = 3;
  double drop_probability = 0.0;  // in [0,1]
  std::uint64_t seed = 0;
};

struct consensus_config {
  ydr_t reward_seal = 10;
  ydr_t slash_amount = 100;
  int epoch_blocks = 10;      // eligibility re-check cadence, in blocks
  tick_t block_interval = 1;  // gap between finalization and next proposal
  tick_t round_timeout = 50;  // ticks before an attempt is abandoned
  int max_attempts = 10;      // attempts per height before StalledChain
};

/// Sealers that misbehave when scheduled.
struct fault_plan {
  std::set<address> equivocators;       // emit two blocks at the same height
  std::set<address> invalid_proposers;  // emit blocks with a corrupted height
};

enum class trace_kind {
  proposal,
  delivery,
  attestation,
  finalization,
  violation,
  reward,
  slash
};

inline const char* to_string(trace_kind k) {
  switch (k) {
    case trace_kind::proposal: return "proposal";
    case trace_kind::delivery: return "delivery";
    case trace_kind::attestation: return "attestation";
    case trace_kind::finalization: return "finalization";
    case trace_kind::violation: return "violation";
    case trace_kind::reward: return "reward";
    case trace_kind::slash: return "slash";
  }
  return "?";
}

struct trace_event {
  trace_kind kind;
  tick_t tick;
  std::uint64_t height;
  std::uint64_t block_id;
  std::int32_t actor;  // interned address index, -1 if none
  std::int32_t aux;    // block_violation for violation events, else -1
  std::int64_t amount; // reward/slash amount, else 0
};

/// Every consensus event of a run, with interned actor addresses.
class chain_trace {
 public:
  std::int32_t intern(const address& a) {
    auto it = index_.find(a);
    if (it != index_.end()) return it->second;
    std::int32_t id = static_cast<std::int32_t>(actors_.size());
    actors_.push_back(a);
    index_.emplace(a, id);
    return id;
  }

  void record(trace_kind kind, tick_t tick, std::uint64_t height,
              std::uint64_t block_id, const address& actor,
              std::int32_t aux = -1, std::int64_t amount = 0) {
    events_.push_back({kind, tick, height, block_id,
                       actor.empty() ? -1 : intern(actor), aux, amount});
  }

  const std::vector<trace_event>& events() const { return events_; }
  const address& actor(std::int32_t id) const {
    return actors_[static_cast<std::size_t>(id)];
  }

  std::size_t count(trace_kind k) const {
    std::size_t n = 0;
    for (const auto& e : events_)
      if (e.kind == k) ++n;
    return n;
  }

  std::size_t violation_count(block_violation v) const {
    std::size_t n = 0;
    for (const auto& e : events_)
      if (e.kind == trace_kind::violation &&
          e.aux == static_cast<std::int32_t>(v))
        ++n;
    return n;
  }

  /// Finalized blocks per sealer address.
  std::map<address, std::size_t> seal_counts() const {
    std::map<address, std::size_t> counts;
    for (const auto& e : events_)
      if (e.kind == trace_kind::finalization && e.actor >= 0)
        ++counts[actors_[static_cast<std::size_t>(e.actor)]];
    return counts;
  }

  /// One JSON object per line; field order and float-free payloads keep the
  /// bytes reproducible.
  void export_jsonl(std::ostream& os) const {
    for (const auto& e : events_) {
      os << "{\"tick\":" << e.tick << ",\"type\":\"" << to_string(e.kind)
         << "\",\"height\":" << e.height << ",\"block\":\"" << hex16(e.block_id)
         << "\"";
      if (e.actor >= 0)
        os << ",\"actor\":\"" << actors_[static_cast<std::size_t>(e.actor)]
           << "\"";
      if (e.kind == trace_kind::violation)
        os << ",\"violation\":\""
           << to_string(static_cast<block_violation>(e.aux)) << "\"";
      if (e.kind == trace_kind::reward || e.kind == trace_kind::slash)
        os << ",\"amount\":" << e.amount;
      os << "}\n";
    }
  }

 private:
  std::vector<trace_event> events_;
  std::vector<address> actors_;
  std::map<address, std::int32_t> index_;
};

// ---------------------------------------------------------------------------
// Engine: deterministic discrete-event PoA rounds.
//
// Each round the scheduled sealer proposes; the proposal travels to every
// other validator under the latency/drop model; validators that accept it
// send an attestation back. The block finalizes once more than half of the
// validators (sealer included) have acknowledged it. Valid finalized blocks
// earn the sealer R_seal; proven violations (invalid block or equivocation)
// cost S_slash.

class consensus_engine {
 public:
  consensus_engine(reputation_ledger& ledger,
                   std::function<std::vector<address>()> candidates,
                   const network_config& net, const consensus_config& cfg,
                   fault_plan faults = {})
      : ledger_(ledger),
        candidates_(std::move(candidates)),
        net_(net),
        cfg_(cfg),
        faults_(std::move(faults)),
        stream_(substream(net.seed, "consensus.network")) {
    refresh_validators();
  }

  void start(tick_t now) { next_proposal_tick_ = now; }

  const validator_set& validators() const { return validators_; }
  const chain_state& chain() const { return chain_; }
  chain_trace& trace() { return trace_; }
  const chain_trace& trace() const { return trace_; }
  bool stalled() const { return stalled_; }
  std::size_t finalized_count() const { return finalized_count_; }
  std::size_t proposal_rounds() const { return proposal_rounds_; }

  void add_pending_tx(std::uint64_t tx_id) { pending_txs_.push_back(tx_id); }

  /// Advances the engine at tick `now` (ticks must be non-decreasing across
  /// calls). Returns the blocks finalized during this tick.
  std::vector<block> step(tick_t now) {
    std::vector<block> finalized;
    if (stalled_) return finalized;

    deliver_due(now, finalized);

    if (active_ && !active_->finalized &&
        now - active_->proposed_at >= cfg_.round_timeout) {
      abandon_round(now);
    }
    if (!active_ && next_proposal_tick_ >= 0 && now >= next_proposal_tick_)
      propose(now);

    return finalized;
  }

 private:
  struct message {
    tick_t deliver_at;
    bool is_attestation;  // false: proposal delivery
    address to;           // delivery target or attestation origin
    std::uint64_t block_id;
  };

  struct round {
    block proposed;
    tick_t proposed_at;
    int attempt;
    std::set<address> acks;
    bool finalized = false;
    bool faulty = false;  // no finalization possible for this attempt
  };

  void refresh_validators() {
    validators_ = validator_set::from(candidates_(), ledger_);
  }

  tick_t draw_latency() {
    return stream_.uniform_i64(net_.latency_min, net_.latency_max);
  }

  bool dropped() { return stream_.bernoulli(net_.drop_probability); }

  void record_violation_and_slash(const block& b, block_violation v,
                                  tick_t now) {
    auto key = std::make_pair(b.id, static_cast<std::int32_t>(v));
    if (!seen_violations_.insert(key).second) return;
    trace_.record(trace_kind::violation, now, b.height, b.id, b.sealer,
                  static_cast<std::int32_t>(v));
    if (cfg_.slash_amount > 0 && ledger_.has_account(b.sealer)) {
      ledger_.slash(b.sealer, cfg_.slash_amount, "consensus_violation", now);
      trace_.record(trace_kind::slash, now, b.height, b.id, b.sealer, -1,
                    cfg_.slash_amount);
    }
  }

  void propose(tick_t now) {
    // Pick the scheduled sealer, skipping members that lost eligibility
    // mid-epoch so every finalized block's sealer is eligible at its
    // proposal tick.
    int attempt = attempt_;
    address sealer;
    for (;;) {
      if (attempt - attempt_ >= static_cast<int>(validators_.size()) ||
          attempt >= cfg_.max_attempts) {
        stalled_ = true;
        return;
      }
      try {
        sealer = next_sealer(validators_,
                             chain_.head().height + 1 +
                                 static_cast<std::uint64_t>(attempt),
                             last_sealer_);
      } catch (const no_eligible_sealer_error&) {
        stalled_ = true;
        return;
      }
      if (ledger_.is_validator_eligible(sealer)) break;
      ++attempt;
    }
    attempt_ = attempt;
    ++proposal_rounds_;

    block b;
    b.height = chain_.head().height + 1;
    b.parent_id = chain_.head().id;
    b.sealer = sealer;
    b.tx_ids = std::move(pending_txs_);
    pending_txs_.clear();
    b.tick = now;

    if (faults_.equivocators.count(sealer)) {
      // Two conflicting blocks at the same height: detected immediately,
      // the round yields nothing.
      b.id = compute_block_id(b);
      block b2 = b;
      b2.tx_ids.push_back(0xdeadbeefull);
      b2.id = compute_block_id(b2);
      trace_.record(trace_kind::proposal, now, b.height, b.id, sealer);
      trace_.record(trace_kind::proposal, now, b2.height, b2.id, sealer);
      record_violation_and_slash(b2, block_violation::equivocation, now);
      abandon_after_fault(now);
      return;
    }
    const bool corrupt = faults_.invalid_proposers.count(sealer) != 0;
    if (corrupt) b.height += 1;  // validators will reject the bad height
    b.id = compute_block_id(b);

    trace_.record(trace_kind::proposal, now, b.height, b.id, sealer);
    active_ = round{b, now, attempt_, {sealer}, false, corrupt};

    for (const address& v : validators_.members) {
      if (v == sealer) continue;
      if (dropped()) continue;
      queue_.insert({now + draw_latency(),
                     message{0, false, v, b.id}});
    }
  }

  void abandon_after_fault(tick_t now) {
    ++attempt_;
    if (attempt_ >= cfg_.max_attempts) {
      stalled_ = true;
      return;
    }
    active_.reset();
    next_proposal_tick_ = now + cfg_.block_interval;
  }

  void abandon_round(tick_t now) {
    ++attempt_;
    if (attempt_ >= cfg_.max_attempts) {
      stalled_ = true;
      return;
    }
    active_.reset();
    next_proposal_tick_ = now;  // retry immediately with the next sealer
  }

  void deliver_due(tick_t now, std::vector<block>& finalized) {
    auto end = queue_.upper_bound(now);
    std::vector<message> due;
    for (auto it = queue_.begin(); it != end; ++it) due.push_back(it->second);
    queue_.erase(queue_.begin(), end);

    for (const message& m : due) {
      if (!active_ || m.block_id != active_->proposed.id) continue;  // stale
      if (!m.is_attestation) {
        on_proposal_delivery(m, now);
      } else {
        on_attestation(m, now, finalized);
      }
    }
  }

  void on_proposal_delivery(const message& m, tick_t now) {
    const block& b = active_->proposed;
    trace_.record(trace_kind::delivery, now, b.height, b.id, m.to);
    block_violation v = validate_block(b, chain_, validators_);
    if (v != block_violation::none) {
      record_violation_and_slash(b, v, now);
      return;  // no attestation for an invalid block
    }
    if (dropped()) return;
    queue_.insert({now + draw_latency(), message{0, true, m.to, b.id}});
  }

  void on_attestation(const message& m, tick_t now,
                      std::vector<block>& finalized) {
    round& r = *active_;
    trace_.record(trace_kind::attestation, now, r.proposed.height,
                  r.proposed.id, m.to);
    r.acks.insert(m.to);
    if (r.finalized || r.faulty) return;
    if (2 * r.acks.size() > validators_.size()) {
      r.finalized = true;
      chain_.append(r.proposed);
      trace_.record(trace_kind::finalization, now, r.proposed.height,
                    r.proposed.id, r.proposed.sealer);
      if (cfg_.reward_seal > 0) {
        ledger_.earn(r.proposed.sealer, cfg_.reward_seal, "seal", now);
        trace_.record(trace_kind::reward, now, r.proposed.height,
                      r.proposed.id, r.proposed.sealer, -1, cfg_.reward_seal);
      }
      last_sealer_ = r.proposed.sealer;
      ++finalized_count_;
      attempt_ = 0;
      finalized.push_back(r.proposed);
      active_.reset();
      next_proposal_tick_ = now + cfg_.block_interval;
      if (cfg_.epoch_blocks > 0 &&
          finalized_count_ % static_cast<std::size_t>(cfg_.epoch_blocks) == 0)
        refresh_validators();
    }
  }

  reputation_ledger& ledger_;
  std::function<std::vector<address>()> candidates_;
  network_config net_;
  consensus_config cfg_;
  fault_plan faults_;
  rng stream_;

  validator_set validators_;
  chain_state chain_;
  chain_trace trace_;
  std::multimap<tick_t, message> queue_;
  std::optional<round> active_;
  std::vector<std::uint64_t> pending_txs_;
  address last_sealer_;
  int attempt_ = 0;
  tick_t next_proposal_tick_ = -1;
  std::size_t finalized_count_ = 0;
  std::size_t proposal_rounds_ = 0;
  bool stalled_ = false;
  std::set<std::pair<std::uint64_t, std::int32_t>> seen_violations_;
};

/// Runs the engine until `n_blocks` blocks finalize. Throws StalledChain if
/// the round budget is exhausted first. Bit-identical trace for identical
/// seed and configuration.
inline chain_trace simulate_consensus(const std::vector<address>& candidates,
                                      reputation_ledger& ledger,
                                      const network_config& net,
                                      std::size_t n_blocks,
                                      const consensus_config& cfg = {},
                                      fault_plan faults = {}) {
  consensus_engine engine(
      ledger, [candidates]() { return candidates; }, net, cfg,
      std::move(faults));
  engine.start(0);
  tick_t now = 0;
  while (engine.finalized_count() < n_blocks) {
    engine.step(now);
    if (engine.stalled())
      throw stalled_chain_error("no block finalized within the round budget");
    ++now;
  }
  return std::move(engine.trace());
}

}  // namespace dan
