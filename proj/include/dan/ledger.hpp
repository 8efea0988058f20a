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
#include <map>
#include <ostream>
#include <vector>

#include "dan/common.hpp"

namespace dan {

class frozen_account_error : public error {
 public:
  using error::error;
};
class liquidated_account_error : public error {
 public:
  using error::error;
};
class non_positive_amount_error : public error {
 public:
  using error::error;
};
class insufficient_reputation_error : public error {
 public:
  using error::error;
};
class unknown_account_error : public error {
 public:
  using error::error;
};

enum class event_kind { earn, spend, slash, liquidate };

inline const char* to_string(event_kind k) {
  switch (k) {
    case event_kind::earn: return "earn";
    case event_kind::spend: return "spend";
    case event_kind::slash: return "slash";
    case event_kind::liquidate: return "liquidate";
  }
  return "?";
}

/// One append-only ledger entry. `amount` is the amount actually applied to
/// the balance: positive for earn, the deducted amount for spend/slash (a
/// slash at the zero floor records 0), the payout for liquidate.
struct reputation_event {
  event_kind kind;
  ydr_t amount;
  std::string reason;
  tick_t tick;
};

struct reputation_account {
  address owner;
  ydr_t balance = 0;
  bool frozen = false;
  bool liquidated = false;
  std::vector<reputation_event> history;
};

/// YDR balances with earn/spend/slash/liquidate semantics. There is no
/// transfer operation: reputation can only be earned, used and lost.
///
/// Conservation identity maintained at all times, in exact integer
/// arithmetic:
///   sum(balances) == total_earned - total_spent - total_slashed -
///                    total_liquidated
class reputation_ledger {
 public:
  explicit reputation_ledger(ydr_t validator_threshold = 1'000'000)
      : validator_threshold_(validator_threshold) {}

  /// Creates a zero-balance account. Idempotent for an existing owner.
  reputation_account& open(const address& owner) {
    auto [it, inserted] = accounts_.try_emplace(owner);
    if (inserted) it->second.owner = owner;
    return it->second;
  }

  bool has_account(const address& owner) const {
    return accounts_.count(owner) != 0;
  }

  const reputation_account& account(const address& owner) const {
    auto it = accounts_.find(owner);
    if (it == accounts_.end())
      throw unknown_account_error("unknown account " + owner);
    return it->second;
  }

  ydr_t balance(const address& owner) const { return account(owner).balance; }

  ydr_t earn(const address& owner, ydr_t amount, const std::string& reason,
             tick_t tick) {
    auto& a = mutable_account(owner);
    if (amount <= 0)
      throw non_positive_amount_error("earn amount must be positive");
    if (a.liquidated)
      throw liquidated_account_error("account liquidated: " + owner);
    if (a.frozen) throw frozen_account_error("account frozen: " + owner);
    a.balance += amount;
    total_earned_ += amount;
    append(a, {event_kind::earn, amount, reason, tick});
    return a.balance;
  }

  ydr_t spend(const address& owner, ydr_t amount, const std::string& purpose,
              tick_t tick) {
    auto& a = mutable_account(owner);
    if (amount <= 0)
      throw non_positive_amount_error("spend amount must be positive");
    if (a.liquidated)
      throw liquidated_account_error("account liquidated: " + owner);
    if (a.frozen) throw frozen_account_error("account frozen: " + owner);
    if (amount > a.balance)
      throw insufficient_reputation_error("balance " +
                                          std::to_string(a.balance) +
                                          " < spend " + std::to_string(amount));
    a.balance -= amount;
    total_spent_ += amount;
    append(a, {event_kind::spend, amount, purpose, tick});
    return a.balance;
  }

  /// Deducts up to `amount`, flooring the balance at zero. Works on frozen
  /// accounts (freezing blocks earn/spend only); the event records the
  /// actually deducted amount.
  ydr_t slash(const address& owner, ydr_t amount, const std::string& reason,
              tick_t tick) {
    auto& a = mutable_account(owner);
    if (amount <= 0)
      throw non_positive_amount_error("slash amount must be positive");
    if (a.liquidated)
      throw liquidated_account_error("account liquidated: " + owner);
    ydr_t deducted = std::min(a.balance, amount);
    a.balance -= deducted;
    total_slashed_ += deducted;
    append(a, {event_kind::slash, deducted, reason, tick});
    return a.balance;
  }

  /// Pays out the whole balance and permanently freezes the account.
  ydr_t liquidate(const address& owner, tick_t tick) {
    auto& a = mutable_account(owner);
    if (a.liquidated)
      throw liquidated_account_error("account already liquidated: " + owner);
    ydr_t payout = a.balance;
    a.balance = 0;
    a.frozen = true;
    a.liquidated = true;
    total_liquidated_ += payout;
    append(a, {event_kind::liquidate, payout, "liquidation", tick});
    return payout;
  }

  void freeze(const address& owner) { mutable_account(owner).frozen = true; }

  /// Strictly more than the threshold, and the account must not be frozen.
  bool is_validator_eligible(const address& owner) const {
    auto it = accounts_.find(owner);
    if (it == accounts_.end()) return false;
    return it->second.balance > validator_threshold_ && !it->second.frozen;
  }

  ydr_t validator_threshold() const { return validator_threshold_; }

  ydr_t total_supply() const {
    ydr_t s = 0;
    for (const auto& [owner, a] : accounts_) s += a.balance;
    return s;
  }

  ydr_t total_earned() const { return total_earned_; }
  ydr_t total_spent() const { return total_spent_; }
  ydr_t total_slashed() const { return total_slashed_; }
  ydr_t total_liquidated() const { return total_liquidated_; }

  bool conservation_holds() const {
    return total_supply() ==
           total_earned_ - total_spent_ - total_slashed_ - total_liquidated_;
  }

  /// Folds an account's history over a zero initial balance.
  static ydr_t replay(const reputation_account& a) {
    ydr_t b = 0;
    for (const auto& e : a.history) {
      switch (e.kind) {
        case event_kind::earn: b += e.amount; break;
        case event_kind::spend: b -= e.amount; break;
        case event_kind::slash: b -= e.amount; break;
        case event_kind::liquidate: b -= e.amount; break;
      }
    }
    return b;
  }

  const std::map<address, reputation_account>& accounts() const {
    return accounts_;
  }

  /// CSV export, one row per event in global chronological order.
  void export_csv(std::ostream& os) const {
    os << "address,kind,amount,reason,tick\n";
    for (const auto& [owner, ev] : journal_) {
      os << owner << ',' << to_string(ev.kind) << ',' << ev.amount << ','
         << ev.reason << ',' << ev.tick << '\n';
    }
  }

 private:
  reputation_account& mutable_account(const address& owner) {
    auto it = accounts_.find(owner);
    if (it == accounts_.end())
      throw unknown_account_error("unknown account " + owner);
    return it->second;
  }

  void append(reputation_account& a, reputation_event ev) {
    journal_.emplace_back(a.owner, ev);
    a.history.push_back(std::move(ev));
  }

  ydr_t validator_threshold_;
  std::map<address, reputation_account> accounts_;
  std::vector<std::pair<address, reputation_event>> journal_;
  ydr_t total_earned_ = 0;
  ydr_t total_spent_ = 0;
  ydr_t total_slashed_ = 0;
  ydr_t total_liquidated_ = 0;
};

}  // namespace dan
