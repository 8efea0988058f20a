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

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dan/common.hpp"
#include "dan/ledger.hpp"

namespace dan {

class invalid_profile_error : public error {
 public:
  using error::error;
};
class duplicate_face_error : public error {
 public:
  using error::error;
};
class zero_norm_vector_error : public error {
 public:
  using error::error;
};
class unknown_token_error : public error {
 public:
  using error::error;
};
class already_burned_error : public error {
 public:
  using error::error;
};
class not_burned_error : public error {
 public:
  using error::error;
};
class governance_rejected_error : public error {
 public:
  using error::error;
};

// ---------------------------------------------------------------------------
// Profile: 7 behavioral scores in [0,1] plus 5 demographics.

enum class gender : std::uint8_t { female, male, nonbinary, undisclosed };
enum class ambition : std::uint8_t { low, moderate, high };
enum class job_level : std::uint8_t { entry, mid, senior, executive };
enum class education_level : std::uint8_t {
  none,
  primary,
  secondary,
  tertiary,
  postgraduate
};

inline const char* to_string(gender v) {
  switch (v) {
    case gender::female: return "female";
    case gender::male: return "male";
    case gender::nonbinary: return "nonbinary";
    case gender::undisclosed: return "undisclosed";
  }
  return "?";
}
inline const char* to_string(ambition v) {
  switch (v) {
    case ambition::low: return "low";
    case ambition::moderate: return "moderate";
    case ambition::high: return "high";
  }
  return "?";
}
inline const char* to_string(job_level v) {
  switch (v) {
    case job_level::entry: return "entry";
    case job_level::mid: return "mid";
    case job_level::senior: return "senior";
    case job_level::executive: return "executive";
  }
  return "?";
}
inline const char* to_string(education_level v) {
  switch (v) {
    case education_level::none: return "none";
    case education_level::primary: return "primary";
    case education_level::secondary: return "secondary";
    case education_level::tertiary: return "tertiary";
    case education_level::postgraduate: return "postgraduate";
  }
  return "?";
}

template <typename E>
E enum_from_string(const std::string& s, std::initializer_list<E> all) {
  for (E e : all)
    if (s == to_string(e)) return e;
  throw invalid_profile_error("unknown enum value: " + s);
}

struct profile {
  // scores, each in [0,1]
  double tolerance = 0.5;
  double credibility = 0.5;
  double maturity = 0.5;
  double autonomy = 0.5;
  double emotional_state = 0.5;
  double worthiness = 0.5;
  double w_range = 0.5;
  // demographics
  int age = 0;
  gender gender_id = gender::undisclosed;
  ambition ambition_id = ambition::moderate;
  job_level job = job_level::entry;
  education_level education = education_level::none;

  static constexpr std::size_t score_count = 7;
  static constexpr std::size_t demographic_count = 5;

  std::array<double, score_count> scores() const {
    return {tolerance, credibility, maturity,  autonomy,
            emotional_state, worthiness, w_range};
  }

  void validate() const {
    for (double s : scores())
      if (!(s >= 0.0 && s <= 1.0))
        throw invalid_profile_error("score outside [0,1]: " + fmt_double(s));
    if (age < 0) throw invalid_profile_error("age must be >= 0");
  }
};

// ---------------------------------------------------------------------------
// FaceVector: 128-dim feature vector with nonzero norm.

struct face_vector {
  static constexpr std::size_t dim = 128;
  std::array<double, dim> values{};

  double norm() const {
    double s = 0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }
};

/// Cosine similarity in [-1,1], symmetric in its arguments.
inline double match_face(const face_vector& a, const face_vector& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < face_vector::dim; ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0)
    throw zero_norm_vector_error("face vector has zero norm");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---------------------------------------------------------------------------
// Token and registry.

enum class token_state { active, burned };

struct ydentity_token {
  std::uint64_t id = 0;
  address owner;
  profile prof;
  face_vector face;
  token_state state = token_state::active;
  tick_t minted_at = 0;
};

struct burn_receipt {
  std::uint64_t token_id;
  tick_t tick;
  ydr_t forfeited;
};

struct governance_decision;  // governance.hpp

/// Search predicates over profile fields only.
enum class profile_field {
  tolerance,
  credibility,
  maturity,
  autonomy,
  emotional_state,
  worthiness,
  w_range,
  age,
  gender_id,
  ambition_id,
  job,
  education
};

enum class cmp_op { ge, le, eq };

struct profile_predicate {
  profile_field field;
  cmp_op op;
  double value;  // enum predicates compare against the numeric enum value

  bool matches(const profile& p) const {
    double actual = 0;
    switch (field) {
      case profile_field::tolerance: actual = p.tolerance; break;
      case profile_field::credibility: actual = p.credibility; break;
      case profile_field::maturity: actual = p.maturity; break;
      case profile_field::autonomy: actual = p.autonomy; break;
      case profile_field::emotional_state: actual = p.emotional_state; break;
      case profile_field::worthiness: actual = p.worthiness; break;
      case profile_field::w_range: actual = p.w_range; break;
      case profile_field::age: actual = p.age; break;
      case profile_field::gender_id:
        actual = static_cast<double>(p.gender_id);
        break;
      case profile_field::ambition_id:
        actual = static_cast<double>(p.ambition_id);
        break;
      case profile_field::job: actual = static_cast<double>(p.job); break;
      case profile_field::education:
        actual = static_cast<double>(p.education);
        break;
    }
    switch (op) {
      case cmp_op::ge: return actual >= value;
      case cmp_op::le: return actual <= value;
      case cmp_op::eq: return actual == value;
    }
    return false;
  }
};

/// Mint, search, burn and reinstate Ydentity tokens. Tokens are unique,
/// non-fungible, ownable, non-transferable and burnable; non-transferability
/// is structural (there is no operation that changes an owner address).
class identity_registry {
 public:
  identity_registry(reputation_ledger& ledger, double duplicate_threshold = 0.85)
      : ledger_(ledger), duplicate_threshold_(duplicate_threshold) {}

  /// Registers a new Active token and opens a zero-balance YDR account for
  /// its owner. Rejects faces too close to any Active token's face.
  const ydentity_token& mint(const profile& p, const face_vector& face,
                             tick_t tick) {
    p.validate();
    if (face.norm() == 0.0)
      throw zero_norm_vector_error("face vector has zero norm");
    for (const auto& [id, tok] : tokens_) {
      if (tok.state != token_state::active) continue;
      if (match_face(face, tok.face) >= duplicate_threshold_)
        throw duplicate_face_error("face matches active token " +
                                   std::to_string(id));
    }
    std::uint64_t id = next_id_++;
    ydentity_token tok;
    tok.id = id;
    tok.owner = address_for_token(id);
    tok.prof = p;
    tok.face = face;
    tok.state = token_state::active;
    tok.minted_at = tick;
    ledger_.open(tok.owner);
    auto [it, ok] = tokens_.emplace(id, std::move(tok));
    (void)ok;
    return it->second;
  }

  const ydentity_token& token(std::uint64_t id) const {
    auto it = tokens_.find(id);
    if (it == tokens_.end())
      throw unknown_token_error("unknown token " + std::to_string(id));
    return it->second;
  }

  bool has_token(std::uint64_t id) const { return tokens_.count(id) != 0; }

  /// Addresses of all Active tokens whose profile satisfies every predicate,
  /// in ascending token-id order. An empty predicate set matches everything.
  std::vector<address> search(
      const std::vector<profile_predicate>& predicates) const {
    std::vector<address> out;
    for (const auto& [id, tok] : tokens_) {  // map iterates ids ascending
      if (tok.state != token_state::active) continue;
      bool all = true;
      for (const auto& pred : predicates)
        if (!pred.matches(tok.prof)) {
          all = false;
          break;
        }
      if (all) out.push_back(tok.owner);
    }
    return out;
  }

  /// Burns a token: the owner's YDR account is slashed to zero (the forfeited
  /// balance is destroyed) and frozen. Any community-graph cleanup is done by
  /// the installed on_burn hook.
  burn_receipt burn(std::uint64_t id, tick_t tick) {
    auto it = tokens_.find(id);
    if (it == tokens_.end())
      throw unknown_token_error("unknown token " + std::to_string(id));
    ydentity_token& tok = it->second;
    if (tok.state == token_state::burned)
      throw already_burned_error("token already burned: " + std::to_string(id));
    ydr_t forfeited = ledger_.balance(tok.owner);
    if (forfeited > 0) ledger_.slash(tok.owner, forfeited, "burn", tick);
    ledger_.freeze(tok.owner);
    tok.state = token_state::burned;
    if (on_burn_) on_burn_(tok.owner);
    return burn_receipt{id, tick, forfeited};
  }

  /// Full re-registration after a burn, gated on a passed governance
  /// decision. Mints a fresh token (new id, new address, zero YDR); the old
  /// token stays Burned.
  template <typename Decision>
  const ydentity_token& reinstate(std::uint64_t old_id, const profile& p,
                                  const face_vector& face,
                                  const Decision& approval, tick_t tick) {
    auto it = tokens_.find(old_id);
    if (it == tokens_.end())
      throw unknown_token_error("unknown token " + std::to_string(old_id));
    if (it->second.state != token_state::burned)
      throw not_burned_error("token not burned: " + std::to_string(old_id));
    if (!approval.passed)
      throw governance_rejected_error("governance rejected reinstatement of " +
                                      std::to_string(old_id));
    return mint(p, face, tick);
  }

  std::size_t active_count() const {
    std::size_t n = 0;
    for (const auto& [id, tok] : tokens_)
      if (tok.state == token_state::active) ++n;
    return n;
  }

  std::size_t size() const { return tokens_.size(); }
  const std::map<std::uint64_t, ydentity_token>& tokens() const {
    return tokens_;
  }
  double duplicate_threshold() const { return duplicate_threshold_; }

  void set_on_burn(std::function<void(const address&)> hook) {
    on_burn_ = std::move(hook);
  }

  // -- JSON dump/load -------------------------------------------------------

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [id, tok] : tokens_) {
      nlohmann::json rec;
      rec["token_id"] = tok.id;
      rec["owner"] = tok.owner;
      rec["state"] = tok.state == token_state::active ? "active" : "burned";
      rec["minted_at"] = tok.minted_at;
      nlohmann::json prof;
      prof["tolerance"] = tok.prof.tolerance;
      prof["credibility"] = tok.prof.credibility;
      prof["maturity"] = tok.prof.maturity;
      prof["autonomy"] = tok.prof.autonomy;
      prof["emotional_state"] = tok.prof.emotional_state;
      prof["worthiness"] = tok.prof.worthiness;
      prof["w_range"] = tok.prof.w_range;
      prof["age"] = tok.prof.age;
      prof["gender"] = to_string(tok.prof.gender_id);
      prof["ambition"] = to_string(tok.prof.ambition_id);
      prof["job_level"] = to_string(tok.prof.job);
      prof["education_level"] = to_string(tok.prof.education);
      rec["profile"] = std::move(prof);
      rec["face"] = tok.face.values;
      arr.push_back(std::move(rec));
    }
    return arr;
  }

  void load_json(const nlohmann::json& arr) {
    tokens_.clear();
    next_id_ = 1;
    for (const auto& rec : arr) {
      ydentity_token tok;
      tok.id = rec.at("token_id").get<std::uint64_t>();
      tok.owner = rec.at("owner").get<std::string>();
      tok.state = rec.at("state").get<std::string>() == "active"
                      ? token_state::active
                      : token_state::burned;
      tok.minted_at = rec.at("minted_at").get<tick_t>();
      const auto& prof = rec.at("profile");
      tok.prof.tolerance = prof.at("tolerance").get<double>();
      tok.prof.credibility = prof.at("credibility").get<double>();
      tok.prof.maturity = prof.at("maturity").get<double>();
      tok.prof.autonomy = prof.at("autonomy").get<double>();
      tok.prof.emotional_state = prof.at("emotional_state").get<double>();
      tok.prof.worthiness = prof.at("worthiness").get<double>();
      tok.prof.w_range = prof.at("w_range").get<double>();
      tok.prof.age = prof.at("age").get<int>();
      tok.prof.gender_id = enum_from_string<gender>(
          prof.at("gender").get<std::string>(),
          {gender::female, gender::male, gender::nonbinary,
           gender::undisclosed});
      tok.prof.ambition_id = enum_from_string<ambition>(
          prof.at("ambition").get<std::string>(),
          {ambition::low, ambition::moderate, ambition::high});
      tok.prof.job = enum_from_string<job_level>(
          prof.at("job_level").get<std::string>(),
          {job_level::entry, job_level::mid, job_level::senior,
           job_level::executive});
      tok.prof.education = enum_from_string<education_level>(
          prof.at("education_level").get<std::string>(),
          {education_level::none, education_level::primary,
           education_level::secondary, education_level::tertiary,
           education_level::postgraduate});
      const auto& face = rec.at("face");
      if (face.size() != face_vector::dim)
        throw invalid_profile_error("face vector must have 128 entries");
      for (std::size_t i = 0; i < face_vector::dim; ++i)
        tok.face.values[i] = face[i].get<double>();
      next_id_ = std::max(next_id_, tok.id + 1);
      tokens_.emplace(tok.id, std::move(tok));
    }
  }

 private:
  reputation_ledger& ledger_;
  double duplicate_threshold_;
  std::uint64_t next_id_ = 1;
  std::map<std::uint64_t, ydentity_token> tokens_;
  std::function<void(const address&)> on_burn_;
};

}  // namespace dan
