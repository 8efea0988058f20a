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
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dan/common.hpp"

namespace dan {

class invalid_distribution_error : public error {
 public:
  using error::error;
};

/// One reactant or product term: coefficient times formation enthalpy.
struct species_term {
  double coefficient = 1.0;  // > 0
  double formation_enthalpy = 0.0;
};

/// sum(v * H_f) over products minus the same sum over reactants.
inline double enthalpy_of_reaction(std::span<const species_term> products,
                                   std::span<const species_term> reactants) {
  double h = 0.0;
  for (const auto& t : products) h += t.coefficient * t.formation_enthalpy;
  for (const auto& t : reactants) h -= t.coefficient * t.formation_enthalpy;
  return h;
}

/// A connection between two members; bond_energy is the cumulative YDR
/// minted across the edge.
struct community_bond {
  address a;
  address b;
  double bond_energy = 0.0;  // >= 0
};

/// Total energy needed to break every bond of the community. For a single
/// bond this equals the enthalpy of total dissociation.
inline double enthalpy_of_atomization(std::span<const community_bond> bonds) {
  double h = 0.0;
  for (const auto& bond : bonds) h += bond.bond_energy;
  return h;
}

/// Probability vector over asset positions.
struct holdings_distribution {
  std::vector<double> p;

  void validate() const {
    double sum = 0.0;
    for (double v : p) {
      if (v < 0.0)
        throw invalid_distribution_error("negative probability " +
                                         fmt_double(v));
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw invalid_distribution_error("probabilities sum to " +
                                       fmt_double(sum));
  }
};

/// Shannon entropy in nats, with 0*ln(0) := 0. Ranges over [0, ln n]: zero
/// for a point mass ("solid"), ln n for the uniform distribution ("gas").
inline double entropy(const holdings_distribution& dist) {
  dist.validate();
  double s = 0.0;
  for (double v : dist.p)
    if (v > 0.0) s -= v * std::log(v);
  return s;
}

/// Entropy of the normalized balance shares; zero total maps to zero.
inline double entropy_of_balances(std::span<const double> balances) {
  double total = 0.0;
  for (double b : balances) total += b;
  if (total <= 0.0) return 0.0;
  holdings_distribution d;
  d.p.reserve(balances.size());
  for (double b : balances) d.p.push_back(b / total);
  double s = 0.0;
  for (double v : d.p)
    if (v > 0.0) s -= v * std::log(v);
  return s;
}

enum class game_class { negative_sum, zero_sum, positive_sum };

inline const char* to_string(game_class g) {
  switch (g) {
    case game_class::negative_sum: return "negative_sum";
    case game_class::zero_sum: return "zero_sum";
    case game_class::positive_sum: return "positive_sum";
  }
  return "?";
}

/// Classifies the total of per-agent net value changes. A zero total (to
/// relative tolerance eps) is a zero-sum game, which reports flag as
/// "Ponzi-suspect".
inline game_class classify_game(std::span<const double> payoffs,
                                double eps = 1e-9) {
  double total = 0.0, abs_total = 0.0;
  for (double p : payoffs) {
    total += p;
    abs_total += std::abs(p);
  }
  if (std::abs(total) <= eps * std::max(1.0, abs_total))
    return game_class::zero_sum;
  return total > 0.0 ? game_class::positive_sum : game_class::negative_sum;
}

inline bool ponzi_suspect(game_class g) { return g == game_class::zero_sum; }

/// Gini coefficient of a nonnegative holdings vector; 0 for empty input or
/// zero total (perfect equality convention).
inline double gini(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double total = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    total += v[i];
    weighted += static_cast<double>(i + 1) * v[i];
  }
  if (total <= 0.0) return 0.0;
  const double n = static_cast<double>(v.size());
  return (2.0 * weighted) / (n * total) - (n + 1.0) / n;
}

}  // namespace dan
