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

#include "dan/common.hpp"

namespace dan {

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

/// Signals observed at the admission gate.
struct gate_signal {
  double performance_score = 0.0;  // in [0,1]
  double timing = 1.0;             // response latency, > 0
};

struct gate_decision {
  bool accepted = false;
  double probability = 0.0;  // p(Accept) under the current parameters
};

/// Adaptive admission gate with a double-loop learning mechanism.
///
/// Acceptance probability is logistic over (bias, performance score, inverse
/// timing), so faster responses raise acceptance. The short loop applies an
/// immediate policy-gradient step scaled by gate-level feedback; the long
/// loop replays the mean gradient trace of the epoch scaled by an ecosystem
/// retro-signal, then resets the trace. The agent only ever observes the two
/// signal fields, never the full ecosystem state.
class gate_agent {
 public:
  gate_agent(double eta_short = 0.05, double eta_long = 0.01)
      : eta_short_(eta_short), eta_long_(eta_long) {}

  /// Deterministic mode: Accept iff p > 0.5 (strict).
  gate_decision decide(const gate_signal& s) const {
    double p = acceptance_probability(s);
    return {p > 0.5, p};
  }

  /// Stochastic mode: Accept ~ Bernoulli(p) on the caller's stream.
  gate_decision decide(const gate_signal& s, rng& stream) const {
    double p = acceptance_probability(s);
    return {stream.bernoulli(p), p};
  }

  double acceptance_probability(const gate_signal& s) const {
    auto x = features(s);
    return logistic(theta_[0] * x[0] + theta_[1] * x[1] + theta_[2] * x[2]);
  }

  /// theta += eta_short * outcome * grad(log p(taken decision)).
  /// The gradient is also accumulated into the epoch trace for the long loop.
  void short_loop_update(const gate_signal& s, bool accepted, double outcome) {
    auto g = log_policy_gradient(s, accepted);
    for (int i = 0; i < 3; ++i) {
      theta_[i] += eta_short_ * outcome * g[i];
      trace_sum_[i] += g[i];
    }
    ++trace_count_;
  }

  /// theta += eta_long * retro_signal * mean(trace); trace resets. A retro
  /// signal arriving before any decisions leaves theta unchanged.
  void long_loop_update(double retro_signal) {
    if (trace_count_ > 0) {
      for (int i = 0; i < 3; ++i)
        theta_[i] += eta_long_ * retro_signal * trace_sum_[i] / trace_count_;
    }
    trace_sum_ = {0.0, 0.0, 0.0};
    trace_count_ = 0;
  }

  const std::array<double, 3>& theta() const { return theta_; }
  void set_theta(const std::array<double, 3>& t) { theta_ = t; }
  int trace_count() const { return trace_count_; }

 private:
  static std::array<double, 3> features(const gate_signal& s) {
    return {1.0, s.performance_score, 1.0 / s.timing};
  }

  std::array<double, 3> log_policy_gradient(const gate_signal& s,
                                            bool accepted) const {
    auto x = features(s);
    double p = acceptance_probability(s);
    // d log p / d theta = (1-p) x  for Accept, -p x for Reject.
    double scale = accepted ? (1.0 - p) : -p;
    return {scale * x[0], scale * x[1], scale * x[2]};
  }

  std::array<double, 3> theta_{0.0, 0.0, 0.0};
  double eta_short_;
  double eta_long_;
  std::array<double, 3> trace_sum_{0.0, 0.0, 0.0};
  int trace_count_ = 0;
};

}  // namespace dan
