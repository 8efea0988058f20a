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

#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "dan/common.hpp"
#include "dan/gating.hpp"

namespace {

TEST(Logistic, MidpointAndSymmetry) {
  EXPECT_EQ(dan::logistic(0.0), 0.5);
  EXPECT_NEAR(dan::logistic(2.0), 0.8807970779778823, 1e-15);
  EXPECT_NEAR(dan::logistic(2.0) + dan::logistic(-2.0), 1.0, 1e-15);
}

TEST(Logistic, SaturatesWithoutOverflow) {
  EXPECT_NEAR(dan::logistic(800.0), 1.0, 1e-12);
  EXPECT_NEAR(dan::logistic(-800.0), 0.0, 1e-12);
  EXPECT_TRUE(std::isfinite(dan::logistic(-5000.0)));
}

TEST(GateAgent, WorkedProbabilityExample) {
  // theta = (0, 4, 0), score 0.5: p = logistic(2).
  dan::gate_agent agent;
  agent.set_theta({0.0, 4.0, 0.0});
  dan::gate_signal s{0.5, 1.0};
  EXPECT_NEAR(agent.acceptance_probability(s), 0.8807970779778823, 1e-15);
  EXPECT_TRUE(agent.decide(s).accepted);
}

TEST(GateAgent, ZeroThetaRejectsAtExactHalf) {
  // p is exactly 0.5 and the accept rule is strict.
  dan::gate_agent agent;
  dan::gate_signal s{0.9, 2.0};
  auto d = agent.decide(s);
  EXPECT_EQ(d.probability, 0.5);
  EXPECT_FALSE(d.accepted);
}

TEST(GateAgent, FasterTimingRaisesAcceptance) {
  dan::gate_agent agent;
  agent.set_theta({0.0, 0.0, 1.0});
  dan::gate_signal fast{0.5, 0.5};  // inverse timing 2
  dan::gate_signal slow{0.5, 4.0};  // inverse timing 0.25
  EXPECT_GT(agent.acceptance_probability(fast),
            agent.acceptance_probability(slow));
}

TEST(GateAgent, SaturatedBiasAccepts) {
  dan::gate_agent agent;
  agent.set_theta({30.0, 0.0, 0.0});
  EXPECT_TRUE(agent.decide({0.0, 1.0}).accepted);
  agent.set_theta({-30.0, 0.0, 0.0});
  EXPECT_FALSE(agent.decide({1.0, 0.1}).accepted);
}

TEST(GateAgent, ZeroLearningRatesAreStationary) {
  dan::gate_agent agent(0.0, 0.0);
  agent.set_theta({0.3, -0.2, 0.1});
  auto before = agent.theta();
  for (int i = 0; i < 20; ++i) {
    dan::gate_signal s{0.1 * i, 1.0 + 0.1 * i};
    agent.short_loop_update(s, i % 2 == 0, 1.0);
  }
  agent.long_loop_update(5.0);
  EXPECT_EQ(agent.theta(), before);
}

TEST(GateAgent, ZeroOutcomeLeavesThetaUnchanged) {
  dan::gate_agent agent;
  agent.set_theta({0.5, 0.5, 0.5});
  auto before = agent.theta();
  agent.short_loop_update({0.7, 1.5}, true, 0.0);
  EXPECT_EQ(agent.theta(), before);
  // The trace still accumulated the gradient.
  EXPECT_EQ(agent.trace_count(), 1);
}

TEST(GateAgent, PositiveOutcomeReinforcesAcceptance) {
  // After a rewarded Accept, the probability of accepting the same signal
  // strictly increases. Checked over many random parameterizations.
  dan::rng r(301);
  for (int trial = 0; trial < 100; ++trial) {
    dan::gate_agent agent;
    agent.set_theta({r.uniform(-1.0, 1.0), r.uniform(-1.0, 1.0),
                     r.uniform(-1.0, 1.0)});
    dan::gate_signal s{r.uniform(0.0, 1.0), r.uniform(0.2, 3.0)};
    double before = agent.acceptance_probability(s);
    agent.short_loop_update(s, true, 1.0);
    EXPECT_GT(agent.acceptance_probability(s), before);
  }
}

TEST(GateAgent, PositiveOutcomeReinforcesRejection) {
  // After a rewarded Reject, the probability of accepting strictly drops.
  dan::rng r(302);
  for (int trial = 0; trial < 100; ++trial) {
    dan::gate_agent agent;
    agent.set_theta({r.uniform(-1.0, 1.0), r.uniform(-1.0, 1.0),
                     r.uniform(-1.0, 1.0)});
    dan::gate_signal s{r.uniform(0.0, 1.0), r.uniform(0.2, 3.0)};
    double before = agent.acceptance_probability(s);
    agent.short_loop_update(s, false, 1.0);
    EXPECT_LT(agent.acceptance_probability(s), before);
  }
}

TEST(GateAgent, NegativeOutcomeFlipsTheDirection) {
  dan::gate_agent agent;
  dan::gate_signal s{0.8, 1.0};
  double before = agent.acceptance_probability(s);
  agent.short_loop_update(s, true, -1.0);
  EXPECT_LT(agent.acceptance_probability(s), before);
}

TEST(GateAgent, LongLoopAppliesMeanTraceAndResets) {
  dan::gate_agent learner(0.0, 0.01);  // isolate the long loop
  dan::gate_signal s1{1.0, 1.0};
  dan::gate_signal s2{0.0, 2.0};
  learner.short_loop_update(s1, true, 0.0);
  learner.short_loop_update(s2, true, 0.0);
  EXPECT_EQ(learner.trace_count(), 2);

  // Oracle: mean of the two accept-gradients at theta = 0 (p stays 0.5 since
  // eta_short is zero, so each gradient is 0.5 * x).
  std::array<double, 3> x1{1.0, 1.0, 1.0};
  std::array<double, 3> x2{1.0, 0.0, 0.5};
  double retro = 3.0;
  std::array<double, 3> expected{};
  for (int i = 0; i < 3; ++i)
    expected[i] = 0.01 * retro * (0.5 * x1[i] + 0.5 * x2[i]) / 2.0;
  learner.long_loop_update(retro);
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(learner.theta()[i], expected[i], 1e-15);
  EXPECT_EQ(learner.trace_count(), 0);

  // A second retro signal with an empty trace is a no-op.
  auto after = learner.theta();
  learner.long_loop_update(-10.0);
  EXPECT_EQ(learner.theta(), after);
}

TEST(GateAgent, LongLoopRetroSignOrientsTheStep) {
  // Positive retro after accepted decisions raises the acceptance bias;
  // negative retro lowers it.
  for (double retro : {2.0, -2.0}) {
    dan::gate_agent agent(0.0, 0.05);
    dan::gate_signal s{0.5, 1.0};
    agent.short_loop_update(s, true, 0.0);
    agent.long_loop_update(retro);
    if (retro > 0.0)
      EXPECT_GT(agent.theta()[0], 0.0);
    else
      EXPECT_LT(agent.theta()[0], 0.0);
  }
}

TEST(GateAgent, StochasticDecideIsDeterministicUnderFixedStream) {
  dan::gate_agent agent;
  agent.set_theta({0.2, 0.4, -0.1});
  std::vector<bool> run1, run2;
  {
    dan::rng stream(77);
    for (int i = 0; i < 50; ++i)
      run1.push_back(agent.decide({0.02 * i, 1.0}, stream).accepted);
  }
  {
    dan::rng stream(77);
    for (int i = 0; i < 50; ++i)
      run2.push_back(agent.decide({0.02 * i, 1.0}, stream).accepted);
  }
  EXPECT_EQ(run1, run2);
}

TEST(GateAgent, StochasticAcceptanceTracksProbability) {
  dan::gate_agent agent;
  agent.set_theta({1.0, 0.0, 0.0});  // p = logistic(1) ~ 0.731
  dan::rng stream(78);
  int accepts = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i)
    if (agent.decide({0.5, 1.0}, stream).accepted) ++accepts;
  double rate = static_cast<double>(accepts) / n;
  EXPECT_NEAR(rate, dan::logistic(1.0), 0.02);
}

TEST(GateAgent, ShortLoopMatchesManualGradientStep) {
  // One rewarded Accept from theta 0: theta' = eta * outcome * (1-p) * x.
  double eta = 0.05;
  dan::gate_agent agent(eta, 0.01);
  dan::gate_signal s{0.5, 2.0};
  double p = agent.acceptance_probability(s);  // 0.5 at theta 0
  agent.short_loop_update(s, true, 2.0);
  std::array<double, 3> x{1.0, 0.5, 0.5};
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(agent.theta()[i], eta * 2.0 * (1.0 - p) * x[i], 1e-15);
}

}  // namespace
