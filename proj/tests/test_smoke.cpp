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

// Compilation smoke test: every public header in one translation unit, plus
// a one-liner per module so the linker sees real symbol uses.

#include <gtest/gtest.h>

#include "dan/common.hpp"
#include "dan/consensus.hpp"
#include "dan/econodynamics.hpp"
#include "dan/gating.hpp"
#include "dan/governance.hpp"
#include "dan/harness.hpp"
#include "dan/identity.hpp"
#include "dan/ledger.hpp"
#include "dan/log.hpp"
#include "dan/scenario.hpp"
#include "dan/tensor.hpp"
#include "dan/toml.hpp"
#include "dan/ynet.hpp"

TEST(Smoke, EveryModuleLinks) {
  dan::rng r(1);
  EXPECT_GE(r.next_unit(), 0.0);

  dan::reputation_ledger led;
  led.open("0x1");
  led.earn("0x1", 5, "genesis", 0);
  EXPECT_EQ(led.balance("0x1"), 5);
  EXPECT_TRUE(led.conservation_holds());

  dan::identity_registry reg(led);
  EXPECT_EQ(reg.size(), 0u);

  dan::gate_agent agent;
  EXPECT_GT(agent.acceptance_probability({0.5, 1.0}), 0.0);

  dan::tensor t({2, 2}, 1.0);
  EXPECT_EQ(t.size(), 4u);

  dan::graph g;
  auto n = g.input(dan::tensor::scalar(3.0));
  EXPECT_DOUBLE_EQ(g.value(g.scale(n, 2.0))[0], 6.0);

  dan::scenario sc;
  EXPECT_NO_THROW(sc.validate());
}
