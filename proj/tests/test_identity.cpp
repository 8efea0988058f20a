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

#include <cmath>

#include "dan/governance.hpp"
#include "dan/identity.hpp"
#include "dan/ledger.hpp"

namespace {

// Face with a single nonzero coordinate.
dan::face_vector axis_face(std::size_t i, double v = 1.0) {
  dan::face_vector f;
  f.values[i] = v;
  return f;
}

dan::face_vector fill_face(double v) {
  dan::face_vector f;
  f.values.fill(v);
  return f;
}

TEST(MatchFace, SelfSimilarityIsOne) {
  dan::face_vector a = fill_face(0.25);
  a.values[3] = -2.0;
  EXPECT_NEAR(dan::match_face(a, a), 1.0, 1e-12);
}

TEST(MatchFace, NegatedVectorIsMinusOne) {
  dan::face_vector a = fill_face(0.5);
  a.values[7] = 3.0;
  dan::face_vector b;
  for (std::size_t i = 0; i < dan::face_vector::dim; ++i)
    b.values[i] = -a.values[i];
  EXPECT_NEAR(dan::match_face(a, b), -1.0, 1e-12);
}

TEST(MatchFace, HalfOverlapOracle) {
  // cos between e0 and (e0 + e1) is 1/sqrt(2).
  dan::face_vector a = axis_face(0);
  dan::face_vector b = axis_face(0);
  b.values[1] = 1.0;
  EXPECT_NEAR(dan::match_face(a, b), 0.7071067811865475, 1e-15);
}

TEST(MatchFace, OrthogonalIsZero) {
  EXPECT_NEAR(dan::match_face(axis_face(0), axis_face(1)), 0.0, 1e-15);
}

TEST(MatchFace, SymmetricInArguments) {
  dan::face_vector a, b;
  for (std::size_t i = 0; i < dan::face_vector::dim; ++i) {
    a.values[i] = std::sin(0.1 * static_cast<double>(i + 1));
    b.values[i] = std::cos(0.3 * static_cast<double>(i + 2));
  }
  EXPECT_EQ(dan::match_face(a, b), dan::match_face(b, a));
}

TEST(MatchFace, ZeroNormThrows) {
  dan::face_vector z;  // all zeros
  dan::face_vector a = axis_face(0);
  EXPECT_THROW(dan::match_face(z, a), dan::zero_norm_vector_error);
  EXPECT_THROW(dan::match_face(a, z), dan::zero_norm_vector_error);
}

TEST(Profile, ValidateRejectsOutOfRangeScore) {
  dan::profile p;
  p.credibility = 1.5;
  EXPECT_THROW(p.validate(), dan::invalid_profile_error);
  p.credibility = -0.1;
  EXPECT_THROW(p.validate(), dan::invalid_profile_error);
  p.credibility = 1.0;  // inclusive endpoints are fine
  p.tolerance = 0.0;
  EXPECT_NO_THROW(p.validate());
}

TEST(Profile, ValidateRejectsNegativeAge) {
  dan::profile p;
  p.age = -1;
  EXPECT_THROW(p.validate(), dan::invalid_profile_error);
}

class RegistryTest : public ::testing::Test {
 protected:
  dan::reputation_ledger led{1000000};
  dan::identity_registry reg{led};
};

TEST_F(RegistryTest, MintAssignsSequentialIdsAndOpensAccounts) {
  const auto& t1 = reg.mint(dan::profile{}, axis_face(0), 5);
  const auto& t2 = reg.mint(dan::profile{}, axis_face(1), 6);
  EXPECT_EQ(t1.id, 1u);
  EXPECT_EQ(t2.id, 2u);
  EXPECT_EQ(t1.owner, dan::address_for_token(1));
  EXPECT_EQ(t1.minted_at, 5);
  EXPECT_EQ(t1.state, dan::token_state::active);
  // The ledger account exists with a zero balance.
  EXPECT_TRUE(led.has_account(t1.owner));
  EXPECT_EQ(led.balance(t1.owner), 0);
  EXPECT_EQ(reg.size(), 2u);
  EXPECT_EQ(reg.active_count(), 2u);
}

TEST_F(RegistryTest, MintRejectsInvalidProfile) {
  dan::profile p;
  p.autonomy = 2.0;
  EXPECT_THROW(reg.mint(p, axis_face(0), 0), dan::invalid_profile_error);
  EXPECT_EQ(reg.size(), 0u);
}

TEST_F(RegistryTest, MintRejectsZeroNormFace) {
  EXPECT_THROW(reg.mint(dan::profile{}, dan::face_vector{}, 0),
               dan::zero_norm_vector_error);
}

TEST_F(RegistryTest, DuplicateFaceRejected) {
  reg.mint(dan::profile{}, fill_face(0.3), 0);
  EXPECT_THROW(reg.mint(dan::profile{}, fill_face(0.3), 1),
               dan::duplicate_face_error);
  // A scaled copy has cosine exactly 1 and is also rejected.
  EXPECT_THROW(reg.mint(dan::profile{}, fill_face(0.6), 1),
               dan::duplicate_face_error);
  EXPECT_EQ(reg.size(), 1u);
}

TEST_F(RegistryTest, DissimilarFaceAccepted) {
  reg.mint(dan::profile{}, axis_face(0), 0);
  EXPECT_NO_THROW(reg.mint(dan::profile{}, axis_face(1), 1));
}

TEST(RegistryThreshold, ExactThresholdSimilarityIsRejected) {
  // Pin the registry threshold to the measured cosine of the pair, so the
  // second mint hits the boundary exactly. The rejection rule is >=.
  dan::face_vector a = axis_face(0);
  dan::face_vector b = axis_face(0);
  b.values[1] = 0.75;
  double t = dan::match_face(a, b);
  dan::reputation_ledger led(1000000);
  dan::identity_registry reg(led, t);
  reg.mint(dan::profile{}, a, 0);
  EXPECT_THROW(reg.mint(dan::profile{}, b, 1), dan::duplicate_face_error);
}

TEST(RegistryThreshold, JustBelowThresholdIsAccepted) {
  dan::face_vector a = axis_face(0);
  dan::face_vector b = axis_face(0);
  b.values[1] = 0.75;
  double t = dan::match_face(a, b);
  dan::reputation_ledger led(1000000);
  dan::identity_registry reg(led, std::nextafter(t, 2.0));
  reg.mint(dan::profile{}, a, 0);
  EXPECT_NO_THROW(reg.mint(dan::profile{}, b, 1));
}

TEST_F(RegistryTest, BurnForfeitsBalanceAndFreezes) {
  const auto& tok = reg.mint(dan::profile{}, axis_face(0), 0);
  dan::address owner = tok.owner;
  led.earn(owner, 500, "work", 1);
  auto receipt = reg.burn(tok.id, 2);
  EXPECT_EQ(receipt.token_id, 1u);
  EXPECT_EQ(receipt.tick, 2);
  EXPECT_EQ(receipt.forfeited, 500);
  EXPECT_EQ(led.balance(owner), 0);
  EXPECT_TRUE(led.account(owner).frozen);
  EXPECT_EQ(reg.token(1).state, dan::token_state::burned);
  EXPECT_EQ(reg.active_count(), 0u);
  EXPECT_EQ(reg.size(), 1u);
}

TEST_F(RegistryTest, BurnWithZeroBalanceForfeitsNothing) {
  const auto& tok = reg.mint(dan::profile{}, axis_face(0), 0);
  auto receipt = reg.burn(tok.id, 1);
  EXPECT_EQ(receipt.forfeited, 0);
  // No slash event was recorded for a zero balance.
  EXPECT_TRUE(led.account(dan::address_for_token(1)).history.empty());
}

TEST_F(RegistryTest, BurnTwiceThrows) {
  reg.mint(dan::profile{}, axis_face(0), 0);
  reg.burn(1, 1);
  EXPECT_THROW(reg.burn(1, 2), dan::already_burned_error);
}

TEST_F(RegistryTest, BurnUnknownTokenThrows) {
  EXPECT_THROW(reg.burn(42, 0), dan::unknown_token_error);
}

TEST_F(RegistryTest, BurnedFaceFreesTheSlot) {
  reg.mint(dan::profile{}, fill_face(0.3), 0);
  reg.burn(1, 1);
  // The same face can be registered again once the old token is Burned.
  const auto& t2 = reg.mint(dan::profile{}, fill_face(0.3), 2);
  EXPECT_EQ(t2.id, 2u);
  EXPECT_NE(t2.owner, dan::address_for_token(1));
}

TEST_F(RegistryTest, OnBurnHookObservesOwner) {
  std::vector<dan::address> seen;
  reg.set_on_burn([&](const dan::address& a) { seen.push_back(a); });
  const auto& tok = reg.mint(dan::profile{}, axis_face(0), 0);
  dan::address owner = tok.owner;
  reg.burn(1, 1);
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0], owner);
}

TEST_F(RegistryTest, ReinstateRequiresBurnedToken) {
  reg.mint(dan::profile{}, axis_face(0), 0);
  dan::governance_decision ok;
  ok.passed = true;
  EXPECT_THROW(reg.reinstate(1, dan::profile{}, axis_face(2), ok, 1),
               dan::not_burned_error);
  EXPECT_THROW(reg.reinstate(9, dan::profile{}, axis_face(2), ok, 1),
               dan::unknown_token_error);
}

TEST_F(RegistryTest, ReinstateRequiresPassedDecision) {
  reg.mint(dan::profile{}, axis_face(0), 0);
  reg.burn(1, 1);
  dan::governance_decision rejected;
  rejected.passed = false;
  EXPECT_THROW(reg.reinstate(1, dan::profile{}, axis_face(2), rejected, 2),
               dan::governance_rejected_error);
  EXPECT_EQ(reg.size(), 1u);
}

TEST_F(RegistryTest, ReinstateMintsFreshTokenWithZeroBalance) {
  const auto& old_tok = reg.mint(dan::profile{}, axis_face(0), 0);
  dan::address old_owner = old_tok.owner;
  led.earn(old_owner, 300, "work", 1);
  reg.burn(1, 2);
  dan::governance_decision ok;
  ok.passed = true;
  const auto& fresh = reg.reinstate(1, dan::profile{}, axis_face(2), ok, 3);
  EXPECT_EQ(fresh.id, 2u);
  EXPECT_NE(fresh.owner, old_owner);
  EXPECT_EQ(led.balance(fresh.owner), 0);
  // The old token stays Burned; the forfeited balance was not restored.
  EXPECT_EQ(reg.token(1).state, dan::token_state::burned);
  EXPECT_EQ(led.balance(old_owner), 0);
  EXPECT_EQ(reg.active_count(), 1u);
}

TEST_F(RegistryTest, SearchFiltersAndOrdersByTokenId) {
  dan::profile young;
  young.age = 20;
  dan::profile mid;
  mid.age = 40;
  mid.credibility = 0.9;
  dan::profile old_p;
  old_p.age = 60;
  reg.mint(mid, axis_face(0), 0);    // id 1
  reg.mint(young, axis_face(1), 0);  // id 2
  reg.mint(old_p, axis_face(2), 0);  // id 3

  std::vector<dan::profile_predicate> at_least_30{
      {dan::profile_field::age, dan::cmp_op::ge, 30.0}};
  auto hits = reg.search(at_least_30);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0], dan::address_for_token(1));
  EXPECT_EQ(hits[1], dan::address_for_token(3));

  // Conjunction across predicates.
  std::vector<dan::profile_predicate> credible_adult{
      {dan::profile_field::age, dan::cmp_op::ge, 30.0},
      {dan::profile_field::credibility, dan::cmp_op::ge, 0.8}};
  auto strict = reg.search(credible_adult);
  ASSERT_EQ(strict.size(), 1u);
  EXPECT_EQ(strict[0], dan::address_for_token(1));

  // Empty predicate set matches everything, ascending by token id.
  auto all = reg.search({});
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0], dan::address_for_token(1));
  EXPECT_EQ(all[2], dan::address_for_token(3));
}

TEST_F(RegistryTest, SearchExcludesBurnedTokens) {
  reg.mint(dan::profile{}, axis_face(0), 0);
  reg.mint(dan::profile{}, axis_face(1), 0);
  reg.burn(1, 1);
  auto all = reg.search({});
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0], dan::address_for_token(2));
}

TEST_F(RegistryTest, SearchEnumPredicate) {
  dan::profile p1;
  p1.gender_id = dan::gender::female;
  dan::profile p2;
  p2.gender_id = dan::gender::male;
  reg.mint(p1, axis_face(0), 0);
  reg.mint(p2, axis_face(1), 0);
  std::vector<dan::profile_predicate> female{
      {dan::profile_field::gender_id, dan::cmp_op::eq,
       static_cast<double>(dan::gender::female)}};
  auto hits = reg.search(female);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0], dan::address_for_token(1));
}

TEST_F(RegistryTest, JsonRoundTripPreservesTokens) {
  dan::profile p;
  p.tolerance = 0.1;
  p.credibility = 0.9;
  p.age = 33;
  p.gender_id = dan::gender::nonbinary;
  p.ambition_id = dan::ambition::high;
  p.job = dan::job_level::senior;
  p.education = dan::education_level::postgraduate;
  dan::face_vector f;
  for (std::size_t i = 0; i < dan::face_vector::dim; ++i)
    f.values[i] = 0.01 * static_cast<double>(i) - 0.4;
  reg.mint(p, f, 7);
  reg.mint(dan::profile{}, axis_face(5), 8);
  reg.burn(2, 9);

  auto dump = reg.to_json();
  dan::reputation_ledger led2(1000000);
  dan::identity_registry reg2(led2);
  reg2.load_json(dump);

  ASSERT_EQ(reg2.size(), 2u);
  const auto& t1 = reg2.token(1);
  EXPECT_EQ(t1.prof.tolerance, 0.1);
  EXPECT_EQ(t1.prof.credibility, 0.9);
  EXPECT_EQ(t1.prof.age, 33);
  EXPECT_EQ(t1.prof.gender_id, dan::gender::nonbinary);
  EXPECT_EQ(t1.prof.ambition_id, dan::ambition::high);
  EXPECT_EQ(t1.prof.job, dan::job_level::senior);
  EXPECT_EQ(t1.prof.education, dan::education_level::postgraduate);
  EXPECT_EQ(t1.face.values, f.values);
  EXPECT_EQ(t1.minted_at, 7);
  EXPECT_EQ(t1.state, dan::token_state::active);
  EXPECT_EQ(reg2.token(2).state, dan::token_state::burned);
  // The id counter resumes past the highest loaded id.
  const auto& t3 = reg2.mint(dan::profile{}, axis_face(6), 10);
  EXPECT_EQ(t3.id, 3u);
}

}  // namespace
