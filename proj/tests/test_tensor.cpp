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
#include <functional>
#include <sstream>
#include <vector>

#include "dan/common.hpp"
#include "dan/tensor.hpp"

namespace {

dan::tensor rand_tensor(dan::rng& r, std::vector<std::size_t> shape,
                        double lo = -1.0, double hi = 1.0) {
  dan::tensor t(std::move(shape));
  for (auto& v : t.data) v = r.uniform(lo, hi);
  return t;
}

/// Rebuilds the graph from the current parameter values on every call and
/// compares the recorded gradients against central differences.
double max_rel_fd(std::vector<dan::parameter*> params,
                  const std::function<dan::graph::node(dan::graph&)>& build,
                  double h = 1e-5) {
  auto run = [&](bool with_grad) {
    dan::graph g;
    auto loss = build(g);
    double v = g.value(loss)[0];
    if (with_grad) g.backward(loss);
    return v;
  };
  return dan::finite_difference_check(params, run, h).max_rel_error;
}

TEST(Tensor, ConstructionAndIndexing) {
  dan::tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rank(), 2u);
  t.at({1, 2}) = 9.0;
  EXPECT_EQ(t.data[5], 9.0);
  EXPECT_EQ(t.at({0, 0}), 1.5);
  EXPECT_THROW(t.at({1}), dan::shape_mismatch_error);
  EXPECT_THROW(dan::tensor({2, 2}, std::vector<double>{1.0}),
               dan::shape_mismatch_error);
  EXPECT_EQ(dan::tensor::scalar(3.0).size(), 1u);
}

TEST(Tensor, AllFiniteDetectsNonFiniteEntries) {
  dan::tensor t({2}, std::vector<double>{1.0, 2.0});
  EXPECT_TRUE(t.all_finite());
  t[1] = std::nan("");
  EXPECT_FALSE(t.all_finite());
}

TEST(Tensor, SerializationRoundTripIsExact) {
  dan::tensor t({2, 3},
                std::vector<double>{0.1, -2.5, 3.0, 1e-300, 7.25, -0.0});
  std::stringstream ss;
  t.write(ss);
  dan::tensor back = dan::tensor::read(ss);
  EXPECT_EQ(back.shape, t.shape);
  EXPECT_EQ(back.data, t.data);
}

TEST(Tensor, TruncatedStreamThrows) {
  dan::tensor t({4}, std::vector<double>{1, 2, 3, 4});
  std::stringstream ss;
  t.write(ss);
  std::string bytes = ss.str();
  std::stringstream cut(bytes.substr(0, bytes.size() - 7));
  EXPECT_THROW(dan::tensor::read(cut), dan::error);
}

TEST(Graph, MatmulKnownProduct) {
  dan::graph g;
  auto a = g.input(dan::tensor({2, 2}, std::vector<double>{1, 2, 3, 4}));
  auto b = g.input(dan::tensor({2, 2}, std::vector<double>{5, 6, 7, 8}));
  auto c = g.matmul(a, b);
  EXPECT_EQ(g.value(c).data, (std::vector<double>{19, 22, 43, 50}));

  auto eye = g.input(dan::tensor({2, 2}, std::vector<double>{1, 0, 0, 1}));
  auto same = g.matmul(a, eye);
  EXPECT_EQ(g.value(same).data, g.value(a).data);

  auto bad = g.input(dan::tensor({3, 1}, std::vector<double>{1, 2, 3}));
  EXPECT_THROW(g.matmul(a, bad), dan::shape_mismatch_error);
}

TEST(Graph, ElementwiseOpsAndShapeChecks) {
  dan::graph g;
  auto a = g.input(dan::tensor({3}, std::vector<double>{1, 2, 3}));
  auto b = g.input(dan::tensor({3}, std::vector<double>{10, 20, 30}));
  EXPECT_EQ(g.value(g.add(a, b)).data, (std::vector<double>{11, 22, 33}));
  EXPECT_EQ(g.value(g.sub(b, a)).data, (std::vector<double>{9, 18, 27}));
  EXPECT_EQ(g.value(g.mul(a, b)).data, (std::vector<double>{10, 40, 90}));
  EXPECT_EQ(g.value(g.scale(a, -2.0)).data, (std::vector<double>{-2, -4, -6}));
  auto wrong = g.input(dan::tensor({2}, std::vector<double>{1, 2}));
  EXPECT_THROW(g.add(a, wrong), dan::shape_mismatch_error);
  EXPECT_THROW(g.mul(a, wrong), dan::shape_mismatch_error);
}

TEST(Graph, AddBiasBroadcastsOverLastAxis) {
  dan::graph g;
  auto a = g.input(dan::tensor({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6}));
  auto b = g.input(dan::tensor({3}, std::vector<double>{10, 20, 30}));
  EXPECT_EQ(g.value(g.add_bias(a, b)).data,
            (std::vector<double>{11, 22, 33, 14, 25, 36}));
  auto bad = g.input(dan::tensor({2}, std::vector<double>{1, 2}));
  EXPECT_THROW(g.add_bias(a, bad), dan::shape_mismatch_error);
}

TEST(Graph, TransposeSwapsAxes) {
  dan::graph g;
  auto a = g.input(dan::tensor({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6}));
  auto t = g.transpose(a);
  EXPECT_EQ(g.value(t).shape, (std::vector<std::size_t>{3, 2}));
  EXPECT_EQ(g.value(t).data, (std::vector<double>{1, 4, 2, 5, 3, 6}));
  auto v = g.input(dan::tensor({3}, std::vector<double>{1, 2, 3}));
  EXPECT_THROW(g.transpose(v), dan::shape_mismatch_error);
}

TEST(Graph, ActivationsPointwise) {
  dan::graph g;
  auto x = g.input(dan::tensor({4}, std::vector<double>{-2, 0, 1, 800}));
  const auto& th = g.value(g.tanh_(x));
  EXPECT_NEAR(th[0], std::tanh(-2.0), 1e-15);
  EXPECT_EQ(th[1], 0.0);
  const auto& sg = g.value(g.sigmoid_(x));
  EXPECT_EQ(sg[1], 0.5);
  EXPECT_EQ(sg[3], 1.0);  // saturates cleanly, no overflow
  EXPECT_NEAR(sg[2], 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
  const auto& re = g.value(g.relu_(x));
  EXPECT_EQ(re.data, (std::vector<double>{0, 0, 1, 800}));
}

TEST(Graph, SigmoidScalarIsStableInBothTails) {
  EXPECT_EQ(dan::sigmoid(1000.0), 1.0);
  EXPECT_EQ(dan::sigmoid(-1000.0), 0.0);
  EXPECT_EQ(dan::sigmoid(0.0), 0.5);
}

TEST(Graph, ConcatAlongLastAxis) {
  dan::graph g;
  auto a = g.input(dan::tensor({2, 2}, std::vector<double>{1, 2, 3, 4}));
  auto b = g.input(dan::tensor({2, 3}, std::vector<double>{5, 6, 7, 8, 9, 10}));
  auto c = g.concat({a, b});
  EXPECT_EQ(g.value(c).shape, (std::vector<std::size_t>{2, 5}));
  EXPECT_EQ(g.value(c).data,
            (std::vector<double>{1, 2, 5, 6, 7, 3, 4, 8, 9, 10}));
  auto bad = g.input(dan::tensor({3, 1}, std::vector<double>{1, 2, 3}));
  EXPECT_THROW(g.concat({a, bad}), dan::shape_mismatch_error);
}

TEST(Graph, StackAndSlice) {
  dan::graph g;
  auto a = g.input(dan::tensor({2}, std::vector<double>{1, 2}));
  auto b = g.input(dan::tensor({2}, std::vector<double>{3, 4}));
  auto s = g.stack({a, b});
  EXPECT_EQ(g.value(s).shape, (std::vector<std::size_t>{2, 2}));
  EXPECT_EQ(g.value(s).data, (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(g.value(g.slice0(s, 1)).data, (std::vector<double>{3, 4}));
  EXPECT_THROW(g.slice0(s, 2), dan::shape_mismatch_error);
  auto c = g.input(dan::tensor({3}, std::vector<double>{1, 2, 3}));
  EXPECT_THROW(g.stack({a, c}), dan::shape_mismatch_error);
}

TEST(Graph, ReshapePreservesData) {
  dan::graph g;
  auto a = g.input(dan::tensor({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6}));
  auto r = g.reshape(a, {3, 2});
  EXPECT_EQ(g.value(r).shape, (std::vector<std::size_t>{3, 2}));
  EXPECT_EQ(g.value(r).data, g.value(a).data);
  EXPECT_THROW(g.reshape(a, {4, 2}), dan::shape_mismatch_error);
}

TEST(Graph, SumAndMean) {
  dan::graph g;
  auto a = g.input(dan::tensor({4}, std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(g.value(g.sum(a))[0], 10.0);
  EXPECT_EQ(g.value(g.mean(a))[0], 2.5);
}

TEST(Graph, RowNormalizeMakesRowsStochastic) {
  dan::graph g;
  auto a = g.input(dan::tensor({2, 2}, std::vector<double>{1, 3, 2, 2}));
  EXPECT_EQ(g.value(g.row_normalize(a)).data,
            (std::vector<double>{0.25, 0.75, 0.5, 0.5}));
  // Zero rows stay zero (absorbing convention).
  auto z = g.input(dan::tensor({2, 2}, std::vector<double>{0, 0, 1, 1}));
  EXPECT_EQ(g.value(g.row_normalize(z)).data,
            (std::vector<double>{0, 0, 0.5, 0.5}));
  auto rect = g.input(dan::tensor({2, 3}, std::vector<double>(6, 1.0)));
  EXPECT_THROW(g.row_normalize(rect), dan::shape_mismatch_error);
}

TEST(Graph, SymNormalizeKnownValues) {
  dan::graph g;
  // Two-cycle: I + D^{-1/2} A D^{-1/2} is the all-ones matrix.
  auto a = g.input(dan::tensor({2, 2}, std::vector<double>{0, 1, 1, 0}));
  EXPECT_EQ(g.value(g.sym_normalize(a)).data,
            (std::vector<double>{1, 1, 1, 1}));
  // No edges at all: plain identity.
  auto z = g.input(dan::tensor({2, 2}, std::vector<double>{0, 0, 0, 0}));
  EXPECT_EQ(g.value(g.sym_normalize(z)).data,
            (std::vector<double>{1, 0, 0, 1}));
  // An isolated node keeps only its identity entry.
  auto one = g.input(
      dan::tensor({3, 3}, std::vector<double>{0, 1, 0, 1, 0, 0, 0, 0, 0}));
  const auto& y = g.value(g.sym_normalize(one));
  EXPECT_EQ(y.at({2, 2}), 1.0);
  EXPECT_EQ(y.at({2, 0}), 0.0);
  EXPECT_EQ(y.at({0, 1}), 1.0);
}

TEST(Graph, CausalConvWorkedExamples) {
  dan::graph g;
  // x = [1,2,3], g = [1,1], dilation 1, causal: [1, 3, 5].
  auto x3 = g.input(dan::tensor({3, 1, 1}, std::vector<double>{1, 2, 3}));
  auto k2 = g.input(dan::tensor({2, 1}, std::vector<double>{1, 1}));
  EXPECT_EQ(g.value(g.causal_conv(x3, k2, 1, true)).data,
            (std::vector<double>{1, 3, 5}));
  // x = [1,2,3,4], dilation 2, causal: [1, 2, 4, 6].
  auto x4 = g.input(dan::tensor({4, 1, 1}, std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(g.value(g.causal_conv(x4, k2, 2, true)).data,
            (std::vector<double>{1, 2, 4, 6}));
  // Valid mode drops the padded prefix.
  EXPECT_EQ(g.value(g.causal_conv(x3, k2, 1, false)).data,
            (std::vector<double>{3, 5}));
  // K = 1 is the identity in both modes. (Compare against a copy: node
  // insertion may reallocate the tape, invalidating earlier value() refs.)
  auto k1 = g.input(dan::tensor({1, 1}, std::vector<double>{1}));
  const std::vector<double> x4_data{1, 2, 3, 4};
  EXPECT_EQ(g.value(g.causal_conv(x4, k1, 3, true)).data, x4_data);
  EXPECT_EQ(g.value(g.causal_conv(x4, k1, 3, false)).data, x4_data);
}

TEST(Graph, CausalConvChannelsAreIndependent) {
  dan::graph g;
  // Two channels with distinct kernels; R plays no role in the kernel.
  auto x = g.input(dan::tensor(
      {2, 1, 2}, std::vector<double>{1, 10, 2, 20}));
  auto k = g.input(dan::tensor({2, 2}, std::vector<double>{1, 3, 2, 4}));
  // t=0: s=0 only: [1*1, 10*3]. t=1: [2*1 + 1*2, 20*3 + 10*4].
  EXPECT_EQ(g.value(g.causal_conv(x, k, 1, true)).data,
            (std::vector<double>{1, 30, 4, 100}));
}

TEST(Graph, CausalConvRejectsBadShapes) {
  dan::graph g;
  auto x = g.input(dan::tensor({3, 1, 1}, std::vector<double>{1, 2, 3}));
  auto k = g.input(dan::tensor({2, 1}, std::vector<double>{1, 1}));
  EXPECT_THROW(g.causal_conv(x, k, 0, true), dan::shape_mismatch_error);
  auto k_wide = g.input(dan::tensor({2, 2}, std::vector<double>{1, 1, 1, 1}));
  EXPECT_THROW(g.causal_conv(x, k_wide, 1, true), dan::shape_mismatch_error);
  // Valid mode requires the kernel span to fit.
  auto k4 = g.input(dan::tensor({4, 1}, std::vector<double>{1, 1, 1, 1}));
  EXPECT_THROW(g.causal_conv(x, k4, 1, false), dan::shape_mismatch_error);
  EXPECT_NO_THROW(g.causal_conv(x, k4, 1, true));
}

TEST(Backward, QuadraticGradientIsExact) {
  dan::rng r(501);
  dan::parameter p(rand_tensor(r, {3, 4}));
  dan::graph g;
  auto x = g.param(p);
  auto loss = g.sum(g.mul(x, x));
  g.backward(loss);
  for (std::size_t i = 0; i < p.value.size(); ++i)
    EXPECT_NEAR(p.grad[i], 2.0 * p.value[i], 1e-12);

  // Central differences are exact for quadratics up to roundoff.
  auto run = [&](bool with_grad) {
    dan::graph g2;
    auto x2 = g2.param(p);
    auto l = g2.sum(g2.mul(x2, x2));
    if (with_grad) g2.backward(l);
    return g2.value(l)[0];
  };
  std::vector<dan::parameter*> params{&p};
  auto rep = dan::finite_difference_check(params, run, 1e-5);
  EXPECT_LT(rep.max_rel_error, 1e-9);
  EXPECT_EQ(rep.coords_checked, 12u);
}

TEST(Backward, NonScalarLossThrows) {
  dan::parameter p(dan::tensor({2}, std::vector<double>{1, 2}));
  dan::graph g;
  auto x = g.param(p);
  EXPECT_THROW(g.backward(x), dan::non_scalar_loss_error);
}

TEST(Backward, GradAccumulatesAcrossCallsUntilZeroed) {
  dan::parameter p(dan::tensor({2}, std::vector<double>{3, 5}));
  dan::graph g;
  auto x = g.param(p);
  auto loss = g.sum(x);
  g.backward(loss);
  EXPECT_EQ(p.grad.data, (std::vector<double>{1, 1}));
  g.backward(loss);
  EXPECT_EQ(p.grad.data, (std::vector<double>{2, 2}));
  p.zero_grad();
  EXPECT_EQ(p.grad.data, (std::vector<double>{0, 0}));
}

TEST(Backward, DiamondPathsSumTheirContributions) {
  dan::parameter p(dan::tensor({2}, std::vector<double>{1, 2}));
  dan::graph g;
  auto x = g.param(p);
  auto y = g.add(x, x);  // dy/dx = 2 along two paths
  g.backward(g.sum(y));
  EXPECT_EQ(p.grad.data, (std::vector<double>{2, 2}));
}

TEST(Backward, EachPrimitiveMatchesFiniteDifferences) {
  dan::rng r(502);
  const double tol = 1e-6;

  {  // add / scale
    dan::parameter a(rand_tensor(r, {2, 3}));
    dan::parameter b(rand_tensor(r, {2, 3}));
    dan::tensor w = rand_tensor(r, {2, 3});
    auto build = [&](dan::graph& g) {
      auto y = g.scale(g.add(g.param(a), g.param(b)), 1.5);
      return g.sum(g.mul(y, g.input(w)));
    };
    EXPECT_LT(max_rel_fd({&a, &b}, build), tol) << "add/scale";
  }
  {  // sub
    dan::parameter a(rand_tensor(r, {2, 3}));
    dan::parameter b(rand_tensor(r, {2, 3}));
    dan::tensor w = rand_tensor(r, {2, 3});
    auto build = [&](dan::graph& g) {
      return g.sum(g.mul(g.sub(g.param(a), g.param(b)), g.input(w)));
    };
    EXPECT_LT(max_rel_fd({&a, &b}, build), tol) << "sub";
  }
  {  // mul
    dan::parameter a(rand_tensor(r, {2, 3}, 0.5, 1.5));
    dan::parameter b(rand_tensor(r, {2, 3}, 0.5, 1.5));
    auto build = [&](dan::graph& g) {
      return g.sum(g.mul(g.param(a), g.param(b)));
    };
    EXPECT_LT(max_rel_fd({&a, &b}, build), tol) << "mul";
  }
  {  // add_bias
    dan::parameter a(rand_tensor(r, {3, 4}));
    dan::parameter b(rand_tensor(r, {4}));
    dan::tensor w = rand_tensor(r, {3, 4});
    auto build = [&](dan::graph& g) {
      return g.sum(g.mul(g.add_bias(g.param(a), g.param(b)), g.input(w)));
    };
    EXPECT_LT(max_rel_fd({&a, &b}, build), tol) << "add_bias";
  }
  {  // matmul and transpose
    dan::parameter a(rand_tensor(r, {3, 4}));
    dan::parameter b(rand_tensor(r, {4, 2}));
    dan::tensor w = rand_tensor(r, {2, 3});
    auto build = [&](dan::graph& g) {
      auto prod = g.matmul(g.param(a), g.param(b));  // (3,2)
      return g.sum(g.mul(g.transpose(prod), g.input(w)));
    };
    EXPECT_LT(max_rel_fd({&a, &b}, build), tol) << "matmul/transpose";
  }
  {  // tanh, sigmoid
    dan::parameter a(rand_tensor(r, {2, 5}));
    auto build = [&](dan::graph& g) {
      auto x = g.param(a);
      return g.sum(g.mul(g.tanh_(x), g.sigmoid_(x)));
    };
    EXPECT_LT(max_rel_fd({&a}, build), tol) << "tanh/sigmoid";
  }
  {  // relu, inputs kept away from the kink
    dan::tensor init(
        {2, 3}, std::vector<double>{-0.9, 0.7, -0.5, 0.4, 1.2, -1.1});
    dan::parameter a(init);
    dan::tensor w = rand_tensor(r, {2, 3});
    auto build = [&](dan::graph& g) {
      return g.sum(g.mul(g.relu_(g.param(a)), g.input(w)));
    };
    EXPECT_LT(max_rel_fd({&a}, build), tol) << "relu";
  }
  {  // concat, stack, slice0, reshape
    dan::parameter a(rand_tensor(r, {2, 2}));
    dan::parameter b(rand_tensor(r, {2, 3}));
    dan::tensor w = rand_tensor(r, {2, 5});
    auto build = [&](dan::graph& g) {
      auto cat = g.concat({g.param(a), g.param(b)});
      auto st = g.stack({cat, cat});          // (2,2,5)
      auto sl = g.slice0(st, 1);              // (2,5)
      auto rs = g.reshape(sl, {5, 2});
      return g.sum(g.mul(rs, g.reshape(g.input(w), {5, 2})));
    };
    EXPECT_LT(max_rel_fd({&a, &b}, build), tol) << "concat/stack/slice";
  }
  {  // mean
    dan::parameter a(rand_tensor(r, {3, 3}));
    auto build = [&](dan::graph& g) {
      return g.mean(g.mul(g.param(a), g.param(a)));
    };
    EXPECT_LT(max_rel_fd({&a}, build), tol) << "mean";
  }
  {  // row_normalize on a strictly positive matrix
    dan::parameter a(rand_tensor(r, {3, 3}, 0.5, 2.0));
    dan::tensor w = rand_tensor(r, {3, 3});
    auto build = [&](dan::graph& g) {
      return g.sum(g.mul(g.row_normalize(g.param(a)), g.input(w)));
    };
    EXPECT_LT(max_rel_fd({&a}, build), tol) << "row_normalize";
  }
  {  // sym_normalize on a strictly positive matrix
    dan::parameter a(rand_tensor(r, {3, 3}, 0.5, 2.0));
    dan::tensor w = rand_tensor(r, {3, 3});
    auto build = [&](dan::graph& g) {
      return g.sum(g.mul(g.sym_normalize(g.param(a)), g.input(w)));
    };
    EXPECT_LT(max_rel_fd({&a}, build), tol) << "sym_normalize";
  }
  {  // causal_conv, both padding modes, dilation 2
    dan::parameter x(rand_tensor(r, {6, 2, 3}));
    dan::parameter k(rand_tensor(r, {2, 3}));
    dan::tensor w_pad = rand_tensor(r, {6, 2, 3});
    dan::tensor w_valid = rand_tensor(r, {4, 2, 3});
    auto build_pad = [&](dan::graph& g) {
      return g.sum(
          g.mul(g.causal_conv(g.param(x), g.param(k), 2, true),
                g.input(w_pad)));
    };
    EXPECT_LT(max_rel_fd({&x, &k}, build_pad), tol) << "causal_conv pad";
    auto build_valid = [&](dan::graph& g) {
      return g.sum(
          g.mul(g.causal_conv(g.param(x), g.param(k), 2, false),
                g.input(w_valid)));
    };
    EXPECT_LT(max_rel_fd({&x, &k}, build_valid), tol) << "causal_conv valid";
  }
}

TEST(Backward, SharedParameterAccumulatesOverAllUses) {
  dan::parameter p(dan::tensor({2}, std::vector<double>{2, 3}));
  dan::graph g;
  auto x1 = g.param(p);
  auto x2 = g.param(p);  // second binding of the same parameter
  g.backward(g.sum(g.mul(x1, x2)));
  // d/dp sum(p*p) = 2p via the two bindings.
  EXPECT_EQ(p.grad.data, (std::vector<double>{4, 6}));
}

TEST(Backward, UnreachedBranchesGetNoGradient) {
  dan::parameter used(dan::tensor({2}, std::vector<double>{1, 2}));
  dan::parameter unused(dan::tensor({2}, std::vector<double>{3, 4}));
  dan::graph g;
  auto a = g.param(used);
  g.param(unused);  // recorded but never consumed by the loss
  g.backward(g.sum(a));
  EXPECT_EQ(used.grad.data, (std::vector<double>{1, 1}));
  EXPECT_EQ(unused.grad.data, (std::vector<double>{0, 0}));
}

TEST(Backward, GraphResetAllowsReuse) {
  dan::parameter p(dan::tensor({2}, std::vector<double>{1, 2}));
  dan::graph g;
  g.backward(g.sum(g.param(p)));
  g.reset();
  EXPECT_EQ(g.size(), 0u);
  auto loss = g.sum(g.scale(g.param(p), 3.0));
  g.backward(loss);
  EXPECT_EQ(p.grad.data, (std::vector<double>{4, 4}));  // 1 + 3 accumulated
}

TEST(FiniteDifference, RejectsNonPositiveStep) {
  dan::parameter p(dan::tensor({1}, std::vector<double>{1.0}));
  std::vector<dan::parameter*> params{&p};
  auto run = [&](bool) { return p.value[0]; };
  EXPECT_THROW(dan::finite_difference_check(params, run, 0.0), dan::error);
  EXPECT_THROW(dan::finite_difference_check(params, run, -1e-5), dan::error);
}

TEST(FiniteDifference, ReportIdentifiesWorstCoordinate) {
  // A deliberately wrong gradient: run() never calls backward, so the
  // analytic gradient stays zero while the numeric one does not.
  dan::parameter p(dan::tensor({2}, std::vector<double>{1.0, 2.0}));
  std::vector<dan::parameter*> params{&p};
  auto run = [&](bool) { return 3.0 * p.value[0] + p.value[1]; };
  auto rep = dan::finite_difference_check(params, run, 1e-5);
  EXPECT_GT(rep.max_rel_error, 0.9);
  EXPECT_EQ(rep.coords_checked, 2u);
  EXPECT_EQ(rep.worst_param, 0u);
  EXPECT_EQ(rep.worst_coord, 0u);
  EXPECT_NEAR(rep.worst_numeric, 3.0, 1e-6);
  EXPECT_EQ(rep.worst_analytic, 0.0);
}

}  // namespace
