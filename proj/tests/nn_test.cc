// Copyright 2026 The tdil Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "tdil/nn.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

namespace tdil {
namespace {

// Scalar probe L(theta) = sum_k g_k * f(x_k; theta)_k over a batch.
double Probe(const DenseNet& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& g) {
  return (net.Forward(x).array() * g.array()).sum();
}

double MaxRelativeError(DenseNet net, const Eigen::MatrixXd& x,
                        const Eigen::MatrixXd& g) {
  ForwardCache cache;
  net.Forward(x, &cache);
  const std::vector<double> analytic = net.Backward(cache, g);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < net.num_params(); ++i) {
    const double saved = net.params()[i];
    net.params()[i] = saved + h;
    const double up = Probe(net, x, g);
    net.params()[i] = saved - h;
    const double down = Probe(net, x, g);
    net.params()[i] = saved;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
  }
  return worst;
}

TEST(DenseNetTest, ZeroSigmoidNetOutputsOneHalf) {
  const DenseNet net({3, 5, 1}, OutputActivation::kSigmoid);
  const std::vector<double> x = {0.3, -2.0, 7.0};
  EXPECT_EQ(net.Forward(x)(0), 0.5);
}

TEST(DenseNetTest, IdentityLayerPassesInputThrough) {
  DenseNet net({3, 3}, OutputActivation::kIdentity);
  net.mutable_weight(0) = Eigen::MatrixXd::Identity(3, 3);
  const std::vector<double> x = {0.25, -1.5, 4.0};
  const Eigen::VectorXd y = net.Forward(x);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(y(i), x[i]);
}

TEST(DenseNetTest, ReluZeroesNegativeHiddenUnits) {
  DenseNet net({1, 2, 1}, OutputActivation::kIdentity);
  net.mutable_weight(0) << 1.0, -1.0;
  net.mutable_weight(1) << 1.0, 1.0;
  EXPECT_DOUBLE_EQ(net.Forward(std::vector<double>{3.0})(0), 3.0);
  EXPECT_DOUBLE_EQ(net.Forward(std::vector<double>{-2.0})(0), 2.0);
}

TEST(DenseNetTest, SeededInitIsDeterministic) {
  Rng a(11), b(11), c(12);
  const DenseNet na = DenseNet::GlorotUniform({2, 8, 1}, OutputActivation::kSigmoid, a);
  const DenseNet nb = DenseNet::GlorotUniform({2, 8, 1}, OutputActivation::kSigmoid, b);
  const DenseNet nc = DenseNet::GlorotUniform({2, 8, 1}, OutputActivation::kSigmoid, c);
  EXPECT_EQ(na, nb);
  EXPECT_FALSE(na == nc);
  const std::vector<double> x = {0.1, 0.9};
  EXPECT_EQ(na.Forward(x)(0), nb.Forward(x)(0));
  const double limit = std::sqrt(6.0 / (2 + 8));
  for (int r = 0; r < 8; ++r) {
    for (int k = 0; k < 2; ++k) EXPECT_LE(std::abs(na.weight(0)(r, k)), limit);
  }
  EXPECT_TRUE(na.bias(0).isZero());
}

TEST(DenseNetTest, BatchForwardMatchesColumns) {
  Rng rng(3);
  const DenseNet net = DenseNet::GlorotUniform({2, 6, 6, 1}, OutputActivation::kSigmoid, rng);
  Eigen::MatrixXd x(2, 4);
  x << 0.1, 0.5, -1.0, 2.0, 0.7, -0.3, 0.0, 1.0;
  const Eigen::MatrixXd y = net.Forward(x);
  for (int j = 0; j < 4; ++j) {
    const std::vector<double> col = {x(0, j), x(1, j)};
    EXPECT_DOUBLE_EQ(y(0, j), net.Forward(col)(0));
  }
  EXPECT_THROW(net.Forward(std::vector<double>{1.0}), Error);
}

TEST(BackwardTest, MatchesCentralDifferencesOnTwoFourOne) {
  for (OutputActivation act : {OutputActivation::kSigmoid, OutputActivation::kIdentity}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng(seed);
      DenseNet net = DenseNet::GlorotUniform({2, 4, 1}, act, rng);
      std::uniform_real_distribution<double> u(-0.5, 0.5);
      for (double& p : net.params()) p += u(rng);  // nonzero biases too
      Eigen::MatrixXd x(2, 3), g(1, 3);
      for (int j = 0; j < 3; ++j) {
        x(0, j) = 2 * u(rng);
        x(1, j) = 2 * u(rng);
        g(0, j) = 1.0 + u(rng);
      }
      EXPECT_LE(MaxRelativeError(net, x, g), 1e-4) << "seed " << seed;
    }
  }
}

TEST(BackwardTest, MatchesCentralDifferencesOnDeeperNet) {
  Rng rng(21);
  DenseNet net = DenseNet::GlorotUniform({4, 16, 16, 3}, OutputActivation::kIdentity, rng);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& p : net.params()) p += 0.1 * n(rng);
  Eigen::MatrixXd x(4, 5), g(3, 5);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  for (int i = 0; i < g.size(); ++i) g.data()[i] = n(rng);
  EXPECT_LE(MaxRelativeError(net, x, g), 1e-4);
}

TEST(BackwardTest, ZeroUpstreamGivesZeroGradient) {
  Rng rng(1);
  const DenseNet net = DenseNet::GlorotUniform({2, 4, 1}, OutputActivation::kSigmoid, rng);
  const std::vector<double> x = {0.3, 0.4};
  const std::vector<double> g = {0.0};
  for (double v : net.Backward(x, g)) EXPECT_EQ(v, 0.0);
}

TEST(BackwardTest, LinearInUpstreamGradient) {
  Rng rng(2);
  const DenseNet net = DenseNet::GlorotUniform({2, 4, 1}, OutputActivation::kSigmoid, rng);
  const std::vector<double> x = {0.3, -0.4};
  const std::vector<double> one = net.Backward(x, std::vector<double>{0.7});
  const std::vector<double> two = net.Backward(x, std::vector<double>{1.4});
  ASSERT_EQ(one.size(), two.size());
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_DOUBLE_EQ(two[i], 2 * one[i]);
}

TEST(BackwardTest, BatchGradientIsSumOfSamples) {
  Rng rng(4);
  const DenseNet net = DenseNet::GlorotUniform({2, 5, 1}, OutputActivation::kSigmoid, rng);
  Eigen::MatrixXd x(2, 3), g(1, 3);
  x << 0.1, -0.2, 0.9, 0.4, 0.5, -0.6;
  g << 1.0, -2.0, 0.5;
  ForwardCache cache;
  net.Forward(x, &cache);
  const std::vector<double> batch = net.Backward(cache, g);
  std::vector<double> sum(net.num_params(), 0.0);
  for (int j = 0; j < 3; ++j) {
    const std::vector<double> part = net.Backward(
        std::vector<double>{x(0, j), x(1, j)}, std::vector<double>{g(0, j)});
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += part[i];
  }
  for (std::size_t i = 0; i < sum.size(); ++i) EXPECT_NEAR(batch[i], sum[i], 1e-12);
}

TEST(BackwardTest, PreactivationEntryAgreesWithChainRule) {
  Rng rng(6);
  const DenseNet net = DenseNet::GlorotUniform({2, 4, 1}, OutputActivation::kSigmoid, rng);
  Eigen::MatrixXd x(2, 2), g(1, 2);
  x << 0.2, -0.7, 0.1, 0.3;
  g << 0.9, -1.1;
  ForwardCache cache;
  const Eigen::MatrixXd y = net.Forward(x, &cache);
  const Eigen::MatrixXd gz = (g.array() * y.array() * (1.0 - y.array())).matrix();
  const std::vector<double> a = net.Backward(cache, g);
  const std::vector<double> b = net.BackwardFromPreactivation(cache, gz);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
}

TEST(AdamTest, ZeroGradientLeavesParameters) {
  std::vector<double> p = {1.0, -2.0};
  Adam adam(2, AdamConfig{});
  for (int i = 0; i < 10; ++i) adam.Step(p, std::vector<double>{0.0, 0.0});
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0}));
  EXPECT_EQ(adam.step_count(), 10);
}

TEST(AdamTest, ConstantGradientDescendsMonotonically) {
  std::vector<double> p = {0.0};
  Adam adam(1, AdamConfig{0.01});
  double last = p[0];
  for (int i = 0; i < 100; ++i) {
    adam.Step(p, std::vector<double>{3.0});
    EXPECT_LT(p[0], last);
    last = p[0];
  }
  // Bias-corrected Adam moves by the learning rate per step on a constant
  // gradient.
  EXPECT_NEAR(p[0], -1.0, 1e-6);
}

TEST(AdamTest, RejectsNonFiniteGradientsWithoutTouchingParameters) {
  std::vector<double> p = {1.0, 2.0};
  Adam adam(2, AdamConfig{});
  EXPECT_THROW(adam.Step(p, std::vector<double>{0.1, NAN}), NumericError);
  EXPECT_THROW(adam.Step(p, std::vector<double>{INFINITY, 0.0}), NumericError);
  EXPECT_EQ(p, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(adam.step_count(), 0);
  EXPECT_THROW(adam.Step(p, std::vector<double>{0.1}), Error);
}

TEST(AdamTest, FitsSeparableLogisticRegression) {
  // y = 1 iff x > 0.5; a steep logistic curve through 0.5 separates it.
  DenseNet net({1, 1}, OutputActivation::kSigmoid);
  Adam adam(net.num_params(), AdamConfig{0.1});
  Eigen::MatrixXd x(1, 8);
  x << 0.0, 0.1, 0.2, 0.3, 0.7, 0.8, 0.9, 1.0;
  const Eigen::RowVectorXd y = (x.array() > 0.5).cast<double>().matrix();
  auto loss = [&] {
    const Eigen::MatrixXd p = net.Forward(x);
    double l = 0.0;
    for (int j = 0; j < 8; ++j) l -= y(j) * std::log(p(0, j)) + (1 - y(j)) * std::log(1 - p(0, j));
    return l / 8.0;
  };
  EXPECT_NEAR(loss(), std::log(2.0), 1e-12);
  for (int step = 0; step < 500; ++step) {
    ForwardCache cache;
    const Eigen::MatrixXd p = net.Forward(x, &cache);
    const Eigen::MatrixXd gz = (p - y) / 8.0;
    adam.Step(net.params(), net.BackwardFromPreactivation(cache, gz));
  }
  EXPECT_LT(loss(), 0.1);
}

TEST(SoftUpdateTest, EndpointsAreExact) {
  Rng rng(8);
  const DenseNet online = DenseNet::GlorotUniform({3, 4, 1}, OutputActivation::kSigmoid, rng);
  const DenseNet start = DenseNet::GlorotUniform({3, 4, 1}, OutputActivation::kSigmoid, rng);
  DenseNet copy = start;
  SoftUpdate(copy, online, 0.0);
  EXPECT_EQ(copy, online);
  DenseNet frozen = start;
  SoftUpdate(frozen, online, 1.0);
  EXPECT_EQ(frozen, start);
}

TEST(SoftUpdateTest, SmallLambdaTracksOnline) {
  Rng rng(9);
  const DenseNet online = DenseNet::GlorotUniform({3, 4, 1}, OutputActivation::kSigmoid, rng);
  const DenseNet start = DenseNet::GlorotUniform({3, 4, 1}, OutputActivation::kSigmoid, rng);
  DenseNet target = start;
  const double lambda = 1e-4;
  SoftUpdate(target, online, lambda);
  for (std::size_t i = 0; i < target.num_params(); ++i) {
    const double gap = std::abs(online.params()[i] - start.params()[i]);
    EXPECT_LE(std::abs(target.params()[i] - online.params()[i]),
              lambda * gap * (1 + 1e-12) + 1e-300);
  }
}

TEST(SoftUpdateTest, RejectsMismatchesAndBadCoefficients) {
  DenseNet a({2, 3, 1}, OutputActivation::kSigmoid);
  const DenseNet b({2, 4, 1}, OutputActivation::kSigmoid);
  EXPECT_THROW(SoftUpdate(a, b, 0.5), Error);
  const DenseNet c({2, 3, 1}, OutputActivation::kSigmoid);
  EXPECT_THROW(SoftUpdate(a, c, 1.5), Error);
  EXPECT_THROW(SoftUpdate(a, c, -0.1), Error);
}

TEST(SerializationTest, RoundTripIsBitExact) {
  Rng rng(10);
  const DenseNet net = DenseNet::GlorotUniform({4, 7, 2}, OutputActivation::kIdentity, rng);
  const std::string bytes = SerializeNet(net);
  EXPECT_EQ(bytes.substr(0, 4), "TDNN");
  const DenseNet back = DeserializeNet(bytes);
  EXPECT_EQ(back, net);
  EXPECT_EQ(back.output_activation(), OutputActivation::kIdentity);
  EXPECT_EQ(SerializeNet(back), bytes);
}

TEST(SerializationTest, RejectsCorruptInput) {
  const DenseNet net({2, 3, 1}, OutputActivation::kSigmoid);
  const std::string bytes = SerializeNet(net);
  EXPECT_THROW(DeserializeNet(std::string_view(bytes).substr(0, bytes.size() - 1)), DataError);
  EXPECT_THROW(DeserializeNet(bytes + "x"), DataError);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(DeserializeNet(bad), DataError);
}

}  // namespace
}  // namespace tdil
