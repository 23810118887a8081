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

#ifndef TDIL_NN_H_
#define TDIL_NN_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tdil/common.h"

namespace tdil {

enum class HiddenActivation { kRelu };
enum class OutputActivation { kSigmoid, kIdentity };

// Intermediate values of a batched forward pass, consumed by Backward.
// Samples are columns.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input of each layer
  std::vector<Eigen::MatrixXd> preact;  // pre-activation of each layer
  Eigen::MatrixXd output;
};

// Fully connected feed-forward network with relu hidden layers.
//
// All parameters live in one contiguous buffer so optimizers, soft updates
// and serialization operate on flat spans. Layer l stores its weight matrix
// (out x in, column-major) followed by its bias vector; gradients use the
// same layout.
class DenseNet {
 public:
  DenseNet() = default;
  // Zero-initialized parameters.
  DenseNet(std::vector<int> layer_dims, OutputActivation output_activation);

  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static DenseNet GlorotUniform(std::vector<int> layer_dims,
                                OutputActivation output_activation, Rng& rng);

  const std::vector<int>& layer_dims() const { return dims_; }
  int num_layers() const { return static_cast<int>(dims_.size()) - 1; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  OutputActivation output_activation() const { return output_; }
  HiddenActivation hidden_activation() const { return HiddenActivation::kRelu; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t num_params() const { return params_.size(); }

  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<Eigen::MatrixXd> mutable_weight(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
  Eigen::Map<Eigen::VectorXd> mutable_bias(int layer);

  Eigen::VectorXd Forward(std::span<const double> x) const;
  // `inputs` is input_dim x batch.
  Eigen::MatrixXd Forward(const Eigen::MatrixXd& inputs) const;
  Eigen::MatrixXd Forward(const Eigen::MatrixXd& inputs,
                          ForwardCache* cache) const;

  // Parameter gradients (flat layout, summed over the batch) given the
  // gradient of a scalar loss with respect to the network output.
  std::vector<double> Backward(const ForwardCache& cache,
                               const Eigen::MatrixXd& grad_output) const;
  // Same, starting from the gradient with respect to the output layer's
  // pre-activation. Avoids the vanishing sigmoid derivative when the loss
  // gradient is known in closed form at the logit.
  std::vector<double> BackwardFromPreactivation(
      const ForwardCache& cache, const Eigen::MatrixXd& grad_preact) const;
  // Single-sample convenience wrapper.
  std::vector<double> Backward(std::span<const double> x,
                               std::span<const double> grad_output) const;

  bool SameArchitecture(const DenseNet& other) const {
    return dims_ == other.dims_ && output_ == other.output_;
  }
  bool AllFinite() const;

  friend bool operator==(const DenseNet& a, const DenseNet& b) {
    return a.SameArchitecture(b) && a.params_ == b.params_;
  }

 private:
  std::size_t WeightOffset(int layer) const { return offsets_[layer]; }
  std::size_t BiasOffset(int layer) const {
    return offsets_[layer] + std::size_t(dims_[layer + 1]) * dims_[layer];
  }

  std::vector<int> dims_;
  OutputActivation output_ = OutputActivation::kIdentity;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam moment accumulators for a flat parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t num_params, AdamConfig config);

  // Throws NumericError (naming the first offending index) on non-finite
  // gradients; parameters are left untouched in that case.
  void Step(std::span<double> params, std::span<const double> grads);

  const AdamConfig& config() const { return config_; }
  std::int64_t step_count() const { return step_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t step_ = 0;
};

// target <- (1 - lambda) * online + lambda * target, coordinate-wise.
void SoftUpdate(std::span<double> target, std::span<const double> online,
                double lambda);
void SoftUpdate(DenseNet& target, const DenseNet& online, double lambda);

// Binary snapshot: "TDNN", u32 version, u32 number of dims, u32 dims...,
// u8 hidden activation, u8 output activation, u64 parameter count, then the
// flat parameters as little-endian IEEE-754 doubles.
std::string SerializeNet(const DenseNet& net);
DenseNet DeserializeNet(std::string_view bytes);
// Reads one snapshot from the front of `bytes` and advances it.
DenseNet DeserializeNet(std::string_view* bytes);

// Little-endian primitives shared by the snapshot formats.
void PutU32(std::string* out, std::uint32_t v);
void PutU64(std::string* out, std::uint64_t v);
void PutF64(std::string* out, double v);
std::uint32_t GetU32(std::string_view* in);
std::uint64_t GetU64(std::string_view* in);
double GetF64(std::string_view* in);

}  // namespace tdil

#endif  // TDIL_NN_H_
