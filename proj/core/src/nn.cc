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

#include <bit>
#include <cmath>
#include <sstream>

namespace tdil {
namespace {

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

DenseNet::DenseNet(std::vector<int> layer_dims,
                   OutputActivation output_activation)
    : dims_(std::move(layer_dims)), output_(output_activation) {
  if (dims_.size() < 2) throw Error("a network needs at least two layer dims");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    if (dims_[l] <= 0 || dims_[l + 1] <= 0) {
      throw Error("layer dims must be positive");
    }
    offsets_.push_back(total);
    total += std::size_t(dims_[l + 1]) * (dims_[l] + 1);
  }
  params_.assign(total, 0.0);
}

DenseNet DenseNet::GlorotUniform(std::vector<int> layer_dims,
                                 OutputActivation output_activation,
                                 Rng& rng) {
  DenseNet net(std::move(layer_dims), output_activation);
  for (int l = 0; l < net.num_layers(); ++l) {
    const double limit =
        std::sqrt(6.0 / double(net.dims_[l] + net.dims_[l + 1]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto w = net.mutable_weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    }
  }
  return net;
}

Eigen::Map<const Eigen::MatrixXd> DenseNet::weight(int layer) const {
  return {params_.data() + WeightOffset(layer), dims_[layer + 1], dims_[layer]};
}

Eigen::Map<Eigen::MatrixXd> DenseNet::mutable_weight(int layer) {
  return {params_.data() + WeightOffset(layer), dims_[layer + 1], dims_[layer]};
}

Eigen::Map<const Eigen::VectorXd> DenseNet::bias(int layer) const {
  return {params_.data() + BiasOffset(layer), dims_[layer + 1]};
}

Eigen::Map<Eigen::VectorXd> DenseNet::mutable_bias(int layer) {
  return {params_.data() + BiasOffset(layer), dims_[layer + 1]};
}

Eigen::VectorXd DenseNet::Forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim()) {
    throw Error("input dimension mismatch: expected " +
                std::to_string(input_dim()) + ", got " +
                std::to_string(x.size()));
  }
  Eigen::MatrixXd in =
      Eigen::Map<const Eigen::VectorXd>(x.data(), Eigen::Index(x.size()));
  return Forward(in).col(0);
}

Eigen::MatrixXd DenseNet::Forward(const Eigen::MatrixXd& inputs) const {
  return Forward(inputs, nullptr);
}

Eigen::MatrixXd DenseNet::Forward(const Eigen::MatrixXd& inputs,
                                  ForwardCache* cache) const {
  if (inputs.rows() != input_dim()) {
    throw Error("input dimension mismatch: expected " +
                std::to_string(input_dim()) + ", got " +
                std::to_string(inputs.rows()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->preact.clear();
  }
  Eigen::MatrixXd a = inputs;
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::MatrixXd z = weight(l) * a;
    z.colwise() += bias(l);
    if (cache) {
      cache->inputs.push_back(a);
      cache->preact.push_back(z);
    }
    if (l + 1 < num_layers()) {
      a = z.cwiseMax(0.0);
    } else if (output_ == OutputActivation::kSigmoid) {
      a = z.unaryExpr([](double v) { return Sigmoid(v); });
    } else {
      a = std::move(z);
    }
  }
  if (cache) cache->output = a;
  return a;
}

std::vector<double> DenseNet::Backward(
    const ForwardCache& cache, const Eigen::MatrixXd& grad_output) const {
  if (grad_output.rows() != output_dim() ||
      grad_output.cols() != cache.output.cols()) {
    throw Error("upstream gradient shape mismatch");
  }
  if (output_ == OutputActivation::kSigmoid) {
    const Eigen::MatrixXd& y = cache.output;
    return BackwardFromPreactivation(
        cache, grad_output.cwiseProduct(y.cwiseProduct(
                   (1.0 - y.array()).matrix())));
  }
  return BackwardFromPreactivation(cache, grad_output);
}

std::vector<double> DenseNet::BackwardFromPreactivation(
    const ForwardCache& cache, const Eigen::MatrixXd& grad_preact) const {
  if (static_cast<int>(cache.inputs.size()) != num_layers()) {
    throw Error("forward cache does not match the network");
  }
  if (grad_preact.rows() != output_dim() ||
      grad_preact.cols() != cache.output.cols()) {
    throw Error("upstream gradient shape mismatch");
  }
  std::vector<double> grads(params_.size(), 0.0);
  Eigen::MatrixXd delta = grad_preact;
  for (int l = num_layers() - 1; l >= 0; --l) {
    Eigen::Map<Eigen::MatrixXd> gw(grads.data() + WeightOffset(l),
                                   dims_[l + 1], dims_[l]);
    Eigen::Map<Eigen::VectorXd> gb(grads.data() + BiasOffset(l), dims_[l + 1]);
    gw.noalias() = delta * cache.inputs[l].transpose();
    gb = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = weight(l).transpose() * delta;
      delta = back.cwiseProduct(
          (cache.preact[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return grads;
}

std::vector<double> DenseNet::Backward(
    std::span<const double> x, std::span<const double> grad_output) const {
  if (static_cast<int>(x.size()) != input_dim() ||
      static_cast<int>(grad_output.size()) != output_dim()) {
    throw Error("backward shape mismatch");
  }
  ForwardCache cache;
  Eigen::MatrixXd in =
      Eigen::Map<const Eigen::VectorXd>(x.data(), Eigen::Index(x.size()));
  Forward(in, &cache);
  Eigen::MatrixXd g = Eigen::Map<const Eigen::VectorXd>(
      grad_output.data(), Eigen::Index(grad_output.size()));
  return Backward(cache, g);
}

bool DenseNet::AllFinite() const {
  for (double p : params_) {
    if (!std::isfinite(p)) return false;
  }
  return true;
}

Adam::Adam(std::size_t num_params, AdamConfig config)
    : config_(config), m_(num_params, 0.0), v_(num_params, 0.0) {}

void Adam::Step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw Error("optimizer shape mismatch: state has " +
                std::to_string(m_.size()) + " entries, got " +
                std::to_string(params.size()) + " params and " +
                std::to_string(grads.size()) + " grads");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      std::ostringstream msg;
      msg << "non-finite gradient " << grads[i] << " at parameter " << i
          << " (optimizer step " << step_ << ")";
      throw NumericError(msg.str());
    }
  }
  ++step_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, double(step_));
  const double c2 = 1.0 - std::pow(b2, double(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i] * grads[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
  }
}

void SoftUpdate(std::span<double> target, std::span<const double> online,
                double lambda) {
  if (target.size() != online.size()) {
    throw Error("soft update between mismatched parameter vectors");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error("soft update coefficient must lie in [0, 1]");
  }
  for (std::size_t i = 0; i < target.size(); ++i) {
    target[i] = (1.0 - lambda) * online[i] + lambda * target[i];
  }
}

void SoftUpdate(DenseNet& target, const DenseNet& online, double lambda) {
  if (!target.SameArchitecture(online)) {
    throw Error("soft update between different architectures");
  }
  SoftUpdate(target.params(), online.params(), lambda);
}

void PutU32(std::string* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(char((v >> (8 * i)) & 0xff));
}

void PutU64(std::string* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out->push_back(char((v >> (8 * i)) & 0xff));
}

void PutF64(std::string* out, double v) {
  PutU64(out, std::bit_cast<std::uint64_t>(v));
}

namespace {

std::uint64_t GetLe(std::string_view* in, int bytes) {
  if (in->size() < std::size_t(bytes)) throw DataError("truncated snapshot");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= std::uint64_t(static_cast<unsigned char>((*in)[i])) << (8 * i);
  }
  in->remove_prefix(bytes);
  return v;
}

}  // namespace

std::uint32_t GetU32(std::string_view* in) {
  return static_cast<std::uint32_t>(GetLe(in, 4));
}
std::uint64_t GetU64(std::string_view* in) { return GetLe(in, 8); }
double GetF64(std::string_view* in) {
  return std::bit_cast<double>(GetLe(in, 8));
}

std::string SerializeNet(const DenseNet& net) {
  std::string out = "TDNN";
  PutU32(&out, 1);
  PutU32(&out, static_cast<std::uint32_t>(net.layer_dims().size()));
  for (int d : net.layer_dims()) PutU32(&out, static_cast<std::uint32_t>(d));
  out.push_back(char(0));  // relu
  out.push_back(char(net.output_activation() == OutputActivation::kSigmoid ? 0 : 1));
  PutU64(&out, net.num_params());
  for (double p : net.params()) PutF64(&out, p);
  return out;
}

DenseNet DeserializeNet(std::string_view* bytes) {
  if (bytes->substr(0, 4) != "TDNN") throw DataError("not a network snapshot");
  bytes->remove_prefix(4);
  if (GetU32(bytes) != 1) throw DataError("unsupported snapshot version");
  const std::uint32_t n = GetU32(bytes);
  if (n < 2 || n > 64) throw DataError("implausible layer count in snapshot");
  std::vector<int> dims;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t d = GetU32(bytes);
    if (d == 0 || d > (1u << 20)) throw DataError("implausible layer width");
    dims.push_back(int(d));
  }
  if (bytes->size() < 2) throw DataError("truncated snapshot");
  const int hidden = (*bytes)[0];
  const int output = (*bytes)[1];
  bytes->remove_prefix(2);
  if (hidden != 0 || (output != 0 && output != 1)) {
    throw DataError("unknown activation code in snapshot");
  }
  DenseNet net(dims, output == 0 ? OutputActivation::kSigmoid
                                 : OutputActivation::kIdentity);
  if (GetU64(bytes) != net.num_params()) {
    throw DataError("parameter count does not match the layer dims");
  }
  for (double& p : net.params()) p = GetF64(bytes);
  return net;
}

DenseNet DeserializeNet(std::string_view bytes) {
  DenseNet net = DeserializeNet(&bytes);
  if (!bytes.empty()) throw DataError("trailing bytes after network snapshot");
  return net;
}

}  // namespace tdil
