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

#include "tdil/replay.h"

namespace tdil {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  if (capacity == 0) throw Error("replay capacity must be positive");
}

void ReplayBuffer::Push(const Transition& t) {
  if (items_.size() < capacity_) {
    items_.push_back(t);
    return;
  }
  items_[head_] = t;
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw Error("replay index out of range");
  return items_[(head_ + i) % items_.size()];
}

const Transition& ReplayBuffer::Sample() {
  if (items_.empty()) throw Error("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  return items_[pick(rng_)];
}

PairBatch BuildPositiveBatch(ReplayBuffer& buffer, std::size_t n) {
  if (buffer.empty()) throw Error("positive batch from empty replay buffer");
  PairBatch batch;
  batch.label = PairLabel::kPositive;
  batch.pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Transition& t = buffer.Sample();
    batch.pairs.push_back({t.s, t.next});
  }
  return batch;
}

std::vector<PairBatch> BuildNegativeBatch(ReplayBuffer& buffer,
                                          std::size_t n_contrastive,
                                          std::size_t n_reversed,
                                          bool use_reversed) {
  if (buffer.empty()) throw Error("negative batch from empty replay buffer");
  std::vector<PairBatch> out(2);
  out[0].label = PairLabel::kContrastive;
  out[1].label = PairLabel::kReversed;
  out[0].pairs.reserve(n_contrastive);
  for (std::size_t i = 0; i < n_contrastive; ++i) {
    const State first = buffer.Sample().s;
    const State second = buffer.Sample().s;
    out[0].pairs.push_back({first, second});
  }
  if (use_reversed) {
    out[1].pairs.reserve(n_reversed);
    for (std::size_t i = 0; i < n_reversed; ++i) {
      const Transition& t = buffer.Sample();
      out[1].pairs.push_back({t.next, t.s});
    }
  }
  return out;
}

}  // namespace tdil
