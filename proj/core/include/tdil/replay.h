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

#ifndef TDIL_REPLAY_H_
#define TDIL_REPLAY_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tdil/common.h"
#include "tdil/env.h"

namespace tdil {

// Bounded FIFO transition store. Sampling draws from an engine owned by the
// buffer, so draws are reproducible given the seed and insertion history.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  void Push(const Transition& t);

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  // Index 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;

  // Uniform with replacement.
  const Transition& Sample();
  Rng& rng() { return rng_; }

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t head_ = 0;  // oldest element once the ring is full
  Rng rng_;
};

struct StatePair {
  State first;
  State second;
  friend bool operator==(const StatePair&, const StatePair&) = default;
};

enum class PairLabel { kPositive, kContrastive, kReversed };

struct PairBatch {
  std::vector<StatePair> pairs;
  PairLabel label = PairLabel::kPositive;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

// (s, s') of uniformly drawn stored transitions (s, a, s').
PairBatch BuildPositiveBatch(ReplayBuffer& buffer, std::size_t n);

// Returns {contrastive, reversed}. Contrastive pairs join the head states of
// two independently drawn transitions; a draw may coincide with a valid
// transition, which is tolerated label noise. Reversed pairs are (s', s) of a
// single stored transition. With use_reversed == false the reversed batch is
// empty.
std::vector<PairBatch> BuildNegativeBatch(ReplayBuffer& buffer,
                                          std::size_t n_contrastive,
                                          std::size_t n_reversed,
                                          bool use_reversed);

}  // namespace tdil

#endif  // TDIL_REPLAY_H_
