// Copyright 2026 The weylsum Authors
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

// Deterministic sample-parallel loops and the integration-point samplers.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "weyl/maximal_operators.hpp"

namespace weyl::detail {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n). Each index owns its output slot, so results do
/// not depend on the schedule. The first exception is rethrown.
template <class Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
  const int workers = static_cast<int>(std::min<std::int64_t>(resolve_threads(threads), n));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::int64_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

/// Draws points of T^k whose coordinates have the given degrees. The
/// importance variant is a half/half mixture of the uniform law and a law
/// concentrated at a/q (q <= 32) with Cauchy-shaped offsets of width
/// 1/(q N^deg); the returned weight is the reciprocal mixture density.
class PointSampler {
 public:
  PointSampler(std::vector<int> degrees, std::int64_t N, Sampler kind);

  double draw(std::mt19937_64& rng, std::vector<double>& point) const;
  double density(const std::vector<double>& point) const;

 private:
  static constexpr int kMaxDenominator = 32;
  std::vector<int> degrees_;
  Sampler kind_;
  std::vector<double> q_cdf_;
  std::vector<double> q_prob_;
  std::vector<double> spread_;  // N^deg per coordinate
};

}  // namespace weyl::detail
