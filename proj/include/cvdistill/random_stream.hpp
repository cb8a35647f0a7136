// Copyright 2026 The cvdistill Authors
//
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

#pragma once

#include <cstdint>
#include <random>

namespace cvdistill {

/// Per-worker random stream. Never shared between threads.
///
/// Streams for parallel Monte Carlo are derived from (seed, block index) so
/// that shot block k always sees the same numbers no matter which worker runs
/// it or how many workers exist.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : RandomStream(seed, 0, 0) {}

    static RandomStream for_block(std::uint64_t seed, std::uint64_t block) {
        return RandomStream(seed, block, 1);
    }

    /// Standard normal variate.
    double normal() { return normal_(engine_); }

    /// Uniform variate in [0, 1).
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    std::mt19937_64& engine() { return engine_; }

  private:
    RandomStream(std::uint64_t seed, std::uint64_t block, std::uint32_t tag) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), tag};
        engine_.seed(seq);
    }

    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace cvdistill
