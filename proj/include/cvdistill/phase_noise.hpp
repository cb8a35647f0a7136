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

// Gaussian phase diffusion on the four transmission channels.

#include <array>
#include <cstddef>

#include "cvdistill/random_stream.hpp"

namespace cvdistill {

/// Channel order used throughout: A1, B1, A2, B2.
inline constexpr std::size_t kChannelCount = 4;

/// Standard deviation (radians) of the phase noise on each channel.
struct PhaseNoiseSpec {
    std::array<double, kChannelCount> sigma{};

    /// All four channels share one strength.
    static PhaseNoiseSpec uniform(double sigma_pn);

    /// Throws InvalidConfig unless every sigma is finite and >= 0.
    void validate() const;
};

/// One draw of the four channel phases, in radians.
struct NoiseSample {
    std::array<double, kChannelCount> theta{};
};

/// theta_k ~ N(0, sigma_k^2), independent. Always consumes four normals so the
/// stream position does not depend on sigma.
NoiseSample sample_phases(const PhaseNoiseSpec& spec, RandomStream& rng);

/// Second moments of a single mode averaged over a rotation theta ~ N(0, sigma^2).
struct PhaseAveragedMoments {
    double var_x;
    double var_p;
    double cov_xp;
    /// E[cos theta] = exp(-sigma^2 / 2); scales correlations with unrotated modes.
    double coh1;
    /// E[cos 2 theta] = exp(-2 sigma^2).
    double coh2;
};

PhaseAveragedMoments phase_averaged_moments(double var_x, double var_p, double cov_xp, double sigma);

}  // namespace cvdistill
