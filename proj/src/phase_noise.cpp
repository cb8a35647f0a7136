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

#include "cvdistill/phase_noise.hpp"

#include <cmath>

#include "cvdistill/errors.hpp"

namespace cvdistill {

PhaseNoiseSpec PhaseNoiseSpec::uniform(double sigma_pn) {
    PhaseNoiseSpec spec;
    spec.sigma.fill(sigma_pn);
    return spec;
}

void PhaseNoiseSpec::validate() const {
    for (const double s : sigma) {
        if (!std::isfinite(s) || s < 0.0) {
            throw InvalidConfig("phase noise sigma must be finite and non-negative");
        }
    }
}

NoiseSample sample_phases(const PhaseNoiseSpec& spec, RandomStream& rng) {
    NoiseSample out;
    for (std::size_t k = 0; k < kChannelCount; ++k) {
        out.theta[k] = spec.sigma[k] * rng.normal();
    }
    return out;
}

PhaseAveragedMoments phase_averaged_moments(double var_x, double var_p, double cov_xp, double sigma) {
    // Under X' = X cos + P sin:
    //   Var(X') = m + d cos 2t + c sin 2t,  Var(P') = m - d cos 2t - c sin 2t,
    //   Cov(X', P') = -d sin 2t + c cos 2t,
    // with m = (vx + vp)/2, d = (vx - vp)/2, c = cov_xp. E[sin 2t] = 0.
    if (!std::isfinite(sigma) || sigma < 0.0) {
        throw InvalidConfig("phase noise sigma must be finite and non-negative");
    }
    const double coh1 = std::exp(-0.5 * sigma * sigma);
    const double coh2 = std::exp(-2.0 * sigma * sigma);
    const double mid = 0.5 * (var_x + var_p);
    const double half_diff = 0.5 * (var_x - var_p);
    return PhaseAveragedMoments{
        .var_x = mid + half_diff * coh2,
        .var_p = mid - half_diff * coh2,
        .cov_xp = cov_xp * coh2,
        .coh1 = coh1,
        .coh2 = coh2,
    };
}

}  // namespace cvdistill
