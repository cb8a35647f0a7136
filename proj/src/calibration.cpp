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

#include "cvdistill/calibration.hpp"

#include <cmath>
#include <string>

#include "cvdistill/errors.hpp"

namespace cvdistill {

double noiseless_total_variance(const ProtocolConfig& cfg) {
    ProtocolConfig c = cfg;
    c.sigma_pn = 0.0;
    c.sigma_per_channel.reset();
    const GaussianState state = build_initial_state(c);
    const Eigen::MatrixXd& g = state.cov();
    const auto xa = x_index(kModeA1), pa = p_index(kModeA1);
    const auto xb = x_index(kModeB1), pb = p_index(kModeB1);
    const double xplus = g(xa, xa) + g(xb, xb) + 2.0 * g(xa, xb);
    const double pminus = g(pa, pa) + g(pb, pb) - 2.0 * g(pa, pb);
    return (xplus + pminus) / (4.0 * kVacuumVariance);
}

double calibrate_eta(double target, const ProtocolConfig& cfg) {
    constexpr double kTolerance = 1e-4;
    ProtocolConfig c = cfg;
    auto total_variance_at = [&c](double eta) {
        c.eta = eta;
        return noiseless_total_variance(c);
    };
    // I(eta) decreases from 1 (eta -> 0) to I(1).
    const double best = total_variance_at(1.0);
    if (!std::isfinite(target) || target >= 1.0 || target < best - kTolerance) {
        throw InvalidConfig("calibrate_eta: target total variance " + std::to_string(target) +
                            " unreachable; eta in (0, 1] covers [" + std::to_string(best) + ", 1)");
    }
    if (target <= best) return 1.0;

    double lo = 0.0;  // I(lo) > target
    double hi = 1.0;  // I(hi) <= target
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (total_variance_at(mid) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

}  // namespace cvdistill
