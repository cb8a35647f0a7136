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

#include "cvdistill/protocol.hpp"

namespace cvdistill {

/// Exact Duan total variance of one undisturbed copy (no phase noise, no
/// distillation) at cfg's squeezing and efficiency, from its covariance matrix.
double noiseless_total_variance(const ProtocolConfig& cfg);

/// Bisection on eta in (0, 1] so that noiseless_total_variance matches
/// target_total_variance within 1e-4 (bisection runs to 1e-10). Squeezing
/// levels come from cfg. Throws InvalidConfig when the target lies outside
/// [I(eta = 1), 1), the range reachable with eta in (0, 1].
double calibrate_eta(double target_total_variance, const ProtocolConfig& cfg = {});

}  // namespace cvdistill
