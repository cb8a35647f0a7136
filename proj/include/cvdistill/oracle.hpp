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

// Deterministic ground truth for the Monte Carlo pipeline.
//
// For fixed channel phases the post-distillation state is Gaussian, so the
// trigger sum S = x_TA + x_TB is normal with a closed-form variance and every
// verification quadrature splits into a regression on S plus an independent
// residual. Conditioning on |S| < Q then only needs the truncated-normal
// moments of S. The average over the four phases uses a tensor-product
// Gauss-Hermite rule.
//
// This module derives the state's second moments from the configuration
// directly and does not use the Gaussian engine or the shot kernel.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cvdistill/protocol.hpp"

namespace cvdistill {

/// Gauss-Hermite rule for the standard normal weight exp(-x^2/2)/sqrt(2 pi).
class QuadratureGrid {
  public:
    /// Throws InvalidConfig for order < 2.
    static QuadratureGrid gauss_hermite(int order);

    int order() const { return static_cast<int>(nodes_.size()); }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }

  private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

inline constexpr int kDefaultOracleOrder = 40;

/// Acceptance-conditioned second moments of (X_VA, P_VA, X_VB, P_VB) in
/// natural units. All means vanish.
struct OracleMoments {
    double threshold = 0.0;
    double success_rate = 0.0;
    Eigen::Matrix4d moments = Eigen::Matrix4d::Zero();

    double var_xplus() const { return moments(0, 0) + moments(2, 2) + 2.0 * moments(0, 2); }
    double var_pminus() const { return moments(1, 1) + moments(3, 3) - 2.0 * moments(1, 3); }
    double total_variance() const { return (var_xplus() + var_pminus()) / (4.0 * kVacuumVariance); }
    Eigen::Matrix4d gamma_normalized() const { return moments / kVacuumVariance; }
};

double oracle_success_rate(const ProtocolConfig& cfg, int order = kDefaultOracleOrder);

/// Throws EmptyEnsemble if the acceptance probability vanishes.
OracleMoments oracle_conditional_moments(const ProtocolConfig& cfg, int order = kDefaultOracleOrder);

/// One pass over the phase grid for several thresholds (+inf allowed).
std::vector<OracleMoments> oracle_sweep(const ProtocolConfig& cfg, std::span<const double> thresholds,
                                        int order = kDefaultOracleOrder);

struct ConvergenceCheck {
    double max_abs_change = 0.0;
    bool converged = false;
};

/// Compares the rule of `order` with one of twice the order on the success
/// rate and every moment.
ConvergenceCheck oracle_convergence(const ProtocolConfig& cfg, std::span<const double> thresholds,
                                    int order = kDefaultOracleOrder, double tolerance = 1e-8);

}  // namespace cvdistill
