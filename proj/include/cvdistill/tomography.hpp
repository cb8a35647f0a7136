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

// Second-moment tomography of the verification modes and the entanglement /
// purity figures derived from it.
//
// Normalized convention: covariance matrices are divided by kVacuumVariance so
// that vacuum is the identity. Ordering (X_VA, P_VA, X_VB, P_VB).

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cvdistill/protocol.hpp"

namespace cvdistill {

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

/// Unbiased (n-1) sample variance. The standard error uses the empirical
/// fourth central moment, sqrt((m4 - m2^2) / n), so it stays honest for the
/// heavy-tailed phase-diffused samples.
Estimate sample_variance(std::span<const double> x);

/// Unbiased sample covariance with SE sqrt((E[dx^2 dy^2] - c^2) / n).
Estimate sample_covariance(std::span<const double> x, std::span<const double> y);

enum class Quad { X, P };

/// Fewest samples accepted by the kurtosis estimator.
inline constexpr std::size_t kMinKurtosisSamples = 1000;

/// The ten distinct entries of a symmetric 4x4 matrix: four variances, the
/// four inter-modal covariances, then the two intra-modal ones.
inline constexpr std::array<std::pair<int, int>, 10> kMatrixElements = {{
    {0, 0}, {1, 1}, {2, 2}, {3, 3}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {0, 1}, {2, 3},
}};

struct CovarianceEstimate {
    Eigen::Matrix4d gamma = Eigen::Matrix4d::Identity();
    Eigen::Matrix4d standard_errors = Eigen::Matrix4d::Zero();
    /// Joint sampling covariance of the element estimates, in kMatrixElements
    /// order and normalized units. Elements read from the same shots are
    /// correlated; propagate_error uses this rather than standard_errors.
    Eigen::Matrix<double, 10, 10> element_covariance = Eigen::Matrix<double, 10, 10>::Zero();
    /// Sample counts of the (X,X), (X,P), (P,X), (P,P) settings.
    std::array<std::size_t, 4> samples_per_setting{};
    bool intramodal_estimated = false;
};

/// First-order standard error of f(gamma) given df/dgamma_ij for every (i, j).
/// Falls back to independent elements when element_covariance is unset.
double propagate_error(const CovarianceEstimate& estimate, const Eigen::Matrix4d& gradient);

struct CovarianceOptions {
    /// Estimate X_A-P_A and X_B-P_B from joint phase-space samples instead of
    /// pinning them to zero. Requires a joint-mode ensemble.
    bool estimate_intramodal = false;
};

/// Reconstructs the normalized 4x4 matrix from the four tomography settings.
/// Variances pool every setting that measures the quadrature; each inter-modal
/// covariance comes from the one setting measuring that pair.
CovarianceEstimate estimate_covariance(const SettingSamples& xx, const SettingSamples& xp,
                                       const SettingSamples& px, const SettingSamples& pp);

/// Joint-mode ensembles are estimated from their phase-space samples, which
/// every setting shares; pooling the settings would count each shot twice.
CovarianceEstimate estimate_covariance(const EnsembleResult& ensemble, const CovarianceOptions& options = {});

/// Locates the tomography setting (a, b) in an ensemble, or throws
/// InsufficientData naming the missing one.
const SettingSamples& find_setting(const EnsembleResult& ensemble, Quad a, Quad b);

/// Duan total variance Var(X_A + X_B) + Var(P_A - P_B) in units where vacuum gives 1.
Estimate total_variance(const CovarianceEstimate& estimate);

/// Same quantity straight from samples: X+ from the (X,X) setting, P- from (P,P).
Estimate total_variance(const SettingSamples& xx, const SettingSamples& pp);

/// Var(X_A + X_B) and Var(P_A - P_B) in natural units (vacuum 1/2 each).
Estimate var_xplus(const SettingSamples& xx);
Estimate var_pminus(const SettingSamples& pp);

/// Strict Duan test I < 1.
inline bool duan_entangled(double total_variance) { return total_variance < 1.0; }

struct DeterminantPurity {
    double determinant = 0.0;
    /// First-order propagation of the element standard errors.
    double determinant_se = 0.0;
    double purity = 0.0;
    double purity_se = 0.0;
};

/// D = det(gamma), purity = 1/sqrt(D). Throws InvalidEstimate if D <= 0.
DeterminantPurity determinant_purity(const CovarianceEstimate& estimate);

struct LogNegativity {
    /// max(0, -log2(nu_tilde)). Base-2 logarithm.
    double value = 0.0;
    /// Smallest symplectic eigenvalue of the partially transposed matrix.
    double nu_tilde = 0.0;
    /// Smallest symplectic eigenvalue of gamma itself; >= 1 for physical states.
    double nu_min = 0.0;
    bool physical = true;
    std::string warning;
    /// First-order standard error; only set by the CovarianceEstimate overload.
    double se = 0.0;
};

inline constexpr int kLogNegativityBase = 2;

/// Gaussian logarithmic negativity of a normalized two-mode matrix. Partial
/// transposition flips the sign of P_B.
LogNegativity log_negativity(const Eigen::Matrix4d& gamma);
/// As above, plus a standard error from central differences over the
/// estimated elements.
LogNegativity log_negativity(const CovarianceEstimate& estimate);

/// Excess kurtosis g2 = m4/m2^2 - 3 with the normal-theory standard error.
/// Throws InsufficientData below 1000 samples.
Estimate gaussianity(std::span<const double> samples);

/// x_a + x_b of the (X,X) setting.
std::vector<double> xplus_samples(const SettingSamples& xx);

struct MetricsReport {
    Estimate success_rate;
    std::uint64_t accepted = 0;
    Estimate var_xplus;
    Estimate var_pminus;
    Estimate total_variance;
    DeterminantPurity determinant;
    LogNegativity log_negativity;
    /// NaN when fewer than 1000 (X,X) samples were accepted.
    Estimate kurtosis;
    CovarianceEstimate covariance;
};

MetricsReport compute_report(const EnsembleResult& ensemble);

}  // namespace cvdistill
