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

// Multimode Gaussian states in phase space.
//
// Quadrature ordering is (X_1, P_1, X_2, P_2, ..., X_n, P_n) everywhere in this
// library; use x_index()/p_index() rather than hard-coding offsets. Units are
// natural quadrature units with vacuum variance kVacuumVariance = 1/4, so
// [X, P] = i/2 and the uncertainty relation reads cov/kVacuumVariance + i*Omega >= 0.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cvdistill/random_stream.hpp"

namespace cvdistill {

inline constexpr double kVacuumVariance = 0.25;

inline constexpr std::size_t x_index(std::size_t mode) { return 2 * mode; }
inline constexpr std::size_t p_index(std::size_t mode) { return 2 * mode + 1; }

/// Block-diagonal symplectic form with blocks [[0, 1], [-1, 0]].
Eigen::MatrixXd symplectic_form(std::size_t n_modes);

/// Linear phase-space map S with S Omega S^T = Omega.
class SymplecticMatrix {
  public:
    static SymplecticMatrix identity(std::size_t n_modes);

    /// Wraps an arbitrary matrix; throws InvalidConfig if the shape is wrong or
    /// the symplectic condition fails by more than 1e-12.
    explicit SymplecticMatrix(Eigen::MatrixXd entries);

    std::size_t n_modes() const { return static_cast<std::size_t>(entries_.rows()) / 2; }
    const Eigen::MatrixXd& matrix() const { return entries_; }

    /// max |S Omega S^T - Omega|.
    double symplectic_error() const;

    /// Composition: (a * b) applies b first, then a.
    friend SymplecticMatrix operator*(const SymplecticMatrix& a, const SymplecticMatrix& b);

  private:
    struct Unchecked {};
    SymplecticMatrix(Eigen::MatrixXd entries, Unchecked) : entries_(std::move(entries)) {}

    Eigen::MatrixXd entries_;
};

class GaussianState {
  public:
    /// Validates shape, symmetry (1e-12), positive semidefiniteness (1e-9) and
    /// the uncertainty relation (1e-9); the stored covariance is symmetrized.
    GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov);

    std::size_t n_modes() const { return static_cast<std::size_t>(mean_.size()) / 2; }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& cov() const { return cov_; }

    double var_x(std::size_t mode) const { return cov_(x_index(mode), x_index(mode)); }
    double var_p(std::size_t mode) const { return cov_(p_index(mode), p_index(mode)); }

  private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
};

/// Smallest eigenvalue of cov/kVacuumVariance + i*Omega. Non-negative for
/// physical states.
double min_uncertainty_eigenvalue(const Eigen::MatrixXd& cov);

GaussianState vacuum_state(std::size_t n_modes);

/// Single mode, X squeezed: Var(X) = 1/4 * 10^(-sq/10), Var(P) = 1/4 * 10^(anti/10).
/// Mixed whenever antisqueezing_db > squeezing_db.
GaussianState squeezed_state(double squeezing_db, double antisqueezing_db);

/// Mode order: a's modes, then b's.
GaussianState tensor(const GaussianState& a, const GaussianState& b);

/// Beam splitter on modes (i, j) of an n-mode system:
///   out_i = sqrt(T) in_i + sqrt(1-T) in_j
///   out_j = sqrt(1-T) in_i - sqrt(T) in_j
/// applied identically to X and P.
SymplecticMatrix beam_splitter(std::size_t n_modes, std::size_t i, std::size_t j, double transmittance);

/// X' = X cos(theta) + P sin(theta), P' = -X sin(theta) + P cos(theta) on mode i.
SymplecticMatrix phase_rotation(std::size_t n_modes, std::size_t i, double theta);

/// mean -> S mean, cov -> S cov S^T.
GaussianState apply(const SymplecticMatrix& s, const GaussianState& state);

/// Pure loss with efficiency eta in (0, 1] on mode i.
GaussianState loss_channel(const GaussianState& state, std::size_t i, double eta);

/// Ideal homodyne readout of X cos(angle) + P sin(angle) on mode i with the
/// given outcome. Mode i is removed from the returned state.
GaussianState condition_on_measurement(const GaussianState& state, std::size_t i, double angle,
                                       double outcome);

/// Restriction to the listed modes, in the listed order.
GaussianState marginal(const GaussianState& state, std::span<const std::size_t> modes);

/// Draw from N(mean, cov) through a pivoted LDL^T factorization; singular
/// covariances are allowed. Throws FactorizationError if cov is not PSD.
Eigen::VectorXd sample_normal(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, RandomStream& rng);

/// Joint quadrature sample, ordered like the state's mean vector.
Eigen::VectorXd sample_quadratures(const GaussianState& state, RandomStream& rng);

}  // namespace cvdistill
