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

#include "cvdistill/gaussian_state.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "cvdistill/errors.hpp"

namespace cvdistill {
namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kPhysicalityTolerance = 1e-9;
constexpr double kSymplecticTolerance = 1e-12;

void check_mode(std::size_t mode, std::size_t n_modes, const char* what) {
    if (mode >= n_modes) {
        throw InvalidConfig(std::string(what) + ": mode index " + std::to_string(mode) +
                            " out of range for " + std::to_string(n_modes) + " modes");
    }
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

Eigen::MatrixXd symplectic_form(std::size_t n_modes) {
    const auto dim = static_cast<Eigen::Index>(2 * n_modes);
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t k = 0; k < n_modes; ++k) {
        omega(x_index(k), p_index(k)) = 1.0;
        omega(p_index(k), x_index(k)) = -1.0;
    }
    return omega;
}

// ---------------------------------------------------------------------------
// SymplecticMatrix

SymplecticMatrix SymplecticMatrix::identity(std::size_t n_modes) {
    const auto dim = static_cast<Eigen::Index>(2 * n_modes);
    return SymplecticMatrix(Eigen::MatrixXd::Identity(dim, dim), Unchecked{});
}

SymplecticMatrix::SymplecticMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0 || entries_.rows() % 2 != 0) {
        throw InvalidConfig("symplectic matrix must be square with even nonzero dimension");
    }
    if (symplectic_error() > kSymplecticTolerance) {
        throw InvalidConfig("matrix does not preserve the symplectic form");
    }
}

double SymplecticMatrix::symplectic_error() const {
    const Eigen::MatrixXd omega = symplectic_form(n_modes());
    return (entries_ * omega * entries_.transpose() - omega).cwiseAbs().maxCoeff();
}

SymplecticMatrix operator*(const SymplecticMatrix& a, const SymplecticMatrix& b) {
    if (a.n_modes() != b.n_modes()) {
        throw InvalidConfig("cannot compose symplectic maps of different mode counts");
    }
    return SymplecticMatrix(a.entries_ * b.entries_, SymplecticMatrix::Unchecked{});
}

// ---------------------------------------------------------------------------
// GaussianState

GaussianState::GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov) : mean_(std::move(mean)) {
    const auto dim = mean_.size();
    if (dim == 0 || dim % 2 != 0) {
        throw InvalidConfig("mean vector must have even nonzero length");
    }
    if (cov.rows() != dim || cov.cols() != dim) {
        throw InvalidConfig("covariance shape does not match mean vector");
    }
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
        throw PhysicalityError("covariance matrix is not symmetric");
    }
    cov_ = symmetrized(cov);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> real_solver(cov_, Eigen::EigenvaluesOnly);
    if (real_solver.eigenvalues().minCoeff() < -kPhysicalityTolerance) {
        throw PhysicalityError("covariance matrix is not positive semidefinite");
    }
    if (min_uncertainty_eigenvalue(cov_) < -kPhysicalityTolerance) {
        throw PhysicalityError("covariance matrix violates the uncertainty relation");
    }
}

double min_uncertainty_eigenvalue(const Eigen::MatrixXd& cov) {
    const std::size_t n_modes = static_cast<std::size_t>(cov.rows()) / 2;
    const Eigen::MatrixXcd h = cov.cast<std::complex<double>>() / kVacuumVariance +
                               std::complex<double>(0.0, 1.0) * symplectic_form(n_modes).cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

GaussianState vacuum_state(std::size_t n_modes) {
    if (n_modes == 0) {
        throw InvalidConfig("vacuum_state: mode count must be at least 1");
    }
    const auto dim = static_cast<Eigen::Index>(2 * n_modes);
    return GaussianState(Eigen::VectorXd::Zero(dim), kVacuumVariance * Eigen::MatrixXd::Identity(dim, dim));
}

GaussianState squeezed_state(double squeezing_db, double antisqueezing_db) {
    if (!std::isfinite(squeezing_db) || !std::isfinite(antisqueezing_db) || squeezing_db < 0.0 ||
        antisqueezing_db < 0.0) {
        throw InvalidConfig("squeezed_state: decibel values must be finite and non-negative");
    }
    const double var_x = kVacuumVariance * std::pow(10.0, -squeezing_db / 10.0);
    const double var_p = kVacuumVariance * std::pow(10.0, antisqueezing_db / 10.0);
    // Var(X) Var(P) >= 1/16, with slack for the dB round trip.
    if (var_x * var_p < kVacuumVariance * kVacuumVariance * (1.0 - 1e-12)) {
        throw PhysicalityError("squeezed_state: anti-squeezing must be at least the squeezing level");
    }
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    cov(0, 0) = var_x;
    cov(1, 1) = var_p;
    return GaussianState(Eigen::Vector2d::Zero(), cov);
}

GaussianState tensor(const GaussianState& a, const GaussianState& b) {
    const auto na = a.mean().size();
    const auto nb = b.mean().size();
    Eigen::VectorXd mean(na + nb);
    mean << a.mean(), b.mean();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(na + nb, na + nb);
    cov.topLeftCorner(na, na) = a.cov();
    cov.bottomRightCorner(nb, nb) = b.cov();
    return GaussianState(std::move(mean), std::move(cov));
}

SymplecticMatrix beam_splitter(std::size_t n_modes, std::size_t i, std::size_t j, double transmittance) {
    check_mode(i, n_modes, "beam_splitter");
    check_mode(j, n_modes, "beam_splitter");
    if (i == j) {
        throw InvalidConfig("beam_splitter: the two ports must be different modes");
    }
    if (!(transmittance > 0.0 && transmittance < 1.0)) {
        throw InvalidConfig("beam_splitter: transmittance must lie in (0, 1)");
    }
    const double t = std::sqrt(transmittance);
    const double r = std::sqrt(1.0 - transmittance);
    Eigen::MatrixXd s = SymplecticMatrix::identity(n_modes).matrix();
    for (std::size_t q = 0; q < 2; ++q) {
        const auto in_i = static_cast<Eigen::Index>(2 * i + q);
        const auto in_j = static_cast<Eigen::Index>(2 * j + q);
        s(in_i, in_i) = t;
        s(in_i, in_j) = r;
        s(in_j, in_i) = r;
        s(in_j, in_j) = -t;
    }
    return SymplecticMatrix(std::move(s));
}

SymplecticMatrix phase_rotation(std::size_t n_modes, std::size_t i, double theta) {
    check_mode(i, n_modes, "phase_rotation");
    Eigen::MatrixXd s = SymplecticMatrix::identity(n_modes).matrix();
    const double c = std::cos(theta);
    const double sn = std::sin(theta);
    s(x_index(i), x_index(i)) = c;
    s(x_index(i), p_index(i)) = sn;
    s(p_index(i), x_index(i)) = -sn;
    s(p_index(i), p_index(i)) = c;
    return SymplecticMatrix(std::move(s));
}

GaussianState apply(const SymplecticMatrix& s, const GaussianState& state) {
    if (s.n_modes() != state.n_modes()) {
        throw InvalidConfig("apply: symplectic map and state have different mode counts");
    }
    const Eigen::MatrixXd& m = s.matrix();
    return GaussianState(m * state.mean(), symmetrized(m * state.cov() * m.transpose()));
}

GaussianState loss_channel(const GaussianState& state, std::size_t i, double eta) {
    check_mode(i, state.n_modes(), "loss_channel");
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw InvalidConfig("loss_channel: efficiency must lie in (0, 1]");
    }
    const double scale = std::sqrt(eta);
    Eigen::VectorXd mean = state.mean();
    Eigen::MatrixXd cov = state.cov();
    for (const auto idx : {x_index(i), p_index(i)}) {
        const auto k = static_cast<Eigen::Index>(idx);
        mean(k) *= scale;
        cov.row(k) *= scale;
        cov.col(k) *= scale;
    }
    cov(x_index(i), x_index(i)) += (1.0 - eta) * kVacuumVariance;
    cov(p_index(i), p_index(i)) += (1.0 - eta) * kVacuumVariance;
    return GaussianState(std::move(mean), std::move(cov));
}

GaussianState condition_on_measurement(const GaussianState& state, std::size_t i, double angle,
                                       double outcome) {
    const std::size_t n = state.n_modes();
    check_mode(i, n, "condition_on_measurement");
    if (n < 2) {
        throw InvalidConfig("condition_on_measurement: at least one mode must remain");
    }
    const auto dim = static_cast<Eigen::Index>(2 * n);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
    a(x_index(i)) = std::cos(angle);
    a(p_index(i)) = std::sin(angle);

    const double measured_var = a.dot(state.cov() * a);
    if (!(measured_var > 1e-14)) {
        throw SingularMeasurement("condition_on_measurement: measured quadrature has zero variance");
    }

    std::vector<Eigen::Index> keep;
    keep.reserve(static_cast<std::size_t>(dim) - 2);
    for (std::size_t k = 0; k < n; ++k) {
        if (k == i) continue;
        keep.push_back(static_cast<Eigen::Index>(x_index(k)));
        keep.push_back(static_cast<Eigen::Index>(p_index(k)));
    }
    const Eigen::MatrixXd cov_rest = state.cov()(keep, keep);
    const Eigen::VectorXd cross = (state.cov() * a)(keep);
    const double innovation = outcome - a.dot(state.mean());

    Eigen::VectorXd mean = state.mean()(keep) + cross * (innovation / measured_var);
    Eigen::MatrixXd cov = cov_rest - cross * cross.transpose() / measured_var;
    return GaussianState(std::move(mean), symmetrized(cov));
}

GaussianState marginal(const GaussianState& state, std::span<const std::size_t> modes) {
    if (modes.empty()) {
        throw InvalidConfig("marginal: mode subset must be nonempty");
    }
    std::vector<Eigen::Index> idx;
    idx.reserve(2 * modes.size());
    for (const auto m : modes) {
        check_mode(m, state.n_modes(), "marginal");
        idx.push_back(static_cast<Eigen::Index>(x_index(m)));
        idx.push_back(static_cast<Eigen::Index>(p_index(m)));
    }
    return GaussianState(state.mean()(idx), state.cov()(idx, idx));
}

Eigen::VectorXd sample_normal(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, RandomStream& rng) {
    const auto dim = mean.size();
    if (cov.rows() != dim || cov.cols() != dim) {
        throw InvalidConfig("sample_normal: covariance shape does not match mean");
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    if (ldlt.info() != Eigen::Success) {
        throw FactorizationError("sample_normal: LDL^T factorization failed");
    }
    const Eigen::VectorXd d = ldlt.vectorD();
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if (d.minCoeff() < -1e-12 * scale) {
        throw FactorizationError("sample_normal: covariance is not positive semidefinite");
    }
    Eigen::VectorXd z(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        z(k) = rng.normal() * std::sqrt(std::max(d(k), 0.0));
    }
    Eigen::VectorXd correlated = ldlt.matrixL() * z;
    return mean + ldlt.transpositionsP().transpose() * correlated;
}

Eigen::VectorXd sample_quadratures(const GaussianState& state, RandomStream& rng) {
    return sample_normal(state.mean(), state.cov(), rng);
}

}  // namespace cvdistill
