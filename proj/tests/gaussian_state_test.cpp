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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "cvdistill/errors.hpp"
#include "cvdistill/gaussian_state.hpp"
#include "test_support.hpp"

namespace cvdistill {
namespace {

using testing::random_state;
using testing::random_symplectic;

constexpr double kEps = 1e-12;

// 4.5 dB squeezing, 8 dB anti-squeezing.
constexpr double kSqVarX = 0.25 * 0.35481338923357547;  // 0.25 * 10^-0.45
constexpr double kSqVarP = 0.25 * 6.309573444801933;    // 0.25 * 10^0.8

GaussianState vclass_state() {
    const GaussianState in = tensor(squeezed_state(4.5, 8.0), vacuum_state(1));
    return apply(beam_splitter(2, 0, 1, 0.5), in);
}

TEST(Vacuum, SingleMode) {
    const auto v = vacuum_state(1);
    EXPECT_EQ(v.n_modes(), 1u);
    EXPECT_TRUE(v.cov().isApprox(0.25 * Eigen::MatrixXd::Identity(2, 2)));
    EXPECT_EQ(v.mean().norm(), 0.0);
}

TEST(Vacuum, TwoModes) {
    const auto v = vacuum_state(2);
    EXPECT_TRUE(v.cov().isApprox(0.25 * Eigen::MatrixXd::Identity(4, 4)));
    EXPECT_EQ(v.mean().size(), 4);
    EXPECT_EQ(v.mean().norm(), 0.0);
}

TEST(Vacuum, ZeroModesRejected) { EXPECT_THROW(vacuum_state(0), InvalidConfig); }

TEST(Vacuum, SaturatesUncertainty) { EXPECT_NEAR(min_uncertainty_eigenvalue(vacuum_state(3).cov()), 0.0, 1e-12); }

TEST(Squeezed, ZeroDecibelIsVacuum) {
    EXPECT_TRUE(squeezed_state(0.0, 0.0).cov().isApprox(vacuum_state(1).cov(), kEps));
}

TEST(Squeezed, DefaultInputLevels) {
    const auto s = squeezed_state(4.5, 8.0);
    EXPECT_NEAR(s.var_x(0), 0.08870, 1e-5);
    EXPECT_NEAR(s.var_p(0), 1.57739, 1e-5);
    EXPECT_NEAR(s.var_x(0) * s.var_p(0), 0.1399, 5e-5);
    EXPECT_GT(s.var_x(0) * s.var_p(0), 1.0 / 16.0);
}

TEST(Squeezed, EqualDecibelsNearlyPure) {
    const auto s = squeezed_state(3.0, 3.0);
    EXPECT_NEAR(s.var_x(0), 0.12530, 1e-5);
    EXPECT_NEAR(s.var_p(0), 0.49881, 1e-5);
    EXPECT_NEAR(s.var_x(0) * s.var_p(0), 1.0 / 16.0, 1e-4);
}

TEST(Squeezed, SubVacuumProductRejected) {
    EXPECT_THROW(squeezed_state(6.0, 3.0), PhysicalityError);
    EXPECT_THROW(squeezed_state(NAN, 3.0), InvalidConfig);
}

TEST(Tensor, VacuaCompose) {
    EXPECT_TRUE(tensor(vacuum_state(1), vacuum_state(1)).cov().isApprox(vacuum_state(2).cov(), kEps));
}

TEST(Tensor, BlockDiagonal) {
    const auto t = tensor(squeezed_state(4.5, 8.0), vacuum_state(1));
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
    expected.diagonal() << kSqVarX, kSqVarP, 0.25, 0.25;
    EXPECT_TRUE(t.cov().isApprox(expected, kEps));
    EXPECT_NEAR(t.cov()(0, 0), 0.0887, 5e-5);
    EXPECT_NEAR(t.cov()(1, 1), 1.5774, 5e-5);
}

TEST(BeamSplitter, BalancedOnVacuaIsIdentityOnCov) {
    const auto out = apply(beam_splitter(2, 0, 1, 0.5), vacuum_state(2));
    EXPECT_TRUE(out.cov().isApprox(vacuum_state(2).cov(), kEps));
}

TEST(BeamSplitter, VClassState) {
    const auto v = vclass_state();
    const auto& g = v.cov();
    for (std::size_t m : {0u, 1u}) {
        EXPECT_NEAR(v.var_x(m), 0.16935, 1e-5);
        EXPECT_NEAR(v.var_p(m), 0.91370, 1e-5);
    }
    EXPECT_NEAR(g(x_index(0), x_index(1)), -0.08065, 1e-5);
    EXPECT_NEAR(g(p_index(0), p_index(1)), 0.66370, 1e-5);
    EXPECT_NEAR(g(x_index(0), p_index(1)), 0.0, kEps);
    // Exact forms.
    EXPECT_NEAR(v.var_x(0), 0.5 * (kSqVarX + 0.25), kEps);
    EXPECT_NEAR(g(x_index(0), x_index(1)), 0.5 * (kSqVarX - 0.25), kEps);
}

TEST(BeamSplitter, SignConvention) {
    const auto bs = beam_splitter(2, 0, 1, 0.3).matrix();
    const double t = std::sqrt(0.3), r = std::sqrt(0.7);
    EXPECT_NEAR(bs(x_index(0), x_index(0)), t, kEps);
    EXPECT_NEAR(bs(x_index(0), x_index(1)), r, kEps);
    EXPECT_NEAR(bs(x_index(1), x_index(0)), r, kEps);
    EXPECT_NEAR(bs(x_index(1), x_index(1)), -t, kEps);
    EXPECT_NEAR(bs(p_index(1), p_index(1)), -t, kEps);
}

TEST(BeamSplitter, BadArguments) {
    EXPECT_THROW(beam_splitter(2, 0, 0, 0.5), InvalidConfig);
    EXPECT_THROW(beam_splitter(2, 0, 2, 0.5), InvalidConfig);
    EXPECT_THROW(beam_splitter(2, 0, 1, 1.5), InvalidConfig);
}

TEST(PhaseRotation, ZeroIsIdentity) {
    EXPECT_TRUE(phase_rotation(2, 1, 0.0).matrix().isApprox(Eigen::MatrixXd::Identity(4, 4), kEps));
}

TEST(PhaseRotation, QuarterTurnSwapsQuadratures) {
    const auto r = apply(phase_rotation(1, 0, M_PI / 2), squeezed_state(4.5, 8.0));
    EXPECT_NEAR(r.var_x(0), 1.57739, 1e-5);
    EXPECT_NEAR(r.var_p(0), 0.08870, 1e-5);
}

TEST(PhaseRotation, FullTurnIsIdentity) {
    EXPECT_LT((phase_rotation(1, 0, 2 * M_PI).matrix() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(),
              kEps);
}

TEST(PhaseRotation, AnglesAdd) {
    RandomStream rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const double a = 10.0 * (rng.uniform() - 0.5), b = 10.0 * (rng.uniform() - 0.5);
        const auto composed = (phase_rotation(3, 1, a) * phase_rotation(3, 1, b)).matrix();
        const auto direct = phase_rotation(3, 1, a + b).matrix();
        EXPECT_LT((composed - direct).cwiseAbs().maxCoeff(), kEps);
    }
}

TEST(Loss, UnitEfficiencyIsIdentity) {
    const auto v = vclass_state();
    EXPECT_TRUE(loss_channel(v, 0, 1.0).cov().isApprox(v.cov(), kEps));
}

TEST(Loss, VacuumIsFixedPoint) {
    EXPECT_TRUE(loss_channel(vacuum_state(2), 1, 0.37).cov().isApprox(vacuum_state(2).cov(), kEps));
}

TEST(Loss, SqueezedVariance) {
    const auto l = loss_channel(squeezed_state(4.5, 8.0), 0, 0.86);
    EXPECT_NEAR(l.var_x(0), 0.86 * kSqVarX + 0.14 * 0.25, kEps);
    EXPECT_NEAR(l.var_x(0), 0.11128, 1e-5);
}

TEST(Loss, ScalesMean) {
    Eigen::VectorXd mean(2);
    mean << 1.0, -2.0;
    const auto l = loss_channel(GaussianState(mean, vacuum_state(1).cov()), 0, 0.64);
    EXPECT_NEAR(l.mean()(0), 0.8, kEps);
    EXPECT_NEAR(l.mean()(1), -1.6, kEps);
}

TEST(Loss, RejectsBadEfficiency) {
    EXPECT_THROW(loss_channel(vacuum_state(1), 0, 0.0), InvalidConfig);
    EXPECT_THROW(loss_channel(vacuum_state(1), 0, 1.01), InvalidConfig);
}

TEST(Conditioning, SchurComplement) {
    for (double outcome : {-1.0, 0.0, 0.7}) {
        const auto c = condition_on_measurement(vclass_state(), 1, 0.0, outcome);
        EXPECT_EQ(c.n_modes(), 1u);
        EXPECT_NEAR(c.var_x(0), 0.13094, 1e-5);
        const double slope = (0.5 * (kSqVarX - 0.25)) / (0.5 * (kSqVarX + 0.25));
        EXPECT_NEAR(c.mean()(0), slope * outcome, kEps);
        EXPECT_NEAR(c.var_p(0), 0.5 * (kSqVarP + 0.25), kEps);
    }
}

// Rejection sampling |x_B - outcome| < eps at several eps, extrapolated to eps -> 0.
TEST(Conditioning, MatchesRejectionSampling) {
    const auto state = vclass_state();
    const double outcome = 0.2;
    const auto expected = condition_on_measurement(state, 1, 0.0, outcome);
    RandomStream rng(5);
    const std::vector<double> eps = {0.2, 0.1, 0.05};
    std::vector<std::vector<double>> kept(eps.size());
    for (int n = 0; n < 2'000'000; ++n) {
        const Eigen::VectorXd s = sample_quadratures(state, rng);
        const double d = std::abs(s(x_index(1)) - outcome);
        for (std::size_t k = 0; k < eps.size(); ++k) {
            if (d < eps[k]) kept[k].push_back(s(x_index(0)));
        }
    }
    // Var within a window of half-width eps = var0 + slope^2 eps^2 / 3; fit a + b eps^2.
    std::vector<double> var(eps.size()), var_se(eps.size());
    for (std::size_t k = 0; k < eps.size(); ++k) {
        const double m = testing::mean_of(kept[k]);
        double ss = 0.0;
        for (double v : kept[k]) ss += (v - m) * (v - m);
        var[k] = ss / static_cast<double>(kept[k].size() - 1);
        var_se[k] = var[k] * std::sqrt(2.0 / static_cast<double>(kept[k].size()));
    }
    Eigen::MatrixXd a(eps.size(), 2);
    Eigen::VectorXd y(eps.size());
    for (std::size_t k = 0; k < eps.size(); ++k) {
        a(k, 0) = 1.0 / var_se[k];
        a(k, 1) = eps[k] * eps[k] / var_se[k];
        y(k) = var[k] / var_se[k];
    }
    const Eigen::Vector2d fit = a.colPivHouseholderQr().solve(y);
    const double extrapolated_se = std::sqrt((a.transpose() * a).inverse()(0, 0));
    EXPECT_LT(testing::z_score(fit(0), expected.var_x(0), extrapolated_se), 4.0)
        << "extrapolated " << fit(0) << " vs " << expected.var_x(0) << " se " << extrapolated_se;
    // The narrowest window alone is already close.
    EXPECT_NEAR(var.back(), expected.var_x(0), 4.0 * var_se.back() + 1e-3);
}

TEST(Marginal, IdentitySubset) {
    const auto v = vclass_state();
    const std::vector<std::size_t> all = {0, 1};
    EXPECT_TRUE(marginal(v, all).cov().isApprox(v.cov(), kEps));
}

TEST(Marginal, SingleModeOfVacuum) {
    const std::vector<std::size_t> one = {1};
    EXPECT_TRUE(marginal(vacuum_state(2), one).cov().isApprox(vacuum_state(1).cov(), kEps));
}

TEST(Marginal, ModeAOfVClass) {
    const std::vector<std::size_t> a = {0};
    const auto m = marginal(vclass_state(), a);
    EXPECT_NEAR(m.var_x(0), 0.16935, 1e-5);
    EXPECT_NEAR(m.var_p(0), 0.91370, 1e-5);
    EXPECT_NEAR(m.cov()(0, 1), 0.0, kEps);
}

TEST(Marginal, Reorders) {
    const std::vector<std::size_t> swapped = {1, 0};
    const auto in = tensor(squeezed_state(4.5, 8.0), vacuum_state(1));
    const auto m = marginal(in, swapped);
    EXPECT_NEAR(m.var_x(0), 0.25, kEps);
    EXPECT_NEAR(m.var_x(1), kSqVarX, kEps);
}

TEST(Sampling, VacuumVariance) {
    RandomStream rng(2024);
    const auto v = vacuum_state(1);
    constexpr int n = 1'000'000;
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_quadratures(v, rng)(0);
        s += x;
        ss += x * x;
    }
    const double mean = s / n;
    const double var = (ss - n * mean * mean) / (n - 1);
    EXPECT_LT(testing::z_score(var, 0.25, 0.25 * std::sqrt(2.0 / n)), 4.0);
    EXPECT_LT(testing::z_score(mean, 0.0, 0.5 / std::sqrt(n)), 4.0);
}

TEST(Sampling, ConvergesToStateMoments) {
    RandomStream gen(8);
    const auto state = random_state(2, gen);
    RandomStream rng(9);
    constexpr int n = 1'000'000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(4);
    Eigen::MatrixXd sum2 = Eigen::MatrixXd::Zero(4, 4);
    std::vector<Eigen::Vector4d> draws;
    draws.reserve(n);
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector4d x = sample_quadratures(state, rng);
        draws.push_back(x);
        sum += x;
    }
    const Eigen::Vector4d mean = sum / n;
    for (const auto& x : draws) sum2 += (x - mean) * (x - mean).transpose();
    const Eigen::Matrix4d cov = sum2 / (n - 1);
    const Eigen::Matrix4d& g = state.cov();
    for (int i = 0; i < 4; ++i) {
        EXPECT_LT(testing::z_score(mean(i), state.mean()(i), std::sqrt(g(i, i) / n)), 4.0);
        for (int j = 0; j < 4; ++j) {
            const double se = std::sqrt((g(i, i) * g(j, j) + g(i, j) * g(i, j)) / n);
            EXPECT_LT(testing::z_score(cov(i, j), g(i, j), se), 4.0) << i << "," << j;
        }
    }
}

TEST(Sampling, DegenerateCovarianceReturnsMean) {
    RandomStream rng(1);
    Eigen::VectorXd mean(3);
    mean << 1.5, -2.0, 0.25;
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(sample_normal(mean, Eigen::MatrixXd::Zero(3, 3), rng), mean);
    }
}

TEST(Sampling, RankDeficientCovariance) {
    RandomStream rng(3);
    Eigen::MatrixXd cov(2, 2);
    cov << 1.0, 1.0, 1.0, 1.0;
    for (int i = 0; i < 100; ++i) {
        const Eigen::VectorXd x = sample_normal(Eigen::VectorXd::Zero(2), cov, rng);
        EXPECT_NEAR(x(0), x(1), 1e-12);
    }
}

TEST(Sampling, IndefiniteCovarianceThrows) {
    RandomStream rng(3);
    Eigen::MatrixXd cov(2, 2);
    cov << 1.0, 0.0, 0.0, -1.0;
    EXPECT_THROW(sample_normal(Eigen::VectorXd::Zero(2), cov, rng), FactorizationError);
}

TEST(Validation, RejectsAsymmetric) {
    Eigen::MatrixXd cov = 0.25 * Eigen::MatrixXd::Identity(2, 2);
    cov(0, 1) = 0.01;
    EXPECT_THROW(GaussianState(Eigen::VectorXd::Zero(2), cov), PhysicalityError);
}

TEST(Validation, RejectsUncertaintyViolation) {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    cov(0, 0) = cov(1, 1) = 0.2;
    EXPECT_THROW(GaussianState(Eigen::VectorXd::Zero(2), cov), PhysicalityError);
}

TEST(Validation, RejectsNonSymplectic) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
    m(0, 0) = 2.0;
    EXPECT_THROW(SymplecticMatrix{m}, InvalidConfig);
}

// ---------------------------------------------------------------------------
// Properties over random compositions.

TEST(Property, ConstructedMapsAreSymplectic) {
    RandomStream rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 4.0);
        const auto s = random_symplectic(n, rng, 12);
        EXPECT_LT(s.symplectic_error(), 1e-12) << "trial " << trial;
        const double t = 0.01 + 0.98 * rng.uniform();
        if (n > 1) {
            EXPECT_LT(beam_splitter(n, 0, n - 1, t).symplectic_error(), 1e-12);
        }
        EXPECT_LT(phase_rotation(n, n - 1, 20.0 * rng.uniform()).symplectic_error(), 1e-12);
    }
}

TEST(Property, ApplyMapsMomentsAndPreservesUncertainty) {
    RandomStream rng(78);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 4.0);
        const auto state = random_state(n, rng);
        const auto s = random_symplectic(n, rng, 10);
        const auto out = apply(s, state);
        const Eigen::MatrixXd expected = s.matrix() * state.cov() * s.matrix().transpose();
        EXPECT_LT((out.cov() - expected).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + expected.cwiseAbs().maxCoeff()));
        EXPECT_LT((out.mean() - s.matrix() * state.mean()).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_GE(min_uncertainty_eigenvalue(out.cov()), -1e-9);
        EXPECT_EQ(out.cov(), out.cov().transpose());
    }
}

TEST(Property, LossKeepsStatesPhysical) {
    RandomStream rng(79);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 3.0);
        auto state = apply(random_symplectic(n, rng, 10), vacuum_state(n));
        const auto mode = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
        state = loss_channel(state, mode, 1e-3 + (1.0 - 1e-3) * rng.uniform());
        EXPECT_GE(min_uncertainty_eigenvalue(state.cov()), -1e-9);
    }
}

TEST(Property, ConditioningKeepsStatesPhysical) {
    RandomStream rng(80);
    for (int trial = 0; trial < 100; ++trial) {
        const auto state = random_state(3, rng);
        const auto c = condition_on_measurement(state, 1, 2.0 * M_PI * rng.uniform(), rng.normal());
        EXPECT_EQ(c.n_modes(), 2u);
        EXPECT_GE(min_uncertainty_eigenvalue(c.cov()), -1e-9);
    }
}

}  // namespace
}  // namespace cvdistill
