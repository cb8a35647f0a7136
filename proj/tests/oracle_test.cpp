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
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "cvdistill/errors.hpp"
#include "cvdistill/oracle.hpp"
#include "cvdistill/phase_noise.hpp"
#include "cvdistill/protocol.hpp"
#include "cvdistill/tomography.hpp"
#include "test_support.hpp"

namespace cvdistill {
namespace {

using testing::z_score;

constexpr double kInf = std::numeric_limits<double>::infinity();

ProtocolConfig noisy_config(double sigma) {
    ProtocolConfig cfg;
    cfg.sigma_pn = sigma;
    return cfg;
}

/// Copy moments (A1, B1) of the engine's initial state, natural units.
Eigen::Matrix4d copy_moments(const ProtocolConfig& cfg) {
    ProtocolConfig c = cfg;
    c.sigma_pn = 0.0;
    c.sigma_per_channel.reset();
    return build_initial_state(c).cov().block(0, 0, 4, 4);
}

// ---------------------------------------------------------------------------
// Quadrature rule

TEST(GaussHermite, NormalMoments) {
    for (int order : {2, 5, 20, 40, 80}) {
        const auto g = QuadratureGrid::gauss_hermite(order);
        double m0 = 0, m1 = 0, m2 = 0, m4 = 0, m6 = 0;
        for (int k = 0; k < g.order(); ++k) {
            const double x = g.nodes()[k], w = g.weights()[k];
            EXPECT_GT(w, 0.0);
            m0 += w, m1 += w * x, m2 += w * x * x, m4 += w * std::pow(x, 4), m6 += w * std::pow(x, 6);
        }
        EXPECT_NEAR(m0, 1.0, 1e-12) << order;
        EXPECT_NEAR(m1, 0.0, 1e-12) << order;
        EXPECT_NEAR(m2, 1.0, 1e-12) << order;
        if (order >= 3) {
            EXPECT_NEAR(m4, 3.0, 1e-11) << order;
        }
        if (order >= 4) {
            EXPECT_NEAR(m6, 15.0, 1e-10) << order;
        }
    }
}

TEST(GaussHermite, IntegratesCosine) {
    // E[cos(a x)] = exp(-a^2/2) for x ~ N(0, 1).
    const auto g = QuadratureGrid::gauss_hermite(40);
    for (double a : {0.1, 0.5, 1.0, 2.0}) {
        double s = 0.0;
        for (int k = 0; k < g.order(); ++k) s += g.weights()[k] * std::cos(a * g.nodes()[k]);
        EXPECT_NEAR(s, std::exp(-0.5 * a * a), 1e-13);
    }
}

TEST(GaussHermite, SymmetricNodes) {
    const auto g = QuadratureGrid::gauss_hermite(21);
    const int n = g.order();
    for (int k = 0; k < n; ++k) {
        EXPECT_NEAR(g.nodes()[k], -g.nodes()[n - 1 - k], 1e-12);
        EXPECT_NEAR(g.weights()[k], g.weights()[n - 1 - k], 1e-15);
    }
}

TEST(GaussHermite, RejectsTinyOrder) {
    EXPECT_THROW(QuadratureGrid::gauss_hermite(1), InvalidConfig);
    EXPECT_THROW(QuadratureGrid::gauss_hermite(0), InvalidConfig);
}

// ---------------------------------------------------------------------------
// Closed-form limits

TEST(Oracle, VacuumSuccessRateIsErf) {
    ProtocolConfig cfg;
    cfg.squeezing_db = cfg.antisqueezing_db = 0.0;
    for (double sigma : {0.0, 0.497}) {
        cfg.sigma_pn = sigma;
        for (double q : {0.1, 1.0, 2.5}) {
            cfg.threshold = q;
            // S = x_TA + x_TB has variance 1/2.
            EXPECT_NEAR(oracle_success_rate(cfg), std::erf(q), 1e-12);
        }
        cfg.threshold = 1.0;
        EXPECT_NEAR(oracle_success_rate(cfg), 0.84270, 1e-5);
        const auto m = oracle_conditional_moments(cfg);
        EXPECT_LT((m.moments - kVacuumVariance * Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_NEAR(m.total_variance(), 1.0, 1e-10);
    }
}

TEST(Oracle, InfiniteThresholdAcceptsEverything) {
    const auto cfg = noisy_config(0.497);
    EXPECT_NEAR(oracle_success_rate(cfg), 1.0, 1e-14);
}

// With no truncation each verification mode is an even mixture of two
// independently dephased copies.
TEST(Oracle, InfiniteThresholdIsPhaseAverage) {
    for (double sigma : {0.1, 0.497, 1.3}) {
        const auto cfg = noisy_config(sigma);
        const auto m = oracle_conditional_moments(cfg).moments;
        const Eigen::Matrix4d c = copy_moments(cfg);
        const auto a = phase_averaged_moments(c(0, 0), c(1, 1), c(0, 1), sigma);
        EXPECT_NEAR(m(0, 0), a.var_x, 1e-10);
        EXPECT_NEAR(m(1, 1), a.var_p, 1e-10);
        EXPECT_NEAR(m(2, 2), a.var_x, 1e-10);
        EXPECT_NEAR(m(3, 3), a.var_p, 1e-10);
        // Independent phases on A and B: E[cos ta cos tb] = coh1^2, E[sin ta sin tb] = 0.
        EXPECT_NEAR(m(0, 2), a.coh1 * a.coh1 * c(0, 2), 1e-10);
        EXPECT_NEAR(m(1, 3), a.coh1 * a.coh1 * c(1, 3), 1e-10);
        EXPECT_NEAR(m(0, 3), 0.0, 1e-10);
        EXPECT_NEAR(m(0, 1), 0.0, 1e-10);
    }
}

TEST(Oracle, NoNoiseConditioningChangesNothing) {
    auto cfg = noisy_config(0.0);
    const Eigen::Matrix4d c = copy_moments(cfg);
    const std::vector<double> grid = {0.01, 0.1, 1.0, kInf};
    for (const auto& m : oracle_sweep(cfg, grid)) {
        EXPECT_LT((m.moments - c).cwiseAbs().maxCoeff(), 1e-10) << m.threshold;
    }
    cfg.eta = 1.0;
    EXPECT_NEAR(oracle_sweep(cfg, grid)[0].var_xplus(), 0.17740, 1e-5);
}

TEST(Oracle, ZeroDecibelClosedForms) {
    ProtocolConfig cfg;
    cfg.squeezing_db = cfg.antisqueezing_db = 0.0;
    cfg.sigma_pn = 0.8;
    const std::vector<double> grid = {0.05, 0.5, 3.0};
    for (const auto& m : oracle_sweep(cfg, grid)) {
        EXPECT_NEAR(m.success_rate, std::erf(m.threshold), 1e-10);
        EXPECT_NEAR(m.var_xplus(), 0.5, 1e-10);
        EXPECT_NEAR(m.var_pminus(), 0.5, 1e-10);
    }
}

TEST(Oracle, SweepMatchesSinglePoints) {
    auto cfg = noisy_config(0.3);
    const std::vector<double> grid = {0.1, 0.7, kInf};
    const auto sweep = oracle_sweep(cfg, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        cfg.threshold = grid[k];
        const auto single = oracle_conditional_moments(cfg);
        EXPECT_EQ(single.success_rate, sweep[k].success_rate);
        EXPECT_EQ(single.moments, sweep[k].moments);
        EXPECT_EQ(oracle_success_rate(cfg), sweep[k].success_rate);
    }
}

TEST(Oracle, VanishingAcceptanceSignalled) {
    auto cfg = noisy_config(0.3);
    cfg.threshold = 1e-305;
    EXPECT_THROW(oracle_conditional_moments(cfg), EmptyEnsemble);
}

TEST(Oracle, RejectsTinyOrder) { EXPECT_THROW(oracle_success_rate(noisy_config(0.3), 1), InvalidConfig); }

// ---------------------------------------------------------------------------
// Behaviour under noise

TEST(Oracle, ConvergesWhenOrderDoubles) {
    for (double sigma : {0.1, 0.2, 0.3, 0.4, 0.497}) {
        const auto cfg = noisy_config(sigma);
        const std::vector<double> grid = {0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, kInf};
        const auto check = oracle_convergence(cfg, grid);
        EXPECT_TRUE(check.converged) << sigma << " change " << check.max_abs_change;
        EXPECT_LT(check.max_abs_change, 1e-8);
    }
}

TEST(Oracle, LowOrderFailsConvergence) {
    const std::vector<double> grid = {0.1, kInf};
    EXPECT_FALSE(oracle_convergence(noisy_config(0.497), grid, 2).converged);
}

TEST(Oracle, DistillationLowersNonlocalVariance) {
    const auto cfg = noisy_config(0.497);
    const std::vector<double> grid = {0.02, 0.05, 0.1, 0.2, 0.5, 1.0, kInf};
    const auto m = oracle_sweep(cfg, grid);
    for (std::size_t k = 0; k + 1 < m.size(); ++k) {
        EXPECT_LT(m[k].success_rate, m[k + 1].success_rate);
        EXPECT_LT(m[k].var_xplus(), m[k + 1].var_xplus());
        EXPECT_LT(m[k].total_variance(), m[k + 1].total_variance());
    }
    EXPECT_GE(m.back().total_variance(), 1.0);
    EXPECT_LT(m.front().total_variance(), 1.0);
}

// ---------------------------------------------------------------------------
// Against the Monte Carlo pipeline

TEST(OracleVsMonteCarlo, ThresholdGridAtStrongNoise) {
    auto cfg = noisy_config(0.497);
    cfg.seed = 61;
    const std::vector<double> grid = {0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5};
    const auto oracle = oracle_sweep(cfg, grid);
    const auto table = simulate_shots(cfg);
    const auto unconditioned = oracle_sweep(cfg, std::vector<double>{kInf})[0];
    const Estimate mc_full = var_xplus(find_setting(accept(table, kInf), Quad::X, Quad::X));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto e = accept(table, grid[k]);
        EXPECT_LT(z_score(e.success_rate(), oracle[k].success_rate, e.success_rate_se()), 3.0) << grid[k];
        const Estimate v = var_xplus(find_setting(e, Quad::X, Quad::X));
        EXPECT_LT(z_score(v.value, oracle[k].var_xplus(), v.se), 3.0) << grid[k];
        // Distillation gain; conservative SE since both estimates share shots.
        const double gap_se = std::hypot(v.se, mc_full.se);
        EXPECT_LT(z_score(mc_full.value - v.value, unconditioned.var_xplus() - oracle[k].var_xplus(), gap_se), 3.0);
    }
}

TEST(OracleVsMonteCarlo, JointModeAllTenMoments) {
    auto cfg = noisy_config(0.497);
    cfg.sampling = SamplingMode::joint;
    cfg.threshold = 0.2;
    cfg.seed = 62;
    const auto e = run_ensemble(cfg);
    CovarianceOptions options;
    options.estimate_intramodal = true;
    const auto est = estimate_covariance(e, options);
    const Eigen::Matrix4d expected = oracle_conditional_moments(cfg).gamma_normalized();
    for (const auto& [i, j] : kMatrixElements) {
        EXPECT_LT(z_score(est.gamma(i, j), expected(i, j), est.standard_errors(i, j)), 3.0) << i << "," << j;
    }
}

TEST(OracleVsMonteCarlo, PerChannelNoise) {
    ProtocolConfig cfg;
    cfg.sigma_per_channel = std::array<double, 4>{0.6, 0.1, 0.3, 0.45};
    cfg.threshold = 0.15;
    cfg.seed = 63;
    const auto e = run_ensemble(cfg);
    const auto o = oracle_conditional_moments(cfg);
    EXPECT_LT(z_score(e.success_rate(), o.success_rate, e.success_rate_se()), 4.0);
    const auto est = estimate_covariance(e);
    const Eigen::Matrix4d g = o.gamma_normalized();
    for (int k = 0; k < 8; ++k) {
        const auto [i, j] = kMatrixElements[k];
        EXPECT_LT(z_score(est.gamma(i, j), g(i, j), est.standard_errors(i, j)), 4.0) << i << "," << j;
    }
}

TEST(OracleVsMonteCarlo, TiltedTriggerQuadrature) {
    auto cfg = noisy_config(0.3);
    cfg.trigger_angle = 0.4;
    cfg.threshold = 0.3;
    cfg.seed = 64;
    cfg.n_shots = 400000;
    const auto e = run_ensemble(cfg);
    const auto o = oracle_conditional_moments(cfg);
    EXPECT_LT(z_score(e.success_rate(), o.success_rate, e.success_rate_se()), 4.0);
    const Estimate v = var_xplus(find_setting(e, Quad::X, Quad::X));
    EXPECT_LT(z_score(v.value, o.var_xplus(), v.se), 4.0);
}

}  // namespace
}  // namespace cvdistill
