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

// The two-copy distillation experiment as a Monte Carlo shot pipeline.
//
// Mode layout before distillation: (A1, B1, A2, B2). The distillation beam
// splitters mix A1 with A2 and B1 with B2; their plus ports (same indices as
// A1, B1) feed the trigger detectors and their minus ports (indices of A2, B2)
// are the verification modes. After distillation the layout is therefore
// (T_A, T_B, V_A, V_B).

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cvdistill/gaussian_state.hpp"
#include "cvdistill/phase_noise.hpp"
#include "cvdistill/random_stream.hpp"

namespace cvdistill {

inline constexpr std::size_t kModeA1 = 0;
inline constexpr std::size_t kModeB1 = 1;
inline constexpr std::size_t kModeA2 = 2;
inline constexpr std::size_t kModeB2 = 3;

inline constexpr std::size_t kTriggerA = 0;
inline constexpr std::size_t kTriggerB = 1;
inline constexpr std::size_t kVerifyA = 2;
inline constexpr std::size_t kVerifyB = 3;

inline constexpr double kHalfPi = 1.57079632679489661923;

/// Efficiency that makes the noiseless, undistilled total variance 0.725 at
/// 4.5 dB / 8 dB input squeezing (see calibrate_eta).
inline constexpr double kDefaultEta = 0.8525;

inline constexpr std::uint64_t kDefaultSeed = 20090617;

/// Homodyne angles of the two verification detectors: q = X cos(phi) + P sin(phi).
struct DetectorSetting {
    double angle_a = 0.0;
    double angle_b = 0.0;

    friend bool operator==(const DetectorSetting&, const DetectorSetting&) = default;
};

/// (X,X), (X,P), (P,X), (P,P): the four settings used for tomography.
std::vector<DetectorSetting> tomography_settings();

enum class SamplingMode {
    /// One verification setting per shot, round-robin over the shot index.
    per_setting,
    /// Every setting read from one joint phase-space sample of (V_A, V_B).
    joint,
};

struct ProtocolConfig {
    double squeezing_db = 4.5;
    double antisqueezing_db = 8.0;
    /// Efficiency applied to each of the four beams.
    double eta = kDefaultEta;
    /// Phase-noise strength shared by all four channels.
    double sigma_pn = 0.0;
    /// Optional per-channel override (A1, B1, A2, B2) of sigma_pn.
    std::optional<std::array<double, kChannelCount>> sigma_per_channel;
    /// Trigger threshold Q in natural quadrature units; +inf accepts every shot.
    double threshold = std::numeric_limits<double>::infinity();
    std::uint64_t n_shots = 1'000'000;
    std::uint64_t seed = kDefaultSeed;
    std::vector<DetectorSetting> bhd_settings = tomography_settings();
    SamplingMode sampling = SamplingMode::per_setting;
    /// Advanced: quadrature angle of both trigger detectors. 0 measures the
    /// initially squeezed X quadrature.
    double trigger_angle = 0.0;

    PhaseNoiseSpec noise() const;

    /// Throws InvalidConfig on any out-of-domain field.
    void validate() const;
};

/// Four-mode state after preparation and loss: two independent v-class copies,
/// ordered (A1, B1, A2, B2).
GaussianState build_initial_state(const ProtocolConfig& cfg);

GaussianState apply_channel_noise(const GaussianState& state, const NoiseSample& phases);

/// The pair of balanced distillation beam splitters (A1,A2) and (B1,B2).
SymplecticMatrix distillation_transform();

GaussianState apply_distillation_bs(const GaussianState& state);

struct VerificationOutcome {
    std::size_t setting = 0;
    double q_a = 0.0;
    double q_b = 0.0;
};

struct ShotRecord {
    NoiseSample phases;
    double x_ta = 0.0;
    double x_tb = 0.0;
    std::vector<VerificationOutcome> verification;
    /// Joint mode only: (X_VA, P_VA, X_VB, P_VB).
    std::optional<std::array<double, 4>> verification_phase_space;
    bool accepted = false;
};

/// Precomputed per-configuration linear algebra for fast shots.
///
/// For phases theta the post-distillation state has covariance
/// B R(theta) gamma0 R(theta)^T B^T; the kernel only forms the rows of that
/// matrix belonging to the measured quadratures.
class ShotKernel {
  public:
    explicit ShotKernel(const ProtocolConfig& cfg);

    /// Uses a caller-supplied distillation map instead of distillation_transform().
    ShotKernel(const ProtocolConfig& cfg, const SymplecticMatrix& distillation);

    const ProtocolConfig& config() const { return cfg_; }

    struct PerSettingDraw {
        NoiseSample phases;
        double x_ta, x_tb, q_a, q_b;
    };
    struct JointDraw {
        NoiseSample phases;
        double x_ta, x_tb;
        std::array<double, 4> verification;
    };

    PerSettingDraw draw_per_setting(RandomStream& rng, std::size_t setting) const;
    JointDraw draw_joint(RandomStream& rng) const;

    /// Covariance of (x_TA, x_TB, q_VA, q_VB) for one setting at fixed phases.
    Eigen::Matrix4d per_setting_covariance(const NoiseSample& phases, std::size_t setting) const;

    /// One shot; in per-setting mode the setting is shot_index mod #settings.
    ShotRecord run(RandomStream& rng, std::uint64_t shot_index) const;

  private:
    ProtocolConfig cfg_;
    PhaseNoiseSpec noise_;
    Eigen::Matrix<double, 8, 8> gamma0_;
    std::vector<Eigen::Matrix<double, 4, 8>> setting_rows_;
    Eigen::Matrix<double, 6, 8> joint_rows_;
};

ShotRecord run_shot(const ProtocolConfig& cfg, RandomStream& rng, std::uint64_t shot_index = 0);

/// All shots of one configuration, before any threshold is applied.
/// Struct-of-arrays; per-setting mode fills setting/q_a/q_b, joint mode fills
/// phase_space.
struct ShotTable {
    ProtocolConfig config;
    std::vector<double> trigger_sum;
    std::vector<std::uint8_t> setting;
    std::vector<double> q_a;
    std::vector<double> q_b;
    std::vector<std::array<double, 4>> phase_space;

    std::size_t size() const { return trigger_sum.size(); }
};

inline constexpr std::uint64_t kShotsPerBlock = 4096;

/// Worker count from CVDISTILL_WORKERS, else the hardware concurrency.
std::size_t default_workers();

/// Runs cfg.n_shots shots in blocks of kShotsPerBlock; block k draws from
/// RandomStream::for_block(seed, k). Output is identical for any worker count.
ShotTable simulate_shots(const ProtocolConfig& cfg, std::size_t workers = default_workers());
ShotTable simulate_shots(const ShotKernel& kernel, std::size_t workers = default_workers());

struct SettingSamples {
    DetectorSetting setting;
    std::vector<double> q_a;
    std::vector<double> q_b;

    std::size_t size() const { return q_a.size(); }
};

struct EnsembleResult {
    double threshold = 0.0;
    std::vector<SettingSamples> settings;
    /// Joint mode only: accepted (X_VA, P_VA, X_VB, P_VB).
    std::vector<std::array<double, 4>> phase_space;
    std::uint64_t accepted = 0;
    std::uint64_t total = 0;

    double success_rate() const {
        return total == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(total);
    }
    /// Binomial standard error of success_rate().
    double success_rate_se() const;
};

/// Applies |x_TA + x_TB| < threshold to a shot table. Throws EmptyEnsemble if
/// nothing is accepted.
EnsembleResult accept(const ShotTable& table, double threshold);

/// simulate_shots followed by accept at cfg.threshold.
EnsembleResult run_ensemble(const ProtocolConfig& cfg, std::size_t workers = default_workers());

}  // namespace cvdistill
