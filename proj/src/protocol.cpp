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

#include "cvdistill/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "cvdistill/errors.hpp"

namespace cvdistill {
namespace {

using Matrix8d = Eigen::Matrix<double, 8, 8>;

template <int Rows>
using Rows8 = Eigen::Matrix<double, Rows, 8>;

// Row vector picking q = X cos(angle) + P sin(angle) of `mode`.
Eigen::Matrix<double, 1, 8> quadrature_row(std::size_t mode, double angle) {
    Eigen::Matrix<double, 1, 8> row = Eigen::Matrix<double, 1, 8>::Zero();
    row(x_index(mode)) = std::cos(angle);
    row(p_index(mode)) = std::sin(angle);
    return row;
}

// rows * R(theta), where R rotates every mode by its own phase.
template <int Rows>
Rows8<Rows> rotate_columns(const Rows8<Rows>& rows, const NoiseSample& phases) {
    Rows8<Rows> out;
    for (std::size_t m = 0; m < kChannelCount; ++m) {
        const double c = std::cos(phases.theta[m]);
        const double s = std::sin(phases.theta[m]);
        const auto x = static_cast<Eigen::Index>(x_index(m));
        const auto p = static_cast<Eigen::Index>(p_index(m));
        // [X', P']^T = [[c, s], [-s, c]] [X, P]^T
        out.col(x) = rows.col(x) * c - rows.col(p) * s;
        out.col(p) = rows.col(x) * s + rows.col(p) * c;
    }
    return out;
}

template <int Rows>
Eigen::Matrix<double, Rows, 1> draw_correlated(const Eigen::Matrix<double, Rows, Rows>& cov, RandomStream& rng) {
    Eigen::Matrix<double, Rows, 1> z;
    for (int k = 0; k < Rows; ++k) z(k) = rng.normal();
    const Eigen::LLT<Eigen::Matrix<double, Rows, Rows>> llt(cov);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL() * z;
    }
    const Eigen::LDLT<Eigen::Matrix<double, Rows, Rows>> ldlt(cov);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < -1e-12) {
        throw FactorizationError("shot covariance is not positive semidefinite");
    }
    const Eigen::Matrix<double, Rows, 1> scaled = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt().cwiseProduct(z);
    const Eigen::Matrix<double, Rows, 1> lz = ldlt.matrixL() * scaled;
    return ldlt.transpositionsP().transpose() * lz;
}

}  // namespace

std::vector<DetectorSetting> tomography_settings() {
    return {{0.0, 0.0}, {0.0, kHalfPi}, {kHalfPi, 0.0}, {kHalfPi, kHalfPi}};
}

PhaseNoiseSpec ProtocolConfig::noise() const {
    if (sigma_per_channel) {
        return PhaseNoiseSpec{*sigma_per_channel};
    }
    return PhaseNoiseSpec::uniform(sigma_pn);
}

void ProtocolConfig::validate() const {
    if (!std::isfinite(squeezing_db) || !std::isfinite(antisqueezing_db) || squeezing_db < 0.0 ||
        antisqueezing_db < 0.0) {
        throw InvalidConfig("squeezing levels must be finite and non-negative");
    }
    if (antisqueezing_db < squeezing_db) {
        throw InvalidConfig("anti-squeezing must be at least the squeezing level");
    }
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw InvalidConfig("eta must lie in (0, 1]");
    }
    noise().validate();
    if (!(threshold > 0.0)) {
        throw InvalidConfig("threshold Q must be positive");
    }
    if (n_shots < 1) {
        throw InvalidConfig("n_shots must be at least 1");
    }
    if (bhd_settings.empty()) {
        throw InvalidConfig("at least one verification detector setting is required");
    }
    if (bhd_settings.size() > 255) {
        throw InvalidConfig("at most 255 verification detector settings are supported");
    }
    for (const auto& s : bhd_settings) {
        if (!std::isfinite(s.angle_a) || !std::isfinite(s.angle_b)) {
            throw InvalidConfig("detector angles must be finite");
        }
    }
    if (!std::isfinite(trigger_angle)) {
        throw InvalidConfig("trigger angle must be finite");
    }
}

GaussianState build_initial_state(const ProtocolConfig& cfg) {
    cfg.validate();
    const GaussianState squeezed = squeezed_state(cfg.squeezing_db, cfg.antisqueezing_db);
    const GaussianState copy = apply(beam_splitter(2, 0, 1, 0.5), tensor(squeezed, vacuum_state(1)));
    GaussianState state = tensor(copy, copy);
    if (cfg.eta < 1.0) {
        for (std::size_t m = 0; m < 4; ++m) {
            state = loss_channel(state, m, cfg.eta);
        }
    }
    return state;
}

GaussianState apply_channel_noise(const GaussianState& state, const NoiseSample& phases) {
    if (state.n_modes() != kChannelCount) {
        throw InvalidConfig("apply_channel_noise expects a four-mode state");
    }
    SymplecticMatrix rotation = SymplecticMatrix::identity(kChannelCount);
    for (std::size_t m = 0; m < kChannelCount; ++m) {
        rotation = phase_rotation(kChannelCount, m, phases.theta[m]) * rotation;
    }
    return apply(rotation, state);
}

SymplecticMatrix distillation_transform() {
    return beam_splitter(4, kModeB1, kModeB2, 0.5) * beam_splitter(4, kModeA1, kModeA2, 0.5);
}

GaussianState apply_distillation_bs(const GaussianState& state) {
    if (state.n_modes() != 4) {
        throw InvalidConfig("apply_distillation_bs expects a four-mode state");
    }
    return apply(distillation_transform(), state);
}

// ---------------------------------------------------------------------------
// ShotKernel

ShotKernel::ShotKernel(const ProtocolConfig& cfg) : ShotKernel(cfg, distillation_transform()) {}

ShotKernel::ShotKernel(const ProtocolConfig& cfg, const SymplecticMatrix& distillation)
    : cfg_(cfg), noise_(cfg.noise()) {
    cfg_.validate();
    if (distillation.n_modes() != 4) {
        throw InvalidConfig("distillation map must act on four modes");
    }
    gamma0_ = build_initial_state(cfg_).cov();
    const Matrix8d b = distillation.matrix();

    const auto trig_a = quadrature_row(kTriggerA, cfg_.trigger_angle);
    const auto trig_b = quadrature_row(kTriggerB, cfg_.trigger_angle);
    for (const auto& s : cfg_.bhd_settings) {
        Eigen::Matrix<double, 4, 8> rows;
        rows.row(0) = trig_a;
        rows.row(1) = trig_b;
        rows.row(2) = quadrature_row(kVerifyA, s.angle_a);
        rows.row(3) = quadrature_row(kVerifyB, s.angle_b);
        setting_rows_.push_back(rows * b);
    }
    Eigen::Matrix<double, 6, 8> joint;
    joint.row(0) = trig_a;
    joint.row(1) = trig_b;
    joint.row(2) = quadrature_row(kVerifyA, 0.0);
    joint.row(3) = quadrature_row(kVerifyA, kHalfPi);
    joint.row(4) = quadrature_row(kVerifyB, 0.0);
    joint.row(5) = quadrature_row(kVerifyB, kHalfPi);
    // Exact X/P selectors rather than cos(pi/2) ~ 6e-17.
    joint.row(3).setZero();
    joint(3, p_index(kVerifyA)) = 1.0;
    joint.row(5).setZero();
    joint(5, p_index(kVerifyB)) = 1.0;
    joint_rows_ = joint * b;
}

Eigen::Matrix4d ShotKernel::per_setting_covariance(const NoiseSample& phases, std::size_t setting) const {
    const Eigen::Matrix<double, 4, 8> l = rotate_columns<4>(setting_rows_.at(setting), phases);
    return l * gamma0_ * l.transpose();
}

ShotKernel::PerSettingDraw ShotKernel::draw_per_setting(RandomStream& rng, std::size_t setting) const {
    PerSettingDraw out;
    out.phases = sample_phases(noise_, rng);
    const Eigen::Vector4d q = draw_correlated<4>(per_setting_covariance(out.phases, setting), rng);
    out.x_ta = q(0);
    out.x_tb = q(1);
    out.q_a = q(2);
    out.q_b = q(3);
    return out;
}

ShotKernel::JointDraw ShotKernel::draw_joint(RandomStream& rng) const {
    JointDraw out;
    out.phases = sample_phases(noise_, rng);
    const Eigen::Matrix<double, 6, 8> l = rotate_columns<6>(joint_rows_, out.phases);
    const Eigen::Matrix<double, 6, 6> cov = l * gamma0_ * l.transpose();
    const Eigen::Matrix<double, 6, 1> q = draw_correlated<6>(cov, rng);
    out.x_ta = q(0);
    out.x_tb = q(1);
    out.verification = {q(2), q(3), q(4), q(5)};
    return out;
}

ShotRecord ShotKernel::run(RandomStream& rng, std::uint64_t shot_index) const {
    ShotRecord rec;
    if (cfg_.sampling == SamplingMode::per_setting) {
        const std::size_t setting = static_cast<std::size_t>(shot_index % cfg_.bhd_settings.size());
        const PerSettingDraw d = draw_per_setting(rng, setting);
        rec.phases = d.phases;
        rec.x_ta = d.x_ta;
        rec.x_tb = d.x_tb;
        rec.verification.push_back({setting, d.q_a, d.q_b});
    } else {
        const JointDraw d = draw_joint(rng);
        rec.phases = d.phases;
        rec.x_ta = d.x_ta;
        rec.x_tb = d.x_tb;
        rec.verification_phase_space = d.verification;
        const auto& v = d.verification;
        for (std::size_t k = 0; k < cfg_.bhd_settings.size(); ++k) {
            const auto& s = cfg_.bhd_settings[k];
            rec.verification.push_back({k, v[0] * std::cos(s.angle_a) + v[1] * std::sin(s.angle_a),
                                        v[2] * std::cos(s.angle_b) + v[3] * std::sin(s.angle_b)});
        }
    }
    rec.accepted = std::abs(rec.x_ta + rec.x_tb) < cfg_.threshold;
    return rec;
}

ShotRecord run_shot(const ProtocolConfig& cfg, RandomStream& rng, std::uint64_t shot_index) {
    return ShotKernel(cfg).run(rng, shot_index);
}

// ---------------------------------------------------------------------------
// Ensembles

std::size_t default_workers() {
    if (const char* env = std::getenv("CVDISTILL_WORKERS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n >= 1) {
            return static_cast<std::size_t>(n);
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

ShotTable simulate_shots(const ProtocolConfig& cfg, std::size_t workers) {
    return simulate_shots(ShotKernel(cfg), workers);
}

ShotTable simulate_shots(const ShotKernel& kernel, std::size_t workers) {
    const ProtocolConfig& cfg = kernel.config();
    const std::uint64_t n = cfg.n_shots;
    const bool joint = cfg.sampling == SamplingMode::joint;
    const std::uint64_t n_settings = cfg.bhd_settings.size();

    ShotTable table;
    table.config = cfg;
    table.trigger_sum.resize(n);
    if (joint) {
        table.phase_space.resize(n);
    } else {
        table.setting.resize(n);
        table.q_a.resize(n);
        table.q_b.resize(n);
    }

    const std::uint64_t n_blocks = (n + kShotsPerBlock - 1) / kShotsPerBlock;
    std::atomic<std::uint64_t> next_block{0};
    auto work = [&] {
        for (std::uint64_t block = next_block++; block < n_blocks; block = next_block++) {
            RandomStream rng = RandomStream::for_block(cfg.seed, block);
            const std::uint64_t begin = block * kShotsPerBlock;
            const std::uint64_t end = std::min(n, begin + kShotsPerBlock);
            for (std::uint64_t i = begin; i < end; ++i) {
                if (joint) {
                    const auto d = kernel.draw_joint(rng);
                    table.trigger_sum[i] = d.x_ta + d.x_tb;
                    table.phase_space[i] = d.verification;
                } else {
                    const auto setting = static_cast<std::size_t>(i % n_settings);
                    const auto d = kernel.draw_per_setting(rng, setting);
                    table.trigger_sum[i] = d.x_ta + d.x_tb;
                    table.setting[i] = static_cast<std::uint8_t>(setting);
                    table.q_a[i] = d.q_a;
                    table.q_b[i] = d.q_b;
                }
            }
        }
    };

    const std::size_t n_threads = std::max<std::size_t>(1, std::min<std::uint64_t>(workers, n_blocks));
    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
    }
    return table;
}

double EnsembleResult::success_rate_se() const {
    if (total == 0) return 0.0;
    const double p = success_rate();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(total));
}

EnsembleResult accept(const ShotTable& table, double threshold) {
    if (!(threshold > 0.0)) {
        throw InvalidConfig("threshold Q must be positive");
    }
    const auto& settings = table.config.bhd_settings;
    EnsembleResult out;
    out.threshold = threshold;
    out.total = table.size();
    for (const auto& s : settings) out.settings.push_back(SettingSamples{s, {}, {}});

    const bool joint = !table.phase_space.empty();
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (!(std::abs(table.trigger_sum[i]) < threshold)) continue;
        ++out.accepted;
        if (joint) {
            out.phase_space.push_back(table.phase_space[i]);
        } else {
            auto& dest = out.settings[table.setting[i]];
            dest.q_a.push_back(table.q_a[i]);
            dest.q_b.push_back(table.q_b[i]);
        }
    }
    if (joint) {
        for (auto& dest : out.settings) {
            const double ca = std::cos(dest.setting.angle_a), sa = std::sin(dest.setting.angle_a);
            const double cb = std::cos(dest.setting.angle_b), sb = std::sin(dest.setting.angle_b);
            dest.q_a.reserve(out.phase_space.size());
            dest.q_b.reserve(out.phase_space.size());
            for (const auto& v : out.phase_space) {
                dest.q_a.push_back(v[0] * ca + v[1] * sa);
                dest.q_b.push_back(v[2] * cb + v[3] * sb);
            }
        }
    }
    if (out.accepted == 0) {
        throw EmptyEnsemble("no shot satisfied |x_TA + x_TB| < Q = " + std::to_string(threshold) +
                            " out of " + std::to_string(out.total));
    }
    return out;
}

EnsembleResult run_ensemble(const ProtocolConfig& cfg, std::size_t workers) {
    return accept(simulate_shots(cfg, workers), cfg.threshold);
}

}  // namespace cvdistill
