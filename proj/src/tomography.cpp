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

#include "cvdistill/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cvdistill/errors.hpp"

namespace cvdistill {
namespace {

constexpr double kAngleTolerance = 1e-9;

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (const double v : x) s += v;
    return s / static_cast<double>(x.size());
}

const char* quad_name(Quad q) { return q == Quad::X ? "X" : "P"; }

std::string setting_name(Quad a, Quad b) {
    return std::string("(") + quad_name(a) + "," + quad_name(b) + ")";
}

void require_samples(const SettingSamples& s, const std::string& name, std::size_t minimum = 2) {
    if (s.size() < minimum) {
        throw InsufficientData("setting " + name + " has " + std::to_string(s.size()) +
                               " accepted samples; need at least " + std::to_string(minimum));
    }
}

bool angle_is(double angle, Quad q) {
    return std::abs(angle - (q == Quad::X ? 0.0 : kHalfPi)) < kAngleTolerance;
}

// Smallest symplectic eigenvalue of a two-mode matrix from its 2x2 blocks.
double smallest_symplectic_eigenvalue(double det_a, double det_b, double det_c, double det_gamma) {
    const double delta = det_a + det_b + 2.0 * det_c;
    const double disc = std::max(0.0, delta * delta - 4.0 * det_gamma);
    return std::sqrt(std::max(0.0, 0.5 * (delta - std::sqrt(disc))));
}

using ElementVector = Eigen::Matrix<double, 10, 1>;
using ElementMatrix = Eigen::Matrix<double, 10, 10>;

enum : int { XA = 0, PA = 1, XB = 2, PB = 3 };
enum : int { E_XA = 0, E_PA, E_XB, E_PB, E_XA_XB, E_XA_PB, E_PA_XB, E_PA_PB, E_XA_PA, E_XB_PB };

// Biased (1/n) moments of a sample or a pair of samples.
struct Moment {
    double mean_a = 0.0, mean_b = 0.0, value = 0.0, n = 0.0;
};

Moment variance_moment(std::span<const double> a, std::span<const double> b = {}) {
    Moment m;
    m.n = static_cast<double>(a.size() + b.size());
    double s = 0.0;
    for (const double v : a) s += v;
    for (const double v : b) s += v;
    m.mean_a = m.mean_b = s / m.n;
    double ss = 0.0;
    for (const double v : a) ss += (v - m.mean_a) * (v - m.mean_a);
    for (const double v : b) ss += (v - m.mean_a) * (v - m.mean_a);
    m.value = ss / m.n;
    return m;
}

Moment covariance_moment(std::span<const double> a, std::span<const double> b) {
    Moment m;
    m.n = static_cast<double>(a.size());
    m.mean_a = mean_of(a);
    m.mean_b = mean_of(b);
    double c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] - m.mean_a) * (b[i] - m.mean_b);
    m.value = c / m.n;
    return m;
}

// Influence of one observation on a second-moment estimate.
double influence(const Moment& m, double a, double b) {
    return ((a - m.mean_a) * (b - m.mean_b) - m.value) / m.n;
}

// Fills gamma, standard_errors and element_covariance from element values
// (unbiased, natural units) and the accumulated influence products.
void finish_estimate(CovarianceEstimate& out, const ElementVector& values, const ElementMatrix& influence_sum,
                     int n_elements) {
    constexpr double v0 = kVacuumVariance;
    out.gamma.setZero();
    out.standard_errors.setZero();
    out.element_covariance = influence_sum / (v0 * v0);
    for (int k = 0; k < n_elements; ++k) {
        const auto [i, j] = kMatrixElements[k];
        out.gamma(i, j) = out.gamma(j, i) = values(k) / v0;
        out.standard_errors(i, j) = out.standard_errors(j, i) = std::sqrt(out.element_covariance(k, k));
    }
}

double propagate_vector(const CovarianceEstimate& e, const ElementVector& d) {
    if (e.element_covariance.isZero(0.0)) {
        double var = 0.0;
        for (int k = 0; k < 10; ++k) {
            const auto [i, j] = kMatrixElements[k];
            var += d(k) * d(k) * e.standard_errors(i, j) * e.standard_errors(i, j);
        }
        return std::sqrt(var);
    }
    return std::sqrt(std::max(0.0, d.dot(e.element_covariance * d)));
}

}  // namespace

double propagate_error(const CovarianceEstimate& estimate, const Eigen::Matrix4d& gradient) {
    ElementVector d;
    for (int k = 0; k < 10; ++k) {
        const auto [i, j] = kMatrixElements[k];
        d(k) = i == j ? gradient(i, i) : gradient(i, j) + gradient(j, i);
    }
    return propagate_vector(estimate, d);
}

Estimate sample_variance(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) {
        throw InsufficientData("sample_variance needs at least 2 samples");
    }
    const double mu = mean_of(x);
    double m2 = 0.0, m4 = 0.0;
    for (const double v : x) {
        const double d2 = (v - mu) * (v - mu);
        m2 += d2;
        m4 += d2 * d2;
    }
    const double nn = static_cast<double>(n);
    const double unbiased = m2 / (nn - 1.0);
    m2 /= nn;
    m4 /= nn;
    return Estimate{unbiased, std::sqrt(std::max(0.0, m4 - m2 * m2) / nn)};
}

Estimate sample_covariance(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (y.size() != n) {
        throw InvalidConfig("sample_covariance: inputs differ in length");
    }
    if (n < 2) {
        throw InsufficientData("sample_covariance needs at least 2 samples");
    }
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double c = 0.0, c22 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = (x[i] - mx) * (y[i] - my);
        c += p;
        c22 += p * p;
    }
    const double nn = static_cast<double>(n);
    const double unbiased = c / (nn - 1.0);
    const double biased = c / nn;
    c22 /= nn;
    return Estimate{unbiased, std::sqrt(std::max(0.0, c22 - biased * biased) / nn)};
}

const SettingSamples& find_setting(const EnsembleResult& ensemble, Quad a, Quad b) {
    for (const auto& s : ensemble.settings) {
        if (angle_is(s.setting.angle_a, a) && angle_is(s.setting.angle_b, b)) return s;
    }
    throw InsufficientData("ensemble has no " + setting_name(a, b) + " detector setting");
}

CovarianceEstimate estimate_covariance(const SettingSamples& xx, const SettingSamples& xp,
                                       const SettingSamples& px, const SettingSamples& pp) {
    require_samples(xx, setting_name(Quad::X, Quad::X));
    require_samples(xp, setting_name(Quad::X, Quad::P));
    require_samples(px, setting_name(Quad::P, Quad::X));
    require_samples(pp, setting_name(Quad::P, Quad::P));

    // Variances pool every setting that reads the quadrature; each
    // inter-modal covariance comes from its own setting.
    const Moment xa = variance_moment(xx.q_a, xp.q_a);
    const Moment pa = variance_moment(px.q_a, pp.q_a);
    const Moment xb = variance_moment(xx.q_b, px.q_b);
    const Moment pb = variance_moment(xp.q_b, pp.q_b);
    const Moment xa_xb = covariance_moment(xx.q_a, xx.q_b);
    const Moment xa_pb = covariance_moment(xp.q_a, xp.q_b);
    const Moment pa_xb = covariance_moment(px.q_a, px.q_b);
    const Moment pa_pb = covariance_moment(pp.q_a, pp.q_b);

    ElementVector values = ElementVector::Zero();
    auto unbiased = [](const Moment& m) { return m.value * m.n / (m.n - 1.0); };
    values << unbiased(xa), unbiased(pa), unbiased(xb), unbiased(pb), unbiased(xa_xb), unbiased(xa_pb),
        unbiased(pa_xb), unbiased(pa_pb), 0.0, 0.0;

    // Settings are independent, so the sampling covariance is a sum over
    // observations of outer products of their influence vectors.
    ElementMatrix acc = ElementMatrix::Zero();
    auto accumulate = [&acc](const SettingSamples& s, int var_a, const Moment& ma, int var_b, const Moment& mb,
                             int cross, const Moment& mc) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double a = s.q_a[i], b = s.q_b[i];
            ElementVector v = ElementVector::Zero();
            v(var_a) = influence(ma, a, a);
            v(var_b) = influence(mb, b, b);
            v(cross) = influence(mc, a, b);
            acc.noalias() += v * v.transpose();
        }
    };
    accumulate(xx, E_XA, xa, E_XB, xb, E_XA_XB, xa_xb);
    accumulate(xp, E_XA, xa, E_PB, pb, E_XA_PB, xa_pb);
    accumulate(px, E_PA, pa, E_XB, xb, E_PA_XB, pa_xb);
    accumulate(pp, E_PA, pa, E_PB, pb, E_PA_PB, pa_pb);

    CovarianceEstimate out;
    finish_estimate(out, values, acc, 8);
    out.samples_per_setting = {xx.size(), xp.size(), px.size(), pp.size()};
    return out;
}

CovarianceEstimate estimate_covariance(const EnsembleResult& ensemble, const CovarianceOptions& options) {
    if (ensemble.phase_space.empty()) {
        if (options.estimate_intramodal) {
            throw InsufficientData("intra-modal covariances need a joint-mode ensemble");
        }
        return estimate_covariance(
            find_setting(ensemble, Quad::X, Quad::X), find_setting(ensemble, Quad::X, Quad::P),
            find_setting(ensemble, Quad::P, Quad::X), find_setting(ensemble, Quad::P, Quad::P));
    }

    const auto& shots = ensemble.phase_space;
    const std::size_t n = shots.size();
    if (n < 2) {
        throw InsufficientData("joint ensemble has " + std::to_string(n) + " accepted samples; need at least 2");
    }
    std::array<std::vector<double>, 4> q;
    for (auto& v : q) v.reserve(n);
    for (const auto& s : shots) {
        for (std::size_t k = 0; k < 4; ++k) q[k].push_back(s[k]);
    }
    const int n_elements = options.estimate_intramodal ? 10 : 8;
    std::array<Moment, 10> moments;
    ElementVector values = ElementVector::Zero();
    for (int k = 0; k < n_elements; ++k) {
        const auto [i, j] = kMatrixElements[k];
        moments[k] = covariance_moment(q[i], q[j]);
        values(k) = moments[k].value * moments[k].n / (moments[k].n - 1.0);
    }
    ElementMatrix acc = ElementMatrix::Zero();
    for (const auto& s : shots) {
        ElementVector v = ElementVector::Zero();
        for (int k = 0; k < n_elements; ++k) {
            const auto [i, j] = kMatrixElements[k];
            v(k) = influence(moments[k], s[i], s[j]);
        }
        acc.noalias() += v * v.transpose();
    }
    CovarianceEstimate out;
    finish_estimate(out, values, acc, n_elements);
    out.samples_per_setting = {n, n, n, n};
    out.intramodal_estimated = options.estimate_intramodal;
    return out;
}

Estimate total_variance(const CovarianceEstimate& e) {
    const auto& g = e.gamma;
    const double value = (g(0, 0) + g(2, 2) + 2.0 * g(0, 2) + g(1, 1) + g(3, 3) - 2.0 * g(1, 3)) / 4.0;
    Eigen::Matrix4d grad = Eigen::Matrix4d::Zero();
    grad.diagonal().setConstant(0.25);
    grad(0, 2) = grad(2, 0) = 0.25;
    grad(1, 3) = grad(3, 1) = -0.25;
    return Estimate{value, propagate_error(e, grad)};
}

Estimate var_xplus(const SettingSamples& xx) {
    require_samples(xx, setting_name(Quad::X, Quad::X));
    std::vector<double> sum(xx.size());
    for (std::size_t i = 0; i < xx.size(); ++i) sum[i] = xx.q_a[i] + xx.q_b[i];
    return sample_variance(sum);
}

Estimate var_pminus(const SettingSamples& pp) {
    require_samples(pp, setting_name(Quad::P, Quad::P));
    std::vector<double> diff(pp.size());
    for (std::size_t i = 0; i < pp.size(); ++i) diff[i] = pp.q_a[i] - pp.q_b[i];
    return sample_variance(diff);
}

Estimate total_variance(const SettingSamples& xx, const SettingSamples& pp) {
    const Estimate xplus = var_xplus(xx);
    const Estimate pminus = var_pminus(pp);
    // Each nonlocal variance is 2 * kVacuumVariance for vacuum.
    const double norm = 4.0 * kVacuumVariance;
    return Estimate{(xplus.value + pminus.value) / norm, std::hypot(xplus.se, pminus.se) / norm};
}

DeterminantPurity determinant_purity(const CovarianceEstimate& e) {
    const double d = e.gamma.determinant();
    if (!(d > 0.0)) {
        throw InvalidEstimate("covariance estimate has non-positive determinant " + std::to_string(d));
    }
    // dD/dgamma_ij = cofactor_ij = D * inv(gamma)_ji.
    const Eigen::Matrix4d cof = d * e.gamma.inverse().transpose();
    DeterminantPurity out;
    out.determinant = d;
    out.determinant_se = propagate_error(e, cof);
    out.purity = 1.0 / std::sqrt(d);
    out.purity_se = 0.5 * std::pow(d, -1.5) * out.determinant_se;
    return out;
}

LogNegativity log_negativity(const Eigen::Matrix4d& gamma) {
    const double det_a = gamma.block<2, 2>(0, 0).determinant();
    const double det_b = gamma.block<2, 2>(2, 2).determinant();
    const double det_c = gamma.block<2, 2>(0, 2).determinant();
    const double det_g = gamma.determinant();

    LogNegativity out;
    out.nu_min = smallest_symplectic_eigenvalue(det_a, det_b, det_c, det_g);
    // Partial transposition (P_B -> -P_B) flips the sign of det C.
    out.nu_tilde = smallest_symplectic_eigenvalue(det_a, det_b, -det_c, det_g);
    // nu_tilde within rounding of 1 counts as separable.
    out.value = out.nu_tilde < 1.0 - 1e-12 ? -std::log2(out.nu_tilde) : 0.0;
    if (out.nu_min < 1.0 - 1e-9) {
        out.physical = false;
        out.warning = "matrix violates the uncertainty relation (smallest symplectic eigenvalue " +
                      std::to_string(out.nu_min) + " < 1)";
    }
    return out;
}

LogNegativity log_negativity(const CovarianceEstimate& e) {
    LogNegativity out = log_negativity(e.gamma);
    ElementVector d = ElementVector::Zero();
    for (int k = 0; k < 10; ++k) {
        const auto [i, j] = kMatrixElements[k];
        if (e.standard_errors(i, j) == 0.0) continue;
        const double h = 1e-6 * std::max(1.0, std::abs(e.gamma(i, j)));
        Eigen::Matrix4d up = e.gamma, down = e.gamma;
        up(i, j) += h;
        down(i, j) -= h;
        up(j, i) = up(i, j);
        down(j, i) = down(i, j);
        d(k) = (log_negativity(up).value - log_negativity(down).value) / (2.0 * h);
    }
    out.se = propagate_vector(e, d);
    return out;
}

std::vector<double> xplus_samples(const SettingSamples& xx) {
    std::vector<double> out(xx.size());
    for (std::size_t i = 0; i < xx.size(); ++i) out[i] = xx.q_a[i] + xx.q_b[i];
    return out;
}

Estimate gaussianity(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < kMinKurtosisSamples) {
        throw InsufficientData("kurtosis needs at least 1000 samples, got " + std::to_string(n));
    }
    const double mu = mean_of(samples);
    double m2 = 0.0, m4 = 0.0;
    for (const double v : samples) {
        const double d2 = (v - mu) * (v - mu);
        m2 += d2;
        m4 += d2 * d2;
    }
    const double nn = static_cast<double>(n);
    m2 /= nn;
    m4 /= nn;
    const double g2 = m4 / (m2 * m2) - 3.0;
    const double se = std::sqrt(24.0 * nn * (nn - 1.0) * (nn - 1.0) /
                                ((nn - 3.0) * (nn - 2.0) * (nn + 3.0) * (nn + 5.0)));
    return Estimate{g2, se};
}

MetricsReport compute_report(const EnsembleResult& ensemble) {
    MetricsReport r;
    r.success_rate = Estimate{ensemble.success_rate(), ensemble.success_rate_se()};
    r.accepted = ensemble.accepted;
    const SettingSamples& xx = find_setting(ensemble, Quad::X, Quad::X);
    const SettingSamples& pp = find_setting(ensemble, Quad::P, Quad::P);
    r.covariance = estimate_covariance(ensemble);
    r.var_xplus = var_xplus(xx);
    r.var_pminus = var_pminus(pp);
    // Joint-mode settings share shots, so X+ and P- are correlated; the matrix
    // path carries that correlation and gives the same value.
    r.total_variance = ensemble.phase_space.empty() ? total_variance(xx, pp) : total_variance(r.covariance);
    r.determinant = determinant_purity(r.covariance);
    r.log_negativity = log_negativity(r.covariance);
    if (xx.size() >= kMinKurtosisSamples) {
        r.kurtosis = gaussianity(xplus_samples(xx));
    } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.kurtosis = Estimate{nan, nan};
    }
    return r;
}

}  // namespace cvdistill
