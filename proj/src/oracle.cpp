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

#include "cvdistill/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "cvdistill/errors.hpp"

namespace cvdistill {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInvSqrt2 = 0.70710678118654752440;
// Nodes whose normalized weight is below this carry < 1e-14 total mass.
constexpr double kNodePruneWeight = 1e-16;

// Neumaier-compensated running sum; fixed summation order keeps results
// reproducible.
class CompensatedSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// E[S^2 | |S| < Q] / sigma_S^2 for S ~ N(0, sigma_S^2), with q = Q / sigma_S.
double truncated_second_moment_ratio(double q) {
    if (std::isinf(q)) return 1.0;
    if (q < 0.05) {
        const double q2 = q * q;
        const double num = q2 * (1.0 / 3.0 - q2 * (1.0 / 10.0 - q2 * (1.0 / 56.0 - q2 / 432.0)));
        const double den = 1.0 - q2 * (1.0 / 6.0 - q2 * (1.0 / 40.0 - q2 * (1.0 / 336.0 - q2 / 3456.0)));
        return num / den;
    }
    const double density = std::exp(-0.5 * q * q) / std::sqrt(2.0 * kPi);
    return 1.0 - 2.0 * q * density / std::erf(q / kSqrt2);
}

// Linear functional sum_m u_m X_m + w_m P_m over the unrotated, lossy input
// modes (A1, B1, A2, B2).
struct Functional {
    std::array<double, 4> u{};
    std::array<double, 4> w{};
};

// Second moments of one lossy v-class copy: arm variances and the A-B
// cross-covariance for each quadrature. No X-P correlations exist.
struct CopyMoments {
    double var_x, cross_x, var_p, cross_p;
};

CopyMoments copy_moments(const ProtocolConfig& cfg) {
    const double v0 = kVacuumVariance;
    const double vx = v0 * std::pow(10.0, -cfg.squeezing_db / 10.0);
    const double vp = v0 * std::pow(10.0, cfg.antisqueezing_db / 10.0);
    const double eta = cfg.eta;
    // Balanced mixing with vacuum, then loss eta on each arm.
    return CopyMoments{
        .var_x = eta * 0.5 * (vx + v0) + (1.0 - eta) * v0,
        .cross_x = eta * 0.5 * (vx - v0),
        .var_p = eta * 0.5 * (vp + v0) + (1.0 - eta) * v0,
        .cross_p = eta * 0.5 * (vp - v0),
    };
}

double covariance(const Functional& f, const Functional& g, const CopyMoments& c) {
    double total = 0.0;
    // Copies occupy (A1, B1) = (0, 1) and (A2, B2) = (2, 3); they are independent.
    for (int a = 0; a < 4; a += 2) {
        const int b = a + 1;
        total += (f.u[a] * g.u[a] + f.u[b] * g.u[b]) * c.var_x + (f.u[a] * g.u[b] + f.u[b] * g.u[a]) * c.cross_x +
                 (f.w[a] * g.w[a] + f.w[b] * g.w[b]) * c.var_p + (f.w[a] * g.w[b] + f.w[b] * g.w[a]) * c.cross_p;
    }
    return total;
}

struct AxisRule {
    std::vector<double> theta;
    std::vector<double> weight;
};

AxisRule axis_rule(const QuadratureGrid& grid, double sigma) {
    AxisRule rule;
    if (sigma == 0.0) {
        rule.theta = {0.0};
        rule.weight = {1.0};
        return rule;
    }
    for (int k = 0; k < grid.order(); ++k) {
        if (grid.weights()[k] < kNodePruneWeight) continue;
        rule.theta.push_back(sigma * grid.nodes()[k]);
        rule.weight.push_back(grid.weights()[k]);
    }
    return rule;
}

}  // namespace

QuadratureGrid QuadratureGrid::gauss_hermite(int order) {
    if (order < 2) {
        throw InvalidConfig("Gauss-Hermite order must be at least 2, got " + std::to_string(order));
    }
    const auto n = static_cast<Eigen::Index>(order);
    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
    // recurrence, then Newton polishing of each node.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) {
        jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);

    // Orthonormal Hermite values h_0..h_order at x.
    auto orthonormal = [order](double x, std::vector<double>& h) {
        h.assign(static_cast<std::size_t>(order) + 1, 0.0);
        h[0] = 1.0;
        h[1] = x;
        for (int k = 1; k < order; ++k) {
            h[k + 1] = (x * h[k] - std::sqrt(static_cast<double>(k)) * h[k - 1]) / std::sqrt(k + 1.0);
        }
    };

    QuadratureGrid grid;
    std::vector<double> h;
    for (Eigen::Index k = 0; k < n; ++k) {
        double x = solver.eigenvalues()(k);
        for (int it = 0; it < 8; ++it) {
            orthonormal(x, h);
            // h_n' = sqrt(n) h_{n-1}
            const double step = h[order] / (std::sqrt(static_cast<double>(order)) * h[order - 1]);
            x -= step;
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
        }
        orthonormal(x, h);
        double christoffel = 0.0;
        for (int j = 0; j < order; ++j) christoffel += h[j] * h[j];
        grid.nodes_.push_back(x);
        grid.weights_.push_back(1.0 / christoffel);
    }
    return grid;
}

std::vector<OracleMoments> oracle_sweep(const ProtocolConfig& cfg, std::span<const double> thresholds,
                                        int order) {
    cfg.validate();
    for (const double q : thresholds) {
        if (!(q > 0.0)) throw InvalidConfig("oracle: thresholds must be positive");
    }
    const QuadratureGrid grid = QuadratureGrid::gauss_hermite(order);
    const CopyMoments copy = copy_moments(cfg);
    const PhaseNoiseSpec noise = cfg.noise();
    std::array<AxisRule, 4> axes;
    for (std::size_t m = 0; m < 4; ++m) axes[m] = axis_rule(grid, noise.sigma[m]);

    const std::size_t n_q = thresholds.size();
    std::vector<CompensatedSum> prob(n_q);
    std::vector<std::array<CompensatedSum, 10>> moment(n_q);
    constexpr std::array<std::pair<int, int>, 10> kPairs{{{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1},
                                                          {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}}};

    const double alpha = cfg.trigger_angle;
    std::array<double, 4> theta{};
    std::array<double, 4> weight{};

    auto visit_node = [&] {
        const double w = weight[0] * weight[1] * weight[2] * weight[3];
        std::array<double, 4> c0{}, s0{}, ct{}, st{};
        for (int m = 0; m < 4; ++m) {
            c0[m] = std::cos(theta[m]);
            s0[m] = std::sin(theta[m]);
            ct[m] = std::cos(theta[m] + alpha);
            st[m] = std::sin(theta[m] + alpha);
        }
        // Measuring angle phi on a mode rotated by theta reads the original
        // quadrature at angle theta + phi.
        Functional trigger;
        for (int m = 0; m < 4; ++m) {
            trigger.u[m] = kInvSqrt2 * ct[m];
            trigger.w[m] = kInvSqrt2 * st[m];
        }
        // Verification mode of side s is (mode_1 - mode_2)/sqrt2.
        std::array<Functional, 4> v;
        for (int side = 0; side < 2; ++side) {
            const int m1 = side;      // A1 or B1
            const int m2 = side + 2;  // A2 or B2
            Functional& x = v[2 * side];
            Functional& p = v[2 * side + 1];
            x.u[m1] = kInvSqrt2 * c0[m1];
            x.w[m1] = kInvSqrt2 * s0[m1];
            x.u[m2] = -kInvSqrt2 * c0[m2];
            x.w[m2] = -kInvSqrt2 * s0[m2];
            // angle pi/2: (cos, sin)(theta + pi/2) = (-sin theta, cos theta)
            p.u[m1] = -kInvSqrt2 * s0[m1];
            p.w[m1] = kInvSqrt2 * c0[m1];
            p.u[m2] = kInvSqrt2 * s0[m2];
            p.w[m2] = -kInvSqrt2 * c0[m2];
        }

        const double var_s = covariance(trigger, trigger, copy);
        std::array<double, 4> beta{};
        for (int i = 0; i < 4; ++i) beta[i] = covariance(v[i], trigger, copy) / var_s;
        std::array<double, 10> residual{};
        for (std::size_t k = 0; k < kPairs.size(); ++k) {
            const auto [i, j] = kPairs[k];
            residual[k] = covariance(v[i], v[j], copy) - beta[i] * beta[j] * var_s;
        }
        const double sigma_s = std::sqrt(var_s);
        for (std::size_t t = 0; t < n_q; ++t) {
            const double q = thresholds[t] / sigma_s;
            const double p = std::isinf(q) ? 1.0 : std::erf(q / kSqrt2);
            const double s2 = var_s * truncated_second_moment_ratio(q);
            const double wp = w * p;
            prob[t].add(wp);
            for (std::size_t k = 0; k < kPairs.size(); ++k) {
                const auto [i, j] = kPairs[k];
                moment[t][k].add(wp * (residual[k] + beta[i] * beta[j] * s2));
            }
        }
    };

    for (std::size_t i0 = 0; i0 < axes[0].theta.size(); ++i0) {
        theta[0] = axes[0].theta[i0];
        weight[0] = axes[0].weight[i0];
        for (std::size_t i1 = 0; i1 < axes[1].theta.size(); ++i1) {
            theta[1] = axes[1].theta[i1];
            weight[1] = axes[1].weight[i1];
            for (std::size_t i2 = 0; i2 < axes[2].theta.size(); ++i2) {
                theta[2] = axes[2].theta[i2];
                weight[2] = axes[2].weight[i2];
                for (std::size_t i3 = 0; i3 < axes[3].theta.size(); ++i3) {
                    theta[3] = axes[3].theta[i3];
                    weight[3] = axes[3].weight[i3];
                    visit_node();
                }
            }
        }
    }

    std::vector<OracleMoments> out;
    out.reserve(n_q);
    for (std::size_t t = 0; t < n_q; ++t) {
        OracleMoments r;
        r.threshold = thresholds[t];
        r.success_rate = prob[t].value();
        if (!(r.success_rate > 1e-300)) {
            throw EmptyEnsemble("oracle: vanishing acceptance probability at Q = " + std::to_string(thresholds[t]));
        }
        for (std::size_t k = 0; k < kPairs.size(); ++k) {
            const auto [i, j] = kPairs[k];
            r.moments(i, j) = r.moments(j, i) = moment[t][k].value() / r.success_rate;
        }
        out.push_back(r);
    }
    return out;
}

double oracle_success_rate(const ProtocolConfig& cfg, int order) {
    const double q = cfg.threshold;
    return oracle_sweep(cfg, std::span<const double>(&q, 1), order).front().success_rate;
}

OracleMoments oracle_conditional_moments(const ProtocolConfig& cfg, int order) {
    const double q = cfg.threshold;
    return oracle_sweep(cfg, std::span<const double>(&q, 1), order).front();
}

ConvergenceCheck oracle_convergence(const ProtocolConfig& cfg, std::span<const double> thresholds, int order,
                                    double tolerance) {
    const auto coarse = oracle_sweep(cfg, thresholds, order);
    const auto fine = oracle_sweep(cfg, thresholds, 2 * order);
    ConvergenceCheck out;
    for (std::size_t t = 0; t < coarse.size(); ++t) {
        out.max_abs_change = std::max(out.max_abs_change, std::abs(coarse[t].success_rate - fine[t].success_rate));
        out.max_abs_change =
            std::max(out.max_abs_change, (coarse[t].moments - fine[t].moments).cwiseAbs().maxCoeff());
    }
    out.converged = out.max_abs_change < tolerance;
    return out;
}

}  // namespace cvdistill
