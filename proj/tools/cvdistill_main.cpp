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

// cvdistill command-line driver: sweeps, oracle verification and eta
// calibration. Data goes to files or stdout, progress to stderr.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cvdistill/calibration.hpp"
#include "cvdistill/errors.hpp"
#include "cvdistill/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidConfig = 2;
constexpr int kExitVerifyFailed = 3;
constexpr int kExitEmptyEnsemble = 4;

struct Options {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> shots;
    std::optional<std::string> q_grid;
    std::optional<std::string> sigma;
    std::optional<double> eta;
    std::optional<std::string> out;
    std::optional<std::string> outputs;
    std::optional<std::string> sampling;
    std::optional<double> squeezing;
    std::optional<double> antisqueezing;
    std::optional<double> trigger_angle;
    std::optional<double> calibrate_target;
    int oracle_order = cvdistill::kDefaultOracleOrder;
    bool verify = false;
    bool quiet = false;
};

cvdistill::SweepSpec build_spec(const Options& o) {
    using namespace cvdistill;
    SweepSpec spec;
    if (o.config) apply_config(read_config_file(*o.config), spec);

    // Flags override the file; route them through the same parser.
    ConfigMap flags;
    if (o.seed) flags["seed"] = std::to_string(*o.seed);
    if (o.shots) flags["n_shots"] = *o.shots;
    if (o.q_grid) flags["q_grid"] = *o.q_grid;
    if (o.sigma) flags["sigma_list"] = *o.sigma;
    if (o.eta) flags["eta"] = format_real(*o.eta);
    if (o.out) flags["output_path"] = *o.out;
    if (o.outputs) flags["outputs"] = *o.outputs;
    if (o.sampling) flags["sampling_mode"] = *o.sampling;
    if (o.squeezing) flags["squeezing_db"] = format_real(*o.squeezing);
    if (o.antisqueezing) flags["antisqueezing_db"] = format_real(*o.antisqueezing);
    if (o.trigger_angle) flags["trigger_angle"] = format_real(*o.trigger_angle);
    apply_config(flags, spec);
    spec.validate();
    return spec;
}

int run(const Options& o) {
    using namespace cvdistill;
    const SweepSpec spec = build_spec(o);
    std::ostream* progress = o.quiet ? nullptr : &std::cerr;

    if (o.calibrate_target) {
        const double eta = calibrate_eta(*o.calibrate_target, spec.base);
        ProtocolConfig cfg = spec.base;
        cfg.eta = eta;
        std::cout << "eta," << format_real(eta) << "\n"
                  << "I," << format_real(noiseless_total_variance(cfg)) << "\n";
        return kExitOk;
    }

    if (o.verify) {
        VerifyOptions vo;
        vo.oracle_order = o.oracle_order;
        const VerifyReport report = verify(spec, vo, default_workers(), progress);
        write_verify_csv(report, std::cout);
        for (const auto& [s, q] : report.skipped_points) {
            std::cerr << "[verify] skipped sigma_pn=" << format_real(s) << " Q=" << format_real(q)
                      << " (empty or insufficient ensemble)\n";
        }
        if (!report.convergence.converged) {
            std::cerr << "[verify] FAIL: oracle not converged (max change between orders "
                      << report.convergence.max_abs_change << ")\n";
        }
        if (!report.agreement()) {
            std::cerr << "[verify] FAIL: Monte Carlo disagrees with oracle, max |z| = " << report.max_abs_z
                      << " > " << report.z_limit << "\n";
        }
        if (!report.passed()) return kExitVerifyFailed;
        std::cerr << "[verify] PASS: max |z| = " << report.max_abs_z << " over " << report.entries.size()
                  << " comparisons\n";
        return kExitOk;
    }

    const SweepResult result = run_sweep(spec, default_workers(), progress);
    bool any_empty = false;
    for (const auto& row : result.rows) any_empty = any_empty || row.flag == PointFlag::empty;
    for (const auto& f : result.files) std::cout << f.string() << "\n";
    std::cout << (spec.output_path / "manifest.json").string() << "\n";
    if (any_empty) {
        std::cerr << "[sweep] at least one point accepted no shots (flagged 'empty' in the datasets)\n";
        return kExitEmptyEnsemble;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entanglement distillation of phase-diffused two-mode states: Monte Carlo sweeps "
                 "and quadrature-oracle verification."};
    app.set_version_flag("--version", std::string(cvdistill::version()));

    Options o;
    app.add_option("--config", o.config, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--shots", o.shots, "shots per sigma value");
    app.add_option("--q-grid", o.q_grid, "comma-separated thresholds, 'inf' allowed");
    app.add_option("--sigma", o.sigma, "comma-separated phase-noise strengths (rad)");
    app.add_option("--eta", o.eta, "transmission of each channel");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--outputs", o.outputs, "fig2a,fig2b,fig3,fig4 or all");
    app.add_option("--sampling", o.sampling, "per-setting or joint");
    app.add_option("--squeezing", o.squeezing, "squeezing in dB");
    app.add_option("--antisqueezing", o.antisqueezing, "anti-squeezing in dB");
    app.add_option("--advanced-trigger-angle", o.trigger_angle, "trigger homodyne angle (rad), default X");
    app.add_option("--oracle-order", o.oracle_order, "Gauss-Hermite order for --verify");
    app.add_option("--calibrate-eta", o.calibrate_target, "print eta giving this noiseless total variance");
    app.add_flag("--verify", o.verify, "compare Monte Carlo against the oracle");
    app.add_flag("-q,--quiet", o.quiet, "no progress on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalidConfig;
    }

    try {
        return run(o);
    } catch (const cvdistill::InvalidConfig& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const cvdistill::PhysicalityError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const cvdistill::EmptyEnsemble& e) {
        std::cerr << "empty ensemble: " << e.what() << "\n";
        return kExitEmptyEnsemble;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
