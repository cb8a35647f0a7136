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

// Parameter sweeps, dataset files and the Monte Carlo vs oracle gate.
//
// Dataset files written by run_sweep are a function of (spec, seed) only and
// are byte-identical across runs and worker counts. Timing goes to the
// manifest, never to the datasets.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvdistill/oracle.hpp"
#include "cvdistill/protocol.hpp"
#include "cvdistill/tomography.hpp"

namespace cvdistill {

const char* version();

enum Dataset : unsigned {
    kFig2a = 1u << 0,  // Var(X+) and success rate vs Q
    kFig2b = 1u << 1,  // total variance vs success rate
    kFig3 = 1u << 2,   // covariance matrices per point
    kFig4 = 1u << 3,   // determinant vs success rate
    kAllDatasets = kFig2a | kFig2b | kFig3 | kFig4,
};

/// Parses "fig2a", "fig2b", "fig3", "fig4", "all" or a comma list of them.
unsigned parse_datasets(std::string_view text);

std::vector<double> default_q_grid();
std::vector<double> default_sigma_list();

struct SweepSpec {
    std::vector<double> q_grid = default_q_grid();
    std::vector<double> sigma_list = default_sigma_list();
    ProtocolConfig base;
    unsigned outputs = kAllDatasets;
    std::filesystem::path output_path = "cvdistill_out";

    /// Nonempty grids, strictly increasing positive Q grid (+inf may close it),
    /// non-negative finite sigmas, valid base config.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Config files: one "key = value" per line, '#' starts a comment. Keys mirror
// the ProtocolConfig / SweepSpec field names.

using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(std::string_view text);
ConfigMap read_config_file(const std::filesystem::path& path);

/// Applies known keys to spec; throws InvalidConfig on unknown keys or bad values.
void apply_config(const ConfigMap& values, SweepSpec& spec);

/// Comma-separated reals; "inf" is accepted.
std::vector<double> parse_real_list(std::string_view text);

/// Canonical key/value echo of a spec (the inverse of apply_config).
ConfigMap config_echo(const SweepSpec& spec);

// ---------------------------------------------------------------------------
// Sweeps

/// Points with fewer accepted shots are flagged low_stats.
inline constexpr std::uint64_t kLowStatsThreshold = 100;

enum class PointFlag { ok, low_stats, empty, insufficient };
const char* flag_name(PointFlag flag);

struct SweepRow {
    double sigma_pn = 0.0;
    double threshold = 0.0;
    /// Q / sqrt(Var(x_TA + x_TB)) over all shots of the point.
    double threshold_normalized = 0.0;
    std::uint64_t total = 0;
    PointFlag flag = PointFlag::ok;
    /// Filled unless flag is empty or insufficient.
    std::optional<MetricsReport> report;
    double runtime_seconds = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<std::filesystem::path> files;
};

/// Runs every (sigma, Q) point and writes the selected datasets plus
/// sweep.csv, sweep.jsonl and manifest.json under spec.output_path.
SweepResult run_sweep(const SweepSpec& spec, std::size_t workers = default_workers(),
                      std::ostream* progress = nullptr);

/// Column order of sweep.csv. Part of the file contract.
const std::vector<std::string>& sweep_csv_columns();

// ---------------------------------------------------------------------------
// Verification against the oracle

struct VerifyEntry {
    double sigma_pn = 0.0;
    double threshold = 0.0;
    std::string quantity;
    double monte_carlo = 0.0;
    double monte_carlo_se = 0.0;
    double oracle = 0.0;
    double z = 0.0;
};

struct VerifyOptions {
    int oracle_order = kDefaultOracleOrder;
    double z_limit = 4.0;
    bool check_convergence = true;
    /// Replaces the distillation beam splitters in the Monte Carlo path only.
    std::optional<SymplecticMatrix> distillation_override;
};

struct VerifyReport {
    std::vector<VerifyEntry> entries;
    /// Points skipped because nothing (or too little) was accepted.
    std::vector<std::pair<double, double>> skipped_points;
    ConvergenceCheck convergence{0.0, true};
    double max_abs_z = 0.0;
    double z_limit = 4.0;

    bool agreement() const { return max_abs_z <= z_limit; }
    bool passed() const { return agreement() && convergence.converged; }
};

/// The reported quantities checked per point: success_rate, var_xplus,
/// var_pminus, I and the eight estimated elements of the normalized matrix.
const std::vector<std::string>& verify_quantities();

/// z = (MC - oracle) / SE_MC for every point of the spec's grid.
VerifyReport verify(const SweepSpec& spec, const VerifyOptions& options = {},
                    std::size_t workers = default_workers(), std::ostream* progress = nullptr);

void write_verify_csv(const VerifyReport& report, std::ostream& out);

/// Shortest round-trip decimal representation ("inf", "nan" for specials).
std::string format_real(double value);

}  // namespace cvdistill
