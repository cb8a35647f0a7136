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

#include "cvdistill/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cvdistill/errors.hpp"

#ifndef CVDISTILL_VERSION
#define CVDISTILL_VERSION "unknown"
#endif

namespace cvdistill {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

double parse_real(std::string_view text, std::string_view key) {
    const std::string t(trim(text));
    if (t == "inf" || t == "+inf" || t == "infinity") return kInf;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw InvalidConfig("invalid number '" + t + "' for " + std::string(key));
    }
    return value;
}

std::uint64_t parse_count(std::string_view text, std::string_view key) {
    const std::string t(trim(text));
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        // Accept integral scientific notation such as 1e6.
        const double d = parse_real(t, key);
        if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19) {
            throw InvalidConfig("invalid count '" + t + "' for " + std::string(key));
        }
        return static_cast<std::uint64_t>(d);
    }
    return value;
}

double parse_angle(std::string_view text) {
    const std::string t(trim(text));
    if (t == "X" || t == "x") return 0.0;
    if (t == "P" || t == "p") return kHalfPi;
    return parse_real(t, "bhd_settings");
}

std::string format_angle(double angle) {
    if (angle == 0.0) return "X";
    if (angle == kHalfPi) return "P";
    return format_real(angle);
}

std::string join_reals(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += format_real(values[i]);
    }
    return out;
}

std::string datasets_name(unsigned mask) {
    if (mask == kAllDatasets) return "all";
    std::string out;
    for (const auto& [bit, name] : {std::pair{kFig2a, "fig2a"}, std::pair{kFig2b, "fig2b"},
                                    std::pair{kFig3, "fig3"}, std::pair{kFig4, "fig4"}}) {
        if (mask & bit) {
            if (!out.empty()) out += ",";
            out += name;
        }
    }
    return out;
}

double variance_of(const std::vector<double>& x) {
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mean = 0.0;
    for (const double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (const double v : x) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(x.size() - 1);
}

struct CsvWriter {
    std::ofstream out;

    explicit CsvWriter(const std::filesystem::path& path) : out(path, std::ios::binary) {
        if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    }
};

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Values of one sweep row keyed by the sweep.csv column name.
std::map<std::string, double> row_values(const SweepRow& r) {
    std::map<std::string, double> v;
    v["sigma_pn"] = r.sigma_pn;
    v["Q"] = r.threshold;
    v["Q_normalized"] = r.threshold_normalized;
    v["total"] = static_cast<double>(r.total);
    const bool has = r.report.has_value();
    const MetricsReport* m = has ? &*r.report : nullptr;
    v["accepted"] = has ? static_cast<double>(m->accepted) : 0.0;
    v["success_rate"] = has ? m->success_rate.value : 0.0;
    v["success_rate_se"] = has ? m->success_rate.se : 0.0;
    v["var_xplus"] = has ? m->var_xplus.value : kNaN;
    v["var_xplus_se"] = has ? m->var_xplus.se : kNaN;
    v["var_pminus"] = has ? m->var_pminus.value : kNaN;
    v["var_pminus_se"] = has ? m->var_pminus.se : kNaN;
    v["I"] = has ? m->total_variance.value : kNaN;
    v["I_se"] = has ? m->total_variance.se : kNaN;
    v["D"] = has ? m->determinant.determinant : kNaN;
    v["D_se"] = has ? m->determinant.determinant_se : kNaN;
    v["purity"] = has ? m->determinant.purity : kNaN;
    v["purity_se"] = has ? m->determinant.purity_se : kNaN;
    v["logneg"] = has ? m->log_negativity.value : kNaN;
    v["logneg_se"] = has ? m->log_negativity.se : kNaN;
    v["kurtosis"] = has ? m->kurtosis.value : kNaN;
    v["kurtosis_se"] = has ? m->kurtosis.se : kNaN;
    return v;
}

json matrix_json(const Eigen::Matrix4d& m) {
    json arr = json::array();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) arr.push_back(m(i, j));
    return arr;
}

json real_json(double x) {
    // JSON has no inf/nan; keep the information as a string.
    if (std::isfinite(x)) return x;
    return format_real(x);
}

std::string format_cell(const std::string& column, double value) {
    if (column == "accepted" || column == "total") return std::to_string(static_cast<std::uint64_t>(value));
    return format_real(value);
}

void write_subset_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                      const std::vector<SweepRow>& rows) {
    CsvWriter csv(path);
    std::vector<std::string> header = columns;
    header.push_back("flag");
    csv.row(header);
    for (const auto& r : rows) {
        const auto values = row_values(r);
        std::vector<std::string> cells;
        for (const auto& c : columns) cells.push_back(format_cell(c, values.at(c)));
        cells.push_back(flag_name(r.flag));
        csv.row(cells);
    }
}

}  // namespace

const char* version() { return CVDISTILL_VERSION; }

std::string format_real(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

unsigned parse_datasets(std::string_view text) {
    unsigned mask = 0;
    for (const auto part : split(text, ',')) {
        if (part == "all") mask |= kAllDatasets;
        else if (part == "fig2a") mask |= kFig2a;
        else if (part == "fig2b") mask |= kFig2b;
        else if (part == "fig3") mask |= kFig3;
        else if (part == "fig4") mask |= kFig4;
        else throw InvalidConfig("unknown dataset '" + std::string(part) + "'");
    }
    return mask;
}

std::vector<double> default_q_grid() { return {0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, kInf}; }

std::vector<double> default_sigma_list() { return {0.1, 0.2, 0.3, 0.4, 0.497}; }

void SweepSpec::validate() const {
    if (q_grid.empty()) throw InvalidConfig("Q grid must be nonempty");
    if (sigma_list.empty()) throw InvalidConfig("sigma list must be nonempty");
    for (std::size_t i = 0; i < q_grid.size(); ++i) {
        if (!(q_grid[i] > 0.0)) throw InvalidConfig("Q grid values must be positive");
        if (i > 0 && !(q_grid[i] > q_grid[i - 1])) throw InvalidConfig("Q grid must be strictly increasing");
    }
    for (const double s : sigma_list) {
        if (!std::isfinite(s) || s < 0.0) throw InvalidConfig("sigma values must be finite and non-negative");
    }
    base.validate();
}

// ---------------------------------------------------------------------------
// Config

ConfigMap parse_config_text(std::string_view text) {
    ConfigMap out;
    int line_no = 0;
    for (const auto raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw InvalidConfig("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw InvalidConfig("config line " + std::to_string(line_no) + ": empty key");
        out[std::string(key)] = std::string(trim(line.substr(eq + 1)));
    }
    return out;
}

ConfigMap read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidConfig("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::vector<double> parse_real_list(std::string_view text) {
    std::vector<double> out;
    for (const auto part : split(text, ',')) {
        if (part.empty()) throw InvalidConfig("empty entry in list '" + std::string(text) + "'");
        out.push_back(parse_real(part, "list"));
    }
    return out;
}

void apply_config(const ConfigMap& values, SweepSpec& spec) {
    ProtocolConfig& c = spec.base;
    for (const auto& [key, value] : values) {
        if (key == "squeezing_db") c.squeezing_db = parse_real(value, key);
        else if (key == "antisqueezing_db") c.antisqueezing_db = parse_real(value, key);
        else if (key == "eta") c.eta = parse_real(value, key);
        else if (key == "sigma_pn") c.sigma_pn = parse_real(value, key);
        else if (key == "sigma_per_channel") {
            const auto v = parse_real_list(value);
            if (v.size() != kChannelCount) throw InvalidConfig("sigma_per_channel needs four values");
            c.sigma_per_channel = std::array<double, kChannelCount>{v[0], v[1], v[2], v[3]};
        } else if (key == "threshold" || key == "Q") c.threshold = parse_real(value, key);
        else if (key == "n_shots") c.n_shots = parse_count(value, key);
        else if (key == "seed") c.seed = parse_count(value, key);
        else if (key == "bhd_settings") {
            c.bhd_settings.clear();
            for (const auto pair : split(value, ',')) {
                const auto parts = split(pair, ':');
                if (parts.size() != 2) throw InvalidConfig("bhd_settings entries look like X:P or 0.3:1.2");
                c.bhd_settings.push_back({parse_angle(parts[0]), parse_angle(parts[1])});
            }
        } else if (key == "sampling_mode") {
            if (value == "per-setting" || value == "per_setting") c.sampling = SamplingMode::per_setting;
            else if (value == "joint") c.sampling = SamplingMode::joint;
            else throw InvalidConfig("sampling_mode must be per-setting or joint");
        } else if (key == "trigger_angle") c.trigger_angle = parse_real(value, key);
        else if (key == "q_grid") spec.q_grid = parse_real_list(value);
        else if (key == "sigma_list") spec.sigma_list = parse_real_list(value);
        else if (key == "outputs") spec.outputs = parse_datasets(value);
        else if (key == "output_path") spec.output_path = value;
        else throw InvalidConfig("unknown config key '" + key + "'");
    }
}

ConfigMap config_echo(const SweepSpec& spec) {
    const ProtocolConfig& c = spec.base;
    ConfigMap m;
    m["squeezing_db"] = format_real(c.squeezing_db);
    m["antisqueezing_db"] = format_real(c.antisqueezing_db);
    m["eta"] = format_real(c.eta);
    m["sigma_pn"] = format_real(c.sigma_pn);
    if (c.sigma_per_channel) {
        m["sigma_per_channel"] = join_reals({c.sigma_per_channel->begin(), c.sigma_per_channel->end()});
    }
    m["threshold"] = format_real(c.threshold);
    m["n_shots"] = std::to_string(c.n_shots);
    m["seed"] = std::to_string(c.seed);
    std::string settings;
    for (std::size_t i = 0; i < c.bhd_settings.size(); ++i) {
        if (i) settings += ",";
        settings += format_angle(c.bhd_settings[i].angle_a) + ":" + format_angle(c.bhd_settings[i].angle_b);
    }
    m["bhd_settings"] = settings;
    m["sampling_mode"] = c.sampling == SamplingMode::joint ? "joint" : "per-setting";
    m["trigger_angle"] = format_real(c.trigger_angle);
    m["q_grid"] = join_reals(spec.q_grid);
    m["sigma_list"] = join_reals(spec.sigma_list);
    m["outputs"] = datasets_name(spec.outputs);
    m["output_path"] = spec.output_path.string();
    return m;
}

// ---------------------------------------------------------------------------
// Sweep

const char* flag_name(PointFlag flag) {
    switch (flag) {
        case PointFlag::ok: return "ok";
        case PointFlag::low_stats: return "low_stats";
        case PointFlag::empty: return "empty";
        case PointFlag::insufficient: return "insufficient";
    }
    return "?";
}

const std::vector<std::string>& sweep_csv_columns() {
    static const std::vector<std::string> columns = {
        "sigma_pn", "Q", "success_rate", "var_xplus", "var_pminus", "I", "D", "purity", "logneg", "kurtosis",
        "success_rate_se", "var_xplus_se", "var_pminus_se", "I_se", "D_se", "purity_se", "logneg_se", "kurtosis_se",
        "Q_normalized", "accepted", "total"};
    return columns;
}

SweepResult run_sweep(const SweepSpec& spec, std::size_t workers, std::ostream* progress) {
    spec.validate();
    SweepResult result;
    std::vector<double> sim_seconds;

    for (const double sigma : spec.sigma_list) {
        ProtocolConfig cfg = spec.base;
        cfg.sigma_pn = sigma;
        cfg.sigma_per_channel.reset();
        const auto t_sim = Clock::now();
        const ShotTable table = simulate_shots(cfg, workers);
        const double var_s = variance_of(table.trigger_sum);
        const double sim_share =
            std::chrono::duration<double>(Clock::now() - t_sim).count() / static_cast<double>(spec.q_grid.size());

        for (const double q : spec.q_grid) {
            const auto t0 = Clock::now();
            SweepRow row;
            row.sigma_pn = sigma;
            row.threshold = q;
            row.threshold_normalized = q / std::sqrt(var_s);
            row.total = table.size();
            try {
                const EnsembleResult ensemble = accept(table, q);
                row.report = compute_report(ensemble);
                row.flag = ensemble.accepted < kLowStatsThreshold ? PointFlag::low_stats : PointFlag::ok;
            } catch (const EmptyEnsemble&) {
                row.flag = PointFlag::empty;
            } catch (const InsufficientData&) {
                row.flag = PointFlag::insufficient;
            } catch (const InvalidEstimate&) {
                row.flag = PointFlag::insufficient;
            }
            row.runtime_seconds = sim_share + std::chrono::duration<double>(Clock::now() - t0).count();
            if (progress) {
                *progress << "[sweep] sigma_pn=" << format_real(sigma) << " Q=" << format_real(q) << " flag="
                          << flag_name(row.flag);
                if (row.report) {
                    *progress << " success_rate=" << row.report->success_rate.value
                              << " I=" << row.report->total_variance.value;
                }
                *progress << " (" << row.runtime_seconds << " s)\n";
            }
            result.rows.push_back(std::move(row));
        }
    }

    std::filesystem::create_directories(spec.output_path);
    auto out_file = [&](const char* name) {
        result.files.push_back(spec.output_path / name);
        return result.files.back();
    };

    {
        CsvWriter csv(out_file("sweep.csv"));
        std::vector<std::string> header = sweep_csv_columns();
        header.push_back("flag");
        csv.row(header);
        for (const auto& r : result.rows) {
            const auto values = row_values(r);
            std::vector<std::string> cells;
            for (const auto& c : sweep_csv_columns()) cells.push_back(format_cell(c, values.at(c)));
            cells.push_back(flag_name(r.flag));
            csv.row(cells);
        }
    }
    {
        std::ofstream jl(out_file("sweep.jsonl"), std::ios::binary);
        for (const auto& r : result.rows) {
            json j = json::object();
            for (const auto& [k, v] : row_values(r)) j[k] = real_json(v);
            j["accepted"] = r.report ? r.report->accepted : 0;
            j["total"] = r.total;
            j["flag"] = flag_name(r.flag);
            j["logneg_base"] = kLogNegativityBase;
            jl << j.dump() << '\n';
        }
    }
    if (spec.outputs & kFig2a) {
        write_subset_csv(out_file("fig2a.csv"),
                         {"sigma_pn", "Q", "Q_normalized", "success_rate", "success_rate_se", "var_xplus",
                          "var_xplus_se", "var_pminus", "var_pminus_se"},
                         result.rows);
    }
    if (spec.outputs & kFig2b) {
        write_subset_csv(out_file("fig2b.csv"), {"sigma_pn", "Q", "success_rate", "success_rate_se", "I", "I_se"},
                         result.rows);
    }
    if (spec.outputs & kFig4) {
        write_subset_csv(out_file("fig4.csv"),
                         {"sigma_pn", "Q", "success_rate", "success_rate_se", "D", "D_se", "purity", "purity_se"},
                         result.rows);
    }
    if (spec.outputs & kFig3) {
        std::ofstream jl(out_file("fig3.jsonl"), std::ios::binary);
        for (const auto& r : result.rows) {
            if (!r.report) continue;
            json j;
            j["sigma_pn"] = real_json(r.sigma_pn);
            j["Q"] = real_json(r.threshold);
            j["success_rate"] = r.report->success_rate.value;
            j["order"] = "X_VA,P_VA,X_VB,P_VB";
            j["gamma"] = matrix_json(r.report->covariance.gamma);
            j["gamma_se"] = matrix_json(r.report->covariance.standard_errors);
            j["flag"] = flag_name(r.flag);
            jl << j.dump() << '\n';
        }
    }

    json manifest;
    manifest["tool"] = "cvdistill";
    manifest["version"] = version();
    manifest["seed"] = spec.base.seed;
    manifest["workers"] = workers;
    manifest["config"] = config_echo(spec);
    manifest["conventions"] = {{"vacuum_variance", kVacuumVariance},
                               {"gamma_normalization", "vacuum = identity"},
                               {"quadrature_order", "X_VA,P_VA,X_VB,P_VB"},
                               {"logneg_base", kLogNegativityBase},
                               {"variance_units", "natural (vacuum Var(X+) = 0.5)"}};
    json files = json::array();
    for (const auto& f : result.files) files.push_back(f.filename().string());
    manifest["datasets"] = files;
    json points = json::array();
    for (const auto& r : result.rows) {
        json p;
        p["sigma_pn"] = real_json(r.sigma_pn);
        p["Q"] = real_json(r.threshold);
        p["flag"] = flag_name(r.flag);
        p["runtime_s"] = r.runtime_seconds;
        if (r.report) {
            p["accepted"] = r.report->accepted;
            p["se"] = {{"success_rate", r.report->success_rate.se},
                       {"I", real_json(r.report->total_variance.se)},
                       {"D", real_json(r.report->determinant.determinant_se)},
                       {"kurtosis", real_json(r.report->kurtosis.se)}};
        } else {
            p["accepted"] = 0;
        }
        points.push_back(p);
    }
    manifest["points"] = points;
    {
        const auto path = spec.output_path / "manifest.json";
        std::ofstream mf(path, std::ios::binary);
        mf << manifest.dump(2) << '\n';
    }
    return result;
}

// ---------------------------------------------------------------------------
// Verify

const std::vector<std::string>& verify_quantities() {
    static const std::vector<std::string> q = {"success_rate", "var_xplus", "var_pminus", "I",
                                               "g_xa_xa",      "g_pa_pa",   "g_xb_xb",    "g_pb_pb",
                                               "g_xa_xb",      "g_xa_pb",   "g_pa_xb",    "g_pa_pb"};
    return q;
}

VerifyReport verify(const SweepSpec& spec, const VerifyOptions& options, std::size_t workers,
                    std::ostream* progress) {
    spec.validate();
    VerifyReport report;
    report.z_limit = options.z_limit;

    // (row, col) of each gamma quantity in (X_VA, P_VA, X_VB, P_VB) order.
    const std::vector<std::pair<int, int>> elements = {{0, 0}, {1, 1}, {2, 2}, {3, 3},
                                                       {0, 2}, {0, 3}, {1, 2}, {1, 3}};

    for (const double sigma : spec.sigma_list) {
        ProtocolConfig cfg = spec.base;
        cfg.sigma_pn = sigma;
        cfg.sigma_per_channel.reset();
        const ShotKernel kernel = options.distillation_override ? ShotKernel(cfg, *options.distillation_override)
                                                                : ShotKernel(cfg);
        const ShotTable table = simulate_shots(kernel, workers);
        const auto oracle = oracle_sweep(cfg, spec.q_grid, options.oracle_order);
        if (options.check_convergence) {
            const auto check = oracle_convergence(cfg, spec.q_grid, options.oracle_order);
            report.convergence.max_abs_change = std::max(report.convergence.max_abs_change, check.max_abs_change);
            report.convergence.converged = report.convergence.converged && check.converged;
        }

        for (std::size_t t = 0; t < spec.q_grid.size(); ++t) {
            const double q = spec.q_grid[t];
            MetricsReport m;
            try {
                m = compute_report(accept(table, q));
            } catch (const EmptyEnsemble&) {
                report.skipped_points.emplace_back(sigma, q);
                continue;
            } catch (const InsufficientData&) {
                report.skipped_points.emplace_back(sigma, q);
                continue;
            } catch (const InvalidEstimate&) {
                report.skipped_points.emplace_back(sigma, q);
                continue;
            }
            const OracleMoments& o = oracle[t];
            const Eigen::Matrix4d og = o.gamma_normalized();
            auto add = [&](const std::string& name, double mc, double se, double expected) {
                VerifyEntry e{sigma, q, name, mc, se, expected, 0.0};
                const double diff = mc - expected;
                if (se > 0.0) e.z = diff / se;
                else e.z = std::abs(diff) < 1e-12 ? 0.0 : std::copysign(kInf, diff);
                report.max_abs_z = std::max(report.max_abs_z, std::abs(e.z));
                report.entries.push_back(e);
            };
            add("success_rate", m.success_rate.value, m.success_rate.se, o.success_rate);
            add("var_xplus", m.var_xplus.value, m.var_xplus.se, o.var_xplus());
            add("var_pminus", m.var_pminus.value, m.var_pminus.se, o.var_pminus());
            add("I", m.total_variance.value, m.total_variance.se, o.total_variance());
            for (std::size_t k = 0; k < elements.size(); ++k) {
                const auto [i, j] = elements[k];
                add(verify_quantities()[4 + k], m.covariance.gamma(i, j), m.covariance.standard_errors(i, j),
                    og(i, j));
            }
            if (progress) {
                *progress << "[verify] sigma_pn=" << format_real(sigma) << " Q=" << format_real(q)
                          << " max|z| so far=" << report.max_abs_z << "\n";
            }
        }
    }
    return report;
}

void write_verify_csv(const VerifyReport& report, std::ostream& out) {
    out << "sigma_pn,Q,quantity,monte_carlo,monte_carlo_se,oracle,z\n";
    for (const auto& e : report.entries) {
        out << format_real(e.sigma_pn) << ',' << format_real(e.threshold) << ',' << e.quantity << ','
            << format_real(e.monte_carlo) << ',' << format_real(e.monte_carlo_se) << ',' << format_real(e.oracle)
            << ',' << format_real(e.z) << '\n';
    }
}

}  // namespace cvdistill
