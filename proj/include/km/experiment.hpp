#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "km/dynamics.hpp"
#include "km/frequency.hpp"
#include "km/graphon.hpp"
#include "km/meanfield.hpp"
#include "km/spectra.hpp"

namespace km {

// Parsed `key = value` experiment description.  Raw spec strings are kept
// for output metadata; parsed objects are materialized on demand.
struct ExperimentConfig {
    std::string graphon_spec;
    std::string freq_spec;
    int n = 0;
    std::vector<int> n_ladder;
    GridScheme grid = GridScheme::Uniform;
    std::vector<double> k_values;  // expanded range or a single value
    std::string k_raw;
    double T = 200.0;
    double dt = 0.05;
    double dt_pde = 0.01;
    int record_stride = 20;
    int seeds = 1;
    std::uint64_t seed_base = 1;
    bool sample_graph = false;
    bool fast_kernels = true;
    std::string ic_spec = "incoherent";
    int M = 48;
    int m_omega = 160;
    int m_x = 64;
    int k_max = 64;
    int nystrom_m = 512;
    bool save_phases = false;

    Graphon graphon() const { return Graphon::parse(graphon_spec); }
    FrequencyDistribution freq() const { return FrequencyDistribution::parse(freq_spec); }
    InitialCondition ic() const;
    std::uint64_t hash() const;  // of the canonical key=value rendering
    std::string canonical() const;
};

// Parses config text; throws ConfigError carrying the line number on the
// first syntax error, or listing every semantic violation at once.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

struct SweepRow {
    double K;
    double r_mean;
    double r_std;
    int n;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // sorted by K
    std::optional<double> kc_hat;  // empty = transition not bracketed
    double kc_theory;
    double floor;  // finite-size threshold 5/sqrt(n)
    ExperimentConfig config;
};

// Runs the K sweep; writes sweep.csv and sweep_plot.gp into out_dir unless
// it is empty.
SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& out_dir = "");

struct CompareRow {
    int n;
    double sup_dr_median;   // median over seeds of sup_t |r_pde - r_particle|
    double bl_mid_median;   // bl proxy at t = T/2
    double bl_end_median;   // bl proxy at t = T
};

struct CompareReport {
    std::vector<CompareRow> rows;  // in ladder order
    ExperimentConfig config;
};

// Particle-vs-continuum comparison across the n ladder with matched
// initial data; writes compare.csv into out_dir unless empty.
CompareReport run_compare(const ExperimentConfig& cfg, const std::string& out_dir = "");

// Gnuplot script rendering r_inf vs K with the theory line; byte-stable
// (no timestamps), references the CSV by relative name.
void emit_plot_script(const SweepResult& result, const std::string& path);

void write_sweep_csv(const SweepResult& result, const std::string& path);
void write_compare_csv(const CompareReport& report, const std::string& path);

// Shared CSV metadata header ("# key: value" lines).
std::string metadata_block(const ExperimentConfig& cfg,
                           const std::vector<std::pair<std::string, std::string>>& extra);

}  // namespace km
