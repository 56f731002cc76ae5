// kmnet: Kuramoto-on-graphs experiment driver.
//
// Subcommands: spectra, simulate, sweep, meanfield, compare.
// Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 I/O error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "km/coupling.hpp"
#include "km/experiment.hpp"
#include "km/util.hpp"

namespace {

struct Common {
    std::string config_path;
    std::string out_dir = ".";
    std::int64_t seed = -1;  // <0: keep the config's seed
    int threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool need_config = true) {
    auto* opt = cmd->add_option("--config", c.config_path, "experiment config file");
    if (need_config) opt->required();
    cmd->add_option("--out", c.out_dir, "output directory");
    cmd->add_option("--seed", c.seed, "override the config base seed");
    cmd->add_option("--threads", c.threads, "worker threads (0 = auto)");
}

km::ExperimentConfig load(const Common& c) {
    km::ExperimentConfig cfg = km::parse_config_file(c.config_path);
    if (c.seed >= 0) cfg.seed_base = (std::uint64_t)c.seed;
#ifdef _OPENMP
    if (c.threads > 0) omp_set_num_threads(c.threads);
#endif
    return cfg;
}

void run_spectra(const std::string& graphon_spec, const std::string& freq_spec,
                 int kmax, int nystrom_m, const std::string& out_dir) {
    km::Graphon g = km::Graphon::parse(graphon_spec);
    km::FrequencyDistribution dist = km::FrequencyDistribution::parse(freq_spec);
    km::KernelSpectrum an = km::analytic_spectrum(g, kmax);
    km::KernelSpectrum ny = km::nystrom_spectrum(g, nystrom_m);
    km::TransitionPoints tp = km::transition_points(an, dist);

    // pair analytic Fourier modes with their nearest Nystrom eigenvalues
    std::vector<double> pool = ny.eigenvalues;
    auto take_nearest = [&pool](double target) {
        size_t best = 0;
        for (size_t i = 1; i < pool.size(); ++i)
            if (std::abs(pool[i] - target) < std::abs(pool[best] - target)) best = i;
        double v = pool[best];
        pool.erase(pool.begin() + (long)best);
        return v;
    };

    std::string path = out_dir + "/spectra.csv";
    std::ofstream f(path);
    if (!f) throw km::IoError("cannot write '" + path + "'");
    f << "# graphon: " << graphon_spec << "\n# freq: " << freq_spec << "\n";
    f << "k,zeta_analytic,zeta_nystrom\n";
    // analytic eigenvalues (with multiplicity) in descending magnitude
    // order, each matched to its closest Nystrom eigenvalue
    std::vector<double> an_sorted = an.eigenvalues;
    std::sort(an_sorted.begin(), an_sorted.end(),
              [](double a, double b) { return std::abs(a) > std::abs(b); });
    int rows = std::min<int>((int)an_sorted.size(), 2 * kmax + 1);
    for (int i = 0; i < rows && !pool.empty(); ++i)
        f << i << ',' << km::fmt17(an_sorted[i]) << ','
          << km::fmt17(take_nearest(an_sorted[i])) << "\n";
    f << "# kc_plus: " << km::fmt17(tp.kc_plus) << "\n";
    f << "# kc_minus: " << km::fmt17(tp.kc_minus) << "\n";
    if (!f) throw km::IoError("write failure on '" + path + "'");
}

void run_simulate(const km::ExperimentConfig& cfg, const std::string& out_dir) {
    if (cfg.k_values.size() != 1)
        throw km::ConfigError("simulate needs a single K value");
    if (cfg.n < 2) throw km::ConfigError("simulate needs n >= 2");
    km::Graphon g = cfg.graphon();
    km::FrequencyDistribution dist = cfg.freq();
    km::NodeGrid grid =
        km::make_grid(cfg.n, cfg.grid, km::derive_seed(cfg.seed_base, 9001, 0));
    std::vector<double> freqs = dist.sample(cfg.n, km::derive_seed(cfg.seed_base, 1, 0));
    km::OscillatorState init = km::sample_initial(cfg.n, cfg.ic(), freqs, grid,
                                                  km::derive_seed(cfg.seed_base, 2, 0));
    std::unique_ptr<km::CouplingOp> op;
    if (cfg.sample_graph) {
        auto a = km::sample_random_graph(g, grid, km::derive_seed(cfg.seed_base, 3, 0));
        op = km::make_adjacency(a);
    } else {
        op = km::make_coupling(g, grid, cfg.fast_kernels);
    }
    km::SimConfig sim{cfg.k_values[0], cfg.dt, cfg.T, cfg.record_stride, cfg.seed_base};
    km::Trajectory traj = km::integrate(init, freqs, *op, sim, cfg.save_phases);

    std::string path = out_dir + "/sim.csv";
    std::ofstream f(path);
    if (!f) throw km::IoError("cannot write '" + path + "'");
    f << km::metadata_block(cfg, {{"kernel", op->name()}});
    f << "t,r,psi\n";
    for (const auto& rec : traj.records)
        f << km::fmt17(rec.t) << ',' << km::fmt17(rec.r) << ',' << km::fmt17(rec.psi)
          << "\n";
    if (!f) throw km::IoError("write failure on '" + path + "'");

    if (cfg.save_phases) {
        std::string bpath = out_dir + "/phases.bin";
        std::ofstream bf(bpath, std::ios::binary);
        if (!bf) throw km::IoError("cannot write '" + bpath + "'");
        std::uint64_t count = traj.records.size();
        bf.write(reinterpret_cast<const char*>(&count), 8);
        for (const auto& rec : traj.records)
            bf.write(reinterpret_cast<const char*>(rec.phases.data()),
                     (std::streamsize)(rec.phases.size() * sizeof(double)));
        if (!bf) throw km::IoError("write failure on '" + bpath + "'");
    }
}

void run_meanfield(const km::ExperimentConfig& cfg, const std::string& out_dir) {
    if (cfg.k_values.size() != 1)
        throw km::ConfigError("meanfield needs a single K value");
    km::Graphon g = cfg.graphon();
    km::FrequencyDistribution dist = cfg.freq();
    km::MeanFieldState st =
        km::init_meanfield(cfg.ic(), dist, cfg.M, cfg.m_omega, cfg.m_x);
    km::MeanFieldTrajectory traj = km::evolve(st, dist, g, cfg.k_values[0], cfg.dt_pde,
                                              cfg.T, cfg.record_stride);
    std::string path = out_dir + "/meanfield.csv";
    std::ofstream f(path);
    if (!f) throw km::IoError("cannot write '" + path + "'");
    f << km::metadata_block(cfg, {});
    f << "t,r_global\n";
    for (size_t i = 0; i < traj.times.size(); ++i)
        f << km::fmt17(traj.times[i]) << ',' << km::fmt17(traj.r[i]) << "\n";
    if (!f) throw km::IoError("write failure on '" + path + "'");
    km::save_checkpoint(traj.final_state, out_dir + "/meanfield_state.ckpt");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kuramoto model on graph sequences: spectra, simulations, sweeps"};
    app.require_subcommand(1);

    // spectra takes its parameters directly on the command line
    std::string sp_graphon, sp_freq = "gaussian:1";
    int sp_kmax = 64, sp_nystrom = 512;
    std::string sp_out = ".";
    auto* sp = app.add_subcommand("spectra", "kernel spectrum and transition points");
    sp->add_option("--graphon", sp_graphon, "graphon spec")->required();
    sp->add_option("--freq", sp_freq, "frequency spec");
    sp->add_option("--kmax", sp_kmax, "Fourier mode cutoff");
    sp->add_option("--nystrom", sp_nystrom, "discretization size");
    sp->add_option("--out", sp_out, "output directory");

    Common c_sim, c_sweep, c_mf, c_cmp;
    auto* sim = app.add_subcommand("simulate", "single finite-n trajectory");
    add_common(sim, c_sim);
    auto* sw = app.add_subcommand("sweep", "K sweep with transition detection");
    add_common(sw, c_sweep);
    auto* mf = app.add_subcommand("meanfield", "continuum Galerkin run");
    add_common(mf, c_mf);
    auto* cmp = app.add_subcommand("compare", "particle vs continuum ladder");
    add_common(cmp, c_cmp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sp->parsed()) {
            run_spectra(sp_graphon, sp_freq, sp_kmax, sp_nystrom, sp_out);
        } else if (sim->parsed()) {
            run_simulate(load(c_sim), c_sim.out_dir);
        } else if (sw->parsed()) {
            auto res = km::run_sweep(load(c_sweep), c_sweep.out_dir);
            std::cout << "kc_theory " << km::fmt17(res.kc_theory) << "\n";
            std::cout << "kc_hat "
                      << (res.kc_hat ? km::fmt17(*res.kc_hat)
                                     : std::string("not bracketed"))
                      << "\n";
        } else if (mf->parsed()) {
            run_meanfield(load(c_mf), c_mf.out_dir);
        } else if (cmp->parsed()) {
            km::run_compare(load(c_cmp), c_cmp.out_dir);
        }
    } catch (const km::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const km::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
