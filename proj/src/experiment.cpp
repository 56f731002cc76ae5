#include "km/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "km/coupling.hpp"
#include "km/util.hpp"

namespace km {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, int line) {
    try {
        size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": bad number '" + v + "'");
    }
}

long parse_int(const std::string& v, int line) {
    try {
        size_t used = 0;
        long x = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": bad integer '" + v + "'");
    }
}

bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("line " + std::to_string(line) + ": bad boolean '" + v + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) out.push_back(trim(part));
    return out;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

TransitionPoints theory_points(const Graphon& g, const FrequencyDistribution& dist,
                               int nystrom_m) {
    bool builtin = g.kind() == GraphonKind::Constant ||
                   g.kind() == GraphonKind::SmallWorld ||
                   g.kind() == GraphonKind::RingIndicator ||
                   g.kind() == GraphonKind::RingExp;
    KernelSpectrum spec = builtin ? analytic_spectrum(g) : nystrom_spectrum(g, nystrom_m);
    return transition_points(spec, dist);
}

}  // namespace

InitialCondition ExperimentConfig::ic() const {
    auto parts = split(ic_spec, ':');
    if (parts[0] == "incoherent" && parts.size() == 1)
        return InitialCondition::incoherent();
    if (parts[0] == "wrapped_gaussian" && parts.size() == 2)
        return InitialCondition::wrapped_gaussian(parse_double(parts[1], 0));
    throw ConfigError("unknown initial condition '" + ic_spec +
                      "' (accepted: incoherent, wrapped_gaussian:<concentration>)");
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    os << "graphon = " << graphon_spec << "\nfreq = " << freq_spec << "\nn = " << n
       << "\nn_ladder =";
    for (int v : n_ladder) os << ' ' << v;
    os << "\ngrid = " << (grid == GridScheme::Uniform ? "uniform" : "iid")
       << "\nK = " << k_raw << "\nT = " << fmt17(T) << "\ndt = " << fmt17(dt)
       << "\ndt_pde = " << fmt17(dt_pde) << "\nrecord_stride = " << record_stride
       << "\nseeds = " << seeds << "\nseed = " << seed_base
       << "\nsample_graph = " << sample_graph << "\nfast = " << fast_kernels
       << "\nic = " << ic_spec << "\nM = " << M << "\nm_omega = " << m_omega
       << "\nm_x = " << m_x << "\nk_max = " << k_max << "\nnystrom = " << nystrom_m
       << "\nsave_phases = " << save_phases << "\n";
    return os.str();
}

std::uint64_t ExperimentConfig::hash() const {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char ch : canonical()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    bool have_k = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        size_t hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) +
                              ": expected 'key = value', got '" + trim(raw) + "'");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (val.empty())
            throw ConfigError("line " + std::to_string(line) + ": empty value for '" +
                              key + "'");
        if (key == "graphon") cfg.graphon_spec = val;
        else if (key == "freq") cfg.freq_spec = val;
        else if (key == "n") cfg.n = (int)parse_int(val, line);
        else if (key == "n_ladder") {
            for (const auto& p : split(val, ','))
                cfg.n_ladder.push_back((int)parse_int(p, line));
        } else if (key == "grid") {
            if (val == "uniform") cfg.grid = GridScheme::Uniform;
            else if (val == "iid") cfg.grid = GridScheme::IidUniform;
            else
                throw ConfigError("line " + std::to_string(line) +
                                  ": grid must be 'uniform' or 'iid'");
        } else if (key == "K") {
            cfg.k_raw = val;
            have_k = true;
            auto parts = split(val, ':');
            if (parts.size() == 1) {
                cfg.k_values = {parse_double(parts[0], line)};
            } else if (parts.size() == 3) {
                double lo = parse_double(parts[0], line);
                double hi = parse_double(parts[1], line);
                double step = parse_double(parts[2], line);
                if (step > 0.0)
                    for (double k = lo; k <= hi + 1e-9 * std::max(1.0, std::abs(hi));
                         k += step)
                        cfg.k_values.push_back(k);
            } else {
                throw ConfigError("line " + std::to_string(line) +
                                  ": K must be a scalar or min:max:step");
            }
        } else if (key == "T") cfg.T = parse_double(val, line);
        else if (key == "dt") cfg.dt = parse_double(val, line);
        else if (key == "dt_pde") cfg.dt_pde = parse_double(val, line);
        else if (key == "record_stride") cfg.record_stride = (int)parse_int(val, line);
        else if (key == "seeds") cfg.seeds = (int)parse_int(val, line);
        else if (key == "seed") cfg.seed_base = (std::uint64_t)parse_int(val, line);
        else if (key == "sample_graph") cfg.sample_graph = parse_bool(val, line);
        else if (key == "fast") cfg.fast_kernels = parse_bool(val, line);
        else if (key == "ic") cfg.ic_spec = val;
        else if (key == "M") cfg.M = (int)parse_int(val, line);
        else if (key == "m_omega") cfg.m_omega = (int)parse_int(val, line);
        else if (key == "m_x") cfg.m_x = (int)parse_int(val, line);
        else if (key == "k_max") cfg.k_max = (int)parse_int(val, line);
        else if (key == "nystrom") cfg.nystrom_m = (int)parse_int(val, line);
        else if (key == "save_phases") cfg.save_phases = parse_bool(val, line);
        else
            throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key +
                              "'");
    }

    // semantic pass: report every violation at once
    std::vector<std::string> bad;
    if (!cfg.graphon_spec.empty()) {
        try {
            cfg.graphon();
        } catch (const std::exception& e) {
            bad.push_back(std::string("graphon: ") + e.what());
        }
    }
    if (!cfg.freq_spec.empty()) {
        try {
            cfg.freq();
        } catch (const std::exception& e) {
            bad.push_back(std::string("freq: ") + e.what());
        }
    }
    try {
        cfg.ic();
    } catch (const std::exception& e) {
        bad.push_back(std::string("ic: ") + e.what());
    }
    if (have_k && cfg.k_values.empty()) bad.push_back("K: empty range '" + cfg.k_raw + "'");
    if (cfg.seeds < 1) bad.push_back("seeds: must be >= 1");
    if (cfg.n < 0) bad.push_back("n: must be nonnegative");
    for (int v : cfg.n_ladder)
        if (v < 1) bad.push_back("n_ladder: entries must be positive");
    if (!(cfg.T > 0.0)) bad.push_back("T: must be positive");
    if (!(cfg.dt > 0.0) || cfg.dt > 0.1) bad.push_back("dt: must lie in (0, 0.1]");
    if (!(cfg.dt_pde > 0.0) || cfg.dt_pde > 0.01)
        bad.push_back("dt_pde: must lie in (0, 0.01]");
    if (cfg.record_stride < 1) bad.push_back("record_stride: must be >= 1");
    if (!bad.empty()) {
        std::string msg = "invalid config:";
        for (const auto& b : bad) msg += "\n  - " + b;
        throw ConfigError(msg);
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config '" + path + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return parse_config(os.str());
}

std::string metadata_block(
    const ExperimentConfig& cfg,
    const std::vector<std::pair<std::string, std::string>>& extra) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", (unsigned long long)cfg.hash());
    std::ostringstream os;
    os << "# tool: kmnet\n";
    os << "# config_hash: " << hash << "\n";
    os << "# graphon: " << cfg.graphon_spec << "\n";
    os << "# freq: " << cfg.freq_spec << "\n";
    for (const auto& [k, v] : extra) os << "# " << k << ": " << v << "\n";
    return os.str();
}

SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (cfg.k_values.empty()) throw ConfigError("sweep needs a K value or range");
    if (cfg.n < 2) throw ConfigError("sweep needs n >= 2");
    Graphon g = cfg.graphon();
    FrequencyDistribution dist = cfg.freq();
    InitialCondition ic = cfg.ic();

    SweepResult res;
    res.config = cfg;
    res.floor = 5.0 / std::sqrt((double)cfg.n);
    res.kc_theory = theory_points(g, dist, cfg.nystrom_m).kc_plus;

    NodeGrid grid = make_grid(cfg.n, cfg.grid, derive_seed(cfg.seed_base, 9001, 0));
    std::unique_ptr<CouplingOp> shared_op;
    if (!cfg.sample_graph) shared_op = make_coupling(g, grid, cfg.fast_kernels);

    for (size_t ki = 0; ki < cfg.k_values.size(); ++ki) {
        double K = cfg.k_values[ki];
        std::vector<double> rs;
        for (int rep = 0; rep < cfg.seeds; ++rep) {
            std::uint64_t s = derive_seed(cfg.seed_base, (std::uint64_t)ki, rep);
            std::vector<double> freqs = dist.sample(cfg.n, derive_seed(s, 1, 0));
            OscillatorState init =
                sample_initial(cfg.n, ic, freqs, grid, derive_seed(s, 2, 0));
            std::unique_ptr<CouplingOp> local_op;
            const CouplingOp* op = shared_op.get();
            if (cfg.sample_graph) {
                AdjacencyMatrix a = sample_random_graph(g, grid, derive_seed(s, 3, 0));
                local_op = make_adjacency(a);
                op = local_op.get();
            }
            SimConfig sim{K, cfg.dt, cfg.T, cfg.record_stride, s};
            try {
                Trajectory traj = integrate(init, freqs, *op, sim);
                rs.push_back(steady_r(traj));
            } catch (const NumericalError& e) {
                throw NumericalError("sweep failed at K=" + std::to_string(K) +
                                     ", seed index " + std::to_string(rep) + ": " +
                                     e.what());
            }
        }
        double mean = 0.0;
        for (double r : rs) mean += r;
        mean /= (double)rs.size();
        double var = 0.0;
        for (double r : rs) var += (r - mean) * (r - mean);
        double sd = rs.size() > 1 ? std::sqrt(var / (double)(rs.size() - 1)) : 0.0;
        res.rows.push_back({K, mean, sd, cfg.n});
    }

    // transition estimate: first crossing of the finite-size floor, refined
    // by linear interpolation in (K, r^2) between the bracketing points
    const double f2 = res.floor * res.floor;
    for (size_t i = 0; i < res.rows.size(); ++i) {
        if (res.rows[i].r_mean > res.floor) {
            if (i == 0) break;  // not bracketed from below
            double r0 = res.rows[i - 1].r_mean, r1 = res.rows[i].r_mean;
            double t = (f2 - r0 * r0) / (r1 * r1 - r0 * r0);
            res.kc_hat = res.rows[i - 1].K + t * (res.rows[i].K - res.rows[i - 1].K);
            break;
        }
    }

    if (!out_dir.empty()) {
        write_sweep_csv(res, out_dir + "/sweep.csv");
        emit_plot_script(res, out_dir + "/sweep_plot.gp");
    }
    return res;
}

void write_sweep_csv(const SweepResult& res, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write '" + path + "'");
    std::vector<std::pair<std::string, std::string>> extra = {
        {"kc_theory", fmt17(res.kc_theory)},
        {"floor", fmt17(res.floor)},
        {"kc_hat", res.kc_hat ? fmt17(*res.kc_hat) : std::string("not bracketed")},
    };
    f << metadata_block(res.config, extra);
    f << "K,r_mean,r_std,n\n";
    for (const auto& row : res.rows)
        f << fmt17(row.K) << ',' << fmt17(row.r_mean) << ',' << fmt17(row.r_std) << ','
          << row.n << "\n";
    if (!f) throw IoError("write failure on '" + path + "'");
}

void emit_plot_script(const SweepResult& res, const std::string& path) {
    if (res.rows.empty()) throw ConfigError("refusing to plot an empty sweep result");
    std::ofstream f(path);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << "# gnuplot script; ground truth lives in sweep.csv\n"
      << "set datafile separator ','\n"
      << "set xlabel 'K'\n"
      << "set ylabel 'r_inf'\n"
      << "set key left top\n"
      << "kc_theory = " << fmt17(res.kc_theory) << "\n"
      << "set arrow from kc_theory, graph 0 to kc_theory, graph 1 nohead dashtype 2\n"
      << "set label 'K_c theory' at kc_theory, graph 0.95 offset 0.5,0\n"
      << "plot 'sweep.csv' every ::1 using 1:2:3 with yerrorlines title 'r_inf'\n";
    if (!f) throw IoError("write failure on '" + path + "'");
}

CompareReport run_compare(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (cfg.n_ladder.empty()) throw ConfigError("compare needs an n_ladder");
    if (cfg.k_values.size() != 1) throw ConfigError("compare needs a single K value");
    const double K = cfg.k_values[0];
    Graphon g = cfg.graphon();
    FrequencyDistribution dist = cfg.freq();
    InitialCondition ic = cfg.ic();

    // shared record interval so the two time grids line up
    const double rec = 0.2;
    const int stride_ode = (int)std::lround(rec / cfg.dt);
    const int stride_pde = (int)std::lround(rec / cfg.dt_pde);
    if (std::abs(stride_ode * cfg.dt - rec) > 1e-12 ||
        std::abs(stride_pde * cfg.dt_pde - rec) > 1e-12)
        throw ConfigError("compare: dt and dt_pde must divide 0.2");

    // continuum reference: one deterministic run, split at T/2 for the
    // bounded-Lipschitz checkpoint
    MeanFieldState st0 = init_meanfield(ic, dist, cfg.M, cfg.m_omega, cfg.m_x);
    MeanFieldTrajectory half1 =
        evolve(st0, dist, g, K, cfg.dt_pde, cfg.T / 2, stride_pde);
    MeanFieldTrajectory half2 =
        evolve(half1.final_state, dist, g, K, cfg.dt_pde, cfg.T / 2, stride_pde);
    std::vector<double> r_pde = half1.r;
    r_pde.insert(r_pde.end(), half2.r.begin() + 1, half2.r.end());

    CompareReport rep;
    rep.config = cfg;
    for (int n : cfg.n_ladder) {
        std::vector<double> dsup, dmid, dend;
        for (int s_idx = 0; s_idx < cfg.seeds; ++s_idx) {
            std::uint64_t s = derive_seed(cfg.seed_base, (std::uint64_t)n, s_idx);
            NodeGrid grid = make_grid(n, cfg.grid, derive_seed(s, 0, 1));
            std::vector<double> freqs = dist.sample(n, derive_seed(s, 1, 0));
            OscillatorState init = sample_initial(n, ic, freqs, grid, derive_seed(s, 2, 0));
            auto op = make_coupling(g, grid, cfg.fast_kernels);

            auto samples_of = [&](const OscillatorState& st) {
                std::vector<PhasePoint> pts(n);
                for (int i = 0; i < n; ++i)
                    pts[i] = {st.phases[i], freqs[i], grid.points[i]};
                return pts;
            };

            SimConfig simc{K, cfg.dt, cfg.T / 2, stride_ode, s};
            Trajectory t1 = integrate(init, freqs, *op, simc);
            Trajectory t2 = integrate(t1.final_state, freqs, *op, simc);
            dmid.push_back(bl_distance_proxy(samples_of(t1.final_state),
                                             half1.final_state));
            dend.push_back(bl_distance_proxy(samples_of(t2.final_state),
                                             half2.final_state));

            std::vector<double> r_ode;
            for (const auto& r : t1.records) r_ode.push_back(r.r);
            for (size_t i = 1; i < t2.records.size(); ++i)
                r_ode.push_back(t2.records[i].r);
            size_t m = std::min(r_ode.size(), r_pde.size());
            double sup = 0.0;
            for (size_t i = 0; i < m; ++i)
                sup = std::max(sup, std::abs(r_ode[i] - r_pde[i]));
            dsup.push_back(sup);
        }
        rep.rows.push_back({n, median(dsup), median(dmid), median(dend)});
    }

    if (!out_dir.empty()) write_compare_csv(rep, out_dir + "/compare.csv");
    return rep;
}

void write_compare_csv(const CompareReport& rep, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << metadata_block(rep.config,
                        {{"note", "bl columns are a dictionary lower-bound proxy, "
                                  "not the exact bounded-Lipschitz distance"}});
    f << "n,sup_dr_median,bl_mid_median,bl_end_median\n";
    for (const auto& row : rep.rows)
        f << row.n << ',' << fmt17(row.sup_dr_median) << ',' << fmt17(row.bl_mid_median)
          << ',' << fmt17(row.bl_end_median) << "\n";
    if (!f) throw IoError("write failure on '" + path + "'");
}

}  // namespace km
