#include "km/meanfield.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "km/spectra.hpp"
#include "km/util.hpp"

namespace km {

namespace {

using Cplx = std::complex<double>;
using Field = std::vector<Eigen::MatrixXcd>;  // one matrix per harmonic

constexpr double rho0 = 1.0 / two_pi;

// W(x_l, x_l') / m_x on the uniform midpoint grid
Eigen::MatrixXd kernel_matrix(const Graphon& g, int m_x) {
    Eigen::MatrixXd w(m_x, m_x);
    for (int l = 0; l < m_x; ++l)
        for (int lp = 0; lp < m_x; ++lp)
            w(l, lp) = g((l + 0.5) / m_x, (lp + 0.5) / m_x) / m_x;
    return w;
}

Eigen::VectorXcd field_h(const Eigen::MatrixXcd& rho1, const Eigen::MatrixXd& wk,
                         const Eigen::VectorXd& wq) {
    // per-column frequency average, then the spatial kernel
    Eigen::VectorXcd avg = rho1.transpose() * wq.cast<Cplx>();
    return two_pi * (wk.cast<Cplx>() * avg);
}

// nonlinear Galerkin term; out[k] for k = 1..M (out[0] stays zero)
void galerkin_rhs(const Field& y, const Eigen::MatrixXd& wk,
                  const Eigen::VectorXd& wq, double K, Field& out) {
    const int M = (int)y.size() - 1;
    Eigen::VectorXcd h = field_h(y[1], wk, wq);
    Eigen::VectorXcd hc = h.conjugate();
    for (int k = 1; k <= M; ++k) {
        double f = 0.5 * k * K;
        if (k == 1)
            out[k] = f * (rho0 * h.transpose().replicate(y[1].rows(), 1) -
                          y[2] * hc.asDiagonal());
        else if (k == M)
            out[k] = f * (y[k - 1] * h.asDiagonal());
        else
            out[k] = f * (y[k - 1] * h.asDiagonal() - y[k + 1] * hc.asDiagonal());
    }
}

// multiply row j of harmonic k by phase[j]^k (exact transport factor)
void apply_rotation(Field& y, const Eigen::VectorXcd& phase) {
    const int M = (int)y.size() - 1;
    Eigen::VectorXcd cur = Eigen::VectorXcd::Ones(phase.size());
    for (int k = 1; k <= M; ++k) {
        cur = cur.cwiseProduct(phase);
        y[k] = cur.asDiagonal() * y[k];
    }
}

double max_modulus(const Field& y) {
    double m = 0.0;
    for (const auto& mat : y) m = std::max(m, mat.cwiseAbs().maxCoeff());
    return m;
}

}  // namespace

MeanFieldState init_meanfield(const InitialCondition& ic,
                              const FrequencyDistribution& dist, int M,
                              int m_omega, int m_x) {
    if (M < 2) throw ConfigError("truncation order M must be >= 2");
    if (m_omega < 8 || m_x < 8) throw ConfigError("lattice sizes must be >= 8");
    MeanFieldState st;
    st.M = M;
    st.m_x = m_x;
    st.omega = dist.quadrature(m_omega);
    const int mw = st.m_omega();
    st.coeffs.assign(M + 1, Eigen::MatrixXcd::Zero(mw, m_x));
    st.coeffs[0].setConstant(rho0);

    switch (ic.kind) {
        case InitialCondition::Kind::Incoherent:
            break;
        case InitialCondition::Kind::WrappedGaussian: {
            // characteristic function of the wrapped normal
            double var = 1.0 / ic.concentration;
            for (int k = 1; k <= M; ++k)
                st.coeffs[k].setConstant(rho0 * std::exp(-0.5 * k * k * var));
            break;
        }
        case InitialCondition::Kind::Custom: {
            const int nth = 1024;
            for (int j = 0; j < mw; ++j) {
                for (int l = 0; l < m_x; ++l) {
                    double om = st.omega.nodes[j], xi = st.x(l);
                    std::vector<Cplx> hat(M + 1, 0.0);
                    for (int a = 0; a < nth; ++a) {
                        double th = two_pi * (a + 0.5) / nth;
                        double rho = ic.density(th, om, xi);
                        for (int k = 0; k <= M; ++k)
                            hat[k] += rho * std::polar(1.0, k * th);
                    }
                    for (auto& v : hat) v /= (double)nth;  // = (1/2pi) int rho e^{ik th}
                    if (std::abs(hat[0].real() - rho0) > 1e-6 * rho0 ||
                        std::abs(hat[0].imag()) > 1e-12)
                        throw std::invalid_argument(
                            "initial density does not integrate to 1 over the circle");
                    for (int k = 1; k <= M; ++k) st.coeffs[k](j, l) = hat[k];
                }
            }
            break;
        }
    }
    return st;
}

Eigen::VectorXcd order_field(const MeanFieldState& st, const Graphon& g) {
    Eigen::MatrixXd wk = kernel_matrix(g, st.m_x);
    Eigen::VectorXd wq = Eigen::Map<const Eigen::VectorXd>(st.omega.weights.data(),
                                                           st.omega.size());
    return field_h(st.coeffs[1], wk, wq);
}

double meanfield_r(const MeanFieldState& st) {
    Eigen::VectorXd wq = Eigen::Map<const Eigen::VectorXd>(st.omega.weights.data(),
                                                           st.omega.size());
    Cplx mean = (st.coeffs[1].transpose() * wq.cast<Cplx>()).sum() / (double)st.m_x;
    return std::abs(two_pi * mean);
}

MeanFieldTrajectory evolve(const MeanFieldState& st0, const FrequencyDistribution& dist,
                           const Graphon& g, double K, double dt, double T,
                           int record_stride) {
    (void)dist;  // the quadrature is baked into the state
    if (!(dt > 0.0) || dt > 0.01)
        throw ConfigError("mean-field dt must lie in (0, 0.01]");
    if (!(T > 0.0)) throw ConfigError("horizon T must be positive");
    if (record_stride < 1) throw ConfigError("record_stride must be >= 1");

    const int mw = st0.m_omega(), mx = st0.m_x, M = st0.M;
    Eigen::MatrixXd wk = kernel_matrix(g, mx);
    Eigen::VectorXd wq =
        Eigen::Map<const Eigen::VectorXd>(st0.omega.weights.data(), mw);
    Eigen::VectorXcd half(mw), full(mw);
    for (int j = 0; j < mw; ++j) {
        half[j] = std::polar(1.0, st0.omega.nodes[j] * dt * 0.5);
        full[j] = half[j] * half[j];
    }

    Field y = st0.coeffs;
    Field a(M + 1, Eigen::MatrixXcd::Zero(mw, mx)), b = a, c = a, d = a;
    Field tmp = a, acc = a;

    MeanFieldTrajectory out;
    MeanFieldState cur = st0;
    auto record = [&](double t) {
        cur.coeffs = y;
        out.times.push_back(t);
        out.r.push_back(meanfield_r(cur));
    };
    record(st0.time);

    const long steps = std::lround(T / dt);
    for (long step = 1; step <= steps; ++step) {
        // integrating-factor RK4: transport applied exactly between stages
        galerkin_rhs(y, wk, wq, K, a);
        for (int k = 1; k <= M; ++k) tmp[k] = y[k] + (0.5 * dt) * a[k];
        apply_rotation(tmp, half);
        galerkin_rhs(tmp, wk, wq, K, b);

        for (int k = 1; k <= M; ++k) tmp[k] = y[k];
        apply_rotation(tmp, half);
        for (int k = 1; k <= M; ++k) tmp[k] += (0.5 * dt) * b[k];
        galerkin_rhs(tmp, wk, wq, K, c);

        for (int k = 1; k <= M; ++k) {
            acc[k] = dt * c[k];
        }
        apply_rotation(acc, half);
        for (int k = 1; k <= M; ++k) tmp[k] = y[k];
        apply_rotation(tmp, full);
        for (int k = 1; k <= M; ++k) tmp[k] += acc[k];
        galerkin_rhs(tmp, wk, wq, K, d);

        // y <- E_full y + dt/6 (E_full a + 2 E_half (b + c) + d)
        apply_rotation(a, full);
        for (int k = 1; k <= M; ++k) acc[k] = b[k] + c[k];
        apply_rotation(acc, half);
        apply_rotation(y, full);
        for (int k = 1; k <= M; ++k)
            y[k] += (dt / 6.0) * (a[k] + 2.0 * acc[k] + d[k]);

        if (step % record_stride == 0 || step == steps) {
            if (max_modulus(y) > 1e3)
                throw NumericalError(
                    "mean-field blow-up (|rho_k| > 1e3) at t=" +
                    std::to_string(st0.time + step * dt) +
                    "; the Galerkin closure failed for these parameters");
            record(st0.time + step * dt);
        }
    }
    cur.coeffs = std::move(y);
    cur.time = st0.time + steps * dt;
    out.final_state = std::move(cur);
    return out;
}

double linearized_evolve(const Eigen::MatrixXcd& z1, const FrequencyDistribution& dist,
                         const Graphon& g, double K, double dt, double T) {
    if (z1.size() == 0 || z1.cwiseAbs().maxCoeff() == 0.0)
        throw std::invalid_argument("linearized_evolve: zero initial data");
    if (!(dt > 0.0) || dt > 0.01) throw ConfigError("dt must lie in (0, 0.01]");
    const int mw = (int)z1.rows(), mx = (int)z1.cols();
    Quadrature q = dist.quadrature(mw);
    if ((int)q.size() != mw)
        throw ConfigError("z1 row count incompatible with the frequency rule");
    Eigen::MatrixXd wk = kernel_matrix(g, mx);
    Eigen::VectorXd wq = Eigen::Map<const Eigen::VectorXd>(q.weights.data(), mw);
    Eigen::VectorXcd half(mw), full(mw);
    for (int j = 0; j < mw; ++j) {
        half[j] = std::polar(1.0, q.nodes[j] * dt * 0.5);
        full[j] = half[j] * half[j];
    }
    auto pfield = [&](const Eigen::MatrixXcd& z) -> Eigen::MatrixXcd {
        // (K/2) P[z], constant across frequency rows
        Eigen::VectorXcd px = wk.cast<Cplx>() * (z.transpose() * wq.cast<Cplx>());
        return (0.5 * K) * px.transpose().replicate(mw, 1);
    };
    auto rot = [&](const Eigen::MatrixXcd& z, const Eigen::VectorXcd& ph) {
        return Eigen::MatrixXcd(ph.asDiagonal() * z);
    };
    auto norm = [&](const Eigen::MatrixXcd& z) {
        double s = 0.0;
        for (int j = 0; j < mw; ++j) s += wq[j] * z.row(j).squaredNorm();
        return std::sqrt(s / mx);
    };

    Eigen::MatrixXcd z = z1;
    const long steps = std::lround(T / dt);
    std::vector<double> ts, logn;
    for (long step = 1; step <= steps; ++step) {
        Eigen::MatrixXcd a = pfield(z);
        Eigen::MatrixXcd b = pfield(rot(z + (0.5 * dt) * a, half));
        Eigen::MatrixXcd c = pfield(rot(z, half) + (0.5 * dt) * b);
        Eigen::MatrixXcd d = pfield(rot(z, full) + dt * rot(c, half));
        z = rot(z, full) + (dt / 6.0) * (rot(a, full) + 2.0 * rot(b + c, half) + d);
        double t = step * dt;
        if (t >= 0.5 * T) {
            double nv = norm(z);
            if (!(nv > 0.0) || !std::isfinite(nv))
                throw NumericalError("linearized_evolve: degenerate norm");
            ts.push_back(t);
            logn.push_back(std::log(nv));
        }
    }
    // least-squares slope of log||z|| over the tail
    double n = (double)ts.size(), st = 0, sl = 0, stt = 0, stl = 0;
    for (size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sl += logn[i];
        stt += ts[i] * ts[i];
        stl += ts[i] * logn[i];
    }
    return (n * stl - st * sl) / (n * stt - st * st);
}

Stability stability_classify(const Graphon& g, const FrequencyDistribution& dist,
                             double K) {
    KernelSpectrum spec;
    switch (g.kind()) {
        case GraphonKind::Constant:
        case GraphonKind::SmallWorld:
        case GraphonKind::RingIndicator:
        case GraphonKind::RingExp:
            spec = analytic_spectrum(g);
            break;
        default:
            spec = nystrom_spectrum(g, 512);
    }
    TransitionPoints tp = transition_points(spec, dist);
    if (K > tp.kc_plus) return Stability::UnstablePositiveBranch;
    if (K < tp.kc_minus) return Stability::UnstableNegativeBranch;
    return Stability::Stable;
}

namespace {

struct DictEntry {
    int harmonic;  // 0 = constant in theta, else k with cos/sin selector
    bool use_sin;
    bool use_v;  // (1 + tanh omega)/2
    bool use_w;  // x
    double scale;
};

std::vector<DictEntry> dictionary() {
    std::vector<DictEntry> dict;
    for (int u = 0; u < 5; ++u) {
        int k = (u + 1) / 2;          // 0,1,1,2,2
        bool sn = (u % 2 == 0) && u;  // u=2,4 are the sine entries
        double lu = k == 0 ? 0.0 : 0.5 * k;
        for (int v = 0; v < 2; ++v)
            for (int w = 0; w < 2; ++w) {
                double lsum = lu + (v ? 0.5 : 0.0) + (w ? 1.0 : 0.0);
                dict.push_back({k, sn, v == 1, w == 1, 1.0 / std::max(1.0, lsum)});
            }
    }
    return dict;
}

double eval_entry(const DictEntry& e, double th, double om, double xi) {
    double u = e.harmonic == 0
                   ? 1.0
                   : 0.5 * (1.0 + (e.use_sin ? std::sin(e.harmonic * th)
                                             : std::cos(e.harmonic * th)));
    double v = e.use_v ? 0.5 * (1.0 + std::tanh(om)) : 1.0;
    double w = e.use_w ? xi : 1.0;
    return e.scale * u * v * w;
}

double empirical_mean(const DictEntry& e, const std::vector<PhasePoint>& pts) {
    double s = 0.0;
    for (const auto& p : pts) s += eval_entry(e, p[0], p[1], p[2]);
    return s / (double)pts.size();
}

double continuum_mean(const DictEntry& e, const MeanFieldState& st) {
    // int u(theta) rho dtheta = (1 + 2pi Re/Im rho_k)/2 for the harmonics
    const int mw = st.m_omega(), mx = st.m_x;
    double s = 0.0;
    for (int j = 0; j < mw; ++j) {
        double v = e.use_v ? 0.5 * (1.0 + std::tanh(st.omega.nodes[j])) : 1.0;
        for (int l = 0; l < mx; ++l) {
            double uint = 1.0;
            if (e.harmonic > 0) {
                Cplx rk = st.coeffs[e.harmonic](j, l);
                double comp = e.use_sin ? rk.imag() : rk.real();
                uint = 0.5 * (1.0 + two_pi * comp);
            }
            double w = e.use_w ? st.x(l) : 1.0;
            s += st.omega.weights[j] * (uint * v * w) / mx;
        }
    }
    return e.scale * s;
}

}  // namespace

double bl_distance_proxy(const std::vector<PhasePoint>& samples,
                         const MeanFieldState& st) {
    if (samples.empty()) throw std::invalid_argument("bl_distance_proxy: no samples");
    double best = 0.0;
    for (const auto& e : dictionary())
        best = std::max(best, std::abs(empirical_mean(e, samples) - continuum_mean(e, st)));
    return best;
}

double bl_distance_proxy(const std::vector<PhasePoint>& a,
                         const std::vector<PhasePoint>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("bl_distance_proxy: no samples");
    double best = 0.0;
    for (const auto& e : dictionary())
        best = std::max(best, std::abs(empirical_mean(e, a) - empirical_mean(e, b)));
    return best;
}

void save_checkpoint(const MeanFieldState& st, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write checkpoint '" + path + "'");
    f << "kmnet meanfield checkpoint v1\n"
      << "M " << st.M << "\nm_omega " << st.m_omega() << "\nm_x " << st.m_x
      << "\ntime " << fmt17(st.time) << "\nbinary\n";
    auto put = [&](const double* p, size_t count) {
        f.write(reinterpret_cast<const char*>(p), count * sizeof(double));
    };
    put(st.omega.nodes.data(), st.omega.size());
    put(st.omega.weights.data(), st.omega.size());
    for (const auto& mat : st.coeffs)
        put(reinterpret_cast<const double*>(mat.data()), 2 * (size_t)mat.size());
    if (!f) throw IoError("write failure on checkpoint '" + path + "'");
}

MeanFieldState load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read checkpoint '" + path + "'");
    std::string magic;
    std::getline(f, magic);
    if (magic != "kmnet meanfield checkpoint v1")
        throw IoError("'" + path + "' is not a mean-field checkpoint");
    MeanFieldState st;
    std::string key;
    int mw = 0;
    f >> key >> st.M;
    if (key != "M") throw IoError("malformed checkpoint header");
    f >> key >> mw;
    if (key != "m_omega") throw IoError("malformed checkpoint header");
    f >> key >> st.m_x;
    if (key != "m_x") throw IoError("malformed checkpoint header");
    f >> key >> st.time;
    if (key != "time") throw IoError("malformed checkpoint header");
    f >> key;
    if (key != "binary") throw IoError("malformed checkpoint header");
    f.get();  // trailing newline
    st.omega.nodes.resize(mw);
    st.omega.weights.resize(mw);
    auto get = [&](double* p, size_t count) {
        f.read(reinterpret_cast<char*>(p), count * sizeof(double));
    };
    get(st.omega.nodes.data(), mw);
    get(st.omega.weights.data(), mw);
    st.coeffs.assign(st.M + 1, Eigen::MatrixXcd::Zero(mw, st.m_x));
    for (auto& mat : st.coeffs)
        get(reinterpret_cast<double*>(mat.data()), 2 * (size_t)mat.size());
    if (!f) throw IoError("truncated checkpoint '" + path + "'");
    return st;
}

}  // namespace km
