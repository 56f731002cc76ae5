#include "km/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "km/util.hpp"

namespace km {

namespace {

// Composite Gauss-Legendre over geometrically graded symmetric panels.
// Panels on each side run from u0 out to umax with ratio chosen so that
// exactly `m` nodes are produced in total (odd m gets a 1-node center panel).
Quadrature graded_rule(int m, double u0, double umax,
                       const std::function<double(double)>& weight) {
    if (m < 8) throw ConfigError("quadrature size too small: " + std::to_string(m));
    Quadrature out;
    out.nodes.reserve(m);
    out.weights.reserve(m);

    const bool odd = (m % 2) != 0;
    if (odd) {
        // tiny center panel, midpoint rule
        out.nodes.push_back(0.0);
        out.weights.push_back(2.0 * u0 * weight(0.0));
    }
    const int side = (m - (odd ? 1 : 0)) / 2;
    int q = std::clamp(side / 12, 4, 14);
    const int panels = side / q;
    const int extra = side - panels * q;  // innermost `extra` panels get q+1 nodes
    const double rho = std::pow(umax / u0, 1.0 / panels);

    // the innermost panel starts at 0 (odd m already covered [-u0,u0])
    double a = odd ? u0 : 0.0;
    for (int k = 0; k < panels; ++k) {
        double b = u0 * std::pow(rho, k + 1);
        if (k == panels - 1) b = umax;
        int n = q + (k < extra ? 1 : 0);
        Quadrature p = gauss_legendre(n, a, b);
        for (int j = 0; j < n; ++j) {
            out.nodes.push_back(p.nodes[j]);
            out.weights.push_back(p.weights[j] * weight(p.nodes[j]));
            out.nodes.push_back(-p.nodes[j]);
            out.weights.push_back(p.weights[j] * weight(-p.nodes[j]));
        }
        a = b;
    }
    // sort ascending for readability / cache friendliness downstream
    std::vector<int> idx(out.nodes.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = (int)i;
    std::sort(idx.begin(), idx.end(),
              [&](int i, int j) { return out.nodes[i] < out.nodes[j]; });
    Quadrature sorted;
    sorted.nodes.reserve(idx.size());
    sorted.weights.reserve(idx.size());
    for (int i : idx) {
        sorted.nodes.push_back(out.nodes[i]);
        sorted.weights.push_back(out.weights[i]);
    }
    return sorted;
}

// Hybrid symmetric rule on [-umax, umax]: a geometrically refined core near 0
// (resolves the small-x resolvent limit) plus uniform panels outside (keeps
// individual weights small, which the nonlinear mean-field solver needs --
// a few heavy tail nodes visibly distort the saturated state).
Quadrature hybrid_rule(int m, double u0, double u_break, double umax,
                       const std::function<double(double)>& weight) {
    const int side = m / 2;
    const int q_in = 6, q_out = 8;
    const double ratio = 4.0;
    const int n_in = (int)std::ceil(std::log(u_break / u0) / std::log(ratio));
    const int rest = side - n_in * q_in;
    const int p_out = rest / q_out;
    const int extra = rest - p_out * q_out;  // first `extra` outer panels get q_out+1

    Quadrature out;
    out.nodes.reserve(m);
    out.weights.reserve(m);
    auto add_panel = [&](int n, double a, double b) {
        Quadrature p = gauss_legendre(n, a, b);
        for (int j = 0; j < n; ++j) {
            out.nodes.push_back(p.nodes[j]);
            out.weights.push_back(p.weights[j] * weight(p.nodes[j]));
            out.nodes.push_back(-p.nodes[j]);
            out.weights.push_back(p.weights[j] * weight(-p.nodes[j]));
        }
    };
    double a = 0.0;
    for (int k = 0; k < n_in; ++k) {
        double b = u_break * std::pow(ratio, -(double)(n_in - 1 - k));
        add_panel(q_in, a, b);
        a = b;
    }
    const double h = (umax - u_break) / p_out;
    for (int k = 0; k < p_out; ++k) {
        double b = (k == p_out - 1) ? umax : u_break + (k + 1) * h;
        add_panel(q_out + (k < extra ? 1 : 0), a, b);
        a = b;
    }
    std::vector<int> idx(out.nodes.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = (int)i;
    std::sort(idx.begin(), idx.end(),
              [&](int i, int j) { return out.nodes[i] < out.nodes[j]; });
    Quadrature sorted;
    sorted.nodes.reserve(idx.size());
    sorted.weights.reserve(idx.size());
    for (int i : idx) {
        sorted.nodes.push_back(out.nodes[i]);
        sorted.weights.push_back(out.weights[i]);
    }
    return sorted;
}

}  // namespace

FrequencyDistribution FrequencyDistribution::cauchy(double delta) {
    if (!(delta > 0.0)) throw ConfigError("cauchy scale must be positive");
    FrequencyDistribution d;
    d.kind_ = FreqKind::Cauchy;
    d.param_ = delta;
    d.density_ = [delta](double w) { return delta / (pi * (w * w + delta * delta)); };
    d.sampler_ = [delta](Rng& rng) { return rng.cauchy(delta); };
    d.assumptions_met_ = true;
    char buf[64];
    std::snprintf(buf, sizeof buf, "cauchy:%.17g", delta);
    d.spec_ = buf;
    d.finalize();
    return d;
}

FrequencyDistribution FrequencyDistribution::gaussian(double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("gaussian width must be positive");
    FrequencyDistribution d;
    d.kind_ = FreqKind::Gaussian;
    d.param_ = sigma;
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * pi));
    d.density_ = [sigma, norm](double w) {
        double t = w / sigma;
        return norm * std::exp(-0.5 * t * t);
    };
    d.sampler_ = [sigma](Rng& rng) { return sigma * rng.normal(); };
    d.assumptions_met_ = true;
    char buf[64];
    std::snprintf(buf, sizeof buf, "gaussian:%.17g", sigma);
    d.spec_ = buf;
    d.finalize();
    return d;
}

FrequencyDistribution FrequencyDistribution::custom(
    std::function<double(double)> density, std::function<double(Rng&)> sampler) {
    if (!density) throw ConfigError("custom distribution needs a density");
    FrequencyDistribution d;
    d.kind_ = FreqKind::Custom;
    d.density_ = std::move(density);
    d.sampler_ = std::move(sampler);
    d.spec_ = "custom";
    // probe evenness / nonnegativity / monotone decay on the positive axis
    bool ok = true;
    double prev = d.density_(0.0);
    const double scale = std::max(prev, 1e-300);
    for (int j = 1; j <= 2000 && ok; ++j) {
        double w = 0.01 * j;
        double gp = d.density_(w);
        double gm = d.density_(-w);
        if (gp < -1e-15 || std::abs(gp - gm) > 1e-10 * scale) ok = false;
        if (gp > prev + 1e-12 * scale) ok = false;
        prev = gp;
    }
    d.assumptions_met_ = ok;
    d.finalize();
    return d;
}

void FrequencyDistribution::finalize() {
    g0_ = density_(0.0);
    // shared high-resolution rule for resolvent integrals
    reference_ = std::make_shared<const Quadrature>(quadrature_impl(1200, 1e-9));
}

double FrequencyDistribution::density(double omega) const { return density_(omega); }

std::vector<double> FrequencyDistribution::sample(int n, std::uint64_t seed) const {
    if (!sampler_) throw UnsupportedError("distribution has no sampler");
    if (n < 0) throw ConfigError("sample size must be nonnegative");
    Rng rng(seed);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = sampler_(rng);
    return out;
}

Quadrature FrequencyDistribution::quadrature(int m) const { return quadrature_impl(m, 1e-4); }

Quadrature FrequencyDistribution::quadrature_impl(int m, double inner) const {
    switch (kind_) {
        case FreqKind::Cauchy: {
            // omega = delta * tan(u) maps the density to the flat weight 1/pi
            const double delta = param_;
            const double u0 = inner * (pi / 2.0);
            const double umax = pi / 2.0 * (1.0 - 1e-12);
            const auto flat = [](double) { return 1.0 / pi; };
            // the fully graded layout stays in use for the high-accuracy
            // reference rule; small/odd m also fall back to it
            Quadrature u = (m % 2 == 0 && m >= 96 && inner >= 1e-5)
                               ? hybrid_rule(m, u0, 0.2, umax, flat)
                               : graded_rule(m, u0, umax, flat);
            for (auto& x : u.nodes) x = delta * std::tan(x);
            return u;
        }
        case FreqKind::Gaussian: {
            const double sigma = param_;
            const double L = 8.5 * sigma;
            if (m <= 400 && inner >= 1e-5) {
                // a single global rule is plenty at this resolution
                Quadrature q = gauss_legendre(m, -L, L);
                for (int j = 0; j < m; ++j) q.weights[j] *= density_(q.nodes[j]);
                return q;
            }
            return graded_rule(m, inner * sigma, L, density_);
        }
        case FreqKind::Custom: {
            // crude support scan, then the same graded layout
            double L = 1.0;
            while (L < 1e6 && density_(L) > 1e-14 * std::max(g0_, 1e-300)) L *= 2.0;
            return graded_rule(m, inner * L, L, density_);
        }
    }
    throw std::logic_error("unreachable");
}

FrequencyDistribution FrequencyDistribution::parse(const std::string& spec) {
    auto pos = spec.find(':');
    std::string kind = spec.substr(0, pos);
    if (kind == "cauchy" || kind == "gaussian") {
        if (pos == std::string::npos)
            throw ConfigError("frequency spec '" + spec + "' is missing a parameter");
        double v = 0.0;
        try {
            size_t used = 0;
            v = std::stod(spec.substr(pos + 1), &used);
            if (used != spec.size() - pos - 1) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ConfigError("bad numeric parameter in frequency spec '" + spec + "'");
        }
        return kind == "cauchy" ? cauchy(v) : gaussian(v);
    }
    throw ConfigError("unknown frequency kind '" + kind +
                      "' (accepted: cauchy:<delta>, gaussian:<sigma>)");
}

}  // namespace km
