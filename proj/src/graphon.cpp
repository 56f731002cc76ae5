#include "km/graphon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "km/util.hpp"

namespace km {

double circle_dist(double x, double y) {
    const double d = std::abs(x - y);
    return std::min(d, 1.0 - d);
}

namespace {

void check_unit(double x, double y) {
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
        throw std::invalid_argument("graphon arguments must lie in [0,1]");
}

// Step profile in circle distance with the jump-midpoint convention exactly
// on the discontinuity circle (consistent with the mollification limit and
// with the Fourier series of the kernel).
double step_profile(double d, double r, double inside, double outside) {
    if (d < r) return inside;
    if (d > r) return outside;
    return 0.5 * (inside + outside);
}

// Linear ramp of half-width h centered on the jump at distance r.
double ramp_profile(double d, double r, double h, double inside, double outside) {
    if (d <= r - h) return inside;
    if (d >= r + h) return outside;
    const double t = (d - (r - h)) / (2.0 * h);
    return inside + (outside - inside) * t;
}

}  // namespace

Graphon Graphon::constant(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("constant graphon needs p in [0,1]");
    Graphon g;
    g.kind_ = GraphonKind::Constant;
    g.p_ = p;
    g.lipschitz_ = 0.0;
    g.spec_ = "constant:" + fmt17(p);
    return g;
}

Graphon Graphon::small_world(double p, double r) {
    if (p < 0.0 || p >= 0.5) throw std::invalid_argument("small_world needs p in [0, 0.5)");
    if (r <= 0.0 || r >= 0.5) throw std::invalid_argument("small_world needs r in (0, 0.5)");
    Graphon g;
    g.kind_ = GraphonKind::SmallWorld;
    g.p_ = p;
    g.r_ = r;
    g.lipschitz_ = std::nullopt;  // piecewise constant
    g.spec_ = "small_world:" + fmt17(p) + ":" + fmt17(r);
    return g;
}

Graphon Graphon::ring_indicator(double r) {
    if (r <= 0.0 || r >= 0.5) throw std::invalid_argument("ring_indicator needs r in (0, 0.5)");
    Graphon g;
    g.kind_ = GraphonKind::RingIndicator;
    g.r_ = r;
    g.lipschitz_ = std::nullopt;
    g.spec_ = "ring_indicator:" + fmt17(r);
    return g;
}

Graphon Graphon::ring_exp(double kappa) {
    if (kappa <= 0.0) throw std::invalid_argument("ring_exp needs kappa > 0");
    Graphon g;
    g.kind_ = GraphonKind::RingExp;
    g.kappa_ = kappa;
    // |d/dx exp(-kappa d)| <= kappa, and d is 1-Lipschitz in each argument.
    g.lipschitz_ = kappa * std::sqrt(2.0);
    g.spec_ = "ring_exp:" + fmt17(kappa);
    return g;
}

Graphon Graphon::custom(std::function<double(double, double)> f,
                        std::optional<double> lipschitz) {
    Graphon g;
    g.kind_ = GraphonKind::Custom;
    g.eval_ = std::move(f);
    g.lipschitz_ = lipschitz;
    g.spec_ = "custom";
    return g;
}

double Graphon::operator()(double x, double y) const {
    check_unit(x, y);
    switch (kind_) {
        case GraphonKind::Constant:
            return p_;
        case GraphonKind::SmallWorld:
            return step_profile(circle_dist(x, y), r_, 1.0 - p_, p_);
        case GraphonKind::RingIndicator:
            return step_profile(circle_dist(x, y), r_, 1.0, 0.0);
        case GraphonKind::RingExp:
            return std::exp(-kappa_ * circle_dist(x, y));
        case GraphonKind::Mollified: {
            return ramp_profile(circle_dist(x, y), r_, ramp_, 1.0 - p_, p_);
        }
        case GraphonKind::Custom:
            return eval_(x, y);
    }
    throw std::logic_error("unreachable");
}

bool Graphon::is_convolution() const {
    switch (kind_) {
        case GraphonKind::Constant:
        case GraphonKind::SmallWorld:
        case GraphonKind::RingIndicator:
        case GraphonKind::RingExp:
        case GraphonKind::Mollified:
            return true;
        case GraphonKind::Custom:
            return false;
    }
    return false;
}

Graphon mollify(const Graphon& base, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("mollify needs eps > 0");
    if (base.kind() != GraphonKind::SmallWorld && base.kind() != GraphonKind::RingIndicator)
        throw UnsupportedError("mollify applies to piecewise-constant graphon kinds only");

    const double p = base.kind() == GraphonKind::SmallWorld ? base.p() : 0.0;
    const double r = base.r();
    const double jump = std::abs(1.0 - 2.0 * p);
    // total ramp width eps^2 / (8*jump), capped so the ramp stays inside (0, 1/2)
    double h = eps * eps / (16.0 * jump);
    h = std::min(h, 0.5 * std::min(r, 0.5 - r));

    Graphon g;
    g.kind_ = GraphonKind::Mollified;
    g.p_ = p;
    g.r_ = r;
    g.ramp_ = h;
    // slope of the ramp in circle distance is jump/(2h); d is sqrt(2)-Lipschitz on [0,1]^2
    g.lipschitz_ = jump / (2.0 * h) * std::sqrt(2.0);
    g.spec_ = "mollified(" + base.spec() + "):" + fmt17(eps);

    // Build-time contract check: L2([0,1]^2) distance to the base < eps.
    // The difference depends only on circle distance d and is supported on
    // [r-h, r+h]; the (x,y) measure of {d in [a,b]} is 2(b-a), so the squared
    // L2 distance is 2 * int (ramp - step)^2 dd over the band, by quadrature.
    const int ns = 4001;
    const double a = r - h, width = 2.0 * h;
    double acc = 0.0;
    for (int i = 0; i < ns; ++i) {  // Simpson weights
        const double d = a + width * i / (ns - 1);
        const double diff = ramp_profile(d, r, h, 1.0 - p, p) - step_profile(d, r, 1.0 - p, p);
        const double wgt = (i == 0 || i == ns - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += wgt * diff * diff;
    }
    const double l2sq = 2.0 * acc * (width / (ns - 1)) / 3.0;
    if (!(l2sq < eps * eps))
        throw NumericalError("mollify: L2 closeness contract violated");
    return g;
}

Graphon Graphon::parse(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    auto num = [&](std::size_t i) {
        std::size_t pos = 0;
        double v = std::stod(parts.at(i), &pos);
        if (pos != parts[i].size()) throw std::invalid_argument("bad number: " + parts[i]);
        return v;
    };
    try {
        if (parts.empty()) throw std::invalid_argument("empty graphon spec");
        if (parts[0] == "constant" && parts.size() == 2) return constant(num(1));
        if (parts[0] == "small_world" && parts.size() == 3) return small_world(num(1), num(2));
        if (parts[0] == "ring_indicator" && parts.size() == 2) return ring_indicator(num(1));
        if (parts[0] == "ring_exp" && parts.size() == 2) return ring_exp(num(1));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("graphon spec '" + spec + "': " + e.what());
    }
    throw ConfigError("unknown graphon spec '" + spec +
                      "' (accepted: constant:p, small_world:p:r, ring_indicator:r, ring_exp:kappa)");
}

NodeGrid make_grid(int n, GridScheme scheme, std::optional<std::uint64_t> seed) {
    if (n < 1) throw std::invalid_argument("make_grid needs n >= 1");
    NodeGrid grid;
    grid.scheme = scheme;
    grid.points.resize(n);
    if (scheme == GridScheme::Uniform) {
        for (int i = 0; i < n; ++i) grid.points[i] = static_cast<double>(i + 1) / n;
    } else {
        if (!seed) throw std::invalid_argument("iid_uniform grid requires a seed");
        grid.seed = seed;
        Rng rng(*seed);
        for (int i = 0; i < n; ++i) grid.points[i] = rng.uniform();
        std::sort(grid.points.begin(), grid.points.end());
    }
    return grid;
}

WeightMatrix build_weighted_graph(const Graphon& w, const NodeGrid& grid) {
    const int n = grid.size();
    WeightMatrix m;
    m.entries.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = w(grid.points[i], grid.points[j]);
            m.entries(i, j) = v;
            m.entries(j, i) = v;
        }
    return m;
}

AdjacencyMatrix sample_random_graph(const Graphon& w, const NodeGrid& grid, std::uint64_t seed) {
    const int n = grid.size();
    AdjacencyMatrix a;
    a.n = n;
    a.seed = seed;
    a.entries.assign(static_cast<std::size_t>(n) * n, 0);
    Rng rng(seed);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double p = w(grid.points[i], grid.points[j]);
            if (p < 0.0 || p > 1.0)
                throw std::invalid_argument("sample_random_graph: graphon value outside [0,1]");
            const std::uint8_t e = rng.bernoulli(p) ? 1 : 0;
            a.entries[static_cast<std::size_t>(i) * n + j] = e;
            a.entries[static_cast<std::size_t>(j) * n + i] = e;
        }
    return a;
}

double norm_2n(const Eigen::MatrixXd& a) {
    if (a.size() == 0) throw std::invalid_argument("norm_2n: empty matrix");
    const double n = static_cast<double>(a.rows());
    return std::sqrt(a.squaredNorm() / (n * n));
}

double norm_1n(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("norm_1n: empty vector");
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    os << n << "\n";
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) os << (j ? " " : "") << fmt17(a(i, j));
        os << "\n";
    }
}

Eigen::MatrixXd read_matrix(std::istream& is) {
    int n = 0;
    if (!(is >> n) || n < 1) throw IoError("matrix file: bad size header");
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!(is >> a(i, j))) throw IoError("matrix file: truncated");
    return a;
}

void write_adjacency(std::ostream& os, const AdjacencyMatrix& a) {
    os << a.n << "\n";
    for (int i = 0; i < a.n; ++i) {
        for (int j = 0; j < a.n; ++j) os << (j ? " " : "") << int(a.at(i, j));
        os << "\n";
    }
}

AdjacencyMatrix read_adjacency(std::istream& is) {
    int n = 0;
    if (!(is >> n) || n < 1) throw IoError("adjacency file: bad size header");
    AdjacencyMatrix a;
    a.n = n;
    a.entries.resize(static_cast<std::size_t>(n) * n);
    for (std::size_t k = 0; k < a.entries.size(); ++k) {
        int v = 0;
        if (!(is >> v)) throw IoError("adjacency file: truncated");
        a.entries[k] = static_cast<std::uint8_t>(v);
    }
    return a;
}

void write_grid(std::ostream& os, const NodeGrid& grid) {
    for (double x : grid.points) os << fmt17(x) << "\n";
}

std::vector<double> read_grid(std::istream& is) {
    std::vector<double> pts;
    double x;
    while (is >> x) pts.push_back(x);
    if (pts.empty()) throw IoError("grid file: empty");
    return pts;
}

}  // namespace km
