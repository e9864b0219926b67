#include "hypermatch/rpcm.hpp"

#include <algorithm>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hypermatch/error.hpp"
#include "hypermatch/geometry.hpp"
#include "hypermatch/quadrature.hpp"

namespace hm::rpcm {

using geom::pi;

namespace {

constexpr double ginibre_cutoff = 4.0;
constexpr double tol = 1e-6;

// ∫ (1 − a cos θ)_+ (1 − a sin θ)_+ dθ over θ ∈ [0, π/2]. Inside the range
// where both factors are positive the antiderivative is
// θ − a sin θ + a cos θ + (a²/2) sin²θ.
double quarter_arc(double a) {
    auto F = [a](double t) {
        const double s = std::sin(t);
        return t - a * s + a * std::cos(t) + 0.5 * a * a * s * s;
    };
    double lo = 0.0, hi = 0.5 * pi;
    if (a > 1.0) {
        lo = std::acos(1.0 / a);
        hi = std::asin(1.0 / a);
    }
    return hi > lo ? F(hi) - F(lo) : 0.0;
}

// Spherical integral of Π(1 − |x_i|)_+ over |x| = r.
double cloaked_shell(int d, double r) {
    if (r <= 0.0) return d == 1 ? 2.0 : 0.0;
    if (r >= std::sqrt(static_cast<double>(d))) return 0.0;
    if (d == 1) return 2.0 * std::max(0.0, 1.0 - r);
    if (d == 2) return 4.0 * r * quarter_arc(r);
    if (d == 3) {
        // Polar angle φ from the third axis; the azimuthal integral is the
        // planar quarter arc at radius r sin φ.
        const double lo = r > 1.0 ? std::acos(1.0 / r) : 0.0;
        std::vector<double> breaks;
        if (r > 1.0) breaks.push_back(std::asin(1.0 / r));
        if (r * r > 2.0) breaks.push_back(std::asin(std::sqrt(2.0) / r));
        auto f = [r](double ph) {
            const double sp = std::sin(ph);
            return std::max(0.0, 1.0 - r * std::cos(ph)) * sp * quarter_arc(r * sp);
        };
        return 8.0 * r * r * quad::integrate(f, lo, 0.5 * pi, 1e-9, breaks).value;
    }
    fail(ErrorKind::unsupported_dimension, "cloaked-lattice model supports d in 1..3");
}

void require_integrable(const RpcmModel& m) {
    if (!m.integrable()) fail(ErrorKind::non_integrable_model, m.name() + " is not integrable");
}

// ∫ g(r) |β|_radial(r) dr over [a, b] ∩ [0, cutoff].
double radial_abs_integral(const RpcmModel& m, const quad::Fn& g, double a, double b,
                           std::vector<double> breaks = {}) {
    if (m.kind() == Kind::poisson) return 0.0;
    b = std::min(b, m.cutoff());
    if (!(b > a)) return 0.0;
    for (double x : m.radial_breaks()) breaks.push_back(x);
    auto f = [&](double r) { return g(r) * std::abs(m.radial_mass(r)); };
    return quad::integrate_checked(f, a, b, tol, 1e-13, breaks);
}

}  // namespace

double sphere_area(int d) {
    switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * pi;
    case 3: return 4.0 * pi;
    case 4: return 2.0 * pi * pi;
    }
    fail(ErrorKind::unsupported_dimension, "d must be in 1..4");
}

RpcmModel RpcmModel::poisson(int d) {
    if (d < 1 || d > 4) fail(ErrorKind::unsupported_dimension, "d must be in 1..4");
    RpcmModel m;
    m.kind_ = Kind::poisson;
    m.d_ = d;
    return m;
}

RpcmModel RpcmModel::ginibre_unit() {
    RpcmModel m;
    m.kind_ = Kind::ginibre_unit;
    m.d_ = 2;
    return m;
}

RpcmModel RpcmModel::cloaked_lattice(int d) {
    if (d < 1 || d > 3) fail(ErrorKind::unsupported_dimension, "cloaked-lattice model supports d in 1..3");
    RpcmModel m;
    m.kind_ = Kind::cloaked_lattice;
    m.d_ = d;
    return m;
}

RpcmModel RpcmModel::table(int d, std::vector<double> r, std::vector<double> density, int sign,
                           bool integrable) {
    if (d < 1 || d > 4) fail(ErrorKind::unsupported_dimension, "d must be in 1..4");
    if (r.size() != density.size() || r.size() < 2)
        fail(ErrorKind::config, "table model needs at least two (r, density) rows");
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!std::isfinite(r[i]) || !std::isfinite(density[i]))
            fail(ErrorKind::config, "table model entries must be finite");
        if (i > 0 && !(r[i] > r[i - 1])) fail(ErrorKind::config, "table radii must increase");
    }
    if (r.front() < 0.0) fail(ErrorKind::config, "table radii must be nonnegative");
    if (sign != 1 && sign != -1) fail(ErrorKind::config, "table sign must be +1 or -1");
    RpcmModel m;
    m.kind_ = Kind::table;
    m.d_ = d;
    m.integrable_ = integrable;
    m.sign_ = sign;
    m.r_ = std::move(r);
    m.f_ = std::move(density);
    return m;
}

RpcmModel RpcmModel::load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open table '" + path + "'");
    std::string line;
    int d = 0, sign = 0, integrable = -1;
    bool header = false;
    std::vector<double> r, f;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            std::istringstream hs(line);
            std::string word;
            hs >> word;
            if (word != "rpcm-table") fail(ErrorKind::io, "table header must start with rpcm-table");
            while (hs >> word) {
                const auto eq = word.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = word.substr(0, eq), val = word.substr(eq + 1);
                if (key == "d") d = std::stoi(val);
                if (key == "sign") sign = std::stoi(val);
                if (key == "integrable") integrable = std::stoi(val);
            }
            if (d == 0 || sign == 0 || integrable < 0)
                fail(ErrorKind::io, "table header needs d=, sign= and integrable=");
            header = true;
            continue;
        }
        std::istringstream ls(line);
        double a = 0.0, b = 0.0;
        if (!(ls >> a >> b)) fail(ErrorKind::io, "bad table row '" + line + "'");
        r.push_back(a);
        f.push_back(b);
    }
    if (!header) fail(ErrorKind::io, "table file has no header");
    return table(d, std::move(r), std::move(f), sign, integrable != 0);
}

RpcmModel RpcmModel::parse(const std::string& text, int d) {
    if (text == "poisson") return poisson(d);
    if (text == "ginibre-unit" || text == "ginibre") {
        if (d != 2) fail(ErrorKind::unsupported_dimension, "ginibre-unit is planar");
        return ginibre_unit();
    }
    if (text == "cloaked-lattice") return cloaked_lattice(d);
    if (text.rfind("table:", 0) == 0) {
        RpcmModel m = load_table(text.substr(6));
        if (m.d() != d) fail(ErrorKind::dimension, "table dimension does not match");
        return m;
    }
    fail(ErrorKind::config, "unknown rpcm model '" + text + "'");
}

std::string RpcmModel::name() const {
    switch (kind_) {
    case Kind::poisson: return "poisson";
    case Kind::ginibre_unit: return "ginibre-unit";
    case Kind::cloaked_lattice: return "cloaked-lattice";
    case Kind::table: return "table";
    }
    return "unknown";
}

double RpcmModel::table_value(double r) const {
    if (r <= r_.front()) return f_.front();
    if (r > r_.back()) return 0.0;
    const auto it = std::upper_bound(r_.begin(), r_.end(), r);
    const std::size_t i = static_cast<std::size_t>(it - r_.begin());
    if (i >= r_.size()) return f_.back();
    const double t = (r - r_[i - 1]) / (r_[i] - r_[i - 1]);
    return f_[i - 1] + t * (f_[i] - f_[i - 1]);
}

double RpcmModel::density(const double* x) const {
    switch (kind_) {
    case Kind::poisson: return 0.0;
    case Kind::ginibre_unit: return -std::exp(-pi * (x[0] * x[0] + x[1] * x[1]));
    case Kind::cloaked_lattice: {
        double prod = 1.0;
        for (int i = 0; i < d_; ++i) prod *= std::max(0.0, 1.0 - std::abs(x[i]));
        return -prod;
    }
    case Kind::table: {
        double s = 0.0;
        for (int i = 0; i < d_; ++i) s += x[i] * x[i];
        return sign_ * table_value(std::sqrt(s));
    }
    }
    return 0.0;
}

double RpcmModel::radial_mass(double r) const {
    switch (kind_) {
    case Kind::poisson: return 0.0;
    case Kind::ginibre_unit: return -2.0 * pi * r * std::exp(-pi * r * r);
    case Kind::cloaked_lattice: return -cloaked_shell(d_, r);
    case Kind::table: return sign_ * table_value(r) * sphere_area(d_) * std::pow(r, d_ - 1);
    }
    return 0.0;
}

double RpcmModel::cutoff() const {
    switch (kind_) {
    case Kind::poisson: return 0.0;
    case Kind::ginibre_unit: return ginibre_cutoff;
    case Kind::cloaked_lattice: return std::sqrt(static_cast<double>(d_));
    case Kind::table: return r_.back();
    }
    return 0.0;
}

double RpcmModel::axis_cutoff() const {
    return kind_ == Kind::cloaked_lattice ? 1.0 : cutoff();
}

std::vector<double> RpcmModel::radial_breaks() const {
    std::vector<double> b;
    if (kind_ == Kind::cloaked_lattice)
        for (int j = 1; j <= d_; ++j) b.push_back(std::sqrt(static_cast<double>(j)));
    if (kind_ == Kind::table) b = r_;
    return b;
}

double beta_total(const RpcmModel& m) {
    require_integrable(m);
    if (m.kind() == Kind::poisson) return 0.0;
    auto f = [&](double r) { return m.radial_mass(r); };
    return quad::integrate_checked(f, 0.0, m.cutoff(), tol, 1e-13, m.radial_breaks());
}

double epsilon(const RpcmModel& m, double t) {
    if (!(t > 0.0)) fail(ErrorKind::config, "epsilon needs t > 0");
    auto g = [t](double r) { return std::min(1.0, t * r); };
    return radial_abs_integral(m, g, 0.0, m.cutoff(), {1.0 / t});
}

double abs_first_moment(const RpcmModel& m) {
    return radial_abs_integral(m, [](double r) { return r; }, 0.0, m.cutoff());
}

double log_integral(const RpcmModel& m) {
    return radial_abs_integral(m, [](double r) { return std::log(r); }, 1.0, m.cutoff());
}

namespace {

// Ginibre and cloaked-lattice densities are −Π_i f(x_i).
bool separable(const RpcmModel& m) {
    return m.kind() == Kind::ginibre_unit || m.kind() == Kind::cloaked_lattice;
}

quad::Fn axis_factor(const RpcmModel& m) {
    if (m.kind() == Kind::ginibre_unit) return [](double t) { return std::exp(-pi * t * t); };
    return [](double t) { return std::max(0.0, 1.0 - std::abs(t)); };
}

}  // namespace

double b_n(const RpcmModel& m, double n) {
    if (!(n > 0.0)) fail(ErrorKind::config, "b_n needs n > 0");
    if (m.kind() == Kind::poisson) return 1.0;
    // Λ_n + Λ_n = Λ_{2^d n}: a box of half-width side(n).
    const int d = m.d();
    const double half = geom::Window::make(d, n).side;
    const double a = std::min(half, m.axis_cutoff());
    if (separable(m)) {
        const double one = 2.0 * quad::integrate(axis_factor(m), 0.0, a, 1e-13).value;
        return 1.0 + std::pow(one, d);
    }
    std::vector<double> lo(d, 0.0), hi(d, a);
    std::vector<std::vector<double>> breaks(d, std::vector<double>{});
    auto f = [&](const double* x) { return std::abs(m.density(x)); };
    quad::Result q = quad::integrate_box(f, d, lo, hi, 1e-10, breaks);
    return 1.0 + std::ldexp(q.value, d);
}

double structure_factor(const RpcmModel& m, std::span<const double> k) {
    require_integrable(m);
    if (k.size() != static_cast<std::size_t>(m.d()))
        fail(ErrorKind::dimension, "wavevector dimension does not match model");
    double k2 = 0.0;
    for (double v : k) k2 += v * v;
    switch (m.kind()) {
    case Kind::poisson: return 1.0;
    case Kind::ginibre_unit: return -std::expm1(-k2 / (4.0 * pi));
    case Kind::cloaked_lattice: {
        double prod = 1.0;
        for (double v : k) {
            const double h = 0.5 * v;
            const double s = std::abs(h) < 1e-8 ? 1.0 - h * h / 6.0 : std::sin(h) / h;
            prod *= s * s;
        }
        return 1.0 - prod;
    }
    case Kind::table: {
        const double kn = std::sqrt(k2);
        const int d = m.d();
        auto kernel = [kn, d](double r) {
            const double x = kn * r;
            switch (d) {
            case 1: return std::cos(x);
            case 2: return boost::math::cyl_bessel_j(0, x);
            case 3: return x < 1e-8 ? 1.0 : std::sin(x) / x;
            default: return x < 1e-8 ? 1.0 : 2.0 * boost::math::cyl_bessel_j(1, x) / x;
            }
        };
        auto f = [&](double r) { return m.radial_mass(r) * kernel(r); };
        return 1.0 + quad::integrate_checked(f, 0.0, m.cutoff(), tol, 1e-12, m.radial_breaks());
    }
    }
    return 1.0;
}

double predicted_variance(const RpcmModel& m, double n) {
    require_integrable(m);
    const geom::Window w = geom::Window::make(m.d(), n);
    if (m.kind() == Kind::poisson) return w.volume();
    const int d = m.d();
    const double a = m.axis_cutoff();
    if (separable(m)) {
        // γ_n = vol − δ_n and the vol·β̂ terms cancel, leaving vol + ∫δ_n β
        // with ∫δ_n β = −Π_i ∫ (side − |t|)_+ f(t) dt.
        const auto f = axis_factor(m);
        auto g = [&](double t) { return (w.side - t) * f(t); };
        const double one = 2.0 * quad::integrate(g, 0.0, std::min(a, w.side), 1e-13).value;
        return w.volume() - std::pow(one, d);
    }
    std::vector<double> lo(d, 0.0), hi(d, a);
    std::vector<std::vector<double>> breaks(d, std::vector<double>{w.side});
    auto f = [&](const double* z) {
        return geom::gamma_n(std::span<const double>(z, d), w) * m.density(z);
    };
    quad::Result q = quad::integrate_box(f, d, lo, hi, 1e-10, breaks);
    const double gamma_beta = std::ldexp(q.value, d);
    return w.volume() * (1.0 + beta_total(m)) - gamma_beta;
}

}  // namespace hm::rpcm
