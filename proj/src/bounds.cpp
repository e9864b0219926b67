#include "hypermatch/bounds.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>

#include "hypermatch/error.hpp"

namespace hm::bounds {

QFunction QFunction::log_loglog(double gamma) {
    if (!(gamma > 1.0)) fail(ErrorKind::config, "log-loglog q needs gamma > 1");
    QFunction q;
    q.kind = Kind::log_loglog;
    q.gamma = gamma;
    return q;
}

QFunction QFunction::constant_on_dyadics(double t0) {
    if (!(t0 >= 1.0)) fail(ErrorKind::config, "constant-on-dyadics q needs t0 >= 1");
    QFunction q;
    q.kind = Kind::constant_on_dyadics;
    q.t0 = t0;
    return q;
}

double QFunction::operator()(double x) const {
    if (kind == Kind::constant_on_dyadics) return std::floor(std::log2(t0)) + 1.0;
    return std::log(2.0 * x) * std::pow(std::log(std::log(3.0 * x)), gamma);
}

double QFunction::a_q() const {
    if (kind == Kind::constant_on_dyadics) {
        double s = 0.0;
        for (int k = 0; std::ldexp(1.0, k) <= t0; ++k) s += 1.0 / (*this)(std::ldexp(1.0, k));
        return s;
    }
    // 1/q(2^k) written in k to avoid overflow; direct sum over the head, then
    // the tail by Euler–Maclaurin: ∫_K^∞ f + f(K)/2. In u = ln(ln 3 + k ln 2)
    // the tail integral is (1/ln 2) ∫_U^∞ u^{−γ} / (1 − c e^{−u}) du with
    // c = ln 3 − ln 2; the leading part is closed form and the rest decays
    // exponentially.
    constexpr int head = 4096;
    const double ln2 = std::log(2.0);
    auto f = [&](double k) {
        return 1.0 / (ln2 * (k + 1.0) * std::pow(std::log(std::log(3.0) + k * ln2), gamma));
    };
    double s = 0.0;
    for (int k = 0; k < head; ++k) s += f(k);
    const double c = std::log(3.0) - ln2;
    const double U = std::log(std::log(3.0) + head * ln2);
    boost::math::quadrature::exp_sinh<double> integrator;
    const double rest = integrator.integrate([&](double t) {
        const double u = U + t, e = c * std::exp(-u);
        return e / (1.0 - e) * std::pow(u, -gamma);
    });
    const double tail = (std::pow(U, 1.0 - gamma) / (gamma - 1.0) + rest) / ln2;
    return s + tail + 0.5 * f(head);
}

namespace {

void check_args(const std::vector<Mode>& modes, std::span<const double> coeffs, double t0) {
    if (modes.size() != coeffs.size()) fail(ErrorKind::dimension, "modes and coefficients differ in length");
    if (!(t0 >= 1.0)) fail(ErrorKind::config, "t0 must be >= 1");
}

}  // namespace

double bl_w2_bound(const std::vector<Mode>& modes, std::span<const double> coeffs, double t0) {
    check_args(modes, coeffs, t0);
    double s = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const double r = spectral::mode_norm(modes[i]);
        if (r == 0.0 || r > t0 * (1.0 + 1e-12)) continue;
        s += coeffs[i] / (r * r);
    }
    return s + 1.0 / (t0 * t0);
}

double bl_general_bound(const std::vector<Mode>& modes, std::span<const double> coeffs,
                        double t0, const CostFn& w, const QFunction& q, BlVariant variant) {
    check_args(modes, coeffs, t0);
    const bool modulus = (w.kind == CostFn::Kind::power && w.exponent <= 1.0) ||
                         (w.kind == CostFn::Kind::log_weighted && w.exponent <= 1.0);
    if (!modulus) fail(ErrorKind::non_modulus_cost, w.name() + " is not a continuity modulus");
    double s = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const double r = spectral::mode_norm(modes[i]);
        if (r == 0.0 || r > t0 * (1.0 + 1e-12)) continue;
        const double wv = w(1.0 / r);
        const double weight = variant == BlVariant::weighted_q ? q(r) : 1.0;
        s += weight * wv * wv * coeffs[i];
    }
    const double lead = variant == BlVariant::weighted_q ? q.a_q() * q.a_q() : std::log(t0);
    const double wt = w(1.0 / t0);
    return lead * s + wt * wt;
}

double alpha2(double n, double b, int d) {
    if (!(n >= 2.0)) fail(ErrorKind::config, "alpha2 needs n >= 2");
    if (d < 1) fail(ErrorKind::unsupported_case, "alpha2 needs d >= 1");
    if (d == 1) return b * n * n;
    if (d == 2) return b * n * std::log(n);
    return b * n;
}

double alpha_p(double n, double b, int d, double p) {
    if (!(n >= 2.0)) fail(ErrorKind::config, "alpha_p needs n >= 2");
    if (!(p > 0.0 && p <= 1.0) || d < 1)
        fail(ErrorKind::unsupported_case, "alpha_p needs p in (0, 1] and d >= 1");
    const double ln = std::log(n);
    if (d == 1) {
        const double sb = std::sqrt(b);
        if (p > 0.5) return sb * n * std::pow(n, p - 0.5);
        if (p == 0.5) return sb * n * ln;
        return sb * n * std::sqrt(ln);
    }
    if (d == 2) return std::sqrt(std::pow(b, p)) * n * std::sqrt(std::pow(ln, p));
    return std::sqrt(std::pow(b, p)) * n;
}

double alpha2_hu(double n, const rpcm::RpcmModel& model, double c0, int d) {
    if (!(n > 0.0) || !(c0 > 0.0)) fail(ErrorKind::config, "alpha2_hu needs n > 0 and c0 > 0");
    if (!model.integrable()) fail(ErrorKind::non_integrable_model, "alpha2_hu needs an integrable model");
    if (model.kind() == rpcm::Kind::poisson) return n;
    const double lo = std::pow(n, -1.0 / d);
    if (lo == c0) return n;
    // Composite Simpson in u = log10 r with 64 intervals per decade.
    const double ua = std::log10(std::min(lo, c0)), ub = std::log10(std::max(lo, c0));
    int intervals = std::max(2, static_cast<int>(std::ceil(64.0 * (ub - ua))));
    if (intervals % 2) ++intervals;
    const double hu = (ub - ua) / intervals;
    auto f = [&](double u) {
        const double r = std::pow(10.0, u);
        return rpcm::epsilon(model, r) * std::pow(r, d - 3) * r * std::log(10.0);
    };
    double s = f(ua) + f(ub);
    for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(ua + i * hu);
    double integral = s * hu / 3.0;
    if (lo > c0) integral = -integral;
    if (!std::isfinite(integral)) fail(ErrorKind::quadrature_failure, "alpha2_hu integral not finite");
    return n * (1.0 + integral);
}

double tail_bound(double r, double sigma_mu, double sigma_nu, int d) {
    if (!(r > 0.0) || sigma_mu < 0.0 || sigma_nu < 0.0)
        fail(ErrorKind::config, "tail bound needs r > 0 and sigma >= 0");
    return std::min(1.0, std::pow(r, -0.5 * d) * std::sqrt(sigma_mu + sigma_nu));
}

double dimension_weight(double x, int d, double gamma) {
    if (x <= 0.0) return 0.0;
    if (d >= 3) return x * x;
    const double den = 1.0 + std::pow(std::abs(std::log(x)), gamma);
    return (d == 1 ? std::sqrt(x) : x) / den;
}

double weight_moment(std::span<const double> dists, int d, double gamma) {
    if (d <= 2 && !(gamma > 1.0)) fail(ErrorKind::config, "weight moment needs gamma > 1 for d <= 2");
    if (dists.empty()) return 0.0;
    double s = 0.0;
    for (double x : dists) s += dimension_weight(x, d, gamma);
    return s / dists.size();
}

}  // namespace hm::bounds
