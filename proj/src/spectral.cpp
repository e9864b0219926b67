#include "hypermatch/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "hypermatch/error.hpp"
#include "hypermatch/rng.hpp"

namespace hm::spectral {

namespace {

void check_mode(const PointSet& p, std::span<const int> m) {
    if (m.size() != static_cast<std::size_t>(p.window.d))
        fail(ErrorKind::dimension, "mode dimension does not match window");
    if (std::all_of(m.begin(), m.end(), [](int v) { return v == 0; }))
        fail(ErrorKind::zero_wavevector, "m = 0 is excluded");
}

// |Σ_x e^{−i k·x}|² for a point array with d coordinates per point.
double power_sum(const double* x, std::size_t count, int d, const double* k) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        double phase = 0.0;
        for (int j = 0; j < d; ++j) phase += k[j] * x[i * d + j];
        re += std::cos(phase);
        im -= std::sin(phase);
    }
    return re * re + im * im;
}

}  // namespace

double scattering_intensity(const PointSet& p, std::span<const int> m) {
    check_mode(p, m);
    const std::size_t count = p.size();
    if (count == 0) return 0.0;
    double k[geom::max_dim];
    for (int j = 0; j < p.window.d; ++j) k[j] = geom::two_pi * m[j] / p.window.side;
    return power_sum(p.coords.data(), count, p.window.d, k) / static_cast<double>(count);
}

double fourier_coeff_sq(const PointSet& p, std::span<const int> m) {
    check_mode(p, m);
    const std::size_t count = p.size();
    if (count == 0) return 1.0;
    const PointSet unit = geom::rescale_to_unit(p);
    double k[geom::max_dim];
    for (int j = 0; j < p.window.d; ++j) k[j] = m[j];
    const double c = static_cast<double>(count);
    return power_sum(unit.coords.data(), count, p.window.d, k) / (c * c);
}

double mode_norm(const Mode& m) {
    double s = 0.0;
    for (int v : m) s += static_cast<double>(v) * v;
    return std::sqrt(s);
}

std::vector<Mode> mode_grid(int d, double t0) {
    if (d < 1 || d > geom::max_dim) fail(ErrorKind::unsupported_dimension, "d must be in 1..4");
    const int r = static_cast<int>(std::floor(t0));
    const long side = 2L * r + 1;
    long total = 1;
    for (int i = 0; i < d; ++i) total *= side;
    std::vector<Mode> out;
    const double t2 = t0 * t0 * (1.0 + 1e-12);
    for (long idx = 0; idx < total; ++idx) {
        Mode m(d);
        long rest = idx;
        long n2 = 0;
        for (int i = 0; i < d; ++i) {
            m[i] = static_cast<int>(rest % side) - r;
            rest /= side;
            n2 += static_cast<long>(m[i]) * m[i];
        }
        if (n2 == 0 || static_cast<double>(n2) > t2) continue;
        out.push_back(std::move(m));
    }
    std::sort(out.begin(), out.end(), [](const Mode& a, const Mode& b) {
        long na = 0, nb = 0;
        for (int v : a) na += static_cast<long>(v) * v;
        for (int v : b) nb += static_cast<long>(v) * v;
        return na != nb ? na < nb : a < b;
    });
    return out;
}

std::vector<double> fourier_coefficients(const PointSet& p, const std::vector<Mode>& modes) {
    std::vector<double> out;
    out.reserve(modes.size());
    for (const Mode& m : modes) out.push_back(fourier_coeff_sq(p, m));
    return out;
}

MeanSe mean_se(std::span<const double> v) {
    MeanSe r;
    const std::size_t n = v.size();
    if (n == 0) return r;
    double s = 0.0;
    for (double x : v) s += x;
    r.mean = s / n;
    if (n < 2) return r;
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.var = ss / (n - 1);
    r.se = std::sqrt(r.var / n);
    return r;
}

MeanSe variance_se(std::span<const double> v) {
    MeanSe r;
    const double n = static_cast<double>(v.size());
    if (v.size() < 4) fail(ErrorKind::config, "variance estimate needs at least 4 samples");
    MeanSe base = mean_se(v);
    double m4 = 0.0;
    for (double x : v) {
        const double c = x - base.mean;
        m4 += c * c * c * c;
    }
    m4 /= n;
    const double s2 = base.var;
    const double var_s2 = m4 / n - s2 * s2 * (n - 3.0) / (n * (n - 1.0));
    r.mean = s2;
    r.var = std::max(0.0, var_s2);
    r.se = std::sqrt(r.var);
    return r;
}

SpectrumEstimate estimate_structure_factor(const process::ProcessSpec& spec, const Window& w,
                                           double t0, int replicas, std::uint64_t seed,
                                           std::size_t max_modes, double c0) {
    if (replicas < 2) fail(ErrorKind::config, "structure-factor estimate needs >= 2 replicas");
    if (!(t0 > 0.0) || t0 > c0 * w.scale() * (1.0 + 1e-12))
        fail(ErrorKind::config, "t0 must lie in (0, c0 n^{1/d}]");
    SpectrumEstimate est;
    est.d = w.d;
    est.n = w.n;
    est.t0 = t0;
    est.modes = mode_grid(w.d, t0);
    if (max_modes > 0 && est.modes.size() > max_modes) est.modes.resize(max_modes);
    if (est.modes.empty()) fail(ErrorKind::config, "no modes with 0 < |m| <= t0");
    const std::size_t km = est.modes.size();
    for (const Mode& m : est.modes) est.k_norm.push_back(mode_norm(m) / w.scale());

    std::vector<std::vector<double>> values(km, std::vector<double>(replicas));
    std::vector<double> counts(replicas);
    const double vol = w.volume();
    for (int r = 0; r < replicas; ++r) {
        const PointSet p = process::sample(spec, w, substream(seed, r));
        const double n_pts = static_cast<double>(p.size());
        counts[r] = n_pts;
        for (std::size_t j = 0; j < km; ++j) {
            const double s = scattering_intensity(p, est.modes[j]);
            values[j][r] = n_pts > 0 ? vol / n_pts * s : 0.0;
            const double f = fourier_coeff_sq(p, est.modes[j]);
            if (n_pts > 0) {
                const double e = std::abs(f * n_pts - s) / std::max(1.0, s);
                est.identity_max_error = std::max(est.identity_max_error, e);
            }
        }
    }
    for (std::size_t j = 0; j < km; ++j) {
        MeanSe ms = mean_se(values[j]);
        est.mean.push_back(ms.mean);
        est.stderr_.push_back(ms.se);
    }
    MeanSe cs = mean_se(counts);
    est.count_mean = cs.mean;
    est.count_var = cs.var;
    est.replicas = replicas;
    return est;
}

long window_count(const process::ProcessSpec& spec, const Window& w, std::uint64_t seed) {
    if (!spec.lattice_based()) return static_cast<long>(process::sample(spec, w, seed).size());
    double margin = 2.0;
    if (spec.kind == process::Kind::gaussian_lattice) margin = 1.0 + 10.0 * spec.sigma;
    const double big_side = std::ceil(w.side) + 2.0 * std::ceil(margin);
    const Window big = Window::from_side(w.d, big_side);
    const PointSet p = process::sample(spec, big, seed);
    const double half = 0.5 * w.side;
    long count = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double* x = p.point(i);
        bool inside = true;
        for (int k = 0; k < w.d; ++k) inside = inside && x[k] > -half && x[k] <= half;
        count += inside ? 1 : 0;
    }
    return count;
}

VarianceCurve variance_curve(const process::ProcessSpec& spec, int d,
                             const std::vector<double>& n_grid, int replicas,
                             std::uint64_t seed) {
    if (replicas < 100) fail(ErrorKind::config, "variance curve needs >= 100 replicas");
    VarianceCurve vc;
    vc.d = d;
    vc.replicas = replicas;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        const Window w = Window::make(d, n_grid[i]);
        std::vector<double> counts(replicas);
        const std::uint64_t base = substream(seed, i);
        for (int r = 0; r < replicas; ++r)
            counts[r] = static_cast<double>(window_count(spec, w, substream(base, r)));
        const MeanSe m = mean_se(counts);
        const MeanSe v = variance_se(counts);
        const double vol = w.volume();
        vc.n.push_back(n_grid[i]);
        vc.count_mean.push_back(m.mean);
        vc.var.push_back(v.mean);
        vc.var_se.push_back(v.se);
        vc.sigma.push_back(v.mean / vol);
        vc.sigma_se.push_back(v.se / vol);
    }
    return vc;
}

double EmpiricalCdf::operator()(double r) const {
    if (sorted.empty()) return 0.0;
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), r);
    return static_cast<double>(it - sorted.begin()) / sorted.size();
}

double EmpiricalCdf::survival(double r) const {
    if (sorted.empty()) return 0.0;
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), r);
    return static_cast<double>(sorted.end() - it) / sorted.size();
}

double EmpiricalCdf::quantile(double p) const {
    if (sorted.empty()) fail(ErrorKind::empty_input, "quantile of an empty sample");
    const double pos = std::clamp(p, 0.0, 1.0) * (sorted.size() - 1);
    const std::size_t i = static_cast<std::size_t>(std::floor(pos));
    const double t = pos - i;
    if (i + 1 >= sorted.size()) return sorted.back();
    return sorted[i] + t * (sorted[i + 1] - sorted[i]);
}

EmpiricalCdf make_cdf(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return EmpiricalCdf{std::move(values)};
}

EmpiricalCdf distance_cdf(const transport::MatchResult& match, const PointSet& source,
                          double core_fraction, int skip_level) {
    if (match.pairs.empty()) fail(ErrorKind::empty_input, "matching has no pairs");
    if (!(core_fraction > 0.0 && core_fraction <= 1.0))
        fail(ErrorKind::config, "core fraction must lie in (0, 1]");
    const int d = source.window.d;
    const double half = 0.5 * source.window.side * std::pow(core_fraction, 1.0 / d);
    std::vector<double> out;
    for (std::size_t i = 0; i < match.pairs.size(); ++i) {
        if (skip_level > 0 && i < match.levels.size() && match.levels[i] >= skip_level) continue;
        const double* x = source.point(static_cast<std::size_t>(match.pairs[i].first));
        bool core = true;
        for (int k = 0; k < d; ++k) core = core && std::abs(x[k]) <= half * (1.0 + 1e-12);
        if (core) out.push_back(match.distances[i]);
    }
    if (out.empty()) fail(ErrorKind::empty_core, "no matched source points in the core window");
    return make_cdf(std::move(out));
}

}  // namespace hm::spectral
