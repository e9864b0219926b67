#include "hypermatch/process.hpp"

#include <cmath>
#include <random>

#include "hypermatch/error.hpp"
#include "hypermatch/rng.hpp"

namespace hm::process {

ProcessSpec ProcessSpec::gaussian_lattice(double sigma) {
    if (!(sigma >= 0.0)) fail(ErrorKind::config, "gaussian-lattice needs sigma >= 0");
    return {Kind::gaussian_lattice, sigma};
}

ProcessSpec ProcessSpec::parse(const std::string& text) {
    if (text == "poisson") return poisson();
    if (text == "shifted-lattice" || text == "lattice") return shifted_lattice();
    if (text == "cloaked-lattice") return cloaked_lattice();
    if (text == "ginibre" || text == "ginibre-unit") return ginibre();
    const std::string prefix = "gaussian-lattice";
    if (text.rfind(prefix, 0) == 0) {
        std::string rest = text.substr(prefix.size());
        if (rest.size() < 2 || rest[0] != ':')
            fail(ErrorKind::config, "gaussian-lattice needs a sigma, e.g. gaussian-lattice:0.2");
        double sigma = 0.0;
        try {
            sigma = std::stod(rest.substr(1));
        } catch (const std::exception&) {
            fail(ErrorKind::config, "bad sigma in '" + text + "'");
        }
        if (!(sigma > 0.0)) fail(ErrorKind::config, "gaussian-lattice sigma must be > 0");
        return gaussian_lattice(sigma);
    }
    fail(ErrorKind::config, "unknown process '" + text + "'");
}

std::string ProcessSpec::name() const {
    switch (kind) {
    case Kind::poisson: return "poisson";
    case Kind::shifted_lattice: return "shifted-lattice";
    case Kind::cloaked_lattice: return "cloaked-lattice";
    case Kind::ginibre: return "ginibre";
    case Kind::gaussian_lattice: {
        char buf[64];
        std::snprintf(buf, sizeof buf, "gaussian-lattice:%.17g", sigma);
        return buf;
    }
    }
    return "unknown";
}

bool ProcessSpec::lattice_based() const {
    return kind == Kind::shifted_lattice || kind == Kind::cloaked_lattice ||
           kind == Kind::gaussian_lattice;
}

PointSet sample_poisson(const Window& w, std::uint64_t seed) {
    CounterRng rng(seed);
    std::poisson_distribution<long> count_dist(w.volume());
    const long count = count_dist(rng);
    PointSet p{w, {}, "poisson", seed};
    p.coords.resize(static_cast<std::size_t>(count) * w.d);
    const double half = 0.5 * w.side;
    for (double& c : p.coords) {
        // (−half, half]: reflect the half-open unit interval.
        c = half - w.side * uniform01(rng);
    }
    return p;
}

namespace {

enum class Perturbation { none, uniform, gaussian };

PointSet lattice_sample(const Window& w, std::uint64_t seed, Perturbation kind, double sigma,
                        const char* tag) {
    if (!w.side_is_integer())
        fail(ErrorKind::incompatible_window, "lattice processes need an integer window side");
    const long L = std::lround(w.side);
    const int d = w.d;
    CounterRng rng(seed);
    double shift[geom::max_dim];
    for (int i = 0; i < d; ++i) shift[i] = uniform01(rng);
    std::normal_distribution<double> gauss(0.0, 1.0);

    long cells = 1;
    for (int i = 0; i < d; ++i) cells *= L;
    PointSet p{w, {}, tag, seed};
    p.coords.resize(static_cast<std::size_t>(cells) * d);
    const long offset = L / 2;
    for (long idx = 0; idx < cells; ++idx) {
        long rest = idx;
        double* x = p.point(static_cast<std::size_t>(idx));
        for (int i = 0; i < d; ++i) {
            const long j = rest % L;
            rest /= L;
            double v = static_cast<double>(j - offset) + shift[i];
            if (kind == Perturbation::uniform) v += uniform01(rng);
            if (kind == Perturbation::gaussian) v += sigma * gauss(rng);
            x[i] = geom::wrap(v, w.side);
        }
    }
    return p;
}

}  // namespace

PointSet sample_shifted_lattice(const Window& w, std::uint64_t seed) {
    return lattice_sample(w, seed, Perturbation::none, 0.0, "shifted-lattice");
}

PointSet sample_cloaked_lattice(const Window& w, std::uint64_t seed) {
    return lattice_sample(w, seed, Perturbation::uniform, 0.0, "cloaked-lattice");
}

PointSet sample_gaussian_lattice(const Window& w, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) fail(ErrorKind::config, "gaussian-lattice needs sigma >= 0");
    PointSet p = lattice_sample(w, seed, Perturbation::gaussian, sigma, "gaussian-lattice");
    p.process = ProcessSpec::gaussian_lattice(sigma).name();
    return p;
}

PointSet sample(const ProcessSpec& spec, const Window& w, std::uint64_t seed) {
    switch (spec.kind) {
    case Kind::poisson: return sample_poisson(w, seed);
    case Kind::shifted_lattice: return sample_shifted_lattice(w, seed);
    case Kind::cloaked_lattice: return sample_cloaked_lattice(w, seed);
    case Kind::gaussian_lattice: return sample_gaussian_lattice(w, spec.sigma, seed);
    case Kind::ginibre: return sample_ginibre(w, seed);
    }
    fail(ErrorKind::config, "unknown process kind");
}

}  // namespace hm::process
