#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "hypermatch/error.hpp"
#include "hypermatch/process.hpp"
#include "hypermatch/rng.hpp"
#include "hypermatch/spectral.hpp"

using namespace hm;
using namespace hm::process;
using geom::Window;

namespace {

bool canonical(const geom::PointSet& p) {
    const double half = 0.5 * p.window.side;
    for (double c : p.coords)
        if (!(c > -half && c <= half)) return false;
    return true;
}

bool simple(const geom::PointSet& p) {
    std::vector<std::vector<double>> pts;
    for (std::size_t i = 0; i < p.size(); ++i) pts.emplace_back(p.point(i), p.point(i) + p.window.d);
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double gap = 0;
        for (int k = 0; k < p.window.d; ++k) gap = std::max(gap, std::abs(pts[i][k] - pts[i - 1][k]));
        if (gap <= 1e-12 * p.window.side) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("counter rng substreams are deterministic and distinct") {
    CounterRng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        auto x = a();
        CHECK(x == b());
        CHECK(x != c());
    }
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(substream(7, i));
    CHECK(seen.size() == 10000);
    CounterRng u(9);
    double s = 0;
    for (int i = 0; i < 100000; ++i) s += uniform01(u);
    CHECK(std::abs(s / 100000 - 0.5) < 3 * std::sqrt(1.0 / 12 / 100000));
}

TEST_CASE("process kind parsing") {
    CHECK(ProcessSpec::parse("poisson").kind == Kind::poisson);
    CHECK(ProcessSpec::parse("cloaked-lattice").kind == Kind::cloaked_lattice);
    auto g = ProcessSpec::parse("gaussian-lattice:0.25");
    CHECK(g.kind == Kind::gaussian_lattice);
    CHECK(g.sigma == 0.25);
    CHECK(ProcessSpec::parse(g.name()).sigma == 0.25);
    CHECK_THROWS_AS(ProcessSpec::parse("gaussian-lattice"), Error);
    CHECK_THROWS_AS(ProcessSpec::parse("gaussian-lattice:-1"), Error);
    CHECK_THROWS_AS(ProcessSpec::parse("strauss"), Error);
}

TEST_CASE("poisson count mean and variance") {
    const Window w = Window::make(2, 16.0);
    const int reps = 10000;
    std::vector<double> counts;
    for (int r = 0; r < reps; ++r) counts.push_back(double(sample_poisson(w, substream(1, r)).size()));
    auto m = spectral::mean_se(counts);
    auto v = spectral::variance_se(counts);
    CHECK(std::abs(m.mean - w.volume()) <= 3 * m.se);
    CHECK(std::abs(v.mean - w.volume()) <= 3 * v.se);
    CHECK(w.volume() == doctest::Approx(631.65).epsilon(1e-4));
}

TEST_CASE("samplers are deterministic, canonical and simple") {
    const std::vector<std::pair<ProcessSpec, Window>> cases = {
        {ProcessSpec::poisson(), Window::make(2, 3.0)},
        {ProcessSpec::shifted_lattice(), Window::from_side(2, 6)},
        {ProcessSpec::cloaked_lattice(), Window::from_side(3, 4)},
        {ProcessSpec::gaussian_lattice(0.3), Window::from_side(2, 5)},
        {ProcessSpec::ginibre(), Window::make(2, 1.0)},
    };
    for (const auto& [spec, w] : cases) {
        CAPTURE(spec.name());
        int differing = 0;
        for (int s = 0; s < 100; ++s) {
            auto a = sample(spec, w, substream(5, s));
            auto b = sample(spec, w, substream(5, s));
            auto c = sample(spec, w, substream(6, s));
            CHECK(a.coords == b.coords);
            differing += a.coords != c.coords ? 1 : 0;
            if (s < 5) {
                CHECK(canonical(a));
                CHECK(simple(a));
            }
        }
        CHECK(differing == 100);
    }
}

TEST_CASE("lattice samplers need integer sides and have deterministic counts") {
    CHECK(sample_shifted_lattice(Window::from_side(1, 1.0), 3).size() == 1);
    CHECK(sample_shifted_lattice(Window::make(1, 1.0 / geom::two_pi), 3).size() == 1);
    for (int s = 0; s < 20; ++s) {
        CHECK(sample_shifted_lattice(Window::from_side(2, 8), s).size() == 64);
        CHECK(sample_cloaked_lattice(Window::from_side(2, 8), s).size() == 64);
        CHECK(sample_gaussian_lattice(Window::from_side(3, 3), 0.5, s).size() == 27);
    }
    CHECK_THROWS_AS(sample_shifted_lattice(Window::make(2, 1.0), 1), Error);
    CHECK_THROWS_AS(sample_cloaked_lattice(Window::make(2, 1.0), 1), Error);
    CHECK_THROWS_AS(sample_gaussian_lattice(Window::make(2, 1.0), 0.1, 1), Error);
}

TEST_CASE("cloaked lattice displacement from its shifted-lattice partner is at most sqrt(d)") {
    for (int d = 1; d <= 3; ++d) {
        const Window w = Window::from_side(d, 6);
        for (int s = 0; s < 50; ++s) {
            auto lat = sample_shifted_lattice(w, s);
            auto clo = sample_cloaked_lattice(w, s);
            REQUIRE(lat.size() == clo.size());
            for (std::size_t i = 0; i < lat.size(); ++i) {
                double dist2 = geom::toroidal_distance_sq(lat.point(i), clo.point(i), d, w.side);
                CHECK(std::sqrt(dist2) <= std::sqrt(double(d)) + 1e-12);
            }
        }
    }
}

TEST_CASE("gaussian lattice with zero sigma is the shifted lattice") {
    const Window w = Window::from_side(2, 5);
    auto a = sample_gaussian_lattice(w, 0.0, 17);
    auto b = sample_shifted_lattice(w, 17);
    CHECK(a.coords == b.coords);
}

TEST_CASE("gaussian lattice mean displacement matches the gaussian norm moment") {
    // E|G| for a standard 2-d Gaussian is sqrt(pi/2).
    const double sigma = 0.1;
    const Window w = Window::from_side(2, 10);
    std::vector<double> disp;
    for (int s = 0; s < 40; ++s) {
        auto lat = sample_shifted_lattice(w, s);
        auto gl = sample_gaussian_lattice(w, sigma, s);
        for (std::size_t i = 0; i < lat.size(); ++i)
            disp.push_back(std::sqrt(geom::toroidal_distance_sq(lat.point(i), gl.point(i), 2, w.side)));
    }
    auto m = spectral::mean_se(disp);
    CHECK(std::abs(m.mean - sigma * std::sqrt(geom::pi / 2)) <= 3 * m.se);
}

TEST_CASE("intensity calibration") {
    struct Case {
        ProcessSpec spec;
        Window w;
        double tol;
    };
    const std::vector<Case> cases = {
        {ProcessSpec::poisson(), Window::make(2, 8.0), 0.05},
        {ProcessSpec::poisson(), Window::make(3, 1.5), 0.05},
        {ProcessSpec::cloaked_lattice(), Window::from_side(2, 17), 0.05},
        {ProcessSpec::gaussian_lattice(0.4), Window::from_side(1, 300), 0.05},
        {ProcessSpec::ginibre(), Window::make(2, 8.0), 0.07},
    };
    for (const auto& c : cases) {
        CAPTURE(c.spec.name());
        REQUIRE(c.w.volume() >= 256);
        double total = 0;
        const int reps = 20;
        for (int r = 0; r < reps; ++r) total += double(sample(c.spec, c.w, substream(3, r)).size());
        const double ratio = total / reps / c.w.volume();
        CHECK(ratio >= 1 - c.tol);
        CHECK(ratio <= 1 + c.tol);
    }
}

TEST_CASE("ginibre mean count at n = 4") {
    const Window w = Window::make(2, 4.0);
    double total = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) total += double(sample_ginibre(w, substream(12, r)).size());
    CHECK(std::abs(total / reps / 157.91367 - 1) < 0.05);
    CHECK_THROWS_AS(sample_ginibre(Window::make(3, 1.0), 1), Error);
}

TEST_CASE("ginibre matrix covers the window with margin") {
    for (double n : {1.0, 4.0, 25.0}) {
        const Window w = Window::make(2, n);
        const double radius = std::sqrt(ginibre_matrix_size(w) / geom::pi);
        CHECK(radius >= 1.2 * w.side * std::sqrt(2.0) / 2 - 1e-9);
    }
}

TEST_CASE("point set text round trip") {
    for (const auto& spec : {ProcessSpec::poisson(), ProcessSpec::cloaked_lattice()}) {
        const Window w = Window::from_side(2, 7);
        auto p = sample(spec, w, 99);
        std::stringstream ss;
        write_point_set(ss, p);
        std::string header;
        std::getline(std::stringstream(ss.str()), header);
        CHECK(header.rfind("2 ", 0) == 0);
        auto q = read_point_set(ss);
        CHECK(q.coords == p.coords);
        CHECK(q.process == p.process);
        CHECK(q.seed == p.seed);
        CHECK(q.window.side == p.window.side);
    }
    std::stringstream bad("2 1.0 poisson 1 3\n0 0\n");
    CHECK_THROWS_AS(read_point_set(bad), Error);
}
