#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "hypermatch/error.hpp"
#include "hypermatch/process.hpp"
#include "hypermatch/rng.hpp"
#include "hypermatch/transport.hpp"

using namespace hm;
using namespace hm::transport;
using geom::pi;
using geom::two_pi;

namespace {

PointSet uniform_points(const geom::Window& w, int count, CounterRng& r) {
    PointSet p;
    p.window = w;
    for (int i = 0; i < count * w.d; ++i) p.coords.push_back(geom::wrap((uniform01(r) - 0.5) * w.side, w.side));
    return p;
}

double dist(const PointSet& a, int i, const PointSet& b, int j) {
    return std::sqrt(geom::toroidal_distance_sq(a.point(i), b.point(j), a.window.d, a.window.side));
}

// Exhaustive minimum over all permutations.
double brute_force(const PointSet& a, const PointSet& b, const CostFn& w) {
    const int n = static_cast<int>(a.size());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += w(dist(a, i, b, perm[i]));
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

bool is_partial_bijection(const MatchResult& m) {
    std::vector<int> s, t;
    for (auto [i, j] : m.pairs) {
        s.push_back(i);
        t.push_back(j);
    }
    std::sort(s.begin(), s.end());
    std::sort(t.begin(), t.end());
    return std::adjacent_find(s.begin(), s.end()) == s.end() && std::adjacent_find(t.begin(), t.end()) == t.end();
}

}  // namespace

TEST_CASE("cost functions") {
    CHECK(CostFn::power(2)(3.0) == doctest::Approx(9.0));
    CHECK(CostFn::power(0.5)(0.0) == 0.0);
    CHECK(CostFn::log_weighted(1, 2)(0.0) == 0.0);
    CHECK(CostFn::log_weighted(1, 2)(std::exp(1.0)) == doctest::Approx(std::exp(1.0) / 2));
    CHECK(CostFn::parse("power:1.5").exponent == 1.5);
    const auto lw = CostFn::parse("log-weighted:0.5:3");
    CHECK(lw.kind == CostFn::Kind::log_weighted);
    CHECK(lw.gamma == 3.0);
    CHECK_THROWS_AS(CostFn::parse("cubic"), Error);
    CHECK_THROWS_AS(CostFn::power(0), Error);
    CHECK_THROWS_AS(CostFn::log_weighted(1, 1), Error);
    // Nondecreasing for power costs and for the a = 1, γ = 2 weight; with
    // a < 1 the log-weighted form has a local maximum, so it is not checked.
    for (const auto& w : {CostFn::power(0.5), CostFn::power(2), CostFn::log_weighted(1, 2)}) {
        double prev = 0.0;
        for (double x = 1e-6; x < 1e3; x *= 1.05) {
            CHECK(w(x) >= prev - 1e-15);
            prev = w(x);
        }
    }
}

TEST_CASE("cost_of examples") {
    MatchResult m;
    CHECK(cost_of(m, CostFn::power(2)) == 0.0);
    m.pairs = {{0, 0}, {1, 1}};
    m.distances = {1.0, 1.0};
    CHECK(cost_of(m, CostFn::power(2)) == doctest::Approx(2.0));
    MatchResult e;
    e.pairs = {{0, 0}};
    e.distances = {std::exp(1.0)};
    CHECK(cost_of(e, CostFn::log_weighted(1, 2)) == doctest::Approx(std::exp(1.0) / 2));
}

TEST_CASE("assignment on non-metric and negative matrices") {
    // Brute force on random 6x6 matrices with arbitrary signs.
    CounterRng r(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 6;
        std::vector<double> c(n * n);
        for (auto& v : c) v = uniform01(r) * 10 - 5;
        const auto perm = solve_assignment(c, n);
        double got = 0.0;
        for (int i = 0; i < n; ++i) got += c[i * n + perm[i]];
        std::vector<int> p(n);
        std::iota(p.begin(), p.end(), 0);
        double best = INFINITY;
        do {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += c[i * n + p[i]];
            best = std::min(best, s);
        } while (std::next_permutation(p.begin(), p.end()));
        CHECK(got == doctest::Approx(best).epsilon(1e-12));
    }
    CHECK_THROWS_AS(solve_assignment({1, 2, 3}, 2), Error);
}

TEST_CASE("exact matching equals brute force") {
    CounterRng r(2024);
    const std::vector<CostFn> costs = {CostFn::power(2), CostFn::power(0.5), CostFn::log_weighted(1, 2)};
    for (int d = 1; d <= 3; ++d) {
        const auto w = geom::Window::make(d, 2.0);
        for (int trial = 0; trial < 200; ++trial) {
            const int n = 2 + trial % 7;
            const auto a = uniform_points(w, n, r), b = uniform_points(w, n, r);
            for (const auto& c : costs) {
                const auto m = exact_matching(a, b, c);
                CHECK(m.perfect());
                CHECK(is_partial_bijection(m));
                const double oracle = brute_force(a, b, c);
                CHECK(std::abs(m.total_cost - oracle) <= 1e-9 * std::max(oracle, 1e-300));
                CHECK(cost_of(m, c) == doctest::Approx(m.total_cost).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("exact matching examples and errors") {
    const auto w = geom::Window::make(1, 1.0);
    PointSet a, b;
    a.window = b.window = w;
    a.coords = {0.0};
    b.coords = {pi - 0.1};
    CHECK(exact_matching(a, b, CostFn::power(2)).total_cost == doctest::Approx((pi - 0.1) * (pi - 0.1)));

    CounterRng r(8);
    const auto p = uniform_points(geom::Window::make(2, 3.0), 20, r);
    const auto self = exact_matching(p, p, CostFn::power(1));
    CHECK(self.total_cost == 0.0);
    for (auto [i, j] : self.pairs) CHECK(i == j);

    PointSet c = a;
    c.coords = {0.0, 1.0};
    CHECK_THROWS_AS(exact_matching(a, c, CostFn::power(2)), Error);
    PointSet empty;
    empty.window = w;
    CHECK_THROWS_AS(exact_matching(empty, empty, CostFn::power(2)), Error);
}

TEST_CASE("stable matching") {
    const auto w = geom::Window::make(1, 1.0);
    PointSet a, b;
    a.window = b.window = w;
    a.coords = {0.0, 1.0};
    b.coords = {0.1, 0.9};
    const auto m = stable_matching(a, b);
    REQUIRE(m.pairs.size() == 2);
    for (auto [i, j] : m.pairs) CHECK(i == j);

    CounterRng r(99);
    for (int d = 1; d <= 3; ++d) {
        const auto wd = geom::Window::make(d, 4.0);
        for (int trial = 0; trial < 30; ++trial) {
            const int n = 2 + trial;
            const auto x = uniform_points(wd, n, r), y = uniform_points(wd, n, r);
            const auto s = stable_matching(x, y);
            CHECK(s.perfect());
            CHECK(is_partial_bijection(s));
            // No blocking pair.
            for (std::size_t i = 0; i < s.pairs.size(); ++i)
                for (std::size_t j = i + 1; j < s.pairs.size(); ++j) {
                    auto [p, q] = s.pairs[i];
                    auto [u, v] = s.pairs[j];
                    const double cross = std::max(dist(x, p, y, v), dist(x, u, y, q));
                    CHECK_FALSE(cross < std::min(s.distances[i], s.distances[j]));
                }
            const auto opt = exact_matching(x, y, CostFn::power(1));
            CHECK(s.total_cost >= opt.total_cost - 1e-9);
        }
    }
    const auto p = uniform_points(geom::Window::make(2, 2.0), 15, r);
    const auto self = stable_matching(p, p);
    for (std::size_t i = 0; i < self.pairs.size(); ++i) {
        CHECK(self.pairs[i].first == self.pairs[i].second);
        CHECK(self.distances[i] == 0.0);
    }
}

TEST_CASE("dyadic matching") {
    for (int d = 1; d <= 3; ++d) {
        const auto w = geom::Window::from_side(d, d == 3 ? 8.0 : 16.0);
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto a = process::sample_poisson(w, substream(seed, 0));
            auto b = process::sample_poisson(w, substream(seed, 1));
            // Trim to equal size so the matching is perfect.
            const std::size_t n = std::min(a.size(), b.size());
            PointSet aa = a, bb = b;
            aa.coords.resize(n * d);
            bb.coords.resize(n * d);
            DyadicInfo info;
            const auto m = dyadic_matching(aa, bb, substream(seed, 2), &info);
            CHECK(m.perfect());
            CHECK(m.pairs.size() == n);
            CHECK(is_partial_bijection(m));
            CHECK(info.levels == static_cast<int>(std::lround(std::log2(w.side))));
            for (std::size_t i = 0; i < m.pairs.size(); ++i) {
                const int k = m.levels[i];
                CHECK(k >= 1);
                CHECK(k <= info.levels + 1);
                if (k <= info.levels) CHECK(m.distances[i] <= std::sqrt(double(d)) * std::ldexp(1.0, k) + 1e-9);
            }
            for (std::size_t k = 0; k < info.unmatched_after.size(); ++k)
                CHECK(info.unmatched_after[k] <= info.imbalance_bound[k]);
        }
        const auto p = process::sample_poisson(w, 77);
        const auto self = dyadic_matching(p, p, 3);
        for (std::size_t i = 0; i < self.pairs.size(); ++i) {
            CHECK(self.levels[i] == 1);
            CHECK(self.distances[i] == 0.0);
        }
    }
    const auto bad = geom::Window::make(2, 3.0);
    const auto q = process::sample_poisson(bad, 1);
    try {
        dyadic_matching(q, q, 1);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::incompatible_window);
    }
}

TEST_CASE("semidiscrete transport") {
    // One point on the circle of length 2π: ∫ x² dx / 2π over (−π, π] = π²/3.
    const auto w1 = geom::Window::make(1, 1.0);
    for (double x : {0.0, 1.3, -2.9}) {
        PointSet p;
        p.window = w1;
        p.coords = {x};
        const auto r = semidiscrete_w2(p, 64);
        const double exact = pi * pi / 3;
        CHECK(std::abs(std::sqrt(r.cost) - std::sqrt(exact)) <= r.quantization_bound);
    }

    // Points at the cell centers of the grid transport at zero cost.
    for (int d = 1; d <= 3; ++d) {
        const auto w = geom::Window::from_side(d, 6.0);
        const int g = 3;
        PointSet p;
        p.window = w;
        long cells = 1;
        for (int i = 0; i < d; ++i) cells *= g;
        std::vector<double> c(d);
        for (long k = 0; k < cells; ++k) {
            cell_center(w, g, k, c.data());
            p.push(c);
        }
        const auto r = semidiscrete_w2(p, 1);
        CHECK(r.cost <= 1e-9);
        CHECK(r.plan.cells_per_axis == g);
    }

    // Plan marginals.
    CounterRng rng(4);
    for (int d = 1; d <= 3; ++d) {
        const auto w = geom::Window::make(d, 3.0);
        const auto p = uniform_points(w, 40, rng);
        const auto r = semidiscrete_w2(p, 4);
        std::vector<double> rows(r.plan.sources, 0.0), cols(r.plan.cells, 0.0);
        double cost = 0.0;
        for (const auto& e : r.plan.entries) {
            CHECK(e.mass >= 0.0);
            rows[e.source] += e.mass;
            cols[e.cell] += e.mass;
            std::vector<double> c(d);
            cell_center(w, r.plan.cells_per_axis, e.cell, c.data());
            cost += e.mass * geom::toroidal_distance_sq(p.point(e.source), c.data(), d, w.side);
        }
        for (double v : rows) CHECK(v == doctest::Approx(r.plan.source_mass).epsilon(1e-9));
        for (double v : cols) CHECK(v == doctest::Approx(r.plan.cell_mass).epsilon(1e-9));
        CHECK(r.plan.source_mass == doctest::Approx(w.n / 40));
        CHECK(cost == doctest::Approx(r.cost).epsilon(1e-9));
    }

    // An empty sample transports n·δ_0.
    PointSet empty;
    empty.window = geom::Window::make(2, 1.0);
    const auto e = semidiscrete_w2(empty, 4);
    CHECK(e.cost > 0.0);
    CHECK_THROWS_AS(semidiscrete_w2(empty, 0), Error);
}

TEST_CASE("semidiscrete costs satisfy the triangle inequality through the grid") {
    CounterRng r(31);
    for (int d = 1; d <= 3; ++d) {
        const auto w = geom::Window::make(d, 4.0);
        for (int trial = 0; trial < 5; ++trial) {
            const int n = 30;
            const auto a = uniform_points(w, n, r), b = uniform_points(w, n, r);
            const auto m = exact_matching(a, b, CostFn::power(2));
            const double ab = std::sqrt(w.n / n * m.total_cost);
            const auto ra = semidiscrete_w2(a, 4), rb = semidiscrete_w2(b, 4);
            const double h = w.side / ra.plan.cells_per_axis;
            const double slack = 2 * h * std::sqrt(double(d)) * std::sqrt(w.n);
            CHECK(ab <= std::sqrt(ra.cost) + std::sqrt(rb.cost) + slack);
        }
    }
}

TEST_CASE("sinkhorn agrees with the exact semidiscrete cost") {
    const auto w = geom::Window::from_count(2, 256.0);
    const auto p = process::sample_poisson(w, 12);
    const auto exact = semidiscrete_w2(p, 4);
    const double spacing = mean_nn_spacing(p);
    SinkhornInfo info;
    const double approx = sinkhorn_w2(p, 4, 0.05 * spacing * spacing, 20000, &info);
    CHECK(approx >= 0.0);
    CHECK(std::abs(approx - exact.cost) <= 0.05 * exact.cost);
    CHECK(info.marginal_error < 1e-6);
    CHECK_THROWS_AS(sinkhorn_w2(p, 4, 0.0, 10), Error);
}

TEST_CASE("rescaling identity") {
    CounterRng r(64);
    for (int d = 1; d <= 3; ++d) {
        const double n = 7.5;
        const auto w = geom::Window::make(d, n);
        const auto a = uniform_points(w, 12, r), b = uniform_points(w, 12, r);
        const auto big = exact_matching(a, b, CostFn::power(2));
        const auto small = exact_matching(geom::rescale_to_unit(a), geom::rescale_to_unit(b), CostFn::power(2));
        CHECK(small.total_cost * std::pow(n, 2.0 / d) == doctest::Approx(big.total_cost).epsilon(1e-9));
    }
}

TEST_CASE("match csv") {
    MatchResult m;
    m.pairs = {{0, 1}, {1, 0}};
    m.distances = {0.5, 0.25};
    m.levels = {2, 3};
    std::ostringstream os;
    write_match_csv(os, m);
    CHECK(os.str() == "# hypermatch-schema v1\nsrc_idx,tgt_idx,distance,level\n0,1,0.5,2\n1,0,0.25,3\n");
}
