#include <doctest.h>

#include <cmath>
#include <vector>

#include "hypermatch/bounds.hpp"
#include "hypermatch/error.hpp"
#include "hypermatch/rpcm.hpp"
#include "hypermatch/spectral.hpp"

using namespace hm;
using namespace hm::bounds;
using geom::pi;

// Reference values below come from tests/oracles/rpcm_oracles.py.

TEST_CASE("q functions") {
    CHECK(QFunction::log_loglog(2).a_q() == doctest::Approx(167.27191079775627).epsilon(1e-6));
    CHECK(QFunction::log_loglog(3).a_q() == doctest::Approx(1739.3048792082924).epsilon(1e-6));
    const auto q = QFunction::log_loglog(2);
    double prev = -INFINITY;
    for (double x = 1.0; x < 1e6; x *= 1.3) {
        CHECK(q(x) >= prev);
        prev = q(x);
    }
    // Constant on dyadics: ⌊log₂ t0⌋ + 1 equal terms, so A_q = 1.
    for (double t0 : {1.0, 5.0, 64.0, 100.0}) CHECK(QFunction::constant_on_dyadics(t0).a_q() == doctest::Approx(1.0));
    CHECK(QFunction::constant_on_dyadics(100.0)(3.0) == 7.0);
    CHECK_THROWS_AS(QFunction::log_loglog(1.0), Error);
    CHECK_THROWS_AS(QFunction::constant_on_dyadics(0.5), Error);
}

TEST_CASE("w2 bound") {
    for (int d = 1; d <= 3; ++d) {
        const auto modes = spectral::mode_grid(d, 5.0);
        const std::vector<double> zero(modes.size(), 0.0);
        CHECK(bl_w2_bound(modes, zero, 5.0) == doctest::Approx(1.0 / 25));
    }
    for (double t0 : {10.0, 100.0}) {
        const auto modes = spectral::mode_grid(2, t0);
        const std::vector<double> ones(modes.size(), 1.0), poisson(modes.size(), 1.0 / 50);
        const double lattice = t0 == 10.0 ? 17.079015524761836 : 31.520223641130038;
        CHECK(bl_w2_bound(modes, ones, t0) == doctest::Approx(lattice + 1 / (t0 * t0)).epsilon(1e-12));
        CHECK(bl_w2_bound(modes, poisson, t0) == doctest::Approx(lattice / 50 + 1 / (t0 * t0)).epsilon(1e-12));
        // 2π ln t0 + O(1)
        CHECK(std::abs(lattice - 2 * pi * std::log(t0)) < 5.0);
    }
    const auto modes = spectral::mode_grid(2, 3.0);
    CHECK_THROWS_AS(bl_w2_bound(modes, std::vector<double>(modes.size() - 1), 3.0), Error);
    CHECK_THROWS_AS(bl_w2_bound(modes, std::vector<double>(modes.size()), 0.5), Error);
}

TEST_CASE("general bound") {
    const auto q = QFunction::log_loglog(2);
    const auto modes = spectral::mode_grid(2, 8.0);
    const std::vector<double> zero(modes.size(), 0.0);
    for (const auto& w : {CostFn::power(1), CostFn::power(0.5), CostFn::log_weighted(1, 2)}) {
        CHECK(bl_general_bound(modes, zero, 8.0, w, q, BlVariant::weighted_q) == doctest::Approx(w(1.0 / 8) * w(1.0 / 8)));
        CHECK(bl_general_bound(modes, zero, 8.0, w, q, BlVariant::log_t0) == doctest::Approx(w(1.0 / 8) * w(1.0 / 8)));
    }
    try {
        bl_general_bound(modes, zero, 8.0, CostFn::power(2), q, BlVariant::log_t0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::non_modulus_cost);
    }

    // Variants agree up to a bounded factor when q is constant on dyadics.
    for (double t0 = 2.0; t0 <= 200.0; t0 *= 1.37) {
        const auto m = spectral::mode_grid(2, t0);
        const std::vector<double> c(m.size(), 0.01);
        const auto qd = QFunction::constant_on_dyadics(t0);
        const double a = bl_general_bound(m, c, t0, CostFn::power(1), qd, BlVariant::weighted_q);
        const double b = bl_general_bound(m, c, t0, CostFn::power(1), qd, BlVariant::log_t0);
        CHECK(a / b > 0.5);
        CHECK(a / b < 3.0);
    }

    // d = 1, |f|² = 1/N, t0 = N: ln N · 2 Σ_{m ≤ N} m^{−2} / N + N^{−2}.
    for (int N : {10, 100, 1000}) {
        const auto m = spectral::mode_grid(1, N);
        const std::vector<double> c(m.size(), 1.0 / N);
        double h2 = 0.0;
        for (int k = 1; k <= N; ++k) h2 += 1.0 / (double(k) * k);
        const double oracle = std::log(double(N)) * 2 * h2 / N + 1.0 / (double(N) * N);
        CHECK(bl_general_bound(m, c, N, CostFn::power(1), q, BlVariant::log_t0) == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("rate functions") {
    const double e = std::exp(1.0);
    CHECK(alpha2(e * e, 1.0, 2) == doctest::Approx(2 * e * e));
    CHECK(alpha2(10.0, 2.0, 3) == doctest::Approx(20.0));
    CHECK(alpha2(10.0, 1.0, 1) == doctest::Approx(100.0));
    CHECK(alpha_p(e, 1.0, 1, 0.5) == doctest::Approx(e));
    CHECK(alpha_p(16.0, 4.0, 1, 1.0) == doctest::Approx(2 * 16 * 4));
    CHECK(alpha_p(16.0, 1.0, 1, 0.25) == doctest::Approx(16 * std::sqrt(std::log(16.0))));
    CHECK(alpha_p(16.0, 4.0, 3, 0.5) == doctest::Approx(std::sqrt(2.0) * 16));
    CHECK_THROWS_AS(alpha2(1.5, 1.0, 2), Error);
    CHECK_THROWS_AS(alpha_p(4.0, 1.0, 2, 1.5), Error);
    // Monotone in n for fixed (d, p, b).
    for (int d = 1; d <= 3; ++d)
        for (double p : {0.25, 0.5, 0.75, 1.0}) {
            double prev = 0.0;
            for (double n = 2.0; n < 1e6; n *= 1.5) {
                const double v = alpha_p(n, 1.5, d, p);
                CHECK(v > prev);
                prev = v;
            }
        }
}

TEST_CASE("hyperuniform rate") {
    CHECK(alpha2_hu(100.0, rpcm::RpcmModel::poisson(2), 1.0, 2) == 100.0);
    const auto g = rpcm::RpcmModel::ginibre_unit();
    const double frozen[] = {91.958957398863074, 375.8358295954523, 1519.3433183818092, 6109.3732735272367,
                             24501.493094108947};
    int i = 0;
    for (double n : {64.0, 256.0, 1024.0, 4096.0, 16384.0}) {
        const double v = alpha2_hu(n, g, 1.0, 2);
        CHECK(v == doctest::Approx(frozen[i++]).epsilon(1e-6));
        // Bounded ratio: 1 + ∫_0^1 ε(r)/r dr is finite.
        CHECK(v / n < 1.6);
        CHECK(v / alpha2(n, rpcm::b_n(g, n), 2) < 1.0 / std::log(n));
    }
    // The ratio to the generic planar rate keeps falling.
    double prev = INFINITY;
    for (double n = 64.0; n <= 16384.0; n *= 4) {
        const double r = alpha2_hu(n, g, 1.0, 2) / alpha2(n, rpcm::b_n(g, n), 2);
        CHECK(r < prev);
        prev = r;
    }

    // d = 1 with ε(r) ~ r near 0: the integral grows like ln n.
    const double rr[] = {0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
    const double ff[] = {1.0, 0.8, 0.5, 0.3, 0.15, 0.05, 0.0};
    const auto t = rpcm::RpcmModel::table(1, {rr, rr + 7}, {ff, ff + 7}, -1, true);
    const double a = alpha2_hu(1e2, t, 1.0, 1) / 1e2, b = alpha2_hu(1e4, t, 1.0, 1) / 1e4;
    const double slope = (b - a) / std::log(100.0);
    CHECK(slope == doctest::Approx(rpcm::abs_first_moment(t)).epsilon(0.02));
}

TEST_CASE("tail bound") {
    CHECK(tail_bound(4.0, 1.0, 1.0, 2) == doctest::Approx(std::sqrt(2.0) / 4));
    CHECK(tail_bound(2.0, 1.0, 1.0, 1) == 1.0);
    CHECK(tail_bound(5.0, 0.0, 0.0, 2) == 0.0);
    for (double r = 0.1; r < 100; r *= 1.4)
        for (int d = 1; d <= 3; ++d) {
            const double v = tail_bound(r, 0.3, 2.0, d);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
}

TEST_CASE("weight moments") {
    const std::vector<double> zeros(5, 0.0);
    CHECK(weight_moment(zeros, 2, 2.0) == 0.0);
    const std::vector<double> d3 = {1.0, 2.0};
    CHECK(weight_moment(d3, 3, 2.0) == doctest::Approx(2.5));
    const std::vector<double> e = {std::exp(1.0)};
    CHECK(weight_moment(e, 2, 2.0) == doctest::Approx(std::exp(1.0) / 2));
    CHECK(weight_moment(e, 1, 2.0) == doctest::Approx(std::sqrt(std::exp(1.0)) / 2));
    CHECK_THROWS_AS(weight_moment(e, 2, 1.0), Error);
}
