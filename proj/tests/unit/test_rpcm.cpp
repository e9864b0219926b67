#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hypermatch/error.hpp"
#include "hypermatch/geometry.hpp"
#include "hypermatch/rpcm.hpp"

using namespace hm;
using namespace hm::rpcm;
using geom::pi;
using geom::two_pi;

// Reference values below come from tests/oracles/rpcm_oracles.py.

TEST_CASE("total mass of beta") {
    CHECK(beta_total(RpcmModel::poisson(2)) == 0.0);
    CHECK(beta_total(RpcmModel::ginibre_unit()) == doctest::Approx(-1.0).epsilon(1e-6));
    for (int d = 1; d <= 3; ++d) CHECK(beta_total(RpcmModel::cloaked_lattice(d)) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("epsilon tail function") {
    CHECK(epsilon(RpcmModel::poisson(2), 3.0) == 0.0);
    const auto g = RpcmModel::ginibre_unit();
    CHECK(epsilon(g, 1e-4) / 1e-4 == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(epsilon(g, 0.5) == doctest::Approx(0.24999986620883451).epsilon(1e-6));
    CHECK(epsilon(g, 1.0) == doctest::Approx(0.49390555890759856).epsilon(1e-6));
    CHECK(epsilon(g, 2.0) == doctest::Approx(0.78990859455606272).epsilon(1e-6));
    CHECK(epsilon(g, 1e4) == doctest::Approx(0.99999998952802459).epsilon(1e-6));
}

TEST_CASE("epsilon is nondecreasing and below its two envelopes") {
    for (const auto& m : {RpcmModel::ginibre_unit(), RpcmModel::cloaked_lattice(2), RpcmModel::cloaked_lattice(3)}) {
        CAPTURE(m.name());
        const double mass = 1.0;  // |beta|(R^d)
        const double moment = abs_first_moment(m);
        double prev = 0.0;
        for (double t = 1e-3; t < 1e3; t *= 1.7) {
            const double e = epsilon(m, t);
            CHECK(e >= prev - 1e-12);
            CHECK(e <= std::min(mass, t * moment) * (1 + 1e-6));
            prev = e;
        }
    }
}

TEST_CASE("b_n") {
    CHECK(b_n(RpcmModel::poisson(2), 5.0) == 1.0);
    CHECK(b_n(RpcmModel::ginibre_unit(), 100.0) == doctest::Approx(2.0).epsilon(1e-6));
    for (int d = 1; d <= 3; ++d)
        for (double n : {1.0, 3.0, 50.0}) CHECK(b_n(RpcmModel::cloaked_lattice(d), n) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("structure factors") {
    double zero[2] = {0, 0};
    CHECK(structure_factor(RpcmModel::poisson(2), zero) == 1.0);
    CHECK(std::abs(structure_factor(RpcmModel::ginibre_unit(), zero)) < 1e-12);
    const auto g = RpcmModel::ginibre_unit();
    for (double kk : {0.1, 1.0, 2.0, 5.0}) {
        double k[2] = {kk * 0.6, kk * 0.8};
        CHECK(structure_factor(g, k) == doctest::Approx(1 - std::exp(-kk * kk / (4 * pi))).epsilon(1e-12));
        CHECK(structure_factor(g, k) >= 0.0);
    }
    const auto c = RpcmModel::cloaked_lattice(2);
    double k1[2] = {1.0, 0.0}, k2[2] = {0.5, 2.0}, k3[2] = {3.0, 3.0};
    CHECK(structure_factor(c, k1) == doctest::Approx(0.08060461173627953).epsilon(1e-9));
    CHECK(structure_factor(c, k2) == doctest::Approx(0.30655572913138285).epsilon(1e-9));
    CHECK(structure_factor(c, k3) == doctest::Approx(0.80444098091229255).epsilon(1e-9));
}

TEST_CASE("radial table structure factor agrees with the closed form") {
    // Tabulate the ginibre profile and compare the Hankel-quadrature S(k).
    std::vector<double> r, f;
    for (int i = 0; i <= 4000; ++i) {
        r.push_back(i * 1e-3);
        f.push_back(std::exp(-pi * r.back() * r.back()));
    }
    const auto t = RpcmModel::table(2, r, f, -1, true);
    const auto g = RpcmModel::ginibre_unit();
    for (double kk : {0.3, 1.0, 3.0}) {
        double k[2] = {kk, 0.0};
        CHECK(structure_factor(t, k) == doctest::Approx(structure_factor(g, k)).epsilon(1e-5));
    }
    CHECK(beta_total(t) == doctest::Approx(-1.0).epsilon(1e-5));
}

TEST_CASE("table models load from text and respect the integrability flag") {
    namespace fs = std::filesystem;
    const auto path = fs::temp_directory_path() / "hm_table_test.txt";
    {
        std::ofstream f(path);
        f << "# radial profile\nrpcm-table d=1 sign=-1 integrable=1\n0 0.5\n1 0.25\n2 0\n";
    }
    const auto m = RpcmModel::load_table(path.string());
    CHECK(m.d() == 1);
    double x = 0.5;
    CHECK(m.density(&x) == doctest::Approx(-0.375));
    CHECK(beta_total(m) == doctest::Approx(-1.0).epsilon(1e-9));  // 2 ∫_0^2 (0.5 − r/4) dr
    {
        std::ofstream f(path);
        f << "rpcm-table d=2 sign=1 integrable=0\n0 1\n1 1\n";
    }
    const auto bad = RpcmModel::load_table(path.string());
    CHECK_THROWS_AS(beta_total(bad), Error);
    CHECK_THROWS_AS(predicted_variance(bad, 1.0), Error);
    fs::remove(path);
}

TEST_CASE("log-tail integral") {
    CHECK(log_integral(RpcmModel::poisson(2)) == 0.0);
    CHECK(log_integral(RpcmModel::cloaked_lattice(2)) == doctest::Approx(0.0018207158977583695).epsilon(1e-6));
    CHECK(log_integral(RpcmModel::ginibre_unit()) == doctest::Approx(0.0054531504496369763).epsilon(1e-6));
    CHECK(log_integral(RpcmModel::ginibre_unit()) < 0.1);
}

TEST_CASE("predicted count variance") {
    for (int d = 1; d <= 3; ++d)
        for (double n : {0.5, 4.0}) {
            const double vol = std::pow(two_pi, d) * n;
            CHECK(predicted_variance(RpcmModel::poisson(d), n) == doctest::Approx(vol).epsilon(1e-12));
        }
    const auto g = RpcmModel::ginibre_unit();
    CHECK(predicted_variance(g, 1.0) == doctest::Approx(3.8986788163576621).epsilon(1e-7));
    CHECK(predicted_variance(g, 4.0) == doctest::Approx(7.8986788163576619).epsilon(1e-7));
    CHECK(predicted_variance(g, 16.0) == doctest::Approx(15.898678816357662).epsilon(1e-7));

    // Cloaked lattice on integer sides: side^d − (side − 1/3)^d.
    const double cloaked[3][2] = {{0.33333333333333348, 0.33333333333333304},
                                  {2.5555555555555571, 5.2222222222222143},
                                  {14.703703703703709, 61.370370370370324}};
    for (int d = 1; d <= 3; ++d)
        for (int j = 0; j < 2; ++j) {
            const double side = j == 0 ? 4.0 : 8.0;
            const double n = std::pow(side / two_pi, d);
            CHECK(predicted_variance(RpcmModel::cloaked_lattice(d), n) ==
                  doctest::Approx(cloaked[d - 1][j]).epsilon(1e-7));
        }
}

TEST_CASE("ginibre reduced variance vanishes and the variance stays between its bounds") {
    const auto g = RpcmModel::ginibre_unit();
    double prev = INFINITY;
    for (double n : {1.0, 4.0, 16.0, 64.0, 256.0}) {
        const double vol = std::pow(two_pi, 2) * n;
        const double v = predicted_variance(g, n);
        CHECK(v >= 0.0);
        CHECK(v / vol < prev);
        prev = v / vol;
        // Upper and lower shape bounds with constants fixed once for all n.
        CHECK(v <= 4.0 * n * b_n(g, n));
        CHECK(v >= 0.1 * vol * (1 + beta_total(g) + epsilon(g, std::pow(n, -0.5))));
    }
}

TEST_CASE("unsupported cases") {
    CHECK_THROWS_AS(RpcmModel::cloaked_lattice(4), Error);
    CHECK_THROWS_AS(RpcmModel::parse("ginibre-unit", 3), Error);
    CHECK_THROWS_AS(RpcmModel::parse("hard-core", 2), Error);
}
