#pragma once

// Seeded samplers for stationary unit-intensity point processes on a Window.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hypermatch/geometry.hpp"

namespace hm::process {

using geom::PointSet;
using geom::Window;

enum class Kind { poisson, shifted_lattice, cloaked_lattice, gaussian_lattice, ginibre };

struct ProcessSpec {
    Kind kind = Kind::poisson;
    double sigma = 0.0;  // gaussian-lattice only

    static ProcessSpec poisson() { return {Kind::poisson, 0.0}; }
    static ProcessSpec shifted_lattice() { return {Kind::shifted_lattice, 0.0}; }
    static ProcessSpec cloaked_lattice() { return {Kind::cloaked_lattice, 0.0}; }
    static ProcessSpec gaussian_lattice(double sigma);
    static ProcessSpec ginibre() { return {Kind::ginibre, 0.0}; }

    // Accepts "poisson", "shifted-lattice", "cloaked-lattice", "ginibre",
    // "gaussian-lattice:<sigma>".
    static ProcessSpec parse(const std::string& text);
    std::string name() const;
    bool lattice_based() const;
};

PointSet sample_poisson(const Window& w, std::uint64_t seed);
// For a given seed, shifted and cloaked lattices share the global shift U and
// list the lattice cells in the same order, so point i of one is the canonical
// partner of point i of the other.
PointSet sample_shifted_lattice(const Window& w, std::uint64_t seed);
PointSet sample_cloaked_lattice(const Window& w, std::uint64_t seed);
PointSet sample_gaussian_lattice(const Window& w, double sigma, std::uint64_t seed);
PointSet sample_ginibre(const Window& w, std::uint64_t seed);

PointSet sample(const ProcessSpec& spec, const Window& w, std::uint64_t seed);

// Matrix size used by the Ginibre sampler for window w.
int ginibre_matrix_size(const Window& w);

// Eigenvalues (interleaved re, im) of an m×m Ginibre matrix with unit-variance
// complex entries.
std::vector<double> ginibre_eigenvalues(int m, std::uint64_t seed);

void write_point_set(std::ostream& os, const PointSet& p);
PointSet read_point_set(std::istream& is);

}  // namespace hm::process
