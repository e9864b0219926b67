#pragma once

#include <utility>
#include <vector>

#include "hypermatch/transport.hpp"

namespace hm::transport {

std::vector<int> solve_rectangular_assignment(const std::vector<double>& cost, int rows, int cols);

// Greedy pairing by increasing toroidal distance between subsets of a and b.
// Stops when either subset is exhausted. Ties break on (distance, a, b).
std::vector<std::pair<int, int>> greedy_pairs(const PointSet& a, const std::vector<int>& ia,
                                              const PointSet& b, const std::vector<int>& ib);

}  // namespace hm::transport

namespace hm::transport {

// General min-cost-flow path of semidiscrete_w2, usable for any d (tests use it
// to cross-check the one-dimensional solver).
SemidiscreteResult semidiscrete_flow(const PointSet& p, int grid_per_point);
// One-dimensional path: best cyclic shift of the sorted unit masses.
SemidiscreteResult semidiscrete_circle(const PointSet& p, int grid_per_point);

}  // namespace hm::transport
