#pragma once

// Matchings and transports under the toroidal metric.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hypermatch/geometry.hpp"

namespace hm::transport {

using geom::PointSet;

struct CostFn {
    enum class Kind { power, log_weighted };
    Kind kind = Kind::power;
    double exponent = 1.0;  // p for power, a for log-weighted
    double gamma = 2.0;     // log-weighted only

    static CostFn power(double p);
    static CostFn log_weighted(double a, double gamma);
    // "power:<p>" or "log-weighted:<a>:<gamma>"
    static CostFn parse(const std::string& text);

    double operator()(double x) const;
    std::string name() const;
};

struct MatchResult {
    std::vector<std::pair<int, int>> pairs;  // (source, target)
    std::vector<double> distances;
    std::vector<int> levels;  // −1 unless produced by dyadic_matching
    double total_cost = 0.0;  // Σ w(distance) under the matcher's cost
    std::vector<int> unmatched_source;
    std::vector<int> unmatched_target;

    bool perfect() const { return unmatched_source.empty() && unmatched_target.empty(); }
};

double cost_of(const MatchResult& match, const CostFn& cost);
void write_match_csv(std::ostream& os, const MatchResult& match);

// Dense square assignment: minimizes Σ cost[i·n + perm[i]]. Any real costs.
std::vector<int> solve_assignment(const std::vector<double>& cost, int n);

MatchResult exact_matching(const PointSet& a, const PointSet& b, const CostFn& cost);

// Greedy by increasing distance, which for symmetric costs is the same as
// repeatedly pairing mutually nearest points. total_cost is Σ distance.
MatchResult stable_matching(const PointSet& a, const PointSet& b);

struct DyadicInfo {
    int levels = 0;                  // K with side = 2^K
    std::vector<int> unmatched_after;  // #unmatched sources after each level 1..K
    std::vector<int> imbalance_bound;  // Σ_C |a(C) − b(C)| per level
    int closure_pairs = 0;
};

// Hierarchical matching over randomly shifted dyadic cubes; leftovers after the
// top level are matched by exact assignment (level K+1). total_cost is Σ distance.
MatchResult dyadic_matching(const PointSet& a, const PointSet& b, std::uint64_t seed,
                            DyadicInfo* info = nullptr);

struct TransportEntry {
    int source = 0;
    int cell = 0;
    double mass = 0.0;
};

struct TransportPlan {
    std::vector<TransportEntry> entries;
    int sources = 0;
    int cells = 0;
    int cells_per_axis = 0;
    double source_mass = 0.0;  // n / N
    double cell_mass = 0.0;    // n / Q
};

struct SemidiscreteResult {
    double cost = 0.0;  // W̃₂² between (n/N)μ and the discretized uniform mass n
    TransportPlan plan;
    double quantization_bound = 0.0;  // bound on |W̃₂ − W̃₂(grid)|, W₂ units
    int solver_rounds = 0;
};

// Cells per axis for the balanced product grid with about q·N cells.
int grid_cells_per_axis(int d, long target_cells);
// Center of grid cell `cell` on window w with g cells per axis.
void cell_center(const geom::Window& w, int g, long cell, double* out);

SemidiscreteResult semidiscrete_w2(const PointSet& p, int grid_per_point = 4);

struct SinkhornInfo {
    int iterations = 0;
    double marginal_error = 0.0;  // L1 row-sum error, probability units
    double lambda = 0.0;
};

// Entropic approximation of semidiscrete_w2. Returns the transport part ⟨P, C⟩.
double sinkhorn_w2(const PointSet& p, int grid_per_point, double lambda, int max_iterations,
                   SinkhornInfo* info = nullptr, double tolerance = 1e-6);

// Mean nearest-neighbour distance under the toroidal metric.
double mean_nn_spacing(const PointSet& p);

}  // namespace hm::transport
