#pragma once

// Scattering intensity, Fourier coefficients of rescaled samples, count
// variance curves and matched-distance distributions.

#include <cstdint>
#include <span>
#include <vector>

#include "hypermatch/geometry.hpp"
#include "hypermatch/process.hpp"
#include "hypermatch/transport.hpp"

namespace hm::spectral {

using geom::PointSet;
using geom::Window;
using Mode = std::vector<int>;

// S_n(k) = |Σ_x e^{−ik·x}|² / N at k = m n^{−1/d}; 0 for an empty sample.
double scattering_intensity(const PointSet& p, std::span<const int> m);
// |f(m)|² of the rescaled probability measure on Λ_1; 1 for an empty sample.
double fourier_coeff_sq(const PointSet& p, std::span<const int> m);

// All m ∈ Z^d with 0 < ‖m‖ ≤ t0, ordered by (‖m‖, lexicographic).
std::vector<Mode> mode_grid(int d, double t0);
double mode_norm(const Mode& m);

// |f(m)|² for every mode of mode_grid(d, t0).
std::vector<double> fourier_coefficients(const PointSet& p, const std::vector<Mode>& modes);

struct SpectrumEstimate {
    int d = 0;
    double n = 0.0;
    double t0 = 0.0;
    std::vector<Mode> modes;
    std::vector<double> k_norm;  // ‖m‖ n^{−1/d}
    std::vector<double> mean;    // replica mean of (π_d n / N) S_n(k)
    std::vector<double> stderr_;
    int replicas = 0;
    double count_mean = 0.0;
    double count_var = 0.0;
    double identity_max_error = 0.0;  // max |N |f|² − S_n| / max(1, S_n)
};

// t0 must not exceed c0 n^{1/d}; max_modes > 0 keeps the first modes only.
SpectrumEstimate estimate_structure_factor(const process::ProcessSpec& spec, const Window& w,
                                           double t0, int replicas, std::uint64_t seed,
                                           std::size_t max_modes = 0, double c0 = 1.0);

struct VarianceCurve {
    int d = 0;
    std::vector<double> n;
    std::vector<double> count_mean;
    std::vector<double> var;
    std::vector<double> var_se;
    std::vector<double> sigma;
    std::vector<double> sigma_se;
    int replicas = 0;
};

// Count of points in Λ_n of a stationary realization. Lattice-based processes
// are sampled on a larger lattice-compatible torus so the window count is not
// pinned by periodic wrapping.
long window_count(const process::ProcessSpec& spec, const Window& w, std::uint64_t seed);

VarianceCurve variance_curve(const process::ProcessSpec& spec, int d,
                             const std::vector<double>& n_grid, int replicas,
                             std::uint64_t seed);

struct EmpiricalCdf {
    std::vector<double> sorted;

    double operator()(double r) const;  // fraction ≤ r
    double survival(double r) const;    // fraction ≥ r
    double quantile(double p) const;
    std::size_t size() const { return sorted.size(); }
};

EmpiricalCdf make_cdf(std::vector<double> values);

// Distances of pairs whose source point lies in the centered sub-window of
// volume fraction core_fraction. Closure pairs (level > K) are skipped when
// skip_level > 0 and level ≥ skip_level.
EmpiricalCdf distance_cdf(const transport::MatchResult& match, const PointSet& source,
                          double core_fraction = 0.25, int skip_level = 0);

// Mean and standard error helpers.
struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    double var = 0.0;
};
MeanSe mean_se(std::span<const double> v);
// Unbiased variance with a standard error estimated from the fourth moment.
MeanSe variance_se(std::span<const double> v);

}  // namespace hm::spectral
