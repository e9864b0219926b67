#pragma once

// Periodic boxes Λ_n = (−side/2, side/2]^d with side = 2π n^{1/d}.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hm::geom {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr int max_dim = 4;

struct Window {
    int d = 1;
    double n = 1.0;
    double side = two_pi;

    // Window with volume parameter n.
    static Window make(int d, double n);
    // Window with a prescribed side; n is derived. Keeps integer sides exact.
    static Window from_side(int d, double side);
    // Window whose expected unit-intensity count is `count`.
    static Window from_count(int d, double count);

    double volume() const;
    double scale() const;  // n^{1/d}
    bool side_is_integer(double tol = 1e-9) const;
    bool same_as(const Window& other) const;
};

using Point = std::vector<double>;

// Map a coordinate into (−side/2, side/2].
double wrap(double x, double side);

// Per-axis separation on the circle of length `side`; inputs canonical.
inline double axis_gap(double a, double b, double side) {
    double g = a > b ? a - b : b - a;
    double h = side - g;
    return g < h ? g : h;
}

double toroidal_distance_sq(const double* a, const double* b, int d, double side);
double toroidal_distance(std::span<const double> a, std::span<const double> b,
                         const Window& w);

// |Λ_n ∩ (Λ_n + x)^c| and its complement δ_n(x) = Π (side − |x_i|)_+.
double gamma_n(std::span<const double> x, const Window& w);
double delta_n(std::span<const double> x, const Window& w);

struct PointSet {
    Window window;
    std::vector<double> coords;  // row-major, size() * d
    std::string process = "none";
    std::uint64_t seed = 0;

    std::size_t size() const { return window.d > 0 ? coords.size() / window.d : 0; }
    bool empty() const { return coords.empty(); }
    const double* point(std::size_t i) const { return coords.data() + i * window.d; }
    double* point(std::size_t i) { return coords.data() + i * window.d; }
    void push(std::span<const double> p);
};

// Divide coordinates by n^{1/d}; result lives on Λ_1.
PointSet rescale_to_unit(const PointSet& p);
// Inverse of rescale_to_unit for a target window parameter n.
PointSet rescale_from_unit(const PointSet& p, double n);

// Translate every point by `shift` and wrap.
PointSet translate(const PointSet& p, std::span<const double> shift);

}  // namespace hm::geom
