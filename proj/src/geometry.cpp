#include "hypermatch/geometry.hpp"

#include <cmath>

#include "hypermatch/error.hpp"

namespace hm::geom {

namespace {

void check_dim(int d) {
    if (d < 1 || d > max_dim) fail(ErrorKind::unsupported_dimension, "d must be in 1..4");
}

}  // namespace

Window Window::make(int d, double n) {
    check_dim(d);
    if (!(n > 0.0)) fail(ErrorKind::config, "window parameter n must be positive");
    return Window{d, n, two_pi * std::pow(n, 1.0 / d)};
}

Window Window::from_side(int d, double side) {
    check_dim(d);
    if (!(side > 0.0)) fail(ErrorKind::config, "window side must be positive");
    return Window{d, std::pow(side / two_pi, d), side};
}

Window Window::from_count(int d, double count) {
    check_dim(d);
    return make(d, count / std::pow(two_pi, d));
}

double Window::volume() const { return std::pow(side, d); }

double Window::scale() const { return side / two_pi; }

bool Window::side_is_integer(double tol) const {
    return std::abs(side - std::round(side)) <= tol * std::max(1.0, side) && side >= 1.0 - tol;
}

bool Window::same_as(const Window& o) const {
    return d == o.d && std::abs(side - o.side) <= 1e-12 * side;
}

double wrap(double x, double side) {
    const double half = 0.5 * side;
    double r = x - side * std::ceil((x - half) / side);
    if (r <= -half) r += side;
    if (r > half) r -= side;
    return r;
}

double toroidal_distance_sq(const double* a, const double* b, int d, double side) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        double g = axis_gap(a[i], b[i], side);
        s += g * g;
    }
    return s;
}

double toroidal_distance(std::span<const double> a, std::span<const double> b,
                         const Window& w) {
    if (a.size() != static_cast<std::size_t>(w.d) || b.size() != a.size())
        fail(ErrorKind::dimension, "point dimension does not match window");
    return std::sqrt(toroidal_distance_sq(a.data(), b.data(), w.d, w.side));
}

double delta_n(std::span<const double> x, const Window& w) {
    double prod = 1.0;
    for (double xi : x) prod *= std::max(0.0, w.side - std::abs(xi));
    return prod;
}

double gamma_n(std::span<const double> x, const Window& w) {
    // Telescoping: Π a_i − Π b_i = Σ_j (a_j − b_j) Π_{i<j} a_i Π_{i>j} b_i,
    // with a_i = side and a_j − b_j = min(|x_j|, side). Every term is ≥ 0.
    const int d = static_cast<int>(x.size());
    double total = 0.0;
    double head = 1.0;  // side^j
    for (int j = 0; j < d; ++j) {
        double tail = 1.0;
        for (int k = j + 1; k < d; ++k) tail *= std::max(0.0, w.side - std::abs(x[k]));
        total += std::min(std::abs(x[j]), w.side) * head * tail;
        head *= w.side;
    }
    return total;
}

void PointSet::push(std::span<const double> p) {
    if (p.size() != static_cast<std::size_t>(window.d))
        fail(ErrorKind::dimension, "point dimension does not match window");
    coords.insert(coords.end(), p.begin(), p.end());
}

PointSet rescale_to_unit(const PointSet& p) {
    PointSet out = p;
    out.window = Window::make(p.window.d, 1.0);
    const double s = p.window.scale();
    for (double& c : out.coords) c /= s;
    return out;
}

PointSet rescale_from_unit(const PointSet& p, double n) {
    PointSet out = p;
    out.window = Window::make(p.window.d, n);
    const double s = out.window.scale();
    for (double& c : out.coords) c *= s;
    return out;
}

PointSet translate(const PointSet& p, std::span<const double> shift) {
    if (shift.size() != static_cast<std::size_t>(p.window.d))
        fail(ErrorKind::dimension, "shift dimension does not match window");
    PointSet out = p;
    const int d = p.window.d;
    for (std::size_t i = 0; i < out.size(); ++i)
        for (int k = 0; k < d; ++k)
            out.coords[i * d + k] = wrap(out.coords[i * d + k] + shift[k], p.window.side);
    return out;
}

}  // namespace hm::geom
