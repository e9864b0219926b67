#pragma once

// Thin wrappers over adaptive Gauss–Kronrod with explicit error accounting.

#include <functional>
#include <vector>

namespace hm::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
};

using Fn = std::function<double(double)>;

// Globally adaptive G7/K15 on [a, b], split first at the breakpoints inside (a, b).
Result integrate(const Fn& f, double a, double b, double rel_tol = 1e-10,
                 const std::vector<double>& breaks = {});

// As above, but raises quadrature-failure when error > rel_tol·|value| + abs_tol.
double integrate_checked(const Fn& f, double a, double b, double rel_tol, double abs_tol,
                         const std::vector<double>& breaks = {});

// Nested integral over the box Π [lo_i, hi_i] (dimension ≤ 4), breakpoints per
// axis. The integrand receives a pointer to the d coordinates.
Result integrate_box(const std::function<double(const double*)>& f, int d,
                     const std::vector<double>& lo, const std::vector<double>& hi,
                     double rel_tol = 1e-9,
                     const std::vector<std::vector<double>>& breaks = {});

}  // namespace hm::quad
