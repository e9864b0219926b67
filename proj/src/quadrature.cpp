#include "hypermatch/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <queue>

#include "hypermatch/error.hpp"

namespace hm::quad {

namespace {

using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
constexpr std::size_t max_panels = 4000;

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel panel(const Fn& f, double a, double b) {
    double err = 0.0;
    double v = gk::integrate(f, a, b, 0, 0.0, &err);
    return {a, b, v, err};
}

// Globally adaptive: always bisect the panel with the largest error until the
// summed error meets rel_tol·|value| or the panel budget runs out.
Result integrate_budget(const Fn& f, double a, double b, double rel_tol,
                        const std::vector<double>& breaks, std::size_t budget) {
    Result r;
    if (!(b > a)) return r;
    std::vector<double> nodes{a};
    for (double x : breaks)
        if (x > a && x < b) nodes.push_back(x);
    std::sort(nodes.begin() + 1, nodes.end());
    nodes.push_back(b);
    std::priority_queue<Panel> q;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        if (nodes[i + 1] > nodes[i]) q.push(panel(f, nodes[i], nodes[i + 1]));
    auto totals = [&] {
        double v = 0.0, e = 0.0;
        auto copy = q;
        while (!copy.empty()) {
            v += copy.top().value;
            e += copy.top().error;
            copy.pop();
        }
        return Result{v, e};
    };
    double value = 0.0, error = 0.0;
    {
        Result t = totals();
        value = t.value;
        error = t.error;
    }
    while (!q.empty() && error > rel_tol * std::abs(value) && q.size() < budget) {
        Panel p = q.top();
        const double m = 0.5 * (p.a + p.b);
        if (!(m > p.a && m < p.b)) break;
        q.pop();
        Panel l = panel(f, p.a, m), h = panel(f, m, p.b);
        value += l.value + h.value - p.value;
        error += l.error + h.error - p.error;
        q.push(l);
        q.push(h);
    }
    return totals();  // re-summed to shed drift from the running updates
}

}  // namespace

Result integrate(const Fn& f, double a, double b, double rel_tol,
                 const std::vector<double>& breaks) {
    return integrate_budget(f, a, b, rel_tol, breaks, max_panels);
}

double integrate_checked(const Fn& f, double a, double b, double rel_tol, double abs_tol,
                         const std::vector<double>& breaks) {
    Result r = integrate(f, a, b, rel_tol * 1e-2, breaks);
    if (!std::isfinite(r.value) || r.error > rel_tol * std::abs(r.value) + abs_tol)
        fail(ErrorKind::quadrature_failure,
             "integral error estimate " + std::to_string(r.error) + " exceeds tolerance");
    return r.value;
}

namespace {

Result nested(const std::function<double(const double*)>& f, int d, int axis, double* x,
              const std::vector<double>& lo, const std::vector<double>& hi, double rel_tol,
              const std::vector<std::vector<double>>& breaks) {
    static const std::vector<double> none;
    const std::vector<double>& br = axis < static_cast<int>(breaks.size()) ? breaks[axis] : none;
    double inner_error = 0.0;
    Fn g = [&](double t) {
        x[axis] = t;
        if (axis + 1 == d) return f(x);
        Result in = nested(f, d, axis + 1, x, lo, hi, rel_tol, breaks);
        inner_error = std::max(inner_error, in.error);
        return in.value;
    };
    // Inner integrals carry noise of order rel_tol, so outer axes ask for a
    // looser tolerance and a smaller panel budget.
    const int outer = d - 1 - axis;
    const double tol = rel_tol * std::pow(10.0, outer);
    Result out = integrate_budget(g, lo[axis], hi[axis], tol, br, outer == 0 ? max_panels : 200);
    out.error += inner_error * (hi[axis] - lo[axis]);
    return out;
}

}  // namespace

Result integrate_box(const std::function<double(const double*)>& f, int d,
                     const std::vector<double>& lo, const std::vector<double>& hi,
                     double rel_tol, const std::vector<std::vector<double>>& breaks) {
    double x[4] = {0, 0, 0, 0};
    if (d < 1 || d > 4) fail(ErrorKind::unsupported_dimension, "box quadrature needs d in 1..4");
    return nested(f, d, 0, x, lo, hi, rel_tol, breaks);
}

}  // namespace hm::quad
