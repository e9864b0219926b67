#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "hypermatch/error.hpp"
#include "hypermatch/network_simplex.hpp"
#include "transport_internal.hpp"

namespace hm::transport {

namespace {

long ipow(long b, int e) {
    long r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// Uniform bins over the torus for nearest-source queries.
class SourceBins {
public:
    SourceBins(const PointSet& p) : p_(p), d_(p.window.d), side_(p.window.side) {
        const double n = static_cast<double>(p.size());
        per_axis_ = std::max(1L, static_cast<long>(std::floor(std::pow(n, 1.0 / d_))));
        width_ = side_ / per_axis_;
        bins_.assign(static_cast<std::size_t>(ipow(per_axis_, d_)), {});
        for (std::size_t i = 0; i < p.size(); ++i) bins_[bin_of(p.point(i))].push_back(static_cast<int>(i));
    }

    // Indices of sources within squared distance r2 of x, or the k nearest when
    // r2 < 0. Output sorted by (distance², index).
    std::vector<std::pair<double, int>> query(const double* x, std::size_t k, double r2) const {
        std::vector<std::pair<double, int>> found;
        long home[4];
        for (int a = 0; a < d_; ++a) home[a] = axis_bin(x[a]);
        const long max_shell = per_axis_ / 2 + 1;
        for (long rho = 0; rho <= max_shell; ++rho) {
            visit_shell(home, rho, x, found);
            const double reach = rho * width_;
            if (2 * rho + 1 >= per_axis_) break;
            if (r2 >= 0.0) {
                if (reach * reach > r2) break;
            } else if (found.size() >= k) {
                std::nth_element(found.begin(), found.begin() + (k - 1), found.end());
                if (found[k - 1].first <= reach * reach) break;
            }
        }
        std::sort(found.begin(), found.end());
        if (r2 >= 0.0) {
            while (!found.empty() && found.back().first >= r2) found.pop_back();
        } else if (found.size() > k) {
            found.resize(k);
        }
        return found;
    }

private:
    long axis_bin(double v) const {
        long b = static_cast<long>(std::floor((v + 0.5 * side_) / width_));
        return std::clamp(b, 0L, per_axis_ - 1);
    }
    std::size_t bin_of(const double* x) const {
        long id = 0;
        for (int a = 0; a < d_; ++a) id = id * per_axis_ + axis_bin(x[a]);
        return static_cast<std::size_t>(id);
    }
    void visit_shell(const long* home, long rho, const double* x,
                     std::vector<std::pair<double, int>>& out) const {
        const long span = 2 * rho + 1;
        const long total = ipow(span, d_);
        for (long t = 0; t < total; ++t) {
            long rest = t, off[4];
            bool on_shell = false;
            for (int a = 0; a < d_; ++a) {
                off[a] = rest % span - rho;
                rest /= span;
                on_shell = on_shell || std::abs(off[a]) == rho;
            }
            if (!on_shell) continue;
            // On small grids keep one representative offset per bin.
            bool alias = false;
            for (int a = 0; a < d_; ++a)
                alias = alias || off[a] < -((per_axis_ - 1) / 2) || off[a] > per_axis_ / 2;
            if (alias) continue;
            long id = 0;
            for (int a = 0; a < d_; ++a) {
                long b = (home[a] + off[a]) % per_axis_;
                if (b < 0) b += per_axis_;
                id = id * per_axis_ + b;
            }
            for (int i : bins_[static_cast<std::size_t>(id)])
                out.emplace_back(geom::toroidal_distance_sq(x, p_.point(i), d_, side_), i);
        }
    }

    const PointSet& p_;
    int d_;
    double side_;
    long per_axis_ = 1;
    double width_ = 1.0;
    std::vector<std::vector<int>> bins_;
};

SemidiscreteResult empty_sample(const PointSet& p, int q) {
    const geom::Window& w = p.window;
    const int g = grid_cells_per_axis(w.d, q);
    const long cells = ipow(g, w.d);
    SemidiscreteResult r;
    r.plan.cells = static_cast<int>(cells);
    r.plan.cells_per_axis = g;
    r.plan.cell_mass = w.n / cells;
    double origin[4] = {0, 0, 0, 0}, c[4];
    for (long j = 0; j < cells; ++j) {
        cell_center(w, g, j, c);
        r.cost += r.plan.cell_mass * geom::toroidal_distance_sq(origin, c, w.d, w.side);
    }
    const double h = w.side / g;
    r.quantization_bound = std::sqrt(w.n) * 0.5 * h * std::sqrt(static_cast<double>(w.d));
    return r;
}

}  // namespace

int grid_cells_per_axis(int d, long target_cells) {
    if (target_cells < 1) target_cells = 1;
    if (d == 1) return static_cast<int>(target_cells);
    return std::max(1, static_cast<int>(std::lround(std::pow(static_cast<double>(target_cells), 1.0 / d))));
}

void cell_center(const geom::Window& w, int g, long cell, double* out) {
    const double h = w.side / g;
    for (int a = w.d - 1; a >= 0; --a) {
        const long j = cell % g;
        cell /= g;
        out[a] = -0.5 * w.side + (static_cast<double>(j) + 0.5) * h;
    }
}

SemidiscreteResult semidiscrete_circle(const PointSet& p, int q) {
    const geom::Window& w = p.window;
    if (w.d != 1) fail(ErrorKind::dimension, "circle solver needs d = 1");
    const int n_pts = static_cast<int>(p.size());
    const long units = static_cast<long>(q) * n_pts;
    std::vector<int> order(n_pts);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return p.coords[a] < p.coords[b] || (p.coords[a] == p.coords[b] && a < b); });
    std::vector<double> src(units), ctr(units);
    for (long t = 0; t < units; ++t) src[t] = p.coords[order[t / q]];
    const double h = w.side / units;
    for (long j = 0; j < units; ++j) ctr[j] = -0.5 * w.side + (j + 0.5) * h;

    double best = std::numeric_limits<double>::infinity();
    long best_k = 0;
    for (long k = 0; k < units; ++k) {
        double s = 0.0;
        long j = k;
        for (long t = 0; t < units; ++t) {
            const double g = geom::axis_gap(src[t], ctr[j], w.side);
            s += g * g;
            if (++j == units) j = 0;
        }
        if (s < best) {
            best = s;
            best_k = k;
        }
    }
    SemidiscreteResult r;
    const double unit_mass = w.n / units;
    r.cost = best * unit_mass;
    r.plan.sources = n_pts;
    r.plan.cells = static_cast<int>(units);
    r.plan.cells_per_axis = static_cast<int>(units);
    r.plan.source_mass = w.n / n_pts;
    r.plan.cell_mass = unit_mass;
    for (long t = 0; t < units; ++t)
        r.plan.entries.push_back({order[t / q], static_cast<int>((t + best_k) % units), unit_mass});
    std::sort(r.plan.entries.begin(), r.plan.entries.end(), [](const TransportEntry& a, const TransportEntry& b) {
        return a.source != b.source ? a.source < b.source : a.cell < b.cell;
    });
    r.quantization_bound = std::sqrt(w.n) * 0.5 * h;
    r.solver_rounds = 1;
    return r;
}

SemidiscreteResult semidiscrete_flow(const PointSet& p, int q) {
    const geom::Window& w = p.window;
    const int d = w.d;
    const int n_pts = static_cast<int>(p.size());
    const int g = grid_cells_per_axis(d, static_cast<long>(q) * n_pts);
    const long cells = ipow(g, d);
    if (cells > 2'000'000) fail(ErrorKind::config, "semidiscrete grid too large");
    std::vector<double> centers(static_cast<std::size_t>(cells) * d);
    for (long j = 0; j < cells; ++j) cell_center(w, g, j, centers.data() + j * d);

    const SourceBins bins(p);
    std::unordered_set<long long> present;
    std::vector<std::pair<int, int>> arcs;  // (source, cell)
    auto add = [&](int i, long j) {
        const long long key = static_cast<long long>(i) * cells + j;
        if (present.insert(key).second) arcs.emplace_back(i, static_cast<int>(j));
    };
    // Each cell to its nearest sources.
    const std::size_t k_cell = std::min<std::size_t>(n_pts, static_cast<std::size_t>(4 + (1 << d)));
    for (long j = 0; j < cells; ++j)
        for (const auto& [d2, i] : bins.query(centers.data() + j * d, k_cell, -1.0)) add(i, j);
    // Each source to the 3^d block of cells around it.
    const double h = w.side / g;
    for (int i = 0; i < n_pts; ++i) {
        const double* x = p.point(i);
        long home[4];
        for (int a = 0; a < d; ++a)
            home[a] = std::clamp(static_cast<long>(std::floor((x[a] + 0.5 * w.side) / h)), 0L, static_cast<long>(g) - 1);
        const long total = ipow(3, d);
        for (long t = 0; t < total; ++t) {
            long rest = t, id = 0;
            for (int a = 0; a < d; ++a) {
                long c = (home[a] + rest % 3 - 1) % g;
                rest /= 3;
                if (c < 0) c += g;
                id = id * g + c;
            }
            add(i, id);
        }
    }

    auto cost_of_arc = [&](int i, long j) {
        return geom::toroidal_distance_sq(p.point(i), centers.data() + j * d, d, w.side);
    };

    // Integer masses: every source supplies `cells` units, every cell takes
    // `n_pts` units. Arcs found later are appended to the warm basis.
    NetworkSimplex ns(n_pts + static_cast<int>(cells));
    for (int i = 0; i < n_pts; ++i) ns.set_supply(i, cells);
    for (long j = 0; j < cells; ++j) ns.set_supply(n_pts + static_cast<int>(j), -static_cast<std::int64_t>(n_pts));
    double max_cost = 0.0;
    std::size_t in_network = 0;
    auto sync = [&] {
        for (; in_network < arcs.size(); ++in_network) {
            const auto [i, j] = arcs[in_network];
            const double c = cost_of_arc(i, j);
            max_cost = std::max(max_cost, c);
            ns.add_arc(i, n_pts + j, c);
        }
    };

    SemidiscreteResult r;
    for (int round = 1;; ++round) {
        sync();
        const auto status = ns.run();
        if (status != NetworkSimplex::Status::optimal) {
            // The sparse arc set can be infeasible in principle; densify.
            if (round > 50) fail(ErrorKind::non_convergence, "semidiscrete flow did not become feasible");
            const std::size_t extra = std::min<std::size_t>(n_pts, 4 * k_cell * round);
            for (long j = 0; j < cells; ++j)
                for (const auto& [d2, i] : bins.query(centers.data() + j * d, extra, -1.0)) add(i, j);
            continue;
        }
        // Certify against every (source, cell) pair with the simplex duals.
        double pi_min = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_pts; ++i) pi_min = std::min(pi_min, ns.potential(i));
        const double tol = 1e-9 * std::max(1.0, max_cost);
        std::size_t added = 0;
        for (long j = 0; j < cells; ++j) {
            const double pj = ns.potential(n_pts + static_cast<int>(j));
            const double reach = pj - pi_min;
            if (!(reach > 0.0)) continue;
            std::vector<std::pair<double, int>> bad;
            for (const auto& [d2, i] : bins.query(centers.data() + j * d, 0, reach)) {
                const double rc = d2 + ns.potential(i) - pj;
                if (rc < -tol) bad.emplace_back(rc, i);
            }
            std::sort(bad.begin(), bad.end());
            if (bad.size() > 16) bad.resize(16);
            for (const auto& [rc, i] : bad) {
                const std::size_t before = arcs.size();
                add(i, j);
                added += arcs.size() - before;
            }
        }
        if (added == 0) {
            const double unit = w.n / (static_cast<double>(n_pts) * cells);
            r.cost = ns.total_cost() * unit;
            r.plan.sources = n_pts;
            r.plan.cells = static_cast<int>(cells);
            r.plan.cells_per_axis = g;
            r.plan.source_mass = w.n / n_pts;
            r.plan.cell_mass = w.n / cells;
            for (std::size_t e = 0; e < arcs.size(); ++e) {
                const std::int64_t f = ns.flow(static_cast<int>(e));
                if (f > 0) r.plan.entries.push_back({arcs[e].first, arcs[e].second, f * unit});
            }
            std::sort(r.plan.entries.begin(), r.plan.entries.end(), [](const TransportEntry& a, const TransportEntry& b) {
                return a.source != b.source ? a.source < b.source : a.cell < b.cell;
            });
            r.quantization_bound = std::sqrt(w.n) * 0.5 * h * std::sqrt(static_cast<double>(d));
            r.solver_rounds = round;
            return r;
        }
        if (round > 50) fail(ErrorKind::non_convergence, "semidiscrete flow kept finding violated arcs");
    }
}

SemidiscreteResult semidiscrete_w2(const PointSet& p, int grid_per_point) {
    if (grid_per_point < 1) fail(ErrorKind::config, "grid-per-point must be >= 1");
    if (p.empty()) return empty_sample(p, grid_per_point);
    if (p.window.d == 1) return semidiscrete_circle(p, grid_per_point);
    return semidiscrete_flow(p, grid_per_point);
}

}  // namespace hm::transport
