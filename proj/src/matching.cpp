#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <tuple>

#include "hypermatch/error.hpp"
#include "hypermatch/rng.hpp"
#include "transport_internal.hpp"

namespace hm::transport {

namespace {

void check_same_window(const PointSet& a, const PointSet& b) {
    if (!a.window.same_as(b.window)) fail(ErrorKind::dimension, "point sets live on different windows");
}

double dist(const PointSet& a, int i, const PointSet& b, int j) {
    return std::sqrt(geom::toroidal_distance_sq(a.point(i), b.point(j), a.window.d, a.window.side));
}

std::vector<int> iota_vec(int n) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = i;
    return v;
}

// Sorted candidate lists are refilled in chunks so memory stays O(|a| · chunk).
struct Candidates {
    std::vector<std::pair<double, int>> list;
    std::size_t pos = 0;
};

constexpr std::size_t chunk = 24;

void refill(const PointSet& a, int i, const PointSet& b, const std::vector<int>& ib,
            Candidates& c) {
    std::pair<double, int> last{-1.0, -1};
    const bool have_last = !c.list.empty();
    if (have_last) last = c.list.back();
    std::vector<std::pair<double, int>> next;
    next.reserve(ib.size());
    for (std::size_t t = 0; t < ib.size(); ++t) {
        std::pair<double, int> key{dist(a, i, b, ib[t]), static_cast<int>(t)};
        if (!have_last || key > last) next.push_back(key);
    }
    const std::size_t take = std::min(chunk, next.size());
    std::partial_sort(next.begin(), next.begin() + take, next.end());
    next.resize(take);
    c.list = std::move(next);
    c.pos = 0;
}

}  // namespace

std::vector<std::pair<int, int>> greedy_pairs(const PointSet& a, const std::vector<int>& ia,
                                              const PointSet& b, const std::vector<int>& ib) {
    std::vector<std::pair<int, int>> out;
    if (ia.empty() || ib.empty()) return out;
    const std::size_t target = std::min(ia.size(), ib.size());
    std::vector<char> taken_b(ib.size(), 0);
    std::vector<Candidates> cand(ia.size());
    // (distance, a index, position in ib, slot in ia); position order equals
    // b-index order when ib is sorted.
    using Item = std::tuple<double, int, int, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (std::size_t s = 0; s < ia.size(); ++s) {
        refill(a, ia[s], b, ib, cand[s]);
        if (!cand[s].list.empty()) {
            const auto& f = cand[s].list.front();
            heap.emplace(f.first, ia[s], f.second, s);
        }
    }
    while (!heap.empty() && out.size() < target) {
        const auto [d, i, t, s] = heap.top();
        heap.pop();
        if (!taken_b[t]) {
            taken_b[t] = 1;
            out.emplace_back(i, ib[t]);
            continue;
        }
        Candidates& c = cand[s];
        if (++c.pos >= c.list.size()) {
            refill(a, i, b, ib, c);
            if (c.list.empty()) continue;
        }
        const auto& f = c.list[c.pos];
        heap.emplace(f.first, i, f.second, s);
    }
    return out;
}

MatchResult exact_matching(const PointSet& a, const PointSet& b, const CostFn& cost) {
    check_same_window(a, b);
    if (a.size() != b.size()) fail(ErrorKind::cardinality_mismatch, "exact matching needs |a| = |b|");
    if (a.empty()) fail(ErrorKind::empty_input, "exact matching needs nonempty inputs");
    const int n = static_cast<int>(a.size());
    std::vector<double> dmat(static_cast<std::size_t>(n) * n), cmat(dmat.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = dist(a, i, b, j);
            dmat[static_cast<std::size_t>(i) * n + j] = x;
            cmat[static_cast<std::size_t>(i) * n + j] = cost(x);
        }
    const std::vector<int> perm = solve_assignment(cmat, n);
    MatchResult r;
    for (int i = 0; i < n; ++i) {
        const double x = dmat[static_cast<std::size_t>(i) * n + perm[i]];
        r.pairs.emplace_back(i, perm[i]);
        r.distances.push_back(x);
        r.levels.push_back(-1);
        r.total_cost += cost(x);
    }
    return r;
}

MatchResult stable_matching(const PointSet& a, const PointSet& b) {
    check_same_window(a, b);
    if (a.size() != b.size()) fail(ErrorKind::cardinality_mismatch, "stable matching needs |a| = |b|");
    const int n = static_cast<int>(a.size());
    auto pairs = greedy_pairs(a, iota_vec(n), b, iota_vec(n));
    std::sort(pairs.begin(), pairs.end());
    MatchResult r;
    for (const auto& [i, j] : pairs) {
        const double x = dist(a, i, b, j);
        r.pairs.emplace_back(i, j);
        r.distances.push_back(x);
        r.levels.push_back(-1);
        r.total_cost += x;
    }
    return r;
}

MatchResult dyadic_matching(const PointSet& a, const PointSet& b, std::uint64_t seed,
                            DyadicInfo* info) {
    check_same_window(a, b);
    const geom::Window& w = a.window;
    const int d = w.d;
    if (!w.side_is_integer()) fail(ErrorKind::incompatible_window, "dyadic matching needs side = 2^K");
    const long side = std::lround(w.side);
    int K = 0;
    while ((1L << K) < side) ++K;
    if ((1L << K) != side) fail(ErrorKind::incompatible_window, "dyadic matching needs side = 2^K");

    CounterRng rng(seed);
    std::vector<long> offset(d, 0);  // U_k, integer entries
    DyadicInfo local;
    local.levels = K;

    std::vector<char> used_a(a.size(), 0), used_b(b.size(), 0);
    MatchResult r;
    auto cube_of = [&](const double* x, long cube) {
        const long cells = side / cube;
        long id = 0;
        for (int k = 0; k < d; ++k) {
            const double y = x[k] + 0.5 * w.side - static_cast<double>(offset[k]);
            long c = static_cast<long>(std::floor(y / static_cast<double>(cube)));
            c %= cells;
            if (c < 0) c += cells;
            id = id * cells + c;
        }
        return id;
    };

    for (int k = 1; k <= K; ++k) {
        // U_k = U_{k−1} + 2^{k−1} Z_{k−1}
        for (int i = 0; i < d; ++i)
            if (rng() >> 63) offset[i] += 1L << (k - 1);
        const long cube = 1L << k;
        std::map<long, std::pair<std::vector<int>, std::vector<int>>> groups;
        std::map<long, std::pair<long, long>> totals;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const long id = cube_of(a.point(i), cube);
            ++totals[id].first;
            if (!used_a[i]) groups[id].first.push_back(static_cast<int>(i));
        }
        for (std::size_t j = 0; j < b.size(); ++j) {
            const long id = cube_of(b.point(j), cube);
            ++totals[id].second;
            if (!used_b[j]) groups[id].second.push_back(static_cast<int>(j));
        }
        for (auto& [id, g] : groups) {
            for (const auto& [i, j] : greedy_pairs(a, g.first, b, g.second)) {
                used_a[i] = used_b[j] = 1;
                r.pairs.emplace_back(i, j);
                r.distances.push_back(dist(a, i, b, j));
                r.levels.push_back(k);
            }
        }
        long bound = 0;
        for (const auto& [id, t] : totals) bound += std::abs(t.first - t.second);
        local.imbalance_bound.push_back(static_cast<int>(bound));
        local.unmatched_after.push_back(
            static_cast<int>(std::count(used_a.begin(), used_a.end(), 0)));
    }

    std::vector<int> rest_a, rest_b;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!used_a[i]) rest_a.push_back(static_cast<int>(i));
    for (std::size_t j = 0; j < b.size(); ++j)
        if (!used_b[j]) rest_b.push_back(static_cast<int>(j));
    if (!rest_a.empty() && !rest_b.empty()) {
        const bool flip = rest_a.size() > rest_b.size();
        const std::vector<int>& rows = flip ? rest_b : rest_a;
        const std::vector<int>& cols = flip ? rest_a : rest_b;
        const int nr = static_cast<int>(rows.size()), nc = static_cast<int>(cols.size());
        std::vector<double> cm(static_cast<std::size_t>(nr) * nc);
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < nc; ++j)
                cm[static_cast<std::size_t>(i) * nc + j] =
                    flip ? dist(a, cols[j], b, rows[i]) : dist(a, rows[i], b, cols[j]);
        const std::vector<int> col = solve_rectangular_assignment(cm, nr, nc);
        for (int i = 0; i < nr; ++i) {
            const int ia = flip ? cols[col[i]] : rows[i];
            const int jb = flip ? rows[i] : cols[col[i]];
            used_a[ia] = used_b[jb] = 1;
            r.pairs.emplace_back(ia, jb);
            r.distances.push_back(dist(a, ia, b, jb));
            r.levels.push_back(K + 1);
            ++local.closure_pairs;
        }
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!used_a[i]) r.unmatched_source.push_back(static_cast<int>(i));
    for (std::size_t j = 0; j < b.size(); ++j)
        if (!used_b[j]) r.unmatched_target.push_back(static_cast<int>(j));
    for (double x : r.distances) r.total_cost += x;
    if (info) *info = std::move(local);
    return r;
}

double mean_nn_spacing(const PointSet& p) {
    const std::size_t n = p.size();
    if (n < 2) fail(ErrorKind::empty_input, "nearest-neighbour spacing needs two points");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i)
                best = std::min(best, geom::toroidal_distance_sq(p.point(i), p.point(j), p.window.d,
                                                                 p.window.side));
        total += std::sqrt(best);
    }
    return total / n;
}

}  // namespace hm::transport
