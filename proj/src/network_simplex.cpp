#include "hypermatch/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hypermatch/error.hpp"

namespace hm::transport {

namespace {

constexpr signed char state_upper = -1;
constexpr signed char state_tree = 0;
constexpr signed char state_lower = 1;
constexpr signed char dir_up = 1;
constexpr signed char dir_down = -1;
constexpr std::int64_t inf_flow = std::numeric_limits<std::int64_t>::max() / 4;

}  // namespace

NetworkSimplex::NetworkSimplex(int nodes) : node_num_(nodes), supply_in_(nodes, 0) {
    if (nodes < 1) fail(ErrorKind::empty_input, "network needs at least one node");
}

int NetworkSimplex::add_arc(int source, int target, double cost) {
    if (source < 0 || source >= node_num_ || target < 0 || target >= node_num_)
        fail(ErrorKind::dimension, "arc endpoint out of range");
    arc_source_.push_back(source);
    arc_target_.push_back(target);
    arc_cost_.push_back(cost);
    if (initialized_) {
        // Warm start: a new arc enters as nonbasic at zero flow, which keeps the
        // current basis primal feasible.
        source_.push_back(source);
        target_.push_back(target);
        cost_.push_back(cost);
        flow_.push_back(0);
        state_.push_back(state_lower);
        ++all_arc_num_;
    }
    return static_cast<int>(arc_source_.size()) - 1;
}

void NetworkSimplex::set_supply(int node, std::int64_t supply) {
    if (initialized_) fail(ErrorKind::unsupported_case, "supplies are fixed once the simplex has run");
    supply_in_[node] = supply;
}

double NetworkSimplex::total_cost() const {
    double c = 0.0;
    for (int e = node_num_; e < all_arc_num_; ++e) c += static_cast<double>(flow_[e]) * cost_[e];
    return c;
}

void NetworkSimplex::init() {
    // Artificial root arcs occupy [0, node_num_), real arcs follow, so arcs
    // added later can be appended.
    const int arc_num = static_cast<int>(arc_source_.size());
    all_arc_num_ = arc_num + node_num_;
    root_ = node_num_;
    const int all_nodes = node_num_ + 1;

    source_.assign(all_arc_num_, 0);
    target_.assign(all_arc_num_, 0);
    cost_.assign(all_arc_num_, 0.0);
    flow_.assign(all_arc_num_, 0);
    state_.assign(all_arc_num_, state_lower);
    supply_.assign(all_nodes, 0);
    pi_.assign(all_nodes, 0.0);
    parent_.assign(all_nodes, -1);
    pred_.assign(all_nodes, -1);
    thread_.assign(all_nodes, 0);
    rev_thread_.assign(all_nodes, 0);
    succ_num_.assign(all_nodes, 0);
    last_succ_.assign(all_nodes, 0);
    pred_dir_.assign(all_nodes, dir_up);

    double max_cost = 0.0;
    for (int k = 0; k < arc_num; ++k) {
        const int e = node_num_ + k;
        source_[e] = arc_source_[k];
        target_[e] = arc_target_[k];
        cost_[e] = arc_cost_[k];
        max_cost = std::max(max_cost, std::abs(cost_[e]));
    }
    eps_ = 1e-12 * std::max(1.0, max_cost);
    const double art_cost = (max_cost + 1.0) * all_nodes;

    std::int64_t sum = 0;
    for (int u = 0; u < node_num_; ++u) {
        supply_[u] = supply_in_[u];
        sum += supply_[u];
    }
    supply_[root_] = -sum;

    parent_[root_] = -1;
    pred_[root_] = -1;
    thread_[root_] = 0;
    rev_thread_[0] = root_;
    succ_num_[root_] = all_nodes;
    last_succ_[root_] = root_ - 1;
    pi_[root_] = 0.0;

    for (int u = 0, e = 0; u < node_num_; ++u, ++e) {
        parent_[u] = root_;
        pred_[u] = e;
        thread_[u] = u + 1;
        rev_thread_[u + 1] = u;
        succ_num_[u] = 1;
        last_succ_[u] = u;
        state_[e] = state_tree;
        if (supply_[u] >= 0) {
            pred_dir_[u] = dir_up;
            pi_[u] = 0.0;
            source_[e] = u;
            target_[e] = root_;
            flow_[e] = supply_[u];
            cost_[e] = 0.0;
        } else {
            pred_dir_[u] = dir_down;
            pi_[u] = art_cost;
            source_[e] = root_;
            target_[e] = u;
            flow_[e] = -supply_[u];
            cost_[e] = art_cost;
        }
    }

    next_arc_ = node_num_;
    pivots_ = 0;
    initialized_ = true;
}

bool NetworkSimplex::find_entering_arc() {
    double min = 0.0;
    int cnt = block_size_;
    int e;
    for (e = next_arc_; e != all_arc_num_; ++e) {
        const double c = state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]);
        if (c < min) {
            min = c;
            in_arc_ = e;
        }
        if (--cnt == 0) {
            if (min < -eps_) goto found;
            cnt = block_size_;
        }
    }
    for (e = node_num_; e != next_arc_; ++e) {
        const double c = state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]);
        if (c < min) {
            min = c;
            in_arc_ = e;
        }
        if (--cnt == 0) {
            if (min < -eps_) goto found;
            cnt = block_size_;
        }
    }
    if (min >= -eps_) return false;
found:
    next_arc_ = e;
    return true;
}

void NetworkSimplex::find_join_node() {
    int u = source_[in_arc_], v = target_[in_arc_];
    while (u != v) {
        if (succ_num_[u] < succ_num_[v])
            u = parent_[u];
        else
            v = parent_[v];
    }
    join_ = u;
}

bool NetworkSimplex::find_leaving_arc() {
    int first, second;
    if (state_[in_arc_] == state_lower) {
        first = source_[in_arc_];
        second = target_[in_arc_];
    } else {
        first = target_[in_arc_];
        second = source_[in_arc_];
    }
    delta_ = inf_flow;
    int result = 0;
    for (int u = first; u != join_; u = parent_[u]) {
        const int e = pred_[u];
        const std::int64_t d = pred_dir_[u] == dir_down ? inf_flow : flow_[e];
        if (d < delta_) {
            delta_ = d;
            u_out_ = u;
            result = 1;
        }
    }
    for (int u = second; u != join_; u = parent_[u]) {
        const int e = pred_[u];
        const std::int64_t d = pred_dir_[u] == dir_up ? inf_flow : flow_[e];
        if (d <= delta_) {
            delta_ = d;
            u_out_ = u;
            result = 2;
        }
    }
    if (result == 1) {
        u_in_ = first;
        v_in_ = second;
    } else {
        u_in_ = second;
        v_in_ = first;
    }
    return result != 0;
}

void NetworkSimplex::change_flow(bool change) {
    if (delta_ > 0) {
        const std::int64_t val = state_[in_arc_] * delta_;
        flow_[in_arc_] += val;
        for (int u = source_[in_arc_]; u != join_; u = parent_[u])
            flow_[pred_[u]] -= pred_dir_[u] * val;
        for (int u = target_[in_arc_]; u != join_; u = parent_[u])
            flow_[pred_[u]] += pred_dir_[u] * val;
    }
    if (change) {
        state_[in_arc_] = state_tree;
        state_[pred_[u_out_]] = flow_[pred_[u_out_]] == 0 ? state_lower : state_upper;
    } else {
        state_[in_arc_] = static_cast<signed char>(-state_[in_arc_]);
    }
}

void NetworkSimplex::update_tree_structure() {
    const int old_rev_thread = rev_thread_[u_out_];
    const int old_succ_num = succ_num_[u_out_];
    const int old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];

    if (u_in_ == u_out_) {
        parent_[u_in_] = v_in_;
        pred_[u_in_] = in_arc_;
        pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? dir_up : dir_down;
        if (thread_[v_in_] != u_out_) {
            int after = thread_[old_last_succ];
            thread_[old_rev_thread] = after;
            rev_thread_[after] = old_rev_thread;
            after = thread_[v_in_];
            thread_[v_in_] = u_out_;
            rev_thread_[u_out_] = v_in_;
            thread_[old_last_succ] = after;
            rev_thread_[after] = old_last_succ;
        }
    } else {
        const int thread_continue =
            old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];

        int stem = u_in_;
        int par_stem = v_in_;
        int next_stem;
        int last = last_succ_[u_in_];
        int before, after = thread_[last];
        thread_[v_in_] = u_in_;
        dirty_revs_.clear();
        dirty_revs_.push_back(v_in_);
        while (stem != u_out_) {
            next_stem = parent_[stem];
            thread_[last] = next_stem;
            dirty_revs_.push_back(last);

            before = rev_thread_[stem];
            thread_[before] = after;
            rev_thread_[after] = before;

            parent_[stem] = par_stem;
            par_stem = stem;
            stem = next_stem;

            last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem]
                                                           : last_succ_[stem];
            after = thread_[last];
        }
        parent_[u_out_] = par_stem;
        thread_[last] = thread_continue;
        rev_thread_[thread_continue] = last;
        last_succ_[u_out_] = last;

        if (old_rev_thread != v_in_) {
            thread_[old_rev_thread] = after;
            rev_thread_[after] = old_rev_thread;
        }

        for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

        int tmp_sc = 0, tmp_ls = last_succ_[u_out_];
        for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
            pred_[u] = pred_[p];
            pred_dir_[u] = static_cast<signed char>(-pred_dir_[p]);
            tmp_sc += succ_num_[u] - succ_num_[p];
            succ_num_[u] = tmp_sc;
            last_succ_[p] = tmp_ls;
        }
        pred_[u_in_] = in_arc_;
        pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? dir_up : dir_down;
        succ_num_[u_in_] = old_succ_num;
    }

    const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
    const int last_succ_out = last_succ_[u_out_];
    for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u])
        last_succ_[u] = last_succ_out;

    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
        for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
            last_succ_[u] = old_rev_thread;
    } else if (last_succ_out != old_last_succ) {
        for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
            last_succ_[u] = last_succ_out;
    }

    for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
    for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
}

void NetworkSimplex::update_potential() {
    const double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost_[in_arc_];
    const int end = thread_[last_succ_[u_in_]];
    for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
}

NetworkSimplex::Status NetworkSimplex::run() {
    if (!initialized_) init();
    const int real = all_arc_num_ - node_num_;
    block_size_ = std::max(10, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(std::max(1, real))))));
    if (next_arc_ < node_num_ || next_arc_ >= all_arc_num_) next_arc_ = node_num_;
    while (find_entering_arc()) {
        find_join_node();
        const bool change = find_leaving_arc();
        if (delta_ >= inf_flow) return Status::unbounded;
        change_flow(change);
        if (change) {
            update_tree_structure();
            update_potential();
        }
        ++pivots_;
    }
    for (int e = 0; e != node_num_; ++e)
        if (flow_[e] != 0) return Status::infeasible;
    return Status::optimal;
}

}  // namespace hm::transport
