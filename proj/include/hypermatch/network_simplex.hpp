#pragma once

// Primal network simplex for uncapacitated min-cost flow with integer supplies
// and real arc costs. Spanning-tree bases stored as parent/thread lists with a
// block-search pricing rule; artificial root arcs give the initial basis.

#include <cstdint>
#include <vector>

namespace hm::transport {

class NetworkSimplex {
public:
    enum class Status { optimal, infeasible, unbounded };

    explicit NetworkSimplex(int nodes);

    int add_arc(int source, int target, double cost);
    void set_supply(int node, std::int64_t supply);  // > 0 supply, < 0 demand

    // Solves from the current basis. Arcs added after a run are priced in on
    // the next call, so a sequence of runs is a warm-started column generation.
    Status run();

    int nodes() const { return node_num_; }
    int arcs() const { return static_cast<int>(arc_source_.size()); }
    std::int64_t flow(int arc) const { return flow_[node_num_ + arc]; }
    // Duals with reduced cost c(u,v) + pi(u) − pi(v) ≥ 0 on every arc at optimum.
    double potential(int node) const { return pi_[node]; }
    double total_cost() const;
    long pivots() const { return pivots_; }  // cumulative over runs

private:
    void init();
    bool find_entering_arc();
    void find_join_node();
    bool find_leaving_arc();
    void change_flow(bool change);
    void update_tree_structure();
    void update_potential();

    int node_num_;
    std::vector<int> arc_source_, arc_target_;
    std::vector<double> arc_cost_;
    std::vector<std::int64_t> supply_in_;

    // Working arrays over real + artificial arcs and nodes + root.
    bool initialized_ = false;
    int all_arc_num_ = 0, root_ = 0;
    std::vector<int> source_, target_;
    std::vector<double> cost_;
    std::vector<std::int64_t> flow_, supply_;
    std::vector<signed char> state_;
    std::vector<double> pi_;
    std::vector<int> parent_, pred_, thread_, rev_thread_, succ_num_, last_succ_;
    std::vector<signed char> pred_dir_;
    std::vector<int> dirty_revs_;

    int in_arc_ = 0, join_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0, v_out_ = 0;
    std::int64_t delta_ = 0;
    int block_size_ = 0, next_arc_ = 0;
    double eps_ = 0.0;
    long pivots_ = 0;
};

}  // namespace hm::transport
