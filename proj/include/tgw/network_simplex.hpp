#pragma once

#include "tgw/common.hpp"

#include <cstdint>
#include <vector>

namespace tgw {

// Primal network simplex on the complete bipartite transport network with
// integer supplies and real costs. Block-search pivoting over a strongly
// feasible spanning tree; the returned flow is a vertex of the transport
// polytope, so at most n + m - 1 arcs carry flow.
class TransportSimplex {
 public:
  struct Result {
    std::vector<std::int64_t> flow;  // row-major n x m
    double objective = 0.0;
    std::int64_t pivots = 0;
    bool optimal = false;
  };

  // `cost` is n x m; supply.sum() must equal demand.sum().
  TransportSimplex(const Matrix& cost, std::vector<std::int64_t> supply,
                   std::vector<std::int64_t> demand);

  Result run(std::int64_t max_pivots = -1);

  // Node potentials after run(): reduced cost of arc (i, j) is
  // cost(i, j) + potential(i) - potential(n + j).
  const std::vector<double>& potentials() const { return pi_; }

 private:
  static constexpr int kStateTree = 0;
  static constexpr int kStateLower = 1;
  static constexpr int kDirUp = 1;
  static constexpr int kDirDown = -1;

  std::int64_t source(std::int64_t arc) const;
  std::int64_t target(std::int64_t arc) const;
  double arc_cost(std::int64_t arc) const;

  void init();
  bool find_entering_arc();
  void find_join_node();
  bool find_leaving_arc();
  void change_flow();
  void update_tree();
  void update_potential();

  std::int64_t n_ = 0;
  std::int64_t m_ = 0;
  std::int64_t node_num_ = 0;
  std::int64_t arc_num_ = 0;  // real arcs
  std::vector<double> cost_;  // row-major real arc costs
  std::vector<std::int64_t> supply_;

  // artificial arcs: index arc_num_ + u connects node u and the root
  std::vector<std::int64_t> art_source_;
  std::vector<std::int64_t> art_target_;
  std::vector<double> art_cost_;

  std::vector<std::int64_t> flow_;
  std::vector<signed char> state_;

  std::vector<std::int64_t> parent_;
  std::vector<std::int64_t> pred_;
  std::vector<std::int64_t> thread_;
  std::vector<std::int64_t> rev_thread_;
  std::vector<std::int64_t> succ_num_;
  std::vector<std::int64_t> last_succ_;
  std::vector<signed char> pred_dir_;
  std::vector<std::int64_t> dirty_revs_;
  std::vector<double> pi_;

  std::int64_t root_ = 0;
  std::int64_t in_arc_ = 0;
  std::int64_t join_ = 0;
  std::int64_t u_in_ = 0;
  std::int64_t v_in_ = 0;
  std::int64_t u_out_ = 0;
  std::int64_t v_out_ = 0;
  std::int64_t delta_ = 0;

  std::int64_t block_size_ = 0;
  std::int64_t next_arc_ = 0;
  double eps_ = 0.0;
};

}  // namespace tgw
