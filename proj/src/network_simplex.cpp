#include "tgw/network_simplex.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>

namespace tgw {

namespace {
constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
}

TransportSimplex::TransportSimplex(const Matrix& cost, std::vector<std::int64_t> supply,
                                   std::vector<std::int64_t> demand)
    : n_(cost.rows()), m_(cost.cols()) {
  require(static_cast<std::int64_t>(supply.size()) == n_ &&
              static_cast<std::int64_t>(demand.size()) == m_,
          "supply/demand sizes do not match the cost matrix");
  require(n_ >= 1 && m_ >= 1, "empty transport problem");
  require(cost.allFinite(), "non-finite transport cost");
  const auto total_supply = std::accumulate(supply.begin(), supply.end(), std::int64_t{0});
  const auto total_demand = std::accumulate(demand.begin(), demand.end(), std::int64_t{0});
  require(total_supply == total_demand, "unbalanced transport problem");

  node_num_ = n_ + m_;
  arc_num_ = n_ * m_;
  cost_.resize(static_cast<std::size_t>(arc_num_));
  for (std::int64_t i = 0; i < n_; ++i) {
    for (std::int64_t j = 0; j < m_; ++j) cost_[static_cast<std::size_t>(i * m_ + j)] = cost(i, j);
  }
  supply_.resize(static_cast<std::size_t>(node_num_ + 1));
  for (std::int64_t i = 0; i < n_; ++i) {
    require(supply[static_cast<std::size_t>(i)] >= 0, "negative supply");
    supply_[static_cast<std::size_t>(i)] = supply[static_cast<std::size_t>(i)];
  }
  for (std::int64_t j = 0; j < m_; ++j) {
    require(demand[static_cast<std::size_t>(j)] >= 0, "negative demand");
    supply_[static_cast<std::size_t>(n_ + j)] = -demand[static_cast<std::size_t>(j)];
  }
  init();
}

std::int64_t TransportSimplex::source(std::int64_t arc) const {
  return arc < arc_num_ ? arc / m_ : art_source_[static_cast<std::size_t>(arc - arc_num_)];
}

std::int64_t TransportSimplex::target(std::int64_t arc) const {
  return arc < arc_num_ ? n_ + arc % m_ : art_target_[static_cast<std::size_t>(arc - arc_num_)];
}

double TransportSimplex::arc_cost(std::int64_t arc) const {
  return arc < arc_num_ ? cost_[static_cast<std::size_t>(arc)]
                        : art_cost_[static_cast<std::size_t>(arc - arc_num_)];
}

void TransportSimplex::init() {
  const auto nodes = static_cast<std::size_t>(node_num_ + 1);
  parent_.assign(nodes, 0);
  pred_.assign(nodes, 0);
  thread_.assign(nodes, 0);
  rev_thread_.assign(nodes, 0);
  succ_num_.assign(nodes, 0);
  last_succ_.assign(nodes, 0);
  pred_dir_.assign(nodes, 0);
  pi_.assign(nodes, 0.0);

  art_source_.assign(static_cast<std::size_t>(node_num_), 0);
  art_target_.assign(static_cast<std::size_t>(node_num_), 0);
  art_cost_.assign(static_cast<std::size_t>(node_num_), 0.0);
  flow_.assign(static_cast<std::size_t>(arc_num_ + node_num_), 0);
  state_.assign(static_cast<std::size_t>(arc_num_ + node_num_), kStateLower);

  double max_cost = 0.0;
  double max_abs = 0.0;
  for (double c : cost_) {
    max_cost = std::max(max_cost, c);
    max_abs = std::max(max_abs, std::abs(c));
  }
  const double art_cost = (max_cost + 1.0) * static_cast<double>(node_num_);
  // Reduced costs are differences of potentials of magnitude up to art_cost.
  eps_ = 8.0 * DBL_EPSILON * (art_cost + max_abs);

  root_ = node_num_;
  const auto r = static_cast<std::size_t>(root_);
  parent_[r] = -1;
  pred_[r] = -1;
  thread_[r] = 0;
  rev_thread_[0] = root_;
  succ_num_[r] = node_num_ + 1;
  last_succ_[r] = root_ - 1;
  pi_[r] = 0.0;

  for (std::int64_t u = 0; u < node_num_; ++u) {
    const auto su = static_cast<std::size_t>(u);
    const std::int64_t e = arc_num_ + u;
    const auto se = static_cast<std::size_t>(e);
    parent_[su] = root_;
    pred_[su] = e;
    thread_[su] = u + 1;
    rev_thread_[su + 1] = u;
    succ_num_[su] = 1;
    last_succ_[su] = u;
    state_[se] = kStateTree;
    if (supply_[su] >= 0) {
      pred_dir_[su] = kDirUp;
      pi_[su] = 0.0;
      art_source_[su] = u;
      art_target_[su] = root_;
      flow_[se] = supply_[su];
      art_cost_[su] = 0.0;
    } else {
      pred_dir_[su] = kDirDown;
      pi_[su] = art_cost;
      art_source_[su] = root_;
      art_target_[su] = u;
      flow_[se] = -supply_[su];
      art_cost_[su] = art_cost;
    }
  }

  block_size_ = std::max<std::int64_t>(
      10, static_cast<std::int64_t>(std::sqrt(static_cast<double>(arc_num_))));
  next_arc_ = 0;
}

bool TransportSimplex::find_entering_arc() {
  double best = -eps_;
  bool found = false;
  std::int64_t cnt = block_size_;
  std::int64_t e = next_arc_;
  std::int64_t i = e / m_;
  std::int64_t j = e % m_;
  const double* cost = cost_.data();
  const signed char* state = state_.data();
  const double* pi = pi_.data();
  for (std::int64_t k = 0; k < arc_num_; ++k) {
    const double c = state[e] * (cost[e] + pi[i] - pi[n_ + j]);
    if (c < best) {
      best = c;
      in_arc_ = e;
      found = true;
    }
    ++e;
    if (++j == m_) {
      j = 0;
      if (++i == n_) {
        i = 0;
        e = 0;
      }
    }
    if (--cnt == 0) {
      if (found) {
        next_arc_ = e;
        return true;
      }
      cnt = block_size_;
    }
  }
  next_arc_ = e;
  return found;
}

void TransportSimplex::find_join_node() {
  std::int64_t u = source(in_arc_);
  std::int64_t v = target(in_arc_);
  while (u != v) {
    if (succ_num_[static_cast<std::size_t>(u)] < succ_num_[static_cast<std::size_t>(v)]) {
      u = parent_[static_cast<std::size_t>(u)];
    } else {
      v = parent_[static_cast<std::size_t>(v)];
    }
  }
  join_ = u;
}

bool TransportSimplex::find_leaving_arc() {
  // Entering arcs are always at their lower bound here.
  const std::int64_t first = source(in_arc_);
  const std::int64_t second = target(in_arc_);
  delta_ = kInf;
  int result = 0;
  for (std::int64_t u = first; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
    const auto su = static_cast<std::size_t>(u);
    const std::int64_t d = pred_dir_[su] == kDirDown ? kInf : flow_[static_cast<std::size_t>(pred_[su])];
    if (d < delta_) {
      delta_ = d;
      u_out_ = u;
      result = 1;
    }
  }
  for (std::int64_t u = second; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
    const auto su = static_cast<std::size_t>(u);
    const std::int64_t d = pred_dir_[su] == kDirUp ? kInf : flow_[static_cast<std::size_t>(pred_[su])];
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

void TransportSimplex::change_flow() {
  if (delta_ > 0) {
    const std::int64_t val = delta_;
    flow_[static_cast<std::size_t>(in_arc_)] += val;
    for (std::int64_t u = source(in_arc_); u != join_; u = parent_[static_cast<std::size_t>(u)]) {
      const auto su = static_cast<std::size_t>(u);
      flow_[static_cast<std::size_t>(pred_[su])] -= pred_dir_[su] * val;
    }
    for (std::int64_t u = target(in_arc_); u != join_; u = parent_[static_cast<std::size_t>(u)]) {
      const auto su = static_cast<std::size_t>(u);
      flow_[static_cast<std::size_t>(pred_[su])] += pred_dir_[su] * val;
    }
  }
  state_[static_cast<std::size_t>(in_arc_)] = kStateTree;
  state_[static_cast<std::size_t>(pred_[static_cast<std::size_t>(u_out_)])] = kStateLower;
}

void TransportSimplex::update_tree() {
  auto& parent = parent_;
  auto& thread = thread_;
  auto& rev_thread = rev_thread_;
  auto& succ_num = succ_num_;
  auto& last_succ = last_succ_;
  auto& pred = pred_;
  auto& pred_dir = pred_dir_;
  auto at = [](std::int64_t k) { return static_cast<std::size_t>(k); };

  const std::int64_t old_rev_thread = rev_thread[at(u_out_)];
  const std::int64_t old_succ_num = succ_num[at(u_out_)];
  const std::int64_t old_last_succ = last_succ[at(u_out_)];
  v_out_ = parent[at(u_out_)];

  if (u_in_ == u_out_) {
    parent[at(u_in_)] = v_in_;
    pred[at(u_in_)] = in_arc_;
    pred_dir[at(u_in_)] = u_in_ == source(in_arc_) ? kDirUp : kDirDown;

    if (thread[at(v_in_)] != u_out_) {
      std::int64_t after = thread[at(old_last_succ)];
      thread[at(old_rev_thread)] = after;
      rev_thread[at(after)] = old_rev_thread;
      after = thread[at(v_in_)];
      thread[at(v_in_)] = u_out_;
      rev_thread[at(u_out_)] = v_in_;
      thread[at(old_last_succ)] = after;
      rev_thread[at(after)] = old_last_succ;
    }
  } else {
    const std::int64_t thread_continue =
        old_rev_thread == v_in_ ? thread[at(old_last_succ)] : thread[at(v_in_)];

    // Re-hang the stem nodes between u_in and u_out.
    std::int64_t stem = u_in_;
    std::int64_t par_stem = v_in_;
    std::int64_t next_stem = 0;
    std::int64_t last = last_succ[at(u_in_)];
    std::int64_t before = 0;
    std::int64_t after = thread[at(last)];
    thread[at(v_in_)] = u_in_;
    dirty_revs_.clear();
    dirty_revs_.push_back(v_in_);
    while (stem != u_out_) {
      next_stem = parent[at(stem)];
      thread[at(last)] = next_stem;
      dirty_revs_.push_back(last);

      before = rev_thread[at(stem)];
      thread[at(before)] = after;
      rev_thread[at(after)] = before;

      parent[at(stem)] = par_stem;
      par_stem = stem;
      stem = next_stem;

      last = last_succ[at(stem)] == last_succ[at(par_stem)] ? rev_thread[at(par_stem)]
                                                              : last_succ[at(stem)];
      after = thread[at(last)];
    }
    parent[at(u_out_)] = par_stem;
    thread[at(last)] = thread_continue;
    rev_thread[at(thread_continue)] = last;
    last_succ[at(u_out_)] = last;

    if (old_rev_thread != v_in_) {
      thread[at(old_rev_thread)] = after;
      rev_thread[at(after)] = old_rev_thread;
    }

    for (std::int64_t u : dirty_revs_) rev_thread[at(thread[at(u)])] = u;

    std::int64_t tmp_sc = 0;
    const std::int64_t tmp_ls = last_succ[at(u_out_)];
    for (std::int64_t u = u_out_, p = parent[at(u)]; u != u_in_; u = p, p = parent[at(u)]) {
      pred[at(u)] = pred[at(p)];
      pred_dir[at(u)] = static_cast<signed char>(-pred_dir[at(p)]);
      tmp_sc += succ_num[at(u)] - succ_num[at(p)];
      succ_num[at(u)] = tmp_sc;
      last_succ[at(p)] = tmp_ls;
    }
    pred[at(u_in_)] = in_arc_;
    pred_dir[at(u_in_)] = u_in_ == source(in_arc_) ? kDirUp : kDirDown;
    succ_num[at(u_in_)] = old_succ_num;
  }

  const std::int64_t up_limit_out = last_succ[at(join_)] == v_in_ ? join_ : -1;
  const std::int64_t last_succ_out = last_succ[at(u_out_)];
  for (std::int64_t u = v_in_; u != -1 && last_succ[at(u)] == v_in_; u = parent[at(u)]) {
    last_succ[at(u)] = last_succ_out;
  }

  if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
    for (std::int64_t u = v_out_; u != up_limit_out && last_succ[at(u)] == old_last_succ;
         u = parent[at(u)]) {
      last_succ[at(u)] = old_rev_thread;
    }
  } else if (last_succ_out != old_last_succ) {
    for (std::int64_t u = v_out_; u != up_limit_out && last_succ[at(u)] == old_last_succ;
         u = parent[at(u)]) {
      last_succ[at(u)] = last_succ_out;
    }
  }

  for (std::int64_t u = v_in_; u != join_; u = parent[at(u)]) succ_num[at(u)] += old_succ_num;
  for (std::int64_t u = v_out_; u != join_; u = parent[at(u)]) succ_num[at(u)] -= old_succ_num;
}

void TransportSimplex::update_potential() {
  const auto at = [](std::int64_t k) { return static_cast<std::size_t>(k); };
  const double sigma =
      pi_[at(v_in_)] - pi_[at(u_in_)] - pred_dir_[at(u_in_)] * arc_cost(in_arc_);
  const std::int64_t end = thread_[at(last_succ_[at(u_in_)])];
  for (std::int64_t u = u_in_; u != end; u = thread_[at(u)]) pi_[at(u)] += sigma;
}

TransportSimplex::Result TransportSimplex::run(std::int64_t max_pivots) {
  Result result;
  while (max_pivots < 0 || result.pivots < max_pivots) {
    if (!find_entering_arc()) {
      result.optimal = true;
      break;
    }
    find_join_node();
    const bool change = find_leaving_arc();
    if (!change || delta_ == kInf) throw SolverError("transport simplex: unbounded pivot");
    change_flow();
    update_tree();
    update_potential();
    ++result.pivots;
  }
  for (std::int64_t e = arc_num_; e < arc_num_ + node_num_; ++e) {
    if (flow_[static_cast<std::size_t>(e)] != 0 && result.optimal) {
      throw SolverError("transport simplex: infeasible supplies");
    }
  }
  result.flow.assign(flow_.begin(), flow_.begin() + arc_num_);
  double objective = 0.0;
  for (std::int64_t e = 0; e < arc_num_; ++e) {
    if (result.flow[static_cast<std::size_t>(e)] != 0) {
      objective += static_cast<double>(result.flow[static_cast<std::size_t>(e)]) *
                   cost_[static_cast<std::size_t>(e)];
    }
  }
  result.objective = objective;
  return result;
}

}  // namespace tgw
