#pragma once

// Independent check for the capacity LP on small graphs: path-flow
// formulation, exact rational arithmetic, feasibility-only simplex, and a
// golden-section search over the query rate. Shares no code with the arc-flow
// solver in capacity.hpp.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <gmpxx.h>

#include "incomp/capacity.hpp"
#include "incomp/errors.hpp"
#include "incomp/topology.hpp"

namespace incomp {

inline constexpr std::size_t kOracleMaxNodes = 6;
inline constexpr std::size_t kOracleMaxEdges = 10;

namespace oracle {

using Path = std::vector<std::size_t>;  // edge indices

inline std::vector<Path> simple_paths(const Topology& t, NodeId from, NodeId to) {
  std::vector<Path> out;
  if (from == to) {
    out.emplace_back();
    return out;
  }
  std::vector<bool> on_path(t.node_count(), false);
  Path current;
  std::function<void(NodeId)> dfs = [&](NodeId v) {
    if (v == to) {
      out.push_back(current);
      return;
    }
    on_path[v] = true;
    for (const auto& nb : t.neighbors(v)) {
      if (on_path[nb.node]) continue;
      current.push_back(nb.edge);
      dfs(nb.node);
      current.pop_back();
    }
    on_path[v] = false;
  };
  dfs(from);
  return out;
}

// Phase-one simplex: is {x >= 0 : A_eq x = b_eq, A_le x <= b_le} non-empty?
// Right-hand sides must be non-negative.
class RationalFeasibility {
 public:
  explicit RationalFeasibility(std::size_t vars) : vars_(vars) {}

  void add_eq(std::vector<mpq_class> row, mpq_class rhs) { eq_.push_back({std::move(row), std::move(rhs)}); }
  void add_le(std::vector<mpq_class> row, mpq_class rhs) { le_.push_back({std::move(row), std::move(rhs)}); }

  bool feasible() const {
    const std::size_t m = eq_.size() + le_.size();
    // columns: structural | slacks (one per <= row) | artificials (one per = row) | rhs
    const std::size_t slack0 = vars_;
    const std::size_t art0 = slack0 + le_.size();
    const std::size_t n = art0 + eq_.size();
    std::vector<std::vector<mpq_class>> tab(m, std::vector<mpq_class>(n + 1));
    std::vector<std::size_t> basis(m);
    std::size_t r = 0;
    for (std::size_t i = 0; i < le_.size(); ++i, ++r) {
      for (std::size_t j = 0; j < vars_; ++j) tab[r][j] = le_[i].row[j];
      tab[r][slack0 + i] = 1;
      tab[r][n] = le_[i].rhs;
      basis[r] = slack0 + i;
    }
    for (std::size_t i = 0; i < eq_.size(); ++i, ++r) {
      for (std::size_t j = 0; j < vars_; ++j) tab[r][j] = eq_[i].row[j];
      tab[r][art0 + i] = 1;
      tab[r][n] = eq_[i].rhs;
      basis[r] = art0 + i;
    }
    // Minimise the artificial sum: reduced costs d_j = -sum of artificial rows.
    std::vector<mpq_class> cost(n + 1);
    for (std::size_t i = le_.size(); i < m; ++i)
      for (std::size_t j = 0; j <= n; ++j)
        if (j < art0 || j == n) cost[j] -= tab[i][j];

    while (true) {
      // Bland: lowest column with a negative reduced cost.
      std::size_t enter = n;
      for (std::size_t j = 0; j < n; ++j)
        if (sgn(cost[j]) < 0) {
          enter = j;
          break;
        }
      if (enter == n) break;
      std::size_t leave = m;
      mpq_class best;
      for (std::size_t i = 0; i < m; ++i) {
        if (sgn(tab[i][enter]) <= 0) continue;
        mpq_class ratio = tab[i][n] / tab[i][enter];
        if (leave == m || ratio < best || (ratio == best && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m) break;  // cannot happen for a bounded phase-one problem
      pivot(tab, cost, leave, enter);
      basis[leave] = enter;
    }
    return sgn(cost[n]) == 0;
  }

 private:
  struct Row {
    std::vector<mpq_class> row;
    mpq_class rhs;
  };

  static void pivot(std::vector<std::vector<mpq_class>>& tab, std::vector<mpq_class>& cost, std::size_t leave,
                    std::size_t enter) {
    auto& prow = tab[leave];
    const mpq_class pv = prow[enter];
    std::vector<std::size_t> nz;
    for (std::size_t j = 0; j < prow.size(); ++j) {
      if (sgn(prow[j]) == 0) continue;
      prow[j] /= pv;
      nz.push_back(j);
    }
    auto eliminate = [&](std::vector<mpq_class>& row) {
      if (sgn(row[enter]) == 0) return;
      const mpq_class f = row[enter];
      for (std::size_t j : nz) row[j] -= f * prow[j];
    };
    for (std::size_t i = 0; i < tab.size(); ++i)
      if (i != leave) eliminate(tab[i]);
    eliminate(cost);
  }

  std::size_t vars_;
  std::vector<Row> eq_;
  std::vector<Row> le_;
};

}  // namespace oracle

// Path-flow feasibility of a total query rate, decided exactly.
class PathFlowOracle {
 public:
  explicit PathFlowOracle(const CapacityProblem& p) : p_(p) {
    const Topology& t = *p.topology;
    if (t.node_count() > kOracleMaxNodes || t.edges().size() > kOracleMaxEdges)
      throw InstanceTooLarge("oracle instance exceeds " + std::to_string(kOracleMaxNodes) + " nodes / " +
                             std::to_string(kOracleMaxEdges) + " edges");
    if (p.mode == BoundMode::single) {
      comps_.push_back(p.single_comp);
    } else {
      for (std::size_t c = 0; c < t.computation_count(); ++c) comps_.push_back(c);
    }
    for (std::size_t c : comps_) {
      const NodeId n = t.computation_nodes()[c].node;
      paths_.push_back({oracle::simple_paths(t, t.s1(), n), oracle::simple_paths(t, t.s2(), n),
                        oracle::simple_paths(t, n, t.destination())});
    }
  }

  double upper_limit() const {
    double u = 0.0;
    for (std::size_t c : comps_) u += static_cast<double>(p_.topology->computation_nodes()[c].capacity);
    return u;
  }

  bool feasible(const mpq_class& lambda) const {
    const Topology& t = *p_.topology;
    // variables: rate per node considered, then one flow per path
    std::size_t vars = comps_.size();
    std::vector<std::array<std::size_t, 3>> offset(comps_.size());
    for (std::size_t r = 0; r < comps_.size(); ++r)
      for (int k = 0; k < 3; ++k) {
        offset[r][k] = vars;
        vars += paths_[r][k].size();
      }
    oracle::RationalFeasibility lp(vars);

    std::vector<mpq_class> total(vars);
    for (std::size_t r = 0; r < comps_.size(); ++r) total[r] = 1;
    lp.add_eq(total, lambda);
    for (std::size_t r = 0; r < comps_.size(); ++r) {
      std::vector<mpq_class> row(vars);
      row[r] = 1;
      lp.add_le(row, t.computation_nodes()[comps_[r]].capacity);
      for (int k = 0; k < 3; ++k) {
        const auto& ps = paths_[r][k];
        if (ps.size() == 1 && ps[0].empty()) continue;  // source == sink
        std::vector<mpq_class> demand(vars);
        for (std::size_t q = 0; q < ps.size(); ++q) demand[offset[r][k] + q] = 1;
        // sum of path flows - rate = 0, written with a non-negative rhs
        demand[r] = -1;
        lp.add_eq(demand, 0);
      }
    }
    const std::size_t arcs = p_.directed_capacity ? 2 : 1;
    for (std::size_t e = 0; e < t.edges().size(); ++e) {
      for (std::size_t dir = 0; dir < arcs; ++dir) {
        std::vector<mpq_class> row(vars);
        bool used = false;
        for (std::size_t r = 0; r < comps_.size(); ++r)
          for (int k = 0; k < 3; ++k) {
            const NodeId start = k == 2 ? t.computation_nodes()[comps_[r]].node : t.source(k + 1);
            const auto& ps = paths_[r][k];
            for (std::size_t q = 0; q < ps.size(); ++q) {
              NodeId at = start;
              for (std::size_t edge : ps[q]) {
                const Edge& ed = t.edges()[edge];
                const bool forward = at == ed.a;
                if (edge == e && (!p_.directed_capacity || forward == (dir == 0))) {
                  row[offset[r][k] + q] += 1;
                  used = true;
                }
                at = ed.other(at);
              }
            }
          }
        if (used) lp.add_le(row, t.edges()[e].capacity);
      }
    }
    return lp.feasible();
  }

 private:
  CapacityProblem p_;
  std::vector<std::size_t> comps_;
  std::vector<std::array<std::vector<oracle::Path>, 3>> paths_;
};

// lambda* by golden-section search on g(l) = l if feasible else -l, which is
// unimodal with its peak at lambda*.
inline double oracle_lambda_star(const CapacityProblem& p, double tolerance = 1e-9) {
  const PathFlowOracle oracle(p);
  const double hi0 = oracle.upper_limit();
  if (hi0 <= 0.0) return 0.0;
  auto g = [&](double l) { return oracle.feasible(mpq_class(l)) ? l : -l; };
  if (g(hi0) > 0) return hi0;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = hi0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double g1 = g(x1);
  double g2 = g(x2);
  while (hi - lo > tolerance) {
    if (g1 >= g2) {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - inv_phi * (hi - lo);
      g1 = g(x1);
    } else {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + inv_phi * (hi - lo);
      g2 = g(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace incomp
