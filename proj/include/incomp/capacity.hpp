#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "incomp/errors.hpp"
#include "incomp/queueing.hpp"
#include "incomp/topology.hpp"

namespace incomp {

enum class BoundMode { single, multi };

struct CapacityProblem {
  const Topology* topology = nullptr;
  BoundMode mode = BoundMode::multi;
  std::size_t single_comp = 0;  // computation index used in single mode
  // Each direction of an edge gets its own R_ml instead of sharing it.
  bool directed_capacity = false;

  static CapacityProblem single(const Topology& t, std::size_t comp, bool directed = false) {
    return {&t, BoundMode::single, comp, directed};
  }
  static CapacityProblem multi(const Topology& t, bool directed = false) {
    return {&t, BoundMode::multi, 0, directed};
  }
};

struct Commodity {
  std::size_t comp = 0;  // computation index n
  Kind kind = Kind::processed;
  NodeId source = 0;
  NodeId sink = 0;
  std::size_t rate_var = 0;
};

struct Arc {
  std::size_t edge = 0;
  NodeId from = 0;
  NodeId to = 0;
};

// Dense LP in the form  max c.x  s.t.  A x <= b,  x >= 0,  b >= 0.
struct LpTableau {
  static constexpr double kTolerance = 1e-9;

  std::size_t rows = 0;
  std::size_t cols = 0;  // structural variables; slacks are implicit columns cols..cols+rows-1
  std::vector<double> a;  // rows x cols, row-major
  std::vector<double> b;
  std::vector<double> c;

  // Layout bookkeeping for certificates and sanity checks.
  std::vector<Commodity> commodities;
  std::vector<Arc> arcs;
  struct FlowVar {
    std::size_t commodity;
    std::size_t arc;
  };
  std::vector<FlowVar> flow_vars;  // structural columns after the rate variables
  std::size_t rate_vars = 0;
  std::size_t conservation_rows = 0;
  std::size_t capacity_rows = 0;
  std::size_t computation_rows = 0;

  double& at(std::size_t r, std::size_t col) { return a[r * cols + col]; }
  double at(std::size_t r, std::size_t col) const { return a[r * cols + col]; }
};

// Multicommodity-flow LP: three commodities (s1->n, s2->n, n->d) per
// computation node considered, all carrying that node's rate; flow
// conservation at every node, capacity per edge, rate <= C_n.
//
// Conservation rows are written as "net outflow - supply <= 0". Summed over all
// nodes of a commodity the left-hand sides cancel identically, so every
// feasible point satisfies them with equality.
inline LpTableau build_lp(const CapacityProblem& p) {
  const Topology& t = *p.topology;
  LpTableau lp;

  std::vector<std::size_t> comps;
  if (p.mode == BoundMode::single) {
    if (p.single_comp >= t.computation_count()) throw ParseError("single-mode node is not a computation node");
    comps.push_back(p.single_comp);
  } else {
    for (std::size_t c = 0; c < t.computation_count(); ++c) comps.push_back(c);
  }
  lp.rate_vars = comps.size();
  for (std::size_t r = 0; r < comps.size(); ++r) {
    const std::size_t c = comps[r];
    const NodeId n = t.computation_nodes()[c].node;
    lp.commodities.push_back({c, Kind::raw1, t.s1(), n, r});
    lp.commodities.push_back({c, Kind::raw2, t.s2(), n, r});
    lp.commodities.push_back({c, Kind::processed, n, t.destination(), r});
  }
  for (std::size_t e = 0; e < t.edges().size(); ++e) {
    lp.arcs.push_back({e, t.edges()[e].a, t.edges()[e].b});
    lp.arcs.push_back({e, t.edges()[e].b, t.edges()[e].a});
  }
  for (std::size_t k = 0; k < lp.commodities.size(); ++k) {
    const auto& com = lp.commodities[k];
    if (com.source == com.sink) continue;  // degenerate: carries no flow
    for (std::size_t a = 0; a < lp.arcs.size(); ++a) {
      if (lp.arcs[a].from == com.sink) continue;  // no flow out of the commodity's destination
      if (t.edges()[lp.arcs[a].edge].capacity == 0) continue;
      lp.flow_vars.push_back({k, a});
    }
  }
  lp.cols = lp.rate_vars + lp.flow_vars.size();

  std::size_t nondegenerate = 0;
  for (const auto& com : lp.commodities) nondegenerate += com.source != com.sink;
  lp.conservation_rows = nondegenerate * t.node_count();
  lp.capacity_rows = p.directed_capacity ? lp.arcs.size() : t.edges().size();
  lp.computation_rows = comps.size();
  lp.rows = lp.conservation_rows + lp.capacity_rows + lp.computation_rows;
  lp.a.assign(lp.rows * lp.cols, 0.0);
  lp.b.assign(lp.rows, 0.0);
  lp.c.assign(lp.cols, 0.0);
  for (std::size_t r = 0; r < lp.rate_vars; ++r) lp.c[r] = 1.0;

  std::vector<std::size_t> conservation_base(lp.commodities.size(), 0);
  std::size_t row = 0;
  for (std::size_t k = 0; k < lp.commodities.size(); ++k) {
    const auto& com = lp.commodities[k];
    if (com.source == com.sink) continue;
    conservation_base[k] = row;
    lp.at(row + com.source, com.rate_var) -= 1.0;
    lp.at(row + com.sink, com.rate_var) += 1.0;
    row += t.node_count();
  }
  const std::size_t cap_base = row;
  const std::size_t comp_base = cap_base + lp.capacity_rows;
  for (std::size_t v = 0; v < lp.flow_vars.size(); ++v) {
    const auto& fv = lp.flow_vars[v];
    const auto& arc = lp.arcs[fv.arc];
    const std::size_t col = lp.rate_vars + v;
    lp.at(conservation_base[fv.commodity] + arc.from, col) += 1.0;
    lp.at(conservation_base[fv.commodity] + arc.to, col) -= 1.0;
    lp.at(cap_base + (p.directed_capacity ? fv.arc : arc.edge), col) = 1.0;
  }
  if (p.directed_capacity) {
    for (std::size_t a = 0; a < lp.arcs.size(); ++a)
      lp.b[cap_base + a] = static_cast<double>(t.edges()[lp.arcs[a].edge].capacity);
  } else {
    for (std::size_t e = 0; e < t.edges().size(); ++e)
      lp.b[cap_base + e] = static_cast<double>(t.edges()[e].capacity);
  }
  for (std::size_t r = 0; r < comps.size(); ++r) {
    lp.at(comp_base + r, r) = 1.0;
    lp.b[comp_base + r] = static_cast<double>(t.computation_nodes()[comps[r]].capacity);
  }
  return lp;
}

struct LpSolution {
  double objective = 0.0;
  std::vector<double> x;  // structural variables
  std::size_t pivots = 0;
};

// Primal simplex on the dense tableau, starting from the all-slack basis.
// Entering column: most positive reduced cost, switching to Bland's rule
// (lowest index entering, lowest basic index leaving) after a run of
// degenerate pivots; Bland's rule stays on until the objective moves again.
inline LpSolution simplex_maximize(const LpTableau& lp, std::size_t max_pivots = 1'000'000) {
  constexpr double eps = LpTableau::kTolerance;
  const std::size_t m = lp.rows;
  const std::size_t n = lp.cols + lp.rows;
  const std::size_t width = n + 1;
  std::vector<double> tab(m * width, 0.0);
  std::vector<double> obj(width, 0.0);  // reduced costs c_j - z_j, last entry = objective value
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < lp.cols; ++j) tab[r * width + j] = lp.at(r, j);
    tab[r * width + lp.cols + r] = 1.0;
    tab[r * width + n] = lp.b[r];
    basis[r] = lp.cols + r;
  }
  for (std::size_t j = 0; j < lp.cols; ++j) obj[j] = lp.c[j];

  std::size_t pivots = 0;
  std::size_t degenerate_run = 0;
  bool bland = false;
  std::vector<std::size_t> nz;
  nz.reserve(width);
  while (true) {
    std::size_t enter = n;
    if (bland) {
      for (std::size_t j = 0; j < n; ++j)
        if (obj[j] > eps) {
          enter = j;
          break;
        }
    } else {
      double best = eps;
      for (std::size_t j = 0; j < n; ++j)
        if (obj[j] > best) {
          best = obj[j];
          enter = j;
        }
    }
    if (enter == n) break;

    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      const double coef = tab[r * width + enter];
      if (coef <= eps) continue;
      const double ratio = std::max(0.0, tab[r * width + n]) / coef;
      if (ratio < best_ratio - eps ||
          (ratio <= best_ratio + eps && leave < m && basis[r] < basis[leave])) {
        best_ratio = std::min(best_ratio, ratio);
        leave = r;
      }
    }
    if (leave == m) throw LpDegeneracyError("LP is unbounded", obj[n]);

    if (++pivots > max_pivots)
      throw LpDegeneracyError("simplex pivot limit exceeded", -obj[n]);
    if (best_ratio <= eps) {
      if (++degenerate_run > 50) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }

    double* prow = &tab[leave * width];
    const double pv = prow[enter];
    nz.clear();
    for (std::size_t j = 0; j < width; ++j) {
      prow[j] /= pv;
      if (prow[j] != 0.0) nz.push_back(j);
    }
    prow[enter] = 1.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == leave) continue;
      double* row = &tab[r * width];
      const double f = row[enter];
      if (f == 0.0) continue;
      for (std::size_t j : nz) row[j] -= f * prow[j];
      row[enter] = 0.0;
    }
    const double f = obj[enter];
    for (std::size_t j : nz) obj[j] -= f * prow[j];
    obj[enter] = 0.0;
    basis[leave] = enter;
  }

  LpSolution sol;
  sol.pivots = pivots;
  sol.x.assign(lp.cols, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] < lp.cols) sol.x[basis[r]] = tab[r * width + n];
  sol.objective = 0.0;
  for (std::size_t j = 0; j < lp.cols; ++j) sol.objective += lp.c[j] * sol.x[j];
  return sol;
}

struct FlowEntry {
  std::size_t comp = 0;
  Kind kind = Kind::processed;
  NodeId from = 0;
  NodeId to = 0;
  double flow = 0.0;
};

struct LambdaStar {
  double value = 0.0;
  std::vector<double> rates;  // per computation node considered (lambda_m)
  std::vector<std::size_t> comps;
  std::optional<std::vector<FlowEntry>> flows;
  std::size_t pivots = 0;
};

inline LambdaStar solve_lambda_star(const CapacityProblem& p, bool with_certificate = false) {
  const LpTableau lp = build_lp(p);
  const LpSolution sol = simplex_maximize(lp);
  LambdaStar out;
  out.value = sol.objective;
  out.pivots = sol.pivots;
  for (std::size_t r = 0; r < lp.rate_vars; ++r) {
    out.rates.push_back(sol.x[r]);
    out.comps.push_back(lp.commodities[3 * r].comp);
  }
  if (with_certificate) {
    std::vector<FlowEntry> flows;
    for (std::size_t v = 0; v < lp.flow_vars.size(); ++v) {
      const double f = sol.x[lp.rate_vars + v];
      if (f <= LpTableau::kTolerance) continue;
      const auto& com = lp.commodities[lp.flow_vars[v].commodity];
      const auto& arc = lp.arcs[lp.flow_vars[v].arc];
      flows.push_back({com.comp, com.kind, arc.from, arc.to, f});
    }
    out.flows = std::move(flows);
  }
  return out;
}

// Largest violation of conservation, capacity and sign constraints by a
// certificate; zero for an exact solution.
inline double certificate_violation(const CapacityProblem& p, const LambdaStar& sol) {
  const Topology& t = *p.topology;
  if (!sol.flows) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  std::vector<double> edge_load(t.edges().size(), 0.0);
  std::vector<double> arc_load(2 * t.edges().size(), 0.0);
  for (std::size_t r = 0; r < sol.comps.size(); ++r) {
    const std::size_t c = sol.comps[r];
    const NodeId n = t.computation_nodes()[c].node;
    worst = std::max(worst, sol.rates[r] - static_cast<double>(t.computation_nodes()[c].capacity));
    worst = std::max(worst, -sol.rates[r]);
    for (Kind kind : {Kind::raw1, Kind::raw2, Kind::processed}) {
      const NodeId src = kind == Kind::processed ? n : t.source(kind_index(kind));
      const NodeId dst = kind == Kind::processed ? t.destination() : n;
      std::vector<double> net(t.node_count(), 0.0);
      for (const auto& f : *sol.flows) {
        if (f.comp != c || f.kind != kind) continue;
        net[f.from] += f.flow;
        net[f.to] -= f.flow;
        if (f.from == dst) worst = std::max(worst, f.flow);
        worst = std::max(worst, -f.flow);
      }
      if (src != dst) {
        net[src] -= sol.rates[r];
        net[dst] += sol.rates[r];
      }
      for (double x : net) worst = std::max(worst, std::abs(x));
    }
  }
  for (const auto& f : *sol.flows) {
    for (std::size_t e = 0; e < t.edges().size(); ++e) {
      const Edge& edge = t.edges()[e];
      if (f.from == edge.a && f.to == edge.b) {
        edge_load[e] += f.flow;
        arc_load[2 * e] += f.flow;
      } else if (f.from == edge.b && f.to == edge.a) {
        edge_load[e] += f.flow;
        arc_load[2 * e + 1] += f.flow;
      }
    }
  }
  for (std::size_t e = 0; e < t.edges().size(); ++e) {
    const double cap = static_cast<double>(t.edges()[e].capacity);
    if (p.directed_capacity) {
      worst = std::max({worst, arc_load[2 * e] - cap, arc_load[2 * e + 1] - cap});
    } else {
      worst = std::max(worst, edge_load[e] - cap);
    }
  }
  return worst;
}

}  // namespace incomp
