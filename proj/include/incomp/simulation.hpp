#pragma once

#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "incomp/arrivals.hpp"
#include "incomp/errors.hpp"
#include "incomp/policies.hpp"
#include "incomp/queueing.hpp"
#include "incomp/rng.hpp"
#include "incomp/scenario.hpp"

namespace incomp {

inline constexpr double kSlopeThreshold = 1e-3;  // packets/slot

struct RunOptions {
  std::uint64_t stride = 100;
  bool assert_mode = true;  // validate every decision, check conservation at each record
  std::int64_t overflow_limit = std::int64_t{1} << 32;
  double slope_threshold = kSlopeThreshold;
};

struct SlotRecord {
  std::uint64_t slot = 0;  // slots completed
  std::int64_t total = 0;
  std::int64_t q = 0;
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t h = 0;
  std::int64_t delivered = 0;
  std::int64_t dummies = 0;
  std::vector<std::int64_t> assigned;  // cumulative A~^(n)
  std::vector<std::int64_t> combined;  // cumulative Z_n
};

// Exogenous randomness consumed by one slot.
struct SlotInputs {
  std::int64_t arrivals = 0;
  std::vector<std::uint8_t> bonus;  // B^(n)(t) per computation node
};

struct SlotReport {
  SlotInputs inputs;
  PolicyStep step;
  SlotOutcome outcome;
};

struct RunResult {
  std::string policy;
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
  std::uint64_t slots_run = 0;
  bool overflow = false;
  std::vector<SlotRecord> records;
  std::vector<NodeId> computation_nodes;

  // statistics over the second half of the slots run
  std::uint64_t window_start = 0;
  double mean_backlog = 0.0;
  double delivered_rate = 0.0;
  double backlog_slope = 0.0;
  double mean_x = 0.0;  // over the whole run
  std::vector<double> assigned_rate;
  bool stable = true;

  std::int64_t delivered = 0;
  std::int64_t dummy_dropped = 0;
  std::int64_t shortfall = 0;
  std::uint64_t digest = 0;
};

// Online least-squares fit of y against slot index over a fixed window.
class SlopeFit {
 public:
  explicit SlopeFit(double center = 0.0) : center_(center) {}
  void add(double t, double y) {
    const double u = t - center_;
    ++n_;
    su_ += u;
    suu_ += u * u;
    sy_ += y;
    suy_ += u * y;
  }
  double slope() const {
    if (n_ < 2) return 0.0;
    const double denom = n_ * suu_ - su_ * su_;
    return denom == 0.0 ? 0.0 : (n_ * suy_ - su_ * sy_) / denom;
  }
  double mean() const { return n_ > 0 ? sy_ / n_ : 0.0; }
  double count() const { return n_; }

 private:
  double center_;
  double n_ = 0, su_ = 0, suu_ = 0, sy_ = 0, suy_ = 0;
};

class Simulation {
 public:
  explicit Simulation(Scenario scenario, RunOptions options = {})
      : scenario_(std::move(scenario)),
        options_(options),
        state_(scenario_.topology),
        arrivals_(scenario_.arrival),
        arrival_rng_(make_stream(scenario_.seed, kArrivalStream)) {
    const auto& comp = scenario_.topology.computation_nodes();
    for (const auto& c : comp) push_rng_.push_back(make_stream(scenario_.seed, push_stream_name(c.node)));
    assigned_.assign(comp.size(), 0);
    combined_.assign(comp.size(), 0);
    if (scenario_.policy.separates_lobes() && comp.size() == 1)
      lobes_ = split_lobes(scenario_.topology, comp[0].node);
  }
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  const Scenario& scenario() const { return scenario_; }
  const NetworkState& state() const { return state_; }
  const std::vector<std::int64_t>& assigned_totals() const { return assigned_; }
  const std::vector<std::int64_t>& combined_totals() const { return combined_; }
  std::int64_t shortfall() const { return shortfall_; }

  // Draws A(t) and, for policies that push through Y_n, one B^(n)(t) per node.
  // Every stream advances exactly once per slot whatever the state.
  SlotInputs draw_inputs() {
    SlotInputs in;
    in.arrivals = arrivals_.draw(arrival_rng_);
    if (scenario_.policy.uses_result_queue()) {
      in.bonus.resize(push_rng_.size());
      for (std::size_t c = 0; c < push_rng_.size(); ++c)
        in.bonus[c] = draw_push_bit(scenario_.policy.eps(), push_rng_[c]) ? 1 : 0;
    }
    return in;
  }

  SlotReport step(const SlotInputs& in) {
    SlotReport rep;
    rep.inputs = in;
    rep.step = step_policy(scenario_.policy, state_, scenario_.topology, in.arrivals, in.bonus,
                           lobes_ ? &*lobes_ : nullptr);
    rep.outcome = options_.assert_mode ? apply_decision(state_, rep.step.decision)
                                       : apply_decision(state_, rep.step.decision, false);
    const auto& adm = rep.step.decision.admission;
    if (adm.count > 0) assigned_[adm.target] += adm.count;
    for (std::size_t c = 0; c < combined_.size(); ++c) combined_[c] += rep.outcome.combined[c];
    shortfall_ += rep.step.shortfall;
    return rep;
  }

  SlotReport step() { return step(draw_inputs()); }

  SlotRecord record() const {
    SlotRecord r;
    r.slot = state_.slot();
    r.q = state_.q_total();
    r.x = state_.x_total();
    r.y = state_.y_total();
    r.h = state_.h_total();
    r.total = r.q + r.x + r.y + r.h;
    r.delivered = state_.delivered();
    r.dummies = state_.dummy_dropped();
    r.assigned = assigned_;
    r.combined = combined_;
    return r;
  }

 private:
  Scenario scenario_;
  RunOptions options_;
  NetworkState state_;
  ArrivalProcess arrivals_;
  Generator arrival_rng_;
  std::vector<Generator> push_rng_;
  std::vector<std::int64_t> assigned_;
  std::vector<std::int64_t> combined_;
  std::int64_t shortfall_ = 0;
  std::optional<LobeSplit> lobes_;
};

namespace detail {

// Accumulates the per-slot measurements behind RunResult.
class RunMonitor {
 public:
  RunMonitor(const Scenario& s, const RunOptions& o)
      : options_(o), window_start_(s.horizon / 2), fit_(0.5 * static_cast<double>(s.horizon / 2 + s.horizon)) {
    result_.policy = to_string(s.policy.name);
    result_.rate = s.arrival.rate;
    result_.seed = s.seed;
    result_.horizon = s.horizon;
    result_.window_start = window_start_;
    for (const auto& c : s.topology.computation_nodes()) result_.computation_nodes.push_back(c.node);
  }

  // Called with the state at the end of each slot; returns false to halt.
  bool observe(const Simulation& sim) {
    const NetworkState& st = sim.state();
    const std::uint64_t done = st.slot();
    if (done == window_start_) {
      delivered_at_window_ = st.delivered();
      assigned_at_window_ = sim.assigned_totals();
    }
    const std::int64_t q = st.q_total(), x = st.x_total(), y = st.y_total(), h = st.h_total();
    const std::int64_t total = q + x + y + h;
    x_sum_ += static_cast<double>(x);
    if (done > window_start_) fit_.add(static_cast<double>(done), static_cast<double>(total));
    const bool sample = options_.stride > 0 && done % options_.stride == 0;
    if (sample) {
      result_.records.push_back(sim.record());
      if (options_.assert_mode && !conservation_holds(st))
        throw ConstraintViolation("conservation law violated at slot " + std::to_string(done));
    }
    if (total > options_.overflow_limit && st.largest_queue() > options_.overflow_limit) {
      result_.overflow = true;
      if (!sample) result_.records.push_back(sim.record());
      return false;
    }
    return true;
  }

  RunResult finish(const Simulation& sim) {
    const NetworkState& st = sim.state();
    result_.slots_run = st.slot();
    result_.delivered = st.delivered();
    result_.dummy_dropped = st.dummy_dropped();
    result_.shortfall = sim.shortfall();
    result_.digest = st.digest();
    result_.mean_x = st.slot() > 0 ? x_sum_ / static_cast<double>(st.slot()) : 0.0;
    result_.mean_backlog = fit_.mean();
    result_.backlog_slope = fit_.slope();
    const double window = static_cast<double>(st.slot() > window_start_ ? st.slot() - window_start_ : 0);
    result_.assigned_rate.assign(sim.assigned_totals().size(), 0.0);
    if (window > 0) {
      result_.delivered_rate = static_cast<double>(st.delivered() - delivered_at_window_) / window;
      for (std::size_t c = 0; c < result_.assigned_rate.size(); ++c) {
        const std::int64_t base = c < assigned_at_window_.size() ? assigned_at_window_[c] : 0;
        result_.assigned_rate[c] = static_cast<double>(sim.assigned_totals()[c] - base) / window;
      }
    }
    result_.stable = !result_.overflow && result_.backlog_slope <= options_.slope_threshold;
    return std::move(result_);
  }

 private:
  RunOptions options_;
  std::uint64_t window_start_;
  SlopeFit fit_;
  RunResult result_;
  std::int64_t delivered_at_window_ = 0;
  std::vector<std::int64_t> assigned_at_window_;
  double x_sum_ = 0.0;
};

}  // namespace detail

inline RunResult run(const Scenario& scenario, const RunOptions& options = {}) {
  Simulation sim(scenario, options);
  detail::RunMonitor monitor(scenario, options);
  for (std::uint64_t t = 0; t < scenario.horizon; ++t) {
    sim.step();
    if (!monitor.observe(sim)) break;
  }
  return monitor.finish(sim);
}

enum class SharedStream { arrivals, bonus };

struct DominanceReport {
  std::uint64_t slots_checked = 0;
  std::uint64_t violations = 0;
  std::optional<std::uint64_t> first_violation;
};

struct CoupledResult {
  RunResult a;
  RunResult b;
  DominanceReport dominance;
};

inline void check_same_except_policy(const Scenario& a, const Scenario& b) {
  if (!(a.topology == b.topology)) throw ScenarioMismatch("coupled scenarios have different topologies");
  if (!(a.arrival == b.arrival)) throw ScenarioMismatch("coupled scenarios have different arrival processes");
  if (a.horizon != b.horizon) throw ScenarioMismatch("coupled scenarios have different horizons");
  if (a.seed != b.seed) throw ScenarioMismatch("coupled scenarios have different seeds");
}

// Runs two policies in lockstep. Streams named in `shared` are drawn once per
// slot (from a's generators) and fed to both; after every slot the report
// checks X_n^(i),a <= X_n^(i),b for every node and source.
inline CoupledResult run_coupled(const Scenario& a, const Scenario& b, const std::set<SharedStream>& shared,
                                 const RunOptions& options = {}) {
  check_same_except_policy(a, b);
  Simulation sa(a, options);
  Simulation sb(b, options);
  detail::RunMonitor ma(a, options);
  detail::RunMonitor mb(b, options);
  DominanceReport dom;
  const std::size_t k = a.topology.computation_count();
  for (std::uint64_t t = 0; t < a.horizon; ++t) {
    SlotInputs ia = sa.draw_inputs();
    SlotInputs ib = sb.draw_inputs();
    if (shared.contains(SharedStream::arrivals)) ib.arrivals = ia.arrivals;
    if (shared.contains(SharedStream::bonus)) {
      if (!ia.bonus.empty()) ib.bonus = ia.bonus;
      else if (!ib.bonus.empty()) ia.bonus = ib.bonus;
    }
    sa.step(ia);
    sb.step(ib);
    ++dom.slots_checked;
    bool ok = true;
    for (std::size_t c = 0; c < k; ++c)
      for (int i = 1; i <= 2; ++i)
        if (sa.state().x_len(c, i) > sb.state().x_len(c, i)) ok = false;
    if (!ok) {
      ++dom.violations;
      if (!dom.first_violation) dom.first_violation = sa.state().slot();
    }
    const bool ca = ma.observe(sa);
    const bool cb = mb.observe(sb);
    if (!ca || !cb) break;
  }
  return {ma.finish(sa), mb.finish(sb), dom};
}

inline std::string csv_header(const std::vector<NodeId>& comp) {
  std::string h = "slot,total_backlog,q_backlog,x_backlog,y_backlog,h_backlog,delivered_cum,dummy_cum";
  for (NodeId n : comp) h += ",atilde_" + std::to_string(n);
  for (NodeId n : comp) h += ",z_" + std::to_string(n);
  return h;
}

inline void write_csv(std::ostream& os, const RunResult& r) {
  os << csv_header(r.computation_nodes) << '\n';
  for (const auto& rec : r.records) {
    os << rec.slot << ',' << rec.total << ',' << rec.q << ',' << rec.x << ',' << rec.y << ',' << rec.h << ','
       << rec.delivered << ',' << rec.dummies;
    for (auto v : rec.assigned) os << ',' << v;
    for (auto v : rec.combined) os << ',' << v;
    os << '\n';
  }
}

inline nlohmann::json summary_json(const RunResult& r) {
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(r.digest));
  nlohmann::json j{{"lambda", r.rate},
                   {"policy", r.policy},
                   {"seed", r.seed},
                   {"horizon", r.horizon},
                   {"slots_run", r.slots_run},
                   {"statistics_window", "second_half"},
                   {"window_start", r.window_start},
                   {"mean_backlog", r.mean_backlog},
                   {"backlog_slope", r.backlog_slope},
                   {"delivered_rate", r.delivered_rate},
                   {"delivered", r.delivered},
                   {"dummy_dropped", r.dummy_dropped},
                   {"shortfall", r.shortfall},
                   {"overflow", r.overflow},
                   {"stable", r.stable},
                   {"digest", digest}};
  nlohmann::json assigned = nlohmann::json::object();
  for (std::size_t c = 0; c < r.computation_nodes.size() && c < r.assigned_rate.size(); ++c)
    assigned[std::to_string(r.computation_nodes[c])] = r.assigned_rate[c];
  j["assigned_rate"] = assigned;
  return j;
}

}  // namespace incomp
