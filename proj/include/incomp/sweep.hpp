#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "incomp/errors.hpp"
#include "incomp/scenario.hpp"
#include "incomp/simulation.hpp"

namespace incomp {

struct SweepSpec {
  Scenario base;
  std::vector<double> rates;
  std::uint64_t seeds = 3;
  std::uint64_t horizon = 0;
};

// Rates start, start+step, ... up to stop (inclusive, with a small tolerance).
inline std::vector<double> rate_grid(double start, double stop, double step) {
  if (!(start <= stop)) throw ParseError("sweep grid requires start <= stop");
  if (!(step > 0.0)) throw ParseError("sweep grid requires step > 0");
  std::vector<double> out;
  for (std::int64_t k = 0;; ++k) {
    const double v = start + static_cast<double>(k) * step;
    if (v > stop + 1e-9 * std::max(1.0, std::abs(stop))) break;
    out.push_back(v);
  }
  return out;
}

// Sweep document: {"scenario": <path or inline scenario>, "lambda": {"start",
// "stop", "step"} or {"values": [...]}, "seeds": n, "horizon": n}. A relative
// scenario path resolves against `base_dir`.
inline SweepSpec parse_sweep(const std::string& text, const std::string& base_dir = "") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed sweep document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("sweep document must be an object");
  detail::reject_unknown(doc, {"scenario", "lambda", "seeds", "horizon"});
  SweepSpec spec;
  const auto& sc = detail::require(doc, "scenario");
  if (sc.is_string()) {
    std::string path = sc.get<std::string>();
    if (!path.empty() && path[0] != '/' && !base_dir.empty()) path = base_dir + "/" + path;
    spec.base = load_scenario(path);
  } else {
    spec.base = parse_scenario_json(sc);
  }
  const auto& grid = detail::require(doc, "lambda");
  if (!grid.is_object()) throw ParseError("key 'lambda' must be an object");
  if (grid.contains("values")) {
    detail::reject_unknown(grid, {"values"}, "lambda.");
    if (!grid["values"].is_array() || grid["values"].empty())
      throw ParseError("key 'lambda.values' must be a non-empty list");
    for (const auto& v : grid["values"]) spec.rates.push_back(detail::as_real(v, "lambda.values"));
  } else {
    detail::reject_unknown(grid, {"start", "stop", "step"}, "lambda.");
    spec.rates = rate_grid(detail::as_real(detail::require(grid, "start", "lambda."), "lambda.start"),
                           detail::as_real(detail::require(grid, "stop", "lambda."), "lambda.stop"),
                           detail::as_real(detail::require(grid, "step", "lambda."), "lambda.step"));
  }
  if (doc.contains("seeds")) {
    const auto s = detail::as_int(doc["seeds"], "seeds");
    if (s < 1) throw ParseError("key 'seeds' must be >= 1");
    spec.seeds = static_cast<std::uint64_t>(s);
  }
  spec.horizon = doc.contains("horizon") ? detail::as_uint(doc["horizon"], "horizon") : spec.base.horizon;
  for (double r : spec.rates) {
    ArrivalSpec a = spec.base.arrival;
    a.rate = r;
    a.validate();
  }
  return spec;
}

struct SweepRow {
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::string policy;
  bool ok = true;
  std::string error;
  double mean_backlog = 0.0;
  double backlog_slope = 0.0;
  double delivered_rate = 0.0;
  bool stable = false;
  bool overflow = false;
};

inline Scenario sweep_point(const SweepSpec& spec, double rate, std::uint64_t seed_offset) {
  Scenario s = spec.base;
  s.arrival.rate = rate;
  s.horizon = spec.horizon;
  s.seed = spec.base.seed + seed_offset;
  return s;
}

// Runs every (rate, seed) point on up to `workers` threads. Failed points are
// recorded and the sweep continues.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const RunOptions& options, unsigned workers = 1) {
  std::vector<SweepRow> rows(spec.rates.size() * spec.seeds);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      const double rate = spec.rates[i / spec.seeds];
      const Scenario s = sweep_point(spec, rate, i % spec.seeds);
      SweepRow& row = rows[i];
      row.rate = rate;
      row.seed = s.seed;
      row.policy = to_string(s.policy.name);
      try {
        const RunResult r = run(s, options);
        row.mean_backlog = r.mean_backlog;
        row.backlog_slope = r.backlog_slope;
        row.delivered_rate = r.delivered_rate;
        row.stable = r.stable;
        row.overflow = r.overflow;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(rows.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "lambda,seed,policy,mean_backlog,backlog_slope,delivered_rate,stable,overflow,error\n";
  for (const auto& r : rows) {
    os << r.rate << ',' << r.seed << ',' << r.policy << ',' << r.mean_backlog << ',' << r.backlog_slope << ','
       << r.delivered_rate << ',' << (r.ok && r.stable ? "true" : "false") << ',' << (r.overflow ? "true" : "false")
       << ',' << (r.ok ? "" : "\"" + r.error + "\"") << '\n';
  }
}

struct SweepAggregate {
  double rate = 0.0;
  std::string policy;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double mean_backlog = 0.0;
  double delivered_rate = 0.0;
  std::size_t stable_runs = 0;
};

inline std::vector<SweepAggregate> aggregate_sweep(const std::vector<SweepRow>& rows) {
  std::vector<SweepAggregate> out;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const SweepAggregate& a) { return a.rate == r.rate && a.policy == r.policy; });
    if (it == out.end()) {
      out.push_back({r.rate, r.policy});
      it = std::prev(out.end());
    }
    if (!r.ok) {
      ++it->failed;
      continue;
    }
    ++it->runs;
    it->mean_backlog += r.mean_backlog;
    it->delivered_rate += r.delivered_rate;
    it->stable_runs += r.stable ? 1 : 0;
  }
  for (auto& a : out) {
    if (a.runs == 0) continue;
    a.mean_backlog /= static_cast<double>(a.runs);
    a.delivered_rate /= static_cast<double>(a.runs);
  }
  return out;
}

inline void write_aggregate_csv(std::ostream& os, const std::vector<SweepAggregate>& agg) {
  os << "lambda,policy,runs,failed,mean_backlog,delivered_rate,stable_fraction\n";
  for (const auto& a : agg) {
    os << a.rate << ',' << a.policy << ',' << a.runs << ',' << a.failed << ',' << a.mean_backlog << ','
       << a.delivered_rate << ',' << (a.runs ? static_cast<double>(a.stable_runs) / a.runs : 0.0) << '\n';
  }
}

// Reshapes sweep CSV rows into (x, y, series) triples: x = lambda, y = the mean
// over seeds of `column`, series = policy.
inline void write_plotdata(std::ostream& os, std::istream& sweep_csv, const std::string& column) {
  std::string line;
  if (!std::getline(sweep_csv, line)) throw ParseError("empty sweep CSV");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) header.push_back(cell);
  }
  auto col = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("sweep CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t xi = col("lambda"), si = col("policy"), yi = col(column);
  std::map<std::pair<std::string, double>, std::pair<double, std::size_t>> acc;
  while (std::getline(sweep_csv, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() <= std::max({xi, si, yi})) continue;
    double y = 0.0;
    if (cells[yi] == "true" || cells[yi] == "false") y = cells[yi] == "true" ? 1.0 : 0.0;
    else y = std::stod(cells[yi]);
    auto& slot = acc[{cells[si], std::stod(cells[xi])}];
    slot.first += y;
    ++slot.second;
  }
  os << "x,y,series\n";
  for (const auto& [key, v] : acc) os << key.second << ',' << v.first / static_cast<double>(v.second) << ',' << key.first << '\n';
}

}  // namespace incomp
