#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "incomp/errors.hpp"
#include "incomp/queueing.hpp"
#include "incomp/rng.hpp"

namespace incomp {

enum class ArrivalKind { poisson, bernoulli_batch, deterministic };

inline std::string to_string(ArrivalKind k) {
  switch (k) {
    case ArrivalKind::poisson: return "poisson";
    case ArrivalKind::bernoulli_batch: return "bernoulli_batch";
    case ArrivalKind::deterministic: return "deterministic";
  }
  return "poisson";
}

struct ArrivalSpec {
  ArrivalKind kind = ArrivalKind::poisson;
  double rate = 0.0;
  std::int64_t batch = 1;  // bernoulli_batch only
  std::int64_t cap = 0;    // poisson truncation; 0 selects 64 * ceil(rate)

  std::int64_t effective_cap() const {
    return cap > 0 ? cap : 64 * static_cast<std::int64_t>(std::ceil(rate));
  }
  void validate() const {
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw ParseError("arrival.rate must be >= 0");
    if (kind == ArrivalKind::bernoulli_batch) {
      if (batch < 1) throw ParseError("arrival.batch must be >= 1");
      if (rate / static_cast<double>(batch) > 1.0) throw ParseError("arrival.rate / arrival.batch must be <= 1");
    }
    if (cap < 0) throw ParseError("arrival.cap must be >= 0");
  }
  friend bool operator==(const ArrivalSpec&, const ArrivalSpec&) = default;
};

// i.i.d. query arrival process A(t). Only the deterministic kind carries state
// (the error-diffusion residue that makes the long-run mean exactly `rate`).
class ArrivalProcess {
 public:
  explicit ArrivalProcess(ArrivalSpec spec) : spec_(spec), poisson_(spec.rate > 0 ? spec.rate : 1.0) {}

  std::int64_t draw(Generator& rng) {
    if (spec_.rate <= 0.0) return 0;
    switch (spec_.kind) {
      case ArrivalKind::poisson:
        return std::min<std::int64_t>(poisson_(rng), spec_.effective_cap());
      case ArrivalKind::bernoulli_batch: {
        std::bernoulli_distribution hit(spec_.rate / static_cast<double>(spec_.batch));
        return hit(rng) ? spec_.batch : 0;
      }
      case ArrivalKind::deterministic: {
        residue_ += spec_.rate;
        const double whole = std::floor(residue_ + 1e-12);
        residue_ -= whole;
        if (residue_ < 0) residue_ = 0;
        return static_cast<std::int64_t>(whole);
      }
    }
    return 0;
  }

  const ArrivalSpec& spec() const { return spec_; }

 private:
  ArrivalSpec spec_;
  std::poisson_distribution<std::int64_t> poisson_;
  double residue_ = 0.0;
};

// Stateless single draw; the deterministic kind yields floor(rate).
inline std::int64_t draw_arrivals(const ArrivalSpec& spec, Generator& rng) {
  ArrivalProcess p(spec);
  return p.draw(rng);
}

// Admits `count` queries bound for computation node `target`: fresh tags, one
// raw packet at each source. Returns the issued tags in increasing order.
inline std::vector<Tag> admit(NetworkState& state, std::int64_t count, std::size_t target) {
  return state.admit_packets(count, target);
}

}  // namespace incomp
