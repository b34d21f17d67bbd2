#include "shelfwise/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "shelfwise/error.hpp"

namespace shelfwise {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Uniform on the open interval (0, 1).
double uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

class JumpSampler {
 public:
  explicit JumpSampler(const Ctmc& chain) : chain_(chain), cumulative_(chain.num_states()) {
    for (State i = 0; i < chain.num_states(); ++i) {
      double acc = 0.0;
      for (const auto& t : chain.row(i)) {
        acc += t.rate;
        cumulative_[i].push_back(acc);
      }
    }
    double acc = 0.0;
    for (double p : chain.lambda()) {
      acc += p;
      initial_.push_back(acc);
    }
  }

  State initial(std::mt19937_64& rng) const {
    return pick(initial_, uniform(rng) * initial_.back(), chain_.num_states());
  }

  double total_rate(State i) const { return cumulative_[i].empty() ? 0.0 : cumulative_[i].back(); }

  double holding(State i, std::mt19937_64& rng) const {
    return -std::log(uniform(rng)) / total_rate(i);
  }

  State next(State i, std::mt19937_64& rng) const {
    const auto& cum = cumulative_[i];
    const std::size_t pos = pick(cum, uniform(rng) * cum.back(), cum.size());
    return chain_.row(i)[pos].to;
  }

 private:
  // First index whose cumulative weight reaches `target`, skipping
  // zero-weight entries.
  static std::size_t pick(const std::vector<double>& cum, double target, std::size_t n) {
    auto it = std::lower_bound(cum.begin(), cum.end(), target);
    std::size_t idx = static_cast<std::size_t>(it - cum.begin());
    if (idx >= n) idx = n - 1;
    while (idx > 0 && cum[idx] == cum[idx - 1]) --idx;
    return idx;
  }

  const Ctmc& chain_;
  std::vector<std::vector<double>> cumulative_;
  std::vector<double> initial_;
};

void check_chain(const Ctmc& chain) {
  if (chain.lambda().size() != chain.num_states()) {
    throw Error(ErrorCode::InvalidArgument, "initial distribution has the wrong size");
  }
  const double total = std::accumulate(chain.lambda().begin(), chain.lambda().end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "initial distribution is empty");
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(seed + stream * kGolden));
}

Trajectory sample_trajectory(const Ctmc& chain, double horizon, std::uint64_t seed) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::InvalidArgument, "horizon must be > 0");
  }
  check_chain(chain);
  JumpSampler sampler(chain);
  auto rng = make_stream(seed);
  Trajectory t;
  t.horizon = horizon;
  t.seed = seed;
  State s = sampler.initial(rng);
  double now = 0.0;
  t.states.push_back(s);
  t.entry_times.push_back(now);
  while (sampler.total_rate(s) > 0.0) {
    now += sampler.holding(s, rng);
    if (now >= horizon) break;
    s = sampler.next(s, rng);
    t.states.push_back(s);
    t.entry_times.push_back(now);
  }
  return t;
}

Occupancy empirical_occupancy(const Ctmc& chain, double horizon, std::uint64_t seed,
                              std::optional<double> burn_in) {
  const double warmup = burn_in.value_or(0.01 * horizon);
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::InvalidArgument, "horizon must be > 0");
  }
  if (!(warmup >= 0.0) || !(warmup < horizon)) {
    throw Error(ErrorCode::InvalidArgument, "burn-in must satisfy 0 <= burn-in < horizon");
  }
  check_chain(chain);
  JumpSampler sampler(chain);
  auto rng = make_stream(seed);

  Occupancy occ;
  occ.horizon = horizon;
  occ.burn_in = warmup;
  occ.seed = seed;
  occ.fractions.assign(chain.num_states(), 0.0);

  State s = sampler.initial(rng);
  double now = 0.0;
  while (true) {
    double leave = horizon;
    if (sampler.total_rate(s) > 0.0) leave = std::min(horizon, now + sampler.holding(s, rng));
    const double from = std::max(now, warmup);
    if (leave > from) occ.fractions[s] += leave - from;
    if (leave >= horizon) break;
    now = leave;
    s = sampler.next(s, rng);
    occ.jumps++;
  }
  const double total = std::accumulate(occ.fractions.begin(), occ.fractions.end(), 0.0);
  for (auto& f : occ.fractions) f /= total;
  return occ;
}

Occupancy batch_occupancy(const Ctmc& chain, double horizon, std::uint64_t seed,
                          std::optional<double> burn_in, std::size_t replicas) {
  if (replicas == 0) throw Error(ErrorCode::InvalidArgument, "replicas must be >= 1");
  std::vector<std::future<Occupancy>> jobs;
  for (std::size_t r = 0; r < replicas; ++r) {
    const std::uint64_t derived = splitmix64(seed + r * kGolden);
    jobs.push_back(std::async(std::launch::async, [&chain, horizon, derived, burn_in] {
      return empirical_occupancy(chain, horizon, derived, burn_in);
    }));
  }
  Occupancy out;
  out.horizon = horizon;
  out.seed = seed;
  out.fractions.assign(chain.num_states(), 0.0);
  for (auto& j : jobs) {
    const Occupancy o = j.get();
    out.burn_in = o.burn_in;
    out.jumps += o.jumps;
    for (std::size_t i = 0; i < o.fractions.size(); ++i) out.fractions[i] += o.fractions[i];
  }
  const double total = std::accumulate(out.fractions.begin(), out.fractions.end(), 0.0);
  for (auto& f : out.fractions) f /= total;
  return out;
}

Trajectory downsample(const Trajectory& t, std::size_t max_points) {
  if (max_points < 2 || t.size() <= max_points) return t;
  Trajectory out;
  out.horizon = t.horizon;
  out.seed = t.seed;
  const double step = static_cast<double>(t.size() - 1) / static_cast<double>(max_points - 1);
  std::size_t last = static_cast<std::size_t>(-1);
  for (std::size_t k = 0; k < max_points; ++k) {
    std::size_t idx = static_cast<std::size_t>(std::llround(static_cast<double>(k) * step));
    idx = std::min(idx, t.size() - 1);
    if (idx == last) continue;
    out.states.push_back(t.states[idx]);
    out.entry_times.push_back(t.entry_times[idx]);
    last = idx;
  }
  return out;
}

}  // namespace shelfwise
