#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "shelfwise/ctmc.hpp"

namespace shelfwise {

// Random streams are std::mt19937_64 engines seeded with
// splitmix64(seed + stream * 0x9E3779B97F4A7C15). Uniforms take the top 53
// bits; exponentials use -log(u) / rate. Both transforms are written out here
// rather than relying on <random> distributions, whose output is not
// specified bit-for-bit across standard libraries.
inline constexpr std::string_view kRngName = "mt19937_64+splitmix64";

std::uint64_t splitmix64(std::uint64_t x);
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream = 0);

struct Trajectory {
  std::vector<State> states;
  std::vector<double> entry_times;  // strictly increasing, starts at 0
  double horizon = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return states.size(); }
};

struct Occupancy {
  std::vector<double> fractions;
  double horizon = 0.0;
  double burn_in = 0.0;
  std::uint64_t seed = 0;
  std::size_t jumps = 0;
};

// Jump-chain sampler: holding time ~ Exp(exit rate), next state with
// probability q_{i,j} / exit rate. Absorbing states are held until the
// horizon. Deterministic in (chain, horizon, seed).
Trajectory sample_trajectory(const Ctmc& chain, double horizon, std::uint64_t seed);

// Time-weighted fraction of (burn_in, horizon] spent in each state. The
// default burn-in is 1% of the horizon.
Occupancy empirical_occupancy(const Ctmc& chain, double horizon, std::uint64_t seed,
                              std::optional<double> burn_in = std::nullopt);

// Averages `replicas` independent occupancies (streams 0..replicas-1 of
// `seed`), run concurrently. The result does not depend on scheduling.
Occupancy batch_occupancy(const Ctmc& chain, double horizon, std::uint64_t seed,
                          std::optional<double> burn_in, std::size_t replicas);

// Keeps at most `max_points` points of a trajectory (first and last always
// kept) for transport or plotting.
Trajectory downsample(const Trajectory& t, std::size_t max_points);

}  // namespace shelfwise
