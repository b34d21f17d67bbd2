#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shelfwise/ctmc.hpp"
#include "shelfwise/discovery.hpp"
#include "shelfwise/error.hpp"
#include "shelfwise/eventlog.hpp"

namespace shelfwise {

inline constexpr std::size_t kMaxDenseStates = 2001;  // capacity <= 2000
inline constexpr double kResidualTolerance = 1e-8;
inline constexpr double kNormalizationTolerance = 1e-10;
inline constexpr double kClampTolerance = 1e-12;

struct SteadyState {
  std::vector<double> pi;
  double residual = 0.0;  // max_j |(pi Q)_j|
  // Diagnostics.
  std::string method;
  std::size_t refinement_steps = 0;
  std::size_t clamped = 0;  // entries in [-1e-12, 0) set to zero
};

class NotIrreducibleError : public Error {
 public:
  explicit NotIrreducibleError(IrreducibilityReport report);
  const IrreducibilityReport& report() const noexcept { return report_; }

 private:
  IrreducibilityReport report_;
};

// Stationary distribution via the global balance equations with one equation
// replaced by the normalisation row, solved densely with partial pivoting.
// The initial distribution of the chain plays no role.
// Throws NotIrreducibleError, SolverFailure, InvalidArgument (capacity > 2000).
SteadyState steady_state(const Ctmc& chain);

// Sum_i i * pi_i.
double expected_quantity(std::span<const double> pi);
// Sum_{i < max_quantity} pi_i: stock too low for at least one purchase size.
double undersupply_probability(std::span<const double> pi, std::size_t max_quantity);
// Sum_{i > threshold} (i - threshold) * pi_i: expected units above threshold.
double expected_surplus(std::span<const double> pi, std::size_t threshold);

inline double expected_quantity(const SteadyState& ss) { return expected_quantity(ss.pi); }
inline double undersupply_probability(const SteadyState& ss, std::size_t max_quantity) {
  return undersupply_probability(ss.pi, max_quantity);
}
inline double expected_surplus(const SteadyState& ss, std::size_t threshold) {
  return expected_surplus(ss.pi, threshold);
}

struct WhatIfMetrics {
  double expected_quantity = 0.0;
  double undersupply_probability = 0.0;
  double expected_surplus = 0.0;
};

struct WhatIfResult {
  SupplyStrategy strategy;
  std::size_t capacity = 0;
  std::size_t threshold = 0;
  std::size_t max_quantity = 0;
  bool irreducible = false;
  std::optional<SteadyState> steady;
  std::optional<WhatIfMetrics> metrics;
  // Sizes of the strongly connected components when reducible.
  std::vector<std::size_t> component_sizes;
};

struct SweepConfig {
  std::size_t capacity = kDefaultCapacity;
  std::optional<State> initial;
  std::size_t batch = 10;
  std::vector<double> rates;
  // Undersupply covers states 0..max_quantity-1; defaults to the largest
  // purchase quantity observed for the product.
  std::optional<std::size_t> max_quantity;
  std::size_t threshold = 70;
  TimeUnit unit = TimeUnit::Hours;
};

// Enhances the purchasing chain with one strategy, solves it and evaluates
// the metrics. Reducible chains give irreducible=false and no metrics.
WhatIfResult evaluate_strategy(const Ctmc& purchasing, const SupplyStrategy& strategy,
                               std::size_t threshold, std::size_t max_quantity);

// Discovery once, then one evaluation per rate; output order follows `rates`.
std::vector<WhatIfResult> what_if_sweep(const ProductSublog& sublog, const SweepConfig& config);

}  // namespace shelfwise
