#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shelfwise/time.hpp"

namespace shelfwise {

using State = std::size_t;

struct Transition {
  State to;
  double rate;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct GeneratorEntry {
  State from;
  State to;
  double rate;
};

// Finite continuous-time Markov chain on states 0..capacity.
//
// Off-diagonal rates are stored sparsely per row, sorted by target state, and
// never contain zeros. The diagonal is stored explicitly so that externally
// supplied (possibly broken) generators can be represented and validated;
// every builder in this library sets it to the negated off-diagonal row sum.
class Ctmc {
 public:
  Ctmc() = default;

  // Chain with no transitions and lambda one-hot at `initial`.
  Ctmc(std::size_t capacity, State initial, TimeUnit unit);

  // Builds a chain from off-diagonal entries; diagonals are implied. Entries
  // on the same (from, to) pair are summed; zero rates are dropped.
  static Ctmc from_entries(std::size_t capacity, std::vector<double> lambda,
                           std::span<const GeneratorEntry> entries, TimeUnit unit);

  // No invariant checks at all; `validate` reports what is wrong. Diagonal
  // entries in `entries` set the diagonal directly.
  static Ctmc from_raw(std::size_t capacity, std::vector<double> lambda,
                       std::span<const GeneratorEntry> entries, TimeUnit unit);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t num_states() const noexcept { return capacity_ + 1; }
  TimeUnit unit() const noexcept { return unit_; }
  const std::vector<double>& lambda() const noexcept { return lambda_; }

  std::span<const Transition> row(State i) const { return rows_.at(i); }
  double diagonal(State i) const { return diag_.at(i); }
  // Total exit rate, i.e. -q_{i,i}.
  double exit_rate(State i) const { return -diag_.at(i); }
  // q_{i,j}; zero when no transition is stored.
  double rate(State i, State j) const;

  std::size_t num_transitions() const;
  std::vector<GeneratorEntry> entries() const;

  // Adds `rate` to q_{i,j} (i != j) and keeps the diagonal consistent.
  void add_rate(State i, State j, double rate);
  void set_initial(State i);

  // Dense row-major (n x n) copy of Q.
  std::vector<double> dense() const;

  friend bool operator==(const Ctmc&, const Ctmc&) = default;

 private:
  void recompute_diagonal(State i);

  std::size_t capacity_ = 0;
  TimeUnit unit_ = TimeUnit::Hours;
  std::vector<double> lambda_;
  std::vector<std::vector<Transition>> rows_;
  std::vector<double> diag_;
};

// Restocking policy: every `batch` units arrive as a Poisson stream of rate
// `rate` (per chain time unit).
struct SupplyStrategy {
  std::size_t batch = 10;
  double rate = 0.0;
};

// Adds q_{i,i+batch} += rate for every 0 <= i <= k - batch. States closer to
// capacity receive no supply transition. Throws BatchExceedsCapacity.
Ctmc enhance_with_supply(const Ctmc& chain, const SupplyStrategy& strategy);

struct IrreducibilityReport {
  bool irreducible = false;
  // component[i] is the index of the strongly connected component of state i.
  // Components are numbered in reverse topological order of the condensation
  // (sink components first).
  std::vector<std::size_t> component;
  std::vector<std::vector<State>> components;
  // Set when reducible: no positive-rate path leads from first to second.
  std::optional<std::pair<State, State>> witness;

  std::vector<std::size_t> component_sizes() const;
};

IrreducibilityReport is_irreducible(const Ctmc& chain);

struct Violation {
  enum class Kind { LambdaNegative, LambdaSum, NegativeRate, RowSum, Shape };
  Kind kind;
  State row = 0;
  State column = 0;
  double value = 0.0;
  std::string message;
};

inline constexpr double kRowSumTolerance = 1e-12;
inline constexpr double kLambdaSumTolerance = 1e-12;

// Empty iff the chain is a valid generator with a valid initial distribution.
std::vector<Violation> validate(const Ctmc& chain);

}  // namespace shelfwise
