#include "shelfwise/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shelfwise/error.hpp"

namespace shelfwise {

Ctmc::Ctmc(std::size_t capacity, State initial, TimeUnit unit)
    : capacity_(capacity),
      unit_(unit),
      lambda_(capacity + 1, 0.0),
      rows_(capacity + 1),
      diag_(capacity + 1, 0.0) {
  set_initial(initial);
}

Ctmc Ctmc::from_entries(std::size_t capacity, std::vector<double> lambda,
                        std::span<const GeneratorEntry> entries, TimeUnit unit) {
  if (lambda.size() != capacity + 1) {
    throw Error(ErrorCode::InvalidArgument, "lambda must have capacity + 1 entries");
  }
  Ctmc c;
  c.capacity_ = capacity;
  c.unit_ = unit;
  c.lambda_ = std::move(lambda);
  c.rows_.resize(capacity + 1);
  c.diag_.assign(capacity + 1, 0.0);
  for (const auto& e : entries) {
    if (e.from > capacity || e.to > capacity) {
      throw Error(ErrorCode::InvalidArgument, "transition outside state space");
    }
    if (e.from == e.to) {
      throw Error(ErrorCode::InvalidArgument, "explicit self-loop in transition list");
    }
    if (!(e.rate >= 0.0) || !std::isfinite(e.rate)) {
      throw Error(ErrorCode::InvalidArgument, "transition rates must be finite and >= 0");
    }
    c.add_rate(e.from, e.to, e.rate);
  }
  return c;
}

Ctmc Ctmc::from_raw(std::size_t capacity, std::vector<double> lambda,
                    std::span<const GeneratorEntry> entries, TimeUnit unit) {
  Ctmc c;
  c.capacity_ = capacity;
  c.unit_ = unit;
  c.lambda_ = std::move(lambda);
  c.rows_.resize(capacity + 1);
  c.diag_.assign(capacity + 1, 0.0);
  for (const auto& e : entries) {
    if (e.from > capacity || e.to > capacity) {
      throw Error(ErrorCode::InvalidArgument, "transition outside state space");
    }
    if (e.from == e.to) {
      c.diag_[e.from] = e.rate;
      continue;
    }
    auto& row = c.rows_[e.from];
    auto it = std::lower_bound(row.begin(), row.end(), e.to,
                               [](const Transition& t, State s) { return t.to < s; });
    if (it != row.end() && it->to == e.to) it->rate = e.rate;
    else row.insert(it, Transition{e.to, e.rate});
  }
  return c;
}

double Ctmc::rate(State i, State j) const {
  if (i == j) return diag_.at(i);
  const auto& row = rows_.at(i);
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const Transition& t, State s) { return t.to < s; });
  return (it != row.end() && it->to == j) ? it->rate : 0.0;
}

std::size_t Ctmc::num_transitions() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.size();
  return n;
}

std::vector<GeneratorEntry> Ctmc::entries() const {
  std::vector<GeneratorEntry> out;
  out.reserve(num_transitions());
  for (State i = 0; i < rows_.size(); ++i) {
    for (const auto& t : rows_[i]) out.push_back({i, t.to, t.rate});
  }
  return out;
}

void Ctmc::add_rate(State i, State j, double rate) {
  if (i > capacity_ || j > capacity_ || i == j) {
    throw Error(ErrorCode::InvalidArgument, "add_rate: invalid transition");
  }
  if (rate == 0.0) return;
  auto& row = rows_[i];
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const Transition& t, State s) { return t.to < s; });
  if (it != row.end() && it->to == j) {
    it->rate += rate;
    if (it->rate == 0.0) row.erase(it);
  } else {
    row.insert(it, Transition{j, rate});
  }
  recompute_diagonal(i);
}

void Ctmc::set_initial(State i) {
  if (i > capacity_) {
    throw Error(ErrorCode::InvalidArgument, "initial state " + std::to_string(i) +
                                                " outside 0.." + std::to_string(capacity_));
  }
  std::fill(lambda_.begin(), lambda_.end(), 0.0);
  lambda_[i] = 1.0;
}

std::vector<double> Ctmc::dense() const {
  const std::size_t n = num_states();
  std::vector<double> q(n * n, 0.0);
  for (State i = 0; i < n; ++i) {
    q[i * n + i] = diag_[i];
    for (const auto& t : rows_[i]) q[i * n + t.to] = t.rate;
  }
  return q;
}

void Ctmc::recompute_diagonal(State i) {
  double s = 0.0;
  for (const auto& t : rows_[i]) s += t.rate;
  diag_[i] = -s;
}

Ctmc enhance_with_supply(const Ctmc& chain, const SupplyStrategy& strategy) {
  const std::size_t k = chain.capacity();
  if (strategy.batch < 1 || strategy.batch > k) {
    throw Error(ErrorCode::BatchExceedsCapacity,
                "supply batch " + std::to_string(strategy.batch) + " must lie in 1.." +
                    std::to_string(k));
  }
  if (!(strategy.rate >= 0.0) || !std::isfinite(strategy.rate)) {
    throw Error(ErrorCode::InvalidArgument, "supply rate must be finite and >= 0");
  }
  Ctmc out = chain;
  for (State i = 0; i + strategy.batch <= k; ++i) {
    out.add_rate(i, i + strategy.batch, strategy.rate);
  }
  return out;
}

std::vector<std::size_t> IrreducibilityReport::component_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(components.size());
  for (const auto& c : components) sizes.push_back(c.size());
  return sizes;
}

// Iterative Tarjan over the positive-rate digraph.
IrreducibilityReport is_irreducible(const Ctmc& chain) {
  const std::size_t n = chain.num_states();
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<State> stack;
  std::vector<std::pair<State, std::size_t>> call;  // (vertex, next edge position)
  IrreducibilityReport report;
  report.component.assign(n, 0);
  std::size_t counter = 0;

  auto positive_edge = [&](State v, std::size_t pos) { return chain.row(v)[pos].rate > 0.0; };

  for (State root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, pos] = call.back();
      const auto row = chain.row(v);
      if (pos < row.size()) {
        const std::size_t p = pos++;
        if (!positive_edge(v, p)) continue;
        const State w = row[p].to;
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const State done = v;
      call.pop_back();
      if (!call.empty()) {
        const State parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        std::vector<State> comp;
        State w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          report.component[w] = report.components.size();
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        report.components.push_back(std::move(comp));
      }
    }
  }

  report.irreducible = report.components.size() == 1;
  if (!report.irreducible) {
    // Tarjan emits a sink component first; nothing outside it is reachable
    // from inside it.
    const auto& sink = report.components.front();
    State outside = 0;
    while (report.component[outside] == 0) ++outside;
    report.witness = std::make_pair(sink.front(), outside);
  }
  return report;
}

std::vector<Violation> validate(const Ctmc& chain) {
  std::vector<Violation> out;
  const std::size_t n = chain.num_states();
  if (chain.lambda().size() != n) {
    out.push_back({Violation::Kind::Shape, 0, 0, static_cast<double>(chain.lambda().size()),
                   "lambda has " + std::to_string(chain.lambda().size()) + " entries, expected " +
                       std::to_string(n)});
    return out;
  }
  double lambda_sum = 0.0;
  for (State i = 0; i < n; ++i) {
    const double p = chain.lambda()[i];
    if (!(p >= 0.0)) {
      out.push_back({Violation::Kind::LambdaNegative, i, i, p,
                     "lambda[" + std::to_string(i) + "] is negative"});
    }
    lambda_sum += p;
  }
  if (!(std::fabs(lambda_sum - 1.0) <= kLambdaSumTolerance)) {
    out.push_back({Violation::Kind::LambdaSum, 0, 0, lambda_sum, "lambda does not sum to 1"});
  }
  for (State i = 0; i < n; ++i) {
    double sum = chain.diagonal(i);
    for (const auto& t : chain.row(i)) {
      if (!(t.rate >= 0.0)) {
        out.push_back({Violation::Kind::NegativeRate, i, t.to, t.rate,
                       "q(" + std::to_string(i) + "," + std::to_string(t.to) + ") is negative"});
      }
      sum += t.rate;
    }
    if (!(std::fabs(sum) <= kRowSumTolerance)) {
      out.push_back({Violation::Kind::RowSum, i, i, sum,
                     "row " + std::to_string(i) + " sums to " + std::to_string(sum)});
    }
  }
  return out;
}

}  // namespace shelfwise
